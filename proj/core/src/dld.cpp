// Copyright 2026 The dldsep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dldsep/dld.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>
#include <stdexcept>

namespace dldsep {

namespace {

void require_dimension(int expected, int actual) {
  if (expected != actual) {
    throw std::invalid_argument("dimension mismatch: expected " +
                                std::to_string(expected) + ", got " +
                                std::to_string(actual));
  }
}

double weight_at(std::span<const double> weights, std::size_t n) {
  return weights.empty() ? 1.0 : weights[n];
}

}  // namespace

DldParams::DldParams(UnitVector mean_in, double k_in)
    : mean(std::move(mean_in)), k(k_in) {
  if (!(k >= 0.0 && k <= kMaxConcentration)) {
    throw std::invalid_argument("DldParams: k must lie in [0, 30]");
  }
}

void FitConfig::validate() const {
  if (!(eta > 0.0) || !(tolerance > 0.0) || !(em_tolerance > 0.0) ||
      !(kmeans_tolerance > 0.0)) {
    throw std::invalid_argument("FitConfig: step and tolerances must be > 0");
  }
  if (max_iterations < 1 || em_max_iterations < 1 ||
      kmeans_max_iterations < 1 || restarts < 1) {
    throw std::invalid_argument("FitConfig: iteration counts must be >= 1");
  }
  if (!(initial_k >= 0.0 && initial_k <= kMaxConcentration)) {
    throw std::invalid_argument("FitConfig: initial_k must lie in [0, 30]");
  }
}

double dld_log_pdf(const DldParams& params, std::span<const double> x) {
  require_dimension(params.dimension(), static_cast<int>(x.size()));
  return log_normalization_constant(params.dimension(), params.k) -
         params.k * sin_distance(params.mean.coords(), x);
}

double dld_pdf(const DldParams& params, std::span<const double> x) {
  return std::exp(dld_log_pdf(params, x));
}

double dld_log_likelihood(const DldParams& params,
                          const AngularDataset& data) {
  if (data.empty()) throw std::invalid_argument("log-likelihood: no data");
  require_dimension(params.dimension(), data.dimension());
  double sin_sum = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    sin_sum += sin_distance(params.mean.coords(), data.point(n));
  }
  return static_cast<double>(data.size()) *
             log_normalization_constant(params.dimension(), params.k) -
         params.k * sin_sum;
}

std::vector<double> dld_mean_gradient(const DldParams& params,
                                      const AngularDataset& data) {
  require_dimension(params.dimension(), data.dimension());
  const int p = data.dimension();
  std::vector<double> grad(p, 0.0);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto x = data.point(n);
    const double t = params.mean.dot(x);
    const double scale = t / sin_distance(params.mean.coords(), x);
    for (int j = 0; j < p; ++j) grad[j] += scale * x[j];
  }
  for (double& g : grad) g *= params.k;
  return grad;
}

UnitVector dominant_axis(const AngularDataset& data,
                         std::span<const double> weights) {
  if (data.empty()) throw std::invalid_argument("dominant_axis: no data");
  const int p = data.dimension();
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const Eigen::Map<const Eigen::VectorXd> x(data.point(n).data(), p);
    scatter.noalias() += weight_at(weights, n) * x * x.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scatter);
  const Eigen::VectorXd axis = solver.eigenvectors().col(p - 1);
  return UnitVector(std::vector<double>(axis.data(), axis.data() + p));
}

UnitVector ascend_mean(const UnitVector& mean, const AngularDataset& data,
                       std::span<const double> weights, double step) {
  require_dimension(mean.dimension(), data.dimension());
  const int p = data.dimension();
  std::vector<double> next(mean.coords().begin(), mean.coords().end());
  for (std::size_t n = 0; n < data.size(); ++n) {
    const double w = weight_at(weights, n);
    if (w == 0.0) continue;
    const auto x = data.point(n);
    const double scale =
        step * w * mean.dot(x) / sin_distance(mean.coords(), x);
    for (int j = 0; j < p; ++j) next[j] += scale * x[j];
  }
  return UnitVector(std::move(next));
}

double mean_sin_distance(const UnitVector& mean, const AngularDataset& data,
                         std::span<const double> weights) {
  require_dimension(mean.dimension(), data.dimension());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const double w = weight_at(weights, n);
    num += w * sin_distance(mean.coords(), data.point(n));
    den += w;
  }
  if (!(den > 0.0)) {
    throw std::invalid_argument("mean_sin_distance: zero total weight");
  }
  return num / den;
}

const KLookupTable& lookup_for(const FitConfig& config, int p) {
  if (config.lookup) {
    require_dimension(p, config.lookup->dimension());
    return *config.lookup;
  }
  return shared_k_lookup(p);
}

FitResult fit_dld(const AngularDataset& data, const FitConfig& config) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("fit_dld: no data");
  const int p = data.dimension();
  if (data.size() < static_cast<std::size_t>(p)) {
    spdlog::warn("fit_dld: {} points for dimension {}", data.size(), p);
  }
  const KLookupTable& table = lookup_for(config, p);

  FitResult result{DldParams(dominant_axis(data), config.initial_k)};
  double previous = dld_log_likelihood(result.params, data);
  for (int it = 1; it <= config.max_iterations; ++it) {
    UnitVector mean = ascend_mean(result.params.mean, data, {}, config.eta);
    const KInversion k = table.invert(mean_sin_distance(mean, data));
    result.params = DldParams(std::move(mean), k.k);
    result.k_status = k.status;
    result.iterations = it;
    const double current = dld_log_likelihood(result.params, data);
    result.log_likelihood = current;
    const double change = std::abs(current - previous);
    if (change < config.tolerance * std::max(std::abs(previous), 1e-12)) {
      result.converged = true;
      break;
    }
    previous = current;
  }
  return result;
}

}  // namespace dldsep
