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

#include "dldsep/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

namespace dldsep {

namespace {

constexpr double kStarvationFraction = 1e-8;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Expectation {
  ResponsibilityMatrix resp;
  std::size_t uniform_rows = 0;
  double log_likelihood = 0.0;
};

Expectation expect(const DldMixture& model, const AngularDataset& data) {
  if (model.dimension() != data.dimension()) {
    throw std::invalid_argument("e_step: dimension mismatch");
  }
  const std::size_t K = model.size();
  const std::vector<double> log_scale = model.log_scales();
  Expectation out{ResponsibilityMatrix(data.size(), K)};
  std::vector<double> log_w(K);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto x = data.point(n);
    double top = kNegInf;
    for (std::size_t i = 0; i < K; ++i) {
      const auto& c = model.component(i);
      log_w[i] = log_scale[i] - c.k * sin_distance(c.mean.coords(), x);
      top = std::max(top, log_w[i]);
    }
    if (top == kNegInf) {
      for (std::size_t i = 0; i < K; ++i) out.resp.at(n, i) = 1.0 / K;
      ++out.uniform_rows;
      out.log_likelihood = kNegInf;
      continue;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      log_w[i] = std::exp(log_w[i] - top);
      sum += log_w[i];
    }
    for (std::size_t i = 0; i < K; ++i) out.resp.at(n, i) = log_w[i] / sum;
    out.log_likelihood += top + std::log(sum);
  }
  return out;
}

// k-means++ seeding with D_l^2 weights.
std::vector<UnitVector> seed_centres(const AngularDataset& data,
                                     std::size_t K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<UnitVector> centres;
  centres.reserve(K);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  const auto first = data.point(pick(rng));
  centres.emplace_back(std::vector<double>(first.begin(), first.end()));
  std::vector<double> nearest(data.size(),
                              std::numeric_limits<double>::infinity());
  while (centres.size() < K) {
    double total = 0.0;
    for (std::size_t n = 0; n < data.size(); ++n) {
      const double d =
          directional_distance(centres.back().coords(), data.point(n));
      nearest[n] = std::min(nearest[n], d * d);
      total += nearest[n];
    }
    std::size_t chosen = pick(rng);
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t n = 0; n < data.size(); ++n) {
        target -= nearest[n];
        if (target <= 0.0 && nearest[n] > 0.0) {
          chosen = n;
          break;
        }
      }
    }
    const auto x = data.point(chosen);
    centres.emplace_back(std::vector<double>(x.begin(), x.end()));
  }
  return centres;
}

std::size_t nearest_centre(const std::vector<UnitVector>& centres,
                           std::span<const double> x, double* distance) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centres.size(); ++i) {
    const double d = directional_distance(centres[i].coords(), x);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (distance) *distance = best_d;
  return best;
}

}  // namespace

DldMixture::DldMixture(std::vector<DldParams> components,
                       std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.empty()) {
    throw std::invalid_argument("DldMixture: needs at least one component");
  }
  if (components_.size() != weights_.size()) {
    throw std::invalid_argument("DldMixture: weight count mismatch");
  }
  const int p = components_.front().dimension();
  double total = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].dimension() != p) {
      throw std::invalid_argument("DldMixture: mixed dimensions");
    }
    if (!(weights_[i] >= 0.0)) {
      throw std::invalid_argument("DldMixture: negative weight");
    }
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("DldMixture: weights do not sum to one");
  }
}

std::vector<double> DldMixture::log_scales() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    out[i] = weights_[i] > 0.0
                 ? std::log(weights_[i]) +
                       log_normalization_constant(dimension(),
                                                  components_[i].k)
                 : kNegInf;
  }
  return out;
}

std::vector<double> ResponsibilityMatrix::column(std::size_t i) const {
  std::vector<double> out(rows_);
  for (std::size_t n = 0; n < rows_; ++n) out[n] = at(n, i);
  return out;
}

double mixture_pdf(const DldMixture& model, std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    sum += model.weights()[i] * dld_pdf(model.component(i), x);
  }
  return sum;
}

double mixture_log_likelihood(const DldMixture& model,
                              const AngularDataset& data) {
  return expect(model, data).log_likelihood;
}

EStepResult e_step(const DldMixture& model, const AngularDataset& data) {
  Expectation e = expect(model, data);
  return {std::move(e.resp), e.uniform_rows};
}

MStepResult m_step(const DldMixture& model, const AngularDataset& data,
                   const ResponsibilityMatrix& resp, const FitConfig& config) {
  const std::size_t K = model.size();
  if (resp.rows() != data.size() || resp.cols() != K) {
    throw std::invalid_argument("m_step: responsibility shape mismatch");
  }
  if (data.empty()) throw std::invalid_argument("m_step: no data");
  const KLookupTable& table = lookup_for(config, data.dimension());
  const double N = static_cast<double>(data.size());

  std::vector<DldParams> components;
  components.reserve(K);
  std::vector<double> weights(K);
  std::vector<bool> starved(K, false);
  std::vector<RatioStatus> status(K, RatioStatus::kOk);
  for (std::size_t i = 0; i < K; ++i) {
    const std::vector<double> r = resp.column(i);
    const double total = std::accumulate(r.begin(), r.end(), 0.0);
    weights[i] = total / N;
    const DldParams& old = model.component(i);
    if (total < kStarvationFraction * N) {
      starved[i] = true;
      components.push_back(old);
      continue;
    }
    UnitVector mean = ascend_mean(old.mean, data, r, config.eta * old.k);
    const KInversion k = table.invert(mean_sin_distance(mean, data, r));
    status[i] = k.status;
    components.emplace_back(std::move(mean), k.k);
  }
  const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= weight_sum;
  return {DldMixture(std::move(components), std::move(weights)),
          std::move(starved), std::move(status)};
}

double simplified_likelihood(const DldMixture& model,
                             const AngularDataset& data,
                             const ResponsibilityMatrix& resp) {
  const std::vector<double> log_scale = model.log_scales();
  double total = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto x = data.point(n);
    for (std::size_t i = 0; i < model.size(); ++i) {
      const double r = resp.at(n, i);
      if (r == 0.0) continue;
      const auto& c = model.component(i);
      total += r * (log_scale[i] - c.k * sin_distance(c.mean.coords(), x));
    }
  }
  return total;
}

KMeansResult directional_kmeans(const AngularDataset& data, std::size_t K,
                                const FitConfig& config) {
  if (K < 1 || data.size() < K) {
    throw std::invalid_argument("directional_kmeans: need 1 <= K <= N");
  }
  return directional_kmeans_from(data, seed_centres(data, K, config.seed),
                                 config);
}

KMeansResult directional_kmeans_from(const AngularDataset& data,
                                     std::vector<UnitVector> centres,
                                     const FitConfig& config) {
  const std::size_t K = centres.size();
  if (K < 1 || data.size() < K) {
    throw std::invalid_argument("directional_kmeans: need 1 <= K <= N");
  }
  const int p = data.dimension();
  for (const auto& c : centres) {
    if (c.dimension() != p) {
      throw std::invalid_argument("directional_kmeans: dimension mismatch");
    }
  }

  KMeansResult result;
  result.assignment.assign(data.size(), 0);
  std::vector<std::vector<double>> sums(K, std::vector<double>(p));
  std::vector<std::size_t> counts(K);
  for (int it = 1; it <= config.kmeans_max_iterations; ++it) {
    for (auto& s : sums) std::fill(s.begin(), s.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t n = 0; n < data.size(); ++n) {
      const auto x = data.point(n);
      const std::size_t i = nearest_centre(centres, x, nullptr);
      result.assignment[n] = i;
      const double sign = centres[i].dot(x) < 0.0 ? -1.0 : 1.0;
      for (int j = 0; j < p; ++j) sums[i][j] += sign * x[j];
      ++counts[i];
    }

    std::vector<UnitVector> next;
    next.reserve(K);
    for (std::size_t i = 0; i < K; ++i) {
      double norm_sq = 0.0;
      for (double v : sums[i]) norm_sq += v * v;
      if (counts[i] > 0 && norm_sq > 0.0) {
        next.emplace_back(sums[i]);
        continue;
      }
      // Empty cluster: move it to the point farthest from every centre.
      std::size_t farthest = 0;
      double farthest_d = -1.0;
      for (std::size_t n = 0; n < data.size(); ++n) {
        double d = 0.0;
        nearest_centre(centres, data.point(n), &d);
        if (d > farthest_d) {
          farthest_d = d;
          farthest = n;
        }
      }
      const auto x = data.point(farthest);
      next.emplace_back(std::vector<double>(x.begin(), x.end()));
      ++result.reseeded;
    }

    double movement = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      movement = std::max(
          movement, directional_distance(centres[i].coords(), next[i].coords()));
    }
    centres = std::move(next);
    result.iterations = it;
    if (movement < config.kmeans_tolerance) {
      result.converged = true;
      break;
    }
  }

  result.objective = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    double d = 0.0;
    result.assignment[n] = nearest_centre(centres, data.point(n), &d);
    result.objective += d;
  }
  result.centres = std::move(centres);
  return result;
}

MixtureFit fit_mixture_from(const AngularDataset& data,
                            const std::vector<UnitVector>& initial_means,
                            const FitConfig& config) {
  config.validate();
  const std::size_t K = initial_means.size();
  if (K < 1 || data.size() < K) {
    throw std::invalid_argument("fit_mixture: need 1 <= K <= N");
  }
  std::vector<DldParams> components;
  components.reserve(K);
  for (const auto& m : initial_means) {
    if (m.dimension() != data.dimension()) {
      throw std::invalid_argument("fit_mixture: dimension mismatch");
    }
    components.emplace_back(m, config.initial_k);
  }
  DldMixture model(std::move(components), std::vector<double>(K, 1.0 / K));

  MixtureDiagnostics diag;
  diag.starved.assign(K, false);
  diag.k_status.assign(K, RatioStatus::kOk);
  double previous = 0.0;
  for (;;) {
    Expectation e = expect(model, data);
    const double current = simplified_likelihood(model, data, e.resp);
    diag.simplified_history.push_back(current);
    diag.log_likelihood_history.push_back(e.log_likelihood);
    diag.simplified_likelihood = current;
    diag.log_likelihood = e.log_likelihood;
    diag.uniform_rows = e.uniform_rows;
    if (diag.iterations > 0 &&
        std::abs(current - previous) <
            config.em_tolerance * std::max(std::abs(previous), 1e-12)) {
      diag.converged = true;
      break;
    }
    if (diag.iterations == config.em_max_iterations) break;
    MStepResult m = m_step(model, data, e.resp, config);
    model = std::move(m.model);
    for (std::size_t i = 0; i < K; ++i) {
      if (m.starved[i]) diag.starved[i] = true;
    }
    diag.k_status = std::move(m.k_status);
    ++diag.iterations;
    previous = current;
  }
  return {std::move(model), std::move(diag)};
}

MixtureFit fit_mixture(const AngularDataset& data, std::size_t K,
                       const FitConfig& config) {
  config.validate();
  if (K < 1 || data.size() < K) {
    throw std::invalid_argument("fit_mixture: need 1 <= K <= N");
  }
  std::optional<MixtureFit> best;
  for (int r = 0; r < config.restarts; ++r) {
    FitConfig run = config;
    run.seed = config.seed + static_cast<std::uint64_t>(r);
    KMeansResult km = directional_kmeans(data, K, run);
    MixtureFit fit = fit_mixture_from(data, km.centres, config);
    fit.diagnostics.kmeans_iterations = km.iterations;
    fit.diagnostics.kmeans_objective = km.objective;
    fit.diagnostics.restart = r;
    if (!best ||
        fit.diagnostics.log_likelihood > best->diagnostics.log_likelihood) {
      best = std::move(fit);
    }
  }
  return std::move(*best);
}

}  // namespace dldsep
