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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dldsep/directional.hpp"
#include "dldsep/dld.hpp"

namespace dldsep {

/// Weighted sum of directional Laplacian densities sharing one dimension.
class DldMixture {
 public:
  /// Requires K >= 1 components of equal dimension and nonnegative weights
  /// summing to one within 1e-9. Throws std::invalid_argument.
  DldMixture(std::vector<DldParams> components, std::vector<double> weights);

  std::size_t size() const { return components_.size(); }
  int dimension() const { return components_.front().dimension(); }
  const DldParams& component(std::size_t i) const { return components_[i]; }
  const std::vector<DldParams>& components() const { return components_; }
  std::span<const double> weights() const { return weights_; }

  /// log(a_i c_p(k_i)) per component; -inf where a_i = 0.
  std::vector<double> log_scales() const;

 private:
  std::vector<DldParams> components_;
  std::vector<double> weights_;
};

/// N x K posterior probabilities p(i | x_n), row-major.
class ResponsibilityMatrix {
 public:
  ResponsibilityMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t n, std::size_t i) { return values_[n * cols_ + i]; }
  double at(std::size_t n, std::size_t i) const {
    return values_[n * cols_ + i];
  }
  std::span<const double> row(std::size_t n) const {
    return {values_.data() + n * cols_, cols_};
  }
  /// Copy of column i, usable as per-point weights.
  std::vector<double> column(std::size_t i) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

double mixture_pdf(const DldMixture& model, std::span<const double> x);

/// sum_n log p(x_n) under the mixture.
double mixture_log_likelihood(const DldMixture& model,
                              const AngularDataset& data);

struct EStepResult {
  ResponsibilityMatrix responsibilities;
  // Rows where every weighted component density was zero; they get 1/K.
  std::size_t uniform_rows = 0;
};

EStepResult e_step(const DldMixture& model, const AngularDataset& data);

struct MStepResult {
  DldMixture model;
  // Components whose total responsibility fell below 1e-8 * N keep their
  // previous mean and k.
  std::vector<bool> starved;
  std::vector<RatioStatus> k_status;
};

/// Weights from mean responsibility, one responsibility-weighted ascent
/// step per mean with step eta * k_i, then k_i from the weighted
/// k-equation.
MStepResult m_step(const DldMixture& model, const AngularDataset& data,
                   const ResponsibilityMatrix& resp, const FitConfig& config);

/// sum_n sum_i p(i|x_n) (log(a_i c_p(k_i)) - k_i sqrt(1 - (m_i'x_n)^2)),
/// the expected complete-data log-likelihood used as the EM stopping rule.
double simplified_likelihood(const DldMixture& model,
                             const AngularDataset& data,
                             const ResponsibilityMatrix& resp);

struct KMeansResult {
  std::vector<UnitVector> centres;
  std::vector<std::size_t> assignment;
  double objective = 0.0;  // sum of D_l over points
  int iterations = 0;
  int reseeded = 0;
  bool converged = false;
};

/// Lloyd iteration with D_l(x, m) = sqrt(1 - (m'x)^2). Members are flipped
/// into the hemisphere of their centre before averaging. Centres are seeded
/// D_l^2-proportionally (k-means++) from config.seed.
KMeansResult directional_kmeans(const AngularDataset& data, std::size_t K,
                                const FitConfig& config = {});

/// Same iteration from caller-provided starting centres.
KMeansResult directional_kmeans_from(const AngularDataset& data,
                                     std::vector<UnitVector> centres,
                                     const FitConfig& config = {});

struct MixtureDiagnostics {
  int iterations = 0;
  bool converged = false;
  double simplified_likelihood = 0.0;
  double log_likelihood = 0.0;
  std::vector<bool> starved;
  std::vector<RatioStatus> k_status;
  std::size_t uniform_rows = 0;
  int kmeans_iterations = 0;
  double kmeans_objective = 0.0;
  int restart = 0;
  // Per EM iteration, evaluated at the model entering that iteration.
  std::vector<double> simplified_history;
  std::vector<double> log_likelihood_history;
};

struct MixtureFit {
  DldMixture model;
  MixtureDiagnostics diagnostics;
};

/// EM fit with K components: directional K-means means, k_i =
/// config.initial_k, a_i = 1/K, then e_step/m_step until the relative change
/// of the simplified likelihood is below config.em_tolerance. With
/// config.restarts > 1 the run with the largest log-likelihood wins.
MixtureFit fit_mixture(const AngularDataset& data, std::size_t K,
                       const FitConfig& config = {});

/// EM from explicit initial means (no K-means).
MixtureFit fit_mixture_from(const AngularDataset& data,
                            const std::vector<UnitVector>& initial_means,
                            const FitConfig& config = {});

}  // namespace dldsep
