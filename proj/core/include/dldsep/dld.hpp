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

// Single directional Laplacian density on the half unit sphere:
//
//   p(x) = c_p(k) * exp(-k * sqrt(1 - (m'x)^2))
//
// with maximum-likelihood estimation of (m, k) by alternating a gradient
// ascent step on m with a lookup-table solve for k.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dldsep/directional.hpp"
#include "dldsep/special.hpp"

namespace dldsep {

/// Mean direction and concentration of one density. The dimension p is the
/// dimension of the mean.
struct DldParams {
  UnitVector mean;
  double k;

  /// Throws std::invalid_argument unless 0 <= k <= kMaxConcentration.
  DldParams(UnitVector mean, double k);

  int dimension() const { return mean.dimension(); }
};

struct FitConfig {
  double eta = 0.01;
  int max_iterations = 1000;
  double tolerance = 1e-8;
  double initial_k = 15.0;

  int em_max_iterations = 500;
  double em_tolerance = 1e-6;
  int restarts = 1;

  int kmeans_max_iterations = 100;
  double kmeans_tolerance = 1e-6;

  std::uint64_t seed = 0;

  // Overrides the shared default-grid table when set.
  std::shared_ptr<const KLookupTable> lookup;

  /// Throws std::invalid_argument on non-positive step, tolerances or
  /// iteration counts.
  void validate() const;
};

struct FitResult {
  DldParams params;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  RatioStatus k_status = RatioStatus::kOk;
};

double dld_pdf(const DldParams& params, std::span<const double> x);
double dld_log_pdf(const DldParams& params, std::span<const double> x);

/// N log c_p(k) - k * sum_n sqrt(1 - (m'x_n)^2). Empty data throws.
double dld_log_likelihood(const DldParams& params, const AngularDataset& data);

/// Gradient of the log-likelihood with respect to the (unconstrained) mean:
/// k * sum_n (m'x_n / sqrt(1 - (m'x_n)^2)) x_n.
std::vector<double> dld_mean_gradient(const DldParams& params,
                                      const AngularDataset& data);

/// Leading eigenvector of sum_n w_n x_n x_n'. Insensitive to the sign of
/// each point. `weights` may be empty (all ones).
UnitVector dominant_axis(const AngularDataset& data,
                         std::span<const double> weights = {});

/// One ascent step m + step * sum_n w_n (m'x_n / sin_n) x_n followed by
/// renormalization. With unit weights and step = eta this is the single
/// density update; the mixture update passes responsibilities and eta*k_i.
UnitVector ascend_mean(const UnitVector& mean, const AngularDataset& data,
                       std::span<const double> weights, double step);

/// sum_n w_n sqrt(1 - (m'x_n)^2) / sum_n w_n, the right-hand side of the
/// k-equation.
double mean_sin_distance(const UnitVector& mean, const AngularDataset& data,
                         std::span<const double> weights = {});

/// Lookup table for dimension p: the config override or the shared table.
const KLookupTable& lookup_for(const FitConfig& config, int p);

/// Maximum-likelihood fit. Starts from the dominant axis of the data and
/// k = config.initial_k, then alternates ascend_mean (step eta) with the
/// k solve until the relative log-likelihood change drops below
/// config.tolerance or config.max_iterations is reached.
FitResult fit_dld(const AngularDataset& data, const FitConfig& config = {});

}  // namespace dldsep
