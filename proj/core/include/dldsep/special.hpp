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

#include <memory>
#include <span>
#include <vector>

namespace dldsep {

// Working range of the concentration parameter. The lookup table spans it
// and every estimated k is clamped into it.
inline constexpr double kMinConcentration = 0.01;
inline constexpr double kMaxConcentration = 30.0;
inline constexpr int kDefaultLookupGridSize = 3000;

/// Sine-exponential integral (1/pi) * int_0^pi exp(-k sin t) sin^p t dt.
///
/// This is the family that normalizes the directional Laplacian density; it
/// is not the classical modified Bessel function. Evaluated by adaptive
/// Gauss-Kronrod quadrature over [0, pi/2] using the symmetry of the
/// integrand. Throws std::domain_error for p < 0 or k < 0 (or non-finite k).
double sine_exp_integral(int p, double k);

/// Gamma function for x > 0. Throws std::domain_error otherwise.
double gamma_function(double x);

/// c_p(k) = Gamma((p-1)/2) / (pi^((p+1)/2) * I_{p-2}(k)), the constant that
/// makes the density integrate to one over the half unit sphere in R^p.
double normalization_constant(int p, double k);

/// log c_p(k); stays finite where the constant itself would be awkward.
double log_normalization_constant(int p, double k);

/// I_{p-1}(k) / I_{p-2}(k). This is the expected value of sqrt(1-(m'x)^2)
/// under a density with concentration k, so it is what the k-equation of
/// the maximum-likelihood fit matches against the data.
double concentration_ratio(int p, double k);

enum class RatioStatus {
  kOk,
  kClampedToMaxK,  // ratio at or below the table minimum (data too tight)
  kClampedToMinK,  // ratio at or above the table maximum (data too spread)
};

const char* to_string(RatioStatus status);

struct KInversion {
  double k = kMinConcentration;
  RatioStatus status = RatioStatus::kOk;
};

/// Tabulated map k -> I_{p-1}(k)/I_{p-2}(k) over a uniform k grid, inverted
/// with shape-preserving piecewise-cubic (PCHIP) interpolation.
///
/// Immutable after construction; safe to share between threads.
class KLookupTable {
 public:
  /// Validates the grids: equal sizes (>= 4), k strictly increasing, ratio
  /// strictly decreasing and inside (0, 1). Throws std::invalid_argument.
  KLookupTable(int p, std::vector<double> k_grid,
               std::vector<double> ratio_grid);

  int dimension() const { return p_; }
  std::span<const double> k_grid() const { return k_grid_; }
  std::span<const double> ratio_grid() const { return ratio_grid_; }
  std::size_t size() const { return k_grid_.size(); }

  KInversion invert(double ratio) const;

 private:
  struct Interpolant;

  int p_;
  std::vector<double> k_grid_;
  std::vector<double> ratio_grid_;
  std::shared_ptr<const Interpolant> interpolant_;
};

/// Tabulates the ratio for `grid_size` k values uniformly spaced over
/// [kMinConcentration, kMaxConcentration]. Requires p >= 2 and
/// grid_size >= 100.
KLookupTable build_k_lookup(int p, int grid_size = kDefaultLookupGridSize);

/// Concentration whose ratio equals `ratio`. Out-of-range ratios clamp to
/// the table ends and report it through the status.
KInversion invert_ratio(const KLookupTable& table, double ratio);

/// Process-wide table with the default grid, built on first use per p.
const KLookupTable& shared_k_lookup(int p);

}  // namespace dldsep
