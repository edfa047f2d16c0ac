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
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "dldsep/directional.hpp"
#include "dldsep/dld.hpp"

namespace dldsep {

// ---------------------------------------------------------------------------
// Separation quality

/// Orthogonal decomposition of one estimate against a set of references.
struct BssDecomposition {
  std::vector<double> target;        // projection onto the matched reference
  std::vector<double> interference;  // rest of the projection onto all refs
  std::vector<double> artifact;      // component outside the reference span
};

/// Throws std::invalid_argument on unequal lengths or an empty or
/// linearly dependent reference set.
BssDecomposition bss_decompose(std::span<const double> estimate,
                               const std::vector<std::vector<double>>& references,
                               std::size_t target);

struct SourceScore {
  std::size_t reference = 0;
  std::size_t estimate = 0;
  // dB; +inf when the denominator power vanishes, -inf when the numerator
  // does (zero estimate).
  double sdr = 0.0;
  double sir = 0.0;
  double sar = 0.0;
};

struct SeparationScores {
  std::vector<SourceScore> sources;  // ordered by reference

  double mean_sdr() const;
  double mean_sir() const;
  double mean_sar() const;
};

/// Estimates are matched to references greedily by largest absolute
/// correlation. Throws std::invalid_argument when counts or lengths differ
/// or a reference is zero.
SeparationScores bss_scores(const std::vector<std::vector<double>>& estimates,
                            const std::vector<std::vector<double>>& references);

// ---------------------------------------------------------------------------
// Goodness of fit

/// Density on the half unit sphere, integrating to one there.
using HalfSphereDensity = std::function<double(std::span<const double>)>;

struct ChiSquareOptions {
  int bins_1d = 72;  // uniform bins of the axial angle in [0, pi)
  int bins_2d = 36;  // per angle of the (a1, a2) half-sphere grid
  double min_expected = 1e-12;
};

struct ChiSquareBin {
  double observed = 0.0;
  double expected = 0.0;
  std::size_t first_bin = 0;  // raw bin range merged into this cell
  std::size_t last_bin = 0;
};

struct ChiSquareResult {
  double statistic = 0.0;
  int degrees_of_freedom = 0;  // cells - 1
  double model_mass = 0.0;     // total integrated model probability
  std::vector<ChiSquareBin> cells;
};

/// Pearson statistic sum (O - E)^2 / E over angular bins for p = 2 (axial
/// angle) or p = 3 (half_sphere_angles grid, area element included), with
/// the model integrated per bin by 8-point Gauss-Legendre per axis. Bins
/// whose expected count is below min_expected are merged forward with the
/// following bins. Throws std::invalid_argument for other p or empty data.
ChiSquareResult pearson_chi_square(const AngularDataset& data,
                                   const HalfSphereDensity& density,
                                   const ChiSquareOptions& options = {});

/// Upper quantile of the chi-square distribution.
double chi_square_quantile(double probability, int degrees_of_freedom);

// ---------------------------------------------------------------------------
// von Mises-Fisher baseline

inline constexpr double kMaxVmfConcentration = 1e3;

struct VmfParams {
  UnitVector mean;
  double kappa = 0.0;
};

/// Sign-aligns every point to the dominant axis, then takes the normalized
/// resultant as the mean and kappa = r(p - r^2) / (1 - r^2) with r the mean
/// resultant length, clamped to kMaxVmfConcentration. A vanishing resultant
/// gives kappa = 0. Throws std::invalid_argument on empty data.
VmfParams fit_vmf(const AngularDataset& data);

/// log of the modified Bessel function of the first kind I_nu(x), x >= 0,
/// stable for large x.
double log_bessel_i(double nu, double x);

/// Full-sphere log density log C_p(kappa) + kappa m'x.
double vmf_log_pdf(const VmfParams& params, std::span<const double> x);

/// Density folded onto the half sphere, f(x) + f(-x), which integrates to
/// one over the half sphere.
double vmf_half_sphere_pdf(const VmfParams& params, std::span<const double> x);

HalfSphereDensity dld_density(const DldParams& params);
HalfSphereDensity vmf_density(const VmfParams& params);

}  // namespace dldsep
