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

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "dldsep/directional.hpp"
#include "dldsep/dld.hpp"
#include "dldsep/mixture.hpp"

namespace dldsep {

/// Seeded 64-bit generator. uniform() is built from raw engine bits so the
/// sequence does not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Laplace(0, scale) variate.
  double laplace(double scale);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// Orderings of spherical angles used to build directions and mixing
/// columns.
///
/// kAzimuthFirst: angles (a1, a2, ..., a_{p-1}) give
///   [cos a_{p-1} ... cos a2 cos a1, cos a_{p-1} ... cos a2 sin a1, ...,
///    cos a_{p-1} sin a_{p-2}, sin a_{p-1}],
/// e.g. [cos a2 cos a1; cos a2 sin a1; sin a2] for p = 3.
/// kElevationFirst: the same map with the angle list reversed, e.g.
/// [cos a1 cos a2; cos a1 sin a2; sin a1] for p = 3.
enum class AngleOrder { kAzimuthFirst, kElevationFirst };

const char* to_string(AngleOrder order);
AngleOrder angle_order_from_string(std::string_view name);

/// p-1 spherical angles in radians. Any finite values are accepted;
/// the half-sphere parameterization uses [0, pi) for each.
struct SphericalAngles {
  std::vector<double> radians;
};

UnitVector spherical_to_unit(const SphericalAngles& angles,
                             AngleOrder order = AngleOrder::kAzimuthFirst);

/// Angle in [0, pi) of a 2-D direction (the axis of x, ignoring sign).
double axial_angle(std::span<const double> x);

/// (a1, a2) in [0, pi)^2 of a 3-D direction under kAzimuthFirst, choosing
/// the antipodal representative with x3 >= 0.
std::array<double, 2> half_sphere_angles(std::span<const double> x);

/// n angles in [0, pi) from c(k) exp(-k |sin(t - mean_angle)|) by inverting
/// a 4096-point tabulated CDF with linear interpolation.
std::vector<double> sample_dld_1d(double mean_angle, double k, std::size_t n,
                                  std::uint64_t seed);

struct BlockSamplerOptions {
  // Blocks per angular axis. 0 picks 360 for p <= 3 and the largest count
  // keeping the grid under 2^22 blocks otherwise.
  int blocks_per_axis = 0;
};

/// Grid sampler for any p >= 2. The half sphere is parameterized by p-1
/// angles in [0, pi) (kAzimuthFirst); each block is weighted by the density
/// at its centre times the integral of the spherical area element over the
/// block. Block indices are drawn from these weights and points are uniform
/// within a block. Throws std::invalid_argument for p < 2.
AngularDataset sample_dld(const DldParams& params, std::size_t n,
                          std::uint64_t seed,
                          const BlockSamplerOptions& options = {});

struct LabelledSample {
  AngularDataset data;
  std::vector<std::size_t> labels;
};

/// round(a_i * n) points from each component (largest remainder so counts
/// total n), component i drawn with its own derived seed.
LabelledSample sample_mixture(const DldMixture& model, std::size_t n,
                              std::uint64_t seed,
                              const BlockSamplerOptions& options = {});

}  // namespace dldsep
