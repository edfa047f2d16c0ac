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

#include "dldsep/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <spdlog/spdlog.h>
#include <stdexcept>
#include <string>

namespace dldsep {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kCdfGridSize = 4096;
constexpr int kDefaultBlocksPerAxis = 360;
constexpr double kMaxBlocks = 4194304.0;  // 2^22

// Writes the kAzimuthFirst map of `angles` into `out` (size angles+1).
void azimuth_first_coords(std::span<const double> angles,
                          std::span<double> out) {
  const std::size_t d = angles.size();
  double tail = 1.0;  // product of cos a_l for l >= i
  for (std::size_t i = d; i-- > 1;) {
    out[i + 1] = std::sin(angles[i]) * tail;
    tail *= std::cos(angles[i]);
  }
  out[0] = std::cos(angles[0]) * tail;
  out[1] = std::sin(angles[0]) * tail;
}

// Integral of |cos t|^power over [lo, hi] by composite Simpson.
double area_factor(double lo, double hi, int power) {
  if (power == 0) return hi - lo;
  constexpr int kPanels = 16;
  const double h = (hi - lo) / kPanels;
  double sum = 0.0;
  for (int j = 0; j <= kPanels; ++j) {
    const double w = (j == 0 || j == kPanels) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    sum += w * std::pow(std::abs(std::cos(lo + j * h)), power);
  }
  return sum * h / 3.0;
}

int blocks_for(int p, const BlockSamplerOptions& options) {
  if (options.blocks_per_axis > 0) return options.blocks_per_axis;
  if (p <= 3) return kDefaultBlocksPerAxis;
  const int b = static_cast<int>(std::floor(std::pow(kMaxBlocks, 1.0 / (p - 1))));
  return std::clamp(b, 8, kDefaultBlocksPerAxis);
}

}  // namespace

double Rng::laplace(double scale) {
  const double u = uniform() - 0.5;
  const double mag = -std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -scale * mag : scale * mag;
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

const char* to_string(AngleOrder order) {
  return order == AngleOrder::kAzimuthFirst ? "azimuth-first"
                                            : "elevation-first";
}

AngleOrder angle_order_from_string(std::string_view name) {
  if (name == "azimuth-first") return AngleOrder::kAzimuthFirst;
  if (name == "elevation-first") return AngleOrder::kElevationFirst;
  throw std::invalid_argument("unknown angle order: " + std::string(name));
}

UnitVector spherical_to_unit(const SphericalAngles& angles, AngleOrder order) {
  const auto& a = angles.radians;
  if (a.empty()) {
    throw std::invalid_argument("spherical_to_unit: need at least one angle");
  }
  for (double v : a) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("spherical_to_unit: non-finite angle");
    }
  }
  std::vector<double> ordered(a);
  if (order == AngleOrder::kElevationFirst) {
    std::reverse(ordered.begin(), ordered.end());
  }
  std::vector<double> x(a.size() + 1);
  azimuth_first_coords(ordered, x);
  return UnitVector(std::move(x));
}

double axial_angle(std::span<const double> x) {
  if (x.size() != 2) throw std::invalid_argument("axial_angle: need p = 2");
  double t = std::atan2(x[1], x[0]);
  if (t < 0.0) t += kPi;
  if (t >= kPi) t -= kPi;
  return t;
}

std::array<double, 2> half_sphere_angles(std::span<const double> x) {
  if (x.size() != 3) {
    throw std::invalid_argument("half_sphere_angles: need p = 3");
  }
  const double s = x[2] < 0.0 ? -1.0 : 1.0;
  const double x0 = s * x[0], x1 = s * x[1], x2 = s * x[2];
  const double r = std::hypot(x0, x1);
  const double phi = std::atan2(x1, x0);
  const double elevation = std::atan2(x2, r);
  if (phi >= 0.0 && phi < kPi) return {phi, elevation};
  const double azimuth = phi < 0.0 ? phi + kPi : phi - kPi;
  return {azimuth, std::min(kPi - elevation, std::nextafter(kPi, 0.0))};
}

std::vector<double> sample_dld_1d(double mean_angle, double k, std::size_t n,
                                  std::uint64_t seed) {
  if (!(k >= 0.0) || !std::isfinite(k) || !std::isfinite(mean_angle)) {
    throw std::invalid_argument("sample_dld_1d: bad parameters");
  }
  const double h = kPi / (kCdfGridSize - 1);
  auto density = [&](double t) {
    return std::exp(-k * std::abs(std::sin(t - mean_angle)));
  };
  std::vector<double> cdf(kCdfGridSize, 0.0);
  for (std::size_t j = 1; j < kCdfGridSize; ++j) {
    const double a = (j - 1) * h;
    cdf[j] = cdf[j - 1] +
             h / 6.0 * (density(a) + 4.0 * density(a + 0.5 * h) + density(a + h));
  }
  const double total = cdf.back();
  for (double& c : cdf) c /= total;

  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& theta : out) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t j =
        std::min<std::size_t>(std::distance(cdf.begin(), it), kCdfGridSize - 1);
    const double lo = cdf[j - 1];
    const double span = cdf[j] - lo;
    const double frac = span > 0.0 ? (u - lo) / span : 0.5;
    theta = (j - 1 + frac) * h;
    if (theta >= kPi) theta -= kPi;
  }
  return out;
}

AngularDataset sample_dld(const DldParams& params, std::size_t n,
                          std::uint64_t seed,
                          const BlockSamplerOptions& options) {
  const int p = params.dimension();
  if (p < 2) throw std::invalid_argument("sample_dld: p must be >= 2");
  if (p > 3) {
    spdlog::warn("sample_dld: grid sampling in p={} grows as B^{}", p, p - 1);
  }
  const int d = p - 1;
  const int B = blocks_for(p, options);
  const double width = kPi / B;

  // Per-axis integrals of the area element |cos a_j|^(j-1) over each block.
  std::vector<std::vector<double>> factors(d, std::vector<double>(B));
  for (int j = 0; j < d; ++j) {
    for (int b = 0; b < B; ++b) {
      factors[j][b] = area_factor(b * width, (b + 1) * width, j);
    }
  }

  std::size_t blocks = 1;
  for (int j = 0; j < d; ++j) blocks *= static_cast<std::size_t>(B);
  std::vector<double> cumulative(blocks);
  std::vector<int> index(d, 0);
  std::vector<double> centre(d);
  std::vector<double> x(p);
  double running = 0.0;
  for (std::size_t block = 0; block < blocks; ++block) {
    double weight = 1.0;
    for (int j = 0; j < d; ++j) {
      centre[j] = (index[j] + 0.5) * width;
      weight *= factors[j][index[j]];
    }
    azimuth_first_coords(centre, x);
    weight *= std::exp(-params.k * sin_distance(params.mean.coords(), x));
    running += weight;
    cumulative[block] = running;
    for (int j = 0; j < d && ++index[j] == B; ++j) index[j] = 0;
  }

  Rng rng(seed);
  AngularDataset out(p);
  out.reserve(n);
  std::vector<double> angles(d);
  for (std::size_t s = 0; s < n; ++s) {
    const double u = rng.uniform() * running;
    std::size_t block = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) -
        cumulative.begin());
    block = std::min(block, blocks - 1);
    for (int j = 0; j < d; ++j) {
      const std::size_t b = block % B;
      block /= B;
      angles[j] = (static_cast<double>(b) + rng.uniform()) * width;
    }
    azimuth_first_coords(angles, x);
    out.push_back(x);
  }
  return out;
}

LabelledSample sample_mixture(const DldMixture& model, std::size_t n,
                              std::uint64_t seed,
                              const BlockSamplerOptions& options) {
  const std::size_t K = model.size();
  std::vector<std::size_t> counts(K);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < K; ++i) {
    const double exact = model.weights()[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) {
    ++counts[remainders[r % K].second];
  }

  LabelledSample out{AngularDataset(model.dimension()), {}};
  out.data.reserve(n);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < K; ++i) {
    if (counts[i] == 0) continue;
    const AngularDataset part = sample_dld(
        model.component(i), counts[i], seed * 1000003ULL + i + 1, options);
    for (std::size_t s = 0; s < part.size(); ++s) {
      out.data.push_back(part.point(s));
      out.labels.push_back(i);
    }
  }
  return out;
}

}  // namespace dldsep
