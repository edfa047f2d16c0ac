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

#include "dldsep/special.hpp"

#include <cmath>

// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dldsep {

namespace {

constexpr unsigned kMaxQuadratureDepth = 30;
constexpr double kQuadratureRelTol = 1e-13;
constexpr double kQuadratureAbsTol = 1e-10;

void require_dimension(int p, int min_p, const char* what) {
  if (p < min_p) {
    throw std::domain_error(std::string(what) + ": dimension p=" +
                            std::to_string(p) + " is below " +
                            std::to_string(min_p));
  }
}

}  // namespace

double sine_exp_integral(int p, double k) {
  require_dimension(p, 0, "sine_exp_integral");
  if (!(k >= 0.0) || !std::isfinite(k)) {
    throw std::domain_error("sine_exp_integral: k must be finite and >= 0");
  }
  if (k == 0.0 && p == 0) return 1.0;

  auto integrand = [p, k](double t) {
    const double s = std::sin(t);
    return std::exp(-k * s) * std::pow(s, p);
  };
  double error = 0.0;
  // The integrand is symmetric about pi/2.
  const double half =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          integrand, 0.0, std::numbers::pi / 2, kMaxQuadratureDepth,
          kQuadratureRelTol, &error);
  const double value = 2.0 * half / std::numbers::pi;
  if (!(2.0 * error / std::numbers::pi <= kQuadratureAbsTol) ||
      !std::isfinite(value)) {
    throw std::runtime_error("sine_exp_integral: quadrature did not converge");
  }
  return value;
}

double gamma_function(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error("gamma_function: argument must be positive");
  }
  return std::tgamma(x);
}

double normalization_constant(int p, double k) {
  require_dimension(p, 2, "normalization_constant");
  return std::exp(log_normalization_constant(p, k));
}

double log_normalization_constant(int p, double k) {
  require_dimension(p, 2, "log_normalization_constant");
  const double half_dim = 0.5 * (p - 1);
  return std::lgamma(half_dim) - 0.5 * (p + 1) * std::log(std::numbers::pi) -
         std::log(sine_exp_integral(p - 2, k));
}

double concentration_ratio(int p, double k) {
  require_dimension(p, 2, "concentration_ratio");
  return sine_exp_integral(p - 1, k) / sine_exp_integral(p - 2, k);
}

const char* to_string(RatioStatus status) {
  switch (status) {
    case RatioStatus::kOk:
      return "ok";
    case RatioStatus::kClampedToMaxK:
      return "clamped_to_max_k";
    case RatioStatus::kClampedToMinK:
      return "clamped_to_min_k";
  }
  return "unknown";
}

struct KLookupTable::Interpolant {
  // Abscissae are the ratios in increasing order, so k decreases along them.
  boost::math::interpolators::pchip<std::vector<double>> spline;
};

KLookupTable::KLookupTable(int p, std::vector<double> k_grid,
                           std::vector<double> ratio_grid)
    : p_(p), k_grid_(std::move(k_grid)), ratio_grid_(std::move(ratio_grid)) {
  if (p_ < 2) throw std::invalid_argument("KLookupTable: p must be >= 2");
  if (k_grid_.size() != ratio_grid_.size() || k_grid_.size() < 4) {
    throw std::invalid_argument(
        "KLookupTable: grids must have equal length >= 4");
  }
  for (std::size_t i = 0; i < k_grid_.size(); ++i) {
    if (!(ratio_grid_[i] > 0.0 && ratio_grid_[i] < 1.0)) {
      throw std::invalid_argument("KLookupTable: ratio outside (0, 1)");
    }
    if (i > 0 && !(k_grid_[i] > k_grid_[i - 1])) {
      throw std::invalid_argument("KLookupTable: k grid not increasing");
    }
    if (i > 0 && !(ratio_grid_[i] < ratio_grid_[i - 1])) {
      throw std::invalid_argument("KLookupTable: ratio grid not decreasing");
    }
  }
  std::vector<double> x(ratio_grid_.rbegin(), ratio_grid_.rend());
  std::vector<double> y(k_grid_.rbegin(), k_grid_.rend());
  interpolant_ = std::make_shared<const Interpolant>(
      Interpolant{{std::move(x), std::move(y)}});
}

KInversion KLookupTable::invert(double ratio) const {
  if (!(ratio > ratio_grid_.back())) {
    return {k_grid_.back(), ratio == ratio_grid_.back()
                                ? RatioStatus::kOk
                                : RatioStatus::kClampedToMaxK};
  }
  if (!(ratio < ratio_grid_.front())) {
    return {k_grid_.front(), ratio == ratio_grid_.front()
                                 ? RatioStatus::kOk
                                 : RatioStatus::kClampedToMinK};
  }
  return {interpolant_->spline(ratio), RatioStatus::kOk};
}

KLookupTable build_k_lookup(int p, int grid_size) {
  require_dimension(p, 2, "build_k_lookup");
  if (grid_size < 100) {
    throw std::invalid_argument("build_k_lookup: grid_size must be >= 100");
  }
  std::vector<double> k_grid(grid_size);
  std::vector<double> ratio_grid(grid_size);
  const double step =
      (kMaxConcentration - kMinConcentration) / (grid_size - 1);
  for (int i = 0; i < grid_size; ++i) {
    k_grid[i] = i + 1 == grid_size ? kMaxConcentration
                                   : kMinConcentration + i * step;
    ratio_grid[i] = concentration_ratio(p, k_grid[i]);
  }
  return KLookupTable(p, std::move(k_grid), std::move(ratio_grid));
}

KInversion invert_ratio(const KLookupTable& table, double ratio) {
  return table.invert(ratio);
}

const KLookupTable& shared_k_lookup(int p) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const KLookupTable>> tables;
  std::lock_guard lock(mutex);
  auto& slot = tables[p];
  if (!slot) slot = std::make_unique<const KLookupTable>(build_k_lookup(p));
  return *slot;
}

}  // namespace dldsep
