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

#include "dldsep/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "dldsep/sampling.hpp"

namespace dldsep {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Powers below this fraction of the estimate power count as zero.
constexpr double kZeroPower = 1e-20;

using Gauss = boost::math::quadrature::gauss<double, 8>;

double power(const Eigen::VectorXd& v) { return v.squaredNorm(); }

double ratio_db(double num, double den, double scale) {
  if (num <= kZeroPower * scale) return -kInf;
  if (den <= kZeroPower * scale) return kInf;
  return 10.0 * std::log10(num / den);
}

class Projector {
 public:
  explicit Projector(const std::vector<std::vector<double>>& references) {
    if (references.empty()) {
      throw std::invalid_argument("bss: no references");
    }
    const std::size_t T = references.front().size();
    if (T == 0) throw std::invalid_argument("bss: empty references");
    refs_.resize(static_cast<Eigen::Index>(T),
                 static_cast<Eigen::Index>(references.size()));
    for (std::size_t j = 0; j < references.size(); ++j) {
      if (references[j].size() != T) {
        throw std::invalid_argument("bss: references differ in length");
      }
      refs_.col(static_cast<Eigen::Index>(j)) =
          Eigen::Map<const Eigen::VectorXd>(references[j].data(),
                                            static_cast<Eigen::Index>(T));
      if (refs_.col(static_cast<Eigen::Index>(j)).squaredNorm() == 0.0) {
        throw std::invalid_argument("bss: zero reference");
      }
    }
    qr_.compute(refs_);
    if (qr_.rank() < refs_.cols()) {
      throw std::invalid_argument("bss: linearly dependent references");
    }
  }

  std::size_t length() const { return static_cast<std::size_t>(refs_.rows()); }
  std::size_t count() const { return static_cast<std::size_t>(refs_.cols()); }
  const Eigen::MatrixXd& refs() const { return refs_; }

  std::tuple<Eigen::VectorXd, Eigen::VectorXd, Eigen::VectorXd> decompose(
      const Eigen::VectorXd& e, std::size_t target) const {
    const auto j = static_cast<Eigen::Index>(target);
    const Eigen::VectorXd r = refs_.col(j);
    Eigen::VectorXd s_target = (r.dot(e) / r.squaredNorm()) * r;
    const Eigen::VectorXd projected = refs_ * qr_.solve(e);
    Eigen::VectorXd interference = projected - s_target;
    Eigen::VectorXd artifact = e - projected;
    return {std::move(s_target), std::move(interference), std::move(artifact)};
  }

 private:
  Eigen::MatrixXd refs_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

double mean_of(const std::vector<SourceScore>& s, double SourceScore::*field) {
  if (s.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& x : s) sum += x.*field;
  return sum / static_cast<double>(s.size());
}

}  // namespace

BssDecomposition bss_decompose(std::span<const double> estimate,
                               const std::vector<std::vector<double>>& references,
                               std::size_t target) {
  const Projector projector(references);
  if (estimate.size() != projector.length()) {
    throw std::invalid_argument("bss: estimate length differs");
  }
  if (target >= projector.count()) {
    throw std::invalid_argument("bss: target index out of range");
  }
  const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(
      estimate.data(), static_cast<Eigen::Index>(estimate.size()));
  auto [t, i, a] = projector.decompose(e, target);
  return {to_std(t), to_std(i), to_std(a)};
}

double SeparationScores::mean_sdr() const {
  return mean_of(sources, &SourceScore::sdr);
}
double SeparationScores::mean_sir() const {
  return mean_of(sources, &SourceScore::sir);
}
double SeparationScores::mean_sar() const {
  return mean_of(sources, &SourceScore::sar);
}

SeparationScores bss_scores(const std::vector<std::vector<double>>& estimates,
                            const std::vector<std::vector<double>>& references) {
  if (estimates.size() != references.size()) {
    throw std::invalid_argument("bss: estimate and reference counts differ");
  }
  const Projector projector(references);
  const std::size_t L = projector.count();
  const auto T = static_cast<Eigen::Index>(projector.length());
  std::vector<Eigen::VectorXd> est;
  est.reserve(L);
  for (const auto& e : estimates) {
    if (static_cast<Eigen::Index>(e.size()) != T) {
      throw std::invalid_argument("bss: estimate length differs");
    }
    est.emplace_back(Eigen::Map<const Eigen::VectorXd>(e.data(), T));
  }

  struct Pair {
    double corr;
    std::size_t e, r;
  };
  std::vector<Pair> pairs;
  for (std::size_t e = 0; e < L; ++e) {
    const double en = est[e].norm();
    for (std::size_t r = 0; r < L; ++r) {
      const auto rc = projector.refs().col(static_cast<Eigen::Index>(r));
      const double c = en > 0.0 ? std::abs(est[e].dot(rc)) / (en * rc.norm()) : 0.0;
      pairs.push_back({c, e, r});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.corr > b.corr; });
  std::vector<bool> used_e(L, false), used_r(L, false);
  SeparationScores out;
  out.sources.resize(L);
  for (const Pair& p : pairs) {
    if (used_e[p.e] || used_r[p.r]) continue;
    used_e[p.e] = used_r[p.r] = true;
    SourceScore& s = out.sources[p.r];
    s.reference = p.r;
    s.estimate = p.e;
    const double scale = power(est[p.e]);
    if (scale == 0.0) {
      s.sdr = s.sir = s.sar = -kInf;
      continue;
    }
    const auto [target, interf, artif] = projector.decompose(est[p.e], p.r);
    const double pt = power(target);
    s.sdr = ratio_db(pt, power(interf + artif), scale);
    s.sir = ratio_db(pt, power(interf), scale);
    s.sar = ratio_db(power(target + interf), power(artif), scale);
  }
  return out;
}

ChiSquareResult pearson_chi_square(const AngularDataset& data,
                                   const HalfSphereDensity& density,
                                   const ChiSquareOptions& options) {
  const int p = data.dimension();
  if (p != 2 && p != 3) {
    throw std::invalid_argument("pearson_chi_square: p must be 2 or 3");
  }
  if (data.empty()) throw std::invalid_argument("pearson_chi_square: no data");
  const int B = p == 2 ? options.bins_1d : options.bins_2d;
  if (B < 2) throw std::invalid_argument("pearson_chi_square: too few bins");
  const double width = kPi / B;
  const std::size_t raw_bins =
      p == 2 ? static_cast<std::size_t>(B) : static_cast<std::size_t>(B) * B;

  auto bin_of = [&](double angle) {
    return std::min(B - 1, static_cast<int>(angle / width));
  };
  std::vector<double> observed(raw_bins, 0.0);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto x = data.point(n);
    if (p == 2) {
      observed[bin_of(axial_angle(x))] += 1.0;
    } else {
      const auto a = half_sphere_angles(x);
      observed[bin_of(a[0]) * B + bin_of(a[1])] += 1.0;
    }
  }

  std::vector<double> mass(raw_bins, 0.0);
  if (p == 2) {
    for (int b = 0; b < B; ++b) {
      mass[b] = Gauss::integrate(
          [&](double t) {
            const double x[2] = {std::cos(t), std::sin(t)};
            return density(x);
          },
          b * width, (b + 1) * width);
    }
  } else {
    for (int b1 = 0; b1 < B; ++b1) {
      for (int b2 = 0; b2 < B; ++b2) {
        mass[b1 * B + b2] = Gauss::integrate(
            [&](double a1) {
              return Gauss::integrate(
                  [&](double a2) {
                    const double c2 = std::cos(a2);
                    const double x[3] = {c2 * std::cos(a1), c2 * std::sin(a1),
                                         std::sin(a2)};
                    return density(x) * std::abs(c2);
                  },
                  b2 * width, (b2 + 1) * width);
            },
            b1 * width, (b1 + 1) * width);
      }
    }
  }

  ChiSquareResult out;
  const double N = static_cast<double>(data.size());
  ChiSquareBin pending;
  bool open = false;
  for (std::size_t b = 0; b < raw_bins; ++b) {
    out.model_mass += mass[b];
    if (!open) {
      pending = ChiSquareBin{0.0, 0.0, b, b};
      open = true;
    }
    pending.observed += observed[b];
    pending.expected += N * mass[b];
    pending.last_bin = b;
    if (pending.expected >= options.min_expected) {
      out.cells.push_back(pending);
      open = false;
    }
  }
  if (open) {
    if (out.cells.empty()) {
      throw std::invalid_argument("pearson_chi_square: model has no mass");
    }
    out.cells.back().observed += pending.observed;
    out.cells.back().expected += pending.expected;
    out.cells.back().last_bin = pending.last_bin;
  }
  for (const auto& c : out.cells) {
    const double d = c.observed - c.expected;
    out.statistic += d * d / c.expected;
  }
  out.degrees_of_freedom = static_cast<int>(out.cells.size()) - 1;
  return out;
}

double chi_square_quantile(double probability, int degrees_of_freedom) {
  if (degrees_of_freedom < 1 || !(probability > 0.0 && probability < 1.0)) {
    throw std::invalid_argument("chi_square_quantile: bad arguments");
  }
  const boost::math::chi_squared dist(degrees_of_freedom);
  return boost::math::quantile(dist, probability);
}

VmfParams fit_vmf(const AngularDataset& data) {
  if (data.empty()) throw std::invalid_argument("fit_vmf: no data");
  const int p = data.dimension();
  const UnitVector axis = dominant_axis(data);
  std::vector<double> resultant(p, 0.0);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto x = data.point(n);
    const double s = axis.dot(x) < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < p; ++j) resultant[j] += s * x[j];
  }
  const double length = std::sqrt(dot(resultant, resultant));
  const double r = length / static_cast<double>(data.size());
  if (r < 1e-12) return {axis, 0.0};
  double kappa = kMaxVmfConcentration;
  if (r < 1.0) {
    kappa = std::min(kMaxVmfConcentration, r * (p - r * r) / (1.0 - r * r));
  }
  return {UnitVector(std::move(resultant)), kappa};
}

double log_bessel_i(double nu, double x) {
  if (!(x >= 0.0) || !(nu >= 0.0)) {
    throw std::domain_error("log_bessel_i: need nu >= 0 and x >= 0");
  }
  if (x == 0.0) return nu == 0.0 ? 0.0 : -kInf;
  if (x < 500.0) return std::log(boost::math::cyl_bessel_i(nu, x));
  // Large-argument expansion; terms decay fast for x >= 500 and small nu.
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int j = 1; j <= 8; ++j) {
    term *= -(mu - (2.0 * j - 1) * (2.0 * j - 1)) / (j * 8.0 * x);
    sum += term;
  }
  return x - 0.5 * std::log(2.0 * kPi * x) + std::log(sum);
}

namespace {

double vmf_log_normalizer(int p, double kappa) {
  const double half = 0.5 * p;
  if (kappa == 0.0) {
    return std::lgamma(half) - std::log(2.0) - half * std::log(kPi);
  }
  const double nu = half - 1.0;
  return nu * std::log(kappa) - half * std::log(2.0 * kPi) -
         log_bessel_i(nu, kappa);
}

void check_dimension(const VmfParams& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.mean.dimension()) {
    throw std::invalid_argument("vmf: dimension mismatch");
  }
}

}  // namespace

double vmf_log_pdf(const VmfParams& params, std::span<const double> x) {
  check_dimension(params, x);
  return vmf_log_normalizer(params.mean.dimension(), params.kappa) +
         params.kappa * params.mean.dot(x);
}

double vmf_half_sphere_pdf(const VmfParams& params, std::span<const double> x) {
  check_dimension(params, x);
  const double t = std::abs(params.mean.dot(x));
  const double log_near =
      vmf_log_normalizer(params.mean.dimension(), params.kappa) + params.kappa * t;
  return std::exp(log_near) * (1.0 + std::exp(-2.0 * params.kappa * t));
}

HalfSphereDensity dld_density(const DldParams& params) {
  const double log_c = log_normalization_constant(params.dimension(), params.k);
  return [params, log_c](std::span<const double> x) {
    if (static_cast<int>(x.size()) != params.dimension()) {
      throw std::invalid_argument("dld_density: dimension mismatch");
    }
    return std::exp(log_c - params.k * sin_distance(params.mean.coords(), x));
  };
}

HalfSphereDensity vmf_density(const VmfParams& params) {
  const double log_c = vmf_log_normalizer(params.mean.dimension(), params.kappa);
  return [params, log_c](std::span<const double> x) {
    check_dimension(params, x);
    const double t = std::abs(params.mean.dot(x));
    return std::exp(log_c + params.kappa * t) *
           (1.0 + std::exp(-2.0 * params.kappa * t));
  };
}

}  // namespace dldsep
