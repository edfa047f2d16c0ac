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

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "dldsep/directional.hpp"
#include "dldsep/sampling.hpp"
#include "dldsep/special.hpp"
#include "test_support.hpp"

namespace dldsep {
namespace {

using testing::deg;
using testing::kPi;

const UnitVector kSphereMean{-0.4329, 0.3234, 0.8415};

double raw_objective(std::span<const double> m, double k, const AngularDataset& data) {
  // -k sum sqrt(1 - (m'x)^2) for an unnormalized m.
  double sum = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const double t = dot(m, data.point(n));
    sum += std::sqrt(1.0 - t * t);
  }
  return -k * sum;
}

TEST(UnitVector, NormalizesAndCanonicalizes) {
  const UnitVector v{-3.0, 4.0};
  EXPECT_NEAR(v[0], 0.6, 1e-15);
  EXPECT_NEAR(v[1], -0.8, 1e-15);
  const UnitVector w{0.0, -2.0, 1.0};
  EXPECT_GT(w[1], 0.0);
  EXPECT_THROW(UnitVector({0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(UnitVector({1.0}), std::invalid_argument);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const UnitVector u = testing::random_unit_vector(rng, 2 + i % 5);
    EXPECT_NEAR(dot(u.coords(), u.coords()), 1.0, 1e-12);
    double first = 0.0;
    for (double c : u.coords()) {
      if (c != 0.0) {
        first = c;
        break;
      }
    }
    EXPECT_GT(first, 0.0);
  }
}

TEST(AngularDataset, RowsBecomeCanonicalDirections) {
  const AngularDataset data(2, {-2.0, 0.0, 0.0, -3.0, 1.0, 1.0});
  ASSERT_EQ(data.size(), 3u);
  EXPECT_DOUBLE_EQ(data.point(0)[0], 1.0);
  EXPECT_DOUBLE_EQ(data.point(1)[1], 1.0);
  EXPECT_NEAR(data.point(2)[0], std::sqrt(0.5), 1e-15);
  EXPECT_THROW(AngularDataset(2, {0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(AngularDataset(2, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST(DldPdf, ModeAndUniformLimit) {
  for (int p : {2, 3, 5}) {
    Rng rng(p);
    const UnitVector m = testing::random_unit_vector(rng, p);
    const DldParams params(m, 7.5);
    // The inner-product guard leaves sin = sqrt(2e-12) at the mode.
    EXPECT_NEAR(dld_pdf(params, m.coords()) / normalization_constant(p, 7.5), 1.0, 7.5 * 2e-6);
  }
  const DldParams flat(UnitVector{1.0, 0.0}, 0.0);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    EXPECT_NEAR(dld_pdf(flat, testing::random_unit_vector(rng, 2).coords()), 1.0 / kPi, 1e-14);
  }
}

TEST(DldPdf, OrthogonalPointOnSphere) {
  const UnitVector m = spherical_to_unit({{0.2, 2.0}}, AngleOrder::kElevationFirst);
  // Any unit vector orthogonal to m.
  const std::vector<double> a = {m[1], -m[0], 0.0};
  const UnitVector x(a);
  const DldParams params(m, 5.0);
  // c_3(5) exp(-5), frozen from 30-digit quadrature.
  EXPECT_NEAR(dld_pdf(params, x.coords()), 0.023385303657866017, 1e-12);
  const double total =
      testing::half_sphere_integral([&](auto y) { return dld_pdf(params, y); }, m, 600);
  EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(DldPdf, CircleFormAgreesWithAngularForm) {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const double m0 = rng.uniform(0.0, kPi);
    const double t = rng.uniform(-kPi, kPi);
    const double k = rng.uniform(0.0, 30.0);
    const DldParams params(UnitVector{std::cos(m0), std::sin(m0)}, k);
    const double x[2] = {std::cos(t), std::sin(t)};
    const double expected = std::exp(-k * std::abs(std::sin(t - m0))) /
                            (kPi * sine_exp_integral(0, k));
    EXPECT_NEAR(dld_pdf(params, x), expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(DldPdf, AntipodalInvariance) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const int p = 2 + i % 4;
    const DldParams params(testing::random_unit_vector(rng, p), rng.uniform(0.0, 30.0));
    std::vector<double> x(p);
    for (double& v : x) v = rng.normal();
    const double n = std::sqrt(dot(x, x));
    for (double& v : x) v /= n;
    std::vector<double> y = x;
    for (double& v : y) v = -v;
    EXPECT_EQ(dld_pdf(params, x), dld_pdf(params, y));
  }
}

TEST(DldPdf, DimensionMismatchThrows) {
  const DldParams params(UnitVector{1.0, 0.0, 0.0}, 2.0);
  const double x[2] = {1.0, 0.0};
  EXPECT_THROW(dld_pdf(params, x), std::invalid_argument);
  EXPECT_THROW(DldParams(UnitVector{1.0, 0.0}, 31.0), std::invalid_argument);
  EXPECT_THROW(DldParams(UnitVector{1.0, 0.0}, -1.0), std::invalid_argument);
}

TEST(DldLogLikelihood, EqualsSumOfPointwiseLogs) {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 2 + trial % 3;
    const DldParams params(testing::random_unit_vector(rng, p), rng.uniform(0.5, 25.0));
    const AngularDataset data = testing::sample_uniform(p, 300, 100 + trial);
    double sum = 0.0;
    for (std::size_t n = 0; n < data.size(); ++n) sum += std::log(dld_pdf(params, data.point(n)));
    EXPECT_NEAR(dld_log_likelihood(params, data), sum, 1e-9 * std::abs(sum));
  }
  const DldParams params(kSphereMean, 4.0);
  EXPECT_NEAR(dld_log_likelihood(params, AngularDataset::from_points({kSphereMean})),
              log_normalization_constant(3, 4.0), 4.0 * 2e-6);
  EXPECT_THROW(dld_log_likelihood(params, AngularDataset(3)), std::invalid_argument);
}

TEST(DldLogLikelihood, TrueMeanBeatsRotatedMean) {
  const DldParams truth(kSphereMean, 12.0);
  const AngularDataset data = sample_dld(truth, 1000, 17);
  // Rotate the mean by 0.2 rad towards an orthogonal direction.
  const std::vector<double> u = {kSphereMean[1], -kSphereMean[0], 0.0};
  const UnitVector ortho(u);
  std::vector<double> rotated(3);
  for (int j = 0; j < 3; ++j) {
    rotated[j] = std::cos(0.2) * kSphereMean[j] + std::sin(0.2) * ortho[j];
  }
  EXPECT_GT(dld_log_likelihood(truth, data),
            dld_log_likelihood(DldParams(UnitVector(rotated), 12.0), data));
}

TEST(DldGradient, MatchesCentralDifferences) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 2 + trial % 3;
    const DldParams params(testing::random_unit_vector(rng, p), rng.uniform(1.0, 20.0));
    const AngularDataset sample = sample_dld(
        DldParams(testing::random_unit_vector(rng, p), 6.0), 200, 500 + trial);
    // Non-degenerate: keep points away from the mean axis.
    AngularDataset data(p);
    for (std::size_t n = 0; n < sample.size(); ++n) {
      if (sin_distance(params.mean.coords(), sample.point(n)) > 0.05) data.push_back(sample.point(n));
    }
    const std::vector<double> grad = dld_mean_gradient(params, data);
    const double h = 1e-6;
    double err = 0.0, scale = 0.0;
    for (int j = 0; j < p; ++j) {
      std::vector<double> up(params.mean.coords().begin(), params.mean.coords().end());
      std::vector<double> dn = up;
      up[j] += h;
      dn[j] -= h;
      const double fd = (raw_objective(up, params.k, data) - raw_objective(dn, params.k, data)) /
                        (2 * h);
      err += (fd - grad[j]) * (fd - grad[j]);
      scale += grad[j] * grad[j];
    }
    EXPECT_LT(std::sqrt(err / scale), 1e-4) << trial;
  }
}

TEST(FitDld, RecoversSphereMeanAtModerateConcentration) {
  const DldParams truth(kSphereMean, 12.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const FitResult fit = fit_dld(sample_dld(truth, 1000, seed));
    EXPECT_GE(std::abs(fit.params.mean.dot(kSphereMean.coords())), 0.999);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.params.k, 12.0, 1.5);
  }
}

TEST(FitDld, SmallSamplesAverageCosine) {
  const DldParams truth(UnitVector{-0.4161, 0.0, 0.9093}, 8.0);
  double sum = 0.0;
  for (int run = 0; run < 50; ++run) {
    const FitResult fit = fit_dld(sample_dld(truth, 100, 1000 + run));
    sum += std::abs(fit.params.mean.dot(truth.mean.coords()));
  }
  EXPECT_GE(sum / 50, 0.995);
}

TEST(FitDld, IdenticalPointsClampConcentration) {
  const UnitVector u{0.3, -0.2, 0.9};
  const AngularDataset data = AngularDataset::from_points(std::vector<UnitVector>(50, u));
  const FitResult fit = fit_dld(data);
  EXPECT_NEAR(std::abs(fit.params.mean.dot(u.coords())), 1.0, 1e-12);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(fit.params.mean[j], u[j], 1e-9);
  EXPECT_EQ(fit.params.k, kMaxConcentration);
  EXPECT_EQ(fit.k_status, RatioStatus::kClampedToMaxK);
}

TEST(FitDld, StationaryInConcentration) {
  for (int p : {2, 3}) {
    Rng rng(40 + p);
    const DldParams truth(testing::random_unit_vector(rng, p), 9.0);
    const AngularDataset data = sample_dld(truth, 2000, 77);
    const FitResult fit = fit_dld(data);
    const double lhs = concentration_ratio(p, fit.params.k);
    const double rhs = mean_sin_distance(fit.params.mean, data);
    EXPECT_NEAR(lhs, rhs, 1e-6) << p;
  }
}

TEST(FitDld, RotationEquivariance) {
  Rng rng(55);
  for (int p : {2, 3, 4}) {
    const DldParams truth(testing::random_unit_vector(rng, p), 10.0);
    const AngularDataset data = sample_dld(truth, 800, 90 + p);
    const std::vector<double> R = testing::random_rotation(rng, p);
    const FitResult a = fit_dld(data);
    const FitResult b = fit_dld(testing::rotate(data, R));
    const UnitVector expected(testing::apply(R, a.params.mean.coords()));
    const double c = std::min(1.0, std::abs(expected.dot(b.params.mean.coords())));
    EXPECT_LT(std::acos(c), 1e-3) << p;
    EXPECT_NEAR(a.params.k, b.params.k, 1e-3 * a.params.k);
  }
}

TEST(FitDld, CircleSamplesRecoverMeanAngle) {
  const std::vector<double> angles = sample_dld_1d(deg(30), 6.0, 2000, 4);
  AngularDataset data(2);
  for (double t : angles) {
    const double x[2] = {std::cos(t), std::sin(t)};
    data.push_back(x);
  }
  const FitResult fit = fit_dld(data);
  EXPECT_LT(std::abs(axial_angle(fit.params.mean.coords()) - deg(30)), deg(2));
}

TEST(FitConfig, Validation) {
  FitConfig c;
  EXPECT_NO_THROW(c.validate());
  c.eta = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = FitConfig{};
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = FitConfig{};
  c.initial_k = 40.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(fit_dld(AngularDataset(2)), std::invalid_argument);
}

}  // namespace
}  // namespace dldsep
