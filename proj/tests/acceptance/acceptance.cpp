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

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails or exceeds its time budget.

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dldsep/dld.hpp"
#include "dldsep/eval.hpp"
#include "dldsep/mdct.hpp"
#include "dldsep/mixture.hpp"
#include "dldsep/sampling.hpp"
#include "dldsep/separation.hpp"
#include "dldsep/special.hpp"
#include "test_support.hpp"

namespace {

using namespace dldsep;
using namespace dldsep::testing;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void note(Outcome& o, bool ok, const std::string& what) {
  o.pass = o.pass && ok;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += what + (ok ? "" : " [x]");
}

AngularDataset from_angles(const std::vector<double>& angles) {
  AngularDataset data(2);
  data.reserve(angles.size());
  for (double t : angles) {
    const double x[2] = {std::cos(t), std::sin(t)};
    data.push_back(x);
  }
  return data;
}

// 1. The density integrates to one over the half sphere.
Outcome normalization() {
  Outcome o;
  double worst = 0.0;
  const UnitVector means[2] = {UnitVector{std::cos(deg(30)), std::sin(deg(30))},
                               spherical_to_unit({{0.2, 2.0}}, AngleOrder::kElevationFirst)};
  for (int p : {2, 3}) {
    for (double k : {0.01, 1.0, 5.0, 15.0}) {
      const DldParams params(means[p - 2], k);
      const double total = half_sphere_integral(dld_density(params), params.mean,
                                                p == 2 ? 1000000 : 800);
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  note(o, worst <= 1e-6, fmt("max |integral - 1| = %.2e (tol 1e-6)", worst));
  return o;
}

// 2. Mean recovery for the scaled single-density table.
Outcome mean_recovery() {
  Outcome o;
  struct Case {
    UnitVector m;
    double k;
    std::size_t n;
  };
  const std::vector<Case> cases = {
      {UnitVector{-0.4329, 0.3234, 0.8415}, 12, 100},
      {UnitVector{-0.4329, 0.3234, 0.8415}, 12, 1000},
      {UnitVector{-0.4161, 0.0, 0.9093}, 15, 1000}};
  for (const Case& c : cases) {
    double sum = 0.0;
    for (int run = 0; run < 10; ++run) {
      const AngularDataset data = sample_dld(DldParams(c.m, c.k), c.n, 100 + run);
      sum += std::abs(c.m.dot(fit_dld(data).params.mean.coords()));
    }
    const double avg = sum / 10.0;
    char buf[96];
    std::snprintf(buf, sizeof buf, "k=%g N=%zu avg|m'm^|=%.5f", c.k, c.n, avg);
    note(o, avg >= 0.999, buf);
  }
  return o;
}

// 3. Concentration recovery in one and two dimensions.
Outcome k_recovery() {
  Outcome o;
  for (int p : {2, 3}) {
    const double tol = p == 2 ? 0.10 : 0.15;
    double worst = 0.0;
    for (double k : {4.0, 8.0, 12.0, 15.0}) {
      double sum = 0.0;
      for (int run = 0; run < 10; ++run) {
        const std::uint64_t seed = 300 + run;
        const AngularDataset data =
            p == 2 ? from_angles(sample_dld_1d(deg(30), k, 2000, seed))
                   : sample_dld(DldParams(spherical_to_unit({{0.2, 2.0}},
                                                            AngleOrder::kElevationFirst),
                                          k),
                                2000, seed);
        sum += std::abs(fit_dld(data).params.k - k) / k;
      }
      worst = std::max(worst, sum / 10.0);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "p=%d worst avg rel err %.4f (tol %.2f)", p, worst, tol);
    note(o, worst <= tol, buf);
  }
  return o;
}

// 4. Five-component mixture, well-separated components.
Outcome mixture_recovery() {
  Outcome o;
  const std::vector<UnitVector> means = {
      UnitVector{-0.9001, 0.3200, 0.2955}, UnitVector{0.6092, 0.1235, 0.7833},
      UnitVector{-0.5970, -0.6147, 0.5155}, UnitVector{0.1732, -0.3784, 0.9093},
      UnitVector{0.5826, -0.8004, 0.1411}};
  const std::vector<double> ks = {12, 10, 14, 15, 15};
  std::vector<double> weights = {0.1333, 0.2, 0.3333, 0.1667, 0.1667};
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  std::vector<DldParams> comps;
  for (std::size_t i = 0; i < 5; ++i) comps.emplace_back(means[i], ks[i]);
  const DldMixture truth(comps, weights);

  double cos_sum[2] = {0, 0}, k_err[2] = {0, 0};
  const std::size_t watched[2] = {2, 4};
  for (int run = 0; run < 10; ++run) {
    const LabelledSample sample = sample_mixture(truth, 3000, 400 + run);
    FitConfig config;
    config.seed = 500 + run;
    // Several K-means starts, keeping the highest-likelihood EM solution.
    config.restarts = 5;
    const MixtureFit fit = fit_mixture(sample.data, 5, config);
    std::vector<UnitVector> est;
    for (const auto& c : fit.model.components()) est.push_back(c.mean);
    const Matching match = match_directions(means, est);
    for (int w = 0; w < 2; ++w) {
      const std::size_t i = watched[w];
      cos_sum[w] += match.cosines[i];
      k_err[w] += std::abs(fit.model.component(match.index[i]).k - ks[i]) / ks[i];
    }
  }
  for (int w = 0; w < 2; ++w) {
    const double c = cos_sum[w] / 10.0, e = k_err[w] / 10.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "DLD%zu avg|m'm^|=%.5f avg rel k err=%.4f (5 starts)",
                  watched[w] + 1, c, e);
    note(o, c >= 0.99 && e <= 0.10, buf);
  }
  return o;
}

// 5. Ratio monotonicity and lookup round trip.
Outcome ratio_table() {
  Outcome o;
  for (int p : {2, 3, 4}) {
    const KLookupTable table = build_k_lookup(p);
    const auto r = table.ratio_grid();
    bool decreasing = true;
    for (std::size_t j = 1; j < r.size(); ++j) decreasing = decreasing && r[j] < r[j - 1];
    double worst = 0.0;
    const auto kg = table.k_grid();
    for (std::size_t j = 0; j < kg.size(); ++j) {
      worst = std::max(worst, std::abs(invert_ratio(table, r[j]).k - kg[j]) / kg[j]);
    }
    for (int j = 0; j < 200; ++j) {
      const double k = 0.02 + (29.95 - 0.02) * (j + 0.37) / 200.0;
      const double back = invert_ratio(table, concentration_ratio(p, k)).k;
      worst = std::max(worst, std::abs(back - k) / k);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "p=%d decreasing=%s round trip %.1e", p,
                  decreasing ? "yes" : "no", worst);
    note(o, decreasing && worst < 1e-4, buf);
  }
  return o;
}

// 6. Goodness-of-fit ordering against the vMF baseline.
Outcome goodness_of_fit() {
  Outcome o;
  for (int p : {2, 3}) {
    int worst_wins = 20;
    for (double k : {4.0, 6.0, 10.0, 15.0}) {
      int wins = 0;
      for (int trial = 0; trial < 20; ++trial) {
        const std::uint64_t seed = 600 + 37 * trial + static_cast<std::uint64_t>(k);
        const AngularDataset data =
            p == 2 ? from_angles(sample_dld_1d(deg(30), k, 2000, seed))
                   : sample_dld(DldParams(spherical_to_unit({{0.2, 2.0}},
                                                            AngleOrder::kElevationFirst),
                                          k),
                                2000, seed);
        const double dld = pearson_chi_square(data, dld_density(fit_dld(data).params)).statistic;
        const double vmf = pearson_chi_square(data, vmf_density(fit_vmf(data))).statistic;
        wins += dld < vmf;
      }
      worst_wins = std::min(worst_wins, wins);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "p=%d min DLD wins %d/20 (need 18)", p, worst_wins);
    note(o, worst_wins >= 18, buf);
  }
  return o;
}

// 7. Analytic mean gradient and the derivative identity of I_0.
Outcome gradients() {
  Outcome o;
  Rng rng(700);
  double worst = 0.0;
  int configs = 0;
  while (configs < 20) {
    const int p = 2 + configs % 3;
    const UnitVector m = random_unit_vector(rng, p);
    const double k = rng.uniform(1.0, 20.0);
    const AngularDataset data = sample_dld(DldParams(m, k), 40, 710 + configs);
    // Evaluate away from the mean so every 1/sin term is well conditioned.
    const UnitVector at = random_unit_vector(rng, p);
    bool ok = true;
    for (std::size_t n = 0; n < data.size(); ++n) ok = ok && std::abs(at.dot(data.point(n))) < 0.99;
    if (!ok) continue;
    const DldParams params(at, k);
    const std::vector<double> g = dld_mean_gradient(params, data);
    auto J = [&](const std::vector<double>& v) {
      double s = 0.0;
      for (std::size_t n = 0; n < data.size(); ++n) {
        const double t = dot(v, data.point(n));
        s += std::sqrt(1.0 - t * t);
      }
      return -k * s;
    };
    const double h = 1e-6;
    double num = 0.0, den = 0.0;
    for (int j = 0; j < p; ++j) {
      std::vector<double> plus(at.coords().begin(), at.coords().end()), minus = plus;
      plus[j] += h;
      minus[j] -= h;
      const double fd = (J(plus) - J(minus)) / (2 * h);
      num += (fd - g[j]) * (fd - g[j]);
      den += g[j] * g[j];
    }
    worst = std::max(worst, std::sqrt(num / den));
    ++configs;
  }
  note(o, worst < 1e-4, fmt("gradient max rel err %.1e (tol 1e-4)", worst));

  double worst_i = 0.0;
  for (double k : {0.1, 1.0, 5.0, 15.0, 29.0}) {
    const double h = 1e-4;
    const double fd = (sine_exp_integral(0, k + h) - sine_exp_integral(0, k - h)) / (2 * h);
    worst_i = std::max(worst_i, std::abs(fd + sine_exp_integral(1, k)));
  }
  note(o, worst_i < 1e-6, fmt("dI0/dk + I1 max abs %.1e (tol 1e-6)", worst_i));
  return o;
}

// 8. MDCT perfect reconstruction.
Outcome mdct_round_trip() {
  Outcome o;
  struct Case {
    std::size_t frame;
    int rate;
  };
  for (const Case c : {Case{512, 16000}, Case{2048, 16000}, Case{2048, 44100}}) {
    Rng rng(800 + c.frame);
    MixtureSignals s;
    s.sample_rate = c.rate;
    s.channels.assign(1, std::vector<double>(static_cast<std::size_t>(c.rate)));
    for (double& v : s.channels[0]) v = rng.uniform(-1.0, 1.0);
    const MixtureSignals back = mdct_inverse(mdct_forward(s, c.frame));
    double err = 0.0;
    for (std::size_t n = c.frame; n + c.frame < s.length(); ++n) {
      err = std::max(err, std::abs(back.channels[0][n] - s.channels[0][n]));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "N=%zu@%d max err %.1e", c.frame, c.rate, err);
    note(o, err < 1e-8, buf);
  }
  return o;
}

std::vector<std::vector<double>> as_refs(const SyntheticMixture& m) { return m.sources; }

// 9. Synthetic separation quality.
Outcome separation_quality() {
  Outcome o;
  struct Case {
    const char* name;
    std::vector<UnitVector> columns;
    bool full_check;
  };
  std::vector<Case> cases;
  cases.push_back({"2x3", columns_from_degrees({{15, 75, 135}}), true});
  cases.push_back({"3x5",
                   columns_from_degrees({{0, -87, -60, 0, 45}, {85, 0, -60, 0, 45}}),
                   true});
  cases.push_back({"4x8",
                   columns_from_degrees({{-75, -30, 0, 50, 10, 80, -45, 0},
                                         {70, 30, -20, 50, -70, 0, 15, -70},
                                         {80, 20, 10, -50, 0, -10, -25, -35}}),
                   false});
  for (const Case& c : cases) {
    const SyntheticMixture mix =
        make_sparse_mixture(c.columns, 4 * 16000, 16000, 512, 900 + c.columns.size());
    SeparationConfig config;
    config.fit.seed = 901;
    const SeparationResult result = separate(mix.mixture, c.columns.size(), config);
    const SeparationScores scores = bss_scores(result.sources, as_refs(mix));
    std::vector<UnitVector> est;
    for (const auto& comp : result.fit.model.components()) est.push_back(comp.mean);
    const double min_cos = match_directions(c.columns, est).min_cosine();
    double min_sir = scores.sources.front().sir;
    bool nonzero = true;
    for (const auto& s : scores.sources) min_sir = std::min(min_sir, s.sir);
    for (const auto& s : result.sources) {
      nonzero = nonzero && std::any_of(s.begin(), s.end(), [](double v) { return v != 0.0; });
    }
    char buf[160];
    if (c.full_check) {
      std::snprintf(buf, sizeof buf, "%s mean SIR %.1f dB, min |a'm^| %.4f", c.name,
                    scores.mean_sir(), min_cos);
      note(o, scores.mean_sir() >= 10.0 && min_cos >= 0.99, buf);
    } else {
      std::snprintf(buf, sizeof buf, "%s min SIR %.1f dB, all nonzero=%s", c.name, min_sir,
                    nonzero ? "yes" : "no");
      note(o, nonzero && min_sir > 0.0, buf);
    }
  }
  return o;
}

// 10. Ten seconds of stereo at 16 kHz separates well within a minute.
Outcome pipeline_speed() {
  Outcome o;
  const SyntheticMixture mix = make_sparse_mixture(
      columns_from_degrees({{20, 80, 140}}), 10 * 16000, 16000, 512, 1000);
  const auto start = std::chrono::steady_clock::now();
  const SeparationResult result = separate(mix.mixture, 3);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[128];
  std::snprintf(buf, sizeof buf, "separate() %.2f s (fit %.2f s, %d EM iterations)", secs,
                result.timings.fit, result.fit.diagnostics.iterations);
  note(o, secs < 60.0, buf);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria = {
      {1, "normalization", 10, normalization},
      {2, "mean recovery", 120, mean_recovery},
      {3, "k recovery", 180, k_recovery},
      {4, "mixture recovery", 300, mixture_recovery},
      {5, "ratio table", 30, ratio_table},
      {6, "goodness of fit", 120, goodness_of_fit},
      {7, "gradients", 10, gradients},
      {8, "mdct round trip", 10, mdct_round_trip},
      {9, "separation", 300, separation_quality},
      {10, "pipeline speed", 60, pipeline_speed},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("[%s] %2d %-17s %6.1fs/%gs  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                secs, c.budget_seconds, out.detail.c_str(), in_time ? "" : " (over budget)");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
