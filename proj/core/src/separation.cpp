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

#include "dldsep/separation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "dldsep/sampling.hpp"

namespace dldsep {

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double wrap_pi(double t) {
  t = std::fmod(t, kPi);
  return t < 0.0 ? t + kPi : t;
}

double log_weighted_density_1d(const DldMixture& model, std::size_t i,
                               double angle) {
  const double a = model.weights()[i];
  if (a <= 0.0) return -std::numeric_limits<double>::infinity();
  const DldParams& c = model.component(i);
  const double mean_angle = axial_angle(c.mean.coords());
  return std::log(a) + log_normalization_constant(2, c.k) -
         c.k * std::abs(std::sin(angle - mean_angle));
}

void require_two_dimensional(const DldMixture& model) {
  if (model.dimension() != 2) {
    throw std::invalid_argument("hard attribution requires two channels");
  }
}

}  // namespace

Projection project_to_sphere(const MdctFrames& frames, double energy_floor) {
  if (frames.channels < 2) {
    throw std::invalid_argument("project_to_sphere: need at least 2 channels");
  }
  if (!(energy_floor >= 0.0)) {
    throw std::invalid_argument("project_to_sphere: negative energy floor");
  }
  const std::size_t K = frames.channels;
  const std::size_t T = frames.points();
  std::vector<double> norms(T, 0.0);
  double top = 0.0;
  for (std::size_t tf = 0; tf < T; ++tf) {
    double sq = 0.0;
    for (std::size_t c = 0; c < K; ++c) sq += frames.at(c, tf) * frames.at(c, tf);
    norms[tf] = std::sqrt(sq);
    top = std::max(top, norms[tf]);
  }
  if (!(top > 0.0)) {
    throw std::invalid_argument("project_to_sphere: input is silent");
  }
  const double floor = energy_floor * top;

  Projection out{AngularDataset(static_cast<int>(K)), {}, {}, 0};
  out.total_points = T;
  std::vector<double> x(K);
  for (std::size_t tf = 0; tf < T; ++tf) {
    if (norms[tf] < floor || norms[tf] == 0.0) continue;
    for (std::size_t c = 0; c < K; ++c) x[c] = frames.at(c, tf);
    out.directions.push_back(x);
    out.tf_index.push_back(tf);
    out.magnitudes.push_back(norms[tf]);
  }
  return out;
}

const char* to_string(AttributionMode mode) {
  return mode == AttributionMode::kHard ? "hard" : "soft";
}

AttributionMode attribution_mode_from_string(const std::string& name) {
  if (name == "hard") return AttributionMode::kHard;
  if (name == "soft") return AttributionMode::kSoft;
  throw std::invalid_argument("unknown attribution mode: " + name);
}

double weighted_density_1d(const DldMixture& model, std::size_t i,
                           double angle) {
  require_two_dimensional(model);
  return std::exp(log_weighted_density_1d(model, i, angle));
}

HardBoundaries hard_boundaries_1d(const DldMixture& model) {
  require_two_dimensional(model);
  const std::size_t K = model.size();
  HardBoundaries out;
  out.order.resize(K);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::vector<double> angles(K);
  for (std::size_t i = 0; i < K; ++i) {
    angles[i] = axial_angle(model.component(i).mean.coords());
  }
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return angles[a] < angles[b]; });
  for (std::size_t i : out.order) out.mean_angles.push_back(angles[i]);
  if (K == 1) return out;

  for (std::size_t j = 0; j < K; ++j) {
    const std::size_t a = out.order[j];
    const std::size_t b = out.order[(j + 1) % K];
    double lo = out.mean_angles[j];
    double hi = out.mean_angles[(j + 1) % K] + (j + 1 == K ? kPi : 0.0);
    auto diff = [&](double t) {
      return log_weighted_density_1d(model, a, t) -
             log_weighted_density_1d(model, b, t);
    };
    const double f_lo = diff(lo);
    const double f_hi = diff(hi);
    double boundary;
    if (std::abs(f_lo) < 1e-14 && std::abs(f_hi) < 1e-14) {
      boundary = 0.5 * (lo + hi);
    } else if (!(f_lo > 0.0)) {
      boundary = lo;
    } else if (!(f_hi < 0.0)) {
      boundary = hi;
    } else {
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (diff(mid) > 0.0 ? lo : hi) = mid;
      }
      boundary = 0.5 * (lo + hi);
    }
    out.boundaries.push_back(boundary);
  }
  return out;
}

std::vector<DecisionArc> decision_arcs_1d(const DldMixture& model) {
  require_two_dimensional(model);
  const std::size_t K = model.size();
  std::vector<double> means(K);
  for (std::size_t i = 0; i < K; ++i) {
    means[i] = axial_angle(model.component(i).mean.coords());
  }

  // Between consecutive kinks every log-density difference has the form
  // A + B sin t + C cos t, with one extremum per half turn, so splitting at
  // that extremum leaves monotone pieces with at most one root each.
  std::vector<double> cuts{0.0, kPi};
  cuts.insert(cuts.end(), means.begin(), means.end());
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> knots = cuts;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double lo = cuts[s];
    const double hi = cuts[s + 1];
    if (!(hi > lo)) continue;
    const double mid = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < K; ++i) {
      if (!(model.weights()[i] > 0.0)) continue;
      for (std::size_t j = i + 1; j < K; ++j) {
        if (!(model.weights()[j] > 0.0)) continue;
        const double ki = model.component(i).k;
        const double kj = model.component(j).k;
        const double si = std::sin(mid - means[i]) < 0.0 ? -1.0 : 1.0;
        const double sj = std::sin(mid - means[j]) < 0.0 ? -1.0 : 1.0;
        const double B = -ki * si * std::cos(means[i]) + kj * sj * std::cos(means[j]);
        const double C = ki * si * std::sin(means[i]) - kj * sj * std::sin(means[j]);
        std::vector<double> edges{lo, hi};
        if (B != 0.0 || C != 0.0) {
          const double extremum = wrap_pi(std::atan2(B, C));
          if (extremum > lo && extremum < hi) edges.insert(edges.begin() + 1, extremum);
        }
        auto diff = [&](double t) {
          return log_weighted_density_1d(model, i, t) -
                 log_weighted_density_1d(model, j, t);
        };
        for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
          double a = edges[e];
          double b = edges[e + 1];
          const double fa = diff(a);
          const double fb = diff(b);
          if (!(fa * fb < 0.0)) continue;
          const bool rising = fa < 0.0;
          for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
            const double m = 0.5 * (a + b);
            ((diff(m) < 0.0) == rising ? a : b) = m;
          }
          knots.push_back(0.5 * (a + b));
        }
      }
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  std::vector<DecisionArc> arcs;
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    const double mid = 0.5 * (knots[s] + knots[s + 1]);
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < K; ++i) {
      const double v = log_weighted_density_1d(model, i, mid);
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    if (!arcs.empty() && arcs.back().component == best) {
      arcs.back().end = knots[s + 1];
    } else {
      arcs.push_back({knots[s], knots[s + 1], best});
    }
  }
  return arcs;
}

AttributionSets attribute_hard_1d(const DldMixture& model,
                                  const Projection& projection) {
  require_two_dimensional(model);
  if (projection.directions.dimension() != 2) {
    throw std::invalid_argument("attribute_hard_1d: projection is not 2-D");
  }
  const std::vector<DecisionArc> arcs = decision_arcs_1d(model);
  std::vector<double> ends;
  for (const DecisionArc& arc : arcs) ends.push_back(arc.end);
  AttributionSets out;
  out.mode = AttributionMode::kHard;
  out.sets.resize(model.size());
  for (std::size_t n = 0; n < projection.directions.size(); ++n) {
    const double t = axial_angle(projection.directions.point(n));
    auto it = std::upper_bound(ends.begin(), ends.end(), t);
    if (it == ends.end()) --it;
    const std::size_t owner = arcs[it - ends.begin()].component;
    out.sets[owner].push_back(projection.tf_index[n]);
  }
  return out;
}

AttributionSets attribute_soft(const DldMixture& model,
                               const Projection& projection, double q,
                               SoftRule rule) {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("attribute_soft: q must lie in (0, 1)");
  }
  if (projection.directions.dimension() != model.dimension()) {
    throw std::invalid_argument("attribute_soft: dimension mismatch");
  }
  const std::size_t K = model.size();
  const std::vector<double> log_scale = model.log_scales();
  const double log_keep = std::log1p(-q);
  AttributionSets out;
  out.mode = AttributionMode::kSoft;
  out.q = q;
  out.sets.resize(K);
  std::vector<double> log_w(K);
  for (std::size_t n = 0; n < projection.directions.size(); ++n) {
    const auto x = projection.directions.point(n);
    std::size_t best = 0;
    for (std::size_t i = 0; i < K; ++i) {
      const auto& c = model.component(i);
      log_w[i] = log_scale[i] - c.k * sin_distance(c.mean.coords(), x);
      if (log_w[i] > log_w[best]) best = i;
    }
    double log_mix = 0.0;
    if (rule == SoftRule::kMixtureDensity) {
      double sum = 0.0;
      for (std::size_t i = 0; i < K; ++i) sum += std::exp(log_w[i] - log_w[best]);
      log_mix = log_w[best] + std::log(sum);
    }
    bool placed = false;
    for (std::size_t i = 0; i < K; ++i) {
      const bool member =
          rule == SoftRule::kPerComponent
              ? log_w[i] - log_scale[i] >= log_keep
              : log_mix >= log_keep + log_scale[i];
      if (member) {
        out.sets[i].push_back(projection.tf_index[n]);
        placed = true;
      }
    }
    if (!placed) {
      out.sets[best].push_back(projection.tf_index[n]);
      ++out.fallback_points;
    }
  }
  return out;
}

std::vector<std::vector<double>> reconstruct_sources(
    const MdctFrames& frames, const AttributionSets& sets,
    const DldMixture& model) {
  if (static_cast<int>(frames.channels) != model.dimension() ||
      sets.sets.size() != model.size()) {
    throw std::invalid_argument("reconstruct_sources: shape mismatch");
  }
  const Mdct mdct(frames.frame_length);
  std::vector<std::vector<double>> out;
  out.reserve(model.size());
  std::vector<double> plane(frames.points());
  for (std::size_t i = 0; i < model.size(); ++i) {
    std::fill(plane.begin(), plane.end(), 0.0);
    const auto m = model.component(i).mean.coords();
    for (std::size_t tf : sets.sets[i]) {
      double u = 0.0;
      for (std::size_t c = 0; c < frames.channels; ++c) u += m[c] * frames.at(c, tf);
      plane[tf] = u;
    }
    out.push_back(mdct.inverse(plane, frames.signal_length));
  }
  return out;
}

MdctFrames image_coefficients(const MdctFrames& frames,
                              const std::vector<std::size_t>& set) {
  MdctFrames out = frames.zeros_like(frames.channels);
  for (std::size_t tf : set) {
    for (std::size_t c = 0; c < frames.channels; ++c) {
      out.at(c, tf) = frames.at(c, tf);
    }
  }
  return out;
}

MdctFrames residual_coefficients(const MdctFrames& frames,
                                 const AttributionSets& sets) {
  std::vector<bool> claimed(frames.points(), false);
  for (const auto& s : sets.sets) {
    for (std::size_t tf : s) claimed[tf] = true;
  }
  MdctFrames out = frames.zeros_like(frames.channels);
  for (std::size_t tf = 0; tf < frames.points(); ++tf) {
    if (claimed[tf]) continue;
    for (std::size_t c = 0; c < frames.channels; ++c) {
      out.at(c, tf) = frames.at(c, tf);
    }
  }
  return out;
}

std::vector<MixtureSignals> reconstruct_source_images(
    const MdctFrames& frames, const AttributionSets& sets) {
  std::vector<MixtureSignals> out;
  out.reserve(sets.sets.size());
  for (const auto& s : sets.sets) {
    out.push_back(mdct_inverse(image_coefficients(frames, s)));
  }
  return out;
}

void SeparationConfig::validate() const {
  if (frame_length < 2 || frame_length % 2 != 0) {
    throw std::invalid_argument("separation: frame length must be even");
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("separation: q must lie in (0, 1)");
  }
  if (!(energy_floor >= 0.0 && energy_floor < 1.0)) {
    throw std::invalid_argument("separation: energy floor must lie in [0, 1)");
  }
  fit.validate();
}

SeparationResult separate(const MixtureSignals& signals, std::size_t sources,
                          const SeparationConfig& config) {
  const auto start = Clock::now();
  config.validate();
  signals.validate();
  if (signals.channel_count() < 2) {
    throw std::invalid_argument("separate: need at least two channels");
  }
  if (sources < 1) throw std::invalid_argument("separate: need >= 1 source");
  const AttributionMode mode = config.mode.value_or(
      signals.channel_count() == 2 ? AttributionMode::kHard
                                   : AttributionMode::kSoft);
  if (mode == AttributionMode::kHard && signals.channel_count() != 2) {
    throw std::invalid_argument("separate: hard mode needs two channels");
  }

  StageTimings timings;
  auto stage = Clock::now();
  const MdctFrames frames = mdct_forward(signals, config.frame_length);
  timings.mdct = seconds_since(stage);

  stage = Clock::now();
  const Projection projection = project_to_sphere(frames, config.energy_floor);
  timings.projection = seconds_since(stage);
  if (projection.directions.size() < sources) {
    throw std::invalid_argument("separate: fewer active points than sources");
  }

  stage = Clock::now();
  MixtureFit fit = fit_mixture(projection.directions, sources, config.fit);
  timings.fit = seconds_since(stage);

  SeparationResult result{{}, {}, std::move(fit), {}, 0, 0, timings};
  result.active_points = projection.directions.size();
  result.total_points = projection.total_points;

  stage = Clock::now();
  result.attribution =
      mode == AttributionMode::kHard
          ? attribute_hard_1d(result.fit.model, projection)
          : attribute_soft(result.fit.model, projection, config.q,
                           config.soft_rule);
  result.timings.attribution = seconds_since(stage);

  stage = Clock::now();
  result.sources = reconstruct_sources(frames, result.attribution, result.fit.model);
  if (config.source_images) {
    result.images = reconstruct_source_images(frames, result.attribution);
  }
  result.timings.reconstruction = seconds_since(stage);
  result.timings.total = seconds_since(start);
  return result;
}

}  // namespace dldsep
