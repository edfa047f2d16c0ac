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

// Underdetermined instantaneous source separation. Mixture channels are
// sparsified with the MDCT; every time-frequency point with enough energy
// becomes a direction on the half unit sphere; a directional Laplacian
// mixture with one component per source is fitted to those directions; and
// each point is attributed to one or more sources whose signals are rebuilt
// from the masked coefficients.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dldsep/directional.hpp"
#include "dldsep/mdct.hpp"
#include "dldsep/mixture.hpp"

namespace dldsep {

struct Projection {
  AngularDataset directions;
  std::vector<std::size_t> tf_index;  // time-frequency point of each row
  std::vector<double> magnitudes;     // channel norm of each row
  std::size_t total_points = 0;       // all time-frequency points
};

/// Keeps points whose channel norm is at least energy_floor times the
/// largest norm and maps them to canonical unit directions. Throws
/// std::invalid_argument for fewer than two channels or an all-zero input.
Projection project_to_sphere(const MdctFrames& frames,
                             double energy_floor = 1e-6);

enum class AttributionMode { kHard, kSoft };

const char* to_string(AttributionMode mode);
AttributionMode attribution_mode_from_string(const std::string& name);

struct AttributionSets {
  AttributionMode mode = AttributionMode::kHard;
  double q = 0.0;
  // Sorted time-frequency indices per source.
  std::vector<std::vector<std::size_t>> sets;
  // Soft mode: points that met no threshold and went to the argmax
  // responsibility component.
  std::size_t fallback_points = 0;
};

/// Decision boundaries (angles in [0, pi)) of a p = 2 mixture, one per pair
/// of angularly adjacent components, listed in increasing mean-angle order:
/// boundary j separates sorted component j from j+1 (the last one wraps
/// through pi = 0).
struct HardBoundaries {
  std::vector<std::size_t> order;    // component indices by mean angle
  std::vector<double> mean_angles;   // in `order`
  std::vector<double> boundaries;    // boundary after each sorted component
};

HardBoundaries hard_boundaries_1d(const DldMixture& model);

/// Weighted component density a_i c(k_i) exp(-k_i |sin(t - m_i)|) at angle t.
double weighted_density_1d(const DldMixture& model, std::size_t i,
                           double angle);

/// Arcs of [0, pi) on which one weighted component density is the largest,
/// in increasing start order. Ends are intersections of two weighted
/// densities; the first arc starts at 0 and the last ends at pi.
struct DecisionArc {
  double start = 0.0;
  double end = 0.0;
  std::size_t component = 0;
};

std::vector<DecisionArc> decision_arcs_1d(const DldMixture& model);

/// Partition of the projected points by decision_arcs_1d. Requires p = 2.
AttributionSets attribute_hard_1d(const DldMixture& model,
                                  const Projection& projection);

enum class SoftRule {
  kPerComponent,  // exp(-k_i sqrt(1 - (m_i'x)^2)) >= 1 - q
  kMixtureDensity,  // p(x) >= (1 - q) a_i c_p(k_i), p the mixture density
};

/// Point n joins S_i when it passes the rule for component i; points that
/// pass no rule join their argmax-responsibility component.
AttributionSets attribute_soft(const DldMixture& model,
                               const Projection& projection, double q,
                               SoftRule rule = SoftRule::kPerComponent);

/// Single-channel coefficient plane per source with u_i = m_i'x on S_i and
/// zero elsewhere, mapped back to the time domain.
std::vector<std::vector<double>> reconstruct_sources(
    const MdctFrames& frames, const AttributionSets& sets,
    const DldMixture& model);

/// Masked K-channel coefficients for one source image (x on S_i, else 0).
MdctFrames image_coefficients(const MdctFrames& frames,
                              const std::vector<std::size_t>& set);

/// Coefficients attributed to no source (energy-floor points in hard mode).
MdctFrames residual_coefficients(const MdctFrames& frames,
                                 const AttributionSets& sets);

std::vector<MixtureSignals> reconstruct_source_images(
    const MdctFrames& frames, const AttributionSets& sets);

struct SeparationConfig {
  std::size_t frame_length = 512;
  // Empty: hard for two channels, soft otherwise.
  std::optional<AttributionMode> mode;
  double q = 0.8;
  SoftRule soft_rule = SoftRule::kPerComponent;
  double energy_floor = 1e-6;
  bool source_images = false;
  FitConfig fit;

  void validate() const;
};

struct StageTimings {
  double mdct = 0.0;
  double projection = 0.0;
  double fit = 0.0;
  double attribution = 0.0;
  double reconstruction = 0.0;
  double total = 0.0;
};

struct SeparationResult {
  std::vector<std::vector<double>> sources;
  std::vector<MixtureSignals> images;  // filled when config.source_images
  MixtureFit fit;
  AttributionSets attribution;
  std::size_t active_points = 0;
  std::size_t total_points = 0;
  StageTimings timings;  // seconds
};

/// Full pipeline with one mixture component per source.
SeparationResult separate(const MixtureSignals& signals, std::size_t sources,
                          const SeparationConfig& config = {});

}  // namespace dldsep
