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

#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <memory>

#include "dldsep/dld.hpp"
#include "dldsep/eval.hpp"
#include "dldsep/io.hpp"
#include "dldsep/mixture.hpp"
#include "dldsep/sampling.hpp"
#include "dldsep/separation.hpp"
#include "dldsep/special.hpp"

namespace dldsep::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  return fs::path(p.string() + suffix);
}

void write_run_config(const fs::path& path, const std::string& run_config) {
  write_text(path, run_config);
}

std::shared_ptr<const KLookupTable> resolve_lookup(int p, int grid) {
  const char* dir = std::getenv(kLutCacheEnv);
  if (dir != nullptr && *dir != '\0') {
    return std::make_shared<const KLookupTable>(load_or_build_k_lookup(p, grid, dir));
  }
  if (grid != kDefaultLookupGridSize) {
    return std::make_shared<const KLookupTable>(build_k_lookup(p, grid));
  }
  return nullptr;
}

AngularDataset load_dataset(const fs::path& path, std::optional<int> p) {
  AngularDataset data = read_dataset_csv(path);
  if (p && *p != data.dimension()) {
    throw std::runtime_error("data has " + std::to_string(data.dimension()) +
                             " columns but --p is " + std::to_string(*p));
  }
  return data;
}

std::optional<UnitVector> sidecar_mean(const fs::path& data) {
  const fs::path sidecar = with_suffix(data, ".json");
  if (!fs::exists(sidecar)) return std::nullopt;
  const json j = read_json(sidecar);
  if (!j.contains("mean")) return std::nullopt;
  return unit_vector_from_json(j.at("mean"));
}

WavFormat wav_format(const std::string& name) {
  if (name == "float32") return WavFormat::kFloat32;
  if (name == "pcm16") return WavFormat::kPcm16;
  throw UsageError("unknown WAV format: " + name);
}

std::vector<std::vector<double>> load_signals(const std::vector<fs::path>& paths,
                                              int& rate) {
  std::vector<std::vector<double>> out;
  for (const auto& p : paths) {
    MixtureSignals s = read_wav(p);
    if (out.empty()) {
      rate = s.sample_rate;
    } else if (s.sample_rate != rate) {
      throw std::runtime_error("inconsistent sample rates across WAV files");
    }
    for (auto& ch : s.channels) out.push_back(std::move(ch));
  }
  return out;
}

}  // namespace

void cmd_sample(const SampleOptions& o, const std::string& run_config) {
  if (o.n == 0) throw UsageError("--n must be positive");
  const bool by_angles = !o.mean_angles.empty();
  if (by_angles == !o.mean.empty()) {
    throw UsageError("give exactly one of --mean-angles or --mean");
  }
  const AngleOrder order = angle_order_from_string(o.convention);
  std::optional<UnitVector> mean;
  if (by_angles) {
    if (static_cast<int>(o.mean_angles.size()) != o.p - 1) {
      throw UsageError("--mean-angles needs p-1 = " + std::to_string(o.p - 1) + " values");
    }
    mean = spherical_to_unit(SphericalAngles{o.mean_angles}, order);
  } else {
    if (static_cast<int>(o.mean.size()) != o.p) {
      throw UsageError("--mean needs p = " + std::to_string(o.p) + " values");
    }
    try {
      mean = UnitVector(o.mean);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--mean: ") + e.what());
    }
  }
  const DldParams params(*mean, o.k);
  const AngularDataset data =
      sample_dld(params, o.n, o.seed, BlockSamplerOptions{o.blocks});
  write_dataset_csv(o.out, data);

  json sidecar = {{"p", o.p},
                  {"k", o.k},
                  {"n", o.n},
                  {"mean", to_json(params.mean)},
                  {"convention", to_string(order)},
                  {"seed", o.seed},
                  {"blocks_per_axis", o.blocks}};
  if (by_angles) sidecar["mean_angles"] = o.mean_angles;
  write_json(with_suffix(o.out, ".json"), sidecar);
  write_run_config(with_suffix(o.out, ".run.toml"), run_config);
  spdlog::info("wrote {} points to {}", data.size(), o.out.string());
}

void cmd_fit(const FitOptions& o, const std::string& run_config) {
  const AngularDataset data = load_dataset(o.data, o.p);
  FitConfig config;
  config.eta = o.eta;
  config.max_iterations = o.max_iterations;
  config.tolerance = o.tolerance;
  config.initial_k = o.initial_k;
  config.lookup = resolve_lookup(data.dimension(), o.lut_grid);
  const FitResult fit = fit_dld(data, config);

  json report = to_json(fit);
  json diag = {{"n", data.size()}, {"p", data.dimension()}};
  std::optional<UnitVector> truth;
  if (!o.true_mean.empty()) {
    truth = UnitVector(o.true_mean);
  } else {
    truth = sidecar_mean(o.data);
  }
  if (truth) {
    if (truth->dimension() != data.dimension()) {
      throw std::runtime_error("true mean dimension does not match the data");
    }
    diag["true_mean"] = to_json(*truth);
    diag["abs_cosine_to_true_mean"] = std::abs(truth->dot(fit.params.mean.coords()));
  }
  report["diagnostics"] = std::move(diag);
  report["config"] = to_json(config);
  write_json(o.out, report);
  write_run_config(with_suffix(o.out, ".run.toml"), run_config);
}

void cmd_fit_mixture(const FitMixtureOptions& o, const std::string& run_config) {
  const AngularDataset data = load_dataset(o.data, o.p);
  if (o.components == 0) throw UsageError("--K must be positive");
  if (data.size() < o.components) {
    throw std::runtime_error("fewer data points than components");
  }
  FitConfig config;
  config.seed = o.seed;
  config.restarts = o.restarts;
  config.eta = o.eta;
  config.initial_k = o.initial_k;
  config.em_max_iterations = o.em_max_iterations;
  config.em_tolerance = o.em_tolerance;
  config.kmeans_max_iterations = o.kmeans_max_iterations;
  config.lookup = resolve_lookup(data.dimension(), o.lut_grid);
  const MixtureFit fit = fit_mixture(data, o.components, config);

  json report = {{"model", to_json(fit.model)},
                 {"diagnostics", to_json(fit.diagnostics)},
                 {"config", to_json(config)}};
  report["diagnostics"]["n"] = data.size();
  write_json(o.out, report);
  write_run_config(with_suffix(o.out, ".run.toml"), run_config);
}

void cmd_separate(const SeparateOptions& o, const std::string& run_config) {
  if (o.sources == 0) throw UsageError("--sources must be positive");
  const WavFormat format = wav_format(o.format);
  const MixtureSignals signals = read_wav_channels(o.inputs);
  if (signals.channel_count() < 2) {
    throw std::runtime_error("need a mixture with at least two channels");
  }

  SeparationConfig config;
  config.frame_length = o.frame_length.value_or(frame_length_for(o.frame_ms, signals.sample_rate));
  if (o.mode != "auto") config.mode = attribution_mode_from_string(o.mode);
  config.q = o.q;
  if (o.soft_rule == "component") {
    config.soft_rule = SoftRule::kPerComponent;
  } else if (o.soft_rule == "mixture") {
    config.soft_rule = SoftRule::kMixtureDensity;
  } else {
    throw UsageError("unknown soft rule: " + o.soft_rule);
  }
  config.energy_floor = o.energy_floor;
  config.source_images = o.images;
  config.fit.seed = o.seed;
  config.fit.restarts = o.restarts;
  config.fit.eta = o.eta;
  config.fit.em_max_iterations = o.em_max_iterations;
  config.fit.em_tolerance = o.em_tolerance;
  config.fit.lookup =
      resolve_lookup(static_cast<int>(signals.channel_count()), kDefaultLookupGridSize);

  const SeparationResult result = separate(signals, o.sources, config);

  fs::create_directories(o.out_dir);
  json outputs = json::array();
  for (std::size_t i = 0; i < result.sources.size(); ++i) {
    const fs::path file = o.out_dir / ("source_" + std::to_string(i + 1) + ".wav");
    write_wav(file, MixtureSignals{{result.sources[i]}, signals.sample_rate}, format);
    outputs.push_back(file.filename().string());
  }
  for (std::size_t i = 0; i < result.images.size(); ++i) {
    const fs::path file = o.out_dir / ("image_" + std::to_string(i + 1) + ".wav");
    write_wav(file, result.images[i], format);
    outputs.push_back(file.filename().string());
  }

  json columns = json::array();
  for (const auto& c : result.fit.model.components()) columns.push_back(to_json(c.mean));
  json set_sizes = json::array();
  for (const auto& s : result.attribution.sets) set_sizes.push_back(s.size());
  const auto& t = result.timings;
  json report = {
      {"sample_rate", signals.sample_rate},
      {"channels", signals.channel_count()},
      {"samples", signals.length()},
      {"sources", o.sources},
      {"frame_length", config.frame_length},
      {"mode", to_string(result.attribution.mode)},
      {"q", config.q},
      {"energy_floor", config.energy_floor},
      {"mixing_columns", std::move(columns)},
      {"model", to_json(result.fit.model)},
      {"diagnostics", to_json(result.fit.diagnostics)},
      {"active_points", result.active_points},
      {"total_points", result.total_points},
      {"set_sizes", std::move(set_sizes)},
      {"fallback_points", result.attribution.fallback_points},
      {"timings_seconds",
       {{"mdct", t.mdct},
        {"projection", t.projection},
        {"fit", t.fit},
        {"attribution", t.attribution},
        {"reconstruction", t.reconstruction},
        {"total", t.total}}},
      {"outputs", std::move(outputs)},
      {"config", to_json(config.fit)}};
  write_json(o.out_dir / "report.json", report);
  write_run_config(o.out_dir / "run.toml", run_config);
  spdlog::info("separated {} sources in {:.2f} s", o.sources, t.total);
}

void cmd_eval(const EvalOptions& o, const std::string& run_config) {
  if (!o.data.empty()) {
    if (o.model.empty()) throw UsageError("--data needs --model");
    const AngularDataset data = read_dataset_csv(o.data);
    const json j = read_json(o.model);
    const DldParams params = dld_params_from_json(j.contains("params") ? j.at("params") : j);
    if (params.dimension() != data.dimension()) {
      throw std::runtime_error("model dimension does not match the data");
    }
    ChiSquareOptions options;
    if (o.bins > 0) options.bins_1d = options.bins_2d = o.bins;
    const VmfParams vmf = fit_vmf(data);
    json report = {
        {"dld", {{"params", to_json(params)},
                 {"chi_square", to_json(pearson_chi_square(data, dld_density(params), options))}}},
        {"vmf", {{"mean", to_json(vmf.mean)},
                 {"kappa", vmf.kappa},
                 {"chi_square", to_json(pearson_chi_square(data, vmf_density(vmf), options))}}}};
    write_json(o.out, report);
    write_run_config(with_suffix(o.out, ".run.toml"), run_config);
    return;
  }
  if (o.estimates.empty() || o.references.empty()) {
    throw UsageError("give --estimates and --references, or --data and --model");
  }
  int rate_e = 0, rate_r = 0;
  const auto estimates = load_signals(o.estimates, rate_e);
  const auto references = load_signals(o.references, rate_r);
  if (estimates.size() != references.size()) {
    throw std::runtime_error("got " + std::to_string(estimates.size()) + " estimates but " +
                             std::to_string(references.size()) + " references");
  }
  if (rate_e != rate_r) throw std::runtime_error("estimate and reference sample rates differ");
  const SeparationScores scores = bss_scores(estimates, references);
  write_text(o.out, scores_csv(scores));
  write_json(with_suffix(o.out, ".json"), to_json(scores));
  write_run_config(with_suffix(o.out, ".run.toml"), run_config);
}

void cmd_lut(const LutOptions& o, const std::string& run_config) {
  fs::path file = o.out;
  if (file.empty()) {
    fs::path dir = o.cache_dir;
    if (dir.empty()) {
      const char* env = std::getenv(kLutCacheEnv);
      dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::current_path();
    }
    file = dir / lookup_cache_name(o.p, o.grid);
  }
  write_json(file, to_json(build_k_lookup(o.p, o.grid)));
  write_run_config(with_suffix(file, ".run.toml"), run_config);
  spdlog::info("wrote {}", file.string());
}

}  // namespace dldsep::cli
