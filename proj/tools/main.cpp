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

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <exception>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "dldsep/special.hpp"

namespace {

using namespace dldsep::cli;

const auto kPositive = CLI::PositiveNumber;

const CLI::Validator kOpenUnit(
    [](std::string& s) -> std::string {
      double v = 0.0;
      if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0 && v < 1.0)) {
        return "value " + s + " not in (0, 1)";
      }
      return {};
    },
    "(0, 1)");

// TOML for the chosen subcommand alone; unset options are left out so the
// file replays through --config without tripping required/excludes checks.
std::string run_config(const CLI::App& sub) {
  std::istringstream in(sub.config_to_str(true, false));
  std::string out = "[" + sub.get_name() + "]\n";
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line.ends_with("=\"\"") || line.ends_with("=\"{}\"")) continue;
    out += line + "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directional Laplacian density modelling and blind source separation"};
  app.set_config("--config", "", "Read flags from a TOML file (as written next to outputs)");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::function<void(const std::string&)> action;

  SampleOptions sample;
  auto* s = app.add_subcommand("sample", "Draw a dataset from a directional Laplacian density");
  s->add_option("--p", sample.p, "Dimension")->check(CLI::Range(2, 16));
  s->add_option("--k", sample.k, "Concentration")
      ->required()
      ->check(CLI::Range(dldsep::kMinConcentration, dldsep::kMaxConcentration));
  s->add_option("--n", sample.n, "Number of points")->required()->check(kPositive);
  s->add_option("--mean-angles", sample.mean_angles, "Mean as p-1 angles in radians")
      ->delimiter(',');
  s->add_option("--mean", sample.mean, "Mean as p Cartesian coordinates")->delimiter(',');
  s->add_option("--convention", sample.convention, "Angle order of --mean-angles")
      ->check(CLI::IsMember({"elevation-first", "azimuth-first"}));
  s->add_option("--seed", sample.seed, "Random seed")->required();
  s->add_option("--blocks", sample.blocks, "Blocks per axis of the p>=3 sampler (0: auto)")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--out", sample.out, "Output CSV")->required();
  s->callback([&] { action = [&](const std::string& c) { cmd_sample(sample, c); }; });

  FitOptions fit;
  auto* f = app.add_subcommand("fit", "Fit a single directional Laplacian density");
  f->add_option("--data", fit.data, "Input CSV")->required()->check(CLI::ExistingFile);
  f->add_option("--p", fit.p, "Expected dimension");
  f->add_option("--eta", fit.eta, "Mean ascent step")->check(kPositive);
  f->add_option("--max-iterations", fit.max_iterations)->check(kPositive);
  f->add_option("--tolerance", fit.tolerance)->check(kPositive);
  f->add_option("--initial-k", fit.initial_k)
      ->check(CLI::Range(dldsep::kMinConcentration, dldsep::kMaxConcentration));
  f->add_option("--lut-grid", fit.lut_grid, "Ratio lookup grid size")->check(CLI::Range(100, 1000000));
  f->add_option("--true-mean", fit.true_mean, "Known mean for diagnostics")->delimiter(',');
  f->add_option("--out", fit.out, "Output JSON")->required();
  f->callback([&] { action = [&](const std::string& c) { cmd_fit(fit, c); }; });

  FitMixtureOptions mix;
  auto* m = app.add_subcommand("fit-mixture", "Fit a mixture by directional K-means and EM");
  m->add_option("--data", mix.data, "Input CSV")->required()->check(CLI::ExistingFile);
  m->add_option("--p", mix.p, "Expected dimension");
  m->add_option("--K", mix.components, "Number of components")->required()->check(kPositive);
  m->add_option("--seed", mix.seed, "Random seed")->required();
  m->add_option("--restarts", mix.restarts)->check(kPositive);
  m->add_option("--eta", mix.eta)->check(kPositive);
  m->add_option("--initial-k", mix.initial_k)
      ->check(CLI::Range(dldsep::kMinConcentration, dldsep::kMaxConcentration));
  m->add_option("--em-max-iterations", mix.em_max_iterations)->check(kPositive);
  m->add_option("--em-tolerance", mix.em_tolerance)->check(kPositive);
  m->add_option("--kmeans-max-iterations", mix.kmeans_max_iterations)->check(kPositive);
  m->add_option("--lut-grid", mix.lut_grid)->check(CLI::Range(100, 1000000));
  m->add_option("--out", mix.out, "Output JSON")->required();
  m->callback([&] { action = [&](const std::string& c) { cmd_fit_mixture(mix, c); }; });

  SeparateOptions sep;
  auto* p = app.add_subcommand("separate", "Separate an instantaneous multichannel mixture");
  p->add_option("--input", sep.inputs, "Mixture WAV (multichannel, or one mono file per channel)")
      ->required()
      ->check(CLI::ExistingFile);
  p->add_option("--sources", sep.sources, "Number of sources")->required()->check(kPositive);
  p->add_option("--frame-ms", sep.frame_ms, "MDCT frame length in ms")->check(kPositive);
  p->add_option("--frame-length", sep.frame_length,
                "MDCT frame length in samples (overrides --frame-ms)");
  p->add_option("--mode", sep.mode, "auto, hard (two channels) or soft")
      ->check(CLI::IsMember({"auto", "hard", "soft"}));
  p->add_option("--q", sep.q, "Soft attribution level")->check(kOpenUnit);
  p->add_option("--soft-rule", sep.soft_rule)->check(CLI::IsMember({"component", "mixture"}));
  p->add_option("--energy-floor", sep.energy_floor)->check(CLI::NonNegativeNumber);
  p->add_option("--seed", sep.seed, "Random seed")->required();
  p->add_option("--restarts", sep.restarts)->check(kPositive);
  p->add_option("--eta", sep.eta)->check(kPositive);
  p->add_option("--em-max-iterations", sep.em_max_iterations)->check(kPositive);
  p->add_option("--em-tolerance", sep.em_tolerance)->check(kPositive);
  p->add_flag("--images", sep.images, "Also write multichannel source images");
  p->add_option("--format", sep.format, "Output sample format")
      ->check(CLI::IsMember({"float32", "pcm16"}));
  p->add_option("--out-dir", sep.out_dir, "Output directory")->required();
  p->callback([&] { action = [&](const std::string& c) { cmd_separate(sep, c); }; });

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Score separated sources, or chi-square a fitted model");
  auto* est = e->add_option("--estimates", ev.estimates, "Estimated source WAVs")
                  ->check(CLI::ExistingFile);
  e->add_option("--references", ev.references, "Reference source WAVs")
      ->check(CLI::ExistingFile)
      ->needs(est);
  auto* data = e->add_option("--data", ev.data, "Dataset CSV")->check(CLI::ExistingFile)->excludes(est);
  e->add_option("--model", ev.model, "Fitted model JSON")->check(CLI::ExistingFile)->needs(data);
  e->add_option("--bins", ev.bins, "Bins per angle (0: default)")->check(CLI::NonNegativeNumber);
  e->add_option("--out", ev.out, "Output CSV (scores) or JSON (chi-square)")->required();
  e->callback([&] { action = [&](const std::string& c) { cmd_eval(ev, c); }; });

  LutOptions lut;
  auto* l = app.add_subcommand("lut", "Build and cache the concentration lookup table");
  l->add_option("--p", lut.p, "Dimension")->required()->check(CLI::Range(2, 64));
  l->add_option("--grid", lut.grid, "Grid size")->check(CLI::Range(100, 1000000));
  l->add_option("--cache-dir", lut.cache_dir, "Cache directory (default: $DLDSEP_LUT_CACHE)");
  l->add_option("--out", lut.out, "Explicit output file");
  l->callback([&] { action = [&](const std::string& c) { cmd_lut(lut, c); }; });

  for (auto* sub : app.get_subcommands({})) sub->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    action(run_config(*app.get_subcommands().front()));
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
