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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dldsep::cli {

// Invalid flag combinations detected after parsing; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kLutCacheEnv = "DLDSEP_LUT_CACHE";

struct SampleOptions {
  int p = 3;
  double k = 0.0;
  std::size_t n = 0;
  std::vector<double> mean_angles;
  std::vector<double> mean;
  std::string convention = "elevation-first";
  std::uint64_t seed = 0;
  int blocks = 0;
  std::filesystem::path out;
};

struct FitOptions {
  std::filesystem::path data;
  std::optional<int> p;
  double eta = 0.01;
  int max_iterations = 1000;
  double tolerance = 1e-8;
  double initial_k = 15.0;
  int lut_grid = 3000;
  std::vector<double> true_mean;
  std::filesystem::path out;
};

struct FitMixtureOptions {
  std::filesystem::path data;
  std::optional<int> p;
  std::size_t components = 1;
  std::uint64_t seed = 0;
  int restarts = 1;
  double eta = 0.01;
  double initial_k = 15.0;
  int em_max_iterations = 500;
  double em_tolerance = 1e-6;
  int kmeans_max_iterations = 100;
  int lut_grid = 3000;
  std::filesystem::path out;
};

struct SeparateOptions {
  std::vector<std::filesystem::path> inputs;
  std::size_t sources = 0;
  double frame_ms = 32.0;
  std::optional<std::size_t> frame_length;
  std::string mode = "auto";
  double q = 0.8;
  std::string soft_rule = "component";
  double energy_floor = 1e-6;
  std::uint64_t seed = 0;
  int restarts = 1;
  double eta = 0.01;
  int em_max_iterations = 500;
  double em_tolerance = 1e-6;
  bool images = false;
  std::string format = "float32";
  std::filesystem::path out_dir;
};

struct EvalOptions {
  std::vector<std::filesystem::path> estimates;
  std::vector<std::filesystem::path> references;
  std::filesystem::path data;
  std::filesystem::path model;
  int bins = 0;  // 0: 72 for p = 2, 36 per axis for p = 3
  std::filesystem::path out;
};

struct LutOptions {
  int p = 2;
  int grid = 3000;
  std::filesystem::path cache_dir;
  std::filesystem::path out;
};

// Each command writes its outputs plus `run_config` (the resolved flags)
// next to them and returns normally on success; failures throw.
void cmd_sample(const SampleOptions& o, const std::string& run_config);
void cmd_fit(const FitOptions& o, const std::string& run_config);
void cmd_fit_mixture(const FitMixtureOptions& o, const std::string& run_config);
void cmd_separate(const SeparateOptions& o, const std::string& run_config);
void cmd_eval(const EvalOptions& o, const std::string& run_config);
void cmd_lut(const LutOptions& o, const std::string& run_config);

}  // namespace dldsep::cli
