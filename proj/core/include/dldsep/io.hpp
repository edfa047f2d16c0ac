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

// File formats: PCM WAV audio, CSV datasets and JSON for tables, models
// and reports. Every reader throws std::runtime_error on malformed input.

#pragma once

#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "dldsep/directional.hpp"
#include "dldsep/dld.hpp"
#include "dldsep/eval.hpp"
#include "dldsep/mdct.hpp"
#include "dldsep/mixture.hpp"
#include "dldsep/special.hpp"

namespace dldsep {

// ---------------------------------------------------------------------------
// WAV

enum class WavFormat { kPcm16, kFloat32 };

/// Reads 16-bit PCM or 32-bit IEEE float WAV (any channel count). Samples
/// are scaled to [-1, 1].
MixtureSignals read_wav(const std::filesystem::path& path);

/// Joins mono or multichannel files into one signal set. Throws
/// std::runtime_error on differing sample rates or lengths.
MixtureSignals read_wav_channels(const std::vector<std::filesystem::path>& paths);

/// 16-bit output clips to [-1, 1].
void write_wav(const std::filesystem::path& path, const MixtureSignals& signals,
               WavFormat format = WavFormat::kFloat32);

// ---------------------------------------------------------------------------
// CSV datasets: one point per line, p comma-separated values, optional
// non-numeric header line.

void write_dataset_csv(const std::filesystem::path& path,
                       const AngularDataset& data);
AngularDataset read_dataset_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// JSON

inline constexpr int kLookupFormatVersion = 1;

nlohmann::json to_json(const KLookupTable& table);
KLookupTable lookup_from_json(const nlohmann::json& j);

nlohmann::json to_json(const UnitVector& v);
UnitVector unit_vector_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DldParams& params);
DldParams dld_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FitResult& fit);

nlohmann::json to_json(const DldMixture& model);
DldMixture mixture_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MixtureDiagnostics& diagnostics);

nlohmann::json to_json(const FitConfig& config);

nlohmann::json to_json(const ChiSquareResult& result);

/// Scores with infinities rendered as the strings "inf" and "-inf".
nlohmann::json to_json(const SeparationScores& scores);

/// "source,SDR,SIR,SAR" header then one row per reference, numbered from 1.
std::string scores_csv(const SeparationScores& scores);

/// Decimal rendering with "inf" and "-inf" for infinities.
std::string format_number(double value);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

// ---------------------------------------------------------------------------
// Lookup table cache

/// File name for a table keyed by p, grid size and k range.
std::string lookup_cache_name(int p, int grid_size);

/// Loads the cached table from `directory` if present and valid, otherwise
/// builds it and writes it there. An empty directory disables caching.
KLookupTable load_or_build_k_lookup(int p, int grid_size,
                                    const std::filesystem::path& directory);

}  // namespace dldsep
