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

#include "dldsep/io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dldsep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json number_or_string(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

}  // namespace

MixtureSignals read_wav(const fs::path& path) {
  const std::vector<unsigned char> bytes = read_bytes(path);
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error(name + ": not a RIFF/WAVE file");
  }
  int format = -1, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (available < 16) throw std::runtime_error(name + ": short fmt chunk");
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == 0xFFFE && available >= 26) format = le16(chunk + 32);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = available;
    }
    pos = body + size + (size & 1);
  }
  if (format < 0 || data == nullptr) {
    throw std::runtime_error(name + ": missing fmt or data chunk");
  }
  if (channels < 1 || rate == 0) {
    throw std::runtime_error(name + ": bad channel count or sample rate");
  }
  const bool pcm16 = format == 1 && bits == 16;
  const bool float32 = format == 3 && bits == 32;
  if (!pcm16 && !float32) {
    throw std::runtime_error(name + ": only 16-bit PCM and 32-bit float supported");
  }
  const std::size_t width = bits / 8;
  const std::size_t frames = data_size / (width * channels);
  MixtureSignals out;
  out.sample_rate = static_cast<int>(rate);
  out.channels.assign(channels, std::vector<double>(frames));
  for (std::size_t n = 0; n < frames; ++n) {
    for (int c = 0; c < channels; ++c) {
      const unsigned char* s = data + (n * channels + c) * width;
      double v;
      if (pcm16) {
        v = static_cast<std::int16_t>(le16(s)) / 32768.0;
      } else {
        const std::uint32_t u = le32(s);
        float f;
        std::memcpy(&f, &u, sizeof f);
        v = f;
      }
      out.channels[c][n] = v;
    }
  }
  return out;
}

MixtureSignals read_wav_channels(const std::vector<fs::path>& paths) {
  if (paths.empty()) throw std::runtime_error("no WAV files given");
  MixtureSignals out;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    MixtureSignals part = read_wav(paths[i]);
    if (i == 0) {
      out.sample_rate = part.sample_rate;
    } else if (part.sample_rate != out.sample_rate) {
      throw std::runtime_error("inconsistent sample rates across WAV files");
    } else if (part.length() != out.length()) {
      throw std::runtime_error("inconsistent lengths across WAV files");
    }
    for (auto& ch : part.channels) out.channels.push_back(std::move(ch));
  }
  return out;
}

void write_wav(const fs::path& path, const MixtureSignals& signals,
               WavFormat format) {
  signals.validate();
  const auto channels = static_cast<std::uint16_t>(signals.channel_count());
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint32_t block = channels * (bits / 8);
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(signals.length()) * block;
  std::string s;
  s.reserve(44 + data_size);
  s += "RIFF";
  put32(s, 36 + data_size);
  s += "WAVEfmt ";
  put32(s, 16);
  put16(s, format == WavFormat::kPcm16 ? 1 : 3);
  put16(s, channels);
  put32(s, static_cast<std::uint32_t>(signals.sample_rate));
  put32(s, static_cast<std::uint32_t>(signals.sample_rate) * block);
  put16(s, static_cast<std::uint16_t>(block));
  put16(s, bits);
  s += "data";
  put32(s, data_size);
  for (std::size_t n = 0; n < signals.length(); ++n) {
    for (const auto& ch : signals.channels) {
      if (format == WavFormat::kPcm16) {
        const long v = std::clamp(std::lround(ch[n] * 32768.0), -32768L, 32767L);
        put16(s, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
      } else {
        const float f = static_cast<float>(ch[n]);
        std::uint32_t u;
        std::memcpy(&u, &f, sizeof u);
        put32(s, u);
      }
    }
  }
  write_text(path, s);
}

void write_dataset_csv(const fs::path& path, const AngularDataset& data) {
  std::string s;
  for (int j = 0; j < data.dimension(); ++j) {
    s += (j ? ",x" : "x") + std::to_string(j + 1);
  }
  s += '\n';
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto x = data.point(n);
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j) s += ',';
      s += format_g17(x[j]);
    }
    s += '\n';
  }
  write_text(path, s);
}

AngularDataset read_dataset_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  int p = 0;
  std::vector<double> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (line_no == 1) continue;  // header
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": non-numeric value");
    }
    if (p == 0) p = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != p) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": inconsistent column count");
    }
    rows.insert(rows.end(), values.begin(), values.end());
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no data rows");
  if (p < 2) throw std::runtime_error(path.string() + ": need at least 2 columns");
  try {
    return AngularDataset(p, std::move(rows));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

json to_json(const KLookupTable& table) {
  return {{"version", kLookupFormatVersion},
          {"p", table.dimension()},
          {"k_grid", std::vector<double>(table.k_grid().begin(), table.k_grid().end())},
          {"ratio_grid",
           std::vector<double>(table.ratio_grid().begin(), table.ratio_grid().end())}};
}

KLookupTable lookup_from_json(const json& j) {
  try {
    if (j.at("version").get<int>() != kLookupFormatVersion) {
      throw std::runtime_error("unsupported lookup table version");
    }
    return KLookupTable(j.at("p").get<int>(),
                        j.at("k_grid").get<std::vector<double>>(),
                        j.at("ratio_grid").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("lookup table: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("lookup table: ") + e.what());
  }
}

json to_json(const UnitVector& v) {
  return std::vector<double>(v.coords().begin(), v.coords().end());
}

UnitVector unit_vector_from_json(const json& j) {
  return UnitVector(j.get<std::vector<double>>());
}

json to_json(const DldParams& params) {
  return {{"mean", to_json(params.mean)}, {"k", params.k}};
}

DldParams dld_params_from_json(const json& j) {
  return DldParams(unit_vector_from_json(j.at("mean")), j.at("k").get<double>());
}

json to_json(const FitResult& fit) {
  return {{"params", to_json(fit.params)},
          {"converged", fit.converged},
          {"iterations", fit.iterations},
          {"log_likelihood", fit.log_likelihood},
          {"k_status", to_string(fit.k_status)}};
}

json to_json(const DldMixture& model) {
  json comps = json::array();
  for (std::size_t i = 0; i < model.size(); ++i) {
    json c = to_json(model.component(i));
    c["weight"] = model.weights()[i];
    comps.push_back(std::move(c));
  }
  return {{"dimension", model.dimension()}, {"components", std::move(comps)}};
}

DldMixture mixture_from_json(const json& j) {
  std::vector<DldParams> comps;
  std::vector<double> weights;
  for (const auto& c : j.at("components")) {
    comps.push_back(dld_params_from_json(c));
    weights.push_back(c.at("weight").get<double>());
  }
  return DldMixture(std::move(comps), std::move(weights));
}

json to_json(const MixtureDiagnostics& d) {
  json status = json::array();
  for (RatioStatus s : d.k_status) status.push_back(to_string(s));
  return {{"iterations", d.iterations},
          {"converged", d.converged},
          {"simplified_likelihood", d.simplified_likelihood},
          {"log_likelihood", d.log_likelihood},
          {"starved", std::vector<bool>(d.starved.begin(), d.starved.end())},
          {"k_status", std::move(status)},
          {"uniform_rows", d.uniform_rows},
          {"kmeans_iterations", d.kmeans_iterations},
          {"kmeans_objective", d.kmeans_objective},
          {"restart", d.restart}};
}

json to_json(const FitConfig& c) {
  return {{"eta", c.eta},
          {"max_iterations", c.max_iterations},
          {"tolerance", c.tolerance},
          {"initial_k", c.initial_k},
          {"em_max_iterations", c.em_max_iterations},
          {"em_tolerance", c.em_tolerance},
          {"restarts", c.restarts},
          {"kmeans_max_iterations", c.kmeans_max_iterations},
          {"kmeans_tolerance", c.kmeans_tolerance},
          {"seed", c.seed}};
}

json to_json(const ChiSquareResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"first_bin", c.first_bin},
                     {"last_bin", c.last_bin},
                     {"observed", c.observed},
                     {"expected", c.expected}});
  }
  return {{"statistic", r.statistic},
          {"degrees_of_freedom", r.degrees_of_freedom},
          {"model_mass", r.model_mass},
          {"cells", std::move(cells)}};
}

json to_json(const SeparationScores& scores) {
  json rows = json::array();
  for (const auto& s : scores.sources) {
    rows.push_back({{"source", s.reference + 1},
                    {"estimate", s.estimate + 1},
                    {"SDR", number_or_string(s.sdr)},
                    {"SIR", number_or_string(s.sir)},
                    {"SAR", number_or_string(s.sar)}});
  }
  return {{"sources", std::move(rows)},
          {"mean_SDR", number_or_string(scores.mean_sdr())},
          {"mean_SIR", number_or_string(scores.mean_sir())},
          {"mean_SAR", number_or_string(scores.mean_sar())}};
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string scores_csv(const SeparationScores& scores) {
  std::string s = "source,SDR,SIR,SAR\n";
  for (const auto& x : scores.sources) {
    s += std::to_string(x.reference + 1) + ',' + format_number(x.sdr) + ',' +
         format_number(x.sir) + ',' + format_number(x.sar) + '\n';
  }
  return s;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string lookup_cache_name(int p, int grid_size) {
  return "lut_p" + std::to_string(p) + "_n" + std::to_string(grid_size) +
         "_k0.01-30.json";
}

KLookupTable load_or_build_k_lookup(int p, int grid_size,
                                    const fs::path& directory) {
  if (directory.empty()) return build_k_lookup(p, grid_size);
  const fs::path file = directory / lookup_cache_name(p, grid_size);
  if (fs::exists(file)) {
    try {
      KLookupTable table = lookup_from_json(read_json(file));
      if (table.dimension() == p &&
          static_cast<int>(table.size()) == grid_size) {
        return table;
      }
      spdlog::warn("lookup cache {} does not match; rebuilding", file.string());
    } catch (const std::runtime_error& e) {
      spdlog::warn("ignoring unreadable lookup cache {}: {}", file.string(), e.what());
    }
  }
  KLookupTable table = build_k_lookup(p, grid_size);
  write_json(file, to_json(table));
  return table;
}

}  // namespace dldsep
