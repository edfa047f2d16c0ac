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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "dldsep/sampling.hpp"
#include "test_support.hpp"

namespace dldsep {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dldsep_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

MixtureSignals tone(std::size_t channels, std::size_t n, int rate) {
  MixtureSignals s;
  s.sample_rate = rate;
  for (std::size_t c = 0; c < channels; ++c) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 0.8 * std::sin(0.01 * (c + 1) * i);
    s.channels.push_back(x);
  }
  return s;
}

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

void put16(std::ofstream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}
void put32(std::ofstream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

TEST_F(IoTest, Float32RoundTripIsExactToSinglePrecision) {
  const MixtureSignals s = tone(3, 1000, 44100);
  write_wav(dir_ / "a.wav", s, WavFormat::kFloat32);
  const MixtureSignals r = read_wav(dir_ / "a.wav");
  EXPECT_EQ(r.sample_rate, 44100);
  ASSERT_EQ(r.channel_count(), 3u);
  ASSERT_EQ(r.length(), 1000u);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < 1000; ++i) {
      EXPECT_EQ(r.channels[c][i], static_cast<double>(static_cast<float>(s.channels[c][i])));
    }
  }
}

TEST_F(IoTest, Pcm16RoundTripAndClipping) {
  MixtureSignals s = tone(2, 500, 16000);
  s.channels[0][3] = 1.7;
  s.channels[1][4] = -2.0;
  write_wav(dir_ / "b.wav", s, WavFormat::kPcm16);
  const MixtureSignals r = read_wav(dir_ / "b.wav");
  EXPECT_EQ(r.sample_rate, 16000);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 500; ++i) {
      const double expected = std::max(-1.0, std::min(32767.0 / 32768, s.channels[c][i]));
      EXPECT_NEAR(r.channels[c][i], expected, 0.5 / 32768 + 1e-15);
    }
  }
  EXPECT_EQ(fs::file_size(dir_ / "b.wav"), 44u + 2 * 2 * 500);
}

TEST_F(IoTest, ReadsExtensibleHeader) {
  const fs::path path = dir_ / "ext.wav";
  {
    std::ofstream out(path, std::ios::binary);
    const std::uint32_t frames = 4, channels = 2, bytes = frames * channels * 2;
    out.write("RIFF", 4);
    put32(out, 4 + 8 + 40 + 8 + bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put32(out, 40);
    put16(out, 0xFFFE);
    put16(out, channels);
    put32(out, 8000);
    put32(out, 8000 * channels * 2);
    put16(out, channels * 2);
    put16(out, 16);
    put16(out, 22);
    put16(out, 16);
    put32(out, 3);
    put16(out, 1);  // PCM sub-format GUID
    const unsigned char guid_tail[14] = {0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80,
                                         0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};
    out.write(reinterpret_cast<const char*>(guid_tail), 14);
    out.write("data", 4);
    put32(out, bytes);
    for (std::int16_t v : {16384, -16384, 0, 32767, -32768, 1, 2, 3}) put16(out, static_cast<std::uint16_t>(v));
  }
  const MixtureSignals r = read_wav(path);
  EXPECT_EQ(r.sample_rate, 8000);
  ASSERT_EQ(r.channel_count(), 2u);
  ASSERT_EQ(r.length(), 4u);
  EXPECT_NEAR(r.channels[0][0], 0.5, 1e-4);
  EXPECT_NEAR(r.channels[1][0], -0.5, 1e-4);
  EXPECT_NEAR(r.channels[1][1], 1.0, 1e-4);
  EXPECT_NEAR(r.channels[0][2], -1.0, 1e-4);
}

TEST_F(IoTest, RejectsMalformedWav) {
  write_text(dir_ / "junk.wav", "not a wave file at all, clearly");
  EXPECT_THROW(read_wav(dir_ / "junk.wav"), std::runtime_error);
  EXPECT_THROW(read_wav(dir_ / "missing.wav"), std::runtime_error);
}

TEST_F(IoTest, JoinsChannelFiles) {
  const MixtureSignals s = tone(2, 300, 16000);
  write_wav(dir_ / "l.wav", MixtureSignals{{s.channels[0]}, 16000});
  write_wav(dir_ / "r.wav", MixtureSignals{{s.channels[1]}, 16000});
  const MixtureSignals r = read_wav_channels({dir_ / "l.wav", dir_ / "r.wav"});
  EXPECT_EQ(r.channel_count(), 2u);
  write_wav(dir_ / "short.wav", MixtureSignals{{std::vector<double>(299, 0.1)}, 16000});
  EXPECT_THROW(read_wav_channels({dir_ / "l.wav", dir_ / "short.wav"}), std::runtime_error);
  write_wav(dir_ / "rate.wav", MixtureSignals{{s.channels[1]}, 8000});
  EXPECT_THROW(read_wav_channels({dir_ / "l.wav", dir_ / "rate.wav"}), std::runtime_error);
}

TEST_F(IoTest, CsvRoundTrip) {
  const AngularDataset data = sample_dld(DldParams(UnitVector{0.3, 0.4, 0.5}, 8.0), 200, 1);
  write_dataset_csv(dir_ / "d.csv", data);
  const AngularDataset r = read_dataset_csv(dir_ / "d.csv");
  ASSERT_EQ(r.size(), 200u);
  EXPECT_EQ(r.dimension(), 3);
  // Reading renormalizes, which may move the last bit.
  for (std::size_t i = 0; i < data.raw().size(); ++i) EXPECT_NEAR(r.raw()[i], data.raw()[i], 1e-15);
}

TEST_F(IoTest, CsvHeaderAndErrors) {
  write_text(dir_ / "h.csv", "x1,x2\n3,4\n-1,0\n");
  const AngularDataset r = read_dataset_csv(dir_ / "h.csv");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r.point(0)[0], 0.6, 1e-15);
  EXPECT_NEAR(r.point(1)[0], 1.0, 1e-15);
  write_text(dir_ / "empty.csv", "");
  EXPECT_THROW(read_dataset_csv(dir_ / "empty.csv"), std::runtime_error);
  write_text(dir_ / "ragged.csv", "1,0\n1,0,0\n");
  EXPECT_THROW(read_dataset_csv(dir_ / "ragged.csv"), std::runtime_error);
  write_text(dir_ / "bad.csv", "1,0\n1,abc\n");
  EXPECT_THROW(read_dataset_csv(dir_ / "bad.csv"), std::runtime_error);
  write_text(dir_ / "one.csv", "1\n2\n");
  EXPECT_THROW(read_dataset_csv(dir_ / "one.csv"), std::runtime_error);
  write_text(dir_ / "zero.csv", "0,0\n");
  EXPECT_THROW(read_dataset_csv(dir_ / "zero.csv"), std::runtime_error);
}

TEST_F(IoTest, ModelJsonRoundTrip) {
  const DldMixture model({DldParams(UnitVector{1.0, 2.0, 2.0}, 7.5), DldParams(UnitVector{0.0, 1.0, 0.0}, 30.0)},
                         {0.25, 0.75});
  const fs::path path = dir_ / "m.json";
  write_json(path, to_json(model));
  const DldMixture r = mixture_from_json(read_json(path));
  ASSERT_EQ(r.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(r.weights()[i], model.weights()[i]);
    EXPECT_EQ(r.component(i).k, model.component(i).k);
    for (int j = 0; j < 3; ++j) EXPECT_EQ(r.component(i).mean[j], model.component(i).mean[j]);
  }
  const DldParams d = dld_params_from_json(to_json(model.component(0)));
  EXPECT_EQ(d.k, 7.5);
  EXPECT_THROW(mixture_from_json(nlohmann::json::parse(R"({"components": 3})")), std::exception);
  write_text(dir_ / "broken.json", "{ not json");
  EXPECT_THROW(read_json(dir_ / "broken.json"), std::runtime_error);
}

TEST_F(IoTest, LookupJsonRoundTrip) {
  const KLookupTable table = build_k_lookup(3, 100);
  const KLookupTable r = lookup_from_json(to_json(table));
  EXPECT_EQ(r.dimension(), 3);
  EXPECT_EQ(vec(r.k_grid()), vec(table.k_grid()));
  EXPECT_EQ(vec(r.ratio_grid()), vec(table.ratio_grid()));
  nlohmann::json j = to_json(table);
  j["version"] = kLookupFormatVersion + 1;
  EXPECT_THROW(lookup_from_json(j), std::runtime_error);
}

TEST_F(IoTest, LookupCache) {
  EXPECT_EQ(lookup_cache_name(2, 3000), "lut_p2_n3000_k0.01-30.json");
  const KLookupTable a = load_or_build_k_lookup(2, 100, dir_);
  ASSERT_TRUE(fs::exists(dir_ / lookup_cache_name(2, 100)));
  const auto stamp = fs::last_write_time(dir_ / lookup_cache_name(2, 100));
  const KLookupTable b = load_or_build_k_lookup(2, 100, dir_);
  EXPECT_EQ(fs::last_write_time(dir_ / lookup_cache_name(2, 100)), stamp);
  EXPECT_EQ(vec(a.ratio_grid()), vec(b.ratio_grid()));
  // A corrupt cache is rebuilt.
  write_text(dir_ / lookup_cache_name(2, 100), "garbage");
  EXPECT_EQ(vec(load_or_build_k_lookup(2, 100, dir_).ratio_grid()), vec(a.ratio_grid()));
  EXPECT_EQ(vec(load_or_build_k_lookup(2, 100, "").ratio_grid()), vec(a.ratio_grid()));
}

TEST(Scores, InfinitiesRenderAsStrings) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(format_number(inf), "inf");
  EXPECT_EQ(format_number(-inf), "-inf");
  EXPECT_EQ(format_number(1.5), "1.500000");
  SeparationScores s;
  s.sources.push_back({0, 1, inf, inf, 12.25});
  s.sources.push_back({1, 0, -inf, -inf, -inf});
  EXPECT_EQ(scores_csv(s), "source,SDR,SIR,SAR\n1,inf,inf,12.250000\n2,-inf,-inf,-inf\n");
  const nlohmann::json j = to_json(s);
  EXPECT_EQ(j.dump().find("null"), std::string::npos);
  EXPECT_NE(j.dump().find("\"inf\""), std::string::npos);
  // The mean of +inf and -inf is undefined.
  EXPECT_EQ(j["mean_SDR"], "nan");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

}  // namespace
}  // namespace dldsep
