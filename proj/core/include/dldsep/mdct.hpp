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

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace dldsep {

/// Equal-length PCM channels.
struct MixtureSignals {
  std::vector<std::vector<double>> channels;
  int sample_rate = 16000;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t length() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  /// Throws std::invalid_argument on no channels, unequal lengths,
  /// non-finite samples or a non-positive sample rate.
  void validate() const;
};

/// Sine-windowed MDCT with 50% overlap. Frame length N (even) gives N/2
/// bins per frame and hop N/2.
///
/// The signal is padded with N/2 zeros in front and zero-filled at the end
/// to whole hops plus N/2, so every input sample is covered by two frames
/// and time-domain aliasing cancels on the full original range.
class Mdct {
 public:
  explicit Mdct(std::size_t frame_length);

  std::size_t frame_length() const { return frame_length_; }
  std::size_t hop() const { return frame_length_ / 2; }
  std::size_t frame_count(std::size_t signal_length) const;

  /// frames x bins coefficients, frame-major.
  std::vector<double> forward(std::span<const double> signal) const;
  std::vector<double> inverse(std::span<const double> coefficients,
                              std::size_t signal_length) const;

 private:
  std::size_t frame_length_;
  std::vector<double> window_;
  std::shared_ptr<const std::vector<double>> basis_;  // bins x frame_length
};

/// Per-channel MDCT coefficients, indexed [channel][frame][bin].
struct MdctFrames {
  std::size_t channels = 0;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t frame_length = 0;
  std::size_t signal_length = 0;
  int sample_rate = 0;
  std::vector<double> coefficients;

  /// Time-frequency points per channel.
  std::size_t points() const { return frames * bins; }
  double& at(std::size_t c, std::size_t tf) {
    return coefficients[c * points() + tf];
  }
  double at(std::size_t c, std::size_t tf) const {
    return coefficients[c * points() + tf];
  }
  std::span<const double> channel(std::size_t c) const {
    return {coefficients.data() + c * points(), points()};
  }
  /// Same layout, all coefficients zero.
  MdctFrames zeros_like(std::size_t channel_count) const;
};

/// Throws std::invalid_argument for an odd or zero frame length, or one
/// longer than the signal.
MdctFrames mdct_forward(const MixtureSignals& signals,
                        std::size_t frame_length);
MixtureSignals mdct_inverse(const MdctFrames& frames);

/// Nearest even sample count to frame_ms at sample_rate (32 ms at 16 kHz
/// gives 512).
std::size_t frame_length_for(double frame_ms, int sample_rate);

}  // namespace dldsep
