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

#include "dldsep/mdct.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace dldsep {

namespace {

// Basis tables are large (N^2/2 doubles) and reused across channels and
// calls, so they are cached per frame length.
std::shared_ptr<const std::vector<double>> basis_for(std::size_t N) {
  static std::mutex mutex;
  static std::map<std::size_t, std::weak_ptr<const std::vector<double>>> cache;
  std::lock_guard lock(mutex);
  if (auto hit = cache[N].lock()) return hit;
  const std::size_t M = N / 2;
  auto table = std::make_shared<std::vector<double>>(M * N);
  const double scale = std::sqrt(2.0 / static_cast<double>(M));
  for (std::size_t k = 0; k < M; ++k) {
    for (std::size_t n = 0; n < N; ++n) {
      (*table)[k * N + n] =
          scale * std::cos(std::numbers::pi / M * (n + 0.5 + 0.5 * M) * (k + 0.5));
    }
  }
  cache[N] = table;
  return table;
}

}  // namespace

void MixtureSignals::validate() const {
  if (channels.empty()) throw std::invalid_argument("signals: no channels");
  if (sample_rate <= 0) throw std::invalid_argument("signals: bad sample rate");
  for (const auto& ch : channels) {
    if (ch.size() != channels.front().size()) {
      throw std::invalid_argument("signals: channels differ in length");
    }
    for (double v : ch) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("signals: non-finite sample");
      }
    }
  }
}

Mdct::Mdct(std::size_t frame_length) : frame_length_(frame_length) {
  if (frame_length_ < 2 || frame_length_ % 2 != 0) {
    throw std::invalid_argument("Mdct: frame length must be even and >= 2");
  }
  window_.resize(frame_length_);
  for (std::size_t n = 0; n < frame_length_; ++n) {
    window_[n] = std::sin(std::numbers::pi * (n + 0.5) / frame_length_);
  }
  basis_ = basis_for(frame_length_);
}

std::size_t Mdct::frame_count(std::size_t signal_length) const {
  const std::size_t M = hop();
  return (signal_length + M - 1) / M + 1;
}

std::vector<double> Mdct::forward(std::span<const double> signal) const {
  const std::size_t N = frame_length_;
  const std::size_t M = hop();
  const std::size_t frames = frame_count(signal.size());
  std::vector<double> padded((frames + 1) * M, 0.0);
  std::copy(signal.begin(), signal.end(), padded.begin() + M);

  std::vector<double> out(frames * M);
  std::vector<double> windowed(N);
  const std::vector<double>& basis = *basis_;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < N; ++n) {
      windowed[n] = window_[n] * padded[t * M + n];
    }
    for (std::size_t k = 0; k < M; ++k) {
      const double* row = basis.data() + k * N;
      double sum = 0.0;
      for (std::size_t n = 0; n < N; ++n) sum += row[n] * windowed[n];
      out[t * M + k] = sum;
    }
  }
  return out;
}

std::vector<double> Mdct::inverse(std::span<const double> coefficients,
                                  std::size_t signal_length) const {
  const std::size_t N = frame_length_;
  const std::size_t M = hop();
  const std::size_t frames = frame_count(signal_length);
  if (coefficients.size() != frames * M) {
    throw std::invalid_argument("Mdct::inverse: coefficient count mismatch");
  }
  std::vector<double> padded((frames + 1) * M, 0.0);
  std::vector<double> frame(N);
  const std::vector<double>& basis = *basis_;
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    for (std::size_t k = 0; k < M; ++k) {
      const double c = coefficients[t * M + k];
      if (c == 0.0) continue;
      const double* row = basis.data() + k * N;
      for (std::size_t n = 0; n < N; ++n) frame[n] += c * row[n];
    }
    for (std::size_t n = 0; n < N; ++n) {
      padded[t * M + n] += window_[n] * frame[n];
    }
  }
  return {padded.begin() + M, padded.begin() + M + signal_length};
}

MdctFrames MdctFrames::zeros_like(std::size_t channel_count) const {
  MdctFrames out = *this;
  out.channels = channel_count;
  out.coefficients.assign(channel_count * points(), 0.0);
  return out;
}

MdctFrames mdct_forward(const MixtureSignals& signals,
                        std::size_t frame_length) {
  signals.validate();
  if (frame_length > signals.length()) {
    throw std::invalid_argument("mdct_forward: frame longer than signal");
  }
  const Mdct mdct(frame_length);
  MdctFrames out;
  out.channels = signals.channel_count();
  out.frames = mdct.frame_count(signals.length());
  out.bins = mdct.hop();
  out.frame_length = frame_length;
  out.signal_length = signals.length();
  out.sample_rate = signals.sample_rate;
  out.coefficients.reserve(out.channels * out.points());
  for (const auto& ch : signals.channels) {
    const std::vector<double> c = mdct.forward(ch);
    out.coefficients.insert(out.coefficients.end(), c.begin(), c.end());
  }
  return out;
}

MixtureSignals mdct_inverse(const MdctFrames& frames) {
  const Mdct mdct(frames.frame_length);
  MixtureSignals out;
  out.sample_rate = frames.sample_rate;
  for (std::size_t c = 0; c < frames.channels; ++c) {
    out.channels.push_back(mdct.inverse(frames.channel(c), frames.signal_length));
  }
  return out;
}

std::size_t frame_length_for(double frame_ms, int sample_rate) {
  if (!(frame_ms > 0.0) || sample_rate <= 0) {
    throw std::invalid_argument("frame_length_for: bad arguments");
  }
  const double samples = frame_ms * 1e-3 * sample_rate;
  const auto half = static_cast<std::size_t>(std::llround(samples / 2.0));
  return std::max<std::size_t>(2, 2 * half);
}

}  // namespace dldsep
