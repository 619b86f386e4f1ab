// Copyright 2026 The emonet-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace emonet {

inline constexpr int kSampleRate = 16000;

struct Waveform {
  std::vector<float> samples;  // mono, amplitude in [-1, 1]
  int sample_rate = kSampleRate;
  int source_rate = kSampleRate;
  int source_channels = 1;
  bool resampled = false;

  double seconds() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
};

/// Decodes a RIFF/WAVE 16-bit PCM byte image: channels are averaged to mono,
/// samples scaled by 1/32768, and non-16 kHz input linearly resampled.
Waveform decode_wav(std::span<const std::uint8_t> bytes);
Waveform read_wav(const std::filesystem::path& path);

/// Reads only the header to compute the duration in seconds.
double wav_duration(const std::filesystem::path& path);

/// Encodes mono float samples as 16-bit PCM (clipped to [-1, 1)).
std::vector<std::uint8_t> encode_wav(std::span<const float> samples, int sample_rate);
void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate = kSampleRate);

/// Linear interpolation resampler.
std::vector<float> resample_linear(std::span<const float> in, int from_rate, int to_rate);

}  // namespace emonet
