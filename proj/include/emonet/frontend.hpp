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
#include <iosfwd>
#include <vector>

#include "emonet/tensor.hpp"
#include "emonet/wav.hpp"

namespace emonet {

/// Log-mel extraction settings. Only the defaults are exercised by the
/// model; they are persisted with checkpoints so a model knows its frontend.
struct FrontendConfig {
  int sample_rate = kSampleRate;
  int n_fft = 512;
  int hop = 256;
  int mel_bands = 64;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;
  double max_seconds = 5.0;

  std::size_t max_samples() const {
    return static_cast<std::size_t>(max_seconds * sample_rate + 0.5);
  }
  bool operator==(const FrontendConfig&) const = default;
};

/// Row-major dense matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// 64 x T log-mel matrix stored frame-major (frames x bands), which is also
/// the MELS file layout.
struct MelSpectrogram {
  std::size_t bands = 64;
  std::size_t frames = 0;
  std::vector<float> values;  // values[frame * bands + band]

  float at(std::size_t band, std::size_t frame) const { return values[frame * bands + band]; }
  bool operator==(const MelSpectrogram&) const = default;
};

struct PaddedBatch {
  Tensor<float> input;  // [B, bands, T_max, 1]
  std::vector<std::size_t> valid_frames;

  std::size_t batch() const { return valid_frames.size(); }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// 1 + floor((length - n_fft) / hop), with inputs shorter than one window
/// counted as one window.
std::size_t frame_count(std::size_t length, const FrontendConfig& cfg = {});

/// Hann-windowed power spectrum |X_k|^2, shape [n_fft/2 + 1, frames].
Matrix stft_power(std::span<const float> samples, const FrontendConfig& cfg = {});

/// Triangular filters with unit peak, centres equally spaced on the HTK mel
/// scale; shape [mel_bands, n_fft/2 + 1].
Matrix mel_filterbank(const FrontendConfig& cfg = {});

/// Filter centre frequencies in Hz.
std::vector<double> mel_centers(const FrontendConfig& cfg = {});

/// ln(max(filterbank * power, floor)).
MelSpectrogram log_mel(std::span<const float> samples, const FrontendConfig& cfg = {});

/// Random contiguous max_samples window when longer, identity otherwise.
std::vector<float> crop_random(std::span<const float> samples, std::uint64_t seed,
                               const FrontendConfig& cfg = {});
/// Centre window used at evaluation time.
std::vector<float> crop_center(std::span<const float> samples, const FrontendConfig& cfg = {});

/// Right-pads along time with zeros to the longest item.
PaddedBatch pad_batch(const std::vector<MelSpectrogram>& specs);

void write_mels(std::ostream& out, const MelSpectrogram& spec);
MelSpectrogram read_mels(std::istream& in);
void save_mels(const std::filesystem::path& path, const MelSpectrogram& spec);
MelSpectrogram load_mels(const std::filesystem::path& path);

}  // namespace emonet
