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

#include "emonet/frontend.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "emonet/error.hpp"
#include "emonet/random.hpp"

namespace emonet {

static_assert(std::endian::native == std::endian::little,
              "MELS and checkpoint I/O assume a little-endian host");

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::size_t frame_count(std::size_t length, const FrontendConfig& cfg) {
  const auto win = static_cast<std::size_t>(cfg.n_fft);
  const auto hop = static_cast<std::size_t>(cfg.hop);
  if (length < win) return 1;
  return 1 + (length - win) / hop;
}

namespace {

// FFTW planning is not thread-safe; execution with a shared plan is, given
// per-thread buffers.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(n)));
    out_ = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n / 2 + 1)));
    static std::mutex planner_mutex;
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  const fftw_complex* output() const { return out_; }
  void run() { fftw_execute(plan_); }
  int size() const { return n_; }

 private:
  int n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_{};
};

RealFft& thread_fft(int n) {
  thread_local std::map<int, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

std::vector<double> hann(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(n));
  }
  return w;
}

}  // namespace

Matrix stft_power(std::span<const float> samples, const FrontendConfig& cfg) {
  const auto win = static_cast<std::size_t>(cfg.n_fft);
  const auto hop = static_cast<std::size_t>(cfg.hop);
  const std::size_t bins = win / 2 + 1;
  const std::size_t frames = frame_count(samples.size(), cfg);
  static thread_local std::vector<double> window;
  if (window.size() != win) window = hann(cfg.n_fft);

  Matrix power(bins, frames);
  RealFft& fft = thread_fft(cfg.n_fft);
  for (std::size_t t = 0; t < frames; ++t) {
    double* in = fft.input();
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < win; ++i) {
      const double s = start + i < samples.size() ? samples[start + i] : 0.0;
      in[i] = s * window[i];
    }
    fft.run();
    const fftw_complex* out = fft.output();
    for (std::size_t k = 0; k < bins; ++k) {
      power(k, t) = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    }
  }
  return power;
}

std::vector<double> mel_centers(const FrontendConfig& cfg) {
  const double lo = hz_to_mel(cfg.fmin);
  const double hi = hz_to_mel(cfg.fmax);
  const int points = cfg.mel_bands + 2;
  std::vector<double> centers(static_cast<std::size_t>(cfg.mel_bands));
  for (int m = 0; m < cfg.mel_bands; ++m) {
    centers[static_cast<std::size_t>(m)] = mel_to_hz(lo + (hi - lo) * (m + 1) / (points - 1));
  }
  return centers;
}

Matrix mel_filterbank(const FrontendConfig& cfg) {
  const std::size_t bins = static_cast<std::size_t>(cfg.n_fft) / 2 + 1;
  const double lo = hz_to_mel(cfg.fmin);
  const double hi = hz_to_mel(cfg.fmax);
  const int points = cfg.mel_bands + 2;
  std::vector<double> edges(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    edges[static_cast<std::size_t>(i)] = mel_to_hz(lo + (hi - lo) * i / (points - 1));
  }
  Matrix fb(static_cast<std::size_t>(cfg.mel_bands), bins);
  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.n_fft;
  for (std::size_t m = 0; m < fb.rows; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      fb(m, k) = w;
    }
  }
  return fb;
}

MelSpectrogram log_mel(std::span<const float> samples, const FrontendConfig& cfg) {
  static thread_local FrontendConfig cached_cfg;
  static thread_local Matrix fb;
  if (fb.rows == 0 || !(cached_cfg == cfg)) {
    fb = mel_filterbank(cfg);
    cached_cfg = cfg;
  }
  const Matrix power = stft_power(samples, cfg);
  MelSpectrogram spec;
  spec.bands = fb.rows;
  spec.frames = power.cols;
  spec.values.resize(spec.bands * spec.frames);
  const double log_floor = std::log(cfg.log_floor);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t m = 0; m < fb.rows; ++m) {
      double acc = 0.0;
      for (std::size_t k = 0; k < fb.cols; ++k) acc += fb(m, k) * power(k, t);
      const double v = acc > cfg.log_floor ? std::log(acc) : log_floor;
      spec.values[t * spec.bands + m] = static_cast<float>(v);
    }
  }
  return spec;
}

std::vector<float> crop_random(std::span<const float> samples, std::uint64_t seed,
                               const FrontendConfig& cfg) {
  const std::size_t limit = cfg.max_samples();
  if (samples.size() <= limit) return {samples.begin(), samples.end()};
  Rng rng(derive_seed(seed, "crop"));
  const std::size_t offset = uniform_index(rng, samples.size() - limit + 1);
  return {samples.begin() + static_cast<std::ptrdiff_t>(offset),
          samples.begin() + static_cast<std::ptrdiff_t>(offset + limit)};
}

std::vector<float> crop_center(std::span<const float> samples, const FrontendConfig& cfg) {
  const std::size_t limit = cfg.max_samples();
  if (samples.size() <= limit) return {samples.begin(), samples.end()};
  const std::size_t offset = (samples.size() - limit) / 2;
  return {samples.begin() + static_cast<std::ptrdiff_t>(offset),
          samples.begin() + static_cast<std::ptrdiff_t>(offset + limit)};
}

PaddedBatch pad_batch(const std::vector<MelSpectrogram>& specs) {
  if (specs.empty()) fail(ErrorKind::EmptyBatch, "pad_batch called with no spectrograms");
  const std::size_t bands = specs.front().bands;
  std::size_t t_max = 0;
  for (const auto& s : specs) {
    if (s.bands != bands) fail(ErrorKind::ShapeMismatch, "mixed band counts in batch");
    t_max = std::max(t_max, s.frames);
  }
  PaddedBatch batch;
  batch.input = Tensor<float>({specs.size(), bands, t_max, 1});
  for (std::size_t b = 0; b < specs.size(); ++b) {
    const auto& s = specs[b];
    batch.valid_frames.push_back(s.frames);
    for (std::size_t m = 0; m < bands; ++m) {
      for (std::size_t t = 0; t < s.frames; ++t) batch.input.at4(b, m, t, 0) = s.at(m, t);
    }
  }
  return batch;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.write(buf, 4);
}

std::uint32_t get_u32(std::istream& in) {
  char buf[4];
  in.read(buf, 4);
  if (!in) fail(ErrorKind::IoError, "truncated MELS header");
  std::uint32_t v;
  std::memcpy(&v, buf, 4);
  return v;
}

}  // namespace

void write_mels(std::ostream& out, const MelSpectrogram& spec) {
  out.write("MELS", 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(spec.bands));
  put_u32(out, static_cast<std::uint32_t>(spec.frames));
  out.write(reinterpret_cast<const char*>(spec.values.data()),
            static_cast<std::streamsize>(spec.values.size() * sizeof(float)));
}

MelSpectrogram read_mels(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "MELS", 4) != 0) fail(ErrorKind::IoError, "bad MELS magic");
  if (get_u32(in) != 1) fail(ErrorKind::VersionMismatch, "unsupported MELS version");
  MelSpectrogram spec;
  spec.bands = get_u32(in);
  spec.frames = get_u32(in);
  spec.values.resize(spec.bands * spec.frames);
  in.read(reinterpret_cast<char*>(spec.values.data()),
          static_cast<std::streamsize>(spec.values.size() * sizeof(float)));
  if (!in) fail(ErrorKind::IoError, "truncated MELS payload");
  return spec;
}

void save_mels(const std::filesystem::path& path, const MelSpectrogram& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  write_mels(out, spec);
}

MelSpectrogram load_mels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  return read_mels(in);
}

}  // namespace emonet
