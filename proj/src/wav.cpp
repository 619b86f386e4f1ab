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

#include "emonet/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "emonet/error.hpp"

namespace emonet {

namespace {

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

struct WavLayout {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
};

WavLayout parse_layout(std::span<const std::uint8_t> bytes, bool header_only) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(ErrorKind::NotWav, "missing RIFF/WAVE signature");
  }
  WavLayout w;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size()) fail(ErrorKind::NotWav, "truncated fmt chunk");
      w.format = read_u16(bytes.data() + body);
      w.channels = read_u16(bytes.data() + body + 2);
      w.rate = read_u32(bytes.data() + body + 4);
      w.bits = read_u16(bytes.data() + body + 14);
      if (w.format == 0xFFFE && size >= 40) {
        // WAVE_FORMAT_EXTENSIBLE: the subformat GUID starts with the tag.
        w.format = read_u16(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) fail(ErrorKind::NotWav, "data chunk before fmt chunk");
      w.data_offset = body;
      w.data_size = header_only ? size : std::min<std::size_t>(size, bytes.size() - body);
      break;
    }
    pos = body + size + (size & 1U);
  }
  if (!have_fmt || w.data_offset == 0) fail(ErrorKind::NotWav, "missing fmt or data chunk");
  if (w.format != 1 || w.bits != 16) {
    fail(ErrorKind::UnsupportedEncoding, "only 16-bit PCM is supported (format " +
                                             std::to_string(w.format) + ", " +
                                             std::to_string(w.bits) + " bits)");
  }
  if (w.channels == 0 || w.rate == 0) fail(ErrorKind::NotWav, "invalid channel count or rate");
  return w;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path, std::size_t limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes;
  if (limit == 0) {
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else {
    bytes.resize(limit);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(limit));
    bytes.resize(static_cast<std::size_t>(in.gcount()));
  }
  return bytes;
}

}  // namespace

std::vector<float> resample_linear(std::span<const float> in, int from_rate, int to_rate) {
  if (in.empty() || from_rate == to_rate) return {in.begin(), in.end()};
  const double ratio = static_cast<double>(from_rate) / static_cast<double>(to_rate);
  const auto n_out = static_cast<std::size_t>(std::max<long long>(1, std::llround(static_cast<double>(in.size()) / ratio)));
  std::vector<float> out(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto left = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(left);
    const double a = in[left];
    const double b = left + 1 < in.size() ? in[left + 1] : a;
    out[i] = static_cast<float>(a + (b - a) * frac);
  }
  return out;
}

Waveform decode_wav(std::span<const std::uint8_t> bytes) {
  const WavLayout layout = parse_layout(bytes, false);
  const std::size_t frame_bytes = 2U * layout.channels;
  const std::size_t frames = layout.data_size / frame_bytes;
  if (frames == 0) fail(ErrorKind::EmptyAudio, "no audio frames");

  Waveform w;
  w.source_rate = static_cast<int>(layout.rate);
  w.source_channels = layout.channels;
  std::vector<float> mono(frames);
  const std::uint8_t* data = bytes.data() + layout.data_offset;
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < layout.channels; ++c) {
      const auto v = static_cast<std::int16_t>(read_u16(data + f * frame_bytes + 2 * c));
      acc += static_cast<double>(v) / 32768.0;
    }
    mono[f] = static_cast<float>(acc / layout.channels);
  }
  if (w.source_rate != kSampleRate) {
    w.samples = resample_linear(mono, w.source_rate, kSampleRate);
    w.resampled = true;
  } else {
    w.samples = std::move(mono);
  }
  w.sample_rate = kSampleRate;
  return w;
}

Waveform read_wav(const std::filesystem::path& path) {
  const auto bytes = slurp(path, 0);
  try {
    return decode_wav(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

double wav_duration(const std::filesystem::path& path) {
  const auto bytes = slurp(path, 4096);
  const WavLayout layout = parse_layout(bytes, true);
  const double frames = static_cast<double>(layout.data_size / (2U * layout.channels));
  return frames / static_cast<double>(layout.rate);
}

std::vector<std::uint8_t> encode_wav(std::span<const float> samples, int sample_rate) {
  std::vector<std::uint8_t> out;
  const auto data_size = static_cast<std::uint32_t>(samples.size() * 2);
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);
  for (float s : samples) {
    const double scaled = std::round(static_cast<double>(s) * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate) {
  const auto bytes = encode_wav(samples, sample_rate);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::IoError, "short write to " + path.string());
}

}  // namespace emonet
