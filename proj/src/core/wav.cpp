// Copyright 2026 The arraykit Authors
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

#include "arraykit/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace arraykit {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

double decode(const unsigned char* p, std::uint16_t format, std::uint16_t bits) {
  if (format == kFormatFloat) {
    if (bits == 32) {
      float f;
      std::uint32_t u = le32(p);
      std::memcpy(&f, &u, 4);
      return f;
    }
    std::uint64_t u = static_cast<std::uint64_t>(le32(p)) |
                      (static_cast<std::uint64_t>(le32(p + 4)) << 32);
    double d;
    std::memcpy(&d, &u, 8);
    return d;
  }
  switch (bits) {
    case 8: return (static_cast<double>(p[0]) - 128.0) / 128.0;
    case 16: return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v |= ~0xFFFFFF;
      return v / 8388608.0;
    }
    case 32: return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
    default: break;
  }
  fail(ErrorCode::kIoError, "unsupported PCM bit depth");
}

}  // namespace

MultiChannelSignal read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(b, "RIFF", 4) != 0 || std::memcmp(b + 8, "WAVE", 4) != 0)
    fail(ErrorCode::kIoError, path + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = b + pos;
    const std::size_t len = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0 && len >= 16 && body + len <= bytes.size()) {
      format = le16(b + body);
      channels = le16(b + body + 2);
      rate = le32(b + body + 4);
      bits = le16(b + body + 14);
      if (format == kFormatExtensible && len >= 40) format = le16(b + body + 24);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = b + body;
      data_len = std::min(len, bytes.size() - body);
    }
    pos = body + len + (len & 1);
  }
  if (!data || channels == 0 || rate == 0)
    fail(ErrorCode::kIoError, path + ": missing fmt or data chunk");
  if (format != kFormatPcm && format != kFormatFloat)
    fail(ErrorCode::kIoError, path + ": unsupported WAVE format tag");

  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * channels);
  std::vector<std::vector<double>> out(channels, std::vector<double>(frames));
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t c = 0; c < channels; ++c)
      out[c][f] = decode(data + (f * channels + c) * width, format, bits);
  return MultiChannelSignal(std::move(out), static_cast<double>(rate));
}

void write_wav(const std::string& path, const MultiChannelSignal& signal, SampleFormat format) {
  const std::uint16_t channels = static_cast<std::uint16_t>(signal.num_channels());
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : format == SampleFormat::kPcm24 ? 24 : 32;
  const std::uint16_t tag = format == SampleFormat::kFloat32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(signal.rate()));
  require(static_cast<double>(rate) == signal.rate(), ErrorCode::kInvalidArgument,
          "WAV files need an integer sample rate");
  const std::size_t width = bits / 8;
  const std::size_t frames = signal.length();
  const std::size_t data_len = frames * channels * width;

  std::string s;
  s.reserve(44 + data_len);
  s += "RIFF";
  put32(s, static_cast<std::uint32_t>(36 + data_len));
  s += "WAVEfmt ";
  put32(s, 16);
  put16(s, tag);
  put16(s, channels);
  put32(s, rate);
  put32(s, static_cast<std::uint32_t>(rate * channels * width));
  put16(s, static_cast<std::uint16_t>(channels * width));
  put16(s, bits);
  s += "data";
  put32(s, static_cast<std::uint32_t>(data_len));
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = signal.channel_view(c)[f];
      if (format == SampleFormat::kFloat32) {
        const float x = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &x, 4);
        put32(s, u);
      } else if (format == SampleFormat::kPcm16) {
        const long q = std::lround(std::clamp(v, -1.0, 1.0) * 32768.0);
        put16(s, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
      } else {
        const long q = std::lround(std::clamp(v, -1.0, 1.0) * 8388608.0);
        const std::uint32_t u = static_cast<std::uint32_t>(std::clamp(q, -8388608L, 8388607L));
        s.push_back(static_cast<char>(u & 0xFF));
        s.push_back(static_cast<char>((u >> 8) & 0xFF));
        s.push_back(static_cast<char>((u >> 16) & 0xFF));
      }
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!out) fail(ErrorCode::kIoError, "short write to " + path);
}

void write_wav(const std::string& path, const MonoSignal& signal, SampleFormat format) {
  write_wav(path, MultiChannelSignal(signal), format);
}

SampleFormat parse_sample_format(const std::string& name) {
  if (name == "pcm16") return SampleFormat::kPcm16;
  if (name == "pcm24") return SampleFormat::kPcm24;
  if (name == "float32") return SampleFormat::kFloat32;
  fail(ErrorCode::kInvalidArgument, "unknown sample format '" + name + "'");
}

}  // namespace arraykit
