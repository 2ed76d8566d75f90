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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "arraykit/simulator.hpp"
#include "fft.hpp"

namespace arraykit {

double sinc_coherence_model(double d, double f, double c) {
  const double x = 2.0 * std::numbers::pi * f * d / c;
  return x == 0.0 ? 1.0 : std::sin(x) / x;
}

MultiChannelSignal generate_diffuse_noise(const MonoSignal& source_noise,
                                          const std::vector<Point3>& mics, double duration_s,
                                          const DiffuseNoiseOptions& options) {
  const std::size_t m = mics.size();
  if (m < 2) fail(ErrorCode::kGeometryError, "diffuse noise needs at least two microphones");
  const std::size_t frame = options.frame_length;
  require(frame >= 4 && frame % 2 == 0, ErrorCode::kInvalidArgument, "frame length must be even");
  const double rate = source_noise.rate();
  const auto len = static_cast<std::size_t>(std::llround(duration_s * rate));
  require(len > 0, ErrorCode::kInvalidArgument, "duration must be positive");
  if (source_noise.size() < m * len)
    fail(ErrorCode::kTooShort, "source noise shorter than channels x duration");

  const std::size_t hop = frame / 2;
  const std::size_t bins = frame / 2 + 1;
  // Per-bin principal square root C = V sqrt(L) V^T of Gamma (eigenvalues
  // floored at 1e-8). Unlike a bare eigenvector factor it is unique and varies
  // smoothly across bins, which matters because overlap-add mixes neighbours.
  std::vector<Eigen::MatrixXd> mix(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * rate / static_cast<double>(frame);
    Eigen::MatrixXd gamma(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        gamma(i, j) = sinc_coherence_model(distance(mics[i], mics[j]), f, options.speed_of_sound);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gamma);
    const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(1e-8).cwiseSqrt();
    mix[k] = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  }

  // sqrt-Hann analysis and synthesis at 50% overlap reconstruct exactly.
  std::vector<double> w = hann_window(frame);
  for (double& v : w) v = std::sqrt(v);
  const std::size_t padded = len + 2 * frame;
  const std::size_t frames = (padded - frame) / hop + 1;
  const auto src = source_noise.samples();
  std::vector<std::vector<double>> out(m, std::vector<double>(padded, 0.0));
  detail::RealFft fft(frame);
  std::vector<std::vector<std::complex<double>>> spec(m);
  std::vector<double> buf(frame), time;
  std::vector<std::complex<double>> mixed(bins);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t i = 0; i < frame; ++i) {
        const std::size_t p = start + i;
        // Channel c reads its own disjoint stretch of the source noise.
        const bool inside = p >= frame && p < frame + len;
        buf[i] = inside ? src[c * len + (p - frame)] * w[i] : 0.0;
      }
      fft.forward(buf, spec[c]);
    }
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t k = 0; k < bins; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t q = 0; q < m; ++q) acc += mix[k](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(q)) * spec[q][k];
        mixed[k] = acc;
      }
      fft.inverse(mixed, time);
      for (std::size_t i = 0; i < frame; ++i) out[c][start + i] += time[i] * w[i];
    }
  }
  std::vector<std::vector<double>> cropped(m);
  for (std::size_t c = 0; c < m; ++c)
    cropped[c].assign(out[c].begin() + static_cast<std::ptrdiff_t>(frame),
                      out[c].begin() + static_cast<std::ptrdiff_t>(frame + len));
  return MultiChannelSignal(std::move(cropped), rate);
}

namespace {

CoherenceProfile welch(std::span<const double> a, std::span<const double> b, double rate,
                       const CoherenceOptions& options) {
  const MonoSignal sa(std::vector<double>(a.begin(), a.end()), rate);
  const MonoSignal sb(std::vector<double>(b.begin(), b.end()), rate);
  const Spectrogram xa = stft(sa, options.frame_length, options.hop);
  const Spectrogram xb = stft(sb, options.frame_length, options.hop);
  CoherenceProfile p;
  p.frequencies.resize(xa.bins);
  p.measured.resize(xa.bins);
  for (std::size_t k = 0; k < xa.bins; ++k) {
    std::complex<double> cross = 0.0;
    double pa = 0.0, pb = 0.0;
    for (std::size_t f = 0; f < xa.frames; ++f) {
      const auto u = xa.at(f, k);
      const auto v = xb.at(f, k);
      cross += u * std::conj(v);
      pa += std::norm(u);
      pb += std::norm(v);
    }
    p.frequencies[k] = static_cast<double>(k) * rate / static_cast<double>(options.frame_length);
    p.measured[k] = pa > 0.0 && pb > 0.0 ? cross / std::sqrt(pa * pb) : 0.0;
  }
  if (options.spacing_m) {
    p.model.resize(xa.bins);
    for (std::size_t k = 0; k < xa.bins; ++k)
      p.model[k] = sinc_coherence_model(*options.spacing_m, p.frequencies[k], options.speed_of_sound);
  }
  return p;
}

void check_pair(const MultiChannelSignal& noise, std::size_t i, std::size_t j) {
  require(i < noise.num_channels() && j < noise.num_channels(), ErrorCode::kInvalidArgument,
          "channel index out of range");
}

}  // namespace

CoherenceProfile estimate_spatial_coherence(const MultiChannelSignal& noise, std::size_t i,
                                            std::size_t j, const CoherenceOptions& options) {
  check_pair(noise, i, j);
  if (noise.duration() < 1.0 || noise.length() < options.frame_length)
    fail(ErrorCode::kTooShort, "coherence estimation needs at least one second of signal");
  CoherenceProfile p = welch(noise.channel_view(i), noise.channel_view(j), noise.rate(), options);
  p.start_s = 0.0;
  p.end_s = noise.duration();
  return p;
}

std::vector<CoherenceProfile> estimate_spatial_coherence_windows(
    const MultiChannelSignal& noise, std::size_t i, std::size_t j, double window_s,
    const CoherenceOptions& options) {
  check_pair(noise, i, j);
  require(window_s > 0.0, ErrorCode::kInvalidArgument, "window must be positive");
  const auto win = static_cast<std::size_t>(std::llround(window_s * noise.rate()));
  if (noise.duration() < 1.0 || noise.length() < win || win < options.frame_length)
    fail(ErrorCode::kTooShort, "signal shorter than one analysis window");
  std::vector<CoherenceProfile> out;
  for (std::size_t s = 0; s + win <= noise.length(); s += win) {
    CoherenceProfile p = welch(noise.channel_view(i).subspan(s, win),
                               noise.channel_view(j).subspan(s, win), noise.rate(), options);
    p.start_s = static_cast<double>(s) / noise.rate();
    p.end_s = static_cast<double>(s + win) / noise.rate();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace arraykit
