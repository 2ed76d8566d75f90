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

#pragma once

// Independent reference implementations used as test oracles. Everything here
// is written the slow, obvious way and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace oracle {

constexpr double kPi = 3.14159265358979323846;

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sigma);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

inline std::vector<double> direct_convolution(const std::vector<double>& x,
                                              const std::vector<double>& h) {
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += x[i] * h[j];
  return y;
}

inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * t) / static_cast<double>(n));
    out[k] = acc;
  }
  return out;
}

inline double rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

// 10 log10(|a - b|^2 / |b|^2) over the common length.
inline double residual_db(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double e = 0.0, r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e += (a[i] - b[i]) * (a[i] - b[i]);
    r += b[i] * b[i];
  }
  return 10.0 * std::log10(std::max(e, 1e-300) / std::max(r, 1e-300));
}

// Textbook SI-SDR: project the estimate on the reference, compare energies.
inline double si_sdr_db(const std::vector<double>& est, const std::vector<double>& ref) {
  const std::size_t n = std::min(est.size(), ref.size());
  double er = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    er += est[i] * ref[i];
    rr += ref[i] * ref[i];
  }
  const double a = er / rr;
  double t = 0.0, e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = a * ref[i];
    t += target * target;
    e += (est[i] - target) * (est[i] - target);
  }
  return 10.0 * std::log10(t / e);
}

// Frequency from rising zero crossings with linear interpolation.
inline double zero_crossing_frequency(const std::vector<double>& x, double rate) {
  std::vector<double> crossings;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i - 1] < 0.0 && x[i] >= 0.0)
      crossings.push_back(static_cast<double>(i - 1) + x[i - 1] / (x[i - 1] - x[i]));
  if (crossings.size() < 2) return 0.0;
  return rate * static_cast<double>(crossings.size() - 1) / (crossings.back() - crossings.front());
}

// Asymptotic Kolmogorov survival function with the Stephens small-sample
// correction; p-value of the one-sample KS statistic d over n draws.
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

// KS statistic of samples against the uniform distribution on [lo, hi].
inline double ks_uniform_statistic(std::vector<double> x, double lo, double hi) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::clamp((x[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double wrap_deg(double a) {
  a = std::fmod(a, 360.0);
  return a < 0.0 ? a + 360.0 : a;
}

inline double angle_diff_deg(double a, double b) {
  const double d = wrap_deg(a - b);
  return std::min(d, 360.0 - d);
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto p = std::filesystem::temp_directory_path() /
           ("arraykit_" + tag + "_" + std::to_string(rng() % 1000000000ULL));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
