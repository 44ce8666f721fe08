// Copyright (c) 2026 The vemb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vemb/dsp.h"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "vemb/error.h"

namespace vemb::dsp {

namespace {

// FFTW planning is not thread-safe; execution on new arrays is.
fftw_plan PlanFor(int n) {
  static std::mutex mu;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  std::vector<double> in(n);
  std::vector<fftw_complex> out(n / 2 + 1);
  fftw_plan p = fftw_plan_dft_r2c_1d(n, in.data(), out.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  Check(p != nullptr, ErrorCode::kInvalidArgument, "FFTW planning failed");
  plans.emplace(n, p);
  return p;
}

std::vector<double> HalfbandTaps() {
  // Kaiser-windowed sinc, cutoff at a quarter of the input rate.
  constexpr int kTaps = 65;
  constexpr double kBeta = 8.6;
  std::vector<double> h(kTaps);
  const double i0 = std::cyl_bessel_i(0.0, kBeta);
  const int mid = kTaps / 2;
  double sum = 0.0;
  for (int j = 0; j < kTaps; ++j) {
    const double t = j - mid;
    const double x = t / (mid + 1);
    const double sinc =
        t == 0 ? 0.5 : std::sin(std::numbers::pi * 0.5 * t) / (std::numbers::pi * t);
    h[j] = sinc * std::cyl_bessel_i(0.0, kBeta * std::sqrt(1.0 - x * x)) / i0;
    sum += h[j];
  }
  for (double& v : h) v /= sum;  // unit DC gain
  return h;
}

}  // namespace

std::vector<std::complex<double>> RealDft(std::span<const double> x) {
  Check(!x.empty(), ErrorCode::kInvalidArgument, "DFT of empty input");
  const int n = static_cast<int>(x.size());
  fftw_plan plan = PlanFor(n);
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(plan, in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> HannPeriodic(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }
  return w;
}

std::vector<double> HannSymmetric(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  }
  return w;
}

std::vector<double> Nuttall(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (static_cast<double>(i + 1) - (n + 1) / 2.0) / (n + 1);
    w[i] = 0.355768 + 0.487396 * std::cos(2 * std::numbers::pi * t) +
           0.144232 * std::cos(4 * std::numbers::pi * t) +
           0.012604 * std::cos(6 * std::numbers::pi * t);
  }
  return w;
}

namespace {
constexpr double kLinearStep = 200.0 / 3.0;
constexpr double kBreakHz = 1000.0;
constexpr double kBreakMel = kBreakHz / kLinearStep;
const double kLogStep = std::log(6.4) / 27.0;
}  // namespace

double HzToMel(double hz) {
  if (hz < kBreakHz) return hz / kLinearStep;
  return kBreakMel + std::log(hz / kBreakHz) / kLogStep;
}

double MelToHz(double mel) {
  if (mel < kBreakMel) return mel * kLinearStep;
  return kBreakHz * std::exp(kLogStep * (mel - kBreakMel));
}

std::size_t ReflectIndex(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t r = i % period;
  if (r < 0) r += period;
  if (r >= static_cast<std::ptrdiff_t>(n)) r = period - r;
  return static_cast<std::size_t>(r);
}

std::vector<double> DecimateByTwo(std::span<const double> x) {
  static const std::vector<double> taps = HalfbandTaps();
  const auto mid = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> y((x.size() + 1) / 2);
  for (std::size_t o = 0; o < y.size(); ++o) {
    const std::ptrdiff_t c = 2 * static_cast<std::ptrdiff_t>(o);
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(taps.size()); ++j) {
      const std::ptrdiff_t k = c + j - mid;
      if (k >= 0 && k < n) acc += taps[j] * x[k];
    }
    y[o] = acc;
  }
  return y;
}

}  // namespace vemb::dsp
