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

#ifndef VEMB_DSP_H_
#define VEMB_DSP_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vemb::dsp {

// Real-input DFT of any length (FFTW). Returns n / 2 + 1 bins.
std::vector<std::complex<double>> RealDft(std::span<const double> x);

// Periodic Hann window (the STFT convention).
std::vector<double> HannPeriodic(std::size_t n);
// Symmetric Hann window, zero at both ends when n > 1.
std::vector<double> HannSymmetric(std::size_t n);
std::vector<double> Nuttall(std::size_t n);

// Slaney mel scale: linear below 1 kHz, logarithmic above.
double HzToMel(double hz);
double MelToHz(double mel);

// Index into a signal of length n extended by even reflection about the end
// samples (..., x[2], x[1], x[0], x[1], ...). Valid for any offset.
std::size_t ReflectIndex(std::ptrdiff_t i, std::size_t n);

// Low-pass and keep every second sample.
std::vector<double> DecimateByTwo(std::span<const double> x);

}  // namespace vemb::dsp

#endif  // VEMB_DSP_H_
