// Copyright 2026 The adformer-lab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <vector>

namespace adformer {

// Forward discrete Fourier transform, X[k] = sum_n x[n] e^{-2 pi i k n / S}.
// Radix-2 for power-of-two lengths, direct evaluation otherwise.
std::vector<std::complex<double>> dft(const std::vector<double>& x);
std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x);

// Inverse transform with 1/S normalization; dft then idft reproduces the
// input within 1e-9 for S <= 1024.
std::vector<std::complex<double>> idft(const std::vector<std::complex<double>>& spectrum);

// Real parts of the inverse transform; max_imag, when given, receives the
// largest absolute imaginary residue.
std::vector<double> idft_real(const std::vector<std::complex<double>>& spectrum,
                              double* max_imag = nullptr);

// Index of the largest-magnitude bin in [1, S/2]; DC excluded. Returns 0 for
// series shorter than 3 samples.
std::size_t dominant_bin(const std::vector<double>& x);

}  // namespace adformer
