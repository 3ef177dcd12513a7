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

#include "adformer/dft.hpp"

#include <cmath>

namespace adformer {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative in-place radix-2 Cooley-Tukey; sign = -1 forward, +1 inverse.
void fft_pow2(std::vector<std::complex<double>>& a, double sign) {
  std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = sign * kTwoPi / static_cast<double>(len);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> t = a[i + j + len / 2] * w;
        a[i + j] = u + t;
        a[i + j + len / 2] = u - t;
        w *= wlen;
      }
    }
  }
}

std::vector<std::complex<double>> transform(const std::vector<std::complex<double>>& x,
                                            double sign) {
  std::size_t n = x.size();
  if (n == 0) return {};
  if (is_pow2(n)) {
    std::vector<std::complex<double>> a = x;
    fft_pow2(a, sign);
    return a;
  }
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      double ang = sign * kTwoPi * static_cast<double>(k) * static_cast<double>(t) /
                   static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
  return transform(x, -1.0);
}

std::vector<std::complex<double>> dft(const std::vector<double>& x) {
  std::vector<std::complex<double>> cx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) cx[i] = std::complex<double>(x[i], 0.0);
  return dft(cx);
}

std::vector<std::complex<double>> idft(const std::vector<std::complex<double>>& spectrum) {
  std::vector<std::complex<double>> out = transform(spectrum, 1.0);
  double inv = out.empty() ? 0.0 : 1.0 / static_cast<double>(out.size());
  for (auto& v : out) v *= inv;
  return out;
}

std::vector<double> idft_real(const std::vector<std::complex<double>>& spectrum,
                              double* max_imag) {
  std::vector<std::complex<double>> full = idft(spectrum);
  std::vector<double> out(full.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    out[i] = full[i].real();
    worst = std::max(worst, std::abs(full[i].imag()));
  }
  if (max_imag) *max_imag = worst;
  return out;
}

std::size_t dominant_bin(const std::vector<double>& x) {
  if (x.size() < 3) return 0;
  std::vector<std::complex<double>> spec = dft(x);
  std::size_t best = 1;
  double best_mag = std::abs(spec[1]);
  for (std::size_t k = 2; k <= x.size() / 2; ++k) {
    double m = std::abs(spec[k]);
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  return best;
}

}  // namespace adformer
