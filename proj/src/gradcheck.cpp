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

#include "adformer/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "adformer/errors.hpp"

namespace adformer {

namespace {

double eval_scalar(const ScalarFn& f, std::vector<Tensor>& params, Tape* tape) {
  Tensor v = f(params, tape);
  if (v.size() != 1) {
    throw DimensionError("check_gradients: objective must be scalar, got " + v.shape_str());
  }
  double x = v.flat(0);
  if (!std::isfinite(x)) throw NumericError("check_gradients: objective is not finite");
  return x;
}

}  // namespace

GradCheckReport check_gradients(const ScalarFn& f, std::vector<Tensor>& params, double eps,
                                std::int64_t max_coords, std::uint64_t sample_seed) {
  if (eps < 1e-7 || eps > 1e-3) {
    throw ConfigError("check_gradients: eps must be in [1e-7, 1e-3]");
  }
  for (Tensor& p : params) {
    p.set_requires_grad(true);
    p.zero_grad();
  }

  Tape tape;
  {
    Tensor loss = f(params, &tape);
    if (loss.size() != 1) {
      throw DimensionError("check_gradients: objective must be scalar, got " + loss.shape_str());
    }
    if (!std::isfinite(loss.flat(0))) {
      throw NumericError("check_gradients: objective is not finite");
    }
    tape.backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const Tensor& p : params) analytic.push_back(p.grad());

  // Enumerate (param, coord) pairs, optionally subsampled.
  std::vector<std::pair<std::size_t, std::int64_t>> coords;
  std::int64_t total = 0;
  for (const Tensor& p : params) total += p.size();
  if (max_coords >= 0 && total > max_coords) {
    Rng rng(sample_seed);
    std::vector<std::int64_t> picks = rng.sample_without_replacement(total, max_coords);
    std::sort(picks.begin(), picks.end());
    std::size_t pi = 0;
    std::int64_t base = 0;
    for (std::int64_t flat : picks) {
      while (flat >= base + params[pi].size()) {
        base += params[pi].size();
        ++pi;
      }
      coords.emplace_back(pi, flat - base);
    }
  } else {
    for (std::size_t pi = 0; pi < params.size(); ++pi)
      for (std::int64_t i = 0; i < params[pi].size(); ++i) coords.emplace_back(pi, i);
  }

  GradCheckReport report;
  for (auto [pi, i] : coords) {
    double saved = params[pi].flat(i);
    params[pi].flat(i) = saved + eps;
    double fp = eval_scalar(f, params, nullptr);
    params[pi].flat(i) = saved - eps;
    double fm = eval_scalar(f, params, nullptr);
    params[pi].flat(i) = saved;

    double numeric = (fp - fm) / (2.0 * eps);
    double a = analytic[pi][static_cast<std::size_t>(i)];
    double rel = std::abs(a - numeric) / std::max({1e-8, std::abs(a), std::abs(numeric)});
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_param = pi;
      report.worst_coord = i;
      report.worst_analytic = a;
      report.worst_numeric = numeric;
    }
    ++report.coords_checked;
  }
  return report;
}

}  // namespace adformer
