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

#include <cstdint>
#include <functional>
#include <vector>

#include "adformer/tensor.hpp"

namespace adformer {

// Scalar objective over a parameter list. The function must build the value
// through tape-recorded primitives when a tape is given so reverse mode can
// run, and evaluate plainly when tape == nullptr.
using ScalarFn = std::function<Tensor(std::vector<Tensor>& params, Tape* tape)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::int64_t coords_checked = 0;
  // Location and values of the worst coordinate.
  std::size_t worst_param = 0;
  std::int64_t worst_coord = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares the reverse-mode gradient of f at `params` against central finite
// differences (f(t+eps e_i) - f(t-eps e_i)) / 2 eps, coordinate by
// coordinate. Relative error uses an absolute floor of 1e-8:
// |a - n| / max(1e-8, |a|, |n|). When max_coords >= 0 and the parameter count
// exceeds it, a deterministic random subset of coordinates is checked.
// eps must lie in [1e-7, 1e-3]. Throws NumericError when f is non-finite.
GradCheckReport check_gradients(const ScalarFn& f, std::vector<Tensor>& params, double eps,
                                std::int64_t max_coords = -1, std::uint64_t sample_seed = 1234);

}  // namespace adformer
