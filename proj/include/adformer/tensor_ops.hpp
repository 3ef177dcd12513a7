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
#include <vector>

#include "adformer/tensor.hpp"

namespace adformer {

// Differentiable primitives. Every op records its adjoint on `tape` when a
// tape is given and any input requires grad; pass tape == nullptr for
// inference. Reductions use a fixed sequential order so repeated runs are
// bit-identical.

// [M x K] x [K x N] -> [M x N].
Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape);

// Elementwise a + b for identical shapes, or b broadcast row-wise when b is
// [N] or [1 x N] and a is [.. x N].
Tensor add(const Tensor& a, const Tensor& b, Tape* tape);
Tensor sub(const Tensor& a, const Tensor& b, Tape* tape);
Tensor mul(const Tensor& a, const Tensor& b, Tape* tape);  // hadamard, same shape
Tensor scale(const Tensor& a, double c, Tape* tape);

Tensor transpose(const Tensor& a, Tape* tape);  // 2-D
Tensor reshape(const Tensor& a, std::vector<std::int64_t> shape, Tape* tape);

// Stack 2-D blocks with equal column counts along the row axis.
Tensor concat_rows(const std::vector<Tensor>& parts, Tape* tape);
// Rows [begin, end) of a 2-D tensor.
Tensor slice_rows(const Tensor& a, std::int64_t begin, std::int64_t end, Tape* tape);

// Softmax over the last axis, shift-invariant (row max subtracted). Throws
// NumericError on NaN input.
Tensor softmax(const Tensor& x, Tape* tape);

// Per-row normalization over the last axis: gamma * (x - mu) / sqrt(var + eps) + beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps,
                  Tape* tape);

Tensor relu(const Tensor& a, Tape* tape);

Tensor sum(const Tensor& a, Tape* tape);   // scalar [1]
Tensor mean(const Tensor& a, Tape* tape);  // scalar [1]

// -log softmax(logits)[label]; logits is [K] or [1 x K].
Tensor cross_entropy(const Tensor& logits, std::int64_t label, Tape* tape);

// Counts score-matrix entries materialized by attention kernels. One
// attention call over Nq queries and Nk keys contributes Nq * Nk, independent
// of the head count.
struct AttentionMeter {
  std::int64_t score_entries = 0;
  std::int64_t calls = 0;
  void reset() { score_entries = 0; calls = 0; }
};

// Multi-head scaled dot-product attention. q is [Nq x D], k and v are
// [Nk x D], D divisible by `heads`; per-head scale 1/sqrt(D/heads). Heads are
// column slices of the inputs; the output concatenates head outputs back to
// [Nq x D]. `weights_out`, when given, receives one [Nq x Nk] row-stochastic
// matrix per head (values only).
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads,
                            Tape* tape, AttentionMeter* meter = nullptr,
                            std::vector<std::vector<double>>* weights_out = nullptr);

namespace detail {
// c = a * b, shapes M x K, K x N.
void mm(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
        std::int64_t n);
// c += a * b.
void mm_acc(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
            std::int64_t n);
// c += a * b^T, a is M x N, b is K x N, c is M x K.
void mm_bt_acc(const double* a, const double* b, double* c, std::int64_t m, std::int64_t n,
               std::int64_t k);
// c += a^T * g, a is M x K, g is M x N, c is K x N.
void mm_at_acc(const double* a, const double* g, double* c, std::int64_t m, std::int64_t k,
               std::int64_t n);
// In-place row softmax with max subtraction; data is rows x cols.
void row_softmax(double* data, std::int64_t rows, std::int64_t cols);
}  // namespace detail

}  // namespace adformer
