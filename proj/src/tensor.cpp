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

#include "adformer/tensor.hpp"

#include <cmath>
#include <sstream>

#include "adformer/errors.hpp"

namespace adformer {

std::string shape_to_string(const std::vector<std::int64_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

std::int64_t shape_numel(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (std::int64_t e : shape) {
    if (e <= 0) throw DimensionError("tensor extent must be positive, got " + shape_to_string(shape));
    n *= e;
  }
  return n;
}

Tensor Tensor::make(std::vector<std::int64_t> shape, std::vector<double> values,
                    bool requires_grad) {
  std::int64_t n = shape_numel(shape);
  if (static_cast<std::int64_t>(values.size()) != n) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_to_string(shape));
  }
  Tensor t;
  t.s_ = std::make_shared<Storage>();
  t.s_->shape = std::move(shape);
  t.s_->values = std::move(values);
  if (requires_grad) t.set_requires_grad(true);
  return t;
}

Tensor Tensor::zeros(std::vector<std::int64_t> shape, bool requires_grad) {
  std::int64_t n = shape_numel(shape);
  return make(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0),
              requires_grad);
}

Tensor Tensor::full(std::vector<std::int64_t> shape, double value, bool requires_grad) {
  std::int64_t n = shape_numel(shape);
  return make(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), value),
              requires_grad);
}

Tensor Tensor::from_values(std::vector<std::int64_t> shape, std::vector<double> values,
                           bool requires_grad) {
  return make(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::randn(std::vector<std::int64_t> shape, Rng& rng, double stddev,
                     bool requires_grad) {
  std::int64_t n = shape_numel(shape);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.normal(0.0, stddev);
  return make(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::xavier_uniform(std::vector<std::int64_t> shape, Rng& rng, bool requires_grad) {
  if (shape.size() != 2) {
    throw DimensionError("xavier_uniform expects a 2-D shape, got " + shape_to_string(shape));
  }
  double a = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
  std::int64_t n = shape_numel(shape);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.uniform(-a, a);
  return make(std::move(shape), std::move(v), requires_grad);
}

void Tensor::set_requires_grad(bool on) {
  s_->requires_grad = on;
  if (on) {
    s_->grad.assign(s_->values.size(), 0.0);
  } else {
    s_->grad.clear();
  }
}

void Tensor::zero_grad() {
  if (s_->requires_grad) s_->grad.assign(s_->values.size(), 0.0);
}

Tensor Tensor::clone() const {
  Tensor t;
  t.s_ = std::make_shared<Storage>();
  t.s_->shape = s_->shape;
  t.s_->values = s_->values;
  if (s_->requires_grad) t.set_requires_grad(true);
  return t;
}

std::string Tensor::shape_str() const { return shape_to_string(s_->shape); }

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw DimensionError("backward expects a scalar loss, got " +
                         (loss.defined() ? loss.shape_str() : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) {
    throw UsageError("backward: loss does not require grad; was it recorded on this tape?");
  }
  const_cast<Tensor&>(loss).grad()[0] = 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

}  // namespace adformer
