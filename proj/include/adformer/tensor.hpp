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
#include <memory>
#include <string>
#include <vector>

#include "adformer/rng.hpp"

namespace adformer {

// Dense row-major tensor of doubles with an optional gradient buffer.
// Copies are shallow (shared storage); use clone() for a deep copy. A tensor
// is treated as immutable once it has entered a forward computation.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::int64_t> shape, bool requires_grad = false);
  static Tensor full(std::vector<std::int64_t> shape, double value, bool requires_grad = false);
  static Tensor from_values(std::vector<std::int64_t> shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor randn(std::vector<std::int64_t> shape, Rng& rng, double stddev = 1.0,
                      bool requires_grad = false);
  // Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)); 2-D only.
  static Tensor xavier_uniform(std::vector<std::int64_t> shape, Rng& rng,
                               bool requires_grad = false);

  bool defined() const { return s_ != nullptr; }
  const std::vector<std::int64_t>& shape() const { return s_->shape; }
  int rank() const { return static_cast<int>(s_->shape.size()); }
  std::int64_t dim(int i) const { return s_->shape[static_cast<std::size_t>(i)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(s_->values.size()); }

  std::vector<double>& values() { return s_->values; }
  const std::vector<double>& values() const { return s_->values; }
  std::vector<double>& grad() { return s_->grad; }
  const std::vector<double>& grad() const { return s_->grad; }

  bool requires_grad() const { return s_->requires_grad; }
  // Enabling allocates a zero gradient buffer of matching size.
  void set_requires_grad(bool on);
  void zero_grad();

  double& flat(std::int64_t i) { return s_->values[static_cast<std::size_t>(i)]; }
  double flat(std::int64_t i) const { return s_->values[static_cast<std::size_t>(i)]; }
  // 2-D accessors.
  double& at(std::int64_t r, std::int64_t c) {
    return s_->values[static_cast<std::size_t>(r * s_->shape[1] + c)];
  }
  double at(std::int64_t r, std::int64_t c) const {
    return s_->values[static_cast<std::size_t>(r * s_->shape[1] + c)];
  }

  // Deep copy of shape/values/requires_grad with a fresh zero gradient.
  Tensor clone() const;

  bool same_storage(const Tensor& other) const { return s_ == other.s_; }

  std::string shape_str() const;

 private:
  struct Storage {
    std::vector<std::int64_t> shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty unless requires_grad
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> s_;

  static Tensor make(std::vector<std::int64_t> shape, std::vector<double> values,
                     bool requires_grad);
  friend class Tape;
};

// Ordered record of primitive applications. Each forward primitive pushes the
// closure that propagates its adjoint; backward() replays them in reverse.
// One tape belongs to one logical training thread and is cleared between
// steps.
class Tape {
 public:
  void record(std::function<void()> backward_step) {
    steps_.push_back(std::move(backward_step));
  }

  // Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. `loss` must be
  // a scalar (size 1) recorded on this tape.
  void backward(const Tensor& loss);

  void clear() { steps_.clear(); }
  std::size_t size() const { return steps_.size(); }

 private:
  std::vector<std::function<void()>> steps_;
};

std::string shape_to_string(const std::vector<std::int64_t>& shape);
std::int64_t shape_numel(const std::vector<std::int64_t>& shape);

}  // namespace adformer
