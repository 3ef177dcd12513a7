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

#include "adformer/tensor_ops.hpp"

#include <algorithm>
#include <cmath>

#include "adformer/errors.hpp"

namespace adformer {

namespace detail {

void mm(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
        std::int64_t n) {
  std::fill(c, c + m * n, 0.0);
  mm_acc(a, b, c, m, k, n);
}

void mm_acc(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
            std::int64_t n) {
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::int64_t p = 0; p < k; ++p) {
      double av = arow[p];
      const double* brow = b + p * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void mm_bt_acc(const double* a, const double* b, double* c, std::int64_t m, std::int64_t n,
               std::int64_t k) {
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * n;
    double* crow = c + i * k;
    for (std::int64_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double acc = 0.0;
      for (std::int64_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      crow[p] += acc;
    }
  }
}

void mm_at_acc(const double* a, const double* g, double* c, std::int64_t m, std::int64_t k,
               std::int64_t n) {
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* grow = g + i * n;
    for (std::int64_t p = 0; p < k; ++p) {
      double av = arow[p];
      double* crow = c + p * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * grow[j];
    }
  }
}

void row_softmax(double* data, std::int64_t rows, std::int64_t cols) {
  for (std::int64_t r = 0; r < rows; ++r) {
    double* row = data + r * cols;
    double mx = row[0];
    for (std::int64_t j = 1; j < cols; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (std::int64_t j = 0; j < cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      denom += row[j];
    }
    for (std::int64_t j = 0; j < cols; ++j) row[j] /= denom;
  }
}

}  // namespace detail

namespace {

bool wants_grad(std::initializer_list<const Tensor*> inputs) {
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Last axis extent and the product of the remaining axes.
void split_last_axis(const Tensor& t, std::int64_t& rows, std::int64_t& cols) {
  cols = t.shape().back();
  rows = t.size() / cols;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + a.shape_str() + " x " + b.shape_str());
  }
  std::int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = Tensor::zeros({m, n});
  detail::mm(a.values().data(), b.values().data(), out.values().data(), m, k, n);
  if (tape && wants_grad({&a, &b})) {
    out.set_requires_grad(true);
    Tensor ac = a, bc = b, oc = out;
    tape->record([ac, bc, oc, m, k, n]() mutable {
      const double* g = oc.grad().data();
      if (ac.requires_grad()) {
        detail::mm_bt_acc(g, bc.values().data(), ac.grad().data(), m, n, k);
      }
      if (bc.requires_grad()) {
        detail::mm_at_acc(ac.values().data(), g, bc.grad().data(), m, k, n);
      }
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b, Tape* tape) {
  bool broadcast = false;
  if (a.shape() == b.shape()) {
    broadcast = false;
  } else if (b.size() == a.shape().back() &&
             (b.rank() == 1 || (b.rank() == 2 && b.dim(0) == 1))) {
    broadcast = true;
  } else {
    throw DimensionError("add: incompatible shapes " + a.shape_str() + " + " + b.shape_str());
  }
  std::int64_t rows, cols;
  split_last_axis(a, rows, cols);
  Tensor out = Tensor::zeros(a.shape());
  const double* av = a.values().data();
  const double* bv = b.values().data();
  double* ov = out.values().data();
  if (broadcast) {
    for (std::int64_t r = 0; r < rows; ++r)
      for (std::int64_t j = 0; j < cols; ++j) ov[r * cols + j] = av[r * cols + j] + bv[j];
  } else {
    for (std::int64_t i = 0; i < a.size(); ++i) ov[i] = av[i] + bv[i];
  }
  if (tape && wants_grad({&a, &b})) {
    out.set_requires_grad(true);
    Tensor ac = a, bc = b, oc = out;
    tape->record([ac, bc, oc, broadcast, rows, cols]() mutable {
      const double* g = oc.grad().data();
      if (ac.requires_grad()) {
        double* ga = ac.grad().data();
        for (std::int64_t i = 0; i < oc.size(); ++i) ga[i] += g[i];
      }
      if (bc.requires_grad()) {
        double* gb = bc.grad().data();
        if (broadcast) {
          for (std::int64_t r = 0; r < rows; ++r)
            for (std::int64_t j = 0; j < cols; ++j) gb[j] += g[r * cols + j];
        } else {
          for (std::int64_t i = 0; i < oc.size(); ++i) gb[i] += g[i];
        }
      }
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b, Tape* tape) {
  if (a.shape() != b.shape()) {
    throw DimensionError("sub: incompatible shapes " + a.shape_str() + " - " + b.shape_str());
  }
  Tensor out = Tensor::zeros(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) out.flat(i) = a.flat(i) - b.flat(i);
  if (tape && wants_grad({&a, &b})) {
    out.set_requires_grad(true);
    Tensor ac = a, bc = b, oc = out;
    tape->record([ac, bc, oc]() mutable {
      const double* g = oc.grad().data();
      if (ac.requires_grad()) {
        double* ga = ac.grad().data();
        for (std::int64_t i = 0; i < oc.size(); ++i) ga[i] += g[i];
      }
      if (bc.requires_grad()) {
        double* gb = bc.grad().data();
        for (std::int64_t i = 0; i < oc.size(); ++i) gb[i] -= g[i];
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b, Tape* tape) {
  if (a.shape() != b.shape()) {
    throw DimensionError("mul: incompatible shapes " + a.shape_str() + " * " + b.shape_str());
  }
  Tensor out = Tensor::zeros(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) out.flat(i) = a.flat(i) * b.flat(i);
  if (tape && wants_grad({&a, &b})) {
    out.set_requires_grad(true);
    Tensor ac = a, bc = b, oc = out;
    tape->record([ac, bc, oc]() mutable {
      const double* g = oc.grad().data();
      if (ac.requires_grad()) {
        double* ga = ac.grad().data();
        const double* bv = bc.values().data();
        for (std::int64_t i = 0; i < oc.size(); ++i) ga[i] += g[i] * bv[i];
      }
      if (bc.requires_grad()) {
        double* gb = bc.grad().data();
        const double* av = ac.values().data();
        for (std::int64_t i = 0; i < oc.size(); ++i) gb[i] += g[i] * av[i];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double c, Tape* tape) {
  Tensor out = Tensor::zeros(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) out.flat(i) = a.flat(i) * c;
  if (tape && a.requires_grad()) {
    out.set_requires_grad(true);
    Tensor ac = a, oc = out;
    tape->record([ac, oc, c]() mutable {
      const double* g = oc.grad().data();
      double* ga = ac.grad().data();
      for (std::int64_t i = 0; i < oc.size(); ++i) ga[i] += g[i] * c;
    });
  }
  return out;
}

Tensor transpose(const Tensor& a, Tape* tape) {
  if (a.rank() != 2) {
    throw DimensionError("transpose expects a 2-D tensor, got " + a.shape_str());
  }
  std::int64_t r = a.dim(0), c = a.dim(1);
  Tensor out = Tensor::zeros({c, r});
  for (std::int64_t i = 0; i < r; ++i)
    for (std::int64_t j = 0; j < c; ++j) out.at(j, i) = a.at(i, j);
  if (tape && a.requires_grad()) {
    out.set_requires_grad(true);
    Tensor ac = a, oc = out;
    tape->record([ac, oc, r, c]() mutable {
      for (std::int64_t i = 0; i < r; ++i)
        for (std::int64_t j = 0; j < c; ++j)
          ac.grad()[static_cast<std::size_t>(i * c + j)] +=
              oc.grad()[static_cast<std::size_t>(j * r + i)];
    });
  }
  return out;
}

Tensor reshape(const Tensor& a, std::vector<std::int64_t> shape, Tape* tape) {
  if (shape_numel(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + a.shape_str() + " as " +
                         shape_to_string(shape));
  }
  Tensor out = Tensor::from_values(std::move(shape), a.values());
  if (tape && a.requires_grad()) {
    out.set_requires_grad(true);
    Tensor ac = a, oc = out;
    tape->record([ac, oc]() mutable {
      double* ga = ac.grad().data();
      const double* g = oc.grad().data();
      for (std::int64_t i = 0; i < oc.size(); ++i) ga[i] += g[i];
    });
  }
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts, Tape* tape) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  std::int64_t cols = parts[0].dim(1);
  std::int64_t rows = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != 2 || p.dim(1) != cols) {
      throw DimensionError("concat_rows: column mismatch, " + parts[0].shape_str() + " vs " +
                           p.shape_str());
    }
    rows += p.dim(0);
  }
  Tensor out = Tensor::zeros({rows, cols});
  std::int64_t at = 0;
  for (const Tensor& p : parts) {
    std::copy(p.values().begin(), p.values().end(), out.values().begin() + at);
    at += p.size();
  }
  bool grad = false;
  for (const Tensor& p : parts) grad = grad || p.requires_grad();
  if (tape && grad) {
    out.set_requires_grad(true);
    std::vector<Tensor> pc = parts;
    Tensor oc = out;
    tape->record([pc, oc]() mutable {
      const double* g = oc.grad().data();
      std::int64_t at2 = 0;
      for (Tensor& p : pc) {
        if (p.requires_grad()) {
          double* gp = p.grad().data();
          for (std::int64_t i = 0; i < p.size(); ++i) gp[i] += g[at2 + i];
        }
        at2 += p.size();
      }
    });
  }
  return out;
}

Tensor slice_rows(const Tensor& a, std::int64_t begin, std::int64_t end, Tape* tape) {
  if (a.rank() != 2 || begin < 0 || end > a.dim(0) || begin >= end) {
    throw DimensionError("slice_rows: invalid range [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") for " + a.shape_str());
  }
  std::int64_t cols = a.dim(1);
  Tensor out = Tensor::zeros({end - begin, cols});
  std::copy(a.values().begin() + begin * cols, a.values().begin() + end * cols,
            out.values().begin());
  if (tape && a.requires_grad()) {
    out.set_requires_grad(true);
    Tensor ac = a, oc = out;
    tape->record([ac, oc, begin, cols]() mutable {
      double* ga = ac.grad().data() + begin * cols;
      const double* g = oc.grad().data();
      for (std::int64_t i = 0; i < oc.size(); ++i) ga[i] += g[i];
    });
  }
  return out;
}

Tensor softmax(const Tensor& x, Tape* tape) {
  for (std::int64_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x.flat(i))) throw NumericError("softmax: NaN input");
  }
  std::int64_t rows, cols;
  split_last_axis(x, rows, cols);
  Tensor out = Tensor::from_values(x.shape(), x.values());
  detail::row_softmax(out.values().data(), rows, cols);
  if (tape && x.requires_grad()) {
    out.set_requires_grad(true);
    Tensor xc = x, oc = out;
    tape->record([xc, oc, rows, cols]() mutable {
      const double* y = oc.values().data();
      const double* g = oc.grad().data();
      double* gx = xc.grad().data();
      for (std::int64_t r = 0; r < rows; ++r) {
        const double* yr = y + r * cols;
        const double* gr = g + r * cols;
        double dot = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) dot += gr[j] * yr[j];
        for (std::int64_t j = 0; j < cols; ++j) gx[r * cols + j] += yr[j] * (gr[j] - dot);
      }
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps,
                  Tape* tape) {
  std::int64_t rows, cols;
  split_last_axis(x, rows, cols);
  if (gamma.size() != cols || beta.size() != cols) {
    throw DimensionError("layer_norm: gamma " + gamma.shape_str() + " / beta " +
                         beta.shape_str() + " do not match last axis of " + x.shape_str());
  }
  Tensor out = Tensor::zeros(x.shape());
  std::vector<double> xhat(static_cast<std::size_t>(x.size()));
  std::vector<double> inv_sigma(static_cast<std::size_t>(rows));
  const double* xv = x.values().data();
  const double* gv = gamma.values().data();
  const double* bv = beta.values().data();
  double* ov = out.values().data();
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* xr = xv + r * cols;
    double mu = 0.0;
    for (std::int64_t j = 0; j < cols; ++j) mu += xr[j];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::int64_t j = 0; j < cols; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(cols);
    double is = 1.0 / std::sqrt(var + eps);
    inv_sigma[static_cast<std::size_t>(r)] = is;
    for (std::int64_t j = 0; j < cols; ++j) {
      double h = (xr[j] - mu) * is;
      xhat[static_cast<std::size_t>(r * cols + j)] = h;
      ov[r * cols + j] = gv[j] * h + bv[j];
    }
  }
  if (tape && wants_grad({&x, &gamma, &beta})) {
    out.set_requires_grad(true);
    Tensor xc = x, gc = gamma, bc = beta, oc = out;
    auto xh = std::make_shared<std::vector<double>>(std::move(xhat));
    auto isv = std::make_shared<std::vector<double>>(std::move(inv_sigma));
    tape->record([xc, gc, bc, oc, xh, isv, rows, cols]() mutable {
      const double* g = oc.grad().data();
      const double* gv2 = gc.values().data();
      for (std::int64_t r = 0; r < rows; ++r) {
        const double* gr = g + r * cols;
        const double* hr = xh->data() + r * cols;
        if (gc.requires_grad()) {
          double* gg = gc.grad().data();
          for (std::int64_t j = 0; j < cols; ++j) gg[j] += gr[j] * hr[j];
        }
        if (bc.requires_grad()) {
          double* gb = bc.grad().data();
          for (std::int64_t j = 0; j < cols; ++j) gb[j] += gr[j];
        }
        if (xc.requires_grad()) {
          double* gx = xc.grad().data() + r * cols;
          double is = (*isv)[static_cast<std::size_t>(r)];
          double mean_dh = 0.0, mean_dhh = 0.0;
          for (std::int64_t j = 0; j < cols; ++j) {
            double dh = gr[j] * gv2[j];
            mean_dh += dh;
            mean_dhh += dh * hr[j];
          }
          mean_dh /= static_cast<double>(cols);
          mean_dhh /= static_cast<double>(cols);
          for (std::int64_t j = 0; j < cols; ++j) {
            double dh = gr[j] * gv2[j];
            gx[j] += is * (dh - mean_dh - hr[j] * mean_dhh);
          }
        }
      }
    });
  }
  return out;
}

Tensor relu(const Tensor& a, Tape* tape) {
  Tensor out = Tensor::zeros(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) out.flat(i) = a.flat(i) > 0.0 ? a.flat(i) : 0.0;
  if (tape && a.requires_grad()) {
    out.set_requires_grad(true);
    Tensor ac = a, oc = out;
    tape->record([ac, oc]() mutable {
      double* ga = ac.grad().data();
      const double* g = oc.grad().data();
      const double* av = ac.values().data();
      for (std::int64_t i = 0; i < oc.size(); ++i) {
        if (av[i] > 0.0) ga[i] += g[i];
      }
    });
  }
  return out;
}

Tensor sum(const Tensor& a, Tape* tape) {
  double total = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) total += a.flat(i);
  Tensor out = Tensor::from_values({1}, {total});
  if (tape && a.requires_grad()) {
    out.set_requires_grad(true);
    Tensor ac = a, oc = out;
    tape->record([ac, oc]() mutable {
      double g = oc.grad()[0];
      double* ga = ac.grad().data();
      for (std::int64_t i = 0; i < ac.size(); ++i) ga[i] += g;
    });
  }
  return out;
}

Tensor mean(const Tensor& a, Tape* tape) {
  Tensor s = sum(a, tape);
  return scale(s, 1.0 / static_cast<double>(a.size()), tape);
}

Tensor cross_entropy(const Tensor& logits, std::int64_t label, Tape* tape) {
  std::int64_t k = logits.shape().back();
  if (logits.size() != k) {
    throw DimensionError("cross_entropy expects a single logit row, got " + logits.shape_str());
  }
  if (label < 0 || label >= k) {
    throw ConfigError("cross_entropy: label " + std::to_string(label) + " out of range [0," +
                      std::to_string(k) + ")");
  }
  const double* lv = logits.values().data();
  double mx = lv[0];
  for (std::int64_t j = 1; j < k; ++j) mx = std::max(mx, lv[j]);
  double lse = 0.0;
  for (std::int64_t j = 0; j < k; ++j) lse += std::exp(lv[j] - mx);
  lse = std::log(lse) + mx;
  Tensor out = Tensor::from_values({1}, {lse - lv[label]});
  if (tape && logits.requires_grad()) {
    out.set_requires_grad(true);
    Tensor lc = logits, oc = out;
    tape->record([lc, oc, label, k, lse]() mutable {
      double g = oc.grad()[0];
      double* gl = lc.grad().data();
      const double* lv2 = lc.values().data();
      for (std::int64_t j = 0; j < k; ++j) {
        double p = std::exp(lv2[j] - lse);
        gl[j] += g * (p - (j == label ? 1.0 : 0.0));
      }
    });
  }
  return out;
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads,
                            Tape* tape, AttentionMeter* meter,
                            std::vector<std::vector<double>>* weights_out) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2 || q.dim(1) != k.dim(1) ||
      k.shape() != v.shape()) {
    throw DimensionError("scaled_dot_attention: incompatible shapes q" + q.shape_str() + " k" +
                         k.shape_str() + " v" + v.shape_str());
  }
  std::int64_t d = q.dim(1);
  if (heads < 1 || d % heads != 0) {
    throw DimensionError("scaled_dot_attention: dim " + std::to_string(d) +
                         " not divisible by heads " + std::to_string(heads));
  }
  std::int64_t nq = q.dim(0), nk = k.dim(0), dh = d / heads;
  double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  if (meter) {
    meter->score_entries += nq * nk;
    meter->calls += 1;
  }
  if (weights_out) weights_out->clear();

  Tensor out = Tensor::zeros({nq, d});
  // One row-stochastic matrix per head, kept for the backward pass.
  auto attn = std::make_shared<std::vector<std::vector<double>>>(
      static_cast<std::size_t>(heads));
  const double* qv = q.values().data();
  const double* kv = k.values().data();
  const double* vv = v.values().data();
  double* ov = out.values().data();
  for (int h = 0; h < heads; ++h) {
    std::int64_t off = h * dh;
    std::vector<double>& a = (*attn)[static_cast<std::size_t>(h)];
    a.assign(static_cast<std::size_t>(nq * nk), 0.0);
    for (std::int64_t i = 0; i < nq; ++i) {
      const double* qr = qv + i * d + off;
      for (std::int64_t j = 0; j < nk; ++j) {
        const double* kr = kv + j * d + off;
        double s = 0.0;
        for (std::int64_t p = 0; p < dh; ++p) s += qr[p] * kr[p];
        a[static_cast<std::size_t>(i * nk + j)] = s * inv_scale;
      }
    }
    detail::row_softmax(a.data(), nq, nk);
    for (std::int64_t i = 0; i < nq; ++i) {
      double* orow = ov + i * d + off;
      const double* arow = a.data() + i * nk;
      for (std::int64_t j = 0; j < nk; ++j) {
        double w = arow[j];
        const double* vr = vv + j * d + off;
        for (std::int64_t p = 0; p < dh; ++p) orow[p] += w * vr[p];
      }
    }
    if (weights_out) weights_out->push_back(a);
  }

  if (tape && wants_grad({&q, &k, &v})) {
    out.set_requires_grad(true);
    Tensor qc = q, kc = k, vc = v, oc = out;
    tape->record([qc, kc, vc, oc, attn, heads, nq, nk, dh, inv_scale]() mutable {
      std::int64_t d2 = static_cast<std::int64_t>(heads) * dh;
      const double* g = oc.grad().data();
      const double* qv2 = qc.values().data();
      const double* kv2 = kc.values().data();
      const double* vv2 = vc.values().data();
      std::vector<double> da(static_cast<std::size_t>(nq * nk));
      std::vector<double> ds(static_cast<std::size_t>(nq * nk));
      for (int h = 0; h < heads; ++h) {
        std::int64_t off = static_cast<std::int64_t>(h) * dh;
        const std::vector<double>& a = (*attn)[static_cast<std::size_t>(h)];
        // dA = dO * V^T ; dV += A^T * dO
        for (std::int64_t i = 0; i < nq; ++i) {
          const double* grow = g + i * d2 + off;
          for (std::int64_t j = 0; j < nk; ++j) {
            const double* vr = vv2 + j * d2 + off;
            double s = 0.0;
            for (std::int64_t p = 0; p < dh; ++p) s += grow[p] * vr[p];
            da[static_cast<std::size_t>(i * nk + j)] = s;
          }
        }
        if (vc.requires_grad()) {
          double* gv = vc.grad().data();
          for (std::int64_t i = 0; i < nq; ++i) {
            const double* arow = a.data() + i * nk;
            const double* grow = g + i * d2 + off;
            for (std::int64_t j = 0; j < nk; ++j) {
              double w = arow[j];
              double* gvr = gv + j * d2 + off;
              for (std::int64_t p = 0; p < dh; ++p) gvr[p] += w * grow[p];
            }
          }
        }
        // softmax backward: dS = A o (dA - rowsum(dA o A))
        for (std::int64_t i = 0; i < nq; ++i) {
          const double* arow = a.data() + i * nk;
          const double* darow = da.data() + i * nk;
          double dot = 0.0;
          for (std::int64_t j = 0; j < nk; ++j) dot += darow[j] * arow[j];
          double* dsrow = ds.data() + i * nk;
          for (std::int64_t j = 0; j < nk; ++j)
            dsrow[j] = arow[j] * (darow[j] - dot) * inv_scale;
        }
        if (qc.requires_grad()) {
          double* gq = qc.grad().data();
          for (std::int64_t i = 0; i < nq; ++i) {
            const double* dsrow = ds.data() + i * nk;
            double* gqr = gq + i * d2 + off;
            for (std::int64_t j = 0; j < nk; ++j) {
              double w = dsrow[j];
              const double* kr = kv2 + j * d2 + off;
              for (std::int64_t p = 0; p < dh; ++p) gqr[p] += w * kr[p];
            }
          }
        }
        if (kc.requires_grad()) {
          double* gk = kc.grad().data();
          for (std::int64_t i = 0; i < nq; ++i) {
            const double* dsrow = ds.data() + i * nk;
            const double* qr = qv2 + i * d2 + off;
            for (std::int64_t j = 0; j < nk; ++j) {
              double w = dsrow[j];
              double* gkr = gk + j * d2 + off;
              for (std::int64_t p = 0; p < dh; ++p) gkr[p] += w * qr[p];
            }
          }
        }
      }
    });
  }
  return out;
}

}  // namespace adformer
