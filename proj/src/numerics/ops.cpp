// Copyright 2026 The tcnae Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tcnae/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "tcnae/errors.hpp"

namespace tcnae {
namespace {

using Node = Tensor::Node;

void require_rank(const Tensor& t, std::size_t rank, const char* op,
                  const char* what) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": " + what + " must have rank " +
                         std::to_string(rank) + ", got " +
                         shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

// Grad buffer of parent i, or nullptr when that parent takes no gradient.
double* grad_of(Node& n, std::size_t i) {
  Node& p = *n.parents[i];
  return p.requires_grad ? p.ensure_grad().data() : nullptr;
}

template <class Fwd, class Deriv>
Tensor unary(const Tensor& x, Fwd fwd, Deriv deriv) {
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return make_result(x.shape(), std::move(out), {x}, [deriv](Node& n) {
    double* g = grad_of(n, 0);
    if (!g) return;
    const auto& xin = n.parents[0]->data;
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      g[i] += n.grad[i] * deriv(xin[i], n.data[i]);
    }
  });
}

void check_conv_shapes(const Tensor& x, const Tensor& w, const Tensor& b,
                       std::size_t dilation, bool transposed, const char* op) {
  require_rank(x, 2, op, "input");
  require_rank(w, 3, op, "weight");
  require_rank(b, 1, op, "bias");
  const std::size_t in_axis = transposed ? 0 : 1;
  const std::size_t out_axis = transposed ? 1 : 0;
  if (w.dim(in_axis) != x.dim(0)) {
    throw DimensionError(std::string(op) + ": weight " +
                         shape_string(w.shape()) + " expects " +
                         std::to_string(w.dim(in_axis)) +
                         " input channels, input has " +
                         std::to_string(x.dim(0)));
  }
  if (b.dim(0) != w.dim(out_axis)) {
    throw DimensionError(std::string(op) + ": bias length " +
                         std::to_string(b.dim(0)) + " != output channels " +
                         std::to_string(w.dim(out_axis)));
  }
  if (w.dim(2) < 1 || dilation < 1 || x.dim(1) < 1) {
    throw DimensionError(std::string(op) +
                         ": kernel width, dilation and length must be >= 1");
  }
}

// Splits a shape around `axis` into (outer, extent, inner) strides.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
  Shape reduced;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " +
                         shape_string(s));
  }
  AxisSplit r;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i < axis) r.outer *= s[i];
    if (i > axis) r.inner *= s[i];
    if (i != axis) r.reduced.push_back(s[i]);
  }
  r.extent = s[axis];
  if (r.extent == 0) throw DomainError("reduction over an empty axis");
  return r;
}

std::size_t broadcast_inner(const Tensor& x, const Tensor& b, const char* op) {
  const Shape& xs = x.shape();
  const Shape& bs = b.shape();
  if (bs.size() > xs.size() || !std::equal(bs.begin(), bs.end(), xs.begin())) {
    throw DimensionError(std::string(op) + ": " + shape_string(bs) +
                         " is not a prefix of " + shape_string(xs));
  }
  return x.numel() / std::max<std::size_t>(b.numel(), 1);
}

}  // namespace

Tensor causal_conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
                     std::size_t dilation) {
  check_conv_shapes(x, weight, bias, dilation, false, "causal_conv1d");
  const std::size_t cin = x.dim(0), len = x.dim(1);
  const std::size_t cout = weight.dim(0), k = weight.dim(2);
  const auto xd = x.data();
  const auto wd = weight.data();
  const auto bd = bias.data();

  std::vector<double> out(cout * len);
  for (std::size_t c = 0; c < cout; ++c) {
    double* o = out.data() + c * len;
    std::fill(o, o + len, bd[c]);
    for (std::size_t i = 0; i < cin; ++i) {
      const double* xi = xd.data() + i * len;
      for (std::size_t tap = 0; tap < k; ++tap) {
        const std::size_t shift = (k - 1 - tap) * dilation;
        if (shift >= len) continue;
        const double w = wd[(c * cin + i) * k + tap];
        for (std::size_t t = shift; t < len; ++t) o[t] += w * xi[t - shift];
      }
    }
  }

  return make_result({cout, len}, std::move(out), {x, weight, bias},
                     [cin, cout, len, k, dilation](Node& n) {
    const double* g = n.grad.data();
    const auto& xin = n.parents[0]->data;
    const auto& win = n.parents[1]->data;
    double* gx = grad_of(n, 0);
    double* gw = grad_of(n, 1);
    double* gb = grad_of(n, 2);
    for (std::size_t c = 0; c < cout; ++c) {
      const double* gc = g + c * len;
      if (gb) {
        double s = 0.0;
        for (std::size_t t = 0; t < len; ++t) s += gc[t];
        gb[c] += s;
      }
      for (std::size_t i = 0; i < cin; ++i) {
        const double* xi = xin.data() + i * len;
        for (std::size_t tap = 0; tap < k; ++tap) {
          const std::size_t shift = (k - 1 - tap) * dilation;
          if (shift >= len) continue;
          const std::size_t widx = (c * cin + i) * k + tap;
          if (gw) {
            double s = 0.0;
            for (std::size_t t = shift; t < len; ++t) s += gc[t] * xi[t - shift];
            gw[widx] += s;
          }
          if (gx) {
            const double w = win[widx];
            double* gxi = gx + i * len;
            for (std::size_t t = shift; t < len; ++t) gxi[t - shift] += w * gc[t];
          }
        }
      }
    }
  });
}

Tensor causal_transposed_conv1d(const Tensor& x, const Tensor& weight,
                                const Tensor& bias, std::size_t dilation) {
  check_conv_shapes(x, weight, bias, dilation, true, "causal_transposed_conv1d");
  const std::size_t cin = x.dim(0), len = x.dim(1);
  const std::size_t cout = weight.dim(1), k = weight.dim(2);
  const auto xd = x.data();
  const auto wd = weight.data();
  const auto bd = bias.data();

  std::vector<double> out(cout * len);
  for (std::size_t o = 0; o < cout; ++o) {
    std::fill(out.begin() + o * len, out.begin() + (o + 1) * len, bd[o]);
  }
  for (std::size_t i = 0; i < cin; ++i) {
    const double* xi = xd.data() + i * len;
    for (std::size_t o = 0; o < cout; ++o) {
      double* oo = out.data() + o * len;
      for (std::size_t tap = 0; tap < k; ++tap) {
        const std::size_t shift = (k - 1 - tap) * dilation;
        if (shift >= len) continue;
        const double w = wd[(i * cout + o) * k + tap];
        for (std::size_t t = 0; t + shift < len; ++t) oo[t] += w * xi[t + shift];
      }
    }
  }

  return make_result({cout, len}, std::move(out), {x, weight, bias},
                     [cin, cout, len, k, dilation](Node& n) {
    const double* g = n.grad.data();
    const auto& xin = n.parents[0]->data;
    const auto& win = n.parents[1]->data;
    double* gx = grad_of(n, 0);
    double* gw = grad_of(n, 1);
    double* gb = grad_of(n, 2);
    if (gb) {
      for (std::size_t o = 0; o < cout; ++o) {
        double s = 0.0;
        for (std::size_t t = 0; t < len; ++t) s += g[o * len + t];
        gb[o] += s;
      }
    }
    for (std::size_t i = 0; i < cin; ++i) {
      const double* xi = xin.data() + i * len;
      for (std::size_t o = 0; o < cout; ++o) {
        const double* go = g + o * len;
        for (std::size_t tap = 0; tap < k; ++tap) {
          const std::size_t shift = (k - 1 - tap) * dilation;
          if (shift >= len) continue;
          const std::size_t widx = (i * cout + o) * k + tap;
          if (gw) {
            double s = 0.0;
            for (std::size_t t = 0; t + shift < len; ++t) s += go[t] * xi[t + shift];
            gw[widx] += s;
          }
          if (gx) {
            const double w = win[widx];
            double* gxi = gx + i * len;
            for (std::size_t t = 0; t + shift < len; ++t) gxi[t + shift] += w * go[t];
          }
        }
      }
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(x, 1, "linear", "input");
  require_rank(weight, 2, "linear", "weight");
  require_rank(bias, 1, "linear", "bias");
  const std::size_t m = weight.dim(0), nin = weight.dim(1);
  if (x.dim(0) != nin || bias.dim(0) != m) {
    throw DimensionError("linear: weight " + shape_string(weight.shape()) +
                         ", input " + shape_string(x.shape()) + ", bias " +
                         shape_string(bias.shape()));
  }
  const auto xd = x.data();
  const auto wd = weight.data();
  const auto bd = bias.data();
  std::vector<double> out(m);
  for (std::size_t r = 0; r < m; ++r) {
    const double* wr = wd.data() + r * nin;
    double s = 0.0;
    for (std::size_t c = 0; c < nin; ++c) s += wr[c] * xd[c];
    out[r] = s + bd[r];
  }
  return make_result({m}, std::move(out), {x, weight, bias}, [m, nin](Node& n) {
    const auto& xin = n.parents[0]->data;
    const auto& win = n.parents[1]->data;
    double* gx = grad_of(n, 0);
    double* gw = grad_of(n, 1);
    double* gb = grad_of(n, 2);
    for (std::size_t r = 0; r < m; ++r) {
      const double gr = n.grad[r];
      if (gb) gb[r] += gr;
      if (gw) {
        double* gwr = gw + r * nin;
        for (std::size_t c = 0; c < nin; ++c) gwr[c] += gr * xin[c];
      }
      if (gx) {
        const double* wr = win.data() + r * nin;
        for (std::size_t c = 0; c < nin; ++c) gx[c] += wr[c] * gr;
      }
    }
  });
}

Tensor batched_matmul(const Tensor& a, const Tensor& x) {
  require_rank(a, 3, "batched_matmul", "lhs");
  require_rank(x, 3, "batched_matmul", "rhs");
  const std::size_t groups = a.dim(0), m = a.dim(1), kdim = a.dim(2);
  const std::size_t cols = x.dim(2);
  if (x.dim(0) != groups || x.dim(1) != kdim) {
    throw DimensionError("batched_matmul: " + shape_string(a.shape()) + " x " +
                         shape_string(x.shape()));
  }
  const auto ad = a.data();
  const auto xd = x.data();
  std::vector<double> out(groups * m * cols, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t r = 0; r < m; ++r) {
      double* orow = out.data() + (g * m + r) * cols;
      for (std::size_t kk = 0; kk < kdim; ++kk) {
        const double av = ad[(g * m + r) * kdim + kk];
        const double* xrow = xd.data() + (g * kdim + kk) * cols;
        for (std::size_t c = 0; c < cols; ++c) orow[c] += av * xrow[c];
      }
    }
  }
  return make_result({groups, m, cols}, std::move(out), {a, x},
                     [groups, m, kdim, cols](Node& n) {
    const auto& ain = n.parents[0]->data;
    const auto& xin = n.parents[1]->data;
    double* ga = grad_of(n, 0);
    double* gx = grad_of(n, 1);
    for (std::size_t g = 0; g < groups; ++g) {
      for (std::size_t r = 0; r < m; ++r) {
        const double* grow = n.grad.data() + (g * m + r) * cols;
        for (std::size_t kk = 0; kk < kdim; ++kk) {
          const std::size_t aidx = (g * m + r) * kdim + kk;
          const double* xrow = xin.data() + (g * kdim + kk) * cols;
          if (ga) {
            double s = 0.0;
            for (std::size_t c = 0; c < cols; ++c) s += grow[c] * xrow[c];
            ga[aidx] += s;
          }
          if (gx) {
            double* gxrow = gx + (g * kdim + kk) * cols;
            for (std::size_t c = 0; c < cols; ++c) gxrow[c] += ain[aidx] * grow[c];
          }
        }
      }
    }
  });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor softplus(const Tensor& x) {
  return unary(
      x,
      [](double v) {
        return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
      },
      [](double v, double) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      });
}

Tensor abs(const Tensor& x) {
  return unary(
      x, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.data()) {
    if (!(v > 0.0)) {
      throw DomainError("log of non-positive value " + std::to_string(v));
    }
  }
  return unary(
      x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Tensor square(const Tensor& x) {
  return unary(
      x, [](double v) { return v * v; },
      [](double v, double) { return 2.0 * v; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(
      x, [value](double v) { return v + value; },
      [](double, double) { return 1.0; });
}

Tensor clamp_min(const Tensor& x, double floor) {
  return unary(
      x, [floor](double v) { return v < floor ? floor : v; },
      [floor](double v, double) { return v >= floor ? 1.0 : 0.0; });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto ad = a.data(), bd = b.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + bd[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& n) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (double* g = grad_of(n, p)) {
        for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  const auto ad = a.data(), bd = b.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] - bd[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& n) {
    if (double* g = grad_of(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
    }
    if (double* g = grad_of(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] -= n.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto ad = a.data(), bd = b.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& n) {
    const auto& av = n.parents[0]->data;
    const auto& bv = n.parents[1]->data;
    if (double* g = grad_of(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * bv[i];
    }
    if (double* g = grad_of(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * av[i];
    }
  });
}

Tensor add_broadcast(const Tensor& x, const Tensor& b) {
  const std::size_t inner = broadcast_inner(x, b, "add_broadcast");
  const auto xd = x.data(), bd = b.data();
  std::vector<double> out(xd.size());
  for (std::size_t j = 0; j < bd.size(); ++j) {
    for (std::size_t r = 0; r < inner; ++r) {
      out[j * inner + r] = xd[j * inner + r] + bd[j];
    }
  }
  return make_result(x.shape(), std::move(out), {x, b}, [inner](Node& n) {
    if (double* g = grad_of(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
    }
    if (double* g = grad_of(n, 1)) {
      const std::size_t nb = n.parents[1]->data.size();
      for (std::size_t j = 0; j < nb; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < inner; ++r) s += n.grad[j * inner + r];
        g[j] += s;
      }
    }
  });
}

Tensor mul_broadcast(const Tensor& x, const Tensor& b) {
  const std::size_t inner = broadcast_inner(x, b, "mul_broadcast");
  const auto xd = x.data(), bd = b.data();
  std::vector<double> out(xd.size());
  for (std::size_t j = 0; j < bd.size(); ++j) {
    for (std::size_t r = 0; r < inner; ++r) {
      out[j * inner + r] = xd[j * inner + r] * bd[j];
    }
  }
  return make_result(x.shape(), std::move(out), {x, b}, [inner](Node& n) {
    const auto& xv = n.parents[0]->data;
    const auto& bv = n.parents[1]->data;
    if (double* g = grad_of(n, 0)) {
      for (std::size_t j = 0; j < bv.size(); ++j) {
        for (std::size_t r = 0; r < inner; ++r) {
          g[j * inner + r] += n.grad[j * inner + r] * bv[j];
        }
      }
    }
    if (double* g = grad_of(n, 1)) {
      for (std::size_t j = 0; j < bv.size(); ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < inner; ++r) {
          s += n.grad[j * inner + r] * xv[j * inner + r];
        }
        g[j] += s;
      }
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_string(x.shape()) +
                         " as " + shape_string(shape));
  }
  const auto xd = x.data();
  return make_result(std::move(shape), std::vector<double>(xd.begin(), xd.end()),
                     {x}, [](Node& n) {
    if (double* g = grad_of(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
    }
  });
}

Tensor sum(const Tensor& x) {
  const auto xd = x.data();
  if (xd.empty()) throw DomainError("sum of an empty tensor");
  double s = 0.0;
  for (double v : xd) s += v;
  return make_result({}, {s}, {x}, [](Node& n) {
    if (double* g = grad_of(n, 0)) {
      const std::size_t len = n.parents[0]->data.size();
      for (std::size_t i = 0; i < len; ++i) g[i] += n.grad[0];
    }
  });
}

Tensor mean(const Tensor& x) {
  const auto xd = x.data();
  if (xd.empty()) throw DomainError("mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(xd.size()));
}

Tensor sum(const Tensor& x, std::size_t axis) {
  const AxisSplit s = split_axis(x.shape(), axis);
  const auto xd = x.data();
  std::vector<double> out(s.outer * s.inner, 0.0);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t e = 0; e < s.extent; ++e) {
      const double* src = xd.data() + (o * s.extent + e) * s.inner;
      double* dst = out.data() + o * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
    }
  }
  return make_result(s.reduced, std::move(out), {x}, [s](Node& n) {
    double* g = grad_of(n, 0);
    if (!g) return;
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t e = 0; e < s.extent; ++e) {
        double* dst = g + (o * s.extent + e) * s.inner;
        const double* src = n.grad.data() + o * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
      }
    }
  });
}

Tensor mean(const Tensor& x, std::size_t axis) {
  const std::size_t extent = split_axis(x.shape(), axis).extent;
  return scale(sum(x, axis), 1.0 / static_cast<double>(extent));
}

Tensor max(const Tensor& x, std::size_t axis) {
  const AxisSplit s = split_axis(x.shape(), axis);
  const auto xd = x.data();
  std::vector<double> out(s.outer * s.inner);
  std::vector<std::size_t> arg(out.size(), 0);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      double best = xd[o * s.extent * s.inner + i];
      std::size_t best_e = 0;
      for (std::size_t e = 1; e < s.extent; ++e) {
        const double v = xd[(o * s.extent + e) * s.inner + i];
        if (v > best) {
          best = v;
          best_e = e;
        }
      }
      out[o * s.inner + i] = best;
      arg[o * s.inner + i] = best_e;
    }
  }
  return make_result(s.reduced, std::move(out), {x},
                     [s, arg = std::move(arg)](Node& n) {
    double* g = grad_of(n, 0);
    if (!g) return;
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t r = o * s.inner + i;
        g[(o * s.extent + arg[r]) * s.inner + i] += n.grad[r];
      }
    }
  });
}

Tensor mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  const auto ad = a.data(), bd = b.data();
  if (ad.empty()) throw DomainError("mse of empty tensors");
  double s = 0.0;
  for (std::size_t i = 0; i < ad.size(); ++i) {
    const double d = ad[i] - bd[i];
    s += d * d;
  }
  const double inv_n = 1.0 / static_cast<double>(ad.size());
  return make_result({}, {s * inv_n}, {a, b}, [inv_n](Node& n) {
    const auto& av = n.parents[0]->data;
    const auto& bv = n.parents[1]->data;
    const double scale_g = 2.0 * inv_n * n.grad[0];
    double* ga = grad_of(n, 0);
    double* gb = grad_of(n, 1);
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double d = scale_g * (av[i] - bv[i]);
      if (ga) ga[i] += d;
      if (gb) gb[i] -= d;
    }
  });
}

}  // namespace tcnae
