// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include "mixtts/nn/ops.hpp"

#include <algorithm>
#include <cmath>

namespace mixtts::nn {
namespace {

using detail::Node;

// Gradient buffer of parent i, or nullptr when it needs none.
double* parent_grad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad ? p.grad.data() : nullptr;
}

const double* parent_value(Node& self, std::size_t i) { return self.parents[i]->value.data(); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeMismatch(std::string(op) + ": " + to_string(a.shape()) + " vs " +
                        to_string(b.shape()));
  }
}

template <typename Forward, typename Derivative>
Tensor unary(const Tensor& x, Forward f, Derivative dfdx_from_xy) {
  std::vector<double> out(x.size());
  const auto in = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return Tensor::from_op(x.shape(), std::move(out), {x}, [dfdx_from_xy](Node& self) {
    double* gx = parent_grad(self, 0);
    const double* xv = parent_value(self, 0);
    for (std::size_t i = 0; i < self.value.size(); ++i) {
      gx[i] += self.grad[i] * dfdx_from_xy(xv[i], self.value[i]);
    }
  });
}

}  // namespace

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("matmul: " + to_string(a.shape()) + " . " + to_string(b.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  const double* av = a.value().data();
  const double* bv = b.value().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return Tensor::from_op({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const double* g = self.grad.data();
    const double* av = parent_value(self, 0);
    const double* bv = parent_value(self, 1);
    if (double* ga = parent_grad(self, 0)) {
      // dA = G . B^T
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = bv + p * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (double* gb = parent_grad(self, 1)) {
      // dB = A^T . G
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = av[i * k + p];
          if (aip == 0.0) continue;
          double* gbrow = gb + p * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
        }
      }
    }
  });
}

Tensor add_row(const Tensor& x, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw ShapeMismatch("add_row: " + to_string(x.shape()) + " + " + to_string(row.shape()));
  }
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(x.value().begin(), x.value().end());
  const auto rv = row.value();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += rv[j];
  }
  return Tensor::from_op(x.shape(), std::move(out), {x, row}, [m, n](Node& self) {
    const double* g = self.grad.data();
    if (double* gx = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < m * n; ++i) gx[i] += g[i];
    }
    if (double* gr = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) gr[j] += g[i * n + j];
      }
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return add_row(matmul(x, weight), bias);
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (double* gp = parent_grad(self, p)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) gp[i] += self.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (double* ga = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    }
    if (double* gb = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const double* av = parent_value(self, 0);
    const double* bv = parent_value(self, 1);
    if (double* ga = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] * bv[i];
    }
    if (double* gb = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i] += self.grad[i] * av[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] * factor;
  return Tensor::from_op(x.shape(), std::move(out), {x}, [factor](Node& self) {
    double* gx = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i] * factor;
  });
}

Tensor mul_constant(const Tensor& x, std::span<const double> factors) {
  if (factors.size() != x.size()) throw ShapeMismatch("mul_constant: factor count");
  std::vector<double> f(factors.begin(), factors.end());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] * f[i];
  return Tensor::from_op(x.shape(), std::move(out), {x}, [f = std::move(f)](Node& self) {
    double* gx = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i] * f[i];
  });
}

Tensor scale_rows(const Tensor& x, std::span<const double> factors) {
  if (factors.size() != x.rows()) throw ShapeMismatch("scale_rows: factor count");
  std::vector<double> f(x.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::fill_n(f.begin() + static_cast<std::ptrdiff_t>(r * x.cols()), x.cols(), factors[r]);
  }
  return mul_constant(x, f);
}

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
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

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor softplus(const Tensor& x) {
  return unary(
      x, [](double v) { return softplus(v); },
      [](double v, double) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_cols: no inputs");
  const std::size_t m = parts.front().rows();
  std::vector<std::size_t> offsets;
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p.rows() != m) throw ShapeMismatch("concat_cols: row count mismatch");
    offsets.push_back(n);
    n += p.cols();
  }
  std::vector<double> out(m * n);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto v = parts[k].value();
    const std::size_t c = parts[k].cols();
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(v.data() + i * c, c, out.data() + i * n + offsets[k]);
    }
  }
  return Tensor::from_op({m, n}, std::move(out), parts, [m, n, offsets](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      double* gp = parent_grad(self, k);
      if (!gp) continue;
      const std::size_t c = self.parents[k]->cols();
      for (std::size_t i = 0; i < m; ++i) {
        const double* g = self.grad.data() + i * n + offsets[k];
        for (std::size_t j = 0; j < c; ++j) gp[i * c + j] += g[j];
      }
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_rows: no inputs");
  const std::size_t n = parts.front().cols();
  std::vector<double> out;
  for (const auto& p : parts) {
    if (p.cols() != n) throw ShapeMismatch("concat_rows: column count mismatch");
    out.insert(out.end(), p.value().begin(), p.value().end());
  }
  const std::size_t m = out.size() / std::max<std::size_t>(n, 1);
  return Tensor::from_op({m, n}, std::move(out), parts, [](Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      const std::size_t len = self.parents[k]->value.size();
      if (double* gp = parent_grad(self, k)) {
        for (std::size_t i = 0; i < len; ++i) gp[i] += self.grad[offset + i];
      }
      offset += len;
    }
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.cols()) throw ShapeMismatch("slice_cols: out of range");
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(m * count);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(x.value().data() + i * n + begin, count, out.data() + i * count);
  }
  return Tensor::from_op({m, count}, std::move(out), {x}, [m, n, begin, count](Node& self) {
    double* gx = parent_grad(self, 0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < count; ++j) gx[i * n + begin + j] += self.grad[i * count + j];
    }
  });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.rows()) throw ShapeMismatch("slice_rows: out of range");
  const std::size_t n = x.cols();
  std::vector<double> out(x.value().begin() + static_cast<std::ptrdiff_t>(begin * n),
                          x.value().begin() + static_cast<std::ptrdiff_t>((begin + count) * n));
  return Tensor::from_op({count, n}, std::move(out), {x}, [begin, n](Node& self) {
    double* gx = parent_grad(self, 0) + begin * n;
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
  });
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  const std::size_t n = table.cols();
  std::vector<double> out(ids.size() * n);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= table.rows()) {
      throw ShapeMismatch("gather_rows: id out of range");
    }
    std::copy_n(table.value().data() + static_cast<std::size_t>(ids[i]) * n, n,
                out.data() + i * n);
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return Tensor::from_op({ids.size(), n}, std::move(out), {table},
                         [idx = std::move(idx), n](Node& self) {
                           double* gt = parent_grad(self, 0);
                           for (std::size_t i = 0; i < idx.size(); ++i) {
                             double* row = gt + static_cast<std::size_t>(idx[i]) * n;
                             for (std::size_t j = 0; j < n; ++j) row[j] += self.grad[i * n + j];
                           }
                         });
}

Tensor im2col(const Tensor& x, std::size_t kernel) {
  if (kernel % 2 == 0) throw ShapeMismatch("im2col: kernel must be odd");
  const std::size_t t_len = x.rows(), c = x.cols();
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kernel / 2);
  const std::size_t width = kernel * c;
  std::vector<double> out(t_len * width, 0.0);
  const double* xv = x.value().data();
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t k = 0; k < kernel; ++k) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(k) - half;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_len)) continue;
      std::copy_n(xv + static_cast<std::size_t>(src) * c, c, out.data() + t * width + k * c);
    }
  }
  return Tensor::from_op({t_len, width}, std::move(out), {x},
                         [t_len, c, kernel, half, width](Node& self) {
                           double* gx = parent_grad(self, 0);
                           for (std::size_t t = 0; t < t_len; ++t) {
                             for (std::size_t k = 0; k < kernel; ++k) {
                               const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) +
                                                          static_cast<std::ptrdiff_t>(k) - half;
                               if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_len)) continue;
                               const double* g = self.grad.data() + t * width + k * c;
                               double* dst = gx + static_cast<std::size_t>(src) * c;
                               for (std::size_t j = 0; j < c; ++j) dst[j] += g[j];
                             }
                           }
                         });
}

Tensor reverse_rows(const Tensor& x) {
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(x.value().data() + (m - 1 - i) * n, n, out.data() + i * n);
  }
  return Tensor::from_op(x.shape(), std::move(out), {x}, [m, n](Node& self) {
    double* gx = parent_grad(self, 0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) gx[(m - 1 - i) * n + j] += self.grad[i * n + j];
    }
  });
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t kernel) {
  if (weight.rows() != kernel * x.cols()) {
    throw ShapeMismatch("conv1d: weight " + to_string(weight.shape()) + " for input " +
                        to_string(x.shape()) + " kernel " + std::to_string(kernel));
  }
  if (kernel == 1) return linear(x, weight, bias);
  return linear(im2col(x, kernel), weight, bias);
}

Tensor dropout(const Tensor& x, double keep_prob, Rng& rng, bool active) {
  if (!active || keep_prob >= 1.0) return x;
  if (keep_prob <= 0.0) throw DataError("dropout: keep_prob must be positive");
  std::vector<double> mask(x.size());
  const double kept = 1.0 / keep_prob;
  for (auto& m : mask) m = rng.bernoulli(keep_prob) ? kept : 0.0;
  return mul_constant(x, mask);
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.value()) s += v;
  return Tensor::from_op({1, 1}, {s}, {x}, [](Node& self) {
    double* gx = parent_grad(self, 0);
    const double g = self.grad[0];
    for (std::size_t i = 0; i < self.parents[0]->value.size(); ++i) gx[i] += g;
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor mse(const Tensor& prediction, const Tensor& target) {
  require_same_shape(prediction, target, "mse");
  const std::size_t n = prediction.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = prediction.value()[i] - target.value()[i];
    acc += d * d;
  }
  return Tensor::from_op({1, 1}, {acc / static_cast<double>(n)}, {prediction, target},
                         [n](Node& self) {
                           const double* pv = parent_value(self, 0);
                           const double* tv = parent_value(self, 1);
                           const double k = 2.0 * self.grad[0] / static_cast<double>(n);
                           double* gp = parent_grad(self, 0);
                           double* gt = parent_grad(self, 1);
                           for (std::size_t i = 0; i < n; ++i) {
                             const double d = k * (pv[i] - tv[i]);
                             if (gp) gp[i] += d;
                             if (gt) gt[i] -= d;
                           }
                         });
}

}  // namespace mixtts::nn
