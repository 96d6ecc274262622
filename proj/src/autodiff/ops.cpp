#include "hme/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hme/kernels/kernels.hpp"
#include "hme/util/error.hpp"
#include "hme/util/random.hpp"

namespace hme::ad {
namespace {

void require_matrix(const Tensor& t, const char* op) {
  if (t.dim() != 2)
    throw ShapeError(std::string(op) + " expects a matrix, got " + shape_string(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
}

// Gradient buffer of input k, or empty if that input does not need one.
std::span<Real> input_grad(Node& self, std::size_t k) {
  Node& in = *self.inputs[k];
  return in.requires_grad ? in.grad_buffer() : std::span<Real>{};
}

const std::vector<Real>& input_value(Node& self, std::size_t k) { return self.inputs[k]->value; }

// Row count and row width of a vector or matrix, treating vectors as one row.
std::pair<std::size_t, std::size_t> as_rows(const Tensor& t) {
  if (t.dim() == 1) return {1, t.size()};
  return {t.rows(), t.cols()};
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k)
    throw ShapeError("matmul: inner dimensions differ " + shape_string(a.shape()) + " * " +
                     shape_string(b.shape()));
  std::vector<Real> out(m * n, 0.0);
  kernels::gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  return make_result("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const Real* g = self.grad.data();
    if (auto ga = input_grad(self, 0); !ga.empty())
      kernels::gemm_nt(g, input_value(self, 1).data(), ga.data(), m, n, k);
    if (auto gb = input_grad(self, 1); !gb.empty())
      kernels::gemm_tn(input_value(self, 0).data(), g, gb.data(), k, m, n);
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k)
    throw ShapeError("matmul_nt: inner dimensions differ " + shape_string(a.shape()) + " * " +
                     shape_string(b.shape()) + "^T");
  std::vector<Real> out(m * n, 0.0);
  kernels::gemm_nt(a.data().data(), b.data().data(), out.data(), m, k, n);
  return make_result("matmul_nt", {m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const Real* g = self.grad.data();
    // C = A B^T: dA = G B, dB = G^T A
    if (auto ga = input_grad(self, 0); !ga.empty())
      kernels::gemm_nn(g, input_value(self, 1).data(), ga.data(), m, n, k);
    if (auto gb = input_grad(self, 1); !gb.empty())
      kernels::gemm_tn(g, input_value(self, 0).data(), gb.data(), n, m, k);
  });
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<Real> out(m * n);
  const auto in = a.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = in[i * n + j];
  return make_result("transpose", {n, m}, std::move(out), {a}, [m, n](Node& self) {
    auto ga = input_grad(self, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += self.grad[j * m + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<Real> out(a.size());
  kernels::add(a.data().data(), b.data().data(), out.data(), out.size());
  return make_result("add", a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k)
      if (auto g = input_grad(self, k); !g.empty())
        kernels::axpy(1.0, self.grad.data(), g.data(), g.size());
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<Real> out(a.size());
  const auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return make_result("sub", a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (auto g = input_grad(self, 0); !g.empty())
      kernels::axpy(1.0, self.grad.data(), g.data(), g.size());
    if (auto g = input_grad(self, 1); !g.empty())
      kernels::axpy(-1.0, self.grad.data(), g.data(), g.size());
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<Real> out(a.size());
  kernels::mul(a.data().data(), b.data().data(), out.data(), out.size());
  return make_result("mul", a.shape(), std::move(out), {a, b}, [](Node& self) {
    const std::size_t n = self.grad.size();
    if (auto g = input_grad(self, 0); !g.empty()) {
      const auto& y = input_value(self, 1);
      for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[i] * y[i];
    }
    if (auto g = input_grad(self, 1); !g.empty()) {
      const auto& x = input_value(self, 0);
      for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[i] * x[i];
    }
  });
}

Tensor scale(const Tensor& a, Real factor) {
  std::vector<Real> out(a.data().begin(), a.data().end());
  for (Real& v : out) v *= factor;
  return make_result("scale", a.shape(), std::move(out), {a}, [factor](Node& self) {
    auto g = input_grad(self, 0);
    kernels::axpy(factor, self.grad.data(), g.data(), g.size());
  });
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  const auto [m, n] = as_rows(a);
  if (bias.size() != n)
    throw ShapeError("add_row: bias " + shape_string(bias.shape()) + " does not fit rows of " +
                     shape_string(a.shape()));
  std::vector<Real> out(a.data().begin(), a.data().end());
  for (std::size_t i = 0; i < m; ++i)
    kernels::add(out.data() + i * n, bias.data().data(), out.data() + i * n, n);
  return make_result("add_row", a.shape(), std::move(out), {a, bias}, [m, n](Node& self) {
    if (auto g = input_grad(self, 0); !g.empty())
      kernels::axpy(1.0, self.grad.data(), g.data(), g.size());
    if (auto g = input_grad(self, 1); !g.empty())
      for (std::size_t i = 0; i < m; ++i) kernels::axpy(1.0, self.grad.data() + i * n, g.data(), n);
  });
}

Tensor mul_row(const Tensor& a, const Tensor& gain) {
  const auto [m, n] = as_rows(a);
  if (gain.size() != n)
    throw ShapeError("mul_row: gain " + shape_string(gain.shape()) + " does not fit rows of " +
                     shape_string(a.shape()));
  std::vector<Real> out(a.size());
  for (std::size_t i = 0; i < m; ++i)
    kernels::mul(a.data().data() + i * n, gain.data().data(), out.data() + i * n, n);
  return make_result("mul_row", a.shape(), std::move(out), {a, gain}, [m, n](Node& self) {
    const auto& x = input_value(self, 0);
    const auto& w = input_value(self, 1);
    if (auto g = input_grad(self, 0); !g.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i * n + j] * w[j];
    if (auto g = input_grad(self, 1); !g.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j] * x[i * n + j];
  });
}

Tensor scale_rows(const Tensor& a, const Tensor& weights) {
  const auto [m, n] = as_rows(a);
  if (weights.size() != m)
    throw ShapeError("scale_rows: weights " + shape_string(weights.shape()) +
                     " do not match the rows of " + shape_string(a.shape()));
  std::vector<Real> out(a.data().begin(), a.data().end());
  const auto w = weights.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] *= w[i];
  return make_result("scale_rows", a.shape(), std::move(out), {a, weights}, [m, n](Node& self) {
    const auto& x = input_value(self, 0);
    const auto& w = input_value(self, 1);
    if (auto g = input_grad(self, 0); !g.empty())
      for (std::size_t i = 0; i < m; ++i)
        kernels::axpy(w[i], self.grad.data() + i * n, g.data() + i * n, n);
    if (auto g = input_grad(self, 1); !g.empty())
      for (std::size_t i = 0; i < m; ++i)
        g[i] += kernels::dot(self.grad.data() + i * n, x.data() + i * n, n);
  });
}

Tensor tanh(const Tensor& a) {
  std::vector<Real> out(a.size());
  const auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x[i]);
  return make_result("tanh", a.shape(), std::move(out), {a}, [](Node& self) {
    auto g = input_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] += self.grad[i] * (1.0 - self.value[i] * self.value[i]);
  });
}

Tensor relu(const Tensor& a) {
  std::vector<Real> out(a.size());
  const auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return make_result("relu", a.shape(), std::move(out), {a}, [](Node& self) {
    auto g = input_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (self.value[i] > 0.0) g[i] += self.grad[i];
  });
}

Tensor softmax(const Tensor& a, std::size_t axis) {
  const Shape& shape = a.shape();
  if (axis >= shape.size())
    throw ShapeError("softmax: axis " + std::to_string(axis) + " out of range for " +
                     shape_string(shape));
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[axis];
  const auto x = a.data();
  std::vector<Real> out(a.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      Real mx = x[base];
      for (std::size_t l = 1; l < len; ++l) mx = std::max(mx, x[base + l * inner]);
      Real total = 0.0;
      for (std::size_t l = 0; l < len; ++l) {
        const Real e = std::exp(x[base + l * inner] - mx);
        out[base + l * inner] = e;
        total += e;
      }
      for (std::size_t l = 0; l < len; ++l) out[base + l * inner] /= total;
    }
  }
  return make_result("softmax", shape, std::move(out), {a}, [outer, inner, len](Node& self) {
    auto g = input_grad(self, 0);
    const auto& y = self.value;
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * len * inner + in;
        Real dot = 0.0;
        for (std::size_t l = 0; l < len; ++l)
          dot += self.grad[base + l * inner] * y[base + l * inner];
        for (std::size_t l = 0; l < len; ++l) {
          const std::size_t idx = base + l * inner;
          g[idx] += y[idx] * (self.grad[idx] - dot);
        }
      }
    }
  });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis > 1) throw ShapeError("concat: axis must be 0 or 1");
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  if (axis == 0) {
    const std::size_t width = as_rows(parts[0]).second;
    const bool vectors = parts[0].dim() == 1;
    std::size_t total_rows = 0;
    std::vector<Real> out;
    for (const Tensor& p : parts) {
      if ((p.dim() == 1) != vectors || as_rows(p).second != width)
        throw ShapeError("concat(axis=0): incompatible shape " + shape_string(p.shape()));
      total_rows += as_rows(p).first;
      out.insert(out.end(), p.data().begin(), p.data().end());
    }
    Shape shape = vectors ? Shape{out.size()} : Shape{total_rows, width};
    return make_result("concat", std::move(shape), std::move(out), std::move(inputs),
                       [](Node& self) {
                         std::size_t offset = 0;
                         for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                           const std::size_t n = self.inputs[k]->value.size();
                           if (auto g = input_grad(self, k); !g.empty())
                             kernels::axpy(1.0, self.grad.data() + offset, g.data(), n);
                           offset += n;
                         }
                       });
  }
  const std::size_t m = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.dim() != 2 || p.rows() != m)
      throw ShapeError("concat(axis=1): incompatible shape " + shape_string(p.shape()));
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<Real> out(m * total);
  std::size_t col = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto src = parts[k].data();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(src.data() + i * widths[k], widths[k], out.data() + i * total + col);
    col += widths[k];
  }
  return make_result("concat", {m, total}, std::move(out), std::move(inputs),
                     [m, total, widths](Node& self) {
                       std::size_t c = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         if (auto g = input_grad(self, k); !g.empty())
                           for (std::size_t i = 0; i < m; ++i)
                             kernels::axpy(1.0, self.grad.data() + i * total + c,
                                           g.data() + i * widths[k], widths[k]);
                         c += widths[k];
                       }
                     });
}

Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  const auto [m, n] = as_rows(a);
  if (a.dim() == 1) {
    if (begin >= end || end > n) throw ShapeError("slice_rows: bad range on a vector");
    std::vector<Real> out(a.data().begin() + begin, a.data().begin() + end);
    return make_result("slice", {end - begin}, std::move(out), {a}, [begin](Node& self) {
      auto g = input_grad(self, 0);
      kernels::axpy(1.0, self.grad.data(), g.data() + begin, self.grad.size());
    });
  }
  if (begin >= end || end > m)
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") outside " + shape_string(a.shape()));
  std::vector<Real> out(a.data().begin() + begin * n, a.data().begin() + end * n);
  return make_result("slice_rows", {end - begin, n}, std::move(out), {a}, [begin, n](Node& self) {
    auto g = input_grad(self, 0);
    kernels::axpy(1.0, self.grad.data(), g.data() + begin * n, self.grad.size());
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_matrix(a, "slice_cols");
  const std::size_t m = a.rows(), n = a.cols();
  if (begin >= end || end > n)
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") outside " + shape_string(a.shape()));
  const std::size_t w = end - begin;
  std::vector<Real> out(m * w);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(a.data().data() + i * n + begin, w, out.data() + i * w);
  return make_result("slice_cols", {m, w}, std::move(out), {a}, [m, n, w, begin](Node& self) {
    auto g = input_grad(self, 0);
    for (std::size_t i = 0; i < m; ++i)
      kernels::axpy(1.0, self.grad.data() + i * w, g.data() + i * n + begin, w);
  });
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices) {
  require_matrix(table, "gather_rows");
  if (indices.empty()) throw ShapeError("gather_rows: no indices");
  const std::size_t v = table.rows(), d = table.cols();
  std::vector<Real> out(indices.size() * d);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= v)
      throw ShapeError("gather_rows: index " + std::to_string(indices[r]) + " outside table of " +
                       std::to_string(v) + " rows");
    std::copy_n(table.data().data() + indices[r] * d, d, out.data() + r * d);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  Shape shape{idx.size(), d};
  return make_result("gather_rows", std::move(shape), std::move(out), {table},
                     [idx = std::move(idx), d](Node& self) {
                       auto g = input_grad(self, 0);
                       for (std::size_t r = 0; r < idx.size(); ++r)
                         kernels::axpy(1.0, self.grad.data() + r * d, g.data() + idx[r] * d, d);
                     });
}

Tensor sum(const Tensor& a) {
  Real total = 0.0;
  for (Real v : a.data()) total += v;
  return make_result("sum", {1}, {total}, {a}, [](Node& self) {
    auto g = input_grad(self, 0);
    for (Real& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  Real total = 0.0;
  for (Real v : a.data()) total += v;
  const Real n = static_cast<Real>(a.size());
  return make_result("mean", {1}, {total / n}, {a}, [n](Node& self) {
    auto g = input_grad(self, 0);
    for (Real& v : g) v += self.grad[0] / n;
  });
}

Tensor segment_mean(const Tensor& a, std::span<const std::size_t> offsets) {
  require_matrix(a, "segment_mean");
  const std::size_t s = a.rows(), d = a.cols();
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != s)
    throw ShapeError("segment_mean: offsets must run from 0 to the row count");
  const std::size_t groups = offsets.size() - 1;
  std::vector<Real> out(groups * d, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    if (offsets[g + 1] <= offsets[g]) throw ShapeError("segment_mean: empty segment");
    const Real inv = 1.0 / static_cast<Real>(offsets[g + 1] - offsets[g]);
    for (std::size_t r = offsets[g]; r < offsets[g + 1]; ++r)
      kernels::axpy(inv, a.data().data() + r * d, out.data() + g * d, d);
  }
  std::vector<std::size_t> off(offsets.begin(), offsets.end());
  return make_result("segment_mean", {groups, d}, std::move(out), {a},
                     [off = std::move(off), d](Node& self) {
                       auto grad = input_grad(self, 0);
                       for (std::size_t g = 0; g + 1 < off.size(); ++g) {
                         const Real inv = 1.0 / static_cast<Real>(off[g + 1] - off[g]);
                         for (std::size_t r = off[g]; r < off[g + 1]; ++r)
                           kernels::axpy(inv, self.grad.data() + g * d, grad.data() + r * d, d);
                       }
                     });
}

Tensor dropout(const Tensor& a, Real p, bool train, const DropoutKey& key) {
  if (!(p >= 0.0 && p < 1.0))
    throw std::invalid_argument("dropout probability must lie in [0, 1), got " +
                                std::to_string(p));
  if (!train || p == 0.0) return a;
  const Real keep = 1.0 / (1.0 - p);
  const std::uint64_t stream = hash_key(key.seed, key.op, key.step, key.call);
  std::vector<Real> mask(a.size());
  std::vector<Real> out(a.size());
  const auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    mask[i] = unit_double(splitmix64(stream ^ (i * 0xd1b54a32d192ed03ULL))) < p ? 0.0 : keep;
    out[i] = x[i] * mask[i];
  }
  return make_result("dropout", a.shape(), std::move(out), {a},
                     [mask = std::move(mask)](Node& self) {
                       auto g = input_grad(self, 0);
                       for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * mask[i];
                     });
}

Tensor layer_norm(const Tensor& a, Real eps) {
  const auto [m, n] = as_rows(a);
  const auto x = a.data();
  std::vector<Real> out(a.size());
  std::vector<Real> inv_std(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Real* row = x.data() + i * n;
    Real mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += row[j];
    mu /= static_cast<Real>(n);
    Real var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<Real>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = (row[j] - mu) * inv_std[i];
  }
  return make_result("layer_norm", a.shape(), std::move(out), {a},
                     [m, n, inv_std = std::move(inv_std)](Node& self) {
                       auto g = input_grad(self, 0);
                       const Real dn = static_cast<Real>(n);
                       for (std::size_t i = 0; i < m; ++i) {
                         const Real* dy = self.grad.data() + i * n;
                         const Real* y = self.value.data() + i * n;
                         Real mean_dy = 0.0, mean_dyy = 0.0;
                         for (std::size_t j = 0; j < n; ++j) {
                           mean_dy += dy[j];
                           mean_dyy += dy[j] * y[j];
                         }
                         mean_dy /= dn;
                         mean_dyy /= dn;
                         for (std::size_t j = 0; j < n; ++j)
                           g[i * n + j] += inv_std[i] * (dy[j] - mean_dy - y[j] * mean_dyy);
                       }
                     });
}

}  // namespace hme::ad
