#include "hcpde/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hcpde {

dim_t shape_numel(const Shape& s) {
  dim_t n = 1;
  for (dim_t d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

void shape_error(const std::string& op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(op + ": incompatible shapes " + shape_str(a) +
                              " and " + shape_str(b));
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  for (dim_t d : shape_)
    if (d < 1) throw std::invalid_argument("Tensor: dimension < 1 in " + shape_str(shape_));
  data_.assign(static_cast<size_t>(shape_numel(shape_)), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (dim_t d : shape_)
    if (d < 1) throw std::invalid_argument("Tensor: dimension < 1 in " + shape_str(shape_));
  if (shape_numel(shape_) != static_cast<dim_t>(data_.size()))
    throw std::invalid_argument("Tensor: data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_str(shape_));
}

Tensor Tensor::scalar(double v) { return Tensor(Shape{}, {v}); }

Tensor Tensor::full(Shape shape, double v) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), v);
  return t;
}

double Tensor::scalar_value() const {
  if (!is_scalar()) throw std::invalid_argument("scalar_value: tensor has shape " + shape_str(shape_));
  return data_[0];
}

std::vector<dim_t> row_strides(const Shape& s) {
  std::vector<dim_t> st(s.size(), 1);
  for (int i = static_cast<int>(s.size()) - 2; i >= 0; --i)
    st[static_cast<size_t>(i)] = st[static_cast<size_t>(i) + 1] * s[static_cast<size_t>(i) + 1];
  return st;
}

dim_t Tensor::flat_index(std::span<const dim_t> idx) const {
  if (idx.size() != shape_.size())
    throw std::invalid_argument("flat_index: rank mismatch");
  dim_t f = 0;
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= shape_[i])
      throw std::out_of_range("flat_index: index out of range");
    f = f * shape_[i] + idx[i];
  }
  return f;
}

double& Tensor::at(std::initializer_list<dim_t> idx) {
  std::vector<dim_t> v(idx);
  return data_[static_cast<size_t>(flat_index(v))];
}

double Tensor::at(std::initializer_list<dim_t> idx) const {
  std::vector<dim_t> v(idx);
  return data_[static_cast<size_t>(flat_index(v))];
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

// ---- broadcast machinery -------------------------------------------------

namespace {

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

template <class F>
Tensor binary_op(const char* name, const Tensor& a, const Tensor& b, F f) {
  const dim_t na = a.numel(), nb = b.numel();
  if (a.shape() == b.shape()) {
    Tensor out(a.shape());
    double* o = out.data();
    const double* pa = a.data();
    const double* pb = b.data();
    for (dim_t i = 0; i < na; ++i) o[i] = f(pa[i], pb[i]);
    return out;
  }
  if (b.is_scalar()) {
    Tensor out(a.shape());
    const double s = b[0];
    for (dim_t i = 0; i < na; ++i) out[i] = f(a[i], s);
    return out;
  }
  if (a.is_scalar()) {
    Tensor out(b.shape());
    const double s = a[0];
    for (dim_t i = 0; i < nb; ++i) out[i] = f(s, b[i]);
    return out;
  }
  if (is_suffix(b.shape(), a.shape())) {
    Tensor out(a.shape());
    for (dim_t i = 0; i < na; ++i) out[i] = f(a[i], b[i % nb]);
    return out;
  }
  if (is_suffix(a.shape(), b.shape())) {
    Tensor out(b.shape());
    for (dim_t i = 0; i < nb; ++i) out[i] = f(a[i % na], b[i]);
    return out;
  }
  shape_error(name, a.shape(), b.shape());
}

template <class F>
Tensor unary_op(const Tensor& x, F f) {
  Tensor out(x.shape());
  const dim_t n = x.numel();
  const double* p = x.data();
  double* o = out.data();
  for (dim_t i = 0; i < n; ++i) o[i] = f(p[i]);
  return out;
}

}  // namespace

Tensor t_add(const Tensor& a, const Tensor& b) {
  return binary_op("add", a, b, [](double x, double y) { return x + y; });
}
Tensor t_sub(const Tensor& a, const Tensor& b) {
  return binary_op("sub", a, b, [](double x, double y) { return x - y; });
}
Tensor t_mul(const Tensor& a, const Tensor& b) {
  return binary_op("mul", a, b, [](double x, double y) { return x * y; });
}
Tensor t_div(const Tensor& a, const Tensor& b) {
  return binary_op("div", a, b, [](double x, double y) { return x / y; });
}

void add_into(Tensor& dst, const Tensor& src) {
  if (dst.shape() != src.shape()) shape_error("add_into", dst.shape(), src.shape());
  const dim_t n = dst.numel();
  double* d = dst.data();
  const double* s = src.data();
  for (dim_t i = 0; i < n; ++i) d[i] += s[i];
}

Tensor t_neg(const Tensor& x) { return unary_op(x, [](double v) { return -v; }); }
Tensor t_exp(const Tensor& x) { return unary_op(x, [](double v) { return std::exp(v); }); }
Tensor t_log(const Tensor& x) { return unary_op(x, [](double v) { return std::log(v); }); }
Tensor t_sin(const Tensor& x) { return unary_op(x, [](double v) { return std::sin(v); }); }
Tensor t_cos(const Tensor& x) { return unary_op(x, [](double v) { return std::cos(v); }); }
Tensor t_tanh(const Tensor& x) { return unary_op(x, [](double v) { return std::tanh(v); }); }

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Tensor t_gelu(const Tensor& x) {
  return unary_op(x, [](double v) {
    return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  });
}

Tensor t_gelu_grad(const Tensor& x) {
  return unary_op(x, [](double v) {
    const double s = kGeluC * (v + kGeluA * v * v * v);
    const double t = std::tanh(s);
    return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
  });
}

Tensor t_pow(const Tensor& x, double p) {
  return unary_op(x, [p](double v) { return std::pow(v, p); });
}

Tensor t_clamp_min(const Tensor& x, double lo) {
  return unary_op(x, [lo](double v) { return v < lo ? lo : v; });
}

Tensor t_scale(const Tensor& x, double s) {
  return unary_op(x, [s](double v) { return v * s; });
}

Tensor reduce_to_shape(const Tensor& g, const Shape& target) {
  if (g.shape() == target) return g;
  const dim_t nt = shape_numel(target);
  if (nt == 1) {
    double acc = 0.0;
    for (dim_t i = 0; i < g.numel(); ++i) acc += g[i];
    Tensor out(target);
    out[0] = acc;
    return out;
  }
  if (!is_suffix(target, g.shape())) shape_error("reduce_to_shape", g.shape(), target);
  Tensor out(target);
  const dim_t n = g.numel();
  for (dim_t i = 0; i < n; ++i) out[i % nt] += g[i];
  return out;
}

Tensor t_sum(const Tensor& x) {
  double acc = 0.0;
  for (dim_t i = 0; i < x.numel(); ++i) acc += x[i];
  return Tensor::scalar(acc);
}

Tensor t_mean(const Tensor& x) {
  return Tensor::scalar(t_sum(x)[0] / static_cast<double>(x.numel()));
}

double t_norm2(const Tensor& x) {
  double acc = 0.0;
  for (dim_t i = 0; i < x.numel(); ++i) acc += x[i] * x[i];
  return std::sqrt(acc);
}

double t_dot(const Tensor& a, const Tensor& b) {
  if (a.numel() != b.numel()) shape_error("dot", a.shape(), b.shape());
  double acc = 0.0;
  for (dim_t i = 0; i < a.numel(); ++i) acc += a[i] * b[i];
  return acc;
}

Tensor t_matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2) shape_error("matmul", a.shape(), b.shape());
  const dim_t r = a.dim(0), k = a.dim(1);
  if (b.rank() == 1) {
    if (b.dim(0) != k) shape_error("matmul", a.shape(), b.shape());
    Tensor out(Shape{r});
    const double* pa = a.data();
    const double* pb = b.data();
    for (dim_t i = 0; i < r; ++i) {
      double acc = 0.0;
      const double* row = pa + i * k;
      for (dim_t j = 0; j < k; ++j) acc += row[j] * pb[j];
      out[i] = acc;
    }
    return out;
  }
  if (b.rank() != 2 || b.dim(0) != k) shape_error("matmul", a.shape(), b.shape());
  const dim_t c = b.dim(1);
  Tensor out(Shape{r, c});
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (dim_t i = 0; i < r; ++i) {
    double* orow = po + i * c;
    for (dim_t kk = 0; kk < k; ++kk) {
      const double av = pa[i * k + kk];
      if (av == 0.0) continue;
      const double* brow = pb + kk * c;
      for (dim_t j = 0; j < c; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor t_transpose2(const Tensor& m) {
  if (m.rank() != 2) throw std::invalid_argument("transpose: rank-2 required, got " + shape_str(m.shape()));
  const dim_t r = m.dim(0), c = m.dim(1);
  Tensor out(Shape{c, r});
  for (dim_t i = 0; i < r; ++i)
    for (dim_t j = 0; j < c; ++j) out[j * r + i] = m[i * c + j];
  return out;
}

Tensor t_diag_part(const Tensor& m) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1))
    throw std::invalid_argument("diag_part: square matrix required, got " + shape_str(m.shape()));
  const dim_t n = m.dim(0);
  Tensor out(Shape{n});
  for (dim_t i = 0; i < n; ++i) out[i] = m[i * n + i];
  return out;
}

Tensor t_diag_matrix(const Tensor& v) {
  if (v.rank() != 1) throw std::invalid_argument("diag_matrix: rank-1 required");
  const dim_t n = v.dim(0);
  Tensor out(Shape{n, n});
  for (dim_t i = 0; i < n; ++i) out[i * n + i] = v[i];
  return out;
}

Tensor t_scale_rows(const Tensor& m, const Tensor& s) {
  if (m.rank() != 2 || s.rank() != 1 || s.dim(0) != m.dim(0))
    shape_error("scale_rows", m.shape(), s.shape());
  const dim_t r = m.dim(0), c = m.dim(1);
  Tensor out(Shape{r, c});
  for (dim_t i = 0; i < r; ++i) {
    const double f = s[i];
    for (dim_t j = 0; j < c; ++j) out[i * c + j] = m[i * c + j] * f;
  }
  return out;
}

Tensor t_cholesky(const Tensor& spd) {
  if (spd.rank() != 2 || spd.dim(0) != spd.dim(1))
    throw std::invalid_argument("cholesky: square matrix required, got " + shape_str(spd.shape()));
  const dim_t n = spd.dim(0);
  Tensor L(Shape{n, n});
  for (dim_t i = 0; i < n; ++i) {
    for (dim_t j = 0; j <= i; ++j) {
      // symmetrize on read so the factorization is a function of (A+A^T)/2
      double acc = 0.5 * (spd[i * n + j] + spd[j * n + i]);
      for (dim_t k = 0; k < j; ++k) acc -= L[i * n + k] * L[j * n + k];
      if (i == j) {
        if (!(acc > 0.0) || !std::isfinite(acc))
          throw std::runtime_error("cholesky: non-positive pivot " + std::to_string(acc) +
                                   " at index " + std::to_string(i));
        L[i * n + i] = std::sqrt(acc);
      } else {
        L[i * n + j] = acc / L[j * n + j];
      }
    }
  }
  return L;
}

Tensor t_cholesky_solve(const Tensor& L, const Tensor& rhs) {
  const dim_t n = L.dim(0);
  const bool vec = rhs.rank() == 1;
  const dim_t c = vec ? 1 : rhs.dim(1);
  if ((vec ? rhs.dim(0) : rhs.dim(0)) != n) shape_error("cholesky_solve", L.shape(), rhs.shape());
  Tensor x = rhs;
  // forward: L y = rhs
  for (dim_t col = 0; col < c; ++col) {
    for (dim_t i = 0; i < n; ++i) {
      double acc = x[i * c + col];
      for (dim_t k = 0; k < i; ++k) acc -= L[i * n + k] * x[k * c + col];
      x[i * c + col] = acc / L[i * n + i];
    }
    // backward: L^T x = y
    for (dim_t i = n - 1; i >= 0; --i) {
      double acc = x[i * c + col];
      for (dim_t k = i + 1; k < n; ++k) acc -= L[k * n + i] * x[k * c + col];
      x[i * c + col] = acc / L[i * n + i];
    }
  }
  return x;
}

Tensor t_reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) shape_error("reshape", x.shape(), shape);
  return Tensor(std::move(shape), x.vec());
}

Tensor t_permute(const Tensor& x, const std::vector<int>& axes) {
  const size_t r = x.shape().size();
  if (axes.size() != r) throw std::invalid_argument("permute: axes rank mismatch");
  Shape ns(r);
  for (size_t i = 0; i < r; ++i) ns[i] = x.shape()[static_cast<size_t>(axes[i])];
  Tensor out(ns);
  const auto in_st = row_strides(x.shape());
  const auto out_st = row_strides(ns);
  std::vector<dim_t> idx(r, 0);
  const dim_t n = x.numel();
  for (dim_t f = 0; f < n; ++f) {
    // idx enumerates the *output* multi-index
    dim_t src = 0;
    for (size_t i = 0; i < r; ++i) src += idx[i] * in_st[static_cast<size_t>(axes[i])];
    out[f] = x[src];
    for (int i = static_cast<int>(r) - 1; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < ns[static_cast<size_t>(i)]) break;
      idx[static_cast<size_t>(i)] = 0;
    }
  }
  return out;
}

namespace {

void check_window(const Tensor& x, const std::vector<dim_t>& start,
                  const std::vector<dim_t>& stop) {
  if (start.size() != x.shape().size() || stop.size() != x.shape().size())
    throw std::invalid_argument("slice: window rank mismatch");
  for (size_t i = 0; i < start.size(); ++i)
    if (start[i] < 0 || stop[i] > x.shape()[i] || start[i] >= stop[i])
      throw std::invalid_argument("slice: bad window on axis " + std::to_string(i));
}

// Iterate over all multi-indices of `shape`, invoking f(flat_in_window, multi).
template <class F>
void for_each_index(const Shape& shape, F f) {
  std::vector<dim_t> idx(shape.size(), 0);
  const dim_t n = shape_numel(shape);
  for (dim_t flat = 0; flat < n; ++flat) {
    f(flat, idx);
    for (int i = static_cast<int>(shape.size()) - 1; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < shape[static_cast<size_t>(i)]) break;
      idx[static_cast<size_t>(i)] = 0;
    }
  }
}

}  // namespace

Tensor t_slice(const Tensor& x, const std::vector<dim_t>& start,
               const std::vector<dim_t>& stop) {
  check_window(x, start, stop);
  Shape ns(start.size());
  for (size_t i = 0; i < start.size(); ++i) ns[i] = stop[i] - start[i];
  Tensor out(ns);
  const auto st = row_strides(x.shape());
  for_each_index(ns, [&](dim_t flat, const std::vector<dim_t>& idx) {
    dim_t src = 0;
    for (size_t i = 0; i < idx.size(); ++i) src += (idx[i] + start[i]) * st[i];
    out[flat] = x[src];
  });
  return out;
}

Tensor t_embed(const Tensor& x, const Shape& full_shape,
               const std::vector<dim_t>& start) {
  if (start.size() != full_shape.size() || x.shape().size() != full_shape.size())
    throw std::invalid_argument("embed: rank mismatch");
  for (size_t i = 0; i < start.size(); ++i)
    if (start[i] < 0 || start[i] + x.shape()[i] > full_shape[i])
      throw std::invalid_argument("embed: window exceeds target on axis " + std::to_string(i));
  Tensor out(full_shape);
  const auto st = row_strides(full_shape);
  for_each_index(x.shape(), [&](dim_t flat, const std::vector<dim_t>& idx) {
    dim_t dst = 0;
    for (size_t i = 0; i < idx.size(); ++i) dst += (idx[i] + start[i]) * st[i];
    out[dst] = x[flat];
  });
  return out;
}

Tensor t_concat(const std::vector<const Tensor*>& xs, int axis) {
  if (xs.empty()) throw std::invalid_argument("concat: no inputs");
  const Shape& s0 = xs[0]->shape();
  const size_t ax = static_cast<size_t>(axis);
  if (ax >= s0.size()) throw std::invalid_argument("concat: bad axis");
  dim_t total = 0;
  for (const Tensor* t : xs) {
    if (t->shape().size() != s0.size()) shape_error("concat", s0, t->shape());
    for (size_t i = 0; i < s0.size(); ++i)
      if (i != ax && t->shape()[i] != s0[i]) shape_error("concat", s0, t->shape());
    total += t->shape()[ax];
  }
  Shape ns = s0;
  ns[ax] = total;
  Tensor out(ns);
  // outer = product of dims before axis, inner = product after
  dim_t outer = 1, inner = 1;
  for (size_t i = 0; i < ax; ++i) outer *= s0[i];
  for (size_t i = ax + 1; i < s0.size(); ++i) inner *= s0[i];
  dim_t off = 0;
  for (const Tensor* t : xs) {
    const dim_t len = t->shape()[ax];
    for (dim_t o = 0; o < outer; ++o)
      for (dim_t a = 0; a < len; ++a)
        std::copy_n(t->data() + (o * len + a) * inner, inner,
                    out.data() + (o * total + off + a) * inner);
    off += len;
  }
  return out;
}

Tensor t_take(const Tensor& x, const std::vector<dim_t>& flat_indices) {
  Tensor out(Shape{static_cast<dim_t>(flat_indices.size())});
  for (size_t i = 0; i < flat_indices.size(); ++i) {
    const dim_t f = flat_indices[i];
    if (f < 0 || f >= x.numel()) throw std::out_of_range("take: index out of range");
    out[static_cast<dim_t>(i)] = x[f];
  }
  return out;
}

Tensor t_scatter_add(const Shape& shape, const std::vector<dim_t>& flat_indices,
                     const Tensor& values) {
  if (static_cast<dim_t>(flat_indices.size()) != values.numel())
    throw std::invalid_argument("scatter_add: index/value count mismatch");
  Tensor out(shape);
  for (size_t i = 0; i < flat_indices.size(); ++i)
    out[flat_indices[i]] += values[static_cast<dim_t>(i)];
  return out;
}

// ---- stencils ------------------------------------------------------------

namespace {

inline dim_t wrap_index(dim_t i, dim_t n, Boundary mode, bool& drop) {
  drop = false;
  if (i >= 0 && i < n) return i;
  switch (mode) {
    case Boundary::Zero:
      drop = true;
      return 0;
    case Boundary::Periodic:
      i %= n;
      return i < 0 ? i + n : i;
    case Boundary::Reflect:
      if (i < 0) i = -i;
      if (i >= n) i = 2 * n - 2 - i;
      if (i < 0 || i >= n) { drop = true; return 0; }
      return i;
  }
  drop = true;
  return 0;
}

template <bool Adjoint>
Tensor stencil1d_impl(const Tensor& x, int axis, const std::vector<double>& kernel,
                      Boundary mode) {
  if (kernel.size() % 2 == 0) throw std::invalid_argument("stencil1d: kernel length must be odd");
  const size_t ax = static_cast<size_t>(axis);
  if (ax >= x.shape().size()) throw std::invalid_argument("stencil1d: bad axis");
  const dim_t n = x.shape()[ax];
  const dim_t half = static_cast<dim_t>(kernel.size() / 2);
  dim_t outer = 1, inner = 1;
  for (size_t i = 0; i < ax; ++i) outer *= x.shape()[i];
  for (size_t i = ax + 1; i < x.shape().size(); ++i) inner *= x.shape()[i];
  Tensor out(x.shape());
  for (dim_t o = 0; o < outer; ++o) {
    const dim_t base = o * n * inner;
    for (dim_t i = 0; i < n; ++i) {
      for (dim_t k = -half; k <= half; ++k) {
        const double w = kernel[static_cast<size_t>(k + half)];
        if (w == 0.0) continue;
        bool drop;
        const dim_t j = wrap_index(i + k, n, mode, drop);
        if (drop) continue;
        if constexpr (Adjoint) {
          // scatter: adjoint accumulates into the gathered-from position
          for (dim_t in = 0; in < inner; ++in)
            out[base + j * inner + in] += w * x[base + i * inner + in];
        } else {
          for (dim_t in = 0; in < inner; ++in)
            out[base + i * inner + in] += w * x[base + j * inner + in];
        }
      }
    }
  }
  return out;
}

template <bool Adjoint>
Tensor stencil2d_impl(const Tensor& x, int ax0, int ax1,
                      const std::vector<double>& k9, Boundary mode) {
  if (k9.size() != 9) throw std::invalid_argument("stencil2d: 3x3 kernel required");
  const size_t a0 = static_cast<size_t>(ax0), a1 = static_cast<size_t>(ax1);
  if (a0 >= x.shape().size() || a1 >= x.shape().size() || a0 == a1)
    throw std::invalid_argument("stencil2d: bad axes");
  const auto st = row_strides(x.shape());
  const dim_t n0 = x.shape()[a0], n1 = x.shape()[a1];
  Tensor out(x.shape());
  for_each_index(x.shape(), [&](dim_t flat, const std::vector<dim_t>& idx) {
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        const double w = k9[static_cast<size_t>((di + 1) * 3 + dj + 1)];
        if (w == 0.0) continue;
        bool drop0, drop1;
        const dim_t i0 = wrap_index(idx[a0] + di, n0, mode, drop0);
        const dim_t i1 = wrap_index(idx[a1] + dj, n1, mode, drop1);
        if (drop0 || drop1) continue;
        const dim_t other = flat - idx[a0] * st[a0] - idx[a1] * st[a1] + i0 * st[a0] + i1 * st[a1];
        if constexpr (Adjoint)
          out[other] += w * x[flat];
        else
          out[flat] += w * x[other];
      }
    }
  });
  return out;
}

}  // namespace

Tensor t_stencil1d(const Tensor& x, int axis, const std::vector<double>& kernel,
                   Boundary mode) {
  return stencil1d_impl<false>(x, axis, kernel, mode);
}
Tensor t_stencil1d_adjoint(const Tensor& g, int axis, const std::vector<double>& kernel,
                           Boundary mode) {
  return stencil1d_impl<true>(g, axis, kernel, mode);
}
Tensor t_stencil2d(const Tensor& x, int ax0, int ax1, const std::vector<double>& k9,
                   Boundary mode) {
  return stencil2d_impl<false>(x, ax0, ax1, k9, mode);
}
Tensor t_stencil2d_adjoint(const Tensor& g, int ax0, int ax1, const std::vector<double>& k9,
                           Boundary mode) {
  return stencil2d_impl<true>(g, ax0, ax1, k9, mode);
}

}  // namespace hcpde
