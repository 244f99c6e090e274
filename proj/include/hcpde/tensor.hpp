#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hcpde {

using dim_t = std::int64_t;
using Shape = std::vector<dim_t>;

dim_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

/// Dense row-major array of 64-bit floats. Value semantics; immutable by
/// convention once handed to the autodiff layer.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);
  static Tensor scalar(double v);
  static Tensor full(Shape shape, double v);

  const Shape& shape() const { return shape_; }
  dim_t rank() const { return static_cast<dim_t>(shape_.size()); }
  dim_t numel() const { return static_cast<dim_t>(data_.size()); }
  dim_t dim(int axis) const { return shape_[static_cast<size_t>(axis)]; }
  bool is_scalar() const { return data_.size() == 1; }
  double scalar_value() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](dim_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](dim_t i) const { return data_[static_cast<size_t>(i)]; }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  dim_t flat_index(std::span<const dim_t> idx) const;
  double& at(std::initializer_list<dim_t> idx);
  double at(std::initializer_list<dim_t> idx) const;

  bool all_finite() const;

private:
  Shape shape_;
  std::vector<double> data_;
};

// Strides of a row-major shape.
std::vector<dim_t> row_strides(const Shape& s);

// ---- elementwise kernels ----------------------------------------------
// Binary ops support equal shapes, scalar operands, and trailing-suffix
// broadcast (b's shape is a suffix of a's, or vice versa).
Tensor t_add(const Tensor& a, const Tensor& b);
Tensor t_sub(const Tensor& a, const Tensor& b);
Tensor t_mul(const Tensor& a, const Tensor& b);
Tensor t_div(const Tensor& a, const Tensor& b);
void add_into(Tensor& dst, const Tensor& src);  // shapes must match

Tensor t_neg(const Tensor& x);
Tensor t_exp(const Tensor& x);
Tensor t_log(const Tensor& x);
Tensor t_sin(const Tensor& x);
Tensor t_cos(const Tensor& x);
Tensor t_tanh(const Tensor& x);
Tensor t_gelu(const Tensor& x);
Tensor t_gelu_grad(const Tensor& x);
Tensor t_pow(const Tensor& x, double p);
Tensor t_clamp_min(const Tensor& x, double lo);
Tensor t_scale(const Tensor& x, double s);

// Reduce g by summation so it matches `target` (undoes broadcast).
Tensor reduce_to_shape(const Tensor& g, const Shape& target);

// ---- reductions --------------------------------------------------------
Tensor t_sum(const Tensor& x);   // rank-0 scalar
Tensor t_mean(const Tensor& x);
double t_norm2(const Tensor& x);  // Euclidean norm of the flat data
double t_dot(const Tensor& a, const Tensor& b);

// ---- linear algebra ----------------------------------------------------
// (r,k)x(k,c) -> (r,c); also (r,k)x(k) -> (r).
Tensor t_matmul(const Tensor& a, const Tensor& b);
Tensor t_transpose2(const Tensor& m);
Tensor t_diag_part(const Tensor& m);      // (n,n) -> (n)
Tensor t_diag_matrix(const Tensor& v);    // (n) -> (n,n)
// out[i,j] = m[i,j] * s[i]
Tensor t_scale_rows(const Tensor& m, const Tensor& s);

// Cholesky factor of a symmetric positive-definite matrix (lower). Throws
// on a non-positive pivot.
Tensor t_cholesky(const Tensor& spd);
Tensor t_cholesky_solve(const Tensor& chol_lower, const Tensor& rhs);

// ---- structural ops ----------------------------------------------------
Tensor t_reshape(const Tensor& x, Shape shape);
Tensor t_permute(const Tensor& x, const std::vector<int>& axes);
Tensor t_slice(const Tensor& x, const std::vector<dim_t>& start,
               const std::vector<dim_t>& stop);
// Place x into zeros(full_shape) at offset `start`; adjoint of t_slice.
Tensor t_embed(const Tensor& x, const Shape& full_shape,
               const std::vector<dim_t>& start);
Tensor t_concat(const std::vector<const Tensor*>& xs, int axis);
Tensor t_take(const Tensor& x, const std::vector<dim_t>& flat_indices);
Tensor t_scatter_add(const Shape& shape, const std::vector<dim_t>& flat_indices,
                     const Tensor& values);

// ---- stencils ----------------------------------------------------------
enum class Boundary { Zero, Periodic, Reflect };

// Correlate x with a small odd-length kernel along `axis`; out[i] =
// sum_k kernel[k] * x[i + k - len/2], boundary handled per mode (Reflect
// mirrors about the boundary node: index -1 -> 1).
Tensor t_stencil1d(const Tensor& x, int axis, const std::vector<double>& kernel,
                   Boundary mode);
Tensor t_stencil1d_adjoint(const Tensor& g, int axis,
                           const std::vector<double>& kernel, Boundary mode);
// 3x3 kernel over axes (ax0, ax1); same boundary mode on both.
Tensor t_stencil2d(const Tensor& x, int ax0, int ax1,
                   const std::vector<double>& kernel3x3, Boundary mode);
Tensor t_stencil2d_adjoint(const Tensor& g, int ax0, int ax1,
                           const std::vector<double>& kernel3x3, Boundary mode);

[[noreturn]] void shape_error(const std::string& op, const Shape& a, const Shape& b);

}  // namespace hcpde
