#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "hcpde/fft.hpp"
#include "hcpde/tensor.hpp"

namespace hcpde {

class Tape;

/// Handle to an immutable tensor value, optionally tracked on a tape.
/// Untracked values act as constants: ops on them just compute.
class Val {
public:
  Val() = default;
  explicit Val(Tensor t) : v_(std::make_shared<Tensor>(std::move(t))) {}
  Val(double scalar) : Val(Tensor::scalar(scalar)) {}

  const Tensor& value() const { return *v_; }
  std::shared_ptr<const Tensor> ptr() const { return v_; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }
  bool tracked() const { return tape_ != nullptr; }
  bool defined() const { return v_ != nullptr; }

private:
  std::shared_ptr<const Tensor> v_;
  Tape* tape_ = nullptr;
  int node_ = -1;
  friend class Tape;
};

class Gradients;

/// Reverse-mode tape: nodes in recording order, each with a pull-back
/// closure. backward visits nodes exactly once in reverse order.
class Tape {
public:
  // Pull-back: given the cotangent of this node's output, accumulate into
  // the parents' cotangents (nullptr for untracked parents).
  using Backward = std::function<void(const Tensor& bar, const std::vector<Tensor*>& parents)>;

  Val var(Tensor t);

  Val record(Tensor out, const std::vector<const Val*>& parents, Backward fn);

  int size() const { return static_cast<int>(nodes_.size()); }

  // root must be a scalar recorded on this tape (seed 1.0).
  Gradients backward(const Val& root) const;
  // General vector-Jacobian product entry: seed must match root's shape.
  Gradients backward_seeded(const Val& root, const Tensor& seed) const;

private:
  struct Node {
    std::vector<int> parents;
    Backward fn;
    Shape shape;
  };
  std::vector<Node> nodes_;
  friend class Gradients;
};

class Gradients {
public:
  // Gradient with respect to a value on the tape; zero tensor of matching
  // shape for untouched nodes. Errors on foreign-tape values.
  const Tensor& wrt(const Val& v) const;

private:
  Gradients(const Tape* t, std::vector<Tensor> bars)
      : tape_(t), bars_(std::move(bars)) {}
  const Tape* tape_;
  mutable std::vector<Tensor> bars_;
  friend class Tape;
};

// ---- recorded primitives --------------------------------------------------

Val add(const Val& a, const Val& b);
Val sub(const Val& a, const Val& b);
Val mul(const Val& a, const Val& b);
Val div(const Val& a, const Val& b);
Val neg(const Val& x);
Val vpow(const Val& x, double p);
Val vexp(const Val& x);
Val vlog(const Val& x);
Val vsin(const Val& x);
Val vcos(const Val& x);
Val vtanh(const Val& x);
Val gelu(const Val& x);
Val clamp_min(const Val& x, double lo);
Val vsum(const Val& x);
Val vmean(const Val& x);
Val matmul(const Val& a, const Val& b);
Val reshape(const Val& x, Shape shape);
Val transpose2(const Val& m);
Val permute(const Val& x, std::vector<int> axes);
Val slice(const Val& x, std::vector<dim_t> start, std::vector<dim_t> stop);
Val embed(const Val& x, Shape full_shape, std::vector<dim_t> start);
Val concat(const std::vector<Val>& xs, int axis);
Val take(const Val& x, std::vector<dim_t> flat_indices);
Val scale_rows(const Val& m, const Val& s);
Val diag_part(const Val& m);
Val diag_matrix(const Val& v);
Val stencil1d(const Val& x, int axis, std::vector<double> kernel, Boundary mode);
Val stencil2d(const Val& x, int ax0, int ax1, std::vector<double> kernel3x3, Boundary mode);
Val rfft2(const Val& x);
Val irfft2(const Val& spec, dim_t full_w);
Val fourier_multiply(const Val& x, const SpectralMultiplier& m);
// Differentiable solve of (sym(A)) x = b for SPD sym(A); the factorization
// is reused in the pull-back.
Val spd_solve(const Val& a, const Val& b);

inline Val operator+(const Val& a, const Val& b) { return add(a, b); }
inline Val operator-(const Val& a, const Val& b) { return sub(a, b); }
inline Val operator*(const Val& a, const Val& b) { return mul(a, b); }
inline Val operator/(const Val& a, const Val& b) { return div(a, b); }
inline Val operator-(const Val& x) { return neg(x); }

// Jacobian of f at x, shape (out_numel, in_numel): row i is the gradient of
// f(x)[i]. Intended for small problems and tests.
Tensor jacobian(const std::function<Val(const Val&)>& f, const Tensor& x);

}  // namespace hcpde
