#include "hcpde/autodiff.hpp"

#include <stdexcept>

namespace hcpde {

Val Tape::var(Tensor t) {
  Val v(std::move(t));
  v.tape_ = this;
  v.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{{}, nullptr, v.value().shape()});
  return v;
}

Val Tape::record(Tensor out, const std::vector<const Val*>& parents, Backward fn) {
  Val v(std::move(out));
  v.tape_ = this;
  v.node_ = static_cast<int>(nodes_.size());
  Node n;
  n.fn = std::move(fn);
  n.shape = v.value().shape();
  for (const Val* p : parents) n.parents.push_back(p->tracked() ? p->node() : -1);
  nodes_.push_back(std::move(n));
  return v;
}

Gradients Tape::backward(const Val& root) const {
  if (!root.value().is_scalar())
    throw std::invalid_argument("backward: root must be scalar, has shape " +
                                shape_str(root.value().shape()));
  return backward_seeded(root, Tensor::full(root.value().shape(), 1.0));
}

Gradients Tape::backward_seeded(const Val& root, const Tensor& seed) const {
  if (root.tape() != this) throw std::invalid_argument("backward: root is not on this tape");
  if (seed.shape() != root.value().shape())
    shape_error("backward seed", seed.shape(), root.value().shape());
  std::vector<Tensor> bars(nodes_.size());
  bars[static_cast<size_t>(root.node())] = seed;
  std::vector<Tensor*> parent_ptrs;
  for (int i = root.node(); i >= 0; --i) {
    const Node& n = nodes_[static_cast<size_t>(i)];
    Tensor& bar = bars[static_cast<size_t>(i)];
    if (bar.numel() == 0 || !n.fn) continue;
    parent_ptrs.clear();
    for (int p : n.parents) {
      if (p < 0) {
        parent_ptrs.push_back(nullptr);
        continue;
      }
      Tensor& pb = bars[static_cast<size_t>(p)];
      if (pb.numel() == 0) pb = Tensor(nodes_[static_cast<size_t>(p)].shape);
      parent_ptrs.push_back(&pb);
    }
    n.fn(bar, parent_ptrs);
  }
  return Gradients(this, std::move(bars));
}

const Tensor& Gradients::wrt(const Val& v) const {
  if (v.tape() != tape_) throw std::invalid_argument("Gradients::wrt: value not on this tape");
  Tensor& bar = bars_[static_cast<size_t>(v.node())];
  if (bar.numel() == 0) bar = Tensor(v.value().shape());
  return bar;
}

// ---- op helpers ------------------------------------------------------------

namespace {

Tape* common_tape(std::initializer_list<const Val*> vs) {
  Tape* t = nullptr;
  for (const Val* v : vs) {
    if (!v->tracked()) continue;
    if (t && t != v->tape())
      throw std::invalid_argument("op: operands recorded on different tapes");
    t = v->tape();
  }
  return t;
}

Val finish(Tensor out, std::initializer_list<const Val*> parents, Tape::Backward fn) {
  Tape* t = common_tape(parents);
  if (!t) return Val(std::move(out));
  return t->record(std::move(out), std::vector<const Val*>(parents), std::move(fn));
}

}  // namespace

Val add(const Val& a, const Val& b) {
  auto av = a.ptr(), bv = b.ptr();
  return finish(t_add(*av, *bv), {&a, &b},
                [av, bv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], reduce_to_shape(bar, av->shape()));
                  if (p[1]) add_into(*p[1], reduce_to_shape(bar, bv->shape()));
                });
}

Val sub(const Val& a, const Val& b) {
  auto av = a.ptr(), bv = b.ptr();
  return finish(t_sub(*av, *bv), {&a, &b},
                [av, bv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], reduce_to_shape(bar, av->shape()));
                  if (p[1]) add_into(*p[1], reduce_to_shape(t_neg(bar), bv->shape()));
                });
}

Val mul(const Val& a, const Val& b) {
  auto av = a.ptr(), bv = b.ptr();
  return finish(t_mul(*av, *bv), {&a, &b},
                [av, bv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], reduce_to_shape(t_mul(bar, *bv), av->shape()));
                  if (p[1]) add_into(*p[1], reduce_to_shape(t_mul(bar, *av), bv->shape()));
                });
}

Val div(const Val& a, const Val& b) {
  auto av = a.ptr(), bv = b.ptr();
  return finish(t_div(*av, *bv), {&a, &b},
                [av, bv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], reduce_to_shape(t_div(bar, *bv), av->shape()));
                  if (p[1]) {
                    Tensor g = t_neg(t_div(t_mul(bar, *av), t_mul(*bv, *bv)));
                    add_into(*p[1], reduce_to_shape(g, bv->shape()));
                  }
                });
}

Val neg(const Val& x) {
  return finish(t_neg(x.value()), {&x},
                [](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_neg(bar));
                });
}

Val vpow(const Val& x, double p) {
  auto xv = x.ptr();
  return finish(t_pow(*xv, p), {&x},
                [xv, p](const Tensor& bar, const std::vector<Tensor*>& pb) {
                  if (pb[0]) add_into(*pb[0], t_mul(bar, t_scale(t_pow(*xv, p - 1.0), p)));
                });
}

Val vexp(const Val& x) {
  auto xv = x.ptr();
  return finish(t_exp(*xv), {&x},
                [xv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_mul(bar, t_exp(*xv)));
                });
}

Val vlog(const Val& x) {
  auto xv = x.ptr();
  return finish(t_log(*xv), {&x},
                [xv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_div(bar, *xv));
                });
}

Val vsin(const Val& x) {
  auto xv = x.ptr();
  return finish(t_sin(*xv), {&x},
                [xv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_mul(bar, t_cos(*xv)));
                });
}

Val vcos(const Val& x) {
  auto xv = x.ptr();
  return finish(t_cos(*xv), {&x},
                [xv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_neg(t_mul(bar, t_sin(*xv))));
                });
}

Val vtanh(const Val& x) {
  auto xv = x.ptr();
  return finish(t_tanh(*xv), {&x},
                [xv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) {
                    Tensor t = t_tanh(*xv);
                    add_into(*p[0], t_mul(bar, t_sub(Tensor::scalar(1.0), t_mul(t, t))));
                  }
                });
}

Val gelu(const Val& x) {
  auto xv = x.ptr();
  return finish(t_gelu(*xv), {&x},
                [xv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_mul(bar, t_gelu_grad(*xv)));
                });
}

Val clamp_min(const Val& x, double lo) {
  auto xv = x.ptr();
  return finish(t_clamp_min(*xv, lo), {&x},
                [xv, lo](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) {
                    Tensor g(bar.shape());
                    for (dim_t i = 0; i < bar.numel(); ++i)
                      g[i] = (*xv)[i] > lo ? bar[i] : 0.0;
                    add_into(*p[0], g);
                  }
                });
}

Val vsum(const Val& x) {
  Shape xs = x.value().shape();
  return finish(t_sum(x.value()), {&x},
                [xs](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], Tensor::full(xs, bar[0]));
                });
}

Val vmean(const Val& x) {
  Shape xs = x.value().shape();
  const double inv = 1.0 / static_cast<double>(x.value().numel());
  return finish(t_mean(x.value()), {&x},
                [xs, inv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], Tensor::full(xs, bar[0] * inv));
                });
}

Val matmul(const Val& a, const Val& b) {
  auto av = a.ptr(), bv = b.ptr();
  return finish(t_matmul(*av, *bv), {&a, &b},
                [av, bv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (bv->rank() == 1) {
                    // (r,k) x (k) -> (r)
                    if (p[0]) {
                      const dim_t r = av->dim(0), k = av->dim(1);
                      Tensor ga(av->shape());
                      for (dim_t i = 0; i < r; ++i)
                        for (dim_t j = 0; j < k; ++j) ga[i * k + j] = bar[i] * (*bv)[j];
                      add_into(*p[0], ga);
                    }
                    if (p[1]) {
                      Tensor gb = t_matmul(t_transpose2(*av), bar);
                      add_into(*p[1], gb);
                    }
                  } else {
                    if (p[0]) add_into(*p[0], t_matmul(bar, t_transpose2(*bv)));
                    if (p[1]) add_into(*p[1], t_matmul(t_transpose2(*av), bar));
                  }
                });
}

Val reshape(const Val& x, Shape shape) {
  Shape xs = x.value().shape();
  return finish(t_reshape(x.value(), std::move(shape)), {&x},
                [xs](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_reshape(bar, xs));
                });
}

Val transpose2(const Val& m) {
  return finish(t_transpose2(m.value()), {&m},
                [](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_transpose2(bar));
                });
}

Val permute(const Val& x, std::vector<int> axes) {
  std::vector<int> inv(axes.size());
  for (size_t i = 0; i < axes.size(); ++i) inv[static_cast<size_t>(axes[i])] = static_cast<int>(i);
  return finish(t_permute(x.value(), axes), {&x},
                [inv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_permute(bar, inv));
                });
}

Val slice(const Val& x, std::vector<dim_t> start, std::vector<dim_t> stop) {
  Shape xs = x.value().shape();
  return finish(t_slice(x.value(), start, stop), {&x},
                [xs, start](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_embed(bar, xs, start));
                });
}

Val embed(const Val& x, Shape full_shape, std::vector<dim_t> start) {
  Shape xs = x.value().shape();
  return finish(t_embed(x.value(), full_shape, start), {&x},
                [xs, start](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) {
                    std::vector<dim_t> stop(start.size());
                    for (size_t i = 0; i < start.size(); ++i) stop[i] = start[i] + xs[i];
                    add_into(*p[0], t_slice(bar, start, stop));
                  }
                });
}

Val concat(const std::vector<Val>& xs, int axis) {
  std::vector<const Tensor*> ts;
  std::vector<const Val*> ps;
  std::vector<Shape> shapes;
  for (const Val& v : xs) {
    ts.push_back(&v.value());
    ps.push_back(&v);
    shapes.push_back(v.value().shape());
  }
  Tensor out = t_concat(ts, axis);
  Tape* t = nullptr;
  for (const Val& v : xs)
    if (v.tracked()) {
      if (t && t != v.tape()) throw std::invalid_argument("concat: mixed tapes");
      t = v.tape();
    }
  if (!t) return Val(std::move(out));
  return t->record(std::move(out), ps,
                   [shapes, axis](const Tensor& bar, const std::vector<Tensor*>& p) {
                     const size_t ax = static_cast<size_t>(axis);
                     std::vector<dim_t> start(bar.shape().size(), 0);
                     std::vector<dim_t> stop(bar.shape().begin(), bar.shape().end());
                     dim_t off = 0;
                     for (size_t i = 0; i < shapes.size(); ++i) {
                       start[ax] = off;
                       stop[ax] = off + shapes[i][ax];
                       if (p[i]) add_into(*p[i], t_slice(bar, start, stop));
                       off += shapes[i][ax];
                     }
                   });
}

Val take(const Val& x, std::vector<dim_t> flat_indices) {
  Shape xs = x.value().shape();
  return finish(t_take(x.value(), flat_indices), {&x},
                [xs, flat_indices](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_scatter_add(xs, flat_indices, bar));
                });
}

Val scale_rows(const Val& m, const Val& s) {
  auto mv = m.ptr(), sv = s.ptr();
  return finish(t_scale_rows(*mv, *sv), {&m, &s},
                [mv, sv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_scale_rows(bar, *sv));
                  if (p[1]) {
                    const dim_t r = mv->dim(0), c = mv->dim(1);
                    Tensor gs(Shape{r});
                    for (dim_t i = 0; i < r; ++i) {
                      double acc = 0.0;
                      for (dim_t j = 0; j < c; ++j) acc += bar[i * c + j] * (*mv)[i * c + j];
                      gs[i] = acc;
                    }
                    add_into(*p[1], gs);
                  }
                });
}

Val diag_part(const Val& m) {
  const dim_t n = m.value().dim(0);
  return finish(t_diag_part(m.value()), {&m},
                [n](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0])
                    for (dim_t i = 0; i < n; ++i) (*p[0])[i * n + i] += bar[i];
                });
}

Val diag_matrix(const Val& v) {
  const dim_t n = v.value().dim(0);
  return finish(t_diag_matrix(v.value()), {&v},
                [n](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0])
                    for (dim_t i = 0; i < n; ++i) (*p[0])[i] += bar[i * n + i];
                });
}

Val stencil1d(const Val& x, int axis, std::vector<double> kernel, Boundary mode) {
  return finish(t_stencil1d(x.value(), axis, kernel, mode), {&x},
                [axis, kernel, mode](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_stencil1d_adjoint(bar, axis, kernel, mode));
                });
}

Val stencil2d(const Val& x, int ax0, int ax1, std::vector<double> kernel3x3, Boundary mode) {
  return finish(t_stencil2d(x.value(), ax0, ax1, kernel3x3, mode), {&x},
                [ax0, ax1, kernel3x3, mode](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], t_stencil2d_adjoint(bar, ax0, ax1, kernel3x3, mode));
                });
}

Val rfft2(const Val& x) {
  const dim_t w = x.value().dim(1);
  return finish(rfft2_kernel(x.value()), {&x},
                [w](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], rfft2_adjoint(bar, w));
                });
}

Val irfft2(const Val& spec, dim_t full_w) {
  return finish(irfft2_kernel(spec.value(), full_w), {&spec},
                [](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], irfft2_adjoint(bar));
                });
}

Val fourier_multiply(const Val& x, const SpectralMultiplier& m) {
  return finish(fourier_multiply_kernel(x.value(), m), {&x},
                [m](const Tensor& bar, const std::vector<Tensor*>& p) {
                  if (p[0]) add_into(*p[0], fourier_multiply_kernel(bar, m.conj()));
                });
}

Val spd_solve(const Val& a, const Val& b) {
  Tensor L = t_cholesky(a.value());
  Tensor x = t_cholesky_solve(L, b.value());
  auto lv = std::make_shared<Tensor>(std::move(L));
  auto xv = std::make_shared<Tensor>(x);
  return finish(std::move(x), {&a, &b},
                [lv, xv](const Tensor& bar, const std::vector<Tensor*>& p) {
                  Tensor db = t_cholesky_solve(*lv, bar);
                  if (p[1]) add_into(*p[1], db);
                  if (p[0]) {
                    // dA = -sym(db x^T): chain through the symmetrize-on-read
                    const dim_t n = lv->dim(0);
                    const bool vec = xv->rank() == 1;
                    const dim_t c = vec ? 1 : xv->dim(1);
                    Tensor ga(Shape{n, n});
                    for (dim_t i = 0; i < n; ++i)
                      for (dim_t j = 0; j < n; ++j) {
                        double acc = 0.0;
                        for (dim_t k = 0; k < c; ++k)
                          acc += db[i * c + k] * (*xv)[j * c + k] +
                                 db[j * c + k] * (*xv)[i * c + k];
                        ga[i * n + j] = -0.5 * acc;
                      }
                    add_into(*p[0], ga);
                  }
                });
}

Tensor jacobian(const std::function<Val(const Val&)>& f, const Tensor& x) {
  Tape tape;
  Val xv = tape.var(x);
  Val y = f(xv);
  const dim_t out_n = y.value().numel();
  const dim_t in_n = x.numel();
  Tensor jac(Shape{out_n, in_n});
  for (dim_t i = 0; i < out_n; ++i) {
    Tensor seed(y.value().shape());
    seed[i] = 1.0;
    Gradients g = tape.backward_seeded(y, seed);
    const Tensor& gx = g.wrt(xv);
    for (dim_t j = 0; j < in_n; ++j) jac[i * in_n + j] = gx[j];
  }
  return jac;
}

}  // namespace hcpde
