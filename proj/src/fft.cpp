#include "hcpde/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hcpde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<cplx>& a, bool inverse) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const cplx wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

void dft_naive(std::vector<cplx>& a, bool inverse) {
  const size_t n = a.size();
  std::vector<cplx> out(n);
  for (size_t k = 0; k < n; ++k) {
    cplx acc(0.0, 0.0);
    for (size_t j = 0; j < n; ++j) {
      const double ang = (inverse ? kTwoPi : -kTwoPi) * static_cast<double>(k * j % n) /
                         static_cast<double>(n);
      acc += a[j] * cplx(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  a = std::move(out);
}

// Full complex 2-D transform of an h x w grid stored row-major.
void dft_2d(std::vector<cplx>& a, dim_t h, dim_t w, bool inverse) {
  std::vector<cplx> line;
  line.resize(static_cast<size_t>(w));
  for (dim_t i = 0; i < h; ++i) {
    std::copy_n(a.begin() + i * w, w, line.begin());
    dft_1d(line, inverse);
    std::copy_n(line.begin(), w, a.begin() + i * w);
  }
  line.resize(static_cast<size_t>(h));
  for (dim_t j = 0; j < w; ++j) {
    for (dim_t i = 0; i < h; ++i) line[static_cast<size_t>(i)] = a[i * w + j];
    dft_1d(line, inverse);
    for (dim_t i = 0; i < h; ++i) a[i * w + j] = line[static_cast<size_t>(i)];
  }
}

void check_hw(const Tensor& x) {
  if (x.rank() != 2) throw std::invalid_argument("rfft2: rank-2 input required, got " + shape_str(x.shape()));
}

}  // namespace

void dft_1d(std::vector<cplx>& a, bool inverse) {
  if (is_pow2(a.size()))
    fft_radix2(a, inverse);
  else
    dft_naive(a, inverse);
}

Tensor rfft2_kernel(const Tensor& x) {
  check_hw(x);
  const dim_t h = x.dim(0), w = x.dim(1), wh = w / 2 + 1;
  std::vector<cplx> a(static_cast<size_t>(h * w));
  for (dim_t i = 0; i < h * w; ++i) a[static_cast<size_t>(i)] = cplx(x[i], 0.0);
  dft_2d(a, h, w, false);
  Tensor out(Shape{h, wh, 2});
  for (dim_t i = 0; i < h; ++i)
    for (dim_t q = 0; q < wh; ++q) {
      out[(i * wh + q) * 2] = a[static_cast<size_t>(i * w + q)].real();
      out[(i * wh + q) * 2 + 1] = a[static_cast<size_t>(i * w + q)].imag();
    }
  return out;
}

namespace {

// Expand a half spectrum (H, Wh, 2) to the full H x W complex grid assuming
// Hermitian symmetry Z[h-p, w-q] = conj(Z[p, q]).
std::vector<cplx> hermitian_expand(const Tensor& spec, dim_t full_w) {
  const dim_t h = spec.dim(0), wh = spec.dim(1);
  std::vector<cplx> a(static_cast<size_t>(h * full_w));
  for (dim_t p = 0; p < h; ++p)
    for (dim_t q = 0; q < wh; ++q)
      a[static_cast<size_t>(p * full_w + q)] =
          cplx(spec[(p * wh + q) * 2], spec[(p * wh + q) * 2 + 1]);
  for (dim_t p = 0; p < h; ++p)
    for (dim_t q = wh; q < full_w; ++q) {
      const dim_t sp = (h - p) % h;
      const dim_t sq = full_w - q;
      a[static_cast<size_t>(p * full_w + q)] =
          std::conj(a[static_cast<size_t>(sp * full_w + sq)]);
    }
  return a;
}

}  // namespace

Tensor irfft2_kernel(const Tensor& spec, dim_t full_w) {
  if (spec.rank() != 3 || spec.dim(2) != 2)
    throw std::invalid_argument("irfft2: (H,Wh,2) input required, got " + shape_str(spec.shape()));
  const dim_t h = spec.dim(0), wh = spec.dim(1);
  if (full_w / 2 + 1 != wh) throw std::invalid_argument("irfft2: W/Wh mismatch");
  auto a = hermitian_expand(spec, full_w);
  dft_2d(a, h, full_w, true);
  const double scale = 1.0 / static_cast<double>(h * full_w);
  Tensor out(Shape{h, full_w});
  for (dim_t i = 0; i < h * full_w; ++i) out[i] = a[static_cast<size_t>(i)].real() * scale;
  return out;
}

Tensor rfft2_adjoint(const Tensor& gspec, dim_t full_w) {
  // adjoint of x -> half spectrum: g_x[h,w] = Re sum_{pq in half} conj(g)[pq] e^{+i theta}
  const dim_t h = gspec.dim(0), wh = gspec.dim(1);
  std::vector<cplx> a(static_cast<size_t>(h * full_w), cplx(0.0, 0.0));
  for (dim_t p = 0; p < h; ++p)
    for (dim_t q = 0; q < wh; ++q)
      a[static_cast<size_t>(p * full_w + q)] =
          cplx(gspec[(p * wh + q) * 2], -gspec[(p * wh + q) * 2 + 1]);
  dft_2d(a, h, full_w, true);
  Tensor out(Shape{h, full_w});
  for (dim_t i = 0; i < h * full_w; ++i) out[i] = a[static_cast<size_t>(i)].real();
  return out;
}

Tensor irfft2_adjoint(const Tensor& gx) {
  // adjoint of the concrete irfft2 map above (including the Hermitian
  // expansion and 1/(HW) scaling): forward DFT of g, folded back onto the
  // half spectrum with conjugate weights on the mirrored entries.
  check_hw(gx);
  const dim_t h = gx.dim(0), w = gx.dim(1), wh = w / 2 + 1;
  std::vector<cplx> a(static_cast<size_t>(h * w));
  const double scale = 1.0 / static_cast<double>(h * w);
  for (dim_t i = 0; i < h * w; ++i) a[static_cast<size_t>(i)] = cplx(gx[i] * scale, 0.0);
  dft_2d(a, h, w, true);  // e^{+i theta} sums, matching the expansion
  Tensor out(Shape{h, wh, 2});
  for (dim_t p = 0; p < h; ++p)
    for (dim_t q = 0; q < wh; ++q) {
      cplx g = a[static_cast<size_t>(p * w + q)];
      const dim_t mq = (w - q) % w;
      if (mq >= wh) {
        // this half-spectrum entry also fed the mirrored full-grid slot
        const dim_t sp = (h - p) % h;
        g += std::conj(a[static_cast<size_t>(sp * w + mq)]);
      }
      out[(p * wh + q) * 2] = g.real();
      out[(p * wh + q) * 2 + 1] = g.imag();
    }
  return out;
}

SpectralMultiplier SpectralMultiplier::conj() const {
  SpectralMultiplier out = *this;
  const dim_t n = out.m.numel();
  for (dim_t i = 1; i < n; i += 2) out.m[i] = -out.m[i];
  return out;
}

namespace {

SpectralMultiplier make_mult(dim_t h, dim_t w, double lx, double ly,
                             cplx (*f)(double kx, double ky, bool nyq)) {
  SpectralMultiplier out;
  out.h = h;
  out.w = w;
  const dim_t wh = w / 2 + 1;
  out.m = Tensor(Shape{h, wh, 2});
  for (dim_t p = 0; p < h; ++p) {
    const dim_t fp = signed_freq(p, h);
    for (dim_t q = 0; q < wh; ++q) {
      const double kx = kTwoPi * static_cast<double>(fp) / lx;
      const double ky = kTwoPi * static_cast<double>(q) / ly;
      const bool nyq = (h % 2 == 0 && p == h / 2) || (w % 2 == 0 && q == w / 2);
      const cplx v = f(kx, ky, nyq);
      out.m[(p * wh + q) * 2] = v.real();
      out.m[(p * wh + q) * 2 + 1] = v.imag();
    }
  }
  return out;
}

}  // namespace

SpectralMultiplier mult_ddx(dim_t h, dim_t w, double lx, double ly) {
  return make_mult(h, w, lx, ly, [](double kx, double, bool nyq) {
    return nyq ? cplx(0, 0) : cplx(0, kx);
  });
}

SpectralMultiplier mult_ddy(dim_t h, dim_t w, double lx, double ly) {
  return make_mult(h, w, lx, ly, [](double, double ky, bool nyq) {
    return nyq ? cplx(0, 0) : cplx(0, ky);
  });
}

SpectralMultiplier mult_laplace(dim_t h, dim_t w, double lx, double ly) {
  return make_mult(h, w, lx, ly, [](double kx, double ky, bool) {
    return cplx(-(kx * kx + ky * ky), 0);
  });
}

SpectralMultiplier mult_inv_neg_laplace(dim_t h, dim_t w, double lx, double ly) {
  return make_mult(h, w, lx, ly, [](double kx, double ky, bool) {
    const double k2 = kx * kx + ky * ky;
    return k2 == 0.0 ? cplx(0, 0) : cplx(1.0 / k2, 0);
  });
}

SpectralMultiplier mult_velocity_u(dim_t h, dim_t w, double lx, double ly) {
  return make_mult(h, w, lx, ly, [](double kx, double ky, bool nyq) {
    const double k2 = kx * kx + ky * ky;
    if (k2 == 0.0 || nyq) return cplx(0, 0);
    return cplx(0, ky / k2);
  });
}

SpectralMultiplier mult_velocity_v(dim_t h, dim_t w, double lx, double ly) {
  return make_mult(h, w, lx, ly, [](double kx, double ky, bool nyq) {
    const double k2 = kx * kx + ky * ky;
    if (k2 == 0.0 || nyq) return cplx(0, 0);
    return cplx(0, -kx / k2);
  });
}

Tensor fourier_multiply_kernel(const Tensor& x, const SpectralMultiplier& m) {
  if (x.rank() < 2 || x.dim(0) != m.h || x.dim(1) != m.w)
    throw std::invalid_argument("fourier_multiply: leading axes " + shape_str(x.shape()) +
                                " do not match multiplier " + std::to_string(m.h) + "x" +
                                std::to_string(m.w));
  const dim_t h = m.h, w = m.w, wh = w / 2 + 1;
  dim_t batch = 1;
  for (int a = 2; a < x.rank(); ++a) batch *= x.dim(a);
  Tensor out(x.shape());
  Tensor slice(Shape{h, w});
  for (dim_t b = 0; b < batch; ++b) {
    for (dim_t i = 0; i < h * w; ++i) slice[i] = x[i * batch + b];
    Tensor spec = rfft2_kernel(slice);
    for (dim_t i = 0; i < h * wh; ++i) {
      const double re = spec[i * 2], im = spec[i * 2 + 1];
      const double mre = m.m[i * 2], mim = m.m[i * 2 + 1];
      spec[i * 2] = re * mre - im * mim;
      spec[i * 2 + 1] = re * mim + im * mre;
    }
    Tensor back = irfft2_kernel(spec, w);
    for (dim_t i = 0; i < h * w; ++i) out[i * batch + b] = back[i];
  }
  return out;
}

}  // namespace hcpde
