#pragma once

#include <complex>
#include <vector>

#include "hcpde/tensor.hpp"

namespace hcpde {

using cplx = std::complex<double>;

// Unnormalized DFT along a contiguous array: X[k] = sum_j x[j] e^{-2pi i jk/n}
// (inverse flips the sign and does NOT divide by n). Radix-2 when n is a
// power of two, plain O(n^2) otherwise.
void dft_1d(std::vector<cplx>& a, bool inverse);

// Real 2-D FFT of a (H, W) tensor -> (H, W/2+1, 2) with interleaved re/im.
Tensor rfft2_kernel(const Tensor& x);
// Inverse of rfft2_kernel; needs the original W to undo the fold.
Tensor irfft2_kernel(const Tensor& spec, dim_t full_w);
// Exact adjoints of the two maps above (as real-linear operators).
Tensor rfft2_adjoint(const Tensor& gspec, dim_t full_w);
Tensor irfft2_adjoint(const Tensor& gx);

// Half-spectrum multiplier field for a (H, W) slice, interleaved re/im with
// shape (H, W/2+1, 2).
struct SpectralMultiplier {
  Tensor m;  // (H, Wh, 2)
  dim_t h = 0, w = 0;
  SpectralMultiplier conj() const;
};

// Signed integer frequency for index p of an n-point axis.
inline dim_t signed_freq(dim_t p, dim_t n) { return p <= n / 2 ? p : p - n; }

// Multipliers for periodic derivatives / inverse Laplacian on extents
// (Lx, Ly). Nyquist rows are zeroed for the odd-derivative operators.
SpectralMultiplier mult_ddx(dim_t h, dim_t w, double lx, double ly);
SpectralMultiplier mult_ddy(dim_t h, dim_t w, double lx, double ly);
SpectralMultiplier mult_laplace(dim_t h, dim_t w, double lx, double ly);
// Velocity-from-vorticity via the stream function: u = d(psi)/dy,
// v = -d(psi)/dx with lap(psi) = -w. Mean mode maps to zero.
SpectralMultiplier mult_velocity_u(dim_t h, dim_t w, double lx, double ly);
SpectralMultiplier mult_velocity_v(dim_t h, dim_t w, double lx, double ly);
// Inverse Laplacian (zero mean gauge): psi from -w is mult_inv_neg_laplace.
SpectralMultiplier mult_inv_neg_laplace(dim_t h, dim_t w, double lx, double ly);

// Apply irfft2(M * rfft2(slice)) independently to every (H, W) leading slice
// of x (trailing axes are batch). Linear in x; its adjoint is the same map
// with the conjugate multiplier.
Tensor fourier_multiply_kernel(const Tensor& x, const SpectralMultiplier& m);

}  // namespace hcpde
