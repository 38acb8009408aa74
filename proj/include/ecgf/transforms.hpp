#pragma once

#include <Eigen/Core>
#include <complex>

#include "ecgf/imaging.hpp"

namespace ecgf {

using ComplexMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Unnormalized forward 2D DFT,
///   F(k,l) = sum_m sum_n f(m,n) exp(-j 2 pi (k m / a + l n / b)),
/// computed as two dense twiddle-matrix products. Works for any size.
ComplexMatrix dft2(const Matrix& image);
ComplexMatrix dft2(const SignalImage& image);

/// Moves the zero-frequency bin to (rows/2, cols/2).
Matrix fft_shift(const Matrix& m);

/// log(1 + |F|), DC-centered, min-max normalized.
SignalImage spectrum_to_image(const ComplexMatrix& spectrum, StressLabel label);

struct GaborParams {
  double sigma = 0.1;      // envelope spread
  double freq = 0.1;       // cycles per pixel
  double omega = 0.0;      // orientation, rad
  double theta = 0.0;      // phase, rad
  double amplitude = 1.0;  // envelope magnitude
  int support = 31;        // odd kernel side

  void validate() const;
};

/// kernel(y, x) = A exp(-pi sigma^2 (x^2 + y^2)) exp(j (2 pi F (x cos w + y sin w) + theta))
/// on the integer grid centered at the middle element.
ComplexMatrix gabor_kernel(const GaborParams& params);

/// Same-size, zero-padded complex convolution of `image` with the kernel.
/// Uses the kernel's rank-one factorization into two 1D passes.
ComplexMatrix gabor_response(const Matrix& image, const GaborParams& params);

/// |gabor_response| min-max normalized to [0,1].
SignalImage gabor_transform(const SignalImage& image, const GaborParams& params = {});

/// DFT modality straight from a spatial image.
SignalImage dft_transform(const SignalImage& image);

}  // namespace ecgf
