#include "ecgf/transforms.hpp"

#include <cmath>
#include <numbers>

#include "ecgf/error.hpp"

namespace ecgf {

namespace {

// W(k, m) = exp(-j 2 pi k m / n), with k*m reduced mod n before scaling so
// large products keep full precision.
ComplexMatrix twiddle(Eigen::Index n) {
  ComplexMatrix w(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index m = 0; m < n; ++m) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * m) % n) / static_cast<double>(n);
      w(k, m) = {std::cos(angle), std::sin(angle)};
    }
  }
  return w;
}

}  // namespace

ComplexMatrix dft2(const Matrix& image) {
  const ComplexMatrix rows = twiddle(image.rows());
  const ComplexMatrix cols = twiddle(image.cols());
  const ComplexMatrix f = image.cast<std::complex<double>>();
  // cols is symmetric, so right-multiplying applies the transform along n.
  return rows * f * cols;
}

ComplexMatrix dft2(const SignalImage& image) { return dft2(image.pixels()); }

Matrix fft_shift(const Matrix& m) {
  const Eigen::Index r = m.rows();
  const Eigen::Index c = m.cols();
  Matrix out(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) out((i + r / 2) % r, (j + c / 2) % c) = m(i, j);
  return out;
}

SignalImage spectrum_to_image(const ComplexMatrix& spectrum, StressLabel label) {
  const Matrix magnitude = spectrum.cwiseAbs().array().log1p().matrix();
  Matrix img = min_max_normalize(fft_shift(magnitude)).cwiseMax(0.0).cwiseMin(1.0);
  return SignalImage(std::move(img), Modality::dft, label);
}

void GaborParams::validate() const {
  if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "gabor sigma must be positive");
  if (!(freq >= 0.0)) throw Error(ErrorCode::invalid_argument, "gabor freq must be non-negative");
  if (!(amplitude > 0.0)) throw Error(ErrorCode::invalid_argument, "gabor amplitude must be positive");
  if (support < 3 || support % 2 == 0) throw Error(ErrorCode::invalid_argument, "gabor support must be odd and >= 3");
  if (!std::isfinite(omega) || !std::isfinite(theta)) throw Error(ErrorCode::invalid_argument, "gabor angles must be finite");
}

ComplexMatrix gabor_kernel(const GaborParams& p) {
  p.validate();
  const int half = (p.support - 1) / 2;
  const double pi = std::numbers::pi;
  ComplexMatrix k(p.support, p.support);
  for (int y = -half; y <= half; ++y) {
    for (int x = -half; x <= half; ++x) {
      const double envelope = p.amplitude * std::exp(-pi * p.sigma * p.sigma * (x * x + y * y));
      const double phase = 2.0 * pi * p.freq * (x * std::cos(p.omega) + y * std::sin(p.omega)) + p.theta;
      k(y + half, x + half) = std::polar(envelope, phase);
    }
  }
  return k;
}

ComplexMatrix gabor_response(const Matrix& image, const GaborParams& p) {
  p.validate();
  const int half = (p.support - 1) / 2;
  const double pi = std::numbers::pi;

  // kernel(y, x) = A e^{j theta} * gx(x) * gy(y)
  std::vector<std::complex<double>> gx(static_cast<std::size_t>(p.support));
  std::vector<std::complex<double>> gy(static_cast<std::size_t>(p.support));
  for (int t = -half; t <= half; ++t) {
    const double env = std::exp(-pi * p.sigma * p.sigma * t * t);
    gx[static_cast<std::size_t>(t + half)] = std::polar(env, 2.0 * pi * p.freq * t * std::cos(p.omega));
    gy[static_cast<std::size_t>(t + half)] = std::polar(env, 2.0 * pi * p.freq * t * std::sin(p.omega));
  }
  const std::complex<double> scale = std::polar(p.amplitude, p.theta);

  const Eigen::Index rows = image.rows();
  const Eigen::Index cols = image.cols();
  // out(i, j) = sum_{u,v} img(i - u, j - v) k(u, v); horizontal pass first.
  ComplexMatrix horizontal = ComplexMatrix::Zero(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::complex<double> acc = 0.0;
      for (int v = -half; v <= half; ++v) {
        const Eigen::Index jj = j - v;
        if (jj < 0 || jj >= cols) continue;
        acc += image(i, jj) * gx[static_cast<std::size_t>(v + half)];
      }
      horizontal(i, j) = acc;
    }
  }
  ComplexMatrix out = ComplexMatrix::Zero(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::complex<double> acc = 0.0;
      for (int u = -half; u <= half; ++u) {
        const Eigen::Index ii = i - u;
        if (ii < 0 || ii >= rows) continue;
        acc += horizontal(ii, j) * gy[static_cast<std::size_t>(u + half)];
      }
      out(i, j) = scale * acc;
    }
  }
  return out;
}

SignalImage gabor_transform(const SignalImage& image, const GaborParams& params) {
  const Matrix magnitude = gabor_response(image.pixels(), params).cwiseAbs();
  Matrix img = min_max_normalize(magnitude).cwiseMax(0.0).cwiseMin(1.0);
  return SignalImage(std::move(img), Modality::gabor, image.label());
}

SignalImage dft_transform(const SignalImage& image) { return spectrum_to_image(dft2(image), image.label()); }

}  // namespace ecgf
