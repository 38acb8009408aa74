#include "support.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "ecgf/transforms.hpp"

using namespace ecgf;
using ecgf::test::random_matrix;
using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// F(k,l) = sum_m sum_n f(m,n) exp(-j 2 pi (k m / a + l n / b)), term by term.
ComplexMatrix dft_oracle(const Matrix& f) {
  const auto a = f.rows(), b = f.cols();
  ComplexMatrix out(a, b);
  for (Eigen::Index k = 0; k < a; ++k)
    for (Eigen::Index l = 0; l < b; ++l) {
      cd acc = 0.0;
      for (Eigen::Index m = 0; m < a; ++m)
        for (Eigen::Index n = 0; n < b; ++n) {
          const double angle = -2.0 * kPi * (static_cast<double>(k * m) / static_cast<double>(a) +
                                             static_cast<double>(l * n) / static_cast<double>(b));
          acc += f(m, n) * cd(std::cos(angle), std::sin(angle));
        }
      out(k, l) = acc;
    }
  return out;
}

cd gabor_oracle(const GaborParams& p, double x, double y) {
  const double env = p.amplitude * std::exp(-kPi * p.sigma * p.sigma * (x * x + y * y));
  const double arg = 2.0 * kPi * p.freq * (x * std::cos(p.omega) + y * std::sin(p.omega)) + p.theta;
  return env * cd(std::cos(arg), std::sin(arg));
}

// Direct 2D convolution with the full kernel, zero padded.
ComplexMatrix convolve_oracle(const Matrix& img, const ComplexMatrix& k) {
  const int half = static_cast<int>(k.rows() - 1) / 2;
  ComplexMatrix out = ComplexMatrix::Zero(img.rows(), img.cols());
  for (Eigen::Index i = 0; i < img.rows(); ++i)
    for (Eigen::Index j = 0; j < img.cols(); ++j)
      for (int u = -half; u <= half; ++u)
        for (int v = -half; v <= half; ++v) {
          const Eigen::Index ii = i - u, jj = j - v;
          if (ii < 0 || jj < 0 || ii >= img.rows() || jj >= img.cols()) continue;
          out(i, j) += img(ii, jj) * k(u + half, v + half);
        }
  return out;
}

double energy(const Matrix& f) { return f.squaredNorm(); }

}  // namespace

TEST_CASE("dft2 matches the direct double sum on random 8x8 images") {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix f = random_matrix(8, 8, rng);
    const ComplexMatrix got = dft2(f);
    const ComplexMatrix want = dft_oracle(f);
    const double scale = want.cwiseAbs().maxCoeff();
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff() / scale);
  }
  CHECK(worst <= 1e-10);

  const Matrix rect = random_matrix(6, 9, rng);
  CHECK((dft2(rect) - dft_oracle(rect)).cwiseAbs().maxCoeff() <= 1e-10 * dft_oracle(rect).cwiseAbs().maxCoeff());
}

TEST_CASE("dft2 matches the direct double sum at 116x116") {
  std::mt19937_64 rng(2);
  const Matrix f = random_matrix(116, 116, rng);
  const ComplexMatrix got = dft2(f);
  // Spot-check a handful of bins against the full sum.
  std::uniform_int_distribution<int> idx(0, 115);
  for (int t = 0; t < 8; ++t) {
    const int k = idx(rng), l = idx(rng);
    cd acc = 0.0;
    for (int m = 0; m < 116; ++m)
      for (int n = 0; n < 116; ++n) {
        const double angle = -2.0 * kPi * (k * m + l * n) / 116.0;
        acc += f(m, n) * cd(std::cos(angle), std::sin(angle));
      }
    CHECK(std::abs(got(k, l) - acc) <= 1e-9 * std::abs(got(0, 0)));
  }
}

TEST_CASE("dft2 of simple images") {
  const ComplexMatrix c = dft2(Matrix::Constant(116, 116, 0.3));
  CHECK(std::abs(c(0, 0) - cd(0.3 * 116 * 116, 0.0)) <= 1e-9);
  ComplexMatrix rest = c;
  rest(0, 0) = 0.0;
  CHECK(rest.cwiseAbs().maxCoeff() <= 1e-9);

  const int a = 116;
  Matrix cosine(a, a);
  for (int m = 0; m < a; ++m) cosine.row(m).setConstant(std::cos(2.0 * kPi * m / a));
  const ComplexMatrix s = dft2(cosine);
  for (int k = 0; k < a; ++k)
    for (int l = 0; l < a; ++l) {
      const bool line = l == 0 && (k == 1 || k == a - 1);
      if (line)
        CHECK(std::abs(s(k, l)) == doctest::Approx(a * a / 2.0));
      else
        CHECK(std::abs(s(k, l)) <= 1e-9);
    }
}

TEST_CASE("Parseval and conjugate symmetry on random 116x116 images") {
  std::mt19937_64 rng(3);
  double parseval = 0.0, symmetry = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix f = random_matrix(116, 116, rng);
    const ComplexMatrix F = dft2(f);
    const double lhs = energy(f);
    const double rhs = F.cwiseAbs2().sum() / (116.0 * 116.0);
    parseval = std::max(parseval, std::abs(lhs - rhs) / lhs);
    const double scale = std::abs(F(0, 0));
    for (int k = 0; k < 116; ++k)
      for (int l = 0; l < 116; ++l)
        symmetry = std::max(symmetry, std::abs(F(k, l) - std::conj(F((116 - k) % 116, (116 - l) % 116))) / scale);
  }
  CHECK(parseval <= 1e-9);
  CHECK(symmetry <= 1e-9);
}

TEST_CASE("dft2 is linear") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix f = random_matrix(116, 116, rng);
    const Matrix g = random_matrix(116, 116, rng);
    const double alpha = 0.7, beta = -1.9;
    const ComplexMatrix lhs = dft2(Matrix(alpha * f + beta * g));
    const ComplexMatrix rhs = alpha * dft2(f) + beta * dft2(g);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9 * rhs.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("spectrum_to_image") {
  const auto zero = spectrum_to_image(ComplexMatrix::Zero(116, 116), StressLabel(1));
  CHECK((zero.pixels().array() == 0.5).all());
  CHECK(zero.modality() == Modality::dft);

  ComplexMatrix dc = ComplexMatrix::Zero(116, 116);
  dc(0, 0) = 5.0;
  const auto bright = spectrum_to_image(dc, StressLabel(1));
  CHECK(bright.pixels()(58, 58) == 1.0);
  CHECK(bright.pixels().sum() == 1.0);

  // Intensity varying down the rows only: spectral energy lies on the vertical axis.
  Matrix rows(116, 116);
  for (int i = 0; i < 116; ++i) rows.row(i).setConstant(0.5 + 0.5 * std::cos(2.0 * kPi * (i % 40) / 40.0));
  Matrix shifted = spectrum_to_image(dft2(rows), StressLabel(0)).pixels();
  shifted(58, 58) = 0.0;
  Eigen::Index r = 0, c = 0;
  shifted.maxCoeff(&r, &c);
  CHECK(c == 58);
  CHECK(r != 58);
}

TEST_CASE("gabor kernel follows the formula pointwise") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coord(-15, 15);
  const GaborParams fixed{0.1, 0.1, 0.0, 0.0, 1.0, 31};
  const ComplexMatrix k = gabor_kernel(fixed);
  REQUIRE(k.rows() == 31);
  REQUIRE(k.cols() == 31);
  for (int t = 0; t < 5; ++t) {
    const int x = coord(rng), y = coord(rng);
    CHECK(std::abs(k(y + 15, x + 15) - gabor_oracle(fixed, x, y)) <= 1e-12);
  }

  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    GaborParams p;
    p.sigma = 0.02 + 0.3 * u(rng);
    p.freq = 0.4 * u(rng);
    p.omega = 2.0 * kPi * u(rng);
    p.theta = 2.0 * kPi * u(rng) - kPi;
    p.amplitude = 0.1 + 3.0 * u(rng);
    p.support = 3 + 2 * static_cast<int>(20 * u(rng));
    const int half = (p.support - 1) / 2;
    const ComplexMatrix kk = gabor_kernel(p);
    std::uniform_int_distribution<int> c2(-half, half);
    for (int t = 0; t < 10; ++t) {
      const int x = c2(rng), y = c2(rng);
      CHECK(std::abs(kk(y + half, x + half) - gabor_oracle(p, x, y)) <= 1e-12);
    }
  }
}

TEST_CASE("gabor kernel special cases") {
  GaborParams p;
  p.freq = 0.0;
  p.theta = 0.0;
  p.amplitude = 2.5;
  const ComplexMatrix k = gabor_kernel(p);
  CHECK(k.imag().cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(k(15, 15) == cd(2.5, 0.0));

  const ComplexMatrix d = gabor_kernel(GaborParams{});
  CHECK(d(15, 15) == cd(1.0, 0.0));
  double border = 0.0;
  for (int i = 0; i < 31; ++i)
    border = std::max({border, std::abs(d(0, i)), std::abs(d(30, i)), std::abs(d(i, 0)), std::abs(d(i, 30))});
  CHECK(border <= 1e-3 * std::abs(d(15, 15)));
  CHECK(std::isfinite(d.cwiseAbs2().sum()));

  GaborParams bad;
  bad.support = 30;
  CHECK_ERROR_CODE(gabor_kernel(bad), ErrorCode::invalid_argument);
  bad = GaborParams{};
  bad.sigma = 0.0;
  CHECK_ERROR_CODE(gabor_kernel(bad), ErrorCode::invalid_argument);
}

TEST_CASE("separable gabor response equals direct 2D convolution") {
  std::mt19937_64 rng(6);
  for (const GaborParams& p : {GaborParams{}, GaborParams{0.15, 0.2, 0.7, 0.4, 1.3, 9}, GaborParams{0.3, 0.05, 2.0, -1.0, 0.5, 5}}) {
    const Matrix img = random_matrix(23, 17, rng);
    const ComplexMatrix got = gabor_response(img, p);
    const ComplexMatrix want = convolve_oracle(img, gabor_kernel(p));
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12 * want.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("gabor transform behaviour") {
  const auto zero = gabor_transform(SignalImage(Matrix::Zero(116, 116), Modality::spatial, StressLabel(3)));
  CHECK((zero.pixels().array() == 0.5).all());
  CHECK(zero.modality() == Modality::gabor);
  CHECK(zero.label() == StressLabel(3));

  Matrix impulse = Matrix::Zero(116, 116);
  impulse(58, 58) = 1.0;
  const GaborParams p{};
  const ComplexMatrix r = gabor_response(impulse, p);
  const ComplexMatrix k = gabor_kernel(p);
  for (int u = -15; u <= 15; ++u)
    for (int v = -15; v <= 15; ++v) CHECK(std::abs(std::abs(r(58 + u, 58 + v)) - std::abs(k(15 - u, 15 - v))) <= 1e-14);

  // Grating along the filter's orientation vs. the orthogonal one.
  GaborParams g;
  g.freq = 0.1;
  g.omega = 0.0;
  Matrix along(116, 116), across(116, 116);
  for (int i = 0; i < 116; ++i)
    for (int j = 0; j < 116; ++j) {
      along(i, j) = 0.5 + 0.5 * std::cos(2.0 * kPi * g.freq * j);
      across(i, j) = 0.5 + 0.5 * std::cos(2.0 * kPi * g.freq * i);
    }
  auto mean_ac = [&](const Matrix& m) {
    // Remove the DC term so only the grating contributes.
    const Matrix centred = m.array() - 0.5;
    return gabor_response(centred, g).cwiseAbs().mean();
  };
  CHECK(mean_ac(along) > 2.0 * mean_ac(across));
}
