#include "ecgf/augment.hpp"

#include <random>

#include "ecgf/error.hpp"

namespace ecgf {

namespace {

constexpr int kMaxColumnShift = 5;
constexpr double kNoiseSigma = 0.01;

}  // namespace

Matrix augment_variant(const Matrix& pixels, std::uint64_t seed, std::uint64_t source, int variant) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(source), static_cast<std::uint32_t>(source >> 32),
                    static_cast<std::uint32_t>(variant)};
  std::mt19937_64 rng(seq);
  const Eigen::Index rows = pixels.rows();
  const Eigen::Index cols = pixels.cols();

  const auto row_shift = std::uniform_int_distribution<Eigen::Index>(0, rows - 1)(rng);
  const double gain = std::uniform_real_distribution<double>(0.9, 1.1)(rng);
  const auto col_shift = std::uniform_int_distribution<Eigen::Index>(-kMaxColumnShift, kMaxColumnShift)(rng);
  std::normal_distribution<double> noise(0.0, kNoiseSigma);

  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index src_r = (r + rows - row_shift) % rows;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Eigen::Index src_c = ((c - col_shift) % cols + cols) % cols;
      out(r, c) = pixels(src_r, src_c);
    }
  }
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double v = std::clamp(out.data()[i] * gain, 0.0, 1.0);
    out.data()[i] = std::clamp(v + noise(rng), 0.0, 1.0);
  }
  return out;
}

std::vector<AugmentedImage> augment(std::span<const SignalImage> images, int factor, std::uint64_t seed) {
  if (factor < 1) throw Error(ErrorCode::invalid_argument, "augmentation factor must be at least 1");
  std::vector<AugmentedImage> out;
  out.reserve(images.size() * static_cast<std::size_t>(factor + 1));
  for (std::size_t i = 0; i < images.size(); ++i) {
    out.push_back({images[i], i, true});
    for (int v = 0; v < factor; ++v) {
      out.push_back({SignalImage(augment_variant(images[i].pixels(), seed, i, v), images[i].modality(), images[i].label()),
                     i, false});
    }
  }
  return out;
}

}  // namespace ecgf
