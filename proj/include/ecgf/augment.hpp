#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ecgf/imaging.hpp"

namespace ecgf {

struct AugmentedImage {
  SignalImage image;
  std::size_t source = 0;  // index into the input set
  bool original = false;
};

/// Each source image is kept and followed by `factor` variants. A variant
/// applies, in order: a circular row shift of 0..rows-1, amplitude scaling by
/// U(0.9, 1.1), additive N(0, 0.01) pixel noise, and a circular column shift
/// of -5..5, clamping to [0,1] after each pixel-value change. Source i uses an
/// RNG stream derived from (seed, i), so output is independent of set order.
std::vector<AugmentedImage> augment(std::span<const SignalImage> images, int factor, std::uint64_t seed);

/// One augmented variant of a single image.
Matrix augment_variant(const Matrix& pixels, std::uint64_t seed, std::uint64_t source, int variant);

}  // namespace ecgf
