#pragma once

#include <array>
#include <span>

#include "ecgf/signal.hpp"

namespace ecgf {

/// Class probabilities for the five stress levels.
struct ScoreVector {
  std::array<double, kClassCount> probs{};

  /// Index of the largest probability; ties go to the lowest index.
  int argmax() const noexcept;

  /// Non-negative, finite, and summing to 1 within `tolerance`.
  bool is_valid(double tolerance = 1e-6) const noexcept;

  /// Builds from any five non-negative values by dividing by their sum.
  static ScoreVector normalized(std::span<const double> values);
};

}  // namespace ecgf
