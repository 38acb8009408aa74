#include "ecgf/scores.hpp"

#include <cmath>

#include "ecgf/error.hpp"

namespace ecgf {

int ScoreVector::argmax() const noexcept {
  int best = 0;
  for (int i = 1; i < kClassCount; ++i)
    if (probs[static_cast<std::size_t>(i)] > probs[static_cast<std::size_t>(best)]) best = i;
  return best;
}

bool ScoreVector::is_valid(double tolerance) const noexcept {
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

ScoreVector ScoreVector::normalized(std::span<const double> values) {
  if (values.size() != kClassCount) throw Error(ErrorCode::shape_mismatch, "score vector needs 5 entries");
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::invalid_argument, "scores must be finite and non-negative");
    sum += v;
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::invalid_argument, "scores sum to zero");
  ScoreVector s;
  for (std::size_t i = 0; i < kClassCount; ++i) s.probs[i] = values[i] / sum;
  return s;
}

}  // namespace ecgf
