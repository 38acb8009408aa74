#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ecgf/signal.hpp"

namespace ecgf {

inline constexpr double kRefractorySeconds = 0.2;

/// Sample indices of R peaks within one window: strictly increasing, at least
/// one refractory period apart.
struct RPeakList {
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
};

/// Band-pass, derivative, squaring and moving-window integration followed by
/// an adaptive threshold at half the running mean of accepted peak heights.
/// Each hit is then moved to the raw-signal maximum within +-40 ms.
///
/// Throws window_too_short below 2 s and no_peaks_found when fewer than two
/// peaks survive.
RPeakList detect_r_peaks(std::span<const double> samples, double fs);
RPeakList detect_r_peaks(const LabeledWindow& window);

/// Successive differences of the peak indices, in seconds.
std::vector<double> rr_intervals(const RPeakList& peaks, double fs);

/// True when `peaks` satisfies the ordering, refractory and range invariants.
bool satisfies_invariants(const RPeakList& peaks, std::size_t window_length, double fs);

}  // namespace ecgf
