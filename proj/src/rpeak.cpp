#include "ecgf/rpeak.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ecgf/error.hpp"

namespace ecgf {

namespace {

constexpr double kHighPassHz = 5.0;
constexpr double kLowPassHz = 15.0;
constexpr double kIntegrationSeconds = 0.150;
constexpr double kLearningSeconds = 2.0;
constexpr double kRefineSeconds = 0.040;

void low_pass(std::vector<double>& x, double fs) {
  const double rc = 1.0 / (2.0 * std::numbers::pi * kLowPassHz);
  const double dt = 1.0 / fs;
  const double a = dt / (rc + dt);
  double y = x.front();
  for (double& v : x) {
    y += a * (v - y);
    v = y;
  }
}

void high_pass(std::vector<double>& x, double fs) {
  const double rc = 1.0 / (2.0 * std::numbers::pi * kHighPassHz);
  const double dt = 1.0 / fs;
  const double b = rc / (rc + dt);
  double prev_in = x.front();
  double y = 0.0;
  for (double& v : x) {
    y = b * (y + v - prev_in);
    prev_in = v;
    v = y;
  }
}

// Forward then backward so the cascade adds no group delay.
template <typename Filter>
void zero_phase(std::vector<double>& x, double fs, Filter filter) {
  filter(x, fs);
  std::reverse(x.begin(), x.end());
  filter(x, fs);
  std::reverse(x.begin(), x.end());
}

std::vector<double> integrated_energy(std::span<const double> samples, double fs) {
  const std::size_t n = samples.size();
  std::vector<double> band(samples.begin(), samples.end());
  zero_phase(band, fs, high_pass);
  zero_phase(band, fs, low_pass);

  auto at = [&](std::ptrdiff_t i) {
    return band[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1))];
  };
  std::vector<double> energy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::ptrdiff_t>(i);
    const double d = (2.0 * at(k + 1) + at(k + 2) - at(k - 2) - 2.0 * at(k - 1)) * fs / 8.0;
    energy[i] = d * d;
  }

  // Centered moving average over the integration window.
  const auto width = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(kIntegrationSeconds * fs)));
  const std::size_t half = width / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + energy[i];
  std::vector<double> mwi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + (width - half));
    mwi[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(width);
  }
  return mwi;
}

}  // namespace

RPeakList detect_r_peaks(std::span<const double> samples, double fs) {
  const std::size_t n = samples.size();
  if (static_cast<double>(n) < 2.0 * fs)
    throw Error(ErrorCode::window_too_short, "need at least 2 s of samples, got " + std::to_string(n));

  const std::vector<double> mwi = integrated_energy(samples, fs);
  const auto refractory = static_cast<std::size_t>(std::ceil(kRefractorySeconds * fs));

  const auto learn = std::min(n, static_cast<std::size_t>(kLearningSeconds * fs));
  double signal_level = *std::max_element(mwi.begin(), mwi.begin() + static_cast<std::ptrdiff_t>(learn));

  std::vector<std::size_t> hits;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double m = mwi[i];
    if (!(m > mwi[i - 1] && m >= mwi[i + 1])) continue;
    if (!(m > 0.5 * signal_level)) continue;
    if (!hits.empty() && i - hits.back() < refractory) {
      if (m > mwi[hits.back()]) hits.back() = i;
      continue;
    }
    hits.push_back(i);
    signal_level = 0.875 * signal_level + 0.125 * m;
  }

  const auto reach = static_cast<std::size_t>(std::lround(kRefineSeconds * fs));
  std::vector<std::size_t> refined;
  refined.reserve(hits.size());
  for (std::size_t h : hits) {
    const std::size_t lo = h >= reach ? h - reach : 0;
    const std::size_t hi = std::min(n - 1, h + reach);
    std::size_t best = lo;
    for (std::size_t j = lo + 1; j <= hi; ++j)
      if (samples[j] > samples[best]) best = j;
    // Truncated beats at the window edges can leave the apex outside the search range.
    while (best + 1 < n && samples[best + 1] > samples[best]) ++best;
    while (best > 0 && samples[best - 1] > samples[best]) --best;
    if (!refined.empty() && best < refined.back() + refractory) {
      if (samples[best] > samples[refined.back()]) refined.back() = best;
      continue;
    }
    refined.push_back(best);
  }

  if (refined.size() < 2)
    throw Error(ErrorCode::no_peaks_found, "detected " + std::to_string(refined.size()) + " R peaks, need at least 2");
  return RPeakList{std::move(refined)};
}

RPeakList detect_r_peaks(const LabeledWindow& window) {
  return detect_r_peaks(window.ecg.samples(), window.ecg.fs());
}

std::vector<double> rr_intervals(const RPeakList& peaks, double fs) {
  if (peaks.size() < 2) throw Error(ErrorCode::too_few_peaks, "rr_intervals needs at least 2 peaks");
  std::vector<double> rr(peaks.size() - 1);
  for (std::size_t k = 0; k + 1 < peaks.size(); ++k) {
    if (peaks.indices[k + 1] <= peaks.indices[k])
      throw Error(ErrorCode::invalid_argument, "peak indices must be strictly increasing");
    rr[k] = static_cast<double>(peaks.indices[k + 1] - peaks.indices[k]) / fs;
  }
  return rr;
}

bool satisfies_invariants(const RPeakList& peaks, std::size_t window_length, double fs) {
  const auto refractory = static_cast<std::size_t>(std::ceil(kRefractorySeconds * fs));
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    if (peaks.indices[k] >= window_length) return false;
    if (k > 0 && peaks.indices[k] < peaks.indices[k - 1] + refractory) return false;
  }
  return true;
}

}  // namespace ecgf
