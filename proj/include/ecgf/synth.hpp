#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ecgf/rpeak.hpp"
#include "ecgf/signal.hpp"

namespace ecgf {

struct LevelProfile {
  double mean_rr;          // s
  double sdnn;             // s
  double noise_sigma;      // mV
  double amplitude_scale;  // R amplitude in mV
};

/// Per-stress-level beat statistics for the synthetic ECG generator.
struct SynthProfile {
  std::array<LevelProfile, kClassCount> levels;
  double fs = kDefaultFs;
  double duration = kWindowSeconds;  // record length used by generate_record
  std::uint64_t rng_seed = 42;

  /// Heart rate rises and HRV falls with stress level.
  static SynthProfile defaults();

  /// Throws Error(invalid_argument) naming the offending field.
  void validate() const;
};

/// Overrides profile fields from `key = value` text. Per-level keys take five
/// whitespace- or comma-separated values (mean_rr, sdnn, noise_sigma,
/// amplitude_scale); scalar keys are fs, duration and seed.
SynthProfile parse_profile(const std::string& text, SynthProfile base = SynthProfile::defaults());
SynthProfile load_profile(const std::filesystem::path& path);

struct SyntheticWindow {
  LabeledWindow window;
  RPeakList truth;
};

struct SyntheticRecord {
  EcgRecord ecg;
  RPeakList truth;
};

/// Renders `duration_s` seconds of ECG at one stress level. Each beat is a sum
/// of five Gaussians (P, Q, R, S, T) placed at fixed offsets in seconds from
/// its R peak, which sits exactly on a sample. White noise and 0.2 Hz baseline
/// wander are added afterwards. `stream` selects an independent RNG stream.
SyntheticRecord generate_record(const SynthProfile& profile, StressLabel label, double duration_s,
                                std::uint64_t stream = 0);

/// One 30 s labeled window plus its ground-truth peaks.
SyntheticWindow generate(const SynthProfile& profile, StressLabel label, std::uint64_t stream = 0);

/// Balanced set ordered by label, then by window. Window i uses stream i.
std::vector<SyntheticWindow> generate_dataset(const SynthProfile& profile, std::size_t windows_per_class);

}  // namespace ecgf
