#include "ecgf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ecgf/error.hpp"
#include "ecgf/keyvalue.hpp"

namespace ecgf {

namespace {

struct Wave {
  double offset;     // s relative to the R peak
  double amplitude;  // mV at amplitude_scale 1
  double width;      // Gaussian sigma, s
};

// P, Q, R, S, T.
constexpr std::array<Wave, 5> kTemplate = {{
    {-0.200, 0.12, 0.025},
    {-0.035, -0.12, 0.010},
    {0.000, 1.00, 0.010},
    {0.035, -0.25, 0.010},
    {0.280, 0.30, 0.045},
}};

constexpr double kMinRr = 0.3;
constexpr double kMaxRr = 1.5;
constexpr double kWanderHz = 0.2;
constexpr double kWanderMv = 0.05;

std::mt19937_64 make_rng(std::uint64_t seed, int level, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(level), static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

void set_level_field(SynthProfile& p, const std::string& key, const std::vector<double>& values) {
  if (values.size() != kClassCount)
    throw Error(ErrorCode::invalid_argument, key + ": expected 5 values, got " + std::to_string(values.size()));
  for (std::size_t i = 0; i < kClassCount; ++i) {
    auto& level = p.levels[i];
    if (key == "mean_rr") level.mean_rr = values[i];
    else if (key == "sdnn") level.sdnn = values[i];
    else if (key == "noise_sigma") level.noise_sigma = values[i];
    else level.amplitude_scale = values[i];
  }
}

}  // namespace

SynthProfile SynthProfile::defaults() {
  SynthProfile p;
  p.levels = {{
      {1.0, 0.05, 0.02, 1.00},
      {0.9, 0.04, 0.02, 1.05},
      {0.8, 0.03, 0.02, 1.10},
      {0.7, 0.025, 0.02, 1.15},
      {0.6, 0.02, 0.02, 1.20},
  }};
  return p;
}

void SynthProfile::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_argument, "profile: " + what); };
  if (!(fs > 0.0)) fail("fs must be positive");
  if (!(duration >= kWindowSeconds)) fail("duration must be at least 30 s");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    const std::string tag = " (level " + std::to_string(i) + ")";
    if (!(l.mean_rr >= kMinRr && l.mean_rr <= kMaxRr)) fail("mean_rr must lie in [0.3, 1.5]" + tag);
    if (!(l.sdnn >= 0.0)) fail("sdnn must be non-negative" + tag);
    if (!(l.noise_sigma >= 0.0)) fail("noise_sigma must be non-negative" + tag);
    if (!(l.amplitude_scale > 0.0)) fail("amplitude_scale must be positive" + tag);
  }
}

SynthProfile parse_profile(const std::string& text, SynthProfile base) {
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "mean_rr" || key == "sdnn" || key == "noise_sigma" || key == "amplitude_scale")
      set_level_field(base, key, parse_double_list(key, value));
    else if (key == "fs")
      base.fs = parse_double(key, value);
    else if (key == "duration")
      base.duration = parse_double(key, value);
    else if (key == "seed")
      base.rng_seed = static_cast<std::uint64_t>(parse_integer(key, value));
    else
      throw Error(ErrorCode::invalid_argument, "profile: unknown key '" + key + "'");
  }
  base.validate();
  return base;
}

SynthProfile load_profile(const std::filesystem::path& path) {
  SynthProfile p = SynthProfile::defaults();
  for (const auto& [key, value] : load_key_values(path)) {
    // Reuse the text parser one pair at a time so errors name the key.
    p = parse_profile(key + " = " + value, p);
  }
  p.validate();
  return p;
}

SyntheticRecord generate_record(const SynthProfile& profile, StressLabel label, double duration_s,
                                std::uint64_t stream) {
  profile.validate();
  const auto& level = profile.levels[static_cast<std::size_t>(label.level())];
  const double fs = profile.fs;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  auto rng = make_rng(profile.rng_seed, label.level(), stream);
  std::normal_distribution<double> rr_dist(level.mean_rr, level.sdnn);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto draw_rr = [&] {
    const double rr = level.sdnn > 0.0 ? rr_dist(rng) : level.mean_rr;
    return std::clamp(rr, kMinRr, kMaxRr);
  };

  // Beats start before the window so the first samples carry a partial beat.
  std::vector<long long> r_positions;
  double t = -unit(rng) * level.mean_rr;
  const double end = duration_s + 1.0;
  while (t < end) {
    r_positions.push_back(std::llround(t * fs));
    t += draw_rr();
  }

  std::vector<double> x(n, 0.0);
  for (long long r : r_positions) {
    for (const Wave& w : kTemplate) {
      const double center = static_cast<double>(r) + w.offset * fs;
      const double sigma = w.width * fs;
      const double amp = w.amplitude * level.amplitude_scale;
      const auto lo = static_cast<long long>(std::floor(center - 5.0 * sigma));
      const auto hi = static_cast<long long>(std::ceil(center + 5.0 * sigma));
      for (long long i = std::max(0LL, lo); i <= hi && i < static_cast<long long>(n); ++i) {
        const double z = (static_cast<double>(i) - center) / sigma;
        x[static_cast<std::size_t>(i)] += amp * std::exp(-0.5 * z * z);
      }
    }
  }

  const double phase = unit(rng) * 2.0 * std::numbers::pi;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = static_cast<double>(i) / fs;
    x[i] += kWanderMv * std::sin(2.0 * std::numbers::pi * kWanderHz * ti + phase);
    if (level.noise_sigma > 0.0) x[i] += level.noise_sigma * noise(rng);
  }

  RPeakList truth;
  for (long long r : r_positions)
    if (r >= 0 && r < static_cast<long long>(n)) truth.indices.push_back(static_cast<std::size_t>(r));

  return SyntheticRecord{EcgRecord(std::move(x), fs, "synth"), std::move(truth)};
}

SyntheticWindow generate(const SynthProfile& profile, StressLabel label, std::uint64_t stream) {
  auto record = generate_record(profile, label, kWindowSeconds, stream);
  return SyntheticWindow{LabeledWindow{std::move(record.ecg), label, 0}, std::move(record.truth)};
}

std::vector<SyntheticWindow> generate_dataset(const SynthProfile& profile, std::size_t windows_per_class) {
  if (windows_per_class < 1) throw Error(ErrorCode::invalid_argument, "windows_per_class must be at least 1");
  std::vector<SyntheticWindow> out;
  out.reserve(windows_per_class * kClassCount);
  for (int level = 0; level < kClassCount; ++level) {
    for (std::size_t k = 0; k < windows_per_class; ++k) {
      const std::size_t index = out.size();
      auto w = generate(profile, StressLabel(level), index);
      w.window.window_index = index;
      out.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace ecgf
