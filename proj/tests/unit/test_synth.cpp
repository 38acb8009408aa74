#include "support.hpp"

#include <cmath>

#include "ecgf/rpeak.hpp"
#include "ecgf/synth.hpp"

using namespace ecgf;

TEST_CASE("default profile encodes stress monotonically") {
  const auto p = SynthProfile::defaults();
  p.validate();
  for (int l = 1; l < kClassCount; ++l) CHECK(p.levels[l].mean_rr < p.levels[l - 1].mean_rr);
  CHECK(p.levels[0].mean_rr == 1.0);
  CHECK(p.levels[0].sdnn == 0.05);
  CHECK(p.levels[4].mean_rr == 0.6);
  CHECK(p.levels[4].sdnn == 0.02);
  CHECK(p.fs == 256.0);
}

TEST_CASE("profile validation and parsing") {
  auto p = SynthProfile::defaults();
  p.levels[2].mean_rr = 1.6;
  CHECK_ERROR_CODE(p.validate(), ErrorCode::invalid_argument);
  p = SynthProfile::defaults();
  p.levels[1].sdnn = -0.01;
  CHECK_ERROR_CODE(p.validate(), ErrorCode::invalid_argument);

  const auto q = parse_profile("mean_rr = 1.1, 1.0, 0.9, 0.8, 0.7\nseed = 9\nduration = 60\n");
  CHECK(q.levels[0].mean_rr == 1.1);
  CHECK(q.levels[4].mean_rr == 0.7);
  CHECK(q.rng_seed == 9);
  CHECK(q.duration == 60.0);
  CHECK_ERROR_CODE(parse_profile("mean_rr = 1, 2\n"), ErrorCode::invalid_argument);
  CHECK_ERROR_CODE(parse_profile("tempo = 3\n"), ErrorCode::invalid_argument);
}

TEST_CASE("beat counts match the level's mean RR") {
  const auto p = SynthProfile::defaults();
  double mean0 = 0.0, mean4 = 0.0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    mean0 += static_cast<double>(generate(p, StressLabel(0), k).truth.size());
    mean4 += static_cast<double>(generate(p, StressLabel(4), k).truth.size());
  }
  mean0 /= 10.0;
  mean4 /= 10.0;
  CHECK(mean0 == doctest::Approx(30.0).epsilon(0.1));
  CHECK(mean4 == doctest::Approx(50.0).epsilon(0.1));
}

TEST_CASE("ground truth sits on rendered R maxima when noiseless") {
  auto p = SynthProfile::defaults();
  for (auto& l : p.levels) l.noise_sigma = 0.0;
  for (int level = 0; level < kClassCount; ++level) {
    const auto w = generate(p, StressLabel(level), 31);
    const auto x = w.window.ecg.samples();
    for (auto t : w.truth.indices) {
      const std::size_t lo = t >= 5 ? t - 5 : 0;
      const std::size_t hi = std::min(x.size() - 1, t + 5);
      std::size_t arg = lo;
      for (std::size_t i = lo; i <= hi; ++i)
        if (x[i] > x[arg]) arg = i;
      CHECK(std::labs(static_cast<long>(arg) - static_cast<long>(t)) <= 1);
    }
  }
}

TEST_CASE("generated windows satisfy record and window invariants") {
  const auto p = SynthProfile::defaults();
  for (int level = 0; level < kClassCount; ++level) {
    const auto w = generate(p, StressLabel(level), 7);
    CHECK(w.window.ecg.size() == window_length(p.fs));
    CHECK(w.window.label == StressLabel(level));
    for (double v : w.window.ecg.samples()) CHECK(std::isfinite(v));
    CHECK(satisfies_invariants(w.truth, w.window.ecg.size(), p.fs));
  }
}

TEST_CASE("RR intervals respect the clip range") {
  auto p = SynthProfile::defaults();
  p.levels[0] = LevelProfile{1.4, 0.5, 0.02, 1.0};
  const auto r = generate_record(p, StressLabel(0), 300.0, 3);
  for (double rr : rr_intervals(r.truth, p.fs)) {
    CHECK(rr >= 0.3 - 1.0 / p.fs);
    CHECK(rr <= 1.5 + 1.0 / p.fs);
  }
}

TEST_CASE("mean detected heart rate increases with stress level") {
  const auto p = SynthProfile::defaults();
  double previous = 0.0;
  for (int level = 0; level < kClassCount; ++level) {
    double hr = 0.0;
    for (std::uint64_t k = 0; k < 10; ++k) {
      const auto w = generate(p, StressLabel(level), 200 + k);
      const auto rr = rr_intervals(detect_r_peaks(w.window), p.fs);
      double mean = 0.0;
      for (double v : rr) mean += v;
      hr += 60.0 * static_cast<double>(rr.size()) / mean;
    }
    hr /= 10.0;
    CHECK(hr > previous);
    previous = hr;
  }
}

TEST_CASE("dataset layout and determinism") {
  const auto p = SynthProfile::defaults();
  const auto one = generate_dataset(p, 1);
  REQUIRE(one.size() == 5);
  for (int l = 0; l < kClassCount; ++l) CHECK(one[static_cast<std::size_t>(l)].window.label.level() == l);

  const auto a = generate_dataset(p, 36);
  REQUIRE(a.size() == 180);
  std::array<int, kClassCount> counts{};
  for (const auto& w : a) ++counts[static_cast<std::size_t>(w.window.label.level())];
  for (int c : counts) CHECK(c == 36);

  const auto b = generate_dataset(p, 36);
  bool identical = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a[i].window.ecg.samples();
    const auto y = b[i].window.ecg.samples();
    identical = identical && std::equal(x.begin(), x.end(), y.begin(), y.end()) && a[i].truth.indices == b[i].truth.indices;
  }
  CHECK(identical);

  auto other = p;
  other.rng_seed = 43;
  const auto c = generate_dataset(other, 1);
  CHECK_FALSE(std::equal(c[0].window.ecg.samples().begin(), c[0].window.ecg.samples().end(),
                         one[0].window.ecg.samples().begin()));
}
