#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ecgf/evaluate.hpp"
#include "ecgf/synth.hpp"
#include "ecgf/transforms.hpp"

namespace ecgf {

inline constexpr std::size_t kRawInputLength = 116;

/// `kRawInputLength` raw samples starting at `offset`, as network input.
std::vector<float> raw_input(std::span<const double> samples, std::size_t offset = 0);

std::vector<float> image_input(const SignalImage& image);

/// Spatial, DFT and Gabor images of one window.
struct ModalityImages {
  SignalImage spatial;
  SignalImage dft;
  SignalImage gabor;
};

ModalityImages image_window(const LabeledWindow& window, const GaborParams& gabor);

/// Builds the four training pools from labeled windows. Spatial images are
/// augmented `augment_factor` times and each variant is transformed into the
/// DFT and Gabor modalities; the raw baseline gets the same number of extra
/// crops taken at seeded random offsets. Window i becomes group i.
BenchmarkData build_benchmark(std::span<const LabeledWindow> windows, int augment_factor, std::uint64_t seed,
                              const GaborParams& gabor, unsigned jobs = 1);

struct ExperimentConfig {
  SynthProfile profile = SynthProfile::defaults();
  std::size_t windows_per_class = 36;
  int augment_factor = 7;
  EvalConfig eval;
  TrainConfig train = default_experiment_training();
  GaborParams gabor;
  std::filesystem::path out = "runs/experiment";

  /// Reference training values with a shorter epoch budget and patience so
  /// forty networks train in minutes.
  static TrainConfig default_experiment_training();
};

struct ExperimentResult {
  EvalReport report;
  double seconds = 0.0;
};

/// generate -> image -> augment -> transform -> evaluate. Writes report.csv,
/// confusion_<system>.csv, logs/run<r>_<system>.csv and one sample image per
/// class and modality under samples/, all inside `config.out`.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace ecgf
