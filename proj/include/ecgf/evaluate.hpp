#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "ecgf/fusion.hpp"
#include "ecgf/train.hpp"

namespace ecgf {

/// Systems compared by the evaluation protocol, in report order.
enum class System { raw1d = 0, spatial = 1, dft = 2, gabor = 3, fused = 4 };

inline constexpr int kSystemCount = 5;
inline constexpr int kTrainedSystemCount = 4;  // everything but fused

std::string_view to_string(System s);

using Confusion = std::array<std::array<long, kClassCount>, kClassCount>;  // [true][predicted]

struct SystemResult {
  std::vector<double> run_accuracy;
  Confusion confusion{};  // summed over runs

  double mean_accuracy() const;
};

struct EvalReport {
  std::array<SystemResult, kSystemCount> systems;
  /// Training histories indexed [run][trained system]; empty for stubs.
  std::vector<std::array<std::vector<EpochRecord>, kTrainedSystemCount>> histories;

  const SystemResult& operator[](System s) const { return systems[static_cast<std::size_t>(s)]; }
  SystemResult& operator[](System s) { return systems[static_cast<std::size_t>(s)]; }
  std::size_t runs() const { return systems[0].run_accuracy.size(); }
};

/// Inputs for all four trained systems. `pools[s]` holds every original and
/// augmented sample of system s; `originals[s][g]` is the untouched sample of
/// source window g. Test sets are drawn from the originals only.
struct BenchmarkData {
  std::array<Dataset, kTrainedSystemCount> pools;
  std::array<Dataset, kTrainedSystemCount> originals;

  std::size_t group_count() const { return originals[0].size(); }
  void validate() const;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const Dataset& train_set, std::uint64_t seed) = 0;
  virtual ScoreVector score(const Sample& sample) const = 0;
  virtual std::vector<EpochRecord> history() const { return {}; }
};

using ClassifierFactory = std::function<std::unique_ptr<Classifier>(System)>;

/// CNN-backed classifiers: the 1D network for raw1d, the 2D network otherwise.
ClassifierFactory cnn_factory(const TrainConfig& config);

struct EvalConfig {
  int runs = 10;
  std::uint64_t base_seed = 42;  // run r uses base_seed + r
  double train_ratio = 0.85;
  FusionPolicy policy;
  unsigned jobs = 1;
};

/// For each run: split source windows, fit the four classifiers on their
/// training pools, score the held-out originals, fuse spatial/dft/gabor, and
/// record accuracies plus confusion counts. Runs and systems are trained in
/// parallel over `jobs` threads; results do not depend on `jobs`.
EvalReport evaluate(const BenchmarkData& data, const ClassifierFactory& factory, const EvalConfig& config);

/// "system,run,accuracy" rows, then one "system,mean,accuracy" row per
/// system. Throws empty_report when no runs were recorded.
void report_csv(const EvalReport& report, const std::filesystem::path& path);

/// 5x5 counts with a "true\predicted" header row.
void confusion_csv(const Confusion& confusion, const std::filesystem::path& path);

}  // namespace ecgf
