#include "ecgf/evaluate.hpp"

#include <atomic>
#include <exception>
#include <algorithm>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "ecgf/error.hpp"

namespace ecgf {

namespace {

class CnnClassifier final : public Classifier {
 public:
  CnnClassifier(bool two_d, TrainConfig config) : two_d_(two_d), config_(config) {}

  void fit(const Dataset& train_set, std::uint64_t seed) override {
    TrainConfig cfg = config_;
    cfg.rng_seed = seed;
    auto net = two_d_ ? nn::build_2d_cnn<float>(seed) : nn::build_1d_cnn<float>(seed);
    auto result = train(std::move(net), train_set, cfg);
    model_ = std::make_unique<nn::Network<float>>(std::move(result.model));
    history_ = std::move(result.history);
  }

  ScoreVector score(const Sample& sample) const override {
    if (!model_) throw Error(ErrorCode::invalid_argument, "classifier used before fit");
    return model_->predict(sample.input);
  }

  std::vector<EpochRecord> history() const override { return history_; }

 private:
  bool two_d_;
  TrainConfig config_;
  std::unique_ptr<nn::Network<float>> model_;
  std::vector<EpochRecord> history_;
};

double accuracy_of(const std::vector<ScoreVector>& scores, const std::vector<int>& labels) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) hits += scores[i].argmax() == labels[i] ? 1 : 0;
  return scores.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(scores.size());
}

}  // namespace

std::string_view to_string(System s) {
  switch (s) {
    case System::raw1d: return "raw1d";
    case System::spatial: return "spatial";
    case System::dft: return "dft";
    case System::gabor: return "gabor";
    case System::fused: return "fused";
  }
  return "unknown";
}

double SystemResult::mean_accuracy() const {
  if (run_accuracy.empty()) return 0.0;
  return std::accumulate(run_accuracy.begin(), run_accuracy.end(), 0.0) / static_cast<double>(run_accuracy.size());
}

void BenchmarkData::validate() const {
  const std::size_t groups = originals[0].size();
  for (std::size_t s = 0; s < kTrainedSystemCount; ++s) {
    if (originals[s].size() != groups)
      throw Error(ErrorCode::shape_mismatch, "every system needs one original sample per source window");
    for (std::size_t g = 0; g < groups; ++g) {
      if (originals[s][g].group != g) throw Error(ErrorCode::invalid_argument, "originals must be indexed by group");
      if (originals[s][g].label != originals[0][g].label)
        throw Error(ErrorCode::invalid_argument, "systems disagree on the label of a source window");
    }
    for (const auto& item : pools[s])
      if (item.group >= groups) throw Error(ErrorCode::invalid_argument, "pool sample refers to an unknown group");
  }
}

ClassifierFactory cnn_factory(const TrainConfig& config) {
  return [config](System s) -> std::unique_ptr<Classifier> {
    return std::make_unique<CnnClassifier>(s != System::raw1d, config);
  };
}

EvalReport evaluate(const BenchmarkData& data, const ClassifierFactory& factory, const EvalConfig& config) {
  data.validate();
  config.policy.validate();
  if (config.runs < 1) throw Error(ErrorCode::invalid_argument, "need at least one run");

  const std::size_t groups = data.group_count();
  std::vector<std::size_t> group_ids(groups);
  std::iota(group_ids.begin(), group_ids.end(), 0);

  const auto runs = static_cast<std::size_t>(config.runs);
  std::vector<SplitIndices> splits;
  for (std::size_t r = 0; r < runs; ++r) splits.push_back(split_dataset(group_ids, config.train_ratio, config.base_seed + r));

  // scores[r][s][i] for the i-th test group of run r.
  std::vector<std::array<std::vector<ScoreVector>, kTrainedSystemCount>> scores(runs);
  EvalReport report;
  report.histories.resize(runs);

  const std::size_t tasks = runs * kTrainedSystemCount;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const std::size_t r = t / kTrainedSystemCount;
      const std::size_t s = t % kTrainedSystemCount;
      try {
        const std::set<std::size_t> train_groups(splits[r].train.begin(), splits[r].train.end());
        Dataset train_set;
        for (const auto& item : data.pools[s])
          if (train_groups.count(item.group)) train_set.push_back(item);

        auto classifier = factory(static_cast<System>(s));
        classifier->fit(train_set, (config.base_seed + r) * 1000003ULL + s);
        auto& out = scores[r][s];
        for (std::size_t g : splits[r].test) out.push_back(classifier->score(data.originals[s][g]));
        report.histories[r][s] = classifier->history();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks;
      }
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(tasks)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t r = 0; r < runs; ++r) {
    std::vector<int> labels;
    for (std::size_t g : splits[r].test) labels.push_back(data.originals[0][g].label);

    std::vector<ScoreVector> fused;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const std::array<ScoreVector, 3> triple{scores[r][1][i], scores[r][2][i], scores[r][3][i]};
      fused.push_back(fuse(triple, config.policy));
    }

    for (std::size_t s = 0; s < kSystemCount; ++s) {
      const auto& sv = s < kTrainedSystemCount ? scores[r][s] : fused;
      auto& result = report.systems[s];
      result.run_accuracy.push_back(accuracy_of(sv, labels));
      for (std::size_t i = 0; i < labels.size(); ++i)
        ++result.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(sv[i].argmax())];
    }
  }
  return report;
}

void report_csv(const EvalReport& report, const std::filesystem::path& path) {
  if (report.runs() == 0) throw Error(ErrorCode::empty_report, "report has no runs");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::unwritable_path, "cannot write " + path.string());
  char line[128];
  out << "system,run,accuracy\n";
  for (std::size_t s = 0; s < kSystemCount; ++s) {
    const auto name = to_string(static_cast<System>(s));
    for (std::size_t r = 0; r < report.systems[s].run_accuracy.size(); ++r) {
      std::snprintf(line, sizeof line, "%.*s,%zu,%.6f\n", static_cast<int>(name.size()), name.data(), r,
                    report.systems[s].run_accuracy[r]);
      out << line;
    }
  }
  for (std::size_t s = 0; s < kSystemCount; ++s) {
    const auto name = to_string(static_cast<System>(s));
    std::snprintf(line, sizeof line, "%.*s,mean,%.6f\n", static_cast<int>(name.size()), name.data(),
                  report.systems[s].mean_accuracy());
    out << line;
  }
  if (!out) throw Error(ErrorCode::unwritable_path, "failed writing " + path.string());
}

void confusion_csv(const Confusion& confusion, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::unwritable_path, "cannot write " + path.string());
  out << "true\\predicted";
  for (int c = 0; c < kClassCount; ++c) out << ',' << c;
  out << '\n';
  for (int t = 0; t < kClassCount; ++t) {
    out << t;
    for (int p = 0; p < kClassCount; ++p) out << ',' << confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::unwritable_path, "failed writing " + path.string());
}

}  // namespace ecgf
