#include "ecgf/experiment.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <random>
#include <thread>

#include "ecgf/augment.hpp"
#include "ecgf/error.hpp"
#include "ecgf/image_io.hpp"

namespace ecgf {

namespace fs = std::filesystem;

std::vector<float> raw_input(std::span<const double> samples, std::size_t offset) {
  if (offset + kRawInputLength > samples.size())
    throw Error(ErrorCode::shape_mismatch, "raw crop runs past the end of the window");
  std::vector<float> out(kRawInputLength);
  for (std::size_t i = 0; i < kRawInputLength; ++i) out[i] = static_cast<float>(samples[offset + i]);
  return out;
}

std::vector<float> image_input(const SignalImage& image) {
  const Matrix& p = image.pixels();
  std::vector<float> out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(p.data()[i]);
  return out;
}

ModalityImages image_window(const LabeledWindow& window, const GaborParams& gabor) {
  SignalImage spatial = window_to_image(window);
  SignalImage dft = dft_transform(spatial);
  SignalImage gab = gabor_transform(spatial, gabor);
  return {std::move(spatial), std::move(dft), std::move(gab)};
}

BenchmarkData build_benchmark(std::span<const LabeledWindow> windows, int augment_factor, std::uint64_t seed,
                              const GaborParams& gabor, unsigned jobs) {
  if (augment_factor < 1) throw Error(ErrorCode::invalid_argument, "augmentation factor must be at least 1");
  if (windows.empty()) throw Error(ErrorCode::empty_dataset, "no windows to build a benchmark from");
  gabor.validate();

  const std::size_t n = windows.size();
  const auto per_window = static_cast<std::size_t>(augment_factor) + 1;
  // Slot layout per system: window i owns [i * per_window, (i + 1) * per_window).
  std::array<std::vector<Sample>, kTrainedSystemCount> slots;
  for (auto& s : slots) s.resize(n * per_window);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const auto& w = windows[i];
        const int label = w.label.level();
        const SignalImage spatial = window_to_image(w);
        const auto samples = w.ecg.samples();
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(i), 0x7a11u};
        std::mt19937_64 crop_rng(seq);
        std::uniform_int_distribution<std::size_t> crop(0, samples.size() - kRawInputLength);

        for (std::size_t v = 0; v < per_window; ++v) {
          const SignalImage variant =
              v == 0 ? spatial
                     : SignalImage(augment_variant(spatial.pixels(), seed, i, static_cast<int>(v - 1)), Modality::spatial,
                                   w.label);
          const std::size_t slot = i * per_window + v;
          slots[0][slot] = {raw_input(samples, v == 0 ? 0 : crop(crop_rng)), label, i};
          slots[1][slot] = {image_input(variant), label, i};
          slots[2][slot] = {image_input(dft_transform(variant)), label, i};
          slots[3][slot] = {image_input(gabor_transform(variant, gabor)), label, i};
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < threads; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  BenchmarkData data;
  for (std::size_t s = 0; s < kTrainedSystemCount; ++s) {
    for (std::size_t i = 0; i < n; ++i) data.originals[s].push_back(slots[s][i * per_window]);
    data.pools[s] = std::move(slots[s]);
  }
  return data;
}

TrainConfig ExperimentConfig::default_experiment_training() {
  TrainConfig t;
  t.max_epochs = 8;
  t.patience = 3;
  return t;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.profile.validate();
  config.train.validate();
  fs::create_directories(config.out / "logs");
  fs::create_directories(config.out / "samples");

  const auto synthetic = generate_dataset(config.profile, config.windows_per_class);
  std::vector<LabeledWindow> windows;
  windows.reserve(synthetic.size());
  for (const auto& s : synthetic) windows.push_back(s.window);

  // One example per class and modality.
  for (int level = 0; level < kClassCount; ++level) {
    const auto& w = windows[static_cast<std::size_t>(level) * config.windows_per_class];
    const auto images = image_window(w, config.gabor);
    for (const auto* img : {&images.spatial, &images.dft, &images.gabor})
      write_image(img->pixels(), config.out / "samples" /
                                     image_filename("synth", w.window_index, img->modality(), img->label()));
  }

  const BenchmarkData data = build_benchmark(windows, config.augment_factor, config.eval.base_seed, config.gabor,
                                             config.eval.jobs);
  ExperimentResult result;
  result.report = evaluate(data, cnn_factory(config.train), config.eval);

  report_csv(result.report, config.out / "report.csv");
  for (int s = 0; s < kSystemCount; ++s) {
    const auto name = std::string(to_string(static_cast<System>(s)));
    confusion_csv(result.report.systems[static_cast<std::size_t>(s)].confusion, config.out / ("confusion_" + name + ".csv"));
  }
  for (std::size_t r = 0; r < result.report.histories.size(); ++r)
    for (int s = 0; s < kTrainedSystemCount; ++s)
      write_history_csv(result.report.histories[r][static_cast<std::size_t>(s)],
                        config.out / "logs" /
                            ("run" + std::to_string(r) + "_" + std::string(to_string(static_cast<System>(s))) + ".csv"));

  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace ecgf
