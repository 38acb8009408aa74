// ecgf: synthetic ECG stress-level pipeline from the command line.
//
//   ecgf generate   --per-class N --seed S --out DIR
//   ecgf peaks      record.csv --out FILE
//   ecgf image      record.csv --out DIR
//   ecgf transform  --modality {dft,gabor} in.pgm out.pgm
//   ecgf train      --data DIR --modality spatial --out DIR
//   ecgf eval       --data DIR --out DIR
//   ecgf fuse       --models DIR --spatial img.pgm --out scores.csv
//   ecgf experiment --seed 42 --out DIR
//
// Exit status: 0 success, 1 usage error, 2 runtime error.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ecgf/error.hpp"
#include "ecgf/experiment.hpp"
#include "ecgf/image_io.hpp"
#include "ecgf/keyvalue.hpp"
#include "ecgf/rpeak.hpp"
#include "ecgf/signal.hpp"
#include "ecgf/synth.hpp"
#include "ecgf/train.hpp"

namespace fs = std::filesystem;
using namespace ecgf;

namespace {

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

void add_seed_option(CLI::App* app, std::uint64_t& seed) {
  app->add_option("--seed", seed, "RNG seed")->envname("ECGF_SEED")->capture_default_str();
}

void add_train_options(CLI::App* app, TrainConfig& t) {
  app->add_option("--momentum", t.momentum, "SGD momentum")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
  app->add_option("--learn-rate", t.initial_learn_rate, "initial learn rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--drop-factor", t.lr_drop_factor, "learn rate drop factor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--drop-period", t.lr_drop_period, "epochs between learn rate drops")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--l2", t.l2_regularization, "L2 regularization")->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--minibatch", t.minibatch_size, "minibatch size")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--max-epochs", t.max_epochs, "epoch budget")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--patience", t.patience, "early-stop patience in epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--validation-fraction", t.validation_fraction, "fraction of source windows held out for validation")
      ->check(CLI::Range(0.0, 0.99))
      ->capture_default_str();
}

void add_gabor_options(CLI::App* app, GaborParams& g) {
  app->add_option("--sigma", g.sigma, "Gabor envelope spread")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--freq", g.freq, "Gabor frequency, cycles/pixel")->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--omega", g.omega, "Gabor orientation, rad")->capture_default_str();
  app->add_option("--theta", g.theta, "Gabor phase, rad")->capture_default_str();
  app->add_option("--amplitude", g.amplitude, "Gabor envelope magnitude")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--support", g.support, "Gabor kernel side (odd)")
      ->check(CLI::Range(3, 1001) & CLI::Validator([](std::string& v) {
                return std::stoi(v) % 2 == 1 ? std::string() : std::string("must be odd");
              }, "ODD"))
      ->capture_default_str();
}

struct FusionOptions {
  std::string method = "mean";
  std::vector<double> weights;

  FusionPolicy policy() const {
    FusionPolicy p;
    p.method = parse_fusion_method(method);
    if (!weights.empty()) {
      if (weights.size() != 3) throw CLI::ValidationError("--weights", "expects exactly three values");
      p.weights = std::array<double, 3>{weights[0], weights[1], weights[2]};
    }
    try {
      p.validate();
    } catch (const Error& e) {
      throw CLI::ValidationError("--fusion/--weights", e.what());
    }
    return p;
  }
};

void add_fusion_options(CLI::App* app, FusionOptions& f) {
  app->add_option("--fusion", f.method, "score fusion rule")
      ->check(CLI::IsMember({"mean", "weighted-mean", "majority-vote"}))
      ->capture_default_str();
  app->add_option("--weights", f.weights, "spatial,dft,gabor weights for weighted-mean")->delimiter(',');
}

std::vector<LabeledWindow> load_data_dir(const fs::path& dir, double fs) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::missing_file, dir.string() + " is not a directory");
  std::vector<fs::path> records;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".csv") records.push_back(entry.path());
  std::sort(records.begin(), records.end());
  std::vector<LabeledWindow> windows;
  for (const auto& path : records) {
    auto labels_path = path;
    labels_path.replace_extension(".labels");
    const auto record = load_ecg(path, fs);
    const auto labels = load_labels(labels_path);
    for (auto& w : windowize(record, labels)) windows.push_back(std::move(w));
  }
  if (windows.empty()) throw Error(ErrorCode::empty_dataset, "no ECG records found in " + dir.string());
  return windows;
}

void write_peaks(const RPeakList& peaks, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::unwritable_path, "cannot write " + path.string());
  for (auto i : peaks.indices) out << i << '\n';
}

void write_train_config(const TrainConfig& t, const std::string& modality, int augment, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::unwritable_path, "cannot write " + path.string());
  out << "modality = " << modality << '\n'
      << "momentum = " << t.momentum << '\n'
      << "learn-rate = " << t.initial_learn_rate << '\n'
      << "drop-factor = " << t.lr_drop_factor << '\n'
      << "drop-period = " << t.lr_drop_period << '\n'
      << "l2 = " << t.l2_regularization << '\n'
      << "minibatch = " << t.minibatch_size << '\n'
      << "max-epochs = " << t.max_epochs << '\n'
      << "patience = " << t.patience << '\n'
      << "validation-fraction = " << t.validation_fraction << '\n'
      << "seed = " << t.rng_seed << '\n'
      << "augment = " << augment << '\n';
}

// Fills options not given on the command line (or via the environment) from a
// key = value file. Keys are long option names without the leading dashes.
void apply_config(CLI::App* sub, const fs::path& path) {
  KeyValues entries;
  try {
    entries = load_key_values(path);
  } catch (const Error& e) {
    throw CLI::ValidationError("--config", e.what());
  }
  for (const auto& [key, value] : entries) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") throw CLI::ValidationError("--config", "unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

void print_summary(const EvalReport& report) {
  for (int s = 0; s < kSystemCount; ++s)
    std::fprintf(stderr, "%-8s mean accuracy %.4f\n", std::string(to_string(static_cast<System>(s))).c_str(),
                 report.systems[static_cast<std::size_t>(s)].mean_accuracy());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multidomain ECG stress-level classification"};
  app.require_subcommand(1);
  app.fallthrough(false);
  std::optional<fs::path> config_path;

  // generate
  std::size_t per_class = 36;
  std::uint64_t seed = 42;
  fs::path out_path;
  std::optional<fs::path> profile_path;
  auto* generate = app.add_subcommand("generate", "write synthetic ECG records, labels and ground-truth peaks");
  generate->add_option("--config", config_path, "key = value file applied before flags")->check(CLI::ExistingFile);
  generate->add_option("--per-class", per_class, "windows per stress level")->check(CLI::PositiveNumber)->capture_default_str();
  add_seed_option(generate, seed);
  generate->add_option("--profile", profile_path, "profile file (key = value)")->check(CLI::ExistingFile);
  generate->add_option("--out", out_path, "output directory")->required();

  // peaks
  fs::path input_path;
  double fs_hz = kDefaultFs;
  auto* peaks = app.add_subcommand("peaks", "detect R peaks, one sample index per line");
  peaks->add_option("--config", config_path, "key = value file applied before flags")->check(CLI::ExistingFile);
  peaks->add_option("input", input_path, "ECG CSV")->required()->check(CLI::ExistingFile);
  peaks->add_option("--fs", fs_hz, "sampling rate, Hz")->check(CLI::PositiveNumber)->capture_default_str();
  peaks->add_option("--out", out_path, "output file")->required();

  // image
  std::optional<fs::path> labels_path;
  std::string subject;
  std::string format = "pgm";
  auto* image = app.add_subcommand("image", "render spatial signal images, one per 30 s window");
  image->add_option("--config", config_path, "key = value file applied before flags")->check(CLI::ExistingFile);
  image->add_option("input", input_path, "ECG CSV")->required()->check(CLI::ExistingFile);
  image->add_option("--labels", labels_path, "label file (default: <input>.labels)")->check(CLI::ExistingFile);
  image->add_option("--fs", fs_hz, "sampling rate, Hz")->check(CLI::PositiveNumber)->capture_default_str();
  image->add_option("--subject", subject, "subject id used in file names (default: input stem)");
  image->add_option("--format", format, "image format")->check(CLI::IsMember({"pgm", "png"}))->capture_default_str();
  image->add_option("--out", out_path, "output directory")->required();

  // transform
  std::string modality = "dft";
  GaborParams gabor;
  fs::path transform_out;
  auto* transform = app.add_subcommand("transform", "convert a spatial signal image to the DFT or Gabor modality");
  transform->add_option("--config", config_path, "key = value file applied before flags")->check(CLI::ExistingFile);
  transform->add_option("--modality", modality, "target modality")
      ->check(CLI::IsMember({"dft", "gabor"}))
      ->capture_default_str();
  add_gabor_options(transform, gabor);
  transform->add_option("input", input_path, "116x116 image (.pgm/.png)")->required()->check(CLI::ExistingFile);
  transform->add_option("output", transform_out, "output image (.pgm/.png)")->required();

  // train
  TrainConfig train_config;
  fs::path data_dir;
  int augment_factor = 7;
  std::string train_modality = "spatial";
  auto* train_cmd = app.add_subcommand("train", "train one classifier on a generated data directory");
  train_cmd->add_option("--config", config_path, "key = value file applied before flags")->check(CLI::ExistingFile);
  train_cmd->add_option("--data", data_dir, "directory of ECG CSV + .labels files")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--modality", train_modality, "input modality")
      ->check(CLI::IsMember({"raw1d", "spatial", "dft", "gabor"}))
      ->capture_default_str();
  train_cmd->add_option("--augment", augment_factor, "augmented variants per image")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--fs", fs_hz, "sampling rate, Hz")->check(CLI::PositiveNumber)->capture_default_str();
  add_train_options(train_cmd, train_config);
  add_gabor_options(train_cmd, gabor);
  add_seed_option(train_cmd, seed);
  train_cmd->add_option("--out", out_path, "output directory")->required();

  // eval
  int runs = 10;
  unsigned jobs = default_jobs();
  FusionOptions fusion;
  TrainConfig eval_train = ExperimentConfig::default_experiment_training();
  auto* eval = app.add_subcommand("eval", "repeated 85/15 evaluation of all systems on a data directory");
  eval->add_option("--config", config_path, "key = value file applied before flags")->check(CLI::ExistingFile);
  eval->add_option("--data", data_dir, "directory of ECG CSV + .labels files")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--runs", runs, "random splits")->check(CLI::PositiveNumber)->capture_default_str();
  eval->add_option("--augment", augment_factor, "augmented variants per image")->check(CLI::PositiveNumber)->capture_default_str();
  eval->add_option("--fs", fs_hz, "sampling rate, Hz")->check(CLI::PositiveNumber)->capture_default_str();
  eval->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  add_train_options(eval, eval_train);
  add_gabor_options(eval, gabor);
  add_fusion_options(eval, fusion);
  add_seed_option(eval, seed);
  eval->add_option("--out", out_path, "output directory")->required();

  // fuse
  fs::path models_dir;
  fs::path spatial_path;
  std::optional<fs::path> dft_path, gabor_path;
  auto* fuse_cmd = app.add_subcommand("fuse", "score one image triple with saved models and fuse");
  fuse_cmd->add_option("--config", config_path, "key = value file applied before flags")->check(CLI::ExistingFile);
  fuse_cmd->add_option("--models", models_dir, "directory holding spatial.ecgf, dft.ecgf, gabor.ecgf")
      ->required()
      ->check(CLI::ExistingDirectory);
  fuse_cmd->add_option("--spatial", spatial_path, "spatial image")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("--dft", dft_path, "DFT image (default: computed from --spatial)")->check(CLI::ExistingFile);
  fuse_cmd->add_option("--gabor", gabor_path, "Gabor image (default: computed from --spatial)")->check(CLI::ExistingFile);
  add_gabor_options(fuse_cmd, gabor);
  add_fusion_options(fuse_cmd, fusion);
  fuse_cmd->add_option("--out", out_path, "output CSV")->required();

  // experiment
  ExperimentConfig experiment;
  auto* exp = app.add_subcommand("experiment", "generate, image, augment, transform, evaluate and report");
  exp->add_option("--config", config_path, "key = value file applied before flags")->check(CLI::ExistingFile);
  exp->add_option("--per-class", per_class, "windows per stress level")->check(CLI::PositiveNumber)->capture_default_str();
  exp->add_option("--augment", augment_factor, "augmented variants per image")->check(CLI::PositiveNumber)->capture_default_str();
  exp->add_option("--runs", runs, "random splits")->check(CLI::PositiveNumber)->capture_default_str();
  exp->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  exp->add_option("--profile", profile_path, "synthetic profile file (key = value)")->check(CLI::ExistingFile);
  add_train_options(exp, experiment.train);
  add_gabor_options(exp, gabor);
  add_fusion_options(exp, fusion);
  add_seed_option(exp, seed);
  exp->add_option("--out", out_path, "output directory")->required();

  FusionPolicy policy;
  try {
    app.parse(argc, argv);
    if (config_path) apply_config(app.get_subcommands().front(), *config_path);
    if (eval->parsed() || fuse_cmd->parsed() || exp->parsed()) policy = fusion.policy();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (generate->parsed()) {
      SynthProfile profile = profile_path ? load_profile(*profile_path) : SynthProfile::defaults();
      profile.rng_seed = seed;
      fs::create_directories(out_path);
      const std::size_t windows_per_record = static_cast<std::size_t>(profile.duration / kWindowSeconds);
      std::size_t index = 0;
      for (int level = 0; level < kClassCount; ++level) {
        for (std::size_t k = 0; k < per_class; ++k, ++index) {
          const auto rec = generate_record(profile, StressLabel(level), profile.duration, index);
          char stem[32];
          std::snprintf(stem, sizeof stem, "synth_%04zu", index);
          save_ecg(rec.ecg, out_path / (std::string(stem) + ".csv"));
          save_labels(std::vector<StressLabel>(windows_per_record, StressLabel(level)),
                      out_path / (std::string(stem) + ".labels"));
          write_peaks(rec.truth, out_path / (std::string(stem) + ".peaks"));
        }
      }
      std::cerr << "wrote " << index << " records to " << out_path << '\n';
    } else if (peaks->parsed()) {
      const auto record = load_ecg(input_path, fs_hz);
      const auto found = detect_r_peaks(record.samples(), record.fs());
      if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
      write_peaks(found, out_path);
      std::cerr << found.size() << " peaks\n";
    } else if (image->parsed()) {
      const auto record = load_ecg(input_path, fs_hz);
      fs::path lp = labels_path.value_or(fs::path(input_path).replace_extension(".labels"));
      const auto labels = load_labels(lp);
      const std::string subj = subject.empty() ? input_path.stem().string() : subject;
      fs::create_directories(out_path);
      for (const auto& w : windowize(record, labels)) {
        const auto img = window_to_image(w);
        write_image(img.pixels(), out_path / image_filename(subj, w.window_index, Modality::spatial, w.label, format));
      }
    } else if (transform->parsed()) {
      const SignalImage input(read_image(input_path), Modality::spatial, StressLabel(0));
      const SignalImage result = modality == "dft" ? dft_transform(input) : gabor_transform(input, gabor);
      if (transform_out.has_parent_path()) fs::create_directories(transform_out.parent_path());
      write_image(result.pixels(), transform_out);
    } else if (train_cmd->parsed()) {
      train_config.rng_seed = seed;
      const auto windows = load_data_dir(data_dir, fs_hz);
      const auto data = build_benchmark(windows, augment_factor, seed, gabor, default_jobs());
      const auto system = train_modality == "raw1d" ? 0 : static_cast<std::size_t>(parse_modality(train_modality)) + 1;
      auto net = system == 0 ? nn::build_1d_cnn<float>(seed) : nn::build_2d_cnn<float>(seed);
      const auto result = ecgf::train(std::move(net), data.pools[system], train_config);
      fs::create_directories(out_path);
      nn::save_model(result.model, out_path / (train_modality + ".ecgf"));
      write_history_csv(result.history, out_path / "train_log.csv");
      write_train_config(train_config, train_modality, augment_factor, out_path / "train_config.txt");
      std::cerr << "best epoch " << result.best_epoch << ", train accuracy "
                << accuracy(result.model, data.originals[system]) << '\n';
    } else if (eval->parsed()) {
      const auto windows = load_data_dir(data_dir, fs_hz);
      const auto data = build_benchmark(windows, augment_factor, seed, gabor, jobs);
      EvalConfig ec;
      ec.runs = runs;
      ec.base_seed = seed;
      ec.policy = policy;
      ec.jobs = jobs;
      const auto report = evaluate(data, cnn_factory(eval_train), ec);
      fs::create_directories(out_path / "logs");
      report_csv(report, out_path / "report.csv");
      for (int s = 0; s < kSystemCount; ++s) {
        const auto name = std::string(to_string(static_cast<System>(s)));
        confusion_csv(report.systems[static_cast<std::size_t>(s)].confusion, out_path / ("confusion_" + name + ".csv"));
      }
      for (std::size_t r = 0; r < report.histories.size(); ++r)
        for (int s = 0; s < kTrainedSystemCount; ++s)
          write_history_csv(report.histories[r][static_cast<std::size_t>(s)],
                            out_path / "logs" /
                                ("run" + std::to_string(r) + "_" + std::string(to_string(static_cast<System>(s))) + ".csv"));
      print_summary(report);
    } else if (fuse_cmd->parsed()) {
      const SignalImage spatial(read_image(spatial_path), Modality::spatial, StressLabel(0));
      const SignalImage dft = dft_path ? SignalImage(read_image(*dft_path), Modality::dft, StressLabel(0)) : dft_transform(spatial);
      const SignalImage gab = gabor_path ? SignalImage(read_image(*gabor_path), Modality::gabor, StressLabel(0))
                                         : gabor_transform(spatial, gabor);
      std::array<ScoreVector, 3> scores;
      const std::array<const SignalImage*, 3> images{&spatial, &dft, &gab};
      const std::array<const char*, 3> names{"spatial", "dft", "gabor"};
      for (std::size_t i = 0; i < 3; ++i)
        scores[i] = nn::load_model(models_dir / (std::string(names[i]) + ".ecgf")).predict(image_input(*images[i]));
      const ScoreVector fused = fuse(scores, policy);
      if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw Error(ErrorCode::unwritable_path, "cannot write " + out_path.string());
      out << "system,p0,p1,p2,p3,p4,argmax\n";
      auto row = [&](const char* name, const ScoreVector& s) {
        char line[256];
        std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%d\n", name, s.probs[0], s.probs[1], s.probs[2],
                      s.probs[3], s.probs[4], s.argmax());
        out << line;
      };
      for (std::size_t i = 0; i < 3; ++i) row(names[i], scores[i]);
      row("fused", fused);
    } else if (exp->parsed()) {
      experiment.profile = profile_path ? load_profile(*profile_path) : SynthProfile::defaults();
      experiment.profile.rng_seed = seed;
      experiment.windows_per_class = per_class;
      experiment.augment_factor = augment_factor;
      experiment.eval.runs = runs;
      experiment.eval.base_seed = seed;
      experiment.eval.policy = policy;
      experiment.eval.jobs = jobs;
      experiment.gabor = gabor;
      experiment.out = out_path;
      const auto result = run_experiment(experiment);
      print_summary(result.report);
      std::fprintf(stderr, "finished in %.1f s\n", result.seconds);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
