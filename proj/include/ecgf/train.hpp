#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "ecgf/nn.hpp"

namespace ecgf {

/// SGD-with-momentum settings. Defaults are the reference training values.
struct TrainConfig {
  double momentum = 0.9;
  double initial_learn_rate = 0.005;
  double lr_drop_factor = 0.5;
  int lr_drop_period = 10;  // epochs
  double l2_regularization = 0.004;
  int minibatch_size = 64;
  int max_epochs = 100;
  int patience = 10;  // epochs without validation improvement before stopping
  double validation_fraction = 0.1;
  std::uint64_t rng_seed = 42;

  /// Throws Error(invalid_argument) naming the offending field.
  void validate() const;

  /// Learn rate in effect during 0-based `epoch`.
  double learn_rate_at(int epoch) const;
};

/// One network input with its class and the id of the source window it was
/// derived from (augmented copies share their source's group).
struct Sample {
  std::vector<float> input;
  int label = 0;
  std::size_t group = 0;
};

using Dataset = std::vector<Sample>;

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learn_rate = 0.0;
};

struct TrainResult {
  nn::Network<float> model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  std::size_t steps_per_epoch = 0;
  bool stopped_early = false;
};

/// Tracks the best loss and signals a stop once `patience` epochs have passed
/// without strict improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  /// Returns true when training should stop after this epoch.
  bool observe(int epoch, double loss);

  int best_epoch() const noexcept { return best_epoch_; }
  double best_loss() const noexcept { return best_loss_; }
  bool improved() const noexcept { return improved_; }

 private:
  int patience_;
  int best_epoch_ = -1;
  double best_loss_ = 0.0;
  bool improved_ = false;
};

/// Applies one momentum step: v = momentum * v - lr * (g + l2 * W), W += v.
/// `grads` holds the batch-mean data gradient and is left modified.
class SgdMomentum {
 public:
  SgdMomentum(const nn::Network<float>& net, double momentum, double l2);

  void step(nn::Network<float>& net, nn::Gradients<float>& grads, double learn_rate);

 private:
  double momentum_;
  double l2_;
  std::vector<std::vector<float>> velocity_;
};

/// Splits by group: a seeded `fraction` of the groups (at least one when
/// there are two or more) goes to validation.
std::pair<Dataset, Dataset> carve_validation(const Dataset& data, double fraction, std::uint64_t seed);

/// Trains with an explicit validation set. An empty validation set falls back
/// to the training loss for early stopping. Returns the weights of the best
/// epoch. Throws empty_dataset, shape_mismatch, or divergence.
TrainResult train(nn::Network<float> model, const Dataset& train_set, const Dataset& validation,
                  const TrainConfig& config);

/// Carves `config.validation_fraction` of the groups off `data` first.
TrainResult train(nn::Network<float> model, const Dataset& data, const TrainConfig& config);

/// Mean cross-entropy, no regularization term.
double mean_loss(const nn::Network<float>& model, const Dataset& data);
double accuracy(const nn::Network<float>& model, const Dataset& data);

/// "epoch,train_loss,val_loss,lr"
void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path);

}  // namespace ecgf
