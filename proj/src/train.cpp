#include "ecgf/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "ecgf/error.hpp"

namespace ecgf {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_argument, what); };
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
  if (!(initial_learn_rate > 0.0)) fail("initial_learn_rate must be positive");
  if (!(lr_drop_factor > 0.0)) fail("lr_drop_factor must be positive");
  if (lr_drop_period < 1) fail("lr_drop_period must be at least 1");
  if (!(l2_regularization >= 0.0)) fail("l2_regularization must be non-negative");
  if (minibatch_size < 1) fail("minibatch_size must be at least 1");
  if (max_epochs < 1) fail("max_epochs must be at least 1");
  if (patience < 1) fail("patience must be at least 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) fail("validation_fraction must be in [0, 1)");
}

double TrainConfig::learn_rate_at(int epoch) const {
  return initial_learn_rate * std::pow(lr_drop_factor, epoch / lr_drop_period);
}

bool EarlyStopper::observe(int epoch, double loss) {
  improved_ = best_epoch_ < 0 || loss < best_loss_;
  if (improved_) {
    best_loss_ = loss;
    best_epoch_ = epoch;
  }
  return epoch - best_epoch_ >= patience_;
}

SgdMomentum::SgdMomentum(const nn::Network<float>& net, double momentum, double l2) : momentum_(momentum), l2_(l2) {
  for (const auto& l : net.layers()) velocity_.emplace_back(l->params().size(), 0.0f);
}

void SgdMomentum::step(nn::Network<float>& net, nn::Gradients<float>& grads, double learn_rate) {
  nn::add_weight_decay(net, grads, l2_);
  const auto m = static_cast<float>(momentum_);
  const auto lr = static_cast<float>(learn_rate);
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto params = layers[l]->params();
    auto& v = velocity_[l];
    const auto& g = grads.layers[l];
    for (std::size_t i = 0; i < params.size(); ++i) {
      v[i] = m * v[i] - lr * g[i];
      params[i] += v[i];
    }
  }
}

std::pair<Dataset, Dataset> carve_validation(const Dataset& data, double fraction, std::uint64_t seed) {
  std::set<std::size_t> group_set;
  for (const auto& s : data) group_set.insert(s.group);
  std::vector<std::size_t> groups(group_set.begin(), group_set.end());
  std::mt19937_64 rng(seed);
  std::shuffle(groups.begin(), groups.end(), rng);

  auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(groups.size())));
  if (fraction > 0.0 && groups.size() >= 2) n_val = std::clamp<std::size_t>(n_val, 1, groups.size() - 1);
  const std::set<std::size_t> val_groups(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(n_val));

  Dataset train_set, val_set;
  for (const auto& s : data) (val_groups.count(s.group) ? val_set : train_set).push_back(s);
  return {std::move(train_set), std::move(val_set)};
}

double mean_loss(const nn::Network<float>& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  nn::Workspace<float> ws;
  double total = 0.0;
  for (const auto& s : data) {
    const auto probs = ws.forward(model, s.input);
    total -= std::log(std::max(static_cast<double>(probs[static_cast<std::size_t>(s.label)]), 1e-30));
  }
  return total / static_cast<double>(data.size());
}

double accuracy(const nn::Network<float>& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : data) hits += model.predict(s.input).argmax() == s.label ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

TrainResult train(nn::Network<float> model, const Dataset& train_set, const Dataset& validation,
                  const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw Error(ErrorCode::empty_dataset, "training set is empty");
  const std::size_t input_size = model.input_shape().size();
  for (const auto* set : {&train_set, &validation})
    for (const auto& s : *set)
      if (s.input.size() != input_size)
        throw Error(ErrorCode::shape_mismatch, "sample has " + std::to_string(s.input.size()) +
                                                   " values, model expects " + std::to_string(input_size));

  std::mt19937_64 rng(config.rng_seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  const auto batch = static_cast<std::size_t>(config.minibatch_size);
  TrainResult result{model, {}, 0, (train_set.size() + batch - 1) / batch, false};
  SgdMomentum optimizer(model, config.momentum, config.l2_regularization);
  EarlyStopper stopper(config.patience);
  nn::Workspace<float> ws;
  auto grads = model.zero_gradients();

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double lr = config.learn_rate_at(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      grads.zero();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& s = train_set[order[i]];
        batch_loss += ws.accumulate(model, s.input, s.label, grads);
      }
      if (!std::isfinite(batch_loss))
        throw Error(ErrorCode::divergence, "non-finite loss in epoch " + std::to_string(epoch) + " at sample " +
                                               std::to_string(start));
      grads.scale(1.0f / static_cast<float>(end - start));
      optimizer.step(model, grads, lr);
      epoch_loss += batch_loss;
    }
    const double train_loss = epoch_loss / static_cast<double>(train_set.size());
    const double val_loss = validation.empty() ? train_loss : mean_loss(model, validation);
    if (!std::isfinite(val_loss))
      throw Error(ErrorCode::divergence, "non-finite validation loss in epoch " + std::to_string(epoch));
    result.history.push_back({epoch, train_loss, val_loss, lr});

    const bool stop = stopper.observe(epoch, val_loss);
    if (stopper.improved()) {
      result.model = model;
      result.best_epoch = epoch;
    }
    if (stop) {
      result.stopped_early = epoch + 1 < config.max_epochs;
      break;
    }
  }
  return result;
}

TrainResult train(nn::Network<float> model, const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw Error(ErrorCode::empty_dataset, "training set is empty");
  auto [train_set, val_set] = carve_validation(data, config.validation_fraction, config.rng_seed ^ 0x5eedULL);
  return train(std::move(model), train_set, val_set, config);
}

void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::unwritable_path, "cannot write " + path.string());
  out << "epoch,train_loss,val_loss,lr\n";
  char line[160];
  for (const auto& h : history) {
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g\n", h.epoch, h.train_loss, h.val_loss, h.learn_rate);
    out << line;
  }
  if (!out) throw Error(ErrorCode::unwritable_path, "failed writing " + path.string());
}

}  // namespace ecgf
