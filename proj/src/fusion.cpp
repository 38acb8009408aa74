#include "ecgf/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>

#include "ecgf/error.hpp"

namespace ecgf {

namespace {

constexpr std::size_t kMinGroups = 20;

ScoreVector renormalize(const std::array<double, kClassCount>& v) { return ScoreVector::normalized(v); }

}  // namespace

std::string_view to_string(FusionMethod m) {
  switch (m) {
    case FusionMethod::mean: return "mean";
    case FusionMethod::weighted_mean: return "weighted-mean";
    case FusionMethod::majority_vote: return "majority-vote";
  }
  return "unknown";
}

FusionMethod parse_fusion_method(std::string_view name) {
  if (name == "mean") return FusionMethod::mean;
  if (name == "weighted-mean") return FusionMethod::weighted_mean;
  if (name == "majority-vote") return FusionMethod::majority_vote;
  throw Error(ErrorCode::invalid_argument, "unknown fusion method '" + std::string(name) + "'");
}

void FusionPolicy::validate() const {
  if ((method == FusionMethod::weighted_mean) != weights.has_value())
    throw Error(ErrorCode::invalid_argument, "fusion weights must be given exactly when the method is weighted-mean");
  if (weights) {
    double sum = 0.0;
    for (double w : *weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::invalid_argument, "fusion weights must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::invalid_argument, "fusion weights must sum to 1");
  }
}

ScoreVector fuse(std::span<const ScoreVector> scores, const FusionPolicy& policy) {
  policy.validate();
  if (scores.size() != 3) throw Error(ErrorCode::shape_mismatch, "fusion needs exactly three score vectors");
  for (const auto& s : scores)
    if (!s.is_valid()) throw Error(ErrorCode::invalid_argument, "fusion input is not a probability vector");

  std::array<double, kClassCount> mean{};
  for (const auto& s : scores)
    for (std::size_t c = 0; c < kClassCount; ++c) mean[c] += s.probs[c] / 3.0;

  switch (policy.method) {
    case FusionMethod::mean:
      return renormalize(mean);
    case FusionMethod::weighted_mean: {
      std::array<double, kClassCount> acc{};
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t c = 0; c < kClassCount; ++c) acc[c] += (*policy.weights)[i] * scores[i].probs[c];
      return renormalize(acc);
    }
    case FusionMethod::majority_vote: {
      std::array<int, kClassCount> votes{};
      for (const auto& s : scores) ++votes[static_cast<std::size_t>(s.argmax())];
      const auto top = std::max_element(votes.begin(), votes.end());
      const bool unique = std::count(votes.begin(), votes.end(), *top) == 1;
      std::array<double, kClassCount> onehot{};
      const int winner = unique ? static_cast<int>(top - votes.begin()) : renormalize(mean).argmax();
      onehot[static_cast<std::size_t>(winner)] = 1.0;
      return renormalize(onehot);
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown fusion method");
}

std::size_t train_group_count(std::size_t groups, double ratio) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(groups) + 1e-9));
}

SplitIndices split_dataset(std::span<const std::size_t> group_of_item, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::invalid_argument, "split ratio must be in (0, 1)");
  const std::set<std::size_t> distinct(group_of_item.begin(), group_of_item.end());
  if (distinct.size() < kMinGroups)
    throw Error(ErrorCode::dataset_too_small,
                "need at least 20 source windows to split, got " + std::to_string(distinct.size()));

  std::vector<std::size_t> groups(distinct.begin(), distinct.end());
  std::mt19937_64 rng(seed);
  std::shuffle(groups.begin(), groups.end(), rng);
  const std::size_t n_train = train_group_count(groups.size(), ratio);
  const std::set<std::size_t> train_groups(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(n_train));

  SplitIndices split;
  for (std::size_t i = 0; i < group_of_item.size(); ++i)
    (train_groups.count(group_of_item[i]) ? split.train : split.test).push_back(i);
  return split;
}

}  // namespace ecgf
