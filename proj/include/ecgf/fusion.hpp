#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ecgf/scores.hpp"

namespace ecgf {

enum class FusionMethod { mean, weighted_mean, majority_vote };

std::string_view to_string(FusionMethod m);
FusionMethod parse_fusion_method(std::string_view name);

/// How the spatial, dft and gabor score vectors are combined. Weights are
/// present exactly when the method is weighted_mean.
struct FusionPolicy {
  FusionMethod method = FusionMethod::mean;
  std::optional<std::array<double, 3>> weights;

  void validate() const;
};

/// Decision-level fusion of exactly three score vectors, in spatial, dft,
/// gabor order.
///   mean:          elementwise average
///   weighted_mean: sum of w_i * s_i
///   majority_vote: one-hot of the modal argmax; without a strict majority it
///                  falls back to the mean's argmax
/// The result is renormalized to sum to 1.
ScoreVector fuse(std::span<const ScoreVector> scores, const FusionPolicy& policy = {});

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of the distinct groups; floor(ratio * groups) of them train,
/// the rest test. Returns item indices, so every augmented copy follows its
/// group. Needs at least 20 groups.
SplitIndices split_dataset(std::span<const std::size_t> group_of_item, double ratio, std::uint64_t seed);

/// Number of training groups for `groups` groups at `ratio`.
std::size_t train_group_count(std::size_t groups, double ratio);

}  // namespace ecgf
