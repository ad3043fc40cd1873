#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "semnav/featurizer.hpp"
#include "semnav/scene.hpp"

namespace semnav {

enum class TargetMode : std::uint8_t { Random = 0, ObjectOriented = 1, TopSemantic = 2 };

std::string_view to_string(TargetMode mode);
/// Accepts "random", "object", "object_oriented", "top-semantic", "top_semantic".
TargetMode parse_target_mode(std::string_view token);

struct Target {
    Pose pose;
    TargetMode mode = TargetMode::Random;
    friend bool operator==(const Target&, const Target&) = default;
};

/// Scores a pose by how much semantic information its frame carries.
using PoseScorer = std::function<double(const Pose&)>;

/// Sum of the five highest annotation confidences visible from a pose.
PoseScorer confidence_sum_scorer(const SceneSpec& scene, const FeaturizerConfig& view = {});

/// Picks `k` distinct target poses.
///  - Random: uniform over valid poses.
///  - ObjectOriented: only poses seeing at least one object; candidates that
///    share a visible object with already chosen targets are preferred.
///  - TopSemantic: the k highest-scoring poses under `scorer` (ties by pose index).
/// Poses listed in `exclude` are never returned. Throws ContractError naming
/// the mode when fewer than k poses qualify.
std::vector<Target> select_targets(const SceneSpec& scene, TargetMode mode, int k, std::uint64_t seed,
                                   const PoseScorer& scorer = {}, std::span<const Pose> exclude = {},
                                   const FeaturizerConfig& view = {});

}  // namespace semnav
