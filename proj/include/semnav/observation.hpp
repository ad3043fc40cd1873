#pragma once

#include <deque>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "semnav/featurizer.hpp"
#include "semnav/policynet.hpp"
#include "semnav/scene.hpp"
#include "semnav/semantics.hpp"

namespace semnav {

/// Visual features (and optionally frame semantics) for every valid pose of
/// one scene, computed once. Immutable and shareable across threads.
class ObservationTable {
public:
    ObservationTable(SceneSpec scene, const Featurizer& featurizer, const SentenceEncoder* encoder = nullptr);

    const SceneSpec& scene() const { return scene_; }
    bool has_semantics() const { return !semantics_.empty(); }
    int feature_dim() const { return feature_dim_; }
    int semantic_dim() const { return semantic_dim_; }

    const Eigen::VectorXd& visual(const Pose& pose) const { return visual_[scene_.pose_index(pose)]; }
    const Eigen::VectorXd& semantics(const Pose& pose) const { return semantics_[scene_.pose_index(pose)]; }

private:
    SceneSpec scene_;
    int feature_dim_ = 0;
    int semantic_dim_ = 0;
    std::vector<Eigen::VectorXd> visual_;
    std::vector<Eigen::VectorXd> semantics_;
};

using ObservationTablePtr = std::shared_ptr<const ObservationTable>;

std::vector<ObservationTablePtr> build_observation_tables(const std::vector<SceneSpec>& scenes,
                                                          const FeaturizerConfig& features,
                                                          const SentenceEncoder* encoder);

/// The last four visited poses, oldest first. A new episode replicates its
/// first pose four times.
class PoseHistory {
public:
    explicit PoseHistory(const Pose& start);
    void push(const Pose& pose);
    const std::deque<Pose>& poses() const { return poses_; }

private:
    std::deque<Pose> poses_;
};

/// Assembles the network input for the current history and target.
NetInput make_input(const ObservationTable& obs, const PoseHistory& history, const Pose& target, Variant variant);

}  // namespace semnav
