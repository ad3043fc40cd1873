#include "semnav/observation.hpp"

#include "semnav/error.hpp"

namespace semnav {

ObservationTable::ObservationTable(SceneSpec scene, const Featurizer& featurizer, const SentenceEncoder* encoder)
    : scene_(std::move(scene)), feature_dim_(featurizer.config().dim) {
    visual_.resize(scene_.pose_slots());
    if (encoder != nullptr) {
        semantic_dim_ = static_cast<int>(frame_semantics_size(static_cast<std::size_t>(encoder->code_dim())));
        semantics_.resize(scene_.pose_slots());
    }
    for (const Pose& p : scene_.valid_poses()) {
        const auto i = scene_.pose_index(p);
        visual_[i] = featurizer.features(scene_, p);
        if (encoder != nullptr) {
            const auto annotations = annotate(scene_, p, featurizer.config());
            semantics_[i] = frame_semantics(annotations, *encoder);
        }
    }
}

std::vector<ObservationTablePtr> build_observation_tables(const std::vector<SceneSpec>& scenes,
                                                          const FeaturizerConfig& features,
                                                          const SentenceEncoder* encoder) {
    const Featurizer featurizer(features);
    std::vector<ObservationTablePtr> out;
    out.reserve(scenes.size());
    for (const SceneSpec& s : scenes) out.push_back(std::make_shared<const ObservationTable>(s, featurizer, encoder));
    return out;
}

PoseHistory::PoseHistory(const Pose& start) : poses_(kHistoryFrames, start) {}

void PoseHistory::push(const Pose& pose) {
    poses_.pop_front();
    poses_.push_back(pose);
}

NetInput make_input(const ObservationTable& obs, const PoseHistory& history, const Pose& target, Variant variant) {
    NetInput in;
    in.scene_type = obs.scene().scene_type();
    const Eigen::Index f = obs.feature_dim();
    in.history.resize(kHistoryFrames * f);
    for (int k = 0; k < kHistoryFrames; ++k) {
        in.history.segment(k * f, f) = obs.visual(history.poses()[static_cast<std::size_t>(k)]);
    }
    in.target = obs.visual(target);
    if (variant == Variant::SSN) {
        if (!obs.has_semantics()) throw ContractError("SSN input requested but no semantics were computed");
        const Eigen::Index s = obs.semantic_dim();
        in.sem_history.resize(kHistoryFrames * s);
        for (int k = 0; k < kHistoryFrames; ++k) {
            in.sem_history.segment(k * s, s) = obs.semantics(history.poses()[static_cast<std::size_t>(k)]);
        }
        in.sem_target = obs.semantics(target);
    }
    return in;
}

}  // namespace semnav
