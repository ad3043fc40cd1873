#pragma once

// Synthetic observation model: per-pose visual feature vectors (stand-in for
// frozen CNN features) and templated region captions with boxes and
// confidences (stand-in for a dense captioner).

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semnav/scene.hpp"

namespace semnav {

struct FeaturizerConfig {
    int dim = 128;
    std::uint64_t feature_seed = 1;
    double fov_deg = 90.0;
    double range = 5.0;
    /// confidence = clamp(1 - dist / range * conf_slope, conf_min, 1)
    double conf_slope = 0.7;
    double conf_min = 0.05;
};

/// Normalized image box [x_min, y_min, x_max, y_max].
using Box = std::array<double, 4>;

inline double box_area(const Box& b) { return (b[2] - b[0]) * (b[3] - b[1]); }

struct VisibleObject {
    std::size_t object_index = 0;
    Box box{};
    double confidence = 0.0;
    double distance = 0.0;
};

struct Annotation {
    Box box{};
    double confidence = 0.0;
    std::vector<std::string> tokens;
    friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// Objects inside the forward view cone with an unobstructed line of sight,
/// in object-index order.
std::vector<VisibleObject> visible_objects(const SceneSpec& scene, const Pose& pose,
                                           const FeaturizerConfig& config = {});

/// One caption per visible object, same order as visible_objects().
std::vector<Annotation> annotate(const SceneSpec& scene, const Pose& pose, const FeaturizerConfig& config = {});

/// Caption template instantiation for object `index` of `scene`.
std::vector<std::string> caption_tokens(const SceneSpec& scene, std::size_t index);

/// Precomputed random basis for one (feature_seed, dim) pair. Immutable.
class Featurizer {
public:
    explicit Featurizer(FeaturizerConfig config);

    const FeaturizerConfig& config() const { return config_; }
    Eigen::VectorXd features(const SceneSpec& scene, const Pose& pose) const;

private:
    Eigen::VectorXd class_signature(const std::string& token, std::uint64_t salt) const;

    FeaturizerConfig config_;
    Eigen::MatrixXd freq_;   // dim x 4: x, y, cos(heading), sin(heading)
    Eigen::VectorXd phase_;  // dim
    Eigen::VectorXd depth_;  // dim
};

Eigen::VectorXd visual_features(const SceneSpec& scene, const Pose& pose, std::uint64_t feature_seed, int dim);

/// `dump-annotations` record: tab-separated scene id, x, y, heading, then
/// one `conf:x_min,y_min,x_max,y_max:tok tok ...` field per annotation.
std::string annotation_line(const SceneSpec& scene, const Pose& pose, const std::vector<Annotation>& annotations);

}  // namespace semnav
