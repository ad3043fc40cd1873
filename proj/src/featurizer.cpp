#include "semnav/featurizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "semnav/error.hpp"

namespace semnav {

namespace {

constexpr std::array<int, 4> kDx = {0, 1, 0, -1};
constexpr std::array<int, 4> kDy = {-1, 0, 1, 0};

std::uint64_t fnv1a(const std::string& s, std::uint64_t salt) {
    std::uint64_t h = 1469598103934665603ULL ^ salt;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool line_of_sight(const SceneSpec& scene, Cell from, Cell to) {
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    const int samples = static_cast<int>(std::ceil(std::hypot(dx, dy) * 16.0));
    for (int i = 1; i < samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        const int cx = static_cast<int>(std::floor(from.x + 0.5 + t * dx));
        const int cy = static_cast<int>(std::floor(from.y + 0.5 + t * dy));
        if ((cx == from.x && cy == from.y) || (cx == to.x && cy == to.y)) continue;
        if (!scene.is_free(cx, cy)) return false;
    }
    return true;
}

// Free cells straight ahead before the first wall or the boundary.
int depth_ahead(const SceneSpec& scene, const Pose& pose) {
    const auto h = static_cast<std::size_t>(pose.heading);
    int depth = 0;
    int x = pose.x + kDx[h];
    int y = pose.y + kDy[h];
    while (scene.is_free(x, y)) {
        ++depth;
        x += kDx[h];
        y += kDy[h];
    }
    return depth;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::vector<VisibleObject> visible_objects(const SceneSpec& scene, const Pose& pose, const FeaturizerConfig& config) {
    const auto h = static_cast<std::size_t>(pose.heading);
    const double fx = kDx[h];
    const double fy = kDy[h];
    // right-hand vector of the heading
    const double rx = -fy;
    const double ry = fx;
    const double half_fov = config.fov_deg * std::numbers::pi / 360.0;
    const double focal = 0.5 / std::tan(half_fov);

    std::vector<VisibleObject> out;
    const auto& objects = scene.objects();
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const Cell c = objects[i].cell;
        const double dx = c.x - pose.x;
        const double dy = c.y - pose.y;
        const double forward = dx * fx + dy * fy;
        const double lateral = dx * rx + dy * ry;
        if (forward <= 0.0) continue;
        const double dist = std::hypot(dx, dy);
        if (dist > config.range + 1e-9) continue;
        if (std::abs(std::atan2(lateral, forward)) > half_fov + 1e-9) continue;
        if (!line_of_sight(scene, pose.cell(), c)) continue;

        VisibleObject v;
        v.object_index = i;
        v.distance = dist;
        v.confidence = std::clamp(1.0 - dist / config.range * config.conf_slope, config.conf_min, 1.0);
        const double u = std::clamp(0.5 + focal * lateral / forward, 0.0, 1.0);
        const double size = std::clamp(0.8 / dist, 0.08, 0.9);
        const double vc = std::min(0.5 + 0.35 / dist, 0.95);
        v.box = {std::max(0.0, u - size / 2), std::max(0.0, vc - size / 2), std::min(1.0, u + size / 2),
                 std::min(1.0, vc + size / 2)};
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> caption_tokens(const SceneSpec& scene, std::size_t index) {
    const auto& objects = scene.objects();
    const ObjectInstance& o = objects.at(index);
    const auto choice = mix(scene.seed() * 1315423911ULL + index) % 4;
    const bool related = !o.relations.empty();
    switch (choice) {
        case 1:
            if (related) {
                const auto& r = o.relations.front();
                return {"the", o.object_class, r.relation, "the", objects[r.other].object_class};
            }
            break;
        case 2:
            if (o.attributes.size() >= 2) return {"a", o.attributes[0], o.attributes[1], o.object_class};
            return {"the", o.attributes[0], o.object_class};
        case 3:
            if (related) {
                const auto& r = o.relations.front();
                return {"the", o.attributes[0], o.object_class, r.relation, "the", objects[r.other].object_class};
            }
            break;
        default:
            break;
    }
    return {"a", o.attributes[0], o.object_class};
}

std::vector<Annotation> annotate(const SceneSpec& scene, const Pose& pose, const FeaturizerConfig& config) {
    std::vector<Annotation> out;
    for (const VisibleObject& v : visible_objects(scene, pose, config)) {
        out.push_back({v.box, v.confidence, caption_tokens(scene, v.object_index)});
    }
    return out;
}

Featurizer::Featurizer(FeaturizerConfig config) : config_(config) {
    if (config_.dim <= 0) throw ContractError("feature dimension must be positive");
    const auto dim = static_cast<Eigen::Index>(config_.dim);
    std::mt19937_64 rng(mix(config_.feature_seed ^ 0x5eedf00dULL));
    // Spatial frequencies span coarse (room-scale, nearly linear in x and y)
    // to fine (cell-scale) bands; heading enters with a larger weight since a
    // quarter turn changes the view.
    std::uniform_real_distribution<double> log_band(std::log(0.03), std::log(0.35));
    std::normal_distribution<double> spatial(0.0, 1.0);
    std::normal_distribution<double> angular(0.0, 1.2);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> unit(0.0, 1.0);
    freq_.resize(dim, 4);
    phase_.resize(dim);
    depth_.resize(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double band = std::exp(log_band(rng));
        freq_(j, 0) = band * spatial(rng);
        freq_(j, 1) = band * spatial(rng);
        freq_(j, 2) = angular(rng);
        freq_(j, 3) = angular(rng);
        phase_(j) = phase(rng);
        depth_(j) = unit(rng);
    }
    depth_.normalize();
}

Eigen::VectorXd Featurizer::class_signature(const std::string& token, std::uint64_t salt) const {
    std::mt19937_64 rng(mix(fnv1a(token, salt) ^ config_.feature_seed));
    std::normal_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd v(config_.dim);
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = unit(rng);
    return v.normalized();
}

Eigen::VectorXd Featurizer::features(const SceneSpec& scene, const Pose& pose) const {
    const double theta = static_cast<double>(pose.heading) * std::numbers::pi / 2.0;
    Eigen::Vector4d coords(pose.x, pose.y, std::cos(theta), std::sin(theta));
    const double amp = 2.0 * std::sqrt(2.0 / config_.dim);
    Eigen::VectorXd out = amp * ((freq_ * coords) + phase_).array().cos().matrix();

    out += depth_ * std::exp(-depth_ahead(scene, pose) / 3.0);

    for (const VisibleObject& v : visible_objects(scene, pose, config_)) {
        const ObjectInstance& o = scene.objects()[v.object_index];
        const double centre = (v.box[0] + v.box[2]) - 1.0;  // in [-1, 1]
        out += 2.0 * v.confidence * class_signature(o.object_class, 1);
        out += v.confidence * centre * class_signature(o.object_class, 2);
        out += 0.5 * v.confidence * class_signature(o.attributes.front(), 3);
    }
    return out;
}

Eigen::VectorXd visual_features(const SceneSpec& scene, const Pose& pose, std::uint64_t feature_seed, int dim) {
    FeaturizerConfig cfg;
    cfg.feature_seed = feature_seed;
    cfg.dim = dim;
    return Featurizer(cfg).features(scene, pose);
}

std::string annotation_line(const SceneSpec& scene, const Pose& pose, const std::vector<Annotation>& annotations) {
    std::string line = scene.id() + "\t" + std::to_string(pose.x) + "\t" + std::to_string(pose.y) + "\t" +
                       std::string(to_string(pose.heading));
    for (const Annotation& a : annotations) {
        line += "\t" + format_double(a.confidence) + ":";
        for (std::size_t i = 0; i < 4; ++i) line += (i ? "," : "") + format_double(a.box[i]);
        line += ":";
        for (std::size_t i = 0; i < a.tokens.size(); ++i) line += (i ? " " : "") + a.tokens[i];
    }
    return line;
}

}  // namespace semnav
