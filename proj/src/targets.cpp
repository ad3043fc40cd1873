#include "semnav/targets.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "semnav/error.hpp"

namespace semnav {

std::string_view to_string(TargetMode mode) {
    switch (mode) {
        case TargetMode::Random:
            return "random";
        case TargetMode::ObjectOriented:
            return "object_oriented";
        case TargetMode::TopSemantic:
            return "top_semantic";
    }
    return "?";
}

TargetMode parse_target_mode(std::string_view token) {
    if (token == "random") return TargetMode::Random;
    if (token == "object" || token == "object_oriented" || token == "object-oriented") {
        return TargetMode::ObjectOriented;
    }
    if (token == "top-semantic" || token == "top_semantic") return TargetMode::TopSemantic;
    throw ConfigError("unknown target mode '" + std::string(token) + "'");
}

PoseScorer confidence_sum_scorer(const SceneSpec& scene, const FeaturizerConfig& view) {
    return [&scene, view](const Pose& pose) {
        std::vector<double> conf;
        for (const VisibleObject& v : visible_objects(scene, pose, view)) conf.push_back(v.confidence);
        std::sort(conf.begin(), conf.end(), std::greater<>());
        double sum = 0.0;
        for (std::size_t i = 0; i < std::min<std::size_t>(5, conf.size()); ++i) sum += conf[i];
        return sum;
    };
}

std::vector<Target> select_targets(const SceneSpec& scene, TargetMode mode, int k, std::uint64_t seed,
                                   const PoseScorer& scorer, std::span<const Pose> exclude,
                                   const FeaturizerConfig& view) {
    if (k < 0) throw ContractError("select_targets: negative k");
    if (mode == TargetMode::TopSemantic && !scorer) {
        throw ContractError("select_targets: mode top_semantic requires a semantics scorer");
    }
    std::vector<Pose> candidates;
    for (const Pose& p : scene.valid_poses()) {
        if (std::find(exclude.begin(), exclude.end(), p) == exclude.end()) candidates.push_back(p);
    }
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 0x7a3);
    std::vector<Target> out;

    auto insufficient = [&](std::size_t have) {
        return ContractError("select_targets: only " + std::to_string(have) + " poses qualify for mode " +
                             std::string(to_string(mode)) + ", " + std::to_string(k) + " requested in scene " +
                             scene.id());
    };

    switch (mode) {
        case TargetMode::Random: {
            if (candidates.size() < static_cast<std::size_t>(k)) throw insufficient(candidates.size());
            std::shuffle(candidates.begin(), candidates.end(), rng);
            for (int i = 0; i < k; ++i) out.push_back({candidates[static_cast<std::size_t>(i)], mode});
            break;
        }
        case TargetMode::ObjectOriented: {
            std::vector<std::pair<Pose, std::set<std::size_t>>> seeing;
            for (const Pose& p : candidates) {
                std::set<std::size_t> ids;
                for (const VisibleObject& v : visible_objects(scene, p, view)) ids.insert(v.object_index);
                if (!ids.empty()) seeing.emplace_back(p, std::move(ids));
            }
            if (seeing.size() < static_cast<std::size_t>(k)) throw insufficient(seeing.size());
            std::shuffle(seeing.begin(), seeing.end(), rng);
            std::set<std::size_t> chosen_objects;
            std::vector<bool> used(seeing.size(), false);
            for (int n = 0; n < k; ++n) {
                std::size_t pick = seeing.size();
                for (std::size_t i = 0; i < seeing.size() && pick == seeing.size(); ++i) {
                    if (used[i]) continue;
                    for (std::size_t id : seeing[i].second) {
                        if (chosen_objects.contains(id)) {
                            pick = i;
                            break;
                        }
                    }
                }
                if (pick == seeing.size()) {
                    pick = static_cast<std::size_t>(std::find(used.begin(), used.end(), false) - used.begin());
                }
                used[pick] = true;
                chosen_objects.insert(seeing[pick].second.begin(), seeing[pick].second.end());
                out.push_back({seeing[pick].first, mode});
            }
            break;
        }
        case TargetMode::TopSemantic: {
            if (candidates.size() < static_cast<std::size_t>(k)) throw insufficient(candidates.size());
            std::vector<std::pair<double, std::size_t>> scored;
            for (std::size_t i = 0; i < candidates.size(); ++i) scored.emplace_back(scorer(candidates[i]), i);
            std::stable_sort(scored.begin(), scored.end(),
                             [](const auto& a, const auto& b) { return a.first > b.first; });
            for (int i = 0; i < k; ++i) out.push_back({candidates[scored[static_cast<std::size_t>(i)].second], mode});
            break;
        }
    }
    return out;
}

}  // namespace semnav
