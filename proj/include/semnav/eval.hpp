#pragma once

// Evaluation protocol: greedy rollouts from random starts, aggregated per
// scene type, plus the two generalization experiments (unseen targets in
// seen scenes, and unseen scenes).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semnav/a3c.hpp"
#include "semnav/observation.hpp"
#include "semnav/policynet.hpp"
#include "semnav/semantics.hpp"
#include "semnav/targets.hpp"

namespace semnav {

enum class PolicyKind { Network, Random, Oracle };

struct EvalConfig {
    int episodes_per_target = 100;
    int cap = kDefaultEpisodeCap;
    std::uint64_t seed = 1;
    int threads = 1;
    GoalRule goal{};
};

struct EvalTask {
    ObservationTablePtr scene;
    Pose target;
    int target_idx = 0;
};

struct TargetResult {
    std::string scene_id;
    SceneType scene_type = SceneType::Bathroom;
    int target_idx = 0;
    Pose target;
    int episodes = 0;
    int successes = 0;
    long total_length = 0;
    friend bool operator==(const TargetResult&, const TargetResult&) = default;
};

struct SceneTypeResult {
    SceneType scene_type = SceneType::Bathroom;
    int episodes = 0;
    int successes = 0;
    /// Mean episode length; failed episodes count as `cap`.
    double mean_length = 0.0;
    double success_pct = 0.0;
    friend bool operator==(const SceneTypeResult&, const SceneTypeResult&) = default;
};

struct EvalReport {
    std::string model;
    EvalConfig config;
    std::vector<SceneTypeResult> per_type;  // scene types present, in enum order
    std::vector<TargetResult> per_target;

    const SceneTypeResult* find(SceneType type) const;
    double success_pct() const;
    double mean_length() const;
};

bool same_results(const EvalReport& a, const EvalReport& b);

/// Greedy (argmax, ties broken uniformly at random) network rollouts, a
/// uniform-random policy, or the shortest-path oracle. Parameters are only
/// read. Results are independent of `config.threads`.
EvalReport evaluate(PolicyKind kind, const NetworkParams* params, const std::vector<EvalTask>& tasks,
                    const EvalConfig& config, std::string model_name = {});

/// CSV rows `scene_type,model,el,success_pct` (header included).
std::string report_csv(const std::vector<EvalReport>& reports);
/// Aligned table: one row per model, E.L. and % columns per scene type.
std::string report_table(const std::string& title, const std::vector<EvalReport>& reports);

struct ExperimentConfig {
    int count_per_type = 5;
    int width = 24;
    int height = 24;
    std::uint64_t scene_seed = 1;
    int targets_per_scene = 5;
    FeaturizerConfig features{};
    AutoencoderOptions semantics{};
    TrainConfig train{};
    EvalConfig eval{};
    /// Any of "Random", "SN", "SSN", "SSN_S".
    std::vector<std::string> models = {"Random", "SN", "SSN", "SSN_S"};
};

struct ComparisonTable {
    std::string task;
    std::vector<std::string> eval_scene_ids;
    std::vector<EvalReport> rows;
    std::vector<NetworkParams> trained;  // parallel to rows; empty params for Random

    const EvalReport* row(const std::string& model) const;
};

/// Scenes, encoder, tables and training targets shared by both experiments.
struct ExperimentSetup {
    std::vector<SceneSpec> scenes;
    std::optional<SentenceEncoder> encoder;
    std::vector<ObservationTablePtr> tables;  // with semantics when an encoder exists
    std::vector<std::vector<Target>> object_targets;
    std::vector<std::vector<Target>> semantic_targets;
};

ExperimentSetup prepare_experiment(const ExperimentConfig& config, bool need_semantics);
/// Same, over an existing inventory (ordered by scene type, `count_per_type`
/// instances each) and an optional pre-trained encoder.
ExperimentSetup prepare_experiment(const ExperimentConfig& config, std::vector<SceneSpec> scenes,
                                   std::optional<SentenceEncoder> encoder);

/// Indices of the scenes a task trains on ("t1": all, "t2": all but the last
/// instance of each type).
std::vector<std::size_t> training_scenes(const std::string& task, const ExperimentConfig& config,
                                         const ExperimentSetup& setup);
/// Evaluation targets of a task.
std::vector<EvalTask> evaluation_tasks(const std::string& task, const ExperimentConfig& config,
                                       const ExperimentSetup& setup);

/// Unseen targets in seen scenes: train on every scene, evaluate on fresh
/// object-oriented targets of the first instance of each scene type.
ComparisonTable run_t1(const ExperimentConfig& config);
/// Unseen scenes: hold out the last instance of each scene type.
ComparisonTable run_t2(const ExperimentConfig& config);
ComparisonTable run_t1(const ExperimentConfig& config, const ExperimentSetup& setup);
ComparisonTable run_t2(const ExperimentConfig& config, const ExperimentSetup& setup);

}  // namespace semnav
