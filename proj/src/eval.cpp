#include "semnav/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

#include "semnav/error.hpp"
#include "semnav/scene_io.hpp"

namespace semnav {

namespace {

struct EpisodeOutcome {
    int length = 0;
    bool success = false;
};

std::mt19937_64 episode_rng(std::uint64_t seed, std::size_t task, int episode) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(task), static_cast<std::uint32_t>(episode), 0xE7A1u};
    return std::mt19937_64(seq);
}

int uniform_action(std::mt19937_64& rng) {
    return std::uniform_int_distribution<int>(0, static_cast<int>(kNumActions) - 1)(rng);
}

// Argmax with uniform tie-breaking. With four exact ties this consumes the
// RNG exactly like uniform_action().
int greedy_action(const std::array<double, kNumActions>& policy, std::mt19937_64& rng) {
    const double best = *std::max_element(policy.begin(), policy.end());
    std::array<int, kNumActions> ties{};
    int n = 0;
    for (std::size_t a = 0; a < kNumActions; ++a) {
        if (policy[a] == best) ties[static_cast<std::size_t>(n++)] = static_cast<int>(a);
    }
    if (n == 1) return ties[0];
    return ties[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, n - 1)(rng))];
}

EpisodeOutcome run_episode(PolicyKind kind, const NetworkParams* params, const EvalTask& task,
                           const std::vector<int>* field, const EvalConfig& config, std::mt19937_64& rng) {
    const ObservationTable& obs = *task.scene;
    const SceneSpec& scene = obs.scene();
    const auto poses = scene.valid_poses();
    Pose pose;
    do {
        pose = poses[std::uniform_int_distribution<std::size_t>(0, poses.size() - 1)(rng)];
    } while (config.goal.reached(pose, task.target));

    PoseHistory history(pose);
    int steps = 0;
    while (true) {
        int action = 0;
        switch (kind) {
            case PolicyKind::Random:
                action = uniform_action(rng);
                break;
            case PolicyKind::Oracle:
                action = static_cast<int>(oracle_action(scene, *field, pose));
                break;
            case PolicyKind::Network: {
                const ForwardOutput fw = forward(*params, make_input(obs, history, task.target, params->variant));
                action = greedy_action(fw.policy, rng);
                break;
            }
        }
        const StepResult res = step(scene, pose, task.target, action, steps, config.cap, config.goal);
        pose = res.next_pose;
        history.push(pose);
        steps = res.steps_taken;
        if (res.done) return {steps, res.success};
    }
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

// Column order of the printed tables.
constexpr std::array<SceneType, kNumSceneTypes> kTableOrder = {SceneType::Bedroom, SceneType::Bathroom,
                                                               SceneType::Kitchen, SceneType::LivingRoom};

}  // namespace

const SceneTypeResult* EvalReport::find(SceneType type) const {
    for (const auto& r : per_type) {
        if (r.scene_type == type) return &r;
    }
    return nullptr;
}

double EvalReport::success_pct() const {
    long episodes = 0;
    long successes = 0;
    for (const auto& t : per_target) {
        episodes += t.episodes;
        successes += t.successes;
    }
    return episodes == 0 ? 0.0 : 100.0 * static_cast<double>(successes) / static_cast<double>(episodes);
}

double EvalReport::mean_length() const {
    long episodes = 0;
    long total = 0;
    for (const auto& t : per_target) {
        episodes += t.episodes;
        total += t.total_length;
    }
    return episodes == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(episodes);
}

bool same_results(const EvalReport& a, const EvalReport& b) {
    return a.model == b.model && a.per_type == b.per_type && a.per_target == b.per_target;
}

EvalReport evaluate(PolicyKind kind, const NetworkParams* params, const std::vector<EvalTask>& tasks,
                    const EvalConfig& config, std::string model_name) {
    if (kind == PolicyKind::Network && params == nullptr) throw ContractError("evaluate: network policy needs params");
    if (config.episodes_per_target < 1 || config.cap < 1) throw ConfigError("evaluate: episodes and cap must be >= 1");
    for (const auto& t : tasks) {
        if (!t.scene->scene().is_valid(t.target)) throw ContractError("evaluate: invalid target in " + t.scene->scene().id());
    }
    std::vector<std::vector<int>> fields(tasks.size());
    if (kind == PolicyKind::Oracle) {
        for (std::size_t i = 0; i < tasks.size(); ++i) fields[i] = distance_field(tasks[i].scene->scene(), tasks[i].target, config.goal);
    }

    const auto per_task = static_cast<std::size_t>(config.episodes_per_target);
    const std::size_t total = tasks.size() * per_task;
    std::vector<EpisodeOutcome> outcomes(total);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
            const std::size_t task = i / per_task;
            const int episode = static_cast<int>(i % per_task);
            auto rng = episode_rng(config.seed, task, episode);
            outcomes[i] = run_episode(kind, params, tasks[task], kind == PolicyKind::Oracle ? &fields[task] : nullptr,
                                      config, rng);
        }
    };
    const int threads = std::max(1, config.threads);
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    work();
                } catch (...) {
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
                    next.store(total);
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    EvalReport report;
    report.model = model_name.empty()
                       ? (kind == PolicyKind::Random ? "Random" : kind == PolicyKind::Oracle ? "Oracle" : "Network")
                       : std::move(model_name);
    report.config = config;
    std::array<SceneTypeResult, kNumSceneTypes> by_type{};
    std::array<long, kNumSceneTypes> length_sum{};
    for (std::size_t task = 0; task < tasks.size(); ++task) {
        TargetResult tr;
        tr.scene_id = tasks[task].scene->scene().id();
        tr.scene_type = tasks[task].scene->scene().scene_type();
        tr.target_idx = tasks[task].target_idx;
        tr.target = tasks[task].target;
        for (std::size_t e = 0; e < per_task; ++e) {
            const EpisodeOutcome& o = outcomes[task * per_task + e];
            ++tr.episodes;
            tr.successes += o.success ? 1 : 0;
            tr.total_length += o.length;
        }
        const auto ti = static_cast<std::size_t>(tr.scene_type);
        by_type[ti].scene_type = tr.scene_type;
        by_type[ti].episodes += tr.episodes;
        by_type[ti].successes += tr.successes;
        length_sum[ti] += tr.total_length;
        report.per_target.push_back(std::move(tr));
    }
    for (std::size_t ti = 0; ti < kNumSceneTypes; ++ti) {
        SceneTypeResult r = by_type[ti];
        if (r.episodes == 0) continue;
        r.mean_length = static_cast<double>(length_sum[ti]) / r.episodes;
        r.success_pct = 100.0 * r.successes / r.episodes;
        report.per_type.push_back(r);
    }
    return report;
}

std::string report_csv(const std::vector<EvalReport>& reports) {
    std::string out = "scene_type,model,el,success_pct\n";
    for (const auto& rep : reports) {
        for (const auto& r : rep.per_type) {
            out += std::string(to_string(r.scene_type)) + "," + rep.model + "," + fmt("%.2f", r.mean_length) + "," +
                   fmt("%.2f", r.success_pct) + "\n";
        }
    }
    return out;
}

std::string report_table(const std::string& title, const std::vector<EvalReport>& reports) {
    std::vector<SceneType> columns;
    for (SceneType t : kTableOrder) {
        for (const auto& rep : reports) {
            if (rep.find(t) != nullptr) {
                columns.push_back(t);
                break;
            }
        }
    }
    std::ostringstream os;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-8s", title.c_str());
    os << buf;
    for (SceneType t : columns) {
        std::snprintf(buf, sizeof(buf), " | %-14s", std::string(to_string(t)).c_str());
        os << buf;
    }
    os << "\n" << std::string(8, ' ');
    for (std::size_t i = 0; i < columns.size(); ++i) os << " | " << "  E.L.      % ";
    os << "\n" << std::string(8 + columns.size() * 17, '-') << "\n";
    for (const auto& rep : reports) {
        std::snprintf(buf, sizeof(buf), "%-8s", rep.model.c_str());
        os << buf;
        for (SceneType t : columns) {
            const SceneTypeResult* r = rep.find(t);
            if (r == nullptr) {
                os << " | " << std::string(14, ' ');
            } else {
                std::snprintf(buf, sizeof(buf), " | %6.0f %6.1f ", r->mean_length, r->success_pct);
                os << buf;
            }
        }
        os << "\n";
    }
    return os.str();
}

const EvalReport* ComparisonTable::row(const std::string& model) const {
    for (const auto& r : rows) {
        if (r.model == model) return &r;
    }
    return nullptr;
}

ExperimentSetup prepare_experiment(const ExperimentConfig& config, bool need_semantics) {
    std::vector<SceneSpec> scenes = generate_inventory(config.count_per_type, config.width, config.height, config.scene_seed);
    std::optional<SentenceEncoder> encoder;
    if (need_semantics) encoder = train_autoencoder(build_corpus(scenes, config.features), config.semantics);
    return prepare_experiment(config, std::move(scenes), std::move(encoder));
}

ExperimentSetup prepare_experiment(const ExperimentConfig& config, std::vector<SceneSpec> scenes,
                                   std::optional<SentenceEncoder> encoder) {
    if (config.count_per_type < 1) throw ConfigError("count_per_type must be >= 1");
    const auto per_type = static_cast<std::size_t>(config.count_per_type);
    if (scenes.size() != per_type * kNumSceneTypes) {
        throw ConfigError("expected " + std::to_string(per_type * kNumSceneTypes) + " scenes (" +
                          std::to_string(per_type) + " per type), got " + std::to_string(scenes.size()));
    }
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        if (scenes[i].scene_type() != kAllSceneTypes[i / per_type]) {
            throw ConfigError("scene " + scenes[i].id() + " is out of scene-type order");
        }
    }
    ExperimentSetup setup;
    setup.scenes = std::move(scenes);
    setup.encoder = std::move(encoder);
    setup.tables = build_observation_tables(setup.scenes, config.features, setup.encoder ? &*setup.encoder : nullptr);
    for (std::size_t i = 0; i < setup.scenes.size(); ++i) {
        const SceneSpec& s = setup.scenes[i];
        const std::uint64_t seed = config.scene_seed * 7919 + i;
        setup.object_targets.push_back(
            select_targets(s, TargetMode::ObjectOriented, config.targets_per_scene, seed, {}, {}, config.features));
        setup.semantic_targets.push_back(select_targets(s, TargetMode::TopSemantic, config.targets_per_scene, seed,
                                                        confidence_sum_scorer(s, config.features), {},
                                                        config.features));
    }
    return setup;
}

std::vector<std::size_t> training_scenes(const std::string& task, const ExperimentConfig& config,
                                         const ExperimentSetup& setup) {
    std::vector<std::size_t> out;
    const auto per_type = static_cast<std::size_t>(config.count_per_type);
    if (task == "t2" && per_type < 2) throw ConfigError("T2 needs at least two scenes per scene type");
    if (task != "t1" && task != "t2") throw ConfigError("unknown task '" + task + "'");
    for (std::size_t i = 0; i < setup.scenes.size(); ++i) {
        if (task == "t2" && i % per_type == per_type - 1) continue;
        out.push_back(i);
    }
    return out;
}

std::vector<EvalTask> evaluation_tasks(const std::string& task, const ExperimentConfig& config,
                                       const ExperimentSetup& setup) {
    const auto per_type = static_cast<std::size_t>(config.count_per_type);
    std::vector<EvalTask> out;
    if (task == "t1") {
        for (std::size_t t = 0; t < kNumSceneTypes; ++t) {
            const std::size_t i = t * per_type;
            std::vector<Pose> seen;
            for (const auto& tg : setup.object_targets[i]) seen.push_back(tg.pose);
            for (const auto& tg : setup.semantic_targets[i]) seen.push_back(tg.pose);
            const auto fresh = select_targets(setup.scenes[i], TargetMode::ObjectOriented, config.targets_per_scene,
                                              config.scene_seed * 104729 + i, {}, seen, config.features);
            for (std::size_t k = 0; k < fresh.size(); ++k) out.push_back({setup.tables[i], fresh[k].pose, static_cast<int>(k)});
        }
        return out;
    }
    if (task == "t2") {
        if (per_type < 2) throw ConfigError("T2 needs at least two scenes per scene type");
        for (std::size_t i = per_type - 1; i < setup.scenes.size(); i += per_type) {
            for (std::size_t k = 0; k < setup.object_targets[i].size(); ++k) {
                out.push_back({setup.tables[i], setup.object_targets[i][k].pose, static_cast<int>(k)});
            }
        }
        return out;
    }
    throw ConfigError("unknown task '" + task + "'");
}

namespace {

bool wants(const ExperimentConfig& config, const char* model) {
    return std::find(config.models.begin(), config.models.end(), model) != config.models.end();
}

bool needs_semantics(const ExperimentConfig& config) { return wants(config, "SSN") || wants(config, "SSN_S"); }

ComparisonTable run_comparison(const ExperimentConfig& config, const ExperimentSetup& setup, std::string task,
                               const std::vector<std::size_t>& train_scenes, const std::vector<EvalTask>& eval_tasks) {
    ComparisonTable table;
    table.task = std::move(task);
    for (const auto& t : eval_tasks) {
        const auto& id = t.scene->scene().id();
        if (std::find(table.eval_scene_ids.begin(), table.eval_scene_ids.end(), id) == table.eval_scene_ids.end()) {
            table.eval_scene_ids.push_back(id);
        }
    }
    for (const std::string& model : config.models) {
        if (model == "Random") {
            table.rows.push_back(evaluate(PolicyKind::Random, nullptr, eval_tasks, config.eval, "Random"));
            table.trained.emplace_back();
            continue;
        }
        TrainConfig tc = config.train;
        const std::vector<std::vector<Target>>* targets = &setup.object_targets;
        if (model == "SN") {
            tc.variant = Variant::SN;
        } else if (model == "SSN") {
            tc.variant = Variant::SSN;
        } else if (model == "SSN_S") {
            tc.variant = Variant::SSN;
            tc.target_mode = TargetMode::TopSemantic;
            targets = &setup.semantic_targets;
        } else {
            throw ConfigError("unknown model '" + model + "'");
        }
        if (tc.variant == Variant::SSN && !setup.encoder) throw ContractError("SSN models need a sentence encoder");
        std::vector<ObservationTablePtr> scenes;
        std::vector<std::vector<Target>> scene_targets;
        for (std::size_t i : train_scenes) {
            scenes.push_back(setup.tables[i]);
            scene_targets.push_back((*targets)[i]);
        }
        TrainResult trained = train(tc, scenes, scene_targets);
        table.rows.push_back(evaluate(PolicyKind::Network, &trained.params, eval_tasks, config.eval, model));
        table.trained.push_back(std::move(trained.params));
    }
    return table;
}

}  // namespace

ComparisonTable run_t1(const ExperimentConfig& config) { return run_t1(config, prepare_experiment(config, needs_semantics(config))); }

ComparisonTable run_t2(const ExperimentConfig& config) { return run_t2(config, prepare_experiment(config, needs_semantics(config))); }

ComparisonTable run_t1(const ExperimentConfig& config, const ExperimentSetup& setup) {
    return run_comparison(config, setup, "T1", training_scenes("t1", config, setup), evaluation_tasks("t1", config, setup));
}

ComparisonTable run_t2(const ExperimentConfig& config, const ExperimentSetup& setup) {
    return run_comparison(config, setup, "T2", training_scenes("t2", config, setup), evaluation_tasks("t2", config, setup));
}

}  // namespace semnav
