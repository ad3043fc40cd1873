#include "semnav/a3c.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "semnav/error.hpp"

namespace semnav {

void TrainConfig::validate() const {
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (t_max < 1) throw ConfigError("t_max must be >= 1");
    if (total_frames < t_max) throw ConfigError("total_frames must be >= t_max");
    if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must lie in [0, 1]");
    if (lr < 0.0) throw ConfigError("lr must be non-negative");
    if (rmsprop_decay < 0.0 || rmsprop_decay >= 1.0) throw ConfigError("rmsprop_decay must lie in [0, 1)");
    if (rmsprop_eps <= 0.0) throw ConfigError("rmsprop_eps must be positive");
    if (episode_cap < 1) throw ConfigError("episode_cap must be >= 1");
    if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
}

SharedStore::SharedStore(NetworkParams initial) : params_(std::make_shared<NetworkParams>(std::move(initial))) {
    accum_ = params_->zeros_like();
}

NetworkParams SharedStore::snapshot() const {
    std::shared_lock lock(mutex_);
    return *params_;
}

std::shared_ptr<const NetworkParams> SharedStore::share() const {
    std::shared_lock lock(mutex_);
    return params_;
}

std::uint64_t SharedStore::generation() const {
    std::shared_lock lock(mutex_);
    return generation_;
}

constexpr double kAccumulatorFloor = 1e-200;

void SharedStore::apply_update(const NetworkParams& grads, double lr, double decay, double eps) {
    if (!(lr >= 0.0) || !(decay >= 0.0 && decay < 1.0) || !(eps > 0.0)) {
        throw ContractError("apply_update: invalid optimizer settings");
    }
    // With finite g and finite g^2 the step is bounded by lr / sqrt(1 - decay),
    // so the update can be applied in place.
    const auto g_blocks = grads.blocks();
    for (const auto& g : g_blocks) {
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            if (!std::isfinite(g.data[i] * g.data[i])) throw NumericError("non-finite gradient in block " + g.name);
        }
    }
    std::unique_lock lock(mutex_);
    if (params_.use_count() > 1) params_ = std::make_shared<NetworkParams>(*params_);
    auto p_blocks = params_->blocks();
    auto a_blocks = accum_.blocks();
    if (p_blocks.size() != g_blocks.size()) throw ContractError("apply_update: gradient layout mismatch");
    for (std::size_t b = 0; b < p_blocks.size(); ++b) {
        if (p_blocks[b].size() != g_blocks[b].size()) throw ContractError("apply_update: shape mismatch in " + p_blocks[b].name);
    }
    for (std::size_t b = 0; b < p_blocks.size(); ++b) {
        Eigen::Map<Eigen::ArrayXd> p(p_blocks[b].data, p_blocks[b].size());
        Eigen::Map<Eigen::ArrayXd> acc(a_blocks[b].data, a_blocks[b].size());
        Eigen::Map<const Eigen::ArrayXd> g(g_blocks[b].data, g_blocks[b].size());
        acc = decay * acc + (1.0 - decay) * g.square();
        acc = (acc < kAccumulatorFloor).select(0.0, acc);  // keep idle accumulators out of the subnormal range
        p -= lr * g / (acc.sqrt() + eps);
    }
    ++generation_;
}

void apply_update(SharedStore& store, const NetworkParams& grads, double lr, double decay, double eps) {
    store.apply_update(grads, lr, decay, eps);
}

std::string reward_log_line(const RewardLogEntry& e) {
    char ret[40];
    std::snprintf(ret, sizeof(ret), "%.6f", e.episode_return);
    return std::to_string(e.frames) + "," + e.scene_id + "," + std::to_string(e.target_idx) + "," + ret + "," +
           std::to_string(e.episode_len) + "," + (e.success ? "1" : "0");
}

std::vector<RewardLogEntry> read_reward_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != kRewardLogHeader) throw IoError(path + ": missing reward log header");
    std::vector<RewardLogEntry> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<std::string> fields;
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 6) throw IoError(path + ":" + std::to_string(line_no) + ": expected 6 fields");
        try {
            RewardLogEntry e;
            e.frames = std::stol(fields[0]);
            e.scene_id = fields[1];
            e.target_idx = std::stoi(fields[2]);
            e.episode_return = std::stod(fields[3]);
            e.episode_len = std::stoi(fields[4]);
            e.success = fields[5] == "1";
            out.push_back(std::move(e));
        } catch (const std::exception&) {
            throw IoError(path + ":" + std::to_string(line_no) + ": malformed number");
        }
    }
    return out;
}

Trainer::Trainer(TrainConfig config, std::vector<TrainingTask> tasks, NetworkParams initial)
    : config_(std::move(config)), tasks_(std::move(tasks)), store_(std::move(initial)) {
    config_.validate();
    if (tasks_.empty()) throw ContractError("train: no (scene, target) pairs");
    for (const auto& t : tasks_) {
        if (!t.scene->scene().is_valid(t.target)) throw ContractError("train: invalid target in " + t.scene->scene().id());
        if (config_.variant == Variant::SSN && !t.scene->has_semantics()) {
            throw ContractError("train: SSN variant requires a sentence encoder");
        }
    }
    for (int w = 0; w < config_.workers; ++w) {
        std::seed_seq seq{static_cast<std::uint32_t>(config_.seed), static_cast<std::uint32_t>(config_.seed >> 32),
                          static_cast<std::uint32_t>(w), 0xA3C0u};
        rngs_.emplace_back(seq);
    }
}

void Trainer::set_log_stream(std::ostream* out) { log_stream_ = out; }

void Trainer::record(RewardLogEntry entry) {
    std::lock_guard lock(log_mutex_);
    if (log_stream_ != nullptr) {
        *log_stream_ << reward_log_line(entry) << "\n";
        if ((log_.size() + 1) % 100 == 0) log_stream_->flush();
    }
    log_.push_back(std::move(entry));
}

void Trainer::worker_loop(int worker, long budget) {
    std::mt19937_64& rng = rngs_[static_cast<std::size_t>(worker)];
    const LossConfig loss_cfg{config_.gamma, config_.beta, config_.value_coef};
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    while (store_.frames() < budget) {
        const TrainingTask& task = tasks_[next_task_.fetch_add(1) % tasks_.size()];
        const ObservationTable& obs = *task.scene;
        const SceneSpec& scene = obs.scene();
        const auto poses = scene.valid_poses();
        Pose pose;
        do {
            pose = poses[std::uniform_int_distribution<std::size_t>(0, poses.size() - 1)(rng)];
        } while (config_.goal.reached(pose, task.target));

        PoseHistory history(pose);
        int steps = 0;
        double episode_return = 0.0;
        bool done = false;
        bool success = false;
        while (!done) {
            std::shared_ptr<const NetworkParams> shared = store_.share();
            const NetworkParams& snap = *shared;
            Trajectory traj;
            std::vector<ForwardOutput> forwards;
            for (int t = 0; t < config_.t_max && !done; ++t) {
                NetInput input = make_input(obs, history, task.target, config_.variant);
                forwards.push_back(forward(snap, input));
                const ForwardOutput& fw = forwards.back();
                const double u = unit(rng);
                int action = static_cast<int>(kNumActions) - 1;
                double cum = 0.0;
                for (std::size_t a = 0; a < kNumActions; ++a) {
                    cum += fw.policy[a];
                    if (u < cum) {
                        action = static_cast<int>(a);
                        break;
                    }
                }
                const StepResult res = step(scene, pose, task.target, action, steps, config_.episode_cap, config_.goal);
                traj.steps.push_back({std::move(input), action, res.reward, res.done});
                pose = res.next_pose;
                history.push(pose);
                steps = res.steps_taken;
                episode_return += res.reward;
                done = res.done;
                success = res.success;
            }
            if (!done) traj.bootstrap_value = forward(snap, make_input(obs, history, task.target, config_.variant)).value;
            const LossResult loss = a3c_loss_and_grads(snap, traj, loss_cfg, forwards);
            forwards.clear();
            shared.reset();  // lets the store update in place when no one else reads
            store_.apply_update(loss.grads, config_.lr, config_.rmsprop_decay, config_.rmsprop_eps);
            store_.add_frames(static_cast<long>(traj.steps.size()));
        }
        record({store_.frames(), scene.id(), task.target_idx, episode_return, steps, success});
    }
}

void Trainer::run_until(long frames) {
    if (config_.workers == 1) {
        worker_loop(0, frames);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config_.workers));
    for (int w = 0; w < config_.workers; ++w) {
        threads.emplace_back([this, w, frames, &errors] {
            try {
                worker_loop(w, frames);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
                // Push the counter past the budget so the other workers stop.
                store_.add_frames(frames);
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::vector<TrainingTask> make_tasks(const std::vector<ObservationTablePtr>& scenes,
                                     const std::vector<std::vector<Target>>& targets) {
    if (scenes.size() != targets.size()) throw ContractError("train: one target list per scene required");
    std::vector<TrainingTask> tasks;
    std::size_t most = 0;
    for (const auto& t : targets) most = std::max(most, t.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        if (targets[i].empty()) throw ContractError("train: scene " + scenes[i]->scene().id() + " has no targets");
    }
    // Interleave so consecutive episodes visit different scenes.
    for (std::size_t k = 0; k < most; ++k) {
        for (std::size_t i = 0; i < scenes.size(); ++i) {
            if (k < targets[i].size()) tasks.push_back({scenes[i], targets[i][k].pose, static_cast<int>(k)});
        }
    }
    return tasks;
}

NetDims net_dims_for(const TrainConfig& config, const ObservationTable& sample) {
    NetDims dims;
    dims.feature_dim = sample.feature_dim();
    dims.embed_dim = config.embed_dim;
    dims.semantic_dim = config.variant == Variant::SSN ? sample.semantic_dim() : 0;
    return dims;
}

TrainResult train(const TrainConfig& config, const std::vector<ObservationTablePtr>& scenes,
                  const std::vector<std::vector<Target>>& targets, std::ostream* log_stream) {
    config.validate();
    if (scenes.empty()) throw ContractError("train: no scenes");
    const NetDims dims = net_dims_for(config, *scenes.front());
    Trainer trainer(config, make_tasks(scenes, targets), init_params(config.variant, dims, config.seed));
    trainer.set_log_stream(log_stream);
    trainer.run_until(config.total_frames);
    if (log_stream != nullptr) log_stream->flush();
    return {trainer.params(), trainer.log(), trainer.frames()};
}

}  // namespace semnav
