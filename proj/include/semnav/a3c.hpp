#pragma once

// Asynchronous advantage actor-critic training against a shared parameter
// store with shared RMSProp statistics.

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include "semnav/observation.hpp"
#include "semnav/policynet.hpp"
#include "semnav/targets.hpp"

namespace semnav {

struct TrainConfig {
    int workers = 1;
    long total_frames = 100000;
    int t_max = 5;
    double gamma = 0.99;
    double beta = 0.01;
    double value_coef = 0.5;
    double lr = 7e-4;
    double rmsprop_decay = 0.99;
    double rmsprop_eps = 1e-8;
    Variant variant = Variant::SN;
    TargetMode target_mode = TargetMode::ObjectOriented;
    std::uint64_t seed = 1;
    int episode_cap = kDefaultEpisodeCap;
    int embed_dim = 64;
    GoalRule goal{};

    /// Throws ConfigError on violated invariants.
    void validate() const;
};

/// Parameters plus RMSProp accumulators shared by all workers. Snapshots and
/// updates are mutually exclusive, so a snapshot never mixes generations.
class SharedStore {
public:
    explicit SharedStore(NetworkParams initial);

    NetworkParams snapshot() const;
    /// Read-only handle on the current generation; later updates never
    /// modify an object that is still shared.
    std::shared_ptr<const NetworkParams> share() const;
    /// acc <- decay acc + (1 - decay) g^2;  p <- p - lr g / (sqrt(acc) + eps)
    /// Accumulators that fall below 1e-200 are flushed to zero.
    /// Throws NumericError (leaving the store untouched) when a gradient
    /// entry or its square is not finite.
    void apply_update(const NetworkParams& grads, double lr, double decay, double eps);

    long frames() const { return frames_.load(); }
    long add_frames(long n) { return frames_.fetch_add(n) + n; }
    std::uint64_t generation() const;

private:
    mutable std::shared_mutex mutex_;
    std::shared_ptr<NetworkParams> params_;
    NetworkParams accum_;
    std::uint64_t generation_ = 0;
    std::atomic<long> frames_{0};
};

void apply_update(SharedStore& store, const NetworkParams& grads, double lr, double decay, double eps);

/// One (scene, target) training assignment.
struct TrainingTask {
    ObservationTablePtr scene;
    Pose target;
    int target_idx = 0;
};

struct RewardLogEntry {
    long frames = 0;
    std::string scene_id;
    int target_idx = 0;
    double episode_return = 0.0;
    int episode_len = 0;
    bool success = false;
    friend bool operator==(const RewardLogEntry&, const RewardLogEntry&) = default;
};

inline constexpr const char* kRewardLogHeader = "frames,scene_id,target_idx,episode_return,episode_len,success";
std::string reward_log_line(const RewardLogEntry& e);
std::vector<RewardLogEntry> read_reward_log(const std::string& path);

/// Training session that can be advanced in increments; the store, the
/// optimizer state and the worker RNG streams persist between calls.
class Trainer {
public:
    Trainer(TrainConfig config, std::vector<TrainingTask> tasks, NetworkParams initial);

    /// Runs workers until the shared frame counter reaches `frames`. Each
    /// worker finishes the episode it is in, so every counted frame belongs to
    /// a logged episode.
    void run_until(long frames);

    NetworkParams params() const { return store_.snapshot(); }
    long frames() const { return store_.frames(); }
    const std::vector<RewardLogEntry>& log() const { return log_; }
    /// Reward log CSV sink; flushed at least every 100 episodes.
    void set_log_stream(std::ostream* out);

private:
    void worker_loop(int worker, long budget);
    void record(RewardLogEntry entry);

    TrainConfig config_;
    std::vector<TrainingTask> tasks_;
    SharedStore store_;
    std::vector<std::mt19937_64> rngs_;
    std::atomic<std::uint64_t> next_task_{0};
    std::mutex log_mutex_;
    std::vector<RewardLogEntry> log_;
    std::ostream* log_stream_ = nullptr;
};

struct TrainResult {
    NetworkParams params;
    std::vector<RewardLogEntry> log;
    long frames = 0;
};

/// Round-robin tasks over every (scene, target) pair, in scene order.
std::vector<TrainingTask> make_tasks(const std::vector<ObservationTablePtr>& scenes,
                                     const std::vector<std::vector<Target>>& targets);

TrainResult train(const TrainConfig& config, const std::vector<ObservationTablePtr>& scenes,
                  const std::vector<std::vector<Target>>& targets, std::ostream* log_stream = nullptr);

/// Default network dimensions for a config and observation tables.
NetDims net_dims_for(const TrainConfig& config, const ObservationTable& sample);

}  // namespace semnav
