#pragma once

// Siamese actor-critic networks with scene-type specific heads.
//
// SN:  history (4F) -> W1 -> ReLU -> h_hist
//      target tiled 4x (4F) -> W1 (shared) -> ReLU -> h_targ
//      [h_hist | h_targ] (2E) -> W2 -> ReLU -> joint (E)
// SSN: additionally semantic history (4 S_f) and tiled target semantics
//      through a shared W1', fused as [h_hist | h_targ | s_hist | s_targ] (4E).
// Head per scene type: joint -> Ws1 -> ReLU -> Ws2 -> 5 outputs
// (4 policy logits, 1 value).
//
// Weight matrices are stored input x output, matching the row-major
// checkpoint layout; a layer computes W^T x + b.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "semnav/scene.hpp"

namespace semnav {

enum class Variant : std::uint8_t { SN = 0, SSN = 1 };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view token);

inline constexpr int kHistoryFrames = 4;
inline constexpr int kNetOutputs = 5;

struct NetDims {
    int feature_dim = 128;   // F
    int embed_dim = 64;      // E
    int semantic_dim = 345;  // S_f, width of one frame-semantics vector (SSN only)
    friend bool operator==(const NetDims&, const NetDims&) = default;
};

struct HeadParams {
    Eigen::MatrixXd w1;  // E x E
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // E x 5
    Eigen::VectorXd b2;
};

/// Column-major view of one parameter matrix or bias vector.
struct ParamBlock {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    double* data = nullptr;
    Eigen::Index size() const { return rows * cols; }
};

struct ConstParamBlock {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    const double* data = nullptr;
    Eigen::Index size() const { return rows * cols; }
};

struct NetworkParams {
    Variant variant = Variant::SN;
    NetDims dims;
    Eigen::MatrixXd w1;  // 4F x E
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // 2E x E (SN) or 4E x E (SSN)
    Eigen::VectorXd b2;
    Eigen::MatrixXd sem_w1;  // 4 S_f x E, SSN only
    Eigen::VectorXd sem_b1;
    std::array<HeadParams, kNumSceneTypes> heads;

    bool has_semantics() const { return variant == Variant::SSN; }

    /// Blocks in checkpoint order: w1, b1, w2, b2, [sem_w1, sem_b1], then
    /// for each scene type in enum order: w1, b1, w2, b2.
    std::vector<ParamBlock> blocks();
    std::vector<ConstParamBlock> blocks() const;
    std::size_t parameter_count() const;

    /// Same shapes, all zeros.
    NetworkParams zeros_like() const;

    friend bool operator==(const NetworkParams& a, const NetworkParams& b);
};

/// Glorot-uniform weights, zero biases. The output layer of every head
/// (Ws2) starts at zero so the untrained policy is exactly uniform.
NetworkParams init_params(Variant variant, const NetDims& dims, std::uint64_t seed);

/// One network input. Visual history holds 4 frames oldest first; the
/// semantic fields are used (and required) only by SSN.
struct NetInput {
    Eigen::VectorXd history;      // 4F
    Eigen::VectorXd target;       // F
    Eigen::VectorXd sem_history;  // 4 S_f
    Eigen::VectorXd sem_target;   // S_f
    SceneType scene_type = SceneType::Bathroom;
};

struct ForwardCache {
    Eigen::VectorXd target_tiled;
    Eigen::VectorXd sem_target_tiled;
    Eigen::VectorXd pre_hist, pre_targ, pre_sem_hist, pre_sem_targ;
    Eigen::VectorXd fused;  // concat of the ReLU'd stream embeddings
    Eigen::VectorXd pre_joint, joint;
    Eigen::VectorXd pre_head, head;
};

struct ForwardOutput {
    std::array<double, kNumActions> policy{};
    std::array<double, kNumActions> logits{};
    double value = 0.0;
    ForwardCache cache;
};

ForwardOutput forward(const NetworkParams& params, const NetInput& input);

/// Accumulates parameter gradients for one sample given d(loss)/d(logits)
/// and d(loss)/d(value).
void backward(const NetworkParams& params, const NetInput& input, const ForwardCache& cache,
              const std::array<double, kNumActions>& d_logits, double d_value, NetworkParams& grads);

struct TrajectoryStep {
    NetInput input;
    int action = 0;
    double reward = 0.0;
    bool done = false;
};

/// A rollout segment. The segment is terminal when its last step is done;
/// otherwise returns are bootstrapped from `bootstrap_value`.
struct Trajectory {
    std::vector<TrajectoryStep> steps;
    double bootstrap_value = 0.0;
    bool terminal() const { return !steps.empty() && steps.back().done; }
};

struct LossConfig {
    double gamma = 0.99;
    double beta = 0.01;
    double value_coef = 0.5;
};

struct LossResult {
    double loss = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    std::vector<double> returns;
    std::vector<double> advantages;
    NetworkParams grads;
};

/// R_t = r_t + gamma R_{t+1}, seeded with 0 when terminal else `bootstrap`.
std::vector<double> n_step_returns(const std::vector<double>& rewards, bool terminal, double bootstrap, double gamma);

/// Sum over steps of  -log pi(a_t|s_t) A_t + value_coef (R_t - V(s_t))^2 - beta H(pi(.|s_t)),
/// with the advantage A_t = R_t - V(s_t) held constant in the policy term.
LossResult a3c_loss_and_grads(const NetworkParams& params, const Trajectory& trajectory, const LossConfig& config = {});
/// Same, reusing forward passes already computed with `params` (one per step).
LossResult a3c_loss_and_grads(const NetworkParams& params, const Trajectory& trajectory, const LossConfig& config,
                              std::span<const ForwardOutput> forwards);

void save_params(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_params(const std::filesystem::path& path);

}  // namespace semnav
