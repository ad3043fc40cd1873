#include "semnav/policynet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "semnav/binary_io.hpp"
#include "semnav/error.hpp"

namespace semnav {

namespace {

constexpr char kMagic[8] = {'S', 'N', 'P', 'A', 'R', 'A', 'M', '1'};

template <typename Self, typename Block>
std::vector<Block> collect_blocks(Self& p) {
    std::vector<Block> out;
    auto add = [&out](std::string name, auto& m) {
        out.push_back(Block{std::move(name), m.rows(), m.cols(), m.data()});
    };
    add("w1", p.w1);
    add("b1", p.b1);
    add("w2", p.w2);
    add("b2", p.b2);
    if (p.variant == Variant::SSN) {
        add("sem_w1", p.sem_w1);
        add("sem_b1", p.sem_b1);
    }
    for (std::size_t s = 0; s < kNumSceneTypes; ++s) {
        const std::string prefix = "head." + std::string(to_string(static_cast<SceneType>(s))) + ".";
        add(prefix + "w1", p.heads[s].w1);
        add(prefix + "b1", p.heads[s].b1);
        add(prefix + "w2", p.heads[s].w2);
        add(prefix + "b2", p.heads[s].b2);
    }
    return out;
}

void glorot(Eigen::MatrixXd& m, std::mt19937_64& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> dist(-a, a);
    // Fill row-major so the draw order matches the checkpoint layout.
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
    }
}

Eigen::VectorXd tile(const Eigen::VectorXd& v, int times) {
    Eigen::VectorXd out(v.size() * times);
    for (int k = 0; k < times; ++k) out.segment(k * v.size(), v.size()) = v;
    return out;
}

Eigen::VectorXd relu(const Eigen::VectorXd& v) { return v.cwiseMax(0.0); }

Eigen::VectorXd relu_grad(const Eigen::VectorXd& d, const Eigen::VectorXd& pre) {
    return (pre.array() > 0.0).select(d, 0.0);
}

void require_size(const Eigen::VectorXd& v, Eigen::Index expected, const char* what) {
    if (v.size() != expected) {
        throw ContractError(std::string("forward: ") + what + " has " + std::to_string(v.size()) +
                            " entries, expected " + std::to_string(expected));
    }
}

}  // namespace

std::string_view to_string(Variant variant) { return variant == Variant::SN ? "sn" : "ssn"; }

Variant parse_variant(std::string_view token) {
    if (token == "sn" || token == "SN") return Variant::SN;
    if (token == "ssn" || token == "SSN") return Variant::SSN;
    throw ConfigError("unknown network variant '" + std::string(token) + "'");
}

std::vector<ParamBlock> NetworkParams::blocks() { return collect_blocks<NetworkParams, ParamBlock>(*this); }

std::vector<ConstParamBlock> NetworkParams::blocks() const {
    return collect_blocks<const NetworkParams, ConstParamBlock>(*this);
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks()) n += static_cast<std::size_t>(b.size());
    return n;
}

NetworkParams NetworkParams::zeros_like() const {
    NetworkParams z = *this;
    for (auto& b : z.blocks()) std::fill(b.data, b.data + b.size(), 0.0);
    return z;
}

bool operator==(const NetworkParams& a, const NetworkParams& b) {
    if (a.variant != b.variant || !(a.dims == b.dims)) return false;
    const auto ba = a.blocks();
    const auto bb = b.blocks();
    if (ba.size() != bb.size()) return false;
    for (std::size_t i = 0; i < ba.size(); ++i) {
        if (ba[i].rows != bb[i].rows || ba[i].cols != bb[i].cols) return false;
        if (!std::equal(ba[i].data, ba[i].data + ba[i].size(), bb[i].data)) return false;
    }
    return true;
}

NetworkParams init_params(Variant variant, const NetDims& dims, std::uint64_t seed) {
    if (dims.feature_dim <= 0 || dims.embed_dim <= 0 || (variant == Variant::SSN && dims.semantic_dim <= 0)) {
        throw ContractError("init_params: dimensions must be positive");
    }
    const Eigen::Index f = dims.feature_dim;
    const Eigen::Index e = dims.embed_dim;
    NetworkParams p;
    p.variant = variant;
    p.dims = dims;
    if (variant == Variant::SN) p.dims.semantic_dim = 0;
    std::mt19937_64 rng(seed);
    p.w1.resize(kHistoryFrames * f, e);
    glorot(p.w1, rng);
    p.b1 = Eigen::VectorXd::Zero(e);
    p.w2.resize((variant == Variant::SN ? 2 : 4) * e, e);
    glorot(p.w2, rng);
    p.b2 = Eigen::VectorXd::Zero(e);
    if (variant == Variant::SSN) {
        p.sem_w1.resize(kHistoryFrames * static_cast<Eigen::Index>(dims.semantic_dim), e);
        glorot(p.sem_w1, rng);
        p.sem_b1 = Eigen::VectorXd::Zero(e);
    }
    for (auto& head : p.heads) {
        head.w1.resize(e, e);
        glorot(head.w1, rng);
        head.b1 = Eigen::VectorXd::Zero(e);
        head.w2 = Eigen::MatrixXd::Zero(e, kNetOutputs);
        head.b2 = Eigen::VectorXd::Zero(kNetOutputs);
    }
    return p;
}

ForwardOutput forward(const NetworkParams& params, const NetInput& input) {
    const Eigen::Index f = params.dims.feature_dim;
    const Eigen::Index e = params.dims.embed_dim;
    require_size(input.history, kHistoryFrames * f, "visual history");
    require_size(input.target, f, "visual target");
    const bool semantic = params.has_semantics();
    if (semantic) {
        const Eigen::Index s = params.dims.semantic_dim;
        require_size(input.sem_history, kHistoryFrames * s, "semantic history");
        require_size(input.sem_target, s, "semantic target");
    } else if (input.sem_history.size() != 0 || input.sem_target.size() != 0) {
        throw ContractError("forward: SN parameters do not accept semantic inputs");
    }
    const auto head_index = static_cast<std::size_t>(input.scene_type);
    if (head_index >= params.heads.size() || params.heads[head_index].w1.size() == 0) {
        throw ContractError("forward: no head for scene type " + std::to_string(head_index));
    }
    const HeadParams& head = params.heads[head_index];

    ForwardOutput out;
    ForwardCache& c = out.cache;
    c.target_tiled = tile(input.target, kHistoryFrames);
    c.pre_hist.noalias() = params.w1.transpose() * input.history;
    c.pre_hist += params.b1;
    c.pre_targ.noalias() = params.w1.transpose() * c.target_tiled;
    c.pre_targ += params.b1;
    c.fused.resize((semantic ? 4 : 2) * e);
    c.fused.segment(0, e) = relu(c.pre_hist);
    c.fused.segment(e, e) = relu(c.pre_targ);
    if (semantic) {
        c.sem_target_tiled = tile(input.sem_target, kHistoryFrames);
        c.pre_sem_hist.noalias() = params.sem_w1.transpose() * input.sem_history;
        c.pre_sem_hist += params.sem_b1;
        c.pre_sem_targ.noalias() = params.sem_w1.transpose() * c.sem_target_tiled;
        c.pre_sem_targ += params.sem_b1;
        c.fused.segment(2 * e, e) = relu(c.pre_sem_hist);
        c.fused.segment(3 * e, e) = relu(c.pre_sem_targ);
    }
    c.pre_joint.noalias() = params.w2.transpose() * c.fused;
    c.pre_joint += params.b2;
    c.joint = relu(c.pre_joint);
    c.pre_head.noalias() = head.w1.transpose() * c.joint;
    c.pre_head += head.b1;
    c.head = relu(c.pre_head);
    Eigen::VectorXd raw = head.w2.transpose() * c.head + head.b2;

    double max_logit = raw(0);
    for (int a = 1; a < static_cast<int>(kNumActions); ++a) max_logit = std::max(max_logit, raw(a));
    double z = 0.0;
    for (std::size_t a = 0; a < kNumActions; ++a) {
        out.logits[a] = raw(static_cast<Eigen::Index>(a));
        out.policy[a] = std::exp(out.logits[a] - max_logit);
        z += out.policy[a];
    }
    for (double& p : out.policy) p /= z;
    out.value = raw(kNetOutputs - 1);
    return out;
}

void backward(const NetworkParams& params, const NetInput& input, const ForwardCache& c,
              const std::array<double, kNumActions>& d_logits, double d_value, NetworkParams& grads) {
    const Eigen::Index e = params.dims.embed_dim;
    const auto head_index = static_cast<std::size_t>(input.scene_type);
    const HeadParams& head = params.heads[head_index];
    HeadParams& g_head = grads.heads[head_index];

    Eigen::Matrix<double, kNetOutputs, 1> d_out;
    for (std::size_t a = 0; a < kNumActions; ++a) d_out(static_cast<Eigen::Index>(a)) = d_logits[a];
    d_out(kNetOutputs - 1) = d_value;

    g_head.b2 += d_out;
    g_head.w2.noalias() += c.head * d_out.transpose();
    const Eigen::VectorXd d_pre_head = relu_grad(head.w2 * d_out, c.pre_head);
    g_head.b1 += d_pre_head;
    g_head.w1.noalias() += c.joint * d_pre_head.transpose();

    const Eigen::VectorXd d_pre_joint = relu_grad(head.w1 * d_pre_head, c.pre_joint);
    grads.b2 += d_pre_joint;
    grads.w2.noalias() += c.fused * d_pre_joint.transpose();
    const Eigen::VectorXd d_fused = params.w2 * d_pre_joint;

    const Eigen::VectorXd d_pre_hist = relu_grad(d_fused.segment(0, e), c.pre_hist);
    const Eigen::VectorXd d_pre_targ = relu_grad(d_fused.segment(e, e), c.pre_targ);
    grads.b1 += d_pre_hist + d_pre_targ;
    grads.w1.noalias() += input.history * d_pre_hist.transpose();
    grads.w1.noalias() += c.target_tiled * d_pre_targ.transpose();

    if (params.has_semantics()) {
        const Eigen::VectorXd d_pre_sh = relu_grad(d_fused.segment(2 * e, e), c.pre_sem_hist);
        const Eigen::VectorXd d_pre_st = relu_grad(d_fused.segment(3 * e, e), c.pre_sem_targ);
        grads.sem_b1 += d_pre_sh + d_pre_st;
        grads.sem_w1.noalias() += input.sem_history * d_pre_sh.transpose();
        grads.sem_w1.noalias() += c.sem_target_tiled * d_pre_st.transpose();
    }
}

std::vector<double> n_step_returns(const std::vector<double>& rewards, bool terminal, double bootstrap, double gamma) {
    std::vector<double> out(rewards.size());
    double running = terminal ? 0.0 : bootstrap;
    for (std::size_t i = rewards.size(); i-- > 0;) {
        running = rewards[i] + gamma * running;
        out[i] = running;
    }
    return out;
}

LossResult a3c_loss_and_grads(const NetworkParams& params, const Trajectory& trajectory, const LossConfig& config) {
    return a3c_loss_and_grads(params, trajectory, config, {});
}

LossResult a3c_loss_and_grads(const NetworkParams& params, const Trajectory& trajectory, const LossConfig& config,
                              std::span<const ForwardOutput> forwards) {
    if (trajectory.steps.empty()) throw ContractError("a3c_loss_and_grads: empty trajectory");
    if (!forwards.empty() && forwards.size() != trajectory.steps.size()) {
        throw ContractError("a3c_loss_and_grads: one forward pass per step required");
    }
    if (config.gamma < 0.0 || config.gamma > 1.0) throw ContractError("a3c_loss_and_grads: gamma outside [0, 1]");

    std::vector<double> rewards;
    rewards.reserve(trajectory.steps.size());
    for (const auto& s : trajectory.steps) rewards.push_back(s.reward);

    LossResult res;
    res.returns = n_step_returns(rewards, trajectory.terminal(), trajectory.bootstrap_value, config.gamma);
    res.grads = params.zeros_like();
    for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
        const TrajectoryStep& s = trajectory.steps[t];
        if (s.action < 0 || s.action >= static_cast<int>(kNumActions)) {
            throw ContractError("a3c_loss_and_grads: invalid action index " + std::to_string(s.action));
        }
        ForwardOutput computed;
        if (forwards.empty()) computed = forward(params, s.input);
        const ForwardOutput& fw = forwards.empty() ? computed : forwards[t];
        double max_logit = fw.logits[0];
        for (double l : fw.logits) max_logit = std::max(max_logit, l);
        double sum_exp = 0.0;
        for (double l : fw.logits) sum_exp += std::exp(l - max_logit);
        const double log_z = max_logit + std::log(sum_exp);
        std::array<double, kNumActions> log_pi{};
        double entropy = 0.0;
        for (std::size_t a = 0; a < kNumActions; ++a) {
            log_pi[a] = fw.logits[a] - log_z;
            entropy -= fw.policy[a] * log_pi[a];
        }
        const double ret = res.returns[t];
        const double advantage = ret - fw.value;
        res.advantages.push_back(advantage);
        const double policy_term = -log_pi[static_cast<std::size_t>(s.action)] * advantage;
        const double value_term = config.value_coef * advantage * advantage;
        res.policy_loss += policy_term;
        res.value_loss += value_term;
        res.entropy += entropy;
        res.loss += policy_term + value_term - config.beta * entropy;

        std::array<double, kNumActions> d_logits{};
        for (std::size_t a = 0; a < kNumActions; ++a) {
            const double onehot = a == static_cast<std::size_t>(s.action) ? 1.0 : 0.0;
            d_logits[a] = advantage * (fw.policy[a] - onehot) + config.beta * fw.policy[a] * (log_pi[a] + entropy);
        }
        const double d_value = -2.0 * config.value_coef * advantage;
        backward(params, s.input, fw.cache, d_logits, d_value, res.grads);
    }
    if (!std::isfinite(res.loss)) throw NumericError("a3c loss is not finite");
    return res;
}

void save_params(const NetworkParams& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kMagic, sizeof(kMagic));
    binio::write_u8(out, static_cast<std::uint8_t>(params.variant));
    binio::write_u32(out, static_cast<std::uint32_t>(params.dims.feature_dim));
    binio::write_u32(out, static_cast<std::uint32_t>(params.dims.embed_dim));
    binio::write_u32(out, static_cast<std::uint32_t>(params.has_semantics() ? params.dims.semantic_dim : 0));
    binio::write_u32(out, static_cast<std::uint32_t>(kHistoryFrames));
    binio::write_u32(out, static_cast<std::uint32_t>(kNumActions));
    binio::write_u32(out, static_cast<std::uint32_t>(kNumSceneTypes));
    for (const auto& b : params.blocks()) {
        binio::write_matrix(out, Eigen::Map<const Eigen::MatrixXd>(b.data, b.rows, b.cols));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

NetworkParams load_params(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    const std::string what = "parameter checkpoint " + path.string();
    char magic[8];
    binio::read_exact(in, magic, sizeof(magic), what);
    if (!std::equal(magic, magic + 8, kMagic)) throw IoError(what + ": bad magic");
    const auto variant_byte = binio::read_u8(in, what);
    if (variant_byte > 1) throw IoError(what + ": unknown variant byte");
    NetDims dims;
    dims.feature_dim = static_cast<int>(binio::read_u32(in, what));
    dims.embed_dim = static_cast<int>(binio::read_u32(in, what));
    dims.semantic_dim = static_cast<int>(binio::read_u32(in, what));
    const auto history = binio::read_u32(in, what);
    const auto actions = binio::read_u32(in, what);
    const auto heads = binio::read_u32(in, what);
    if (history != kHistoryFrames || actions != kNumActions || heads != kNumSceneTypes) {
        throw IoError(what + ": unsupported layout");
    }
    NetworkParams p = init_params(static_cast<Variant>(variant_byte), dims, 0);
    for (auto& b : p.blocks()) {
        Eigen::Map<Eigen::MatrixXd> m(b.data, b.rows, b.cols);
        binio::read_matrix(in, m, what);
    }
    return p;
}

}  // namespace semnav
