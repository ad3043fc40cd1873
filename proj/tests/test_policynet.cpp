#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "semnav/error.hpp"
#include "semnav/policynet.hpp"

using namespace semnav;
using namespace semnav::testing;
namespace fs = std::filesystem;

namespace {

const NetDims kSmall{6, 8, 45};

}  // namespace

TEST(PolicyNet, ForwardMatchesNaiveLoops) {
    std::mt19937_64 rng(1);
    for (Variant v : {Variant::SN, Variant::SSN}) {
        const NetworkParams p = random_params(v, kSmall, rng);
        const Trajectory traj = random_trajectory(p, 6, false, rng);
        for (const auto& st : traj.steps) {
            const ForwardOutput out = forward(p, st.input);
            const NaiveOutput ref = naive_forward(p, st.input);
            double sum = 0.0;
            for (int a = 0; a < 4; ++a) {
                EXPECT_NEAR(out.logits[a], ref.logits[a], 1e-10);
                sum += out.policy[a];
                EXPECT_GT(out.policy[a], 0.0);
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
            EXPECT_NEAR(out.value, ref.value, 1e-10);
        }
    }
}

TEST(PolicyNet, ShapesFollowVariant) {
    const NetworkParams sn = init_params(Variant::SN, NetDims{}, 1);
    EXPECT_EQ(sn.w1.rows(), 512);
    EXPECT_EQ(sn.w1.cols(), 64);
    EXPECT_EQ(sn.w2.rows(), 128);
    EXPECT_EQ(sn.sem_w1.size(), 0);
    const NetworkParams ssn = init_params(Variant::SSN, NetDims{}, 1);
    EXPECT_EQ(ssn.w2.rows(), 256);
    EXPECT_EQ(ssn.sem_w1.rows(), 4 * 345);
    EXPECT_EQ(ssn.heads[0].w2.cols(), 5);
    EXPECT_GT(ssn.parameter_count(), sn.parameter_count());
}

TEST(PolicyNet, UntrainedPolicyIsUniform) {
    std::mt19937_64 rng(2);
    const NetworkParams p = init_params(Variant::SSN, kSmall, 5);
    const Trajectory traj = random_trajectory(p, 3, false, rng);
    for (const auto& st : traj.steps) {
        const ForwardOutput out = forward(p, st.input);
        for (double pi : out.policy) EXPECT_DOUBLE_EQ(pi, 0.25);
        EXPECT_DOUBLE_EQ(out.value, 0.0);
    }
}

TEST(PolicyNet, InitIsSeedDeterministic) {
    EXPECT_TRUE(init_params(Variant::SSN, kSmall, 3) == init_params(Variant::SSN, kSmall, 3));
    EXPECT_FALSE(init_params(Variant::SSN, kSmall, 3) == init_params(Variant::SSN, kSmall, 4));
}

TEST(PolicyNet, InputSizeMismatchIsContractViolation) {
    std::mt19937_64 rng(3);
    const NetworkParams sn = random_params(Variant::SN, kSmall, rng);
    NetInput in;
    in.history = Eigen::VectorXd::Zero(4 * 6);
    in.target = Eigen::VectorXd::Zero(7);
    EXPECT_THROW(forward(sn, in), ContractError);
    in.target = Eigen::VectorXd::Zero(6);
    EXPECT_NO_THROW(forward(sn, in));
    in.sem_target = Eigen::VectorXd::Zero(45);
    in.sem_history = Eigen::VectorXd::Zero(180);
    EXPECT_THROW(forward(sn, in), ContractError);
    const NetworkParams ssn = random_params(Variant::SSN, kSmall, rng);
    in.sem_history = Eigen::VectorXd::Zero(10);
    EXPECT_THROW(forward(ssn, in), ContractError);
}

TEST(Returns, MatchHandComputedDiscounting) {
    const std::vector<double> r = {-0.01, -0.01, 9.99};
    const auto terminal = n_step_returns(r, true, 123.0, 0.9);
    EXPECT_NEAR(terminal[2], 9.99, 1e-12);
    EXPECT_NEAR(terminal[1], -0.01 + 0.9 * 9.99, 1e-12);
    EXPECT_NEAR(terminal[0], -0.01 + 0.9 * (-0.01 + 0.9 * 9.99), 1e-12);
    const auto boot = n_step_returns({-0.01, -0.01}, false, 2.0, 0.5);
    EXPECT_NEAR(boot[1], -0.01 + 0.5 * 2.0, 1e-12);
    EXPECT_NEAR(boot[0], -0.01 + 0.5 * boot[1], 1e-12);
}

TEST(Loss, TerminalSegmentIgnoresBootstrap) {
    std::mt19937_64 rng(4);
    const NetworkParams p = random_params(Variant::SN, kSmall, rng);
    Trajectory traj = random_trajectory(p, 4, true, rng);
    const LossResult a = a3c_loss_and_grads(p, traj);
    traj.bootstrap_value = 1e6;
    const LossResult b = a3c_loss_and_grads(p, traj);
    EXPECT_EQ(a.loss, b.loss);
    EXPECT_TRUE(a.grads == b.grads);
}

TEST(Loss, DecompositionIsConsistent) {
    std::mt19937_64 rng(5);
    const NetworkParams p = random_params(Variant::SSN, kSmall, rng);
    const Trajectory traj = random_trajectory(p, 5, false, rng);
    const LossConfig cfg;
    const LossResult r = a3c_loss_and_grads(p, traj, cfg);
    EXPECT_NEAR(r.loss, r.policy_loss + r.value_loss - cfg.beta * r.entropy, 1e-9);
    EXPECT_NEAR(r.loss, naive_a3c_loss(p, traj, r.returns, r.advantages, cfg), 1e-9);
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        EXPECT_NEAR(r.advantages[t], r.returns[t] - naive_forward(p, traj.steps[t].input).value, 1e-10);
    }
}

TEST(Loss, EmptyOrInvalidTrajectoryIsRejected) {
    std::mt19937_64 rng(6);
    const NetworkParams p = random_params(Variant::SN, kSmall, rng);
    EXPECT_THROW(a3c_loss_and_grads(p, Trajectory{}), ContractError);
    Trajectory traj = random_trajectory(p, 2, false, rng);
    traj.steps[0].action = 4;
    EXPECT_THROW(a3c_loss_and_grads(p, traj), ContractError);
}

class GradientCheck : public ::testing::TestWithParam<Variant> {};

TEST_P(GradientCheck, AnalyticMatchesCentralDifferences) {
    std::mt19937_64 rng(GetParam() == Variant::SN ? 11 : 12);
    for (int trial = 0; trial < 5; ++trial) {
        const NetworkParams p = random_params(GetParam(), NetDims{6, 8, 45}, rng);
        const Trajectory traj = random_trajectory(p, 1 + trial, trial % 2 == 0, rng);
        const GradCheck g = check_gradients(p, traj, LossConfig{});
        EXPECT_LT(g.relative_error, 1e-3) << "trial " << trial;
        EXPECT_EQ(g.parameters, p.parameter_count());
    }
}

INSTANTIATE_TEST_SUITE_P(Variants, GradientCheck, ::testing::Values(Variant::SN, Variant::SSN));

TEST(Checkpoint, RoundTripIsBitIdentical) {
    std::mt19937_64 rng(7);
    const fs::path dir = fs::temp_directory_path() / "semnav_test_params";
    fs::create_directories(dir);
    for (Variant v : {Variant::SN, Variant::SSN}) {
        const NetworkParams p = random_params(v, kSmall, rng);
        save_params(p, dir / "p.bin");
        const NetworkParams back = load_params(dir / "p.bin");
        EXPECT_TRUE(back == p);
        EXPECT_EQ(back.dims, p.dims);
        EXPECT_EQ(back.variant, v);
    }
    fs::resize_file(dir / "p.bin", 100);
    EXPECT_THROW(load_params(dir / "p.bin"), IoError);
    EXPECT_THROW(load_params(dir / "nope.bin"), IoError);
}
