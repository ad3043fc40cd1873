// Acceptance suite: one PASS/FAIL line per criterion.
//
//   semnav_acceptance [--cli PATH] [--work DIR] [N ...]
//
// Runs the listed criteria (default: all). Exit status is non-zero if any
// selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "oracles.hpp"
#include "semnav/a3c.hpp"
#include "semnav/eval.hpp"
#include "semnav/semantics.hpp"

using namespace semnav;
using namespace semnav::testing;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string cli;
    fs::path work = fs::temp_directory_path() / "semnav_acceptance";
};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), format, args...);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness

Outcome gradient_check(const Options&) {
    const auto t0 = std::chrono::steady_clock::now();
    const NetDims dims{6, 8, static_cast<int>(frame_semantics_size(4))};
    std::mt19937_64 rng(20240601);
    LossConfig cfg;
    double worst = 0.0;
    int checked = 0;
    bool ok = true;
    for (Variant v : {Variant::SN, Variant::SSN}) {
        for (int i = 0; i < 20; ++i) {
            const NetworkParams p = random_params(v, dims, rng);
            const Trajectory traj = random_trajectory(p, 1 + i % 5, i % 2 == 0, rng);
            const GradCheck g = check_gradients(p, traj, cfg, 1e-4);
            worst = std::max(worst, g.relative_error);
            ok = ok && g.relative_error < 1e-3;
            ++checked;
        }
    }
    const double t = seconds_since(t0);
    return {ok && t < 60.0, fmt("%d trajectories (SN+SSN, S_f=%d), max relative error %.2e, %.1f s", checked,
                                dims.semantic_dim, worst, t)};
}

// ---------------------------------------------------------------------------
// 2. Reward algebra over logged training episodes

Outcome reward_algebra(const Options&) {
    std::vector<SceneSpec> scenes;
    for (int t = 0; t < static_cast<int>(kNumSceneTypes); ++t) scenes.push_back(generate_scene(300 + t, static_cast<SceneType>(t), 6, 6));
    FeaturizerConfig fc;
    fc.dim = 16;
    const auto tables = build_observation_tables(scenes, fc, nullptr);
    std::vector<std::vector<Target>> targets;
    for (const auto& s : scenes) targets.push_back(select_targets(s, TargetMode::ObjectOriented, 2, 11));
    TrainConfig tc;
    tc.workers = 2;
    tc.embed_dim = 8;
    tc.episode_cap = 60;
    tc.seed = 5;
    Trainer trainer(tc, make_tasks(tables, targets), init_params(Variant::SN, net_dims_for(tc, *tables[0]), tc.seed));
    long frames = 0;
    while (trainer.log().size() < 1000) trainer.run_until(frames += 5000);

    int successes = 0, failures = 0;
    double worst = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < 1000; ++i) {
        const RewardLogEntry& e = trainer.log()[i];
        const double expected = e.success ? 10.0 - 0.01 * e.episode_len : -0.01 * e.episode_len;
        worst = std::max(worst, std::abs(e.episode_return - expected));
        ok = ok && std::abs(e.episode_return - expected) <= 1e-12;
        ok = ok && (e.success || e.episode_len == tc.episode_cap) && e.episode_len >= 1;
        (e.success ? successes : failures)++;
    }
    ok = ok && successes > 0 && failures > 0;
    return {ok, fmt("1000 episodes (%d successes, %d failures), max |return - formula| = %.1e", successes, failures, worst)};
}

// ---------------------------------------------------------------------------
// 3. Semantic vector shape and top-5 selection

using Key = std::tuple<double, double, long>;  // confidence, area, -input index

Key key_of(const Annotation& a, std::size_t i) {
    return {a.confidence, (a.box[2] - a.box[0]) * (a.box[3] - a.box[1]), -static_cast<long>(i)};
}

// Best subset by exhaustive search: the subset whose keys, sorted descending,
// are lexicographically largest.
std::vector<std::size_t> brute_force_top(const std::vector<Annotation>& anns, std::size_t k) {
    const std::size_t n = anns.size();
    k = std::min(k, n);
    std::vector<std::size_t> best;
    std::vector<Key> best_keys;
    bool have = false;
    for (unsigned mask = 0; mask < (1U << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        std::vector<std::pair<Key, std::size_t>> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1U << i)) members.push_back({key_of(anns[i], i), i});
        }
        std::sort(members.begin(), members.end(), std::greater<>());
        std::vector<Key> keys;
        for (const auto& m : members) keys.push_back(m.first);
        if (!have || keys > best_keys) {
            have = true;
            best_keys = keys;
            best.clear();
            for (const auto& m : members) best.push_back(m.second);
        }
    }
    return best;
}

Outcome semantic_shape(const Options&) {
    std::vector<SceneSpec> scenes;
    for (int t = 0; t < static_cast<int>(kNumSceneTypes); ++t) scenes.push_back(generate_scene(400 + t, static_cast<SceneType>(t), 8, 8));
    AutoencoderOptions ao;
    ao.code_dim = 64;
    ao.epochs = 5;
    const SentenceEncoder enc = train_autoencoder(build_corpus(scenes), ao);
    const std::size_t width = static_cast<std::size_t>(enc.code_dim()) + 5;

    bool ok = frame_semantics({}, enc).size() == 345 && frame_semantics_size(64) == 345;
    std::size_t max_seen = 0;
    for (const auto& s : scenes) {
        for (const Pose& p : s.valid_poses()) {
            const auto anns = annotate(s, p);
            max_seen = std::max(max_seen, anns.size());
            ok = ok && frame_semantics(anns, enc).size() == 345;
        }
    }
    if (!ok) return {false, "frame_semantics length differs from 345"};

    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> count(0, 12), conf_step(1, 20), token(0, static_cast<int>(enc.vocabulary().size()) - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int mismatches = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Annotation> anns(static_cast<std::size_t>(count(rng)));
        for (std::size_t i = 0; i < anns.size(); ++i) {
            Annotation& a = anns[i];
            if (i > 0 && unit(rng) < 0.2) {
                a = anns[i - 1];  // exact ties on confidence and area
            } else {
                a.confidence = 0.05 * conf_step(rng);  // coarse grid forces confidence ties
                const double x0 = 0.5 * unit(rng), y0 = 0.5 * unit(rng);
                a.box = {x0, y0, x0 + 0.05 + 0.45 * unit(rng), y0 + 0.05 + 0.45 * unit(rng)};
            }
            a.tokens.clear();
            for (int w = 0; w < 3; ++w) a.tokens.push_back(enc.vocabulary()[static_cast<std::size_t>(token(rng))]);
        }
        const auto expected = brute_force_top(anns, kSemanticSlots);
        const auto ranked = rank_annotations(anns);
        bool same = ranked.size() == anns.size() && std::equal(expected.begin(), expected.end(), ranked.begin());

        const Eigen::VectorXd v = frame_semantics(anns, enc);
        same = same && static_cast<std::size_t>(v.size()) == 345;
        for (std::size_t slot = 0; same && slot < kSemanticSlots; ++slot) {
            const Eigen::VectorXd got = v.segment(static_cast<Eigen::Index>(slot * width), static_cast<Eigen::Index>(width));
            Eigen::VectorXd want = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width));
            if (slot < expected.size()) {
                const Annotation& a = anns[expected[slot]];
                want.head(enc.code_dim()) = enc.encode(a.tokens);
                for (int b = 0; b < 4; ++b) want(enc.code_dim() + b) = a.box[static_cast<std::size_t>(b)];
                want(enc.code_dim() + 4) = a.confidence;
            }
            same = same && (got - want).cwiseAbs().maxCoeff() < 1e-12;
        }
        if (!same) ++mismatches;
    }
    return {mismatches == 0, fmt("length 345 at D_s=64 (up to %zu annotations per real frame); %d/500 random lists "
                                 "disagree with exhaustive subset scoring",
                                 max_seen, mismatches)};
}

// ---------------------------------------------------------------------------
// 4 and 5. Single-target convergence

struct Convergence {
    long frames_to_target = -1;  // first checkpoint meeting the bar, -1 if never
    double success = 0.0;
    double mean_length = 0.0;
    double oracle_length = 0.0;
};

Convergence converge_single_target(std::uint64_t seed, TargetMode mode, long budget, long interval) {
    const SceneSpec scene = generate_scene(seed, SceneType::Bedroom, 8, 8);
    const FeaturizerConfig fc;
    const auto tables = build_observation_tables({scene}, fc, nullptr);
    const auto targets = select_targets(scene, mode, 1, seed, {}, {}, fc);
    TrainConfig tc;
    tc.workers = 2;
    tc.total_frames = budget;
    tc.seed = seed;
    Trainer trainer(tc, make_tasks(tables, {targets}), init_params(Variant::SN, net_dims_for(tc, *tables[0]), seed));
    EvalConfig ec;
    ec.episodes_per_target = 100;
    ec.seed = seed;
    const std::vector<EvalTask> tasks{{tables[0], targets[0].pose, 0}};
    Convergence c;
    c.oracle_length = evaluate(PolicyKind::Oracle, nullptr, tasks, ec).mean_length();
    for (long f = interval; f <= budget; f += interval) {
        trainer.run_until(f);
        const NetworkParams p = trainer.params();
        const EvalReport r = evaluate(PolicyKind::Network, &p, tasks, ec);
        c.success = r.success_pct();
        c.mean_length = r.mean_length();
        if (c.success >= 90.0 && c.mean_length <= 3.0 * c.oracle_length) {
            c.frames_to_target = trainer.frames();
            break;
        }
    }
    return c;
}

Outcome single_target(const Options&) {
    const auto t0 = std::chrono::steady_clock::now();
    const Convergence c = converge_single_target(1, TargetMode::ObjectOriented, 300000, 25000);
    return {c.frames_to_target > 0,
            fmt("greedy success %.0f%%, E.L. %.1f vs BFS %.1f (ratio %.2f), reached at %ld frames, %.0f s", c.success,
                c.mean_length, c.oracle_length, c.mean_length / c.oracle_length, c.frames_to_target, seconds_since(t0))};
}

Outcome target_regime(const Options&) {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr long kBudget = 300000;
    std::vector<double> object_frames, random_frames;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto o = converge_single_target(seed, TargetMode::ObjectOriented, kBudget, 10000);
        const auto r = converge_single_target(seed, TargetMode::Random, kBudget, 10000);
        // Runs that never reach the bar count as taking longer than the budget.
        const auto frames = [](const Convergence& c) {
            return c.frames_to_target > 0 ? static_cast<double>(c.frames_to_target) : std::numeric_limits<double>::infinity();
        };
        object_frames.push_back(frames(o));
        random_frames.push_back(frames(r));
        per_seed += fmt(" s%d:%.0fk/%.0fk", static_cast<int>(seed), object_frames.back() / 1000, random_frames.back() / 1000);
    }
    const double mo = median(object_frames), mr = median(random_frames);
    return {mo < mr, fmt("median frames to 90%%: object %.0fk < random %.0fk (object/random per seed:%s), %.0f s",
                         mo / 1000, mr / 1000, per_seed.c_str(), seconds_since(t0))};
}

// ---------------------------------------------------------------------------
// 6, 7 and 8. Experiments at desk scale

ExperimentConfig desk_config(std::uint64_t seed, long frames, std::vector<std::string> models) {
    ExperimentConfig c;
    c.scene_seed = seed;
    c.train.seed = seed;
    c.eval.seed = seed;
    c.semantics.seed = seed;
    c.train.total_frames = frames;
    c.train.workers = 4;
    c.models = std::move(models);
    return c;
}

std::string row_summary(const ComparisonTable& t) {
    std::string s;
    for (const auto& r : t.rows) s += fmt(" %s=%.1f", r.model.c_str(), r.success_pct());
    return s;
}

Outcome t1_ordering(const Options&) {
    const auto t0 = std::chrono::steady_clock::now();
    std::map<std::string, std::vector<double>> success;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const ExperimentConfig c = desk_config(seed, 500000, {"Random", "SN", "SSN", "SSN_S"});
        const ComparisonTable t = run_t1(c);
        std::cout << report_table(fmt("T1 seed %d", static_cast<int>(seed)), t.rows) << std::flush;
        for (const auto& r : t.rows) success[r.model].push_back(r.success_pct());
        detail += fmt(" [seed %d:%s]", static_cast<int>(seed), row_summary(t).c_str());
    }
    const double r = median(success["Random"]), sn = median(success["SN"]), ssn = median(success["SSN"]),
                 ssn_s = median(success["SSN_S"]);
    const bool ok = ssn >= sn && sn >= r && ssn_s >= ssn && r < 20.0;
    return {ok, fmt("medians Random %.2f, SN %.2f, SSN %.2f, SSN_S %.2f;", r, sn, ssn, ssn_s) + detail +
                    fmt(" %.0f s", seconds_since(t0))};
}

Outcome t2_sanity(const Options&) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> random, ssn;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const ExperimentConfig c = desk_config(seed, 1000000, {"Random", "SSN"});
        const ComparisonTable t = run_t2(c);
        std::cout << report_table(fmt("T2 seed %d", static_cast<int>(seed)), t.rows) << std::flush;
        random.push_back(t.row("Random")->success_pct());
        ssn.push_back(t.row("SSN")->success_pct());
        detail += fmt(" [seed %d:%s]", static_cast<int>(seed), row_summary(t).c_str());
    }
    const double r = median(random), s = median(ssn);
    return {s >= r, fmt("medians Random %.2f, SSN %.2f (T2 gains are expected to be small);", r, s) + detail +
                        fmt(" %.0f s", seconds_since(t0))};
}

Outcome controls(const Options&) {
    ExperimentConfig c = desk_config(1, 50000, {"Random", "SN"});
    c.train.lr = 0.0;
    const ExperimentSetup setup = prepare_experiment(c, false);
    double oracle_min = 100.0;
    for (const char* task : {"t1", "t2"}) {
        oracle_min = std::min(oracle_min, evaluate(PolicyKind::Oracle, nullptr, evaluation_tasks(task, c, setup), c.eval).success_pct());
    }
    const ComparisonTable t = run_t1(c, setup);
    TrainConfig tc = c.train;
    tc.variant = Variant::SN;
    const NetworkParams initial = init_params(Variant::SN, net_dims_for(tc, *setup.tables[0]), tc.seed);
    const bool identical = t.trained[1] == initial;
    const double rnd = t.row("Random")->success_pct(), sn = t.row("SN")->success_pct();
    const bool ok = oracle_min == 100.0 && identical && std::abs(sn - rnd) <= 3.0;
    return {ok, fmt("oracle %.1f%% on T1 and T2 tasks; lr=0 params %s; SN(lr=0) %.2f%% vs Random %.2f%%", oracle_min,
                    identical ? "bit-identical" : "CHANGED", sn, rnd)};
}

// ---------------------------------------------------------------------------
// 9. CLI reproducibility

int run(const std::string& command) {
    const int status = std::system((command + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
    }
    return files;
}

Outcome cli_reproducibility(const Options& opt) {
    if (opt.cli.empty() || !fs::exists(opt.cli)) return {false, "semnav binary not found (pass --cli PATH)"};
    const fs::path root = opt.work / "cli";
    const fs::path out = root / "run";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream cfg(root / "run.cfg");
        cfg << "[scenes]\ncount_per_type = 2\nwidth = 8\nheight = 8\nseed = 3\n"
               "[features]\ndim = 16\n"
               "[semantics]\ndim = 8\nhidden = 16\nepochs = 5\n"
               "[train]\nembed_dim = 8\nepisode_cap = 100\ntotal_frames = 3000\nworkers = 1\n"
               "[eval]\nepisodes = 5\ncap = 100\n";
    }
    const std::string bin = opt.cli;
    const std::string cfg = " --config " + (root / "run.cfg").string();
    const std::string scenes = " --scenes " + (out / "scenes").string();
    const std::string enc = " --encoder " + (out / "enc.bin").string();
    const std::vector<std::string> commands = {
        bin + " gen-scenes --count-per-type 2 --width 8 --height 8 --seed 3 --out " + (out / "scenes").string(),
        bin + " dump-annotations" + scenes + " --out " + (out / "annotations.tsv").string(),
        bin + " build-semantics" + scenes + " --dim 8 --hidden 16 --epochs 5 --out " + (out / "enc.bin").string(),
        bin + " train" + cfg + scenes + enc + " --variant ssn --out " + (out / "train_ssn").string(),
        bin + " train" + cfg + scenes + " --variant sn --task t2 --out " + (out / "train_sn").string(),
        bin + " eval" + cfg + scenes + enc + " --checkpoint " + (out / "train_ssn" / "params.bin").string() +
            " --threads 1 --out " + (out / "eval_threads1").string(),
        bin + " eval" + cfg + scenes + enc + " --checkpoint " + (out / "train_ssn" / "params.bin").string() +
            " --threads 3 --out " + (out / "eval_threads3").string(),
        bin + " eval" + cfg + scenes + " --oracle --out " + (out / "eval_oracle").string(),
        bin + " eval" + cfg + scenes + " --random --threads 2 --out " + (out / "eval_random").string(),
        bin + " plot --log " + (out / "train_ssn" / "rewards.csv").string() + " --window 20 --out " +
            (out / "curve.svg").string(),
        bin + " experiment" + cfg + scenes + enc + " --models Random SN SSN SSN_S --frames 2000 --out " +
            (out / "experiment").string(),
    };
    std::map<std::string, std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
        fs::remove_all(out);
        for (const auto& c : commands) {
            if (const int code = run(c); code != 0) return {false, fmt("exit %d: ", code) + c};
        }
        if (pass == 0) first = snapshot(out);
    }
    const auto second = snapshot(out);
    std::vector<std::string> differing;
    for (const auto& [name, content] : first) {
        const auto it = second.find(name);
        if (it == second.end() || it->second != content) differing.push_back(name);
    }
    if (first.size() != second.size()) differing.push_back("(file set)");
    const bool threads_equal = slurp(out / "eval_threads1" / "report.csv") == slurp(out / "eval_threads3" / "report.csv") &&
                               slurp(out / "eval_threads1" / "report.txt") == slurp(out / "eval_threads3" / "report.txt");
    std::string detail = fmt("%zu commands x2, %zu output files compared", commands.size(), first.size());
    for (const auto& d : differing) detail += "; differs: " + d;
    if (!threads_equal) detail += "; eval report depends on thread count";
    return {differing.empty() && threads_equal, detail};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(const Options&)> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "gradient check", gradient_check},
        {2, "reward algebra", reward_algebra},
        {3, "semantic shape and top-5", semantic_shape},
        {4, "single-target convergence", single_target},
        {5, "object vs random targets", target_regime},
        {6, "T1 ordering", t1_ordering},
        {7, "T2 sanity", t2_sanity},
        {8, "oracle and lr=0 controls", controls},
        {9, "CLI reproducibility", cli_reproducibility},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--cli" && i + 1 < argc) {
            opt.cli = argv[++i];
        } else if (a == "--work" && i + 1 < argc) {
            opt.work = argv[++i];
        } else {
            selected.push_back(std::atoi(a.c_str()));
        }
    }
    if (selected.empty()) {
        for (const auto& c : criteria()) selected.push_back(c.id);
    }
    int failures = 0;
    for (int id : selected) {
        const auto it = std::find_if(criteria().begin(), criteria().end(), [&](const Criterion& c) { return c.id == id; });
        if (it == criteria().end()) {
            std::cerr << "unknown criterion " << id << "\n";
            return 2;
        }
        Outcome o;
        try {
            o = it->run(opt);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << "criterion " << id << " (" << it->name << "): " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
