// semnav: scene generation, sentence encoder, training, evaluation, plotting.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "semnav/a3c.hpp"
#include "semnav/config.hpp"
#include "semnav/error.hpp"
#include "semnav/eval.hpp"
#include "semnav/featurizer.hpp"
#include "semnav/plot.hpp"
#include "semnav/scene_io.hpp"
#include "semnav/semantics.hpp"

namespace fs = std::filesystem;
using namespace semnav;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

fs::path vocabulary_path(const fs::path& encoder) { return fs::path(encoder.string() + ".vocab"); }

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

// Options shared by train/eval/experiment: a config file plus overrides.
struct RunOptions {
    std::string config_file;
    std::string scenes_dir;
    std::string encoder;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<long> frames;
    std::optional<double> lr;
    std::string variant;
    std::string targets;
    std::string task;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "run configuration file");
        cmd->add_option("--scenes", scenes_dir, "scene directory (default: generate from [scenes])");
        cmd->add_option("--encoder", encoder, "sentence encoder checkpoint");
        cmd->add_option("--seed", seed, "training seed");
        cmd->add_option("--workers", workers, "training worker threads");
        cmd->add_option("--frames", frames, "training frame budget");
        cmd->add_option("--lr", lr, "learning rate");
        cmd->add_option("--task", task, "t1 or t2")->check(CLI::IsMember({"t1", "t2"}));
    }

    RunConfig load() const {
        RunConfig c = config_file.empty() ? RunConfig{} : load_run_config(config_file);
        if (!scenes_dir.empty()) c.scenes_dir = scenes_dir;
        if (!encoder.empty()) c.encoder_path = encoder;
        if (seed) c.train.seed = *seed;
        if (workers) c.train.workers = *workers;
        if (frames) c.train.total_frames = *frames;
        if (lr) c.train.lr = *lr;
        if (!variant.empty()) c.train.variant = parse_variant(variant);
        if (!targets.empty()) c.train.target_mode = parse_target_mode(targets);
        if (!task.empty()) c.task = task;
        c.train.validate();
        return c;
    }
};

std::vector<SceneSpec> scenes_for(RunConfig& c) {
    if (c.scenes_dir.empty()) return generate_inventory(c.count_per_type, c.width, c.height, c.scene_seed);
    std::vector<SceneSpec> scenes = load_scene_dir(c.scenes_dir);
    if (scenes.size() % kNumSceneTypes != 0) {
        throw ConfigError(c.scenes_dir + ": scene count " + std::to_string(scenes.size()) + " is not a multiple of 4");
    }
    c.count_per_type = static_cast<int>(scenes.size() / kNumSceneTypes);
    return scenes;
}

std::optional<SentenceEncoder> encoder_for(const RunConfig& c, bool required) {
    if (c.encoder_path.empty()) {
        if (required) throw ConfigError("variant ssn requires an encoder (--encoder or paths.encoder)");
        return std::nullopt;
    }
    return SentenceEncoder::load(c.encoder_path, vocabulary_path(c.encoder_path));
}

void check_compatible(const NetworkParams& params, const ObservationTable& obs) {
    if (params.dims.feature_dim != obs.feature_dim()) {
        throw ConfigError("checkpoint feature dim " + std::to_string(params.dims.feature_dim) +
                          " does not match scene feature dim " + std::to_string(obs.feature_dim()));
    }
    if (params.has_semantics()) {
        if (!obs.has_semantics()) throw ConfigError("ssn checkpoint needs an encoder (--encoder)");
        if (params.dims.semantic_dim != obs.semantic_dim()) {
            throw ConfigError("checkpoint semantic dim " + std::to_string(params.dims.semantic_dim) +
                              " does not match encoder semantic dim " + std::to_string(obs.semantic_dim()));
        }
    }
}

std::string pose_text(const Pose& p) {
    return std::to_string(p.x) + "," + std::to_string(p.y) + "," + std::string(to_string(p.heading));
}

// ---------------------------------------------------------------------------

int cmd_gen_scenes(int count, int width, int height, std::uint64_t seed, const std::string& out) {
    if (count < 1) throw ConfigError("--count-per-type must be >= 1");
    const auto scenes = generate_inventory(count, width, height, seed);
    save_scene_dir(scenes, out);
    std::cout << "wrote " << scenes.size() << " scenes to " << out << "\n";
    return 0;
}

int cmd_build_semantics(const std::string& scenes_dir, const AutoencoderOptions& opt, const std::string& out) {
    const auto scenes = load_scene_dir(scenes_dir);
    const Corpus corpus = build_corpus(scenes);
    if (corpus.sentences.empty()) throw ConfigError("empty corpus in " + scenes_dir);
    std::cout << "sentences " << corpus.sentences.size() << " vocabulary " << corpus.vocabulary.size() << "\n";
    const SentenceEncoder enc = train_autoencoder(corpus, opt);
    const fs::path path(out);
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    enc.save(path);
    write_vocabulary(enc.vocabulary(), vocabulary_path(path));
    char buf[96];
    std::snprintf(buf, sizeof(buf), "loss %.6f -> %.6f", enc.loss_history().front(), enc.loss_history().back());
    std::cout << buf << "\nwrote " << out << "\n";
    return 0;
}

int cmd_train(const RunOptions& opts, const std::string& out) {
    RunConfig c = opts.load();
    auto scenes = scenes_for(c);
    auto encoder = encoder_for(c, c.train.variant == Variant::SSN);
    const ExperimentConfig x = c.experiment();
    const ExperimentSetup setup = prepare_experiment(x, std::move(scenes), std::move(encoder));

    std::vector<ObservationTablePtr> tables;
    std::vector<std::vector<Target>> targets;
    for (std::size_t i : training_scenes(c.task, x, setup)) {
        tables.push_back(setup.tables[i]);
        switch (c.train.target_mode) {
            case TargetMode::ObjectOriented:
                targets.push_back(setup.object_targets[i]);
                break;
            case TargetMode::TopSemantic:
                targets.push_back(setup.semantic_targets[i]);
                break;
            case TargetMode::Random:
                targets.push_back(select_targets(setup.scenes[i], TargetMode::Random, c.targets_per_scene,
                                                 c.scene_seed * 7919 + i, {}, {}, c.features));
                break;
        }
    }

    ensure_dir(out);
    const fs::path dir(out);
    write_text(dir / "run.cfg", render_run_config(c));
    std::string listing;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        for (std::size_t k = 0; k < targets[i].size(); ++k) {
            listing += tables[i]->scene().id() + "\t" + std::to_string(k) + "\t" + pose_text(targets[i][k].pose) + "\n";
        }
    }
    write_text(dir / "targets.tsv", listing);

    std::ofstream log(dir / "rewards.csv", std::ios::binary);
    if (!log) throw IoError("cannot write " + (dir / "rewards.csv").string());
    log << kRewardLogHeader << "\n";
    const TrainResult r = train(c.train, tables, targets, &log);
    if (!log) throw IoError("write failed: " + (dir / "rewards.csv").string());
    save_params(r.params, dir / "params.bin");
    long successes = 0;
    for (const auto& e : r.log) successes += e.success ? 1 : 0;
    std::cout << "frames " << r.frames << " episodes " << r.log.size() << " successes " << successes << "\n"
              << "wrote " << (dir / "params.bin").string() << "\n";
    return 0;
}

int cmd_eval(const RunOptions& opts, const std::string& checkpoint, bool oracle, bool random,
             std::optional<int> episodes, std::optional<int> cap, std::optional<int> threads,
             std::optional<std::uint64_t> eval_seed, const std::string& out) {
    RunConfig c = opts.load();
    if (episodes) c.eval.episodes_per_target = *episodes;
    if (cap) c.eval.cap = *cap;
    if (threads) c.eval.threads = *threads;
    if (eval_seed) c.eval.seed = *eval_seed;
    if (oracle && random) throw ConfigError("--oracle and --random are exclusive");
    if (!oracle && !random && checkpoint.empty()) throw ConfigError("eval needs --checkpoint, --oracle or --random");

    std::optional<NetworkParams> params;
    if (!checkpoint.empty() && !oracle && !random) params = load_params(checkpoint);
    auto scenes = scenes_for(c);
    auto encoder = encoder_for(c, params && params->has_semantics());
    const ExperimentConfig x = c.experiment();
    const ExperimentSetup setup = prepare_experiment(x, std::move(scenes), std::move(encoder));
    const auto tasks = evaluation_tasks(c.task, x, setup);
    if (params) check_compatible(*params, *tasks.front().scene);

    const PolicyKind kind = oracle ? PolicyKind::Oracle : random ? PolicyKind::Random : PolicyKind::Network;
    std::string model = oracle ? "Oracle" : random ? "Random" : std::string(to_string(params->variant));
    for (auto& ch : model) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    const EvalReport report = evaluate(kind, params ? &*params : nullptr, tasks, c.eval, model);

    const std::string title = c.task == "t1" ? "T1" : "T2";
    const std::string table = report_table(title, {report});
    std::string detail = "scene_id,target_idx,target,episodes,successes,total_length\n";
    for (const auto& t : report.per_target) {
        detail += t.scene_id + "," + std::to_string(t.target_idx) + "," + pose_text(t.target) + "," +
                  std::to_string(t.episodes) + "," + std::to_string(t.successes) + "," + std::to_string(t.total_length) + "\n";
    }
    ensure_dir(out);
    write_text(fs::path(out) / "report.csv", report_csv({report}));
    write_text(fs::path(out) / "report.txt", table);
    write_text(fs::path(out) / "targets.csv", detail);
    std::cout << table;
    return 0;
}

int cmd_experiment(const RunOptions& opts, const std::vector<std::string>& models, const std::string& out) {
    RunConfig c = opts.load();
    auto scenes = scenes_for(c);
    ExperimentConfig x = c.experiment();
    if (!models.empty()) x.models = models;
    bool semantic = false;
    for (const auto& m : x.models) semantic = semantic || m == "SSN" || m == "SSN_S";
    std::optional<SentenceEncoder> encoder;
    if (semantic) {
        encoder = c.encoder_path.empty() ? train_autoencoder(build_corpus(scenes, c.features), c.semantics)
                                         : *encoder_for(c, true);
    }
    const ExperimentSetup setup = prepare_experiment(x, std::move(scenes), std::move(encoder));
    const ComparisonTable t = c.task == "t1" ? run_t1(x, setup) : run_t2(x, setup);
    ensure_dir(out);
    const std::string table = report_table(t.task, t.rows);
    std::string ids;
    for (const auto& id : t.eval_scene_ids) ids += id + "\n";
    write_text(fs::path(out) / "report.csv", report_csv(t.rows));
    write_text(fs::path(out) / "report.txt", table);
    write_text(fs::path(out) / "eval_scenes.txt", ids);
    write_text(fs::path(out) / "run.cfg", render_run_config(c));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.trained[i].parameter_count() > 0) save_params(t.trained[i], fs::path(out) / (t.rows[i].model + ".bin"));
    }
    std::cout << table;
    return 0;
}

int cmd_plot(const std::string& log_path, const std::string& out, int window) {
    const auto log = read_reward_log(log_path);
    if (log.empty()) throw ConfigError(log_path + ": reward log is empty");
    write_text(out, reward_curve_svg(log, window));
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_dump_annotations(const std::string& scenes_dir, const std::string& out) {
    const auto scenes = load_scene_dir(scenes_dir);
    std::ostringstream os;
    for (const auto& s : scenes) {
        for (const Pose& p : s.valid_poses()) os << annotation_line(s, p, annotate(s, p)) << "\n";
    }
    if (out.empty() || out == "-") {
        std::cout << os.str();
    } else {
        write_text(out, os.str());
    }
    return 0;
}

std::string one_line(std::string s) {
    for (auto& ch : s) {
        if (ch == '\n' || ch == '\r') ch = ' ';
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semnav: target-driven navigation with semantic siamese actor-critic"};
    app.require_subcommand(1);

    int count = 5, width = 24, height = 24;
    std::uint64_t scene_seed = 1;
    std::string out;
    auto* gen = app.add_subcommand("gen-scenes", "generate a scene inventory");
    gen->add_option("--count-per-type", count, "rooms per scene type")->capture_default_str();
    gen->add_option("--width", width)->capture_default_str();
    gen->add_option("--height", height)->capture_default_str();
    gen->add_option("--seed", scene_seed)->capture_default_str();
    gen->add_option("--out", out, "output directory")->required();

    std::string scenes_dir;
    AutoencoderOptions ae;
    auto* sem = app.add_subcommand("build-semantics", "train the sentence encoder on scene captions");
    sem->add_option("--scenes", scenes_dir)->required();
    sem->add_option("--dim", ae.code_dim, "sentence code size")->capture_default_str();
    sem->add_option("--hidden", ae.hidden)->capture_default_str();
    sem->add_option("--epochs", ae.epochs)->capture_default_str();
    sem->add_option("--lr", ae.lr)->capture_default_str();
    sem->add_option("--seed", ae.seed)->capture_default_str();
    sem->add_option("--out", out, "encoder checkpoint; vocabulary goes to <out>.vocab")->required();

    RunOptions train_opts;
    auto* tr = app.add_subcommand("train", "train a navigation policy");
    train_opts.add_to(tr);
    tr->add_option("--variant", train_opts.variant, "sn or ssn")->check(CLI::IsMember({"sn", "ssn"}));
    tr->add_option("--targets", train_opts.targets, "random, object or top-semantic");
    tr->add_option("--out", out, "output directory")->required();

    RunOptions eval_opts;
    std::string checkpoint;
    bool oracle = false, random = false;
    std::optional<int> episodes, cap, threads;
    std::optional<std::uint64_t> eval_seed;
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint (or a baseline policy)");
    eval_opts.add_to(ev);
    ev->add_option("--checkpoint", checkpoint);
    ev->add_flag("--oracle", oracle, "shortest-path policy");
    ev->add_flag("--random", random, "uniform random policy");
    ev->add_option("--episodes", episodes, "episodes per target (default 100)");
    ev->add_option("--cap", cap, "episode cap (default 1000)");
    ev->add_option("--threads", threads, "evaluation threads");
    ev->add_option("--eval-seed", eval_seed, "evaluation seed");
    ev->add_option("--out", out, "output directory")->required();

    RunOptions exp_opts;
    std::vector<std::string> models;
    auto* ex = app.add_subcommand("experiment", "train and evaluate the T1 or T2 comparison table");
    exp_opts.add_to(ex);
    ex->add_option("--models", models, "subset of Random SN SSN SSN_S");
    ex->add_option("--out", out, "output directory")->required();

    std::string log_path;
    int window = 500;
    auto* pl = app.add_subcommand("plot", "reward curves as SVG");
    pl->add_option("--log", log_path)->required();
    pl->add_option("--window", window, "moving-average window in episodes")->capture_default_str();
    pl->add_option("--out", out)->required();

    auto* dump = app.add_subcommand("dump-annotations", "write per-pose captions, boxes and confidences");
    dump->add_option("--scenes", scenes_dir)->required();
    dump->add_option("--out", out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "semnav: error: " << one_line(e.what()) << "\n";
        return static_cast<int>(ErrorKind::Config);
    }

    try {
        if (*gen) return cmd_gen_scenes(count, width, height, scene_seed, out);
        if (*sem) return cmd_build_semantics(scenes_dir, ae, out);
        if (*tr) return cmd_train(train_opts, out);
        if (*ev) return cmd_eval(eval_opts, checkpoint, oracle, random, episodes, cap, threads, eval_seed, out);
        if (*ex) return cmd_experiment(exp_opts, models, out);
        if (*pl) return cmd_plot(log_path, out, window);
        if (*dump) return cmd_dump_annotations(scenes_dir, out);
    } catch (const Error& e) {
        std::cerr << "semnav: error: " << one_line(e.what()) << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "semnav: error: " << one_line(e.what()) << "\n";
        return 1;
    }
    return 0;
}
