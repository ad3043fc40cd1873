#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "semnav/a3c.hpp"
#include "semnav/config.hpp"
#include "semnav/error.hpp"
#include "semnav/eval.hpp"
#include "semnav/featurizer.hpp"
#include "semnav/plot.hpp"
#include "semnav/scene_io.hpp"
#include "semnav/semantics.hpp"
#include "semnav/targets.hpp"

namespace py = pybind11;
using namespace semnav;

namespace {

std::vector<EvalTask> make_eval_tasks(const std::vector<ObservationTablePtr>& tables,
                                      const std::vector<std::vector<Pose>>& targets) {
    if (tables.size() != targets.size()) throw ContractError("one target list per scene required");
    std::vector<EvalTask> tasks;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        for (std::size_t k = 0; k < targets[i].size(); ++k) tasks.push_back({tables[i], targets[i][k], static_cast<int>(k)});
    }
    return tasks;
}

std::vector<std::vector<Target>> as_targets(const std::vector<std::vector<Pose>>& poses) {
    std::vector<std::vector<Target>> out;
    for (const auto& list : poses) {
        std::vector<Target> t;
        for (const auto& p : list) t.push_back({p, TargetMode::ObjectOriented});
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_semnav, m) {
    m.doc() = "Core bindings for semnav";

    const auto& base = py::register_exception<Error>(m, "SemnavError");
    py::register_exception<ContractError>(m, "ContractError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    py::enum_<SceneType>(m, "SceneType")
        .value("Bathroom", SceneType::Bathroom)
        .value("Bedroom", SceneType::Bedroom)
        .value("Kitchen", SceneType::Kitchen)
        .value("LivingRoom", SceneType::LivingRoom);
    py::enum_<Heading>(m, "Heading")
        .value("North", Heading::North)
        .value("East", Heading::East)
        .value("South", Heading::South)
        .value("West", Heading::West);
    py::enum_<Variant>(m, "Variant").value("SN", Variant::SN).value("SSN", Variant::SSN);
    py::enum_<TargetMode>(m, "TargetMode")
        .value("Random", TargetMode::Random)
        .value("ObjectOriented", TargetMode::ObjectOriented)
        .value("TopSemantic", TargetMode::TopSemantic);
    py::enum_<PolicyKind>(m, "PolicyKind")
        .value("Network", PolicyKind::Network)
        .value("Random", PolicyKind::Random)
        .value("Oracle", PolicyKind::Oracle);

    py::class_<Pose>(m, "Pose")
        .def(py::init([](int x, int y, Heading h) { return Pose{x, y, h}; }), py::arg("x"), py::arg("y"),
             py::arg("heading") = Heading::North)
        .def_readwrite("x", &Pose::x)
        .def_readwrite("y", &Pose::y)
        .def_readwrite("heading", &Pose::heading)
        .def("__eq__", [](const Pose& a, const Pose& b) { return a == b; })
        .def("__hash__", [](const Pose& p) { return (p.y * 100003 + p.x) * 4 + static_cast<int>(p.heading); })
        .def("__repr__", [](const Pose& p) {
            return "Pose(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " + std::string(to_string(p.heading)) + ")";
        });

    py::class_<SceneSpec>(m, "Scene")
        .def_property_readonly("id", &SceneSpec::id)
        .def_property_readonly("scene_type", &SceneSpec::scene_type)
        .def_property_readonly("width", &SceneSpec::width)
        .def_property_readonly("height", &SceneSpec::height)
        .def_property_readonly("seed", &SceneSpec::seed)
        .def_property_readonly("object_classes",
                               [](const SceneSpec& s) {
                                   std::vector<std::string> out;
                                   for (const auto& o : s.objects()) out.push_back(o.object_class);
                                   return out;
                               })
        .def("valid_poses", &SceneSpec::valid_poses)
        .def("is_valid", &SceneSpec::is_valid)
        .def("to_json", [](const SceneSpec& s) { return scene_to_json(s); })
        .def("__eq__", [](const SceneSpec& a, const SceneSpec& b) { return a == b; });

    m.def("generate_scene", &generate_scene, py::arg("seed"), py::arg("scene_type"), py::arg("width"), py::arg("height"));
    m.def("generate_inventory", &generate_inventory, py::arg("count_per_type"), py::arg("width"), py::arg("height"),
          py::arg("base_seed"));
    m.def("scene_from_json", &scene_from_json, py::arg("text"), py::arg("origin") = "<memory>");
    m.def("save_scene_dir", &save_scene_dir);
    m.def("load_scene_dir", &load_scene_dir);

    py::class_<StepResult>(m, "StepResult")
        .def_readonly("next_pose", &StepResult::next_pose)
        .def_readonly("reward", &StepResult::reward)
        .def_readonly("done", &StepResult::done)
        .def_readonly("success", &StepResult::success)
        .def_readonly("steps_taken", &StepResult::steps_taken);
    m.def(
        "step",
        [](const SceneSpec& s, const Pose& pose, const Pose& target, int action, int steps_taken, int cap, bool match_heading) {
            return step(s, pose, target, action, steps_taken, cap, GoalRule{match_heading});
        },
        py::arg("scene"), py::arg("pose"), py::arg("target"), py::arg("action"), py::arg("steps_taken") = 0,
        py::arg("cap") = kDefaultEpisodeCap, py::arg("match_heading") = true);
    m.def(
        "shortest_path_length",
        [](const SceneSpec& s, const Pose& a, const Pose& b) { return shortest_path_length(s, a, b); }, py::arg("scene"),
        py::arg("start"), py::arg("target"));

    py::class_<FeaturizerConfig>(m, "FeaturizerConfig")
        .def(py::init<>())
        .def_readwrite("dim", &FeaturizerConfig::dim)
        .def_readwrite("feature_seed", &FeaturizerConfig::feature_seed)
        .def_readwrite("fov_deg", &FeaturizerConfig::fov_deg)
        .def_readwrite("range", &FeaturizerConfig::range);
    m.def("visual_features", &visual_features, py::arg("scene"), py::arg("pose"), py::arg("feature_seed") = 1,
          py::arg("dim") = 128);

    py::class_<Annotation>(m, "Annotation")
        .def_readonly("box", &Annotation::box)
        .def_readonly("confidence", &Annotation::confidence)
        .def_readonly("tokens", &Annotation::tokens);
    m.def(
        "annotate", [](const SceneSpec& s, const Pose& p) { return annotate(s, p); }, py::arg("scene"), py::arg("pose"));

    py::class_<Target>(m, "Target").def_readonly("pose", &Target::pose).def_readonly("mode", &Target::mode);
    m.def(
        "select_targets",
        [](const SceneSpec& s, TargetMode mode, int k, std::uint64_t seed) {
            PoseScorer scorer;
            if (mode == TargetMode::TopSemantic) scorer = confidence_sum_scorer(s);
            return select_targets(s, mode, k, seed, scorer);
        },
        py::arg("scene"), py::arg("mode"), py::arg("k"), py::arg("seed"));

    py::class_<Corpus>(m, "Corpus")
        .def_readonly("sentences", &Corpus::sentences)
        .def_readonly("vocabulary", &Corpus::vocabulary);
    m.def(
        "build_corpus", [](const std::vector<SceneSpec>& scenes) { return build_corpus(scenes); }, py::arg("scenes"));
    m.def("make_corpus", &make_corpus, py::arg("sentences"));

    py::class_<AutoencoderOptions>(m, "AutoencoderOptions")
        .def(py::init<>())
        .def_readwrite("code_dim", &AutoencoderOptions::code_dim)
        .def_readwrite("hidden", &AutoencoderOptions::hidden)
        .def_readwrite("epochs", &AutoencoderOptions::epochs)
        .def_readwrite("lr", &AutoencoderOptions::lr)
        .def_readwrite("seed", &AutoencoderOptions::seed);
    py::class_<SentenceEncoder>(m, "SentenceEncoder")
        .def_property_readonly("code_dim", &SentenceEncoder::code_dim)
        .def_property_readonly("vocabulary", &SentenceEncoder::vocabulary)
        .def_property_readonly("loss_history", &SentenceEncoder::loss_history)
        .def("encode", [](const SentenceEncoder& e, const std::vector<std::string>& tokens) { return e.encode(tokens); })
        .def("save", &SentenceEncoder::save)
        .def_static("load", &SentenceEncoder::load);
    m.def("train_autoencoder", &train_autoencoder, py::arg("corpus"), py::arg("options") = AutoencoderOptions{});
    m.def(
        "frame_semantics",
        [](const std::vector<Annotation>& anns, const SentenceEncoder& enc) { return frame_semantics(anns, enc); },
        py::arg("annotations"), py::arg("encoder"));
    m.def("write_vocabulary", &write_vocabulary);

    py::class_<NetDims>(m, "NetDims")
        .def(py::init([](int f, int e, int s) { return NetDims{f, e, s}; }), py::arg("feature_dim") = 128,
             py::arg("embed_dim") = 64, py::arg("semantic_dim") = 345)
        .def_readonly("feature_dim", &NetDims::feature_dim)
        .def_readonly("embed_dim", &NetDims::embed_dim)
        .def_readonly("semantic_dim", &NetDims::semantic_dim);
    py::class_<NetworkParams>(m, "NetworkParams")
        .def_readonly("variant", &NetworkParams::variant)
        .def_readonly("dims", &NetworkParams::dims)
        .def("parameter_count", &NetworkParams::parameter_count)
        .def("__eq__", [](const NetworkParams& a, const NetworkParams& b) { return a == b; });
    m.def("init_params", &init_params, py::arg("variant"), py::arg("dims"), py::arg("seed"));
    m.def("save_params", &save_params);
    m.def("load_params", &load_params);

    py::class_<ObservationTable, std::shared_ptr<ObservationTable>>(m, "ObservationTable")
        .def_property_readonly("scene", &ObservationTable::scene)
        .def_property_readonly("feature_dim", &ObservationTable::feature_dim)
        .def_property_readonly("semantic_dim", &ObservationTable::semantic_dim);
    m.def(
        "build_observation_tables",
        [](const std::vector<SceneSpec>& scenes, const FeaturizerConfig& cfg, const SentenceEncoder* enc) {
            std::vector<std::shared_ptr<ObservationTable>> out;
            for (const auto& t : build_observation_tables(scenes, cfg, enc)) {
                out.push_back(std::const_pointer_cast<ObservationTable>(t));
            }
            return out;
        },
        py::arg("scenes"), py::arg("features") = FeaturizerConfig{}, py::arg("encoder") = nullptr);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("workers", &TrainConfig::workers)
        .def_readwrite("total_frames", &TrainConfig::total_frames)
        .def_readwrite("t_max", &TrainConfig::t_max)
        .def_readwrite("gamma", &TrainConfig::gamma)
        .def_readwrite("beta", &TrainConfig::beta)
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("variant", &TrainConfig::variant)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("episode_cap", &TrainConfig::episode_cap)
        .def_readwrite("embed_dim", &TrainConfig::embed_dim);
    py::class_<RewardLogEntry>(m, "RewardLogEntry")
        .def_readonly("frames", &RewardLogEntry::frames)
        .def_readonly("scene_id", &RewardLogEntry::scene_id)
        .def_readonly("target_idx", &RewardLogEntry::target_idx)
        .def_readonly("episode_return", &RewardLogEntry::episode_return)
        .def_readonly("episode_len", &RewardLogEntry::episode_len)
        .def_readonly("success", &RewardLogEntry::success);
    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("params", &TrainResult::params)
        .def_readonly("log", &TrainResult::log)
        .def_readonly("frames", &TrainResult::frames);
    m.def(
        "train",
        [](const TrainConfig& cfg, const std::vector<std::shared_ptr<ObservationTable>>& tables,
           const std::vector<std::vector<Pose>>& targets) {
            std::vector<ObservationTablePtr> t(tables.begin(), tables.end());
            py::gil_scoped_release release;
            return train(cfg, t, as_targets(targets));
        },
        py::arg("config"), py::arg("tables"), py::arg("targets"));

    py::class_<EvalConfig>(m, "EvalConfig")
        .def(py::init<>())
        .def_readwrite("episodes_per_target", &EvalConfig::episodes_per_target)
        .def_readwrite("cap", &EvalConfig::cap)
        .def_readwrite("seed", &EvalConfig::seed)
        .def_readwrite("threads", &EvalConfig::threads);
    py::class_<SceneTypeResult>(m, "SceneTypeResult")
        .def_readonly("scene_type", &SceneTypeResult::scene_type)
        .def_readonly("episodes", &SceneTypeResult::episodes)
        .def_readonly("successes", &SceneTypeResult::successes)
        .def_readonly("mean_length", &SceneTypeResult::mean_length)
        .def_readonly("success_pct", &SceneTypeResult::success_pct);
    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("model", &EvalReport::model)
        .def_readonly("per_type", &EvalReport::per_type)
        .def("success_pct", &EvalReport::success_pct)
        .def("mean_length", &EvalReport::mean_length)
        .def("csv", [](const EvalReport& r) { return report_csv({r}); })
        .def("table", [](const EvalReport& r, const std::string& title) { return report_table(title, {r}); },
             py::arg("title") = "");
    m.def(
        "evaluate",
        [](PolicyKind kind, const NetworkParams* params, const std::vector<std::shared_ptr<ObservationTable>>& tables,
           const std::vector<std::vector<Pose>>& targets, const EvalConfig& cfg) {
            std::vector<ObservationTablePtr> t(tables.begin(), tables.end());
            const auto tasks = make_eval_tasks(t, targets);
            py::gil_scoped_release release;
            return evaluate(kind, params, tasks, cfg);
        },
        py::arg("kind"), py::arg("params"), py::arg("tables"), py::arg("targets"), py::arg("config") = EvalConfig{});

    m.def(
        "parse_run_config", [](const std::string& text) { return render_run_config(parse_run_config(text)); },
        py::arg("text"), "Parses and re-renders a run configuration (raises ConfigError on unknown keys).");
    m.def(
        "reward_curve_svg",
        [](const std::string& log_path, int window) { return reward_curve_svg(read_reward_log(log_path), window); },
        py::arg("log_path"), py::arg("window") = 500);
}
