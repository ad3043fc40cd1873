#pragma once

#include <filesystem>
#include <string>

#include "semnav/a3c.hpp"
#include "semnav/eval.hpp"
#include "semnav/featurizer.hpp"
#include "semnav/semantics.hpp"

namespace semnav {

/// Everything a CLI run needs. Loaded from a flat `key = value` file with
/// `[section]` headers; unknown sections or keys are rejected.
struct RunConfig {
    int count_per_type = 5;
    int width = 24;
    int height = 24;
    std::uint64_t scene_seed = 1;
    FeaturizerConfig features{};
    AutoencoderOptions semantics{};
    TrainConfig train{};
    int targets_per_scene = 5;
    std::string task = "t1";
    EvalConfig eval{};
    std::string scenes_dir;
    std::string encoder_path;
    std::string out_dir;

    /// Sets `section.key`; throws ConfigError for unknown keys or bad values.
    void set(const std::string& section, const std::string& key, const std::string& value);

    ExperimentConfig experiment() const;
};

RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Round-trippable `key = value` rendering of every field.
std::string render_run_config(const RunConfig& config);

}  // namespace semnav
