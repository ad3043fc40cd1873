#include "semnav/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semnav/error.hpp"

namespace semnav {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("bad value '" + value + "' for " + key);
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("bad boolean '" + value + "' for " + key);
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    const std::string full = section + "." + key;
    auto as_int = [&] { return parse_number<int>(full, value); };
    auto as_long = [&] { return parse_number<long>(full, value); };
    auto as_u64 = [&] { return parse_number<std::uint64_t>(full, value); };
    auto as_double = [&] { return parse_number<double>(full, value); };

    if (section == "scenes") {
        if (key == "count_per_type") return void(count_per_type = as_int());
        if (key == "width") return void(width = as_int());
        if (key == "height") return void(height = as_int());
        if (key == "seed") return void(scene_seed = as_u64());
        if (key == "targets_per_scene") return void(targets_per_scene = as_int());
    } else if (section == "features") {
        if (key == "dim") return void(features.dim = as_int());
        if (key == "seed") return void(features.feature_seed = as_u64());
        if (key == "fov_deg") return void(features.fov_deg = as_double());
        if (key == "range") return void(features.range = as_double());
        if (key == "conf_slope") return void(features.conf_slope = as_double());
        if (key == "conf_min") return void(features.conf_min = as_double());
    } else if (section == "semantics") {
        if (key == "dim") return void(semantics.code_dim = as_int());
        if (key == "hidden") return void(semantics.hidden = as_int());
        if (key == "epochs") return void(semantics.epochs = as_int());
        if (key == "lr") return void(semantics.lr = as_double());
        if (key == "seed") return void(semantics.seed = as_u64());
    } else if (section == "train") {
        if (key == "workers") return void(train.workers = as_int());
        if (key == "total_frames") return void(train.total_frames = as_long());
        if (key == "t_max") return void(train.t_max = as_int());
        if (key == "gamma") return void(train.gamma = as_double());
        if (key == "beta") return void(train.beta = as_double());
        if (key == "value_coef") return void(train.value_coef = as_double());
        if (key == "lr") return void(train.lr = as_double());
        if (key == "rmsprop_decay") return void(train.rmsprop_decay = as_double());
        if (key == "rmsprop_eps") return void(train.rmsprop_eps = as_double());
        if (key == "seed") return void(train.seed = as_u64());
        if (key == "episode_cap") return void(train.episode_cap = as_int());
        if (key == "embed_dim") return void(train.embed_dim = as_int());
        if (key == "variant") return void(train.variant = parse_variant(value));
        if (key == "targets") return void(train.target_mode = parse_target_mode(value));
        if (key == "match_heading") return void(train.goal.match_heading = parse_bool(full, value));
        if (key == "task") {
            if (value != "t1" && value != "t2") throw ConfigError("train.task must be t1 or t2");
            return void(task = value);
        }
    } else if (section == "eval") {
        if (key == "episodes") return void(eval.episodes_per_target = as_int());
        if (key == "cap") return void(eval.cap = as_int());
        if (key == "seed") return void(eval.seed = as_u64());
        if (key == "threads") return void(eval.threads = as_int());
        if (key == "match_heading") return void(eval.goal.match_heading = parse_bool(full, value));
    } else if (section == "paths") {
        if (key == "scenes") return void(scenes_dir = value);
        if (key == "encoder") return void(encoder_path = value);
        if (key == "out") return void(out_dir = value);
    } else {
        throw ConfigError("unknown config section [" + section + "]");
    }
    throw ConfigError("unknown config key '" + full + "'");
}

ExperimentConfig RunConfig::experiment() const {
    ExperimentConfig x;
    x.count_per_type = count_per_type;
    x.width = width;
    x.height = height;
    x.scene_seed = scene_seed;
    x.targets_per_scene = targets_per_scene;
    x.features = features;
    x.semantics = semantics;
    x.train = train;
    x.eval = eval;
    return x;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        if (section.empty()) throw ConfigError(where + "key outside of a section");
        try {
            cfg.set(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.string());
}

std::string render_run_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[scenes]\ncount_per_type = " << c.count_per_type << "\nwidth = " << c.width << "\nheight = " << c.height
       << "\nseed = " << c.scene_seed << "\ntargets_per_scene = " << c.targets_per_scene << "\n\n";
    os << "[features]\ndim = " << c.features.dim << "\nseed = " << c.features.feature_seed
       << "\nfov_deg = " << num(c.features.fov_deg) << "\nrange = " << num(c.features.range)
       << "\nconf_slope = " << num(c.features.conf_slope) << "\nconf_min = " << num(c.features.conf_min) << "\n\n";
    os << "[semantics]\ndim = " << c.semantics.code_dim << "\nhidden = " << c.semantics.hidden
       << "\nepochs = " << c.semantics.epochs << "\nlr = " << num(c.semantics.lr) << "\nseed = " << c.semantics.seed
       << "\n\n";
    const TrainConfig& t = c.train;
    os << "[train]\nworkers = " << t.workers << "\ntotal_frames = " << t.total_frames << "\nt_max = " << t.t_max
       << "\ngamma = " << num(t.gamma) << "\nbeta = " << num(t.beta) << "\nvalue_coef = " << num(t.value_coef)
       << "\nlr = " << num(t.lr) << "\nrmsprop_decay = " << num(t.rmsprop_decay)
       << "\nrmsprop_eps = " << num(t.rmsprop_eps) << "\nseed = " << t.seed << "\nepisode_cap = " << t.episode_cap
       << "\nembed_dim = " << t.embed_dim << "\nvariant = " << to_string(t.variant)
       << "\ntargets = " << to_string(t.target_mode) << "\nmatch_heading = " << (t.goal.match_heading ? "true" : "false")
       << "\ntask = " << c.task << "\n\n";
    os << "[eval]\nepisodes = " << c.eval.episodes_per_target << "\ncap = " << c.eval.cap << "\nseed = " << c.eval.seed
       << "\nthreads = " << c.eval.threads << "\nmatch_heading = " << (c.eval.goal.match_heading ? "true" : "false")
       << "\n\n";
    os << "[paths]\nscenes = " << c.scenes_dir << "\nencoder = " << c.encoder_path << "\nout = " << c.out_dir << "\n";
    return os.str();
}

}  // namespace semnav
