#include "semnav/scene_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "semnav/error.hpp"

namespace semnav {

using nlohmann::json;

std::string scene_to_json(const SceneSpec& scene) {
    json j;
    j["id"] = scene.id();
    j["scene_type"] = std::string(to_string(scene.scene_type()));
    j["width"] = scene.width();
    j["height"] = scene.height();
    j["seed"] = scene.seed();
    json walls = json::array();
    for (const Cell& c : scene.walls()) walls.push_back({c.x, c.y});
    j["walls"] = std::move(walls);
    json objects = json::array();
    for (const ObjectInstance& o : scene.objects()) {
        json rels = json::array();
        for (const Relation& r : o.relations) rels.push_back({r.relation, r.other});
        objects.push_back({{"class", o.object_class},
                           {"attributes", o.attributes},
                           {"cell", {o.cell.x, o.cell.y}},
                           {"relations", std::move(rels)}});
    }
    j["objects"] = std::move(objects);
    return j.dump(1) + "\n";
}

SceneSpec scene_from_json(const std::string& text, const std::string& origin) {
    try {
        const json j = json::parse(text);
        static const std::vector<std::string> keys = {"id", "scene_type", "width", "height", "walls", "objects",
                                                      "seed"};
        for (const auto& [key, _] : j.items()) {
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                throw IoError(origin + ": unknown key '" + key + "'");
            }
        }
        std::vector<Cell> walls;
        for (const auto& w : j.at("walls")) walls.push_back({w.at(0).get<int>(), w.at(1).get<int>()});
        std::vector<ObjectInstance> objects;
        for (const auto& o : j.at("objects")) {
            ObjectInstance obj;
            obj.object_class = o.at("class").get<std::string>();
            obj.attributes = o.at("attributes").get<std::vector<std::string>>();
            obj.cell = {o.at("cell").at(0).get<int>(), o.at("cell").at(1).get<int>()};
            for (const auto& r : o.at("relations")) {
                obj.relations.push_back({r.at(0).get<std::string>(), r.at(1).get<std::size_t>()});
            }
            objects.push_back(std::move(obj));
        }
        return SceneSpec(j.at("id").get<std::string>(), parse_scene_type(j.at("scene_type").get<std::string>()),
                         j.at("width").get<int>(), j.at("height").get<int>(), std::move(walls), std::move(objects),
                         j.at("seed").get<std::uint64_t>());
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError(origin + ": " + e.what());
    }
}

void save_scene(const SceneSpec& scene, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << scene_to_json(scene);
    if (!out) throw IoError("write failed: " + path.string());
}

SceneSpec load_scene(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return scene_from_json(buf.str(), path.string());
}

void save_scene_dir(const std::vector<SceneSpec>& scenes, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::ofstream manifest(dir / "manifest.txt", std::ios::binary);
    if (!manifest) throw IoError("cannot write " + (dir / "manifest.txt").string());
    for (const SceneSpec& s : scenes) {
        save_scene(s, dir / (s.id() + ".json"));
        manifest << s.id() << "\n";
    }
}

std::vector<SceneSpec> load_scene_dir(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest.txt");
    if (!manifest) throw IoError("cannot read " + (dir / "manifest.txt").string());
    std::vector<SceneSpec> scenes;
    std::string id;
    while (std::getline(manifest, id)) {
        if (id.empty()) continue;
        scenes.push_back(load_scene(dir / (id + ".json")));
    }
    if (scenes.empty()) throw IoError("empty manifest in " + dir.string());
    return scenes;
}

std::vector<SceneSpec> generate_inventory(int count_per_type, int width, int height, std::uint64_t base_seed) {
    std::vector<SceneSpec> scenes;
    for (SceneType t : kAllSceneTypes) {
        for (int i = 0; i < count_per_type; ++i) {
            scenes.push_back(generate_scene(base_seed + static_cast<std::uint64_t>(i), t, width, height));
        }
    }
    return scenes;
}

}  // namespace semnav
