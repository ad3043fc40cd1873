#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "semnav/scene.hpp"

namespace semnav {

/// Scene file text (JSON). Keys: id, scene_type, width, height, walls,
/// objects[{class, attributes, cell, relations}], seed. See docs/formats.md.
std::string scene_to_json(const SceneSpec& scene);
/// Throws IoError naming `origin` when the text is malformed or violates a scene invariant.
SceneSpec scene_from_json(const std::string& text, const std::string& origin = "<memory>");

void save_scene(const SceneSpec& scene, const std::filesystem::path& path);
SceneSpec load_scene(const std::filesystem::path& path);

/// Writes `<id>.json` for every scene plus `manifest.txt` (one id per line).
void save_scene_dir(const std::vector<SceneSpec>& scenes, const std::filesystem::path& dir);
/// Loads the scenes listed in `dir/manifest.txt`, in manifest order.
std::vector<SceneSpec> load_scene_dir(const std::filesystem::path& dir);

/// The default inventory: `count_per_type` rooms per scene type, seeds
/// base_seed, base_seed+1, ... within each type.
std::vector<SceneSpec> generate_inventory(int count_per_type, int width, int height, std::uint64_t base_seed);

}  // namespace semnav
