#pragma once

// Discrete room simulator: scenes, poses, the four navigation actions,
// step rewards and pose-graph shortest paths.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semnav {

enum class SceneType : std::uint8_t { Bathroom = 0, Bedroom = 1, Kitchen = 2, LivingRoom = 3 };
inline constexpr std::size_t kNumSceneTypes = 4;
inline constexpr std::array<SceneType, kNumSceneTypes> kAllSceneTypes = {
    SceneType::Bathroom, SceneType::Bedroom, SceneType::Kitchen, SceneType::LivingRoom};

std::string_view to_string(SceneType type);
SceneType parse_scene_type(std::string_view token);

enum class Heading : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };

std::string_view to_string(Heading heading);
Heading parse_heading(std::string_view token);

enum class Action : std::uint8_t { MoveForward = 0, MoveBackward = 1, RotateLeft = 2, RotateRight = 3 };
inline constexpr std::size_t kNumActions = 4;

std::string_view to_string(Action action);
/// Throws ContractError for indices outside [0, 4).
Action action_from_index(int index);

struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Pose {
    int x = 0;
    int y = 0;
    Heading heading = Heading::North;

    Cell cell() const { return {x, y}; }
    friend bool operator==(const Pose&, const Pose&) = default;
};

struct Relation {
    std::string relation;
    std::size_t other = 0;
    friend bool operator==(const Relation&, const Relation&) = default;
};

struct ObjectInstance {
    std::string object_class;
    std::vector<std::string> attributes;
    Cell cell;
    std::vector<Relation> relations;
    friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

/// Immutable generated room. Construction validates every structural
/// invariant (bounds, object placement, connectivity of the free cells).
class SceneSpec {
public:
    static constexpr int kMinSize = 6;
    static constexpr std::size_t kMinObjects = 5;

    SceneSpec(std::string id, SceneType scene_type, int width, int height, std::vector<Cell> walls,
              std::vector<ObjectInstance> objects, std::uint64_t seed);

    const std::string& id() const { return id_; }
    SceneType scene_type() const { return scene_type_; }
    int width() const { return width_; }
    int height() const { return height_; }
    /// Sorted, deduplicated.
    const std::vector<Cell>& walls() const { return walls_; }
    const std::vector<ObjectInstance>& objects() const { return objects_; }
    std::uint64_t seed() const { return seed_; }

    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool is_wall(int x, int y) const { return blocked_[static_cast<std::size_t>(y * width_ + x)] != 0; }
    bool is_free(int x, int y) const { return in_bounds(x, y) && !is_wall(x, y); }
    bool is_valid(const Pose& pose) const { return is_free(pose.x, pose.y); }

    /// Dense pose index in [0, pose_slots()); valid or not.
    std::size_t pose_index(const Pose& pose) const {
        return (static_cast<std::size_t>(pose.y) * width_ + pose.x) * 4 + static_cast<std::size_t>(pose.heading);
    }
    Pose pose_at(std::size_t index) const;
    std::size_t pose_slots() const { return static_cast<std::size_t>(width_) * height_ * 4; }
    /// All valid poses in ascending pose_index order.
    std::vector<Pose> valid_poses() const;
    std::size_t free_cell_count() const;

    friend bool operator==(const SceneSpec& a, const SceneSpec& b) {
        return a.id_ == b.id_ && a.scene_type_ == b.scene_type_ && a.width_ == b.width_ &&
               a.height_ == b.height_ && a.walls_ == b.walls_ && a.objects_ == b.objects_ && a.seed_ == b.seed_;
    }

private:
    std::string id_;
    SceneType scene_type_;
    int width_;
    int height_;
    std::vector<Cell> walls_;
    std::vector<ObjectInstance> objects_;
    std::uint64_t seed_;
    std::vector<std::uint8_t> blocked_;
};

/// Whether every free cell is reachable from every other (4-neighbour flood fill).
bool free_cells_connected(int width, int height, const std::vector<Cell>& walls);

/// Object classes that may appear in a scene type.
const std::vector<std::string>& class_vocabulary(SceneType type);
const std::vector<std::string>& attribute_vocabulary();
const std::vector<std::string>& relation_vocabulary();

/// Deterministic room generator. Requires width, height >= 6.
SceneSpec generate_scene(std::uint64_t seed, SceneType scene_type, int width, int height);

inline constexpr double kStepReward = -0.01;
inline constexpr double kGoalReward = 10.0;
inline constexpr int kDefaultEpisodeCap = 1000;

struct StepResult {
    Pose next_pose;
    double reward = 0.0;
    bool done = false;
    bool success = false;
    int steps_taken = 0;
};

/// Goal matching rule. Position and heading must both match unless
/// `match_heading` is turned off.
struct GoalRule {
    bool match_heading = true;
    bool reached(const Pose& pose, const Pose& target) const {
        return pose.x == target.x && pose.y == target.y && (!match_heading || pose.heading == target.heading);
    }
};

/// Pose after applying `action`; blocked moves leave the pose unchanged.
Pose apply_action(const SceneSpec& scene, const Pose& pose, Action action);

/// One environment transition. `action` is an index in [0, 4).
StepResult step(const SceneSpec& scene, const Pose& pose, const Pose& target, int action, int steps_taken,
                int cap = kDefaultEpisodeCap, GoalRule rule = {});

/// BFS distance (in actions) from every pose to `to`; -1 for invalid slots.
/// Indexed by SceneSpec::pose_index.
std::vector<int> distance_field(const SceneSpec& scene, const Pose& to, GoalRule rule = {});

int shortest_path_length(const SceneSpec& scene, const Pose& from, const Pose& to, GoalRule rule = {});

/// First action of a shortest path according to a precomputed distance field
/// (lowest action index among the optimal ones).
Action oracle_action(const SceneSpec& scene, const std::vector<int>& field, const Pose& pose);

}  // namespace semnav
