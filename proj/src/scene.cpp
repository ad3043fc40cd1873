#include "semnav/scene.hpp"

#include <algorithm>
#include <deque>
#include <random>

#include "semnav/error.hpp"

namespace semnav {

namespace {

constexpr std::array<std::string_view, kNumSceneTypes> kSceneTypeNames = {"bathroom", "bedroom", "kitchen",
                                                                          "livingroom"};
constexpr std::array<std::string_view, 4> kHeadingNames = {"north", "east", "south", "west"};
constexpr std::array<std::string_view, kNumActions> kActionNames = {"move_forward", "move_backward",
                                                                    "rotate_left", "rotate_right"};

constexpr std::array<int, 4> kDx = {0, 1, 0, -1};
constexpr std::array<int, 4> kDy = {-1, 0, 1, 0};

// Classes shared between several room types get a lower weight outside their
// "home" type so that per-type statistics differ.
struct WeightedClass {
    std::string_view name;
    int weight;
};

const std::array<std::vector<WeightedClass>, kNumSceneTypes>& weighted_classes() {
    static const std::array<std::vector<WeightedClass>, kNumSceneTypes> table = {{
        {{"sink", 6}, {"toilet", 6}, {"bathtub", 5}, {"mirror", 5}, {"towel", 4}, {"shower", 4}, {"cabinet", 2},
         {"plant", 1}},
        {{"bed", 6}, {"pillow", 5}, {"lamp", 4}, {"dresser", 5}, {"nightstand", 5}, {"wardrobe", 4}, {"desk", 2},
         {"mirror", 1}},
        {{"stove", 6}, {"fridge", 6}, {"sink", 4}, {"microwave", 5}, {"counter", 5}, {"kettle", 4}, {"table", 2},
         {"chair", 2}},
        {{"sofa", 6}, {"tv", 6}, {"armchair", 5}, {"bookshelf", 4}, {"table", 3}, {"lamp", 3}, {"plant", 3},
         {"painting", 4}},
    }};
    return table;
}

std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

void add_partition(std::mt19937_64& rng, int width, int height, std::vector<Cell>& walls) {
    const bool vertical = (rng() & 1U) != 0;
    const int span = vertical ? height : width;
    const int across = vertical ? width : height;
    const int line = uniform_int(rng, 3, across - 4);
    const int door = uniform_int(rng, 1, span - 3);
    const int door_width = uniform_int(rng, 1, 2);
    for (int i = 0; i < span; ++i) {
        if (i >= door && i < door + door_width) continue;
        walls.push_back(vertical ? Cell{line, i} : Cell{i, line});
    }
}

void add_furniture(std::mt19937_64& rng, int width, int height, std::vector<Cell>& walls) {
    const int blocks = (width * height) / 24;
    for (int b = 0; b < blocks; ++b) {
        const Cell c{uniform_int(rng, 0, width - 1), uniform_int(rng, 0, height - 1)};
        walls.push_back(c);
        if ((rng() % 3) == 0) {
            const int d = static_cast<int>(rng() % 4);
            const Cell n{c.x + kDx[d], c.y + kDy[d]};
            if (n.x >= 0 && n.y >= 0 && n.x < width && n.y < height) walls.push_back(n);
        }
    }
}

}  // namespace

std::string_view to_string(SceneType type) { return kSceneTypeNames[static_cast<std::size_t>(type)]; }

SceneType parse_scene_type(std::string_view token) {
    for (std::size_t i = 0; i < kSceneTypeNames.size(); ++i) {
        if (kSceneTypeNames[i] == token) return static_cast<SceneType>(i);
    }
    if (token == "living" || token == "living-room") return SceneType::LivingRoom;
    throw ContractError("unknown scene type '" + std::string(token) + "'");
}

std::string_view to_string(Heading heading) { return kHeadingNames[static_cast<std::size_t>(heading)]; }

Heading parse_heading(std::string_view token) {
    for (std::size_t i = 0; i < kHeadingNames.size(); ++i) {
        if (kHeadingNames[i] == token) return static_cast<Heading>(i);
    }
    throw ContractError("unknown heading '" + std::string(token) + "'");
}

std::string_view to_string(Action action) { return kActionNames[static_cast<std::size_t>(action)]; }

Action action_from_index(int index) {
    if (index < 0 || index >= static_cast<int>(kNumActions)) {
        throw ContractError("invalid action index " + std::to_string(index));
    }
    return static_cast<Action>(index);
}

bool free_cells_connected(int width, int height, const std::vector<Cell>& walls) {
    std::vector<std::uint8_t> blocked(static_cast<std::size_t>(width * height), 0);
    for (const Cell& w : walls) blocked[static_cast<std::size_t>(w.y * width + w.x)] = 1;
    const auto free_total = std::count(blocked.begin(), blocked.end(), 0);
    if (free_total == 0) return false;
    const auto start = static_cast<std::size_t>(std::find(blocked.begin(), blocked.end(), 0) - blocked.begin());
    std::vector<std::uint8_t> seen(blocked.size(), 0);
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    long reached = 0;
    while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        ++reached;
        const int x = static_cast<int>(cur) % width;
        const int y = static_cast<int>(cur) / width;
        for (int d = 0; d < 4; ++d) {
            const int nx = x + kDx[d];
            const int ny = y + kDy[d];
            if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
            const auto n = static_cast<std::size_t>(ny * width + nx);
            if (blocked[n] || seen[n]) continue;
            seen[n] = 1;
            queue.push_back(n);
        }
    }
    return reached == free_total;
}

SceneSpec::SceneSpec(std::string id, SceneType scene_type, int width, int height, std::vector<Cell> walls,
                     std::vector<ObjectInstance> objects, std::uint64_t seed)
    : id_(std::move(id)),
      scene_type_(scene_type),
      width_(width),
      height_(height),
      walls_(std::move(walls)),
      objects_(std::move(objects)),
      seed_(seed) {
    if (width_ < kMinSize || height_ < kMinSize) {
        throw ContractError("scene dimensions " + std::to_string(width_) + "x" + std::to_string(height_) +
                            " below minimum " + std::to_string(kMinSize));
    }
    std::sort(walls_.begin(), walls_.end());
    walls_.erase(std::unique(walls_.begin(), walls_.end()), walls_.end());
    blocked_.assign(static_cast<std::size_t>(width_ * height_), 0);
    for (const Cell& w : walls_) {
        if (!in_bounds(w.x, w.y)) throw ContractError("wall cell outside grid in scene " + id_);
        blocked_[static_cast<std::size_t>(w.y * width_ + w.x)] = 1;
    }
    if (objects_.size() < kMinObjects) throw ContractError("scene " + id_ + " has fewer than 5 objects");
    for (const ObjectInstance& o : objects_) {
        if (!is_free(o.cell.x, o.cell.y)) throw ContractError("object '" + o.object_class + "' on a blocked cell");
        if (o.attributes.empty()) throw ContractError("object '" + o.object_class + "' has no attributes");
        for (const Relation& r : o.relations) {
            if (r.other >= objects_.size()) throw ContractError("relation points past the object list");
        }
    }
    if (!free_cells_connected(width_, height_, walls_)) throw ContractError("scene " + id_ + " is not connected");
}

Pose SceneSpec::pose_at(std::size_t index) const {
    const auto cell = index / 4;
    return {static_cast<int>(cell % static_cast<std::size_t>(width_)),
            static_cast<int>(cell / static_cast<std::size_t>(width_)), static_cast<Heading>(index % 4)};
}

std::vector<Pose> SceneSpec::valid_poses() const {
    std::vector<Pose> out;
    out.reserve(pose_slots());
    for (std::size_t i = 0; i < pose_slots(); ++i) {
        const Pose p = pose_at(i);
        if (is_valid(p)) out.push_back(p);
    }
    return out;
}

std::size_t SceneSpec::free_cell_count() const {
    return static_cast<std::size_t>(std::count(blocked_.begin(), blocked_.end(), 0));
}

const std::vector<std::string>& class_vocabulary(SceneType type) {
    static const auto vocab = [] {
        std::array<std::vector<std::string>, kNumSceneTypes> out;
        for (std::size_t t = 0; t < kNumSceneTypes; ++t) {
            for (const auto& wc : weighted_classes()[t]) out[t].emplace_back(wc.name);
        }
        return out;
    }();
    return vocab[static_cast<std::size_t>(type)];
}

const std::vector<std::string>& attribute_vocabulary() {
    static const std::vector<std::string> attrs = {"white", "wooden", "black", "red",   "blue",
                                                   "small", "large",  "metal", "green", "grey"};
    return attrs;
}

const std::vector<std::string>& relation_vocabulary() {
    static const std::vector<std::string> rels = {"near", "beside", "facing", "behind"};
    return rels;
}

SceneSpec generate_scene(std::uint64_t seed, SceneType scene_type, int width, int height) {
    if (width < SceneSpec::kMinSize || height < SceneSpec::kMinSize) {
        throw ContractError("generate_scene: dimensions " + std::to_string(width) + "x" + std::to_string(height) +
                            " below minimum " + std::to_string(SceneSpec::kMinSize));
    }
    const auto& classes = weighted_classes()[static_cast<std::size_t>(scene_type)];
    std::vector<int> class_weights;
    for (const auto& wc : classes) class_weights.push_back(wc.weight);
    const auto& attrs = attribute_vocabulary();
    const auto& rels = relation_vocabulary();

    const std::uint64_t base = mix(mix(mix(seed) ^ static_cast<std::uint64_t>(scene_type)) ^
                                   (static_cast<std::uint64_t>(width) << 32 | static_cast<std::uint64_t>(height)));
    for (std::uint64_t attempt = 0;; ++attempt) {
        std::mt19937_64 rng(mix(base + attempt));
        std::vector<Cell> walls;
        if (width >= 8 && height >= 8 && rng() % 5 < 3) add_partition(rng, width, height, walls);
        add_furniture(rng, width, height, walls);
        std::sort(walls.begin(), walls.end());
        walls.erase(std::unique(walls.begin(), walls.end()), walls.end());
        if (!free_cells_connected(width, height, walls)) continue;

        std::vector<std::uint8_t> blocked(static_cast<std::size_t>(width * height), 0);
        for (const Cell& w : walls) blocked[static_cast<std::size_t>(w.y * width + w.x)] = 1;
        auto blocked_at = [&](int x, int y) {
            return x < 0 || y < 0 || x >= width || y >= height || blocked[static_cast<std::size_t>(y * width + x)];
        };
        // Objects sit preferably against a wall or the room boundary.
        std::vector<Cell> against_wall;
        std::vector<Cell> open;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                if (blocked_at(x, y)) continue;
                bool touches = false;
                for (int d = 0; d < 4; ++d) touches = touches || blocked_at(x + kDx[d], y + kDy[d]);
                (touches ? against_wall : open).push_back({x, y});
            }
        }
        const int count = uniform_int(rng, 5, 7);
        if (against_wall.size() + open.size() < static_cast<std::size_t>(count) + 8) continue;

        std::discrete_distribution<int> pick_class(class_weights.begin(), class_weights.end());
        std::vector<ObjectInstance> objects;
        for (int i = 0; i < count; ++i) {
            auto& pool = (!against_wall.empty() && (open.empty() || rng() % 5 != 0)) ? against_wall : open;
            const auto at = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(pool.size()) - 1));
            ObjectInstance obj;
            obj.cell = pool[at];
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(at));
            obj.object_class = std::string(classes[static_cast<std::size_t>(pick_class(rng))].name);
            const int n_attr = uniform_int(rng, 1, 2);
            while (static_cast<int>(obj.attributes.size()) < n_attr) {
                const auto& a = attrs[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(attrs.size()) - 1))];
                if (std::find(obj.attributes.begin(), obj.attributes.end(), a) == obj.attributes.end()) {
                    obj.attributes.push_back(a);
                }
            }
            objects.push_back(std::move(obj));
        }
        // Each object is related to its nearest neighbour.
        for (std::size_t i = 0; i < objects.size(); ++i) {
            std::size_t best = i;
            int best_d = 1 << 30;
            for (std::size_t j = 0; j < objects.size(); ++j) {
                if (j == i) continue;
                const int d = std::abs(objects[i].cell.x - objects[j].cell.x) +
                              std::abs(objects[i].cell.y - objects[j].cell.y);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            const auto& rel = rels[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(rels.size()) - 1))];
            objects[i].relations.push_back({rel, best});
        }
        std::string id = std::string(to_string(scene_type)) + "-" + std::to_string(seed) + "-" +
                         std::to_string(width) + "x" + std::to_string(height);
        return SceneSpec(std::move(id), scene_type, width, height, std::move(walls), std::move(objects), seed);
    }
}

Pose apply_action(const SceneSpec& scene, const Pose& pose, Action action) {
    const int h = static_cast<int>(pose.heading);
    switch (action) {
        case Action::MoveForward:
        case Action::MoveBackward: {
            const int sign = action == Action::MoveForward ? 1 : -1;
            const int nx = pose.x + sign * kDx[static_cast<std::size_t>(h)];
            const int ny = pose.y + sign * kDy[static_cast<std::size_t>(h)];
            if (!scene.is_free(nx, ny)) return pose;
            return {nx, ny, pose.heading};
        }
        case Action::RotateLeft:
            return {pose.x, pose.y, static_cast<Heading>((h + 3) % 4)};
        case Action::RotateRight:
            return {pose.x, pose.y, static_cast<Heading>((h + 1) % 4)};
    }
    throw ContractError("invalid action");
}

StepResult step(const SceneSpec& scene, const Pose& pose, const Pose& target, int action, int steps_taken, int cap,
                GoalRule rule) {
    const Action a = action_from_index(action);
    if (!scene.is_valid(pose)) throw ContractError("step: pose outside the free region of " + scene.id());
    if (steps_taken >= cap) throw ContractError("step: episode already reached its cap");
    StepResult out;
    out.next_pose = apply_action(scene, pose, a);
    out.steps_taken = steps_taken + 1;
    out.reward = kStepReward;
    if (rule.reached(out.next_pose, target)) {
        out.reward += kGoalReward;
        out.done = true;
        out.success = true;
    } else if (out.steps_taken == cap) {
        out.done = true;
    }
    return out;
}

std::vector<int> distance_field(const SceneSpec& scene, const Pose& to, GoalRule rule) {
    std::vector<int> dist(scene.pose_slots(), -1);
    std::deque<std::size_t> queue;
    for (int h = 0; h < 4; ++h) {
        const Pose goal{to.x, to.y, static_cast<Heading>(h)};
        if (!scene.is_valid(goal) || !rule.reached(goal, to)) continue;
        dist[scene.pose_index(goal)] = 0;
        queue.push_back(scene.pose_index(goal));
    }
    // The pose graph is symmetric (forward/backward and left/right are
    // mutual inverses), so a BFS from the goal gives distances to it.
    while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        const Pose p = scene.pose_at(cur);
        for (std::size_t a = 0; a < kNumActions; ++a) {
            const Pose n = apply_action(scene, p, static_cast<Action>(a));
            const std::size_t ni = scene.pose_index(n);
            if (dist[ni] >= 0) continue;
            dist[ni] = dist[cur] + 1;
            queue.push_back(ni);
        }
    }
    return dist;
}

int shortest_path_length(const SceneSpec& scene, const Pose& from, const Pose& to, GoalRule rule) {
    if (!scene.is_valid(from) || !scene.is_valid(to)) throw ContractError("shortest_path_length: invalid pose");
    return distance_field(scene, to, rule)[scene.pose_index(from)];
}

Action oracle_action(const SceneSpec& scene, const std::vector<int>& field, const Pose& pose) {
    Action best = Action::MoveForward;
    int best_d = 1 << 30;
    for (std::size_t a = 0; a < kNumActions; ++a) {
        const Pose n = apply_action(scene, pose, static_cast<Action>(a));
        const int d = field[scene.pose_index(n)];
        if (d >= 0 && d < best_d) {
            best_d = d;
            best = static_cast<Action>(a);
        }
    }
    return best;
}

}  // namespace semnav
