#pragma once

#include "ocplan/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ocplan::simworld {

class GeometryError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

inline const std::string kTableL = "tablel";
inline const std::string kTableM = "tablem";
inline const std::string kTableR = "tabler";
inline const std::array<std::string, 3> kTableParts{kTableL, kTableM, kTableR};

bool is_table(std::string_view name);

/// Tolerances in meters. Workspace bounds the object positions.
struct GeometryConfig {
    double contact_tol = 0.005;
    double penetration_tol = 0.001;
    double min_overlap = 0.25;
    Eigen::Vector3d workspace_min{-0.5, -0.25, -0.05};
    Eigen::Vector3d workspace_max{0.5, 0.25, 0.5};

    /// Throws GeometryError unless penetration_tol < contact_tol and
    /// 0 < min_overlap <= 1.
    void validate() const;
};

using ObjectMap = std::map<std::string, PhysicalObjectState>;

struct Scenario {
    int id = 0;
    std::uint64_t seed = 0;
    GeometryConfig cfg;
    ObjectMap objects;
    SymbolicState ground_truth;
};

struct Box {
    Eigen::Vector3d lo;
    Eigen::Vector3d hi;
};

/// World-frame box. Only orientations that map object axes onto world axes
/// are supported; anything else raises GeometryError.
Box world_box(const PhysicalObjectState& s);

/// Own side of the object that faces the given world direction.
Side side_facing(const PhysicalObjectState& s, const Eigen::Vector3d& world_dir);

/// Object-centered contact atoms `oc <side> o1 o2`, `oc <side> o air` for
/// every uncontacted side, and `in hand <obj|air>` when a hand is present.
/// Throws GeometryError when two boxes interpenetrate by more than
/// cfg.penetration_tol.
SymbolicState extract_relations(const ObjectMap& objects, const GeometryConfig& cfg);

enum class Roster {
    blocks,     ///< a, b, c, ... on the three table parts
    household,  ///< cup, bottle, block and a hand
};

struct ScenarioSpec {
    Roster roster = Roster::blocks;

    // blocks roster
    int n_blocks = 4;
    double block_size = 0.05;
    /// When non-empty, stacks (bottom to top) on tablel, tablem, tabler.
    std::vector<std::vector<std::string>> fixed_stacks;
    bool random_orientations = true;
    /// Number of bottom blocks of the goal tower (d, c, b, a for four
    /// blocks) pre-placed upright on tabler.
    int goal_prefix = 0;

    // household roster
    double p_stack = 0.35;
    double p_held = 0.3;
};

/// Deterministic for a fixed (spec, seed, cfg).
Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed,
                           const GeometryConfig& cfg = {}, int id = 0);

/// Block names for a roster of n blocks: a, b, c, ...
std::vector<std::string> block_names(int n);

/// Ground-truth atom a grounding predicate stands for:
/// on/under/left/right/front/back -> `oc <pred> o1 o2`, in -> `in o1 o2`.
Atom predicate_atom(std::string_view predicate, const std::string& o1, const std::string& o2);

/// Ground-truth value of a predicate; stands in for a human instructor.
bool label_oracle(std::string_view predicate, const std::string& o1, const std::string& o2,
                  const Scenario& sc);

}  // namespace ocplan::simworld
