#pragma once

#include "ocplan/model.hpp"
#include "ocplan/pddl.hpp"
#include "ocplan/planner.hpp"
#include "ocplan/simworld.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ocplan::domains {

class EncodingError : public Error {
public:
    using Error::Error;
};

enum class DomainStyle { object_centered, hybrid_observer_object };

inline constexpr std::array<DomainStyle, 2> kStyles{DomainStyle::object_centered,
                                                    DomainStyle::hybrid_observer_object};

/// "oc" or "hybrid".
std::string_view style_token(DomainStyle s);
std::optional<DomainStyle> style_from_token(std::string_view tok);

/// Universal pick/place operators. The object-centered domain uses plain
/// side tokens (on, under, left, ...) for object sides; the hybrid domain
/// uses plain tokens for observer relations and oc-prefixed tokens for
/// object sides.
pddl::DomainFile build_domain(DomainStyle style);

// ---------------------------------------------------------------------------
// Observer/object frame transform

/// Observer direction the given own side faces under an in-plane orientation.
Side world_facing(Side own, Orientation o);

struct O2OEntry {
    Side relation;            ///< observer-frame relation
    Orientation orientation;  ///< orientation of the object
    Side object_side;         ///< side of the object in its own frame
    bool operator==(const O2OEntry&) const = default;
};

struct O2OTable {
    std::vector<O2OEntry> entries;
    std::optional<Side> lookup(Side relation, Orientation o) const;
};

/// All (relation, orientation) pairs over the planar relations.
O2OTable build_o2o();

// ---------------------------------------------------------------------------
// Scenario encoding

/// Target tower, listed top to bottom, e.g. {a, b, c, d, tabler}.
struct GoalSpec {
    std::vector<std::string> tower;
    bool require_upright = true;
};

/// Parses "A-B-C-D-tableR".
GoalSpec parse_goal(std::string_view text);
GoalSpec default_goal();

struct ScenarioEncoding {
    DomainStyle style = DomainStyle::object_centered;
    std::vector<std::string> objects;
    SymbolicState init;
    std::vector<Atom> goal;
};

/// Relations are recomputed from the poses; interpenetrating boxes, front or
/// back contacts and unsupported objects raise EncodingError.
ScenarioEncoding encode_scenario(const simworld::Scenario& sc, DomainStyle style,
                                 const GoalSpec& goal);

pddl::ProblemFile to_problem(const ScenarioEncoding& enc, std::string name);

// ---------------------------------------------------------------------------
// Consistency checking

struct Violation {
    std::size_t step = 0;
    char rule = '?';  ///< 'a'..'d'
    std::string message;
};

struct ConsistencyReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks every pick/place of a trace against the geometric and force
/// rules: (a) grasped side free, (b) picked object supports nothing,
/// (c) landing side opposite to the new force-bearing side, (d) landing
/// surface free and able to support.
ConsistencyReport check_consistency(const planner::Trace& trace, DomainStyle style);

}  // namespace ocplan::domains
