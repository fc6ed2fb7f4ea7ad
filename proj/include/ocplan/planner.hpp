#pragma once

#include "ocplan/model.hpp"
#include "ocplan/pddl.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ocplan::planner {

class InapplicableActionError : public Error {
public:
    using Error::Error;
};

/// Strength of the reachability analysis used to prune ground actions.
enum class Reachability {
    relaxed,   ///< delete-relaxed single-atom fixpoint
    pairwise,  ///< relaxed fixpoint followed by the h^2 pair fixpoint
};

struct GroundingOptions {
    Reachability reachability = Reachability::pairwise;
};

/// Ground action in atom-id form; ids index GroundedTask::atoms.
struct CompiledAction {
    std::vector<std::uint32_t> pre_pos;
    std::vector<std::uint32_t> pre_neg;
    std::vector<std::uint32_t> add;
    std::vector<std::uint32_t> del;
};

struct GroundedTask {
    std::vector<GroundAction> actions;  ///< sorted by (name, args)
    SymbolicState init;
    std::vector<Atom> goal;
    std::vector<Atom> atoms;  ///< sorted atom universe

    std::vector<CompiledAction> compiled;
    std::vector<std::uint32_t> init_ids;
    std::vector<std::uint32_t> goal_ids;
    bool goal_reachable = true;

    std::optional<std::uint32_t> atom_id(const Atom& a) const;
    /// Index into `actions` of the ground action (name, args), if present.
    std::optional<std::size_t> find_action(const std::string& name,
                                           const std::vector<std::string>& args) const;
};

/// Builds a task from explicit ground actions; the atom universe is every
/// atom mentioned by init, goal, or an action.
GroundedTask make_task(std::vector<GroundAction> actions, SymbolicState init,
                       std::vector<Atom> goal);

/// Enumerates schema bindings over the declared objects plus every symbol
/// occurring in :init and keeps those whose positive preconditions are
/// reachable. Bindings whose add and delete lists intersect are dropped.
GroundedTask ground(const pddl::DomainFile& domain, const pddl::ProblemFile& problem,
                    const GroundingOptions& options = {});

/// Symbols ground() binds parameters to.
std::vector<std::string> grounding_universe(const pddl::ProblemFile& problem);

bool applicable(const SymbolicState& s, const GroundAction& a);
/// (s \ del) U add. Throws InapplicableActionError when !applicable(s, a).
SymbolicState apply(const SymbolicState& s, const GroundAction& a);

enum class Algorithm { astar_goalcount, bfs };

struct SearchLimits {
    std::size_t max_expansions = 5'000'000;
    double max_seconds = 120.0;
    /// f = g + weight * h for astar_goalcount.
    double heuristic_weight = 1.0;
};

struct SearchStats {
    std::size_t expanded = 0;
    std::size_t generated = 0;
    double wall_seconds = 0.0;
    std::size_t plan_length = 0;
};

enum class SolveStatus { solved, no_plan, resource_limit };

struct SolveResult {
    SolveStatus status = SolveStatus::no_plan;
    Plan plan;
    SearchStats stats;
};

/// Deterministic forward search. bfs returns a shortest plan; the
/// goal-count A* breaks f ties by insertion order.
SolveResult solve(const GroundedTask& task, Algorithm algo, const SearchLimits& limits = {});

struct ValidationReport {
    bool valid = false;
    std::optional<std::size_t> failed_step;  ///< 0-based
    std::vector<Atom> missing;    ///< positive preconditions absent at failed_step
    std::vector<Atom> violating;  ///< negative preconditions present at failed_step
    std::vector<Atom> unmet_goals;
    std::string message;
};

ValidationReport validate_plan(const GroundedTask& task, const Plan& plan);

/// State before each action of a sequentially applicable plan prefix.
struct TraceStep {
    SymbolicState before;
    GroundAction action;
};
using Trace = std::vector<TraceStep>;

/// Symbolically executes the applicable prefix of the plan.
Trace execute(const SymbolicState& init, const Plan& plan);

/// "1) pick a b ..." per line.
std::string plan_to_text(const Plan& plan);
/// Accepts lines "N) name args..." or "name args..."; blank lines and ';'
/// comments are skipped. Actions are instantiated from the domain schemas.
Plan plan_from_text(const std::string& text, const pddl::DomainFile& domain);

}  // namespace ocplan::planner
