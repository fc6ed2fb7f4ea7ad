#pragma once

#include "ocplan/domains.hpp"
#include "ocplan/grounding.hpp"
#include "ocplan/planner.hpp"
#include "ocplan/simworld.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ocplan::harness {

// ---------------------------------------------------------------------------
// Planning benchmark

struct InstanceOptions {
    simworld::ScenarioSpec spec;
    simworld::GeometryConfig cfg;
    domains::GoalSpec goal = domains::default_goal();
    planner::GroundingOptions grounding;
    planner::Algorithm algo = planner::Algorithm::astar_goalcount;
    planner::SearchLimits limits;
};

struct BenchmarkRecord {
    domains::DomainStyle style = domains::DomainStyle::object_centered;
    std::uint64_t seed = 0;
    std::string status;  ///< solved, no_plan, resource_limit, error
    std::size_t plan_length = 0;
    std::size_t ground_actions = 0;
    std::size_t expanded = 0;
    double time_ms = 0.0;  ///< grounding plus search
    bool valid = false;
    bool consistent = false;
    std::size_t violations = 0;
    std::string error;

    bool solved() const { return status == "solved"; }
};

/// Generates the scenario for `seed`, encodes it in `style`, grounds,
/// solves, validates and checks consistency. Failures land in the
/// record instead of propagating.
BenchmarkRecord run_instance(const InstanceOptions& opt, domains::DomainStyle style, std::uint64_t seed,
                             Plan* plan_out = nullptr);

/// Same, for a scenario that already exists.
BenchmarkRecord run_scenario(const InstanceOptions& opt, domains::DomainStyle style,
                             const simworld::Scenario& sc, Plan* plan_out = nullptr);

/// Seeds seed0 .. seed0 + runs - 1, every style per seed.
std::vector<BenchmarkRecord> run_bench(const InstanceOptions& opt, std::size_t runs,
                                       const std::vector<domains::DomainStyle>& styles, std::uint64_t seed0);

void write_bench_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records);

inline constexpr const char* kBenchSchema = "ocplan.bench/1";

// ---------------------------------------------------------------------------
// Grounding experiments

struct GroundingSetup {
    grounding::ModelKind kind = grounding::ModelKind::gmm;
    grounding::GroundingParams params = grounding::default_params();
    std::vector<std::string> predicates = grounding::kGroundingPredicates;
    simworld::ScenarioSpec spec = [] {
        simworld::ScenarioSpec s;
        s.roster = simworld::Roster::household;
        return s;
    }();
    simworld::GeometryConfig cfg;
};

struct GroundingRunRecord {
    std::size_t sequence = 0;
    std::size_t scenario_index = 0;  ///< 1-based position in the sequence
    grounding::ModelKind kind = grounding::ModelKind::gmm;
    std::size_t total = 0;
    double performance_index = 0.0;
    double instruction_ratio = 0.0;
    double misclassification_ratio = 0.0;
    double inference_time_us = 0.0;
};

struct TrainResult {
    std::vector<GroundingRunRecord> per_scenario;
    std::vector<GroundingRunRecord> per_sequence;  ///< means over each sequence
    grounding::ModelSet final_models;              ///< state after the last sequence
};

/// Scenario i of the pool uses seed + i. Sequence k visits the pool in a
/// permutation seeded by seed and k; every sequence starts from fresh models.
std::vector<simworld::Scenario> scenario_pool(const GroundingSetup& opt, std::size_t n, std::uint64_t seed);
std::vector<std::size_t> sequence_order(std::size_t n, std::uint64_t seed, std::size_t sequence);

TrainResult run_ground_train(const GroundingSetup& opt, std::size_t scenarios, std::size_t sequences,
                             std::uint64_t seed);

/// Per-scenario means over sequences, indexed by scenario position.
struct LearningCurve {
    std::vector<double> performance;
    std::vector<double> instruction;
    std::vector<double> inference_us;
};
LearningCurve mean_curve(const std::vector<GroundingRunRecord>& per_scenario, std::size_t scenarios);

void write_train_csv(std::ostream& out, const TrainResult& r);

inline constexpr const char* kTrainSchema = "ocplan.ground-train/1";
inline constexpr const char* kEvalSchema = "ocplan.ground-eval/1";

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t unclassified_pos = 0;  ///< truth true, no decision
    std::size_t unclassified_neg = 0;  ///< truth false, no decision

    std::size_t unclassified() const { return unclassified_pos + unclassified_neg; }
    std::size_t total() const { return tp + fp + tn + fn + unclassified(); }
    /// Correct inferences over inferences whose truth is true.
    double performance_pos() const;
    /// Correct inferences over inferences whose truth is false.
    double performance_neg() const;
    double performance() const;
};

struct EvalResult {
    std::size_t train_scenarios = 0;
    std::size_t test_scenarios = 0;
    /// kind token -> predicate -> confusion
    std::map<std::string, std::map<std::string, Confusion>> confusion;
};

/// Shuffles the pool with the seed, trains each kind online on the first
/// train_fraction share and classifies every query of the rest.
EvalResult run_ground_eval(const GroundingSetup& opt, std::size_t scenarios, double train_fraction,
                           double p_thr, const std::vector<grounding::ModelKind>& kinds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Statistics

double median(std::vector<double> v);
/// Least-squares slope of log(y) on log(x) over pairs with x, y > 0.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ocplan::harness
