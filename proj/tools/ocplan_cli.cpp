// ocplan command-line entry point. Exit codes: 0 success, 1 runtime
// failure, 2 usage error.

#include "ocplan/domains.hpp"
#include "ocplan/grounding.hpp"
#include "ocplan/harness.hpp"
#include "ocplan/io.hpp"
#include "ocplan/pddl.hpp"
#include "ocplan/planner.hpp"
#include "ocplan/simworld.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

using namespace ocplan;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void emit(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") std::cout << content;
    else io::write_file(out, content);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

domains::DomainStyle parse_style(const std::string& tok) {
    auto s = domains::style_from_token(tok);
    if (!s) throw UsageError("unknown style '" + tok + "' (expected oc or hybrid)");
    return *s;
}

// ---------------------------------------------------------------------------
// Instance options shared by gen-problem, plan and bench

struct InstanceFlags {
    std::string goal = "A-B-C-D-tableR";
    std::string fixed_stacks;
    int goal_prefix = 0;
    int n_blocks = 4;
    bool upright_start = false;
    std::string algo = "astar";
    std::string reachability = "pairwise";
    std::size_t max_expansions = 5'000'000;
    double max_seconds = 120.0;
    double weight = 1.0;

    void add_scenario(CLI::App* c) {
        c->add_option("--goal", goal, "Target tower, top to bottom")->capture_default_str();
        c->add_option("--fixed-stacks", fixed_stacks,
                      "Stacks bottom to top on tablel;tablem;tabler, e.g. 'a;;b,c,d'");
        c->add_option("--goal-prefix", goal_prefix, "Bottom goal blocks pre-placed upright on tabler")
            ->check(CLI::NonNegativeNumber);
        c->add_option("--n-blocks", n_blocks, "Number of blocks")->check(CLI::Range(1, 12))->capture_default_str();
        c->add_flag("--upright-start", upright_start, "Start every block upright");
    }
    void add_search(CLI::App* c) {
        c->add_option("--algo", algo, "astar or bfs")->check(CLI::IsMember({"astar", "bfs"}))->capture_default_str();
        c->add_option("--reachability", reachability, "Grounding pruning: relaxed or pairwise")
            ->check(CLI::IsMember({"relaxed", "pairwise"}))
            ->capture_default_str();
        c->add_option("--max-expansions", max_expansions)->check(CLI::PositiveNumber)->capture_default_str();
        c->add_option("--max-seconds", max_seconds)->check(CLI::PositiveNumber)->capture_default_str();
        c->add_option("--weight", weight, "Heuristic weight for astar")->check(CLI::NonNegativeNumber)
            ->capture_default_str();
    }

    harness::InstanceOptions options() const {
        harness::InstanceOptions o;
        o.spec.n_blocks = n_blocks;
        o.spec.goal_prefix = goal_prefix;
        o.spec.random_orientations = !upright_start;
        if (!fixed_stacks.empty()) {
            for (const auto& stack : split(fixed_stacks, ';')) {
                std::vector<std::string> blocks;
                for (const auto& b : split(stack, ','))
                    if (!b.empty()) blocks.push_back(canonical(b));
                o.spec.fixed_stacks.push_back(std::move(blocks));
            }
        }
        try {
            o.goal = domains::parse_goal(goal);
        } catch (const domains::EncodingError& e) {
            throw UsageError(e.what());
        }
        o.algo = algo == "bfs" ? planner::Algorithm::bfs : planner::Algorithm::astar_goalcount;
        o.grounding.reachability =
            reachability == "relaxed" ? planner::Reachability::relaxed : planner::Reachability::pairwise;
        o.limits.max_expansions = max_expansions;
        o.limits.max_seconds = max_seconds;
        o.limits.heuristic_weight = weight;
        return o;
    }
};

// ---------------------------------------------------------------------------
// Grounding parameter flags

struct GroundingFlags {
    std::string model = "gmm";
    std::string predicates = "on,under,in";
    std::size_t scenarios = 150;
    grounding::GroundingParams params = grounding::default_params();

    void add(CLI::App* c, bool with_model) {
        if (with_model)
            c->add_option("--model", model, "gmm or kde")->check(CLI::IsMember({"gmm", "kde"}))->capture_default_str();
        c->add_option("--predicates", predicates, "Comma-separated grounding predicates")->capture_default_str();
        c->add_option("--scenarios", scenarios)->check(CLI::PositiveNumber)->capture_default_str();
        c->add_option("--n-c", params.n_c, "Confidence sample count")->capture_default_str();
        c->add_option("--prior", params.prior, "Prior probability")->capture_default_str();
        c->add_option("--thr-dens", params.thr_dens, "Density threshold for component generation")
            ->capture_default_str();
        c->add_option("--thr-delta", params.thr_delta, "Confidence threshold for instruction")->capture_default_str();
        c->add_option("--p-thr", params.p_thr, "Classification threshold")->capture_default_str();
    }

    harness::GroundingSetup setup() const {
        harness::GroundingSetup s;
        s.kind = *grounding::model_kind_from_token(model);
        s.params = params;
        s.predicates.clear();
        for (const auto& p : split(predicates, ',')) {
            if (p.empty()) continue;
            if (p != "on" && p != "under" && p != "in" && p != "left" && p != "right" && p != "front" &&
                p != "back")
                throw UsageError("unknown grounding predicate '" + p + "'");
            s.predicates.push_back(p);
        }
        if (s.predicates.empty()) throw UsageError("no grounding predicates given");
        try {
            s.params.validate();
        } catch (const grounding::ConfigError& e) {
            throw UsageError(e.what());
        }
        return s;
    }
};

// ---------------------------------------------------------------------------

struct Files {
    std::string domain, problem, plan;
};

std::pair<pddl::DomainFile, pddl::ProblemFile> load_task(const Files& f) {
    auto d = pddl::parse_domain(io::read_file(f.domain));
    auto p = pddl::parse_problem(io::read_file(f.problem), d);
    return {d, p};
}

std::string bench_summary(const std::vector<harness::BenchmarkRecord>& recs,
                          const std::vector<domains::DomainStyle>& styles) {
    std::ostringstream ss;
    for (auto s : styles) {
        std::vector<double> times;
        std::size_t n = 0, solved = 0, consistent = 0, errors = 0;
        for (const auto& r : recs) {
            if (r.style != s) continue;
            ++n;
            if (r.solved()) {
                ++solved;
                times.push_back(r.time_ms);
            }
            if (r.consistent) ++consistent;
            if (r.status == "error") ++errors;
        }
        ss << domains::style_token(s) << ": runs " << n << " solved " << solved << " consistent " << consistent
           << " errors " << errors << " median_ms " << io::fmt(harness::median(times)) << "\n";
    }
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Object-centered manipulation planning and symbol grounding"};
    app.require_subcommand(1);

    std::string style = "oc";
    std::string out;
    std::uint64_t seed = 1;
    Files files;
    InstanceFlags inst;
    GroundingFlags gflags;

    auto* gen_domain = app.add_subcommand("gen-domain", "Write the PDDL domain");
    gen_domain->add_option("--style", style, "oc or hybrid")->required();
    gen_domain->add_option("--out", out, "Output path (stdout when omitted)");

    auto* gen_problem = app.add_subcommand("gen-problem", "Generate a random instance and write its PDDL problem");
    gen_problem->add_option("--style", style, "oc or hybrid")->required();
    gen_problem->add_option("--seed", seed)->capture_default_str();
    gen_problem->add_option("--out", out, "Output path (stdout when omitted)");
    std::string scenario_in;
    gen_problem->add_option("--scenario", scenario_in, "Encode this scenario JSON instead of generating one");
    inst.add_scenario(gen_problem);

    auto* plan = app.add_subcommand("plan", "Solve a problem; generates one from --style/--seed without files");
    plan->add_option("--domain", files.domain, "Domain PDDL");
    plan->add_option("--problem", files.problem, "Problem PDDL");
    plan->add_option("--style", style, "oc or hybrid")->capture_default_str();
    plan->add_option("--seed", seed)->capture_default_str();
    plan->add_option("--out", out, "Plan text output (stdout when omitted)");
    std::string plan_json;
    plan->add_option("--json", plan_json, "Also write the plan as JSON");
    inst.add_scenario(plan);
    inst.add_search(plan);

    auto* validate = app.add_subcommand("validate", "Check a plan for applicability, goals and consistency");
    validate->add_option("--domain", files.domain)->required();
    validate->add_option("--problem", files.problem)->required();
    validate->add_option("--plan", files.plan)->required();
    std::string check_style;
    validate->add_option("--style", check_style, "Consistency rules: oc or hybrid (default: from the domain name)");
    validate->add_option("--out", out, "Report JSON (stdout when omitted)");

    auto* bench = app.add_subcommand("bench", "Run the seeded planning benchmark");
    std::size_t runs = 500;
    std::string styles = "oc,hybrid";
    bench->add_option("--runs", runs)->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("--styles", styles, "Comma-separated styles")->capture_default_str();
    bench->add_option("--seed", seed, "First seed")->capture_default_str();
    bench->add_option("--out", out, "CSV output (stdout when omitted)");
    inst.add_scenario(bench);
    inst.add_search(bench);

    auto* ground = app.add_subcommand("ground", "Symbol grounding experiments");
    ground->require_subcommand(1);
    auto* train = ground->add_subcommand("train", "Online abstraction over shuffled scenario sequences");
    std::size_t sequences = 10;
    std::string model_out;
    train->add_option("--sequences", sequences)->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--seed", seed)->capture_default_str();
    train->add_option("--out", out, "CSV output (stdout when omitted)");
    train->add_option("--model-out", model_out, "Write the final model JSON");
    gflags.add(train, true);

    auto* eval = ground->add_subcommand("eval", "Train/test split confusion matrices");
    double train_fraction = 0.9;
    std::string models = "gmm,kde";
    eval->add_option("--train-fraction", train_fraction)->capture_default_str();
    eval->add_option("--models", models, "Comma-separated model kinds")->capture_default_str();
    eval->add_option("--seed", seed)->capture_default_str();
    eval->add_option("--out", out, "JSON output (stdout when omitted)");
    gflags.add(eval, false);

    auto* scenario = app.add_subcommand("scenario", "Scenario tools");
    scenario->require_subcommand(1);
    auto* scen_gen = scenario->add_subcommand("gen", "Generate one scenario as JSON");
    std::string roster = "blocks";
    scen_gen->add_option("--roster", roster, "blocks or household")
        ->check(CLI::IsMember({"blocks", "household"}))
        ->capture_default_str();
    scen_gen->add_option("--seed", seed)->capture_default_str();
    scen_gen->add_option("--out", out, "JSON output (stdout when omitted)");
    inst.add_scenario(scen_gen);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen_domain) {
            emit(out, pddl::print_domain(domains::build_domain(parse_style(style))));
        } else if (*gen_problem) {
            auto s = parse_style(style);
            auto opt = inst.options();
            auto sc = scenario_in.empty() ? simworld::generate_scenario(opt.spec, seed, opt.cfg)
                                          : io::scenario_from_json(io::json::parse(io::read_file(scenario_in)));
            auto enc = domains::encode_scenario(sc, s, opt.goal);
            emit(out, pddl::print_problem(domains::to_problem(enc, "p" + std::to_string(sc.seed))));
        } else if (*plan) {
            auto opt = inst.options();
            pddl::DomainFile d;
            pddl::ProblemFile p;
            if (files.domain.empty() != files.problem.empty())
                throw UsageError("--domain and --problem go together");
            if (!files.domain.empty()) {
                std::tie(d, p) = load_task(files);
            } else {
                auto s = parse_style(style);
                auto sc = simworld::generate_scenario(opt.spec, seed, opt.cfg);
                d = domains::build_domain(s);
                p = domains::to_problem(domains::encode_scenario(sc, s, opt.goal), "p" + std::to_string(seed));
            }
            auto task = planner::ground(d, p, opt.grounding);
            auto r = planner::solve(task, opt.algo, opt.limits);
            std::cerr << "actions " << task.actions.size() << " expanded " << r.stats.expanded << " seconds "
                      << io::fmt(r.stats.wall_seconds) << "\n";
            if (r.status != planner::SolveStatus::solved) {
                std::cerr << (r.status == planner::SolveStatus::no_plan ? "no plan exists\n"
                                                                        : "search limit reached\n");
                return 1;
            }
            emit(out, planner::plan_to_text(r.plan));
            if (!plan_json.empty()) io::write_file(plan_json, io::plan_to_json(r.plan).dump(2) + "\n");
        } else if (*validate) {
            auto [d, p] = load_task(files);
            auto s = domains::style_from_token(check_style.empty() ? d.name : check_style);
            if (!s) throw UsageError("unknown style '" + (check_style.empty() ? d.name : check_style) + "'");
            auto pl = planner::plan_from_text(io::read_file(files.plan), d);
            auto task = planner::make_task(pl.actions, p.init, p.goal);
            auto v = planner::validate_plan(task, pl);
            domains::ConsistencyReport c = domains::check_consistency(planner::execute(task.init, pl), *s);
            emit(out, io::validation_to_json(v, c).dump(2) + "\n");
            return v.valid && c.ok() ? 0 : 1;
        } else if (*bench) {
            std::vector<domains::DomainStyle> ss;
            for (const auto& t : split(styles, ','))
                if (!t.empty()) ss.push_back(parse_style(t));
            if (ss.empty()) throw UsageError("no styles given");
            auto recs = harness::run_bench(inst.options(), runs, ss, seed);
            std::ostringstream csv;
            harness::write_bench_csv(csv, recs);
            emit(out, csv.str());
            std::cerr << bench_summary(recs, ss);
        } else if (*train) {
            auto setup = gflags.setup();
            auto r = harness::run_ground_train(setup, gflags.scenarios, sequences, seed);
            std::ostringstream csv;
            harness::write_train_csv(csv, r);
            emit(out, csv.str());
            if (!model_out.empty()) io::write_file(model_out, io::model_to_json(r.final_models).dump() + "\n");
        } else if (*eval) {
            auto setup = gflags.setup();
            std::vector<grounding::ModelKind> kinds;
            for (const auto& t : split(models, ',')) {
                if (t.empty()) continue;
                auto k = grounding::model_kind_from_token(t);
                if (!k) throw UsageError("unknown model kind '" + t + "'");
                kinds.push_back(*k);
            }
            if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw UsageError("--train-fraction must lie in (0, 1)");
            auto r = harness::run_ground_eval(setup, gflags.scenarios, train_fraction, setup.params.p_thr, kinds, seed);
            io::json j = {{"schema", harness::kEvalSchema},
                          {"seed", seed},
                          {"train_scenarios", r.train_scenarios},
                          {"test_scenarios", r.test_scenarios},
                          {"p_thr", setup.params.p_thr}};
            for (const auto& [kind, table] : r.confusion)
                for (const auto& [pred, c] : table)
                    j["models"][kind][pred] = {{"tp", c.tp},
                                               {"fp", c.fp},
                                               {"tn", c.tn},
                                               {"fn", c.fn},
                                               {"unclassified_pos", c.unclassified_pos},
                                               {"unclassified_neg", c.unclassified_neg},
                                               {"performance_pos", c.performance_pos()},
                                               {"performance_neg", c.performance_neg()},
                                               {"performance", c.performance()}};
            emit(out, j.dump(2) + "\n");
        } else if (*scen_gen) {
            auto opt = inst.options();
            if (roster == "household") opt.spec.roster = simworld::Roster::household;
            emit(out, io::scenario_to_json(simworld::generate_scenario(opt.spec, seed, opt.cfg)).dump(2) + "\n");
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
