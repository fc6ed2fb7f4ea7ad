#include "ocplan/harness.hpp"

#include "ocplan/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace ocplan::harness {

namespace {

std::string status_token(planner::SolveStatus s) {
    switch (s) {
        case planner::SolveStatus::solved: return "solved";
        case planner::SolveStatus::no_plan: return "no_plan";
        case planner::SolveStatus::resource_limit: return "resource_limit";
    }
    return "error";
}

}  // namespace

BenchmarkRecord run_scenario(const InstanceOptions& opt, domains::DomainStyle style, const simworld::Scenario& sc,
                             Plan* plan_out) {
    BenchmarkRecord rec;
    rec.style = style;
    rec.seed = sc.seed;
    try {
        auto enc = domains::encode_scenario(sc, style, opt.goal);
        auto problem = domains::to_problem(enc, "p" + std::to_string(sc.seed));
        auto domain = domains::build_domain(style);

        auto t0 = std::chrono::steady_clock::now();
        auto task = planner::ground(domain, problem, opt.grounding);
        auto result = planner::solve(task, opt.algo, opt.limits);
        rec.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

        rec.status = status_token(result.status);
        rec.ground_actions = task.actions.size();
        rec.expanded = result.stats.expanded;
        if (result.status == planner::SolveStatus::solved) {
            rec.plan_length = result.plan.size();
            rec.valid = planner::validate_plan(task, result.plan).valid;
            auto report = domains::check_consistency(planner::execute(task.init, result.plan), style);
            rec.violations = report.violations.size();
            rec.consistent = rec.valid && report.ok();
            if (plan_out) *plan_out = std::move(result.plan);
        }
    } catch (const std::exception& e) {
        rec.status = "error";
        rec.error = e.what();
    }
    return rec;
}

BenchmarkRecord run_instance(const InstanceOptions& opt, domains::DomainStyle style, std::uint64_t seed,
                             Plan* plan_out) {
    try {
        auto sc = simworld::generate_scenario(opt.spec, seed, opt.cfg);
        return run_scenario(opt, style, sc, plan_out);
    } catch (const std::exception& e) {
        BenchmarkRecord rec;
        rec.style = style;
        rec.seed = seed;
        rec.status = "error";
        rec.error = e.what();
        return rec;
    }
}

std::vector<BenchmarkRecord> run_bench(const InstanceOptions& opt, std::size_t runs,
                                       const std::vector<domains::DomainStyle>& styles, std::uint64_t seed0) {
    std::vector<BenchmarkRecord> out;
    for (std::size_t i = 0; i < runs; ++i) {
        std::uint64_t seed = seed0 + i;
        std::optional<simworld::Scenario> sc;
        std::string gen_error;
        try {
            sc = simworld::generate_scenario(opt.spec, seed, opt.cfg);
        } catch (const std::exception& e) {
            gen_error = e.what();
        }
        for (auto style : styles) {
            if (sc) {
                out.push_back(run_scenario(opt, style, *sc));
            } else {
                BenchmarkRecord rec;
                rec.style = style;
                rec.seed = seed;
                rec.status = "error";
                rec.error = gen_error;
                out.push_back(rec);
            }
        }
    }
    return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records) {
    io::CsvWriter csv(out, kBenchSchema,
                      {"style", "seed", "status", "plan_length", "ground_actions", "expanded", "time_ms", "valid",
                       "consistent", "violations"});
    for (const auto& r : records)
        csv.row({std::string(domains::style_token(r.style)), std::to_string(r.seed), r.status,
                 std::to_string(r.plan_length), std::to_string(r.ground_actions), std::to_string(r.expanded),
                 io::fmt(r.time_ms), r.valid ? "1" : "0", r.consistent ? "1" : "0", std::to_string(r.violations)});
}

// ---------------------------------------------------------------------------

std::vector<simworld::Scenario> scenario_pool(const GroundingSetup& opt, std::size_t n, std::uint64_t seed) {
    std::vector<simworld::Scenario> pool;
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        pool.push_back(simworld::generate_scenario(opt.spec, seed + i, opt.cfg, static_cast<int>(i)));
    return pool;
}

std::vector<std::size_t> sequence_order(std::size_t n, std::uint64_t seed, std::size_t sequence) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(sequence)};
    std::mt19937_64 rng(sq);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

TrainResult run_ground_train(const GroundingSetup& opt, std::size_t scenarios, std::size_t sequences,
                             std::uint64_t seed) {
    opt.params.validate();
    auto pool = scenario_pool(opt, scenarios, seed);
    auto oracle = grounding::ground_truth_oracle();
    TrainResult out;
    for (std::size_t k = 0; k < sequences; ++k) {
        auto models = grounding::make_models(opt.kind, opt.params, opt.predicates);
        GroundingRunRecord agg;
        agg.sequence = k + 1;
        agg.kind = opt.kind;
        auto idx = sequence_order(scenarios, seed, k);
        for (std::size_t pos = 0; pos < scenarios; ++pos) {
            grounding::StepStats st;
            grounding::abstraction_step(models, pool[idx[pos]], oracle, opt.params.p_thr, st);
            GroundingRunRecord r;
            r.sequence = k + 1;
            r.scenario_index = pos + 1;
            r.kind = opt.kind;
            r.total = st.total;
            r.performance_index = st.performance_index();
            r.instruction_ratio = st.instruction_ratio();
            r.misclassification_ratio = st.misclassification_ratio();
            r.inference_time_us = st.inference_us;
            out.per_scenario.push_back(r);
            agg.total += r.total;
            agg.performance_index += r.performance_index;
            agg.instruction_ratio += r.instruction_ratio;
            agg.misclassification_ratio += r.misclassification_ratio;
            agg.inference_time_us += r.inference_time_us;
        }
        if (scenarios) {
            double n = static_cast<double>(scenarios);
            agg.performance_index /= n;
            agg.instruction_ratio /= n;
            agg.misclassification_ratio /= n;
            agg.inference_time_us /= n;
        }
        out.per_sequence.push_back(agg);
        out.final_models = std::move(models);
    }
    if (sequences == 0) out.final_models = grounding::make_models(opt.kind, opt.params, opt.predicates);
    return out;
}

LearningCurve mean_curve(const std::vector<GroundingRunRecord>& per_scenario, std::size_t scenarios) {
    LearningCurve c;
    c.performance.assign(scenarios, 0.0);
    c.instruction.assign(scenarios, 0.0);
    c.inference_us.assign(scenarios, 0.0);
    std::vector<std::size_t> n(scenarios, 0);
    for (const auto& r : per_scenario) {
        if (r.scenario_index == 0 || r.scenario_index > scenarios) continue;
        std::size_t i = r.scenario_index - 1;
        c.performance[i] += r.performance_index;
        c.instruction[i] += r.instruction_ratio;
        c.inference_us[i] += r.inference_time_us;
        ++n[i];
    }
    for (std::size_t i = 0; i < scenarios; ++i) {
        if (!n[i]) continue;
        c.performance[i] /= static_cast<double>(n[i]);
        c.instruction[i] /= static_cast<double>(n[i]);
        c.inference_us[i] /= static_cast<double>(n[i]);
    }
    return c;
}

void write_train_csv(std::ostream& out, const TrainResult& r) {
    io::CsvWriter csv(out, kTrainSchema,
                      {"row", "sequence", "scenario_index", "model", "evaluated", "performance_index",
                       "instruction_ratio", "misclassification_ratio", "inference_time_us"});
    auto emit = [&](const char* kind, const GroundingRunRecord& x) {
        csv.row({kind, std::to_string(x.sequence), x.scenario_index ? std::to_string(x.scenario_index) : "all",
                 std::string(grounding::model_kind_token(x.kind)), std::to_string(x.total), io::fmt(x.performance_index),
                 io::fmt(x.instruction_ratio), io::fmt(x.misclassification_ratio), io::fmt(x.inference_time_us)});
    };
    for (const auto& x : r.per_scenario) emit("scenario", x);
    for (const auto& x : r.per_sequence) emit("sequence", x);
}

// ---------------------------------------------------------------------------

double Confusion::performance_pos() const {
    std::size_t n = tp + fn + unclassified_pos;
    return n ? static_cast<double>(tp) / static_cast<double>(n) : 0.0;
}

double Confusion::performance_neg() const {
    std::size_t n = tn + fp + unclassified_neg;
    return n ? static_cast<double>(tn) / static_cast<double>(n) : 0.0;
}

double Confusion::performance() const {
    return total() ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0;
}

EvalResult run_ground_eval(const GroundingSetup& opt, std::size_t scenarios, double train_fraction, double p_thr,
                           const std::vector<grounding::ModelKind>& kinds, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw grounding::ConfigError("train fraction must lie in (0, 1)");
    opt.params.validate();
    if (!(p_thr > 0.5 && p_thr <= 1.0)) throw grounding::ConfigError("p_thr must lie in (0.5, 1]");
    auto pool = scenario_pool(opt, scenarios, seed);
    auto order = sequence_order(scenarios, seed, 0);
    auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(scenarios)));
    n_train = std::min(n_train, scenarios);

    EvalResult out;
    out.train_scenarios = n_train;
    out.test_scenarios = scenarios - n_train;
    auto oracle = grounding::ground_truth_oracle();
    for (auto kind : kinds) {
        auto models = grounding::make_models(kind, opt.params, opt.predicates);
        for (std::size_t i = 0; i < n_train; ++i) {
            grounding::StepStats st;
            grounding::abstraction_step(models, pool[order[i]], oracle, opt.params.p_thr, st);
        }
        auto& table = out.confusion[std::string(grounding::model_kind_token(kind))];
        for (const auto& p : opt.predicates) table[p];
        for (std::size_t i = n_train; i < scenarios; ++i) {
            const auto& sc = pool[order[i]];
            for (const auto& q : grounding::evaluated_queries(sc, opt.predicates)) {
                auto d = grounding::classify(models.at(q.predicate).probability(grounding::query_sample(sc, q)), p_thr);
                bool truth = simworld::label_oracle(q.predicate, q.o1, q.o2, sc);
                auto& c = table[q.predicate];
                if (d == grounding::Decision::unclassified) ++(truth ? c.unclassified_pos : c.unclassified_neg);
                else if (d == grounding::Decision::yes) ++(truth ? c.tp : c.fp);
                else ++(truth ? c.fn : c.tn);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) continue;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    if (lx.size() < 2) return std::nullopt;
    double n = static_cast<double>(lx.size());
    double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

}  // namespace ocplan::harness
