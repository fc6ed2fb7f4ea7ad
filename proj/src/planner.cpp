#include "ocplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace ocplan::planner {

std::optional<std::uint32_t> GroundedTask::atom_id(const Atom& a) const {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), a);
    if (it == atoms.end() || *it != a) return std::nullopt;
    return static_cast<std::uint32_t>(it - atoms.begin());
}

std::optional<std::size_t> GroundedTask::find_action(const std::string& name,
                                                     const std::vector<std::string>& args) const {
    auto it = std::lower_bound(actions.begin(), actions.end(), std::tie(name, args),
                               [](const GroundAction& a, const auto& key) {
                                   return std::tie(a.name, a.args) < key;
                               });
    if (it == actions.end() || it->name != name || it->args != args) return std::nullopt;
    return static_cast<std::size_t>(it - actions.begin());
}

namespace {

bool action_less(const GroundAction& a, const GroundAction& b) {
    return std::tie(a.name, a.args) < std::tie(b.name, b.args);
}

bool self_contradicting(const GroundAction& g) {
    for (const auto& a : g.add)
        if (std::find(g.del.begin(), g.del.end(), a) != g.del.end()) return true;
    for (const auto& a : g.pre_pos)
        if (std::find(g.pre_neg.begin(), g.pre_neg.end(), a) != g.pre_neg.end()) return true;
    return false;
}

/// Sorts actions, collects the universe, and fills the id-based fields.
GroundedTask compile(std::vector<GroundAction> actions, SymbolicState init, std::vector<Atom> goal,
                     std::set<Atom> universe) {
    GroundedTask t;
    std::sort(actions.begin(), actions.end(), action_less);
    actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
    for (const auto& a : init) universe.insert(a);
    for (const auto& g : actions) {
        universe.insert(g.pre_pos.begin(), g.pre_pos.end());
        universe.insert(g.add.begin(), g.add.end());
    }
    t.atoms.assign(universe.begin(), universe.end());
    t.actions = std::move(actions);
    t.init = std::move(init);
    t.goal = std::move(goal);

    auto ids = [&](const std::vector<Atom>& in, bool drop_unknown) {
        std::vector<std::uint32_t> out;
        for (const auto& a : in) {
            auto id = t.atom_id(a);
            if (id) out.push_back(*id);
            else if (!drop_unknown) throw Error("internal: atom outside universe " + a.to_string());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };
    t.compiled.reserve(t.actions.size());
    for (const auto& g : t.actions)
        t.compiled.push_back(CompiledAction{ids(g.pre_pos, false), ids(g.pre_neg, true),
                                            ids(g.add, false), ids(g.del, true)});
    for (const auto& a : t.init) t.init_ids.push_back(*t.atom_id(a));
    std::sort(t.init_ids.begin(), t.init_ids.end());
    for (const auto& a : t.goal) {
        if (auto id = t.atom_id(a)) t.goal_ids.push_back(*id);
        else t.goal_reachable = false;
    }
    std::sort(t.goal_ids.begin(), t.goal_ids.end());
    t.goal_ids.erase(std::unique(t.goal_ids.begin(), t.goal_ids.end()), t.goal_ids.end());
    return t;
}

// ---------------------------------------------------------------------------
// Relaxed grounding

/// Symbols interned to dense ids for the join.
class SymbolTable {
public:
    int id(const std::string& s) {
        auto [it, fresh] = ids_.emplace(s, static_cast<int>(names_.size()));
        if (fresh) names_.push_back(s);
        return it->second;
    }
    std::optional<int> find(const std::string& s) const {
        auto it = ids_.find(s);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }
    const std::string& name(int id) const { return names_[static_cast<std::size_t>(id)]; }

private:
    std::unordered_map<std::string, int> ids_;
    std::vector<std::string> names_;
};

using Key = std::vector<int>;  // predicate id followed by argument ids

struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (int v : k) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

/// Reached atoms with per-(predicate, position, value) indexes.
class AtomStore {
public:
    bool insert(const Key& k) {
        if (!set_.insert(k).second) return false;
        auto& bucket = by_pred_[k[0]];
        auto idx = static_cast<int>(bucket.atoms.size());
        bucket.atoms.push_back(k);
        if (bucket.by_pos.size() < k.size() - 1) bucket.by_pos.resize(k.size() - 1);
        for (std::size_t p = 1; p < k.size(); ++p) bucket.by_pos[p - 1][k[p]].push_back(idx);
        return true;
    }

    struct Bucket {
        std::vector<Key> atoms;
        std::vector<std::unordered_map<int, std::vector<int>>> by_pos;
    };

    const Bucket* bucket(int pred) const {
        auto it = by_pred_.find(pred);
        return it == by_pred_.end() ? nullptr : &it->second;
    }

private:
    std::unordered_set<Key, KeyHash> set_;
    std::unordered_map<int, Bucket> by_pred_;
};

/// Schema atom with each term either a parameter index (>= 0) or a
/// constant encoded as -(symbol id) - 1.
struct Pattern {
    int pred;
    std::vector<int> terms;
};

struct CompiledSchema {
    std::vector<Pattern> pre;
    std::vector<Pattern> add;
    std::size_t n_params = 0;
};

CompiledSchema compile_schema(const OperatorSchema& op, SymbolTable& sym) {
    std::map<std::string, int> param;
    for (std::size_t i = 0; i < op.params.size(); ++i) param[op.params[i]] = static_cast<int>(i);
    auto conv = [&](const Atom& a) {
        Pattern p{sym.id(a.predicate), {}};
        for (const auto& t : a.args) p.terms.push_back(is_variable(t) ? param.at(t) : -sym.id(t) - 1);
        return p;
    };
    CompiledSchema cs;
    cs.n_params = op.params.size();
    for (const auto& a : op.pre_pos) cs.pre.push_back(conv(a));
    for (const auto& a : op.add) cs.add.push_back(conv(a));
    return cs;
}

/// Enumerates bindings of one schema whose positive preconditions are all
/// in the store; parameters absent from every positive precondition range
/// over the universe.
class BindingEnumerator {
public:
    BindingEnumerator(const CompiledSchema& op, const std::vector<int>& universe)
        : op_(op), universe_(universe) {}

    template <class Visit>
    void run(const AtomStore& store, Visit&& visit) {
        binding_.assign(op_.n_params, -1);
        order_ = order_patterns();
        visit_ = [&](const std::vector<int>& b) { visit(b); };
        match(store, 0);
    }

private:
    std::vector<std::size_t> order_patterns() const {
        std::vector<std::size_t> order;
        std::vector<bool> used(op_.pre.size(), false);
        std::vector<bool> bound(op_.n_params, false);
        for (std::size_t step = 0; step < op_.pre.size(); ++step) {
            std::size_t best = 0;
            long best_score = -1;
            for (std::size_t i = 0; i < op_.pre.size(); ++i) {
                if (used[i]) continue;
                long nbound = 0, nvars = 0;
                for (int t : op_.pre[i].terms) {
                    if (t < 0 || bound[static_cast<std::size_t>(t)]) ++nbound;
                    else ++nvars;
                }
                // Prefer fully bound tests, then patterns with more fixed terms.
                long score = (nvars == 0 ? 1000 : 0) + nbound * 10 - nvars;
                if (score > best_score) {
                    best_score = score;
                    best = i;
                }
            }
            used[best] = true;
            order.push_back(best);
            for (int t : op_.pre[best].terms)
                if (t >= 0) bound[static_cast<std::size_t>(t)] = true;
        }
        return order;
    }

    int value(int term) const { return term < 0 ? -term - 1 : binding_[static_cast<std::size_t>(term)]; }

    void match(const AtomStore& store, std::size_t depth) {
        if (depth == order_.size()) {
            fill_free(0);
            return;
        }
        const Pattern& pat = op_.pre[order_[depth]];
        const auto* bucket = store.bucket(pat.pred);
        if (!bucket) return;

        // Smallest candidate list among the bound positions.
        const std::vector<int>* cands = nullptr;
        for (std::size_t k = 0; k < pat.terms.size(); ++k) {
            int v = value(pat.terms[k]);
            if (v < 0) continue;
            if (k >= bucket->by_pos.size()) return;
            auto it = bucket->by_pos[k].find(v);
            if (it == bucket->by_pos[k].end()) return;
            if (!cands || it->second.size() < cands->size()) cands = &it->second;
        }
        auto try_atom = [&](const Key& cand) {
            if (cand.size() != pat.terms.size() + 1) return;
            std::size_t newly[16];
            std::size_t n_new = 0;
            bool ok = true;
            for (std::size_t k = 0; k < pat.terms.size() && ok; ++k) {
                int t = pat.terms[k];
                int c = cand[k + 1];
                if (t < 0) {
                    ok = -t - 1 == c;
                } else if (binding_[static_cast<std::size_t>(t)] < 0) {
                    binding_[static_cast<std::size_t>(t)] = c;
                    newly[n_new++] = static_cast<std::size_t>(t);
                } else {
                    ok = binding_[static_cast<std::size_t>(t)] == c;
                }
            }
            if (ok) match(store, depth + 1);
            for (std::size_t i = 0; i < n_new; ++i) binding_[newly[i]] = -1;
        };
        if (cands) {
            for (int idx : *cands) try_atom(bucket->atoms[static_cast<std::size_t>(idx)]);
        } else {
            for (const auto& cand : bucket->atoms) try_atom(cand);
        }
    }

    void fill_free(std::size_t from) {
        for (std::size_t i = from; i < binding_.size(); ++i) {
            if (binding_[i] >= 0) continue;
            for (int u : universe_) {
                binding_[i] = u;
                fill_free(i + 1);
            }
            binding_[i] = -1;
            return;
        }
        visit_(binding_);
    }

    const CompiledSchema& op_;
    const std::vector<int>& universe_;
    std::vector<int> binding_;
    std::vector<std::size_t> order_;
    std::function<void(const std::vector<int>&)> visit_;
};

// ---------------------------------------------------------------------------
// Pairwise (h^2) reachability over compiled actions

class PairTable {
public:
    explicit PairTable(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

    bool test(std::size_t p, std::size_t q) const { return row(p)[q / 64] >> (q % 64) & 1U; }
    bool set(std::size_t p, std::size_t q) {
        bool changed = false;
        changed |= set_bit(p, q);
        changed |= set_bit(q, p);
        return changed;
    }
    std::uint64_t* row(std::size_t p) { return bits_.data() + p * words_; }
    const std::uint64_t* row(std::size_t p) const { return bits_.data() + p * words_; }
    std::size_t words() const { return words_; }
    std::size_t size() const { return n_; }

private:
    bool set_bit(std::size_t p, std::size_t q) {
        auto& w = row(p)[q / 64];
        auto mask = std::uint64_t{1} << (q % 64);
        if (w & mask) return false;
        w |= mask;
        return true;
    }

    std::size_t n_;
    std::size_t words_;
    std::vector<std::uint64_t> bits_;
};

std::vector<bool> pairwise_reachable_actions(const GroundedTask& t) {
    const std::size_t n = t.atoms.size();
    PairTable pairs(n);
    for (auto p : t.init_ids)
        for (auto q : t.init_ids) pairs.set(p, q);

    std::vector<bool> reachable(t.compiled.size(), false);
    std::vector<std::uint64_t> common(pairs.words());
    std::vector<std::uint64_t> delmask(pairs.words());
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t ai = 0; ai < t.compiled.size(); ++ai) {
            const auto& a = t.compiled[ai];
            // Atoms pair-reachable with every precondition.
            if (a.pre_pos.empty()) {
                for (std::size_t q = 0; q < n; ++q) {
                    auto w = q / 64, b = q % 64;
                    if (q % 64 == 0) common[w] = 0;
                    if (pairs.test(q, q)) common[w] |= std::uint64_t{1} << b;
                }
            } else {
                std::copy_n(pairs.row(a.pre_pos[0]), pairs.words(), common.begin());
                for (std::size_t k = 1; k < a.pre_pos.size(); ++k) {
                    const auto* r = pairs.row(a.pre_pos[k]);
                    for (std::size_t w = 0; w < pairs.words(); ++w) common[w] &= r[w];
                }
            }
            bool ok = true;
            for (auto p : a.pre_pos)
                if (!(common[p / 64] >> (p % 64) & 1U)) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            reachable[ai] = true;
            for (auto p : a.add)
                for (auto q : a.add) changed |= pairs.set(p, q);
            std::fill(delmask.begin(), delmask.end(), 0);
            for (auto d : a.del) delmask[d / 64] |= std::uint64_t{1} << (d % 64);
            for (auto p : a.add) {
                auto* r = pairs.row(p);
                for (std::size_t w = 0; w < pairs.words(); ++w) {
                    std::uint64_t fresh = common[w] & ~delmask[w] & ~r[w];
                    while (fresh) {
                        int b = __builtin_ctzll(fresh);
                        fresh &= fresh - 1;
                        pairs.set(p, w * 64 + static_cast<std::size_t>(b));
                        changed = true;
                    }
                }
            }
        }
    }
    return reachable;
}

}  // namespace

std::vector<std::string> grounding_universe(const pddl::ProblemFile& problem) {
    std::set<std::string> u(problem.objects.begin(), problem.objects.end());
    for (const auto& a : problem.init)
        for (const auto& s : a.args) u.insert(s);
    return {u.begin(), u.end()};
}

GroundedTask make_task(std::vector<GroundAction> actions, SymbolicState init,
                       std::vector<Atom> goal) {
    std::set<Atom> universe(goal.begin(), goal.end());
    for (const auto& g : actions) {
        universe.insert(g.pre_neg.begin(), g.pre_neg.end());
        universe.insert(g.del.begin(), g.del.end());
    }
    return compile(std::move(actions), std::move(init), std::move(goal), std::move(universe));
}

GroundedTask ground(const pddl::DomainFile& domain, const pddl::ProblemFile& problem,
                    const GroundingOptions& options) {
    SymbolTable sym;
    std::vector<int> universe;
    for (const auto& u : grounding_universe(problem)) universe.push_back(sym.id(u));
    std::vector<CompiledSchema> schemas;
    for (const auto& op : domain.operators) {
        if (op.params.size() > 16) throw Error("operator '" + op.name + "' has too many parameters");
        schemas.push_back(compile_schema(op, sym));
    }

    AtomStore store;
    auto key_of = [&](const Atom& a) {
        Key k{sym.id(a.predicate)};
        for (const auto& s : a.args) k.push_back(sym.id(s));
        return k;
    };
    for (const auto& a : problem.init) store.insert(key_of(a));

    std::vector<std::set<std::vector<int>>> bindings(schemas.size());
    bool grew = true;
    while (grew) {
        grew = false;
        for (std::size_t oi = 0; oi < schemas.size(); ++oi) {
            std::vector<std::vector<int>> found;
            BindingEnumerator(schemas[oi], universe).run(store, [&](const std::vector<int>& b) {
                if (!bindings[oi].count(b)) found.push_back(b);
            });
            for (auto& b : found) {
                for (const auto& pat : schemas[oi].add) {
                    Key k{pat.pred};
                    for (int t : pat.terms) k.push_back(t < 0 ? -t - 1 : b[static_cast<std::size_t>(t)]);
                    grew |= store.insert(k);
                }
                bindings[oi].insert(std::move(b));
            }
        }
    }

    std::vector<GroundAction> actions;
    for (std::size_t oi = 0; oi < domain.operators.size(); ++oi)
        for (const auto& b : bindings[oi]) {
            std::vector<std::string> args;
            args.reserve(b.size());
            for (int v : b) args.push_back(sym.name(v));
            GroundAction g = instantiate(domain.operators[oi], args);
            if (!self_contradicting(g)) actions.push_back(std::move(g));
        }

    GroundedTask task = compile(std::move(actions), problem.init, problem.goal, {});
    if (options.reachability == Reachability::relaxed) return task;

    auto keep = pairwise_reachable_actions(task);
    std::vector<GroundAction> kept;
    for (std::size_t i = 0; i < task.actions.size(); ++i)
        if (keep[i]) kept.push_back(std::move(task.actions[i]));
    return compile(std::move(kept), problem.init, problem.goal, {});
}

bool applicable(const SymbolicState& s, const GroundAction& a) {
    for (const auto& p : a.pre_pos)
        if (!s.contains(p)) return false;
    for (const auto& p : a.pre_neg)
        if (s.contains(p)) return false;
    return true;
}

SymbolicState apply(const SymbolicState& s, const GroundAction& a) {
    if (!applicable(s, a)) throw InapplicableActionError("action not applicable: " + a.to_string());
    SymbolicState out = s;
    for (const auto& d : a.del) out.erase(d);
    for (const auto& p : a.add) out.insert(p);
    return out;
}

// ---------------------------------------------------------------------------
// Search

namespace {

using StateVec = std::vector<std::uint32_t>;

struct StateHash {
    std::size_t operator()(const StateVec& s) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (auto v : s) {
            h ^= v;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

class SuccessorGenerator {
public:
    explicit SuccessorGenerator(const GroundedTask& t)
        : task_(t), words_((t.atoms.size() + 63) / 64), anchored_(t.atoms.size()) {
        std::vector<std::size_t> freq(t.atoms.size(), 0);
        for (const auto& a : t.compiled)
            for (auto p : a.pre_pos) ++freq[p];
        for (std::size_t i = 0; i < t.compiled.size(); ++i) {
            const auto& pre = t.compiled[i].pre_pos;
            if (pre.empty()) {
                unanchored_.push_back(static_cast<std::uint32_t>(i));
                continue;
            }
            auto anchor = *std::min_element(pre.begin(), pre.end(), [&](auto x, auto y) {
                return freq[x] < freq[y] || (freq[x] == freq[y] && x < y);
            });
            anchored_[anchor].push_back(static_cast<std::uint32_t>(i));
        }
        bits_.assign(words_, 0);
    }

    /// Applicable action indices for a state, ascending.
    const std::vector<std::uint32_t>& applicable(const StateVec& s) {
        std::fill(bits_.begin(), bits_.end(), 0);
        for (auto p : s) bits_[p / 64] |= std::uint64_t{1} << (p % 64);
        out_.clear();
        auto check = [&](std::uint32_t ai) {
            const auto& a = task_.compiled[ai];
            for (auto p : a.pre_pos)
                if (!has(p)) return;
            for (auto p : a.pre_neg)
                if (has(p)) return;
            out_.push_back(ai);
        };
        for (auto ai : unanchored_) check(ai);
        for (auto p : s)
            for (auto ai : anchored_[p]) check(ai);
        std::sort(out_.begin(), out_.end());
        return out_;
    }

    StateVec successor(std::uint32_t ai) const {
        std::vector<std::uint64_t> next = bits_;
        const auto& a = task_.compiled[ai];
        for (auto d : a.del) next[d / 64] &= ~(std::uint64_t{1} << (d % 64));
        for (auto p : a.add) next[p / 64] |= std::uint64_t{1} << (p % 64);
        StateVec out;
        for (std::size_t w = 0; w < words_; ++w) {
            auto word = next[w];
            while (word) {
                int b = __builtin_ctzll(word);
                word &= word - 1;
                out.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(b)));
            }
        }
        return out;
    }

private:
    bool has(std::uint32_t p) const { return bits_[p / 64] >> (p % 64) & 1U; }

    const GroundedTask& task_;
    std::size_t words_;
    std::vector<std::vector<std::uint32_t>> anchored_;
    std::vector<std::uint32_t> unanchored_;
    std::vector<std::uint64_t> bits_;
    std::vector<std::uint32_t> out_;
};

std::size_t unmet_goals(const StateVec& s, const std::vector<std::uint32_t>& goal) {
    std::size_t unmet = 0;
    auto it = s.begin();
    for (auto g : goal) {
        it = std::lower_bound(it, s.end(), g);
        if (it == s.end() || *it != g) ++unmet;
    }
    return unmet;
}

struct Node {
    const StateVec* state;
    std::int64_t parent;
    std::uint32_t action;
    std::uint32_t g;
};

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

Plan extract(const GroundedTask& t, const std::vector<Node>& nodes, std::int64_t idx) {
    Plan plan;
    while (nodes[static_cast<std::size_t>(idx)].parent >= 0) {
        plan.actions.push_back(t.actions[nodes[static_cast<std::size_t>(idx)].action]);
        idx = nodes[static_cast<std::size_t>(idx)].parent;
    }
    std::reverse(plan.actions.begin(), plan.actions.end());
    return plan;
}

}  // namespace

SolveResult solve(const GroundedTask& task, Algorithm algo, const SearchLimits& limits) {
    Timer timer;
    SolveResult res;
    auto finish = [&](SolveStatus st) {
        res.status = st;
        res.stats.wall_seconds = timer.seconds();
        res.stats.plan_length = res.plan.size();
        return res;
    };
    if (!task.goal_reachable) return finish(SolveStatus::no_plan);

    SuccessorGenerator succ(task);
    std::unordered_map<StateVec, std::size_t, StateHash> index;
    std::vector<Node> nodes;

    auto [root_it, _] = index.emplace(task.init_ids, 0);
    nodes.push_back(Node{&root_it->first, -1, 0, 0});
    res.stats.generated = 1;
    if (unmet_goals(task.init_ids, task.goal_ids) == 0) return finish(SolveStatus::solved);

    auto out_of_budget = [&]() {
        if (res.stats.expanded >= limits.max_expansions) return true;
        return (res.stats.expanded & 1023U) == 0 && timer.seconds() > limits.max_seconds;
    };

    if (algo == Algorithm::bfs) {
        std::deque<std::size_t> open{0};
        while (!open.empty()) {
            if (out_of_budget()) return finish(SolveStatus::resource_limit);
            std::size_t cur = open.front();
            open.pop_front();
            ++res.stats.expanded;
            const StateVec state = *nodes[cur].state;
            for (auto ai : succ.applicable(state)) {
                StateVec next = succ.successor(ai);
                ++res.stats.generated;
                auto [it, inserted] = index.emplace(std::move(next), nodes.size());
                if (!inserted) continue;
                nodes.push_back(Node{&it->first, static_cast<std::int64_t>(cur), ai, nodes[cur].g + 1});
                if (unmet_goals(it->first, task.goal_ids) == 0) {
                    res.plan = extract(task, nodes, static_cast<std::int64_t>(nodes.size() - 1));
                    return finish(SolveStatus::solved);
                }
                open.push_back(nodes.size() - 1);
            }
        }
        return finish(SolveStatus::no_plan);
    }

    // A* with f = g + w*h, ties broken by insertion order.
    struct Entry {
        double f;
        std::uint64_t order;
        std::size_t node;
        std::uint32_t g;
        bool operator>(const Entry& o) const { return std::tie(f, order) > std::tie(o.f, o.order); }
    };
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::uint64_t counter = 0;
    std::vector<bool> closed{false};
    auto f_of = [&](const StateVec& s, std::uint32_t g) {
        return g + limits.heuristic_weight * static_cast<double>(unmet_goals(s, task.goal_ids));
    };
    open.push(Entry{f_of(task.init_ids, 0), counter++, 0, 0});
    while (!open.empty()) {
        Entry e = open.top();
        open.pop();
        if (closed[e.node] || e.g != nodes[e.node].g) continue;
        if (unmet_goals(*nodes[e.node].state, task.goal_ids) == 0) {
            res.plan = extract(task, nodes, static_cast<std::int64_t>(e.node));
            return finish(SolveStatus::solved);
        }
        if (out_of_budget()) return finish(SolveStatus::resource_limit);
        closed[e.node] = true;
        ++res.stats.expanded;
        const StateVec state = *nodes[e.node].state;
        const std::uint32_t g = nodes[e.node].g + 1;
        for (auto ai : succ.applicable(state)) {
            StateVec next = succ.successor(ai);
            ++res.stats.generated;
            auto [it, inserted] = index.emplace(std::move(next), nodes.size());
            if (inserted) {
                nodes.push_back(Node{&it->first, static_cast<std::int64_t>(e.node), ai, g});
                closed.push_back(false);
            } else {
                Node& old = nodes[it->second];
                if (old.g <= g) continue;
                old.parent = static_cast<std::int64_t>(e.node);
                old.action = ai;
                old.g = g;
                closed[it->second] = false;
            }
            open.push(Entry{f_of(it->first, g), counter++, it->second, g});
        }
    }
    return finish(SolveStatus::no_plan);
}

// ---------------------------------------------------------------------------

ValidationReport validate_plan(const GroundedTask& task, const Plan& plan) {
    ValidationReport r;
    SymbolicState s = task.init;
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
        const auto& a = plan.actions[i];
        for (const auto& p : a.pre_pos)
            if (!s.contains(p)) r.missing.push_back(p);
        for (const auto& p : a.pre_neg)
            if (s.contains(p)) r.violating.push_back(p);
        if (!r.missing.empty() || !r.violating.empty()) {
            r.failed_step = i;
            r.message = "step " + std::to_string(i) + " (" + a.to_string() + ") is not applicable";
            return r;
        }
        s = apply(s, a);
    }
    for (const auto& g : task.goal)
        if (!s.contains(g)) r.unmet_goals.push_back(g);
    if (!r.unmet_goals.empty()) {
        r.message = std::to_string(r.unmet_goals.size()) + " goal atom(s) not reached";
        return r;
    }
    r.valid = true;
    return r;
}

Trace execute(const SymbolicState& init, const Plan& plan) {
    Trace trace;
    SymbolicState s = init;
    for (const auto& a : plan.actions) {
        if (!applicable(s, a)) break;
        trace.push_back(TraceStep{s, a});
        s = apply(s, a);
    }
    return trace;
}

std::string plan_to_text(const Plan& plan) {
    std::ostringstream os;
    for (std::size_t i = 0; i < plan.actions.size(); ++i)
        os << (i + 1) << ") " << plan.actions[i].to_string() << "\n";
    return os.str();
}

Plan plan_from_text(const std::string& text, const pddl::DomainFile& domain) {
    Plan plan;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto c = line.find(';'); c != std::string::npos) line.erase(c);
        std::istringstream ls(line);
        std::vector<std::string> words;
        for (std::string w; ls >> w;) words.push_back(canonical(w));
        if (words.empty()) continue;
        if (words.front().back() == ')') words.erase(words.begin());
        if (words.empty()) throw Error("plan line " + std::to_string(lineno) + ": missing action");
        const auto* op = domain.find(words.front());
        if (!op) throw Error("plan line " + std::to_string(lineno) + ": unknown action '" + words.front() + "'");
        std::vector<std::string> args(words.begin() + 1, words.end());
        try {
            plan.actions.push_back(instantiate(*op, args));
        } catch (const Error& e) {
            throw Error("plan line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return plan;
}

}  // namespace ocplan::planner
