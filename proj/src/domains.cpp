#include "ocplan/domains.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace ocplan::domains {

namespace {

Atom A(std::string pred, std::vector<std::string> args) { return Atom(std::move(pred), std::move(args)); }

std::string tok(Side s) { return std::string(relation_token(s)); }
std::string octok(Side s) { return std::string(oc_token(s)); }

pddl::DomainFile object_centered_domain() {
    pddl::DomainFile d;
    d.name = "object-centered";
    d.arities = {{"oc", 3}, {"in", 2}, {"force", 2}, {"isopposite", 2}};

    const std::vector<std::string> params{"?obj-hand", "?obj",     "?loc",
                                          "?obj-loc",  "?loc-obj", "?obj-force"};
    OperatorSchema pick;
    pick.name = "pick";
    pick.params = params;
    pick.pre_pos = {A("oc", {"?obj-hand", "?obj", "air"}), A("oc", {"?obj-loc", "?obj", "?loc"}),
                    A("oc", {"?loc-obj", "?loc", "?obj"}), A("in", {"hand", "air"}),
                    A("force", {"?obj", "?obj-force"}), A("oc", {"?obj-force", "?obj", "air"})};
    pick.add = {A("oc", {"?obj-hand", "?obj", "hand"}), A("oc", {"?obj-loc", "?obj", "air"}),
                A("oc", {"?loc-obj", "?loc", "air"}), A("in", {"hand", "?obj"})};
    pick.del = {A("force", {"?obj", "?obj-force"}), A("oc", {"?obj-hand", "?obj", "air"}),
                A("oc", {"?obj-loc", "?obj", "?loc"}), A("oc", {"?loc-obj", "?loc", "?obj"}),
                A("in", {"hand", "air"})};

    OperatorSchema place;
    place.name = "place";
    place.params = params;
    place.pre_pos = {A("oc", {"?obj-hand", "?obj", "hand"}), A("oc", {"?obj-loc", "?obj", "air"}),
                     A("oc", {"?loc-obj", "?loc", "air"}), A("in", {"hand", "?obj"}),
                     A("force", {"?loc", "?loc-obj"}), A("isopposite", {"?obj-loc", "?obj-force"})};
    place.add = {A("oc", {"?obj-hand", "?obj", "air"}), A("oc", {"?obj-loc", "?obj", "?loc"}),
                 A("oc", {"?loc-obj", "?loc", "?obj"}), A("in", {"hand", "air"}),
                 A("force", {"?obj", "?obj-force"})};
    place.del = {A("oc", {"?obj-hand", "?obj", "hand"}), A("oc", {"?obj-loc", "?obj", "air"}),
                 A("oc", {"?loc-obj", "?loc", "air"}), A("in", {"hand", "?obj"})};

    d.operators = {pick, place};
    return d;
}

pddl::DomainFile hybrid_domain() {
    pddl::DomainFile d;
    d.name = "hybrid";
    d.arities = {{"ob", 3},         {"emptyhand", 0}, {"clear", 2},      {"force", 2},
                 {"isoriented", 2}, {"o2o", 3},       {"grasped", 2},    {"isopposite", 2}};

    OperatorSchema pick;
    pick.name = "pick";
    pick.params = {"?grasp-type", "?obj",     "?loc",           "?axis-obj",      "?axis-loc",
                   "?obj-loc",    "?loc-obj", "?free-type-obj", "?free-type-loc", "?obj-force"};
    pick.pre_pos = {A("ob", {"?obj-loc", "?obj", "?loc"}),
                    A("ob", {"?loc-obj", "?loc", "?obj"}),
                    A("emptyhand", {}),
                    A("clear", {"?obj", "?grasp-type"}),
                    A("force", {"?obj", "?obj-force"}),
                    A("clear", {"?obj", "?obj-force"}),
                    A("isoriented", {"?obj", "?axis-obj"}),
                    A("isoriented", {"?loc", "?axis-loc"}),
                    A("o2o", {"?obj-loc", "?axis-obj", "?free-type-obj"}),
                    A("o2o", {"?loc-obj", "?axis-loc", "?free-type-loc"})};
    pick.add = {A("grasped", {"?obj", "?grasp-type"}), A("clear", {"?loc", "?loc-obj"}),
                A("clear", {"?obj", "?free-type-obj"}), A("clear", {"?loc", "?free-type-loc"})};
    pick.del = {A("force", {"?obj", "?obj-force"}),      A("isoriented", {"?obj", "?axis-obj"}),
                A("clear", {"?obj", "?grasp-type"}),     A("ob", {"?obj-loc", "?obj", "?loc"}),
                A("ob", {"?loc-obj", "?loc", "?obj"}),   A("emptyhand", {})};

    OperatorSchema place;
    place.name = "place";
    place.params = {"?grasp-type", "?obj",     "?loc",            "?axis-obj",       "?axis-loc",
                    "?obj-loc",    "?loc-obj", "?place-type-obj", "?place-type-loc", "?obj-hand"};
    place.pre_pos = {A("clear", {"?loc", "?loc-obj"}),
                     A("grasped", {"?obj", "?grasp-type"}),
                     A("clear", {"?obj", "?place-type-obj"}),
                     A("isopposite", {"?obj-loc", "?loc-obj"}),
                     A("force", {"?loc", "?loc-obj"}),
                     A("isoriented", {"?loc", "?axis-loc"}),
                     A("o2o", {"?obj-loc", "?axis-obj", "?place-type-obj"}),
                     A("o2o", {"?loc-obj", "?axis-loc", "?place-type-loc"}),
                     A("o2o", {"?obj-hand", "?axis-obj", "?grasp-type"})};
    place.add = {A("ob", {"?obj-loc", "?obj", "?loc"}),  A("ob", {"?loc-obj", "?loc", "?obj"}),
                 A("emptyhand", {}),                     A("clear", {"?obj", "?grasp-type"}),
                 A("force", {"?obj", "?loc-obj"}),       A("clear", {"?obj", "?obj-hand"}),
                 A("isoriented", {"?obj", "?axis-obj"})};
    place.del = {A("grasped", {"?obj", "?grasp-type"}), A("clear", {"?loc", "?place-type-loc"}),
                 A("clear", {"?obj", "?place-type-obj"}), A("clear", {"?loc", "?loc-obj"})};

    d.operators = {pick, place};
    return d;
}

Side nearest_side(const Eigen::Vector3d& v) {
    Side best = Side::top;
    double best_dot = -2.0;
    for (Side s : kAllSides) {
        double d = side_direction(s).dot(v);
        if (d > best_dot) {
            best_dot = d;
            best = s;
        }
    }
    return best;
}

}  // namespace

std::string_view style_token(DomainStyle s) {
    return s == DomainStyle::object_centered ? "oc" : "hybrid";
}

std::optional<DomainStyle> style_from_token(std::string_view t) {
    std::string c = canonical(t);
    if (c == "oc" || c == "object-centered") return DomainStyle::object_centered;
    if (c == "hybrid" || c == "hybrid-observer-object") return DomainStyle::hybrid_observer_object;
    return std::nullopt;
}

pddl::DomainFile build_domain(DomainStyle style) {
    pddl::DomainFile d =
        style == DomainStyle::object_centered ? object_centered_domain() : hybrid_domain();
    for (const auto& op : d.operators) op.check_bound_variables();
    return d;
}

Side world_facing(Side own, Orientation o) {
    PhysicalObjectState s;
    s.orientation = {0.0, orientation_pitch(o), 0.0};
    return nearest_side(s.rotation() * side_direction(own));
}

std::optional<Side> O2OTable::lookup(Side relation, Orientation o) const {
    for (const auto& e : entries)
        if (e.relation == relation && e.orientation == o) return e.object_side;
    return std::nullopt;
}

O2OTable build_o2o() {
    O2OTable t;
    for (Side r : kPlanarSides)
        for (Orientation o : kOrientations)
            for (Side own : kPlanarSides)
                if (world_facing(own, o) == r) t.entries.push_back({r, o, own});
    return t;
}

GoalSpec parse_goal(std::string_view text) {
    GoalSpec g;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) throw EncodingError("empty object name in goal '" + std::string(text) + "'");
        g.tower.push_back(canonical(cur));
        cur.clear();
    };
    for (char ch : text) {
        if (ch == '-') flush();
        else if (!std::isspace(static_cast<unsigned char>(ch))) cur.push_back(ch);
    }
    flush();
    if (g.tower.size() < 2) throw EncodingError("goal tower needs at least two objects");
    std::set<std::string> seen(g.tower.begin(), g.tower.end());
    if (seen.size() != g.tower.size()) throw EncodingError("goal tower repeats an object");
    return g;
}

GoalSpec default_goal() { return GoalSpec{{"a", "b", "c", "d", simworld::kTableR}, true}; }

// ---------------------------------------------------------------------------

namespace {

/// Orientation of an object whose planar sides permute like one of the four
/// in-plane orientations.
Orientation classify_orientation(const std::string& name, const PhysicalObjectState& s) {
    Eigen::Matrix3d r = s.rotation();
    for (Orientation o : kOrientations) {
        bool match = true;
        for (Side own : kAllSides)
            if (nearest_side(r * side_direction(own)) !=
                (own == Side::front || own == Side::back ? own : world_facing(own, o)))
                match = false;
        if (match) return o;
    }
    throw EncodingError("object '" + name + "' is not in an in-plane orientation");
}

struct Contacts {
    /// own side -> touched object (or air)
    std::map<std::string, std::map<Side, std::string>> touching;
    std::string held;
};

Contacts collect_contacts(const simworld::Scenario& sc) {
    SymbolicState relations;
    try {
        relations = simworld::extract_relations(sc.objects, sc.cfg);
    } catch (const simworld::GeometryError& e) {
        throw EncodingError(e.what());
    }
    Contacts c;
    for (const auto& a : relations) {
        if (a.predicate == "in" && a.args.size() == 2 && a.args[1] != kAir) c.held = a.args[1];
        if (a.predicate != "oc" || a.args.size() != 3 || a.args[2] == kAir) continue;
        auto side = side_from_relation_token(a.args[0]);
        if (!side) continue;
        auto [it, fresh] = c.touching[a.args[1]].emplace(*side, a.args[2]);
        if (!fresh && it->second != a.args[2])
            throw EncodingError("side '" + a.args[0] + "' of '" + a.args[1] +
                                "' touches more than one object");
    }
    return c;
}

}  // namespace

ScenarioEncoding encode_scenario(const simworld::Scenario& sc, DomainStyle style,
                                 const GoalSpec& goal) {
    ScenarioEncoding enc;
    enc.style = style;

    std::vector<std::string> blocks;
    for (const auto& [name, _] : sc.objects) {
        if (name == kHand) continue;
        if (simworld::is_table(name)) continue;
        blocks.push_back(name);
    }
    for (const auto& t : simworld::kTableParts)
        if (!sc.objects.count(t)) throw EncodingError("scenario lacks table part '" + t + "'");
    enc.objects = blocks;
    for (const auto& t : simworld::kTableParts) enc.objects.push_back(t);

    for (const auto& g : goal.tower)
        if (!sc.objects.count(g) || g == kHand)
            throw EncodingError("goal object '" + g + "' is not part of the scenario");

    Contacts con = collect_contacts(sc);
    auto touched = [&](const std::string& o, Side s) -> std::string {
        auto it = con.touching.find(o);
        if (it == con.touching.end()) return kAir;
        auto jt = it->second.find(s);
        return jt == it->second.end() ? kAir : jt->second;
    };

    std::map<std::string, Orientation> orient;
    for (const auto& b : blocks) {
        orient[b] = classify_orientation(b, sc.objects.at(b));
        for (Side s : {Side::front, Side::back})
            if (touched(b, s) != kAir)
                throw EncodingError("contact on the " + tok(s) + " side of '" + b + "' is not encodable");
        if (b == con.held) continue;
        Side down = simworld::side_facing(sc.objects.at(b), -Eigen::Vector3d::UnitZ());
        if (touched(b, down) == kAir) throw EncodingError("object '" + b + "' is unsupported");
    }
    for (const auto& t : simworld::kTableParts)
        if (orient.emplace(t, Orientation::upright).first->second != Orientation::upright)
            throw EncodingError("table parts must be upright");

    auto up_side = [&](const std::string& b) {
        return simworld::side_facing(sc.objects.at(b), Eigen::Vector3d::UnitZ());
    };
    auto is_entity = [&](const std::string& o) {
        return std::find(enc.objects.begin(), enc.objects.end(), o) != enc.objects.end();
    };

    SymbolicState& init = enc.init;
    for (Side a : kAllSides) init.insert(A("isopposite", {tok(a), tok(opposite(a))}));

    if (style == DomainStyle::object_centered) {
        for (const auto& b : blocks) {
            for (Side s : kPlanarSides) {
                std::string other = touched(b, s);
                if (other != kAir && other != kHand && !is_entity(other)) other = kAir;
                init.insert(A("oc", {tok(s), b, other}));
            }
            if (b != con.held) init.insert(A("force", {b, tok(up_side(b))}));
        }
        for (const auto& t : simworld::kTableParts) {
            std::string other = touched(t, Side::top);
            if (!is_entity(other)) other = kAir;
            init.insert(A("oc", {tok(Side::top), t, other}));
            init.insert(A("force", {t, tok(Side::top)}));
        }
        init.insert(A("in", {kHand, con.held.empty() ? kAir : con.held}));

        for (std::size_t i = 0; i + 1 < goal.tower.size(); ++i) {
            const auto& upper = goal.tower[i];
            const auto& lower = goal.tower[i + 1];
            enc.goal.push_back(A("oc", {tok(Side::top), lower, upper}));
            if (goal.require_upright && !simworld::is_table(upper))
                enc.goal.push_back(A("oc", {tok(Side::bottom), upper, lower}));
        }
    } else {
        for (const auto& e : build_o2o().entries)
            init.insert(A("o2o", {tok(e.relation), std::string(orientation_token(e.orientation)),
                                  octok(e.object_side)}));
        for (const auto& o : enc.objects) {
            bool table = simworld::is_table(o);
            const auto& sides = table ? std::vector<Side>{Side::top}
                                      : std::vector<Side>(kPlanarSides.begin(), kPlanarSides.end());
            for (Side s : sides) {
                std::string other = touched(o, s);
                if (other == kHand) {
                    init.insert(A("grasped", {o, octok(s)}));
                } else if (other == kAir || !is_entity(other)) {
                    init.insert(A("clear", {o, octok(s)}));
                } else {
                    Side rel = world_facing(s, orient.at(o));
                    init.insert(A("ob", {tok(rel), o, other}));
                }
            }
            if (o != con.held) init.insert(A("isoriented", {o, std::string(orientation_token(orient.at(o)))}));
            // Observer-frame clearance; the hand does not block it.
            for (Side rel : table ? std::vector<Side>{Side::top}
                                  : std::vector<Side>(kPlanarSides.begin(), kPlanarSides.end())) {
                Side own = table ? Side::top : *build_o2o().lookup(rel, orient.at(o));
                std::string other = touched(o, own);
                if (other == kAir || other == kHand || !is_entity(other))
                    init.insert(A("clear", {o, tok(rel)}));
            }
            if (o != con.held) init.insert(A("force", {o, tok(Side::top)}));
        }
        if (con.held.empty()) init.insert(A("emptyhand", {}));

        for (std::size_t i = 0; i + 1 < goal.tower.size(); ++i) {
            const auto& upper = goal.tower[i];
            const auto& lower = goal.tower[i + 1];
            enc.goal.push_back(A("ob", {tok(Side::top), lower, upper}));
            if (goal.require_upright && !simworld::is_table(upper))
                enc.goal.push_back(
                    A("isoriented", {upper, std::string(orientation_token(Orientation::upright))}));
        }
    }
    return enc;
}

pddl::ProblemFile to_problem(const ScenarioEncoding& enc, std::string name) {
    pddl::ProblemFile p;
    p.name = canonical(name);
    p.domain = build_domain(enc.style).name;
    p.objects = enc.objects;
    p.init = enc.init;
    std::set<Atom> seen;
    for (const auto& g : enc.goal)
        if (seen.insert(g).second) p.goal.push_back(g);
    return p;
}

// ---------------------------------------------------------------------------

namespace {

Side side_arg(const GroundAction& a, std::string_view param) {
    const std::string& v = a.arg(param);
    if (auto s = side_from_relation_token(v)) return *s;
    if (auto s = side_from_oc_token(v)) return *s;
    throw Error("parameter " + std::string(param) + " of '" + a.to_string() + "' is not a side");
}

void check_oc(std::size_t step, const SymbolicState& before, const GroundAction& a,
              std::vector<Violation>& out) {
    const std::string& obj = a.arg("?obj");
    const std::string& loc = a.arg("?loc");
    if (a.name == "pick") {
        if (!before.contains(A("oc", {a.arg("?obj-hand"), obj, kAir})))
            out.push_back({step, 'a', "grasped side of '" + obj + "' is not free"});
        for (const auto& at : before) {
            if (at.predicate != "oc" || at.args.size() != 3) continue;
            bool links = (at.args[1] == obj && at.args[2] != kAir && at.args[2] != loc) ||
                         (at.args[2] == obj && at.args[1] != loc);
            if (links) {
                out.push_back({step, 'b', "'" + obj + "' is in contact with another object: " + at.to_string()});
                break;
            }
        }
        if (!before.contains(A("oc", {a.arg("?obj-force"), obj, kAir})))
            out.push_back({step, 'b', "'" + obj + "' carries a load"});
    } else if (a.name == "place") {
        if (opposite(side_arg(a, "?obj-loc")) != side_arg(a, "?obj-force"))
            out.push_back({step, 'c', "landing side of '" + obj + "' is not opposite its force side"});
        const std::string& lo = a.arg("?loc-obj");
        if (!before.contains(A("oc", {lo, loc, kAir})))
            out.push_back({step, 'd', "landing surface of '" + loc + "' is occupied"});
        if (!before.contains(A("force", {loc, lo})))
            out.push_back({step, 'd', "'" + loc + "' cannot support on side " + lo});
    } else {
        throw Error("unknown action '" + a.name + "'");
    }
}

void check_hybrid(std::size_t step, const SymbolicState& before, const GroundAction& a,
                  std::vector<Violation>& out) {
    const std::string& obj = a.arg("?obj");
    const std::string& loc = a.arg("?loc");
    if (a.name == "pick") {
        if (!before.contains(A("clear", {obj, a.arg("?grasp-type")})))
            out.push_back({step, 'a', "grasped side of '" + obj + "' is not free"});
        for (const auto& at : before) {
            if (at.predicate != "ob" || at.args.size() != 3) continue;
            bool links = (at.args[1] == obj && at.args[2] != loc) || (at.args[2] == obj && at.args[1] != loc);
            if (links) {
                out.push_back({step, 'b', "'" + obj + "' is in contact with another object: " + at.to_string()});
                break;
            }
        }
    } else if (a.name == "place") {
        Side ol = side_arg(a, "?obj-loc");
        Side lo = side_arg(a, "?loc-obj");
        if (ol != opposite(lo) || lo != Side::top)
            out.push_back({step, 'c', "'" + obj + "' would not rest on top of '" + loc + "'"});
        if (!before.contains(A("clear", {loc, a.arg("?loc-obj")})))
            out.push_back({step, 'd', "landing surface of '" + loc + "' is occupied"});
        if (!before.contains(A("force", {loc, a.arg("?loc-obj")})))
            out.push_back({step, 'd', "'" + loc + "' cannot support on " + a.arg("?loc-obj")});
    } else {
        throw Error("unknown action '" + a.name + "'");
    }
}

}  // namespace

ConsistencyReport check_consistency(const planner::Trace& trace, DomainStyle style) {
    ConsistencyReport r;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (style == DomainStyle::object_centered)
            check_oc(i, trace[i].before, trace[i].action, r.violations);
        else
            check_hybrid(i, trace[i].before, trace[i].action, r.violations);
    }
    return r;
}

}  // namespace ocplan::domains
