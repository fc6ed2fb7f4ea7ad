#include "ocplan/domains.hpp"
#include "ocplan/planner.hpp"
#include "ocplan/simworld.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace ocplan;
using domains::DomainStyle;

namespace {

bool has_atom(const std::vector<Atom>& v, const Atom& a) { return std::find(v.begin(), v.end(), a) != v.end(); }

// Upright b at the right edge of tablem with a lying horizright on tabler
// against its right side. A table side holds a single contact in the
// encodings, so a cannot share tablem with b.
simworld::Scenario side_by_side() {
    simworld::ScenarioSpec spec;
    spec.fixed_stacks = {{}, {"b"}, {}};
    spec.random_orientations = false;
    auto sc = simworld::generate_scenario(spec, 1);
    PhysicalObjectState a;
    a.bbox = Eigen::Vector3d::Constant(0.05);
    a.orientation = {0.0, orientation_pitch(Orientation::horizright), 0.0};
    sc.objects.at("b").position.x() = 0.14;
    a.position = sc.objects.at("b").position + Eigen::Vector3d(0.05, 0.0, 0.0);
    sc.objects["a"] = a;
    sc.ground_truth = simworld::extract_relations(sc.objects, sc.cfg);
    return sc;
}

simworld::Scenario single_block() {
    simworld::ScenarioSpec spec;
    spec.fixed_stacks = {{}, {"a"}, {}};
    spec.random_orientations = false;
    return simworld::generate_scenario(spec, 1);
}

}  // namespace

TEST_CASE("built domains match the hand transcriptions") {
    CHECK(test::domain_difference(domains::build_domain(DomainStyle::object_centered),
                                  test::golden_domain("oc_domain.pddl")) == "");
    CHECK(test::domain_difference(domains::build_domain(DomainStyle::hybrid_observer_object),
                                  test::golden_domain("hybrid_domain.pddl")) == "");
}

TEST_CASE("operator signatures") {
    auto oc = domains::build_domain(DomainStyle::object_centered);
    const auto* pick = oc.find("pick");
    REQUIRE(pick);
    CHECK(pick->params == std::vector<std::string>{"?obj-hand", "?obj", "?loc", "?obj-loc", "?loc-obj", "?obj-force"});

    auto hy = domains::build_domain(DomainStyle::hybrid_observer_object);
    const auto* place = hy.find("place");
    REQUIRE(place);
    CHECK(has_atom(place->pre_pos, Atom("isopposite", {"?obj-loc", "?loc-obj"})));
    CHECK(has_atom(place->pre_pos, Atom("o2o", {"?obj-loc", "?axis-obj", "?place-type-obj"})));
    CHECK(has_atom(place->add, Atom("emptyhand", {})));
}

TEST_CASE("style tokens") {
    CHECK(domains::style_token(DomainStyle::object_centered) == "oc");
    CHECK(domains::style_from_token("hybrid") == DomainStyle::hybrid_observer_object);
    CHECK_FALSE(domains::style_from_token("bogus").has_value());
}

TEST_CASE("o2o table") {
    auto t = domains::build_o2o();
    CHECK(t.entries.size() == 16);
    CHECK(t.lookup(Side::bottom, Orientation::upright) == Side::bottom);
    CHECK(t.lookup(Side::top, Orientation::upright) == Side::top);
    CHECK(t.lookup(Side::top, Orientation::upsidedown) == Side::bottom);
    CHECK_FALSE(t.lookup(Side::front, Orientation::upright).has_value());
    for (Orientation o : kOrientations) {
        std::set<Side> image;
        for (Side r : kPlanarSides) {
            auto s = t.lookup(r, o);
            REQUIRE(s.has_value());
            image.insert(*s);
            CHECK(domains::world_facing(*s, o) == r);
        }
        CHECK(image.size() == 4);
    }
}

TEST_CASE("goal parsing") {
    auto g = domains::parse_goal("A-B-C-D-tableR");
    CHECK(g.tower == std::vector<std::string>{"a", "b", "c", "d", "tabler"});
    CHECK(g.tower == domains::default_goal().tower);
    CHECK_THROWS_AS(domains::parse_goal("A"), domains::EncodingError);
    CHECK_THROWS_AS(domains::parse_goal("A--B"), domains::EncodingError);
    CHECK_THROWS_AS(domains::parse_goal("A-B-A"), domains::EncodingError);
}

TEST_CASE("tower goal encodings") {
    auto sc = simworld::generate_scenario({}, 4);
    auto oc = domains::encode_scenario(sc, DomainStyle::object_centered, domains::default_goal());
    for (auto [lower, upper] : std::vector<std::pair<std::string, std::string>>{
             {"tabler", "d"}, {"d", "c"}, {"c", "b"}, {"b", "a"}}) {
        CHECK(has_atom(oc.goal, Atom("oc", {"on", lower, upper})));
        CHECK(has_atom(oc.goal, Atom("oc", {"under", upper, lower})));
    }
    CHECK(oc.goal.size() == 8);

    auto hy = domains::encode_scenario(sc, DomainStyle::hybrid_observer_object, domains::default_goal());
    CHECK(has_atom(hy.goal, Atom("ob", {"on", "b", "a"})));
    CHECK(has_atom(hy.goal, Atom("isoriented", {"a", "upright"})));
    CHECK(hy.goal.size() == 8);

    auto relaxed = domains::default_goal();
    relaxed.require_upright = false;
    CHECK(domains::encode_scenario(sc, DomainStyle::object_centered, relaxed).goal.size() == 4);
}

TEST_CASE("single upright block gets its support and force facts") {
    auto sc = single_block();
    domains::GoalSpec g{{"a", "tablel"}, true};
    auto oc = domains::encode_scenario(sc, DomainStyle::object_centered, g);
    CHECK(oc.init.contains(Atom("oc", {"under", "a", "tablem"})));
    CHECK(oc.init.contains(Atom("oc", {"on", "tablem", "a"})));
    CHECK(oc.init.contains(Atom("force", {"tablem", "on"})));
    CHECK(oc.init.contains(Atom("force", {"a", "on"})));
    CHECK(oc.init.contains(Atom("in", {"hand", "air"})));
    CHECK(oc.init.contains(Atom("oc", {"left", "a", "air"})));

    auto hy = domains::encode_scenario(sc, DomainStyle::hybrid_observer_object, g);
    CHECK(hy.init.contains(Atom("ob", {"on", "tablem", "a"})));
    CHECK(hy.init.contains(Atom("ob", {"under", "a", "tablem"})));
    CHECK(hy.init.contains(Atom("force", {"tablem", "on"})));
    CHECK(hy.init.contains(Atom("isoriented", {"a", "upright"})));
    CHECK(hy.init.contains(Atom("emptyhand", {})));
    std::size_t o2o = 0, iso = 0;
    for (const auto& a : hy.init) {
        o2o += a.predicate == "o2o";
        iso += a.predicate == "isopposite";
    }
    CHECK(o2o == 16);
    CHECK(iso == 6);
}

TEST_CASE("side-by-side blocks encode their lateral contact") {
    auto sc = side_by_side();
    domains::GoalSpec g{{"a", "b", "tablem"}, true};
    auto oc = domains::encode_scenario(sc, DomainStyle::object_centered, g);
    Side a_side = simworld::side_facing(sc.objects.at("a"), -Eigen::Vector3d::UnitX());
    CHECK(oc.init.contains(Atom("oc", {"right", "b", "a"})));
    CHECK(oc.init.contains(Atom("oc", {std::string(relation_token(a_side)), "a", "b"})));

    auto hy = domains::encode_scenario(sc, DomainStyle::hybrid_observer_object, g);
    CHECK(hy.init.contains(Atom("ob", {"right", "b", "a"})));
    CHECK(hy.init.contains(Atom("ob", {"left", "a", "b"})));
    CHECK(hy.init.contains(Atom("isoriented", {"a", "horizright"})));
    CHECK(hy.init.contains(Atom("isoriented", {"b", "upright"})));

    for (auto style : domains::kStyles) {
        auto t = planner::ground(domains::build_domain(style), domains::to_problem(domains::encode_scenario(sc, style, g), "p"));
        auto r = planner::solve(t, planner::Algorithm::bfs);
        REQUIRE(r.status == planner::SolveStatus::solved);
        CHECK(r.plan.size() == 2);
    }
}

TEST_CASE("unencodable scenes") {
    auto sc = single_block();
    auto pen = sc;
    pen.objects["b"] = pen.objects.at("a");
    pen.objects["b"].position.x() += 0.01;
    CHECK_THROWS_AS(domains::encode_scenario(pen, DomainStyle::object_centered, {{"a", "tablel"}, true}),
                    domains::EncodingError);

    auto tilted = sc;
    tilted.objects["a"].orientation = {0.0, 0.0, 0.3};
    CHECK_THROWS(domains::encode_scenario(tilted, DomainStyle::object_centered, {{"a", "tablel"}, true}));

    auto floating = sc;
    floating.objects["a"].position.z() += 0.2;
    CHECK_THROWS_AS(domains::encode_scenario(floating, DomainStyle::object_centered, {{"a", "tablel"}, true}),
                    domains::EncodingError);

    CHECK_THROWS_AS(domains::encode_scenario(sc, DomainStyle::object_centered, {{"z", "tablel"}, true}),
                    domains::EncodingError);
}

TEST_CASE("solver plans are consistent") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto sc = simworld::generate_scenario({}, seed);
        for (auto style : domains::kStyles) {
            auto t = planner::ground(domains::build_domain(style),
                                     domains::to_problem(domains::encode_scenario(sc, style, domains::default_goal()), "p"));
            auto r = planner::solve(t, planner::Algorithm::astar_goalcount);
            REQUIRE(r.status == planner::SolveStatus::solved);
            auto report = domains::check_consistency(planner::execute(t.init, r.plan), style);
            CHECK(report.ok());
        }
    }
}

TEST_CASE("picking a loaded block is a force violation") {
    auto oc = domains::build_domain(DomainStyle::object_centered);
    // b rests on a, which rests on tablem; the trace picks a from the table.
    SymbolicState s{Atom("oc", {"under", "a", "tablem"}), Atom("oc", {"on", "tablem", "a"}),
                    Atom("oc", {"on", "a", "b"}),         Atom("oc", {"under", "b", "a"}),
                    Atom("oc", {"right", "a", "air"}),    Atom("force", {"a", "on"}),
                    Atom("in", {"hand", "air"})};
    planner::Trace trace{{s, instantiate(*oc.find("pick"), {"right", "a", "tablem", "under", "on", "on"})}};
    auto report = domains::check_consistency(trace, DomainStyle::object_centered);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations[0].step == 0);
    CHECK(report.violations[0].rule == 'b');

    auto hy = domains::build_domain(DomainStyle::hybrid_observer_object);
    SymbolicState h{Atom("ob", {"under", "a", "tablem"}), Atom("ob", {"on", "tablem", "a"}),
                    Atom("ob", {"on", "a", "b"}),         Atom("ob", {"under", "b", "a"}),
                    Atom("clear", {"a", "ocright"}),      Atom("emptyhand", {})};
    planner::Trace ht{{h, instantiate(*hy.find("pick"), {"ocright", "a", "tablem", "upright", "upright", "under",
                                                         "on", "ocon", "ocon", "ocon"})}};
    auto hr = domains::check_consistency(ht, DomainStyle::hybrid_observer_object);
    REQUIRE_FALSE(hr.ok());
    CHECK(hr.violations[0].rule == 'b');
}

TEST_CASE("placing on an occupied surface is a landing violation") {
    auto oc = domains::build_domain(DomainStyle::object_centered);
    SymbolicState s{Atom("oc", {"on", "b", "c"}), Atom("force", {"b", "on"}), Atom("oc", {"right", "a", "hand"}),
                    Atom("oc", {"under", "a", "air"}), Atom("in", {"hand", "a"})};
    planner::Trace trace{{s, instantiate(*oc.find("place"), {"right", "a", "b", "under", "on", "on"})}};
    auto report = domains::check_consistency(trace, DomainStyle::object_centered);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations[0].rule == 'd');
}

TEST_CASE("empty trace has no violations") {
    CHECK(domains::check_consistency({}, DomainStyle::object_centered).ok());
    CHECK(domains::check_consistency({}, DomainStyle::hybrid_observer_object).ok());
}
