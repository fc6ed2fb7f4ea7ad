#include "ocplan/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace ocplan::simworld {

bool is_table(std::string_view name) {
    return std::find(kTableParts.begin(), kTableParts.end(), name) != kTableParts.end();
}

void GeometryConfig::validate() const {
    if (!(penetration_tol < contact_tol))
        throw GeometryError("penetration tolerance must be smaller than contact tolerance");
    if (!(min_overlap > 0.0 && min_overlap <= 1.0))
        throw GeometryError("overlap fraction must lie in (0, 1]");
    if ((workspace_max - workspace_min).minCoeff() <= 0.0)
        throw GeometryError("workspace bounds are empty");
}

Box world_box(const PhysicalObjectState& s) {
    if ((s.bbox.array() <= 0.0).any()) throw GeometryError("bounding box extents must be positive");
    Eigen::Matrix3d r = s.rotation();
    Eigen::Matrix3d a = r.cwiseAbs();
    for (int c = 0; c < 3; ++c) {
        double mx = a.col(c).maxCoeff();
        if (std::abs(mx - 1.0) > 1e-6)
            throw GeometryError("orientation is not axis aligned; only box-aligned rotations are supported");
        for (int k = 0; k < 3; ++k) a(k, c) = a(k, c) > 0.5 ? 1.0 : 0.0;
    }
    Eigen::Vector3d ext = a * s.bbox;
    return Box{s.position - ext / 2.0, s.position + ext / 2.0};
}

Side side_facing(const PhysicalObjectState& s, const Eigen::Vector3d& world_dir) {
    Eigen::Matrix3d r = s.rotation();
    Side best = Side::top;
    double best_dot = -2.0;
    for (Side side : kAllSides) {
        double d = (r * side_direction(side)).dot(world_dir);
        if (d > best_dot) {
            best_dot = d;
            best = side;
        }
    }
    return best;
}

namespace {

/// World direction (unit axis) from box a to a face-contacting box b.
std::optional<Eigen::Vector3d> contact_direction(const Box& a, const Box& b,
                                                  const GeometryConfig& cfg) {
    for (int ax = 0; ax < 3; ++ax) {
        for (int dir : {+1, -1}) {
            double gap = dir > 0 ? b.lo[ax] - a.hi[ax] : a.lo[ax] - b.hi[ax];
            if (gap < -cfg.penetration_tol || gap > cfg.contact_tol) continue;
            int u = (ax + 1) % 3, v = (ax + 2) % 3;
            double ou = std::min(a.hi[u], b.hi[u]) - std::max(a.lo[u], b.lo[u]);
            double ov = std::min(a.hi[v], b.hi[v]) - std::max(a.lo[v], b.lo[v]);
            if (ou <= 0.0 || ov <= 0.0) continue;
            double fa = (a.hi[u] - a.lo[u]) * (a.hi[v] - a.lo[v]);
            double fb = (b.hi[u] - b.lo[u]) * (b.hi[v] - b.lo[v]);
            if (ou * ov / std::min(fa, fb) < cfg.min_overlap) continue;
            Eigen::Vector3d d = Eigen::Vector3d::Zero();
            d[ax] = dir;
            return d;
        }
    }
    return std::nullopt;
}

bool interpenetrate(const Box& a, const Box& b, double tol) {
    for (int ax = 0; ax < 3; ++ax) {
        double o = std::min(a.hi[ax], b.hi[ax]) - std::max(a.lo[ax], b.lo[ax]);
        if (o <= tol) return false;
    }
    return true;
}

/// Largest per-axis gap; negative when the boxes overlap on every axis.
double separation(const Box& a, const Box& b) {
    double s = -1e9;
    for (int ax = 0; ax < 3; ++ax)
        s = std::max({s, b.lo[ax] - a.hi[ax], a.lo[ax] - b.hi[ax]});
    return s;
}

}  // namespace

SymbolicState extract_relations(const ObjectMap& objects, const GeometryConfig& cfg) {
    cfg.validate();
    std::map<std::string, Box> boxes;
    for (const auto& [name, st] : objects) boxes.emplace(name, world_box(st));

    SymbolicState out;
    std::map<std::string, std::set<Side>> touched;
    std::vector<std::string> in_hand;
    for (const auto& [n1, b1] : boxes) {
        for (const auto& [n2, b2] : boxes) {
            if (n1 == n2) continue;
            if (n1 < n2 && interpenetrate(b1, b2, cfg.penetration_tol))
                throw GeometryError("objects '" + n1 + "' and '" + n2 + "' interpenetrate");
            auto d = contact_direction(b1, b2, cfg);
            if (!d) continue;
            Side s = side_facing(objects.at(n1), *d);
            out.insert(Atom("oc", {std::string(relation_token(s)), n1, n2}));
            touched[n1].insert(s);
            if (n1 == kHand) in_hand.push_back(n2);
        }
    }
    for (const auto& [name, _] : boxes)
        for (Side s : kAllSides)
            if (!touched[name].count(s)) out.insert(Atom("oc", {std::string(relation_token(s)), name, kAir}));
    if (objects.count(kHand)) {
        if (in_hand.empty()) out.insert(Atom("in", {kHand, kAir}));
        for (const auto& o : in_hand) out.insert(Atom("in", {kHand, o}));
    }
    return out;
}

std::vector<std::string> block_names(int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(std::string(1, static_cast<char>('a' + i)));
    return out;
}

namespace {

constexpr double kTableHeight = 0.05;

double table_part_width(const GeometryConfig& cfg) {
    return (cfg.workspace_max.x() - cfg.workspace_min.x()) / 3.0;
}

double table_part_center(const GeometryConfig& cfg, int part) {
    return cfg.workspace_min.x() + table_part_width(cfg) * (part + 0.5);
}

void add_tables(ObjectMap& objs, const GeometryConfig& cfg) {
    double depth = cfg.workspace_max.y() - cfg.workspace_min.y();
    double yc = (cfg.workspace_max.y() + cfg.workspace_min.y()) / 2.0;
    for (int i = 0; i < 3; ++i) {
        PhysicalObjectState t;
        t.position = {table_part_center(cfg, i), yc, -kTableHeight / 2.0};
        t.bbox = {table_part_width(cfg), depth, kTableHeight};
        objs[kTableParts[static_cast<std::size_t>(i)]] = t;
    }
}

PhysicalObjectState oriented(Eigen::Vector3d bbox, Orientation o) {
    PhysicalObjectState s;
    s.bbox = bbox;
    s.orientation = {0.0, orientation_pitch(o), 0.0};
    return s;
}

Eigen::Vector3d world_extent(const PhysicalObjectState& s) {
    Box b = world_box(s);
    return b.hi - b.lo;
}

Scenario generate_blocks(const ScenarioSpec& spec, std::mt19937_64& rng, const GeometryConfig& cfg) {
    if (spec.n_blocks < 0 || spec.n_blocks > 26) throw GenerationError("block count must lie in [0, 26]");
    auto names = block_names(spec.n_blocks);
    std::vector<std::vector<std::string>> stacks(3);
    std::set<std::string> upright_fixed;

    if (!spec.fixed_stacks.empty()) {
        if (spec.fixed_stacks.size() > 3) throw GenerationError("at most three stacks fit on the table");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < spec.fixed_stacks.size(); ++i)
            for (const auto& n : spec.fixed_stacks[i]) {
                std::string c = canonical(n);
                if (!seen.insert(c).second) throw GenerationError("block '" + c + "' appears twice");
                stacks[i].push_back(c);
            }
    } else {
        int prefix = std::clamp(spec.goal_prefix, 0, spec.n_blocks);
        std::vector<std::string> rest;
        // Goal tower order bottom to top is the reverse of the names.
        for (int i = 0; i < prefix; ++i) {
            const auto& n = names[static_cast<std::size_t>(spec.n_blocks - 1 - i)];
            stacks[2].push_back(n);
            upright_fixed.insert(n);
        }
        for (int i = 0; i < spec.n_blocks - prefix; ++i) rest.push_back(names[static_cast<std::size_t>(i)]);
        std::shuffle(rest.begin(), rest.end(), rng);
        std::uniform_int_distribution<int> pick_stack(0, 2);
        for (const auto& n : rest) stacks[static_cast<std::size_t>(pick_stack(rng))].push_back(n);
    }

    Scenario sc;
    add_tables(sc.objects, cfg);
    std::uniform_int_distribution<int> pick_orient(0, 3);
    std::uniform_real_distribution<double> jitter(-0.1 * spec.block_size, 0.1 * spec.block_size);
    const double yc = (cfg.workspace_max.y() + cfg.workspace_min.y()) / 2.0;
    for (int part = 0; part < 3; ++part) {
        double z = 0.0;
        for (const auto& n : stacks[static_cast<std::size_t>(part)]) {
            Orientation o = Orientation::upright;
            if (spec.random_orientations && !upright_fixed.count(n))
                o = kOrientations[static_cast<std::size_t>(pick_orient(rng))];
            PhysicalObjectState s = oriented(Eigen::Vector3d::Constant(spec.block_size), o);
            double h = world_extent(s).z();
            if (z + h > cfg.workspace_max.z())
                throw GenerationError("stack on " + kTableParts[static_cast<std::size_t>(part)] +
                                      " exceeds the vertical workspace");
            s.position = {table_part_center(cfg, part) + jitter(rng), yc, z + h / 2.0};
            z += h;
            sc.objects[n] = s;
        }
    }
    return sc;
}

struct Item {
    std::string name;
    Eigen::Vector3d bbox;
    bool may_rotate;
};

class HouseholdBuilder {
public:
    HouseholdBuilder(std::mt19937_64& rng, const GeometryConfig& cfg) : rng_(rng), cfg_(cfg) {
        add_tables(objs_, cfg);
        for (const auto& t : kTableParts) boxes_[t] = world_box(objs_[t]);
    }

    bool try_place(const std::string& name, const PhysicalObjectState& s,
                   const std::string& support) {
        Box b = world_box(s);
        for (int ax = 0; ax < 3; ++ax)
            if (b.lo[ax] < cfg_.workspace_min[ax] - 1e-9 || b.hi[ax] > cfg_.workspace_max[ax] + 1e-9)
                return false;
        for (const auto& [other, ob] : boxes_) {
            if (other == support) continue;
            if (separation(b, ob) <= 3.0 * cfg_.contact_tol) return false;
        }
        if (!support.empty()) {
            const Box& sb = boxes_.at(support);
            // Must rest on the support's top face with enough overlap.
            if (std::abs(b.lo.z() - sb.hi.z()) > 1e-9) return false;
            double ox = std::min(b.hi.x(), sb.hi.x()) - std::max(b.lo.x(), sb.lo.x());
            double oy = std::min(b.hi.y(), sb.hi.y()) - std::max(b.lo.y(), sb.lo.y());
            double fa = std::min((b.hi.x() - b.lo.x()) * (b.hi.y() - b.lo.y()),
                                 (sb.hi.x() - sb.lo.x()) * (sb.hi.y() - sb.lo.y()));
            if (ox <= 0 || oy <= 0 || ox * oy / fa < 0.5) return false;
        }
        objs_[name] = s;
        boxes_[name] = b;
        return true;
    }

    void remove(const std::string& name) {
        objs_.erase(name);
        boxes_.erase(name);
    }

    const Box& box(const std::string& n) const { return boxes_.at(n); }
    ObjectMap& objects() { return objs_; }

private:
    std::mt19937_64& rng_;
    const GeometryConfig& cfg_;
    ObjectMap objs_;
    std::map<std::string, Box> boxes_;
};

Scenario generate_household(const ScenarioSpec& spec, std::mt19937_64& rng, const GeometryConfig& cfg) {
    const std::vector<Item> items{
        {"cup", {0.08, 0.08, 0.10}, false},
        {"bottle", {0.09, 0.09, 0.25}, false},
        {"block", {0.05, 0.05, 0.05}, true},
    };
    const Eigen::Vector3d hand_bbox{0.08, 0.04, 0.06};
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
    std::uniform_int_distribution<int> pick_orient(0, 3);

    HouseholdBuilder world(rng, cfg);
    std::string held;
    if (u01(rng) < spec.p_held) {
        std::uniform_int_distribution<std::size_t> pick(0, items.size() - 1);
        held = items[pick(rng)].name;
    }

    // Hand first: either grasping `held` from above or free in the air.
    for (int attempt = 0;; ++attempt) {
        if (attempt > 200) throw GenerationError("could not place the hand");
        double x = uniform(cfg.workspace_min.x() + 0.06, cfg.workspace_max.x() - 0.06);
        double y = uniform(cfg.workspace_min.y() + 0.06, cfg.workspace_max.y() - 0.06);
        if (!held.empty()) {
            const auto& it = *std::find_if(items.begin(), items.end(), [&](const Item& i) { return i.name == held; });
            PhysicalObjectState obj = oriented(it.bbox, Orientation::upright);
            if (it.may_rotate) obj = oriented(it.bbox, kOrientations[static_cast<std::size_t>(pick_orient(rng))]);
            double h = world_extent(obj).z();
            double bottom = uniform(0.08, cfg.workspace_max.z() - h - hand_bbox.z() - 0.01);
            obj.position = {x, y, bottom + h / 2.0};
            PhysicalObjectState hand;
            hand.bbox = hand_bbox;
            hand.position = {x, y, bottom + h + hand_bbox.z() / 2.0};
            if (!world.try_place(held, obj, "")) continue;
            if (!world.try_place(kHand, hand, held)) {
                world.remove(held);
                continue;
            }
            break;
        }
        PhysicalObjectState hand;
        hand.bbox = hand_bbox;
        hand.position = {x, y, uniform(0.30, cfg.workspace_max.z() - hand_bbox.z() / 2.0)};
        if (world.try_place(kHand, hand, "")) break;
    }

    std::vector<Item> rest;
    for (const auto& it : items)
        if (it.name != held) rest.push_back(it);
    std::shuffle(rest.begin(), rest.end(), rng);
    std::vector<std::string> stackable;  // placed objects whose top may carry another
    for (const auto& it : rest) {
        bool placed = false;
        for (int attempt = 0; attempt < 400 && !placed; ++attempt) {
            Orientation o = it.may_rotate ? kOrientations[static_cast<std::size_t>(pick_orient(rng))]
                                          : Orientation::upright;
            PhysicalObjectState s = oriented(it.bbox, o);
            Eigen::Vector3d ext = world_extent(s);
            std::string support;
            if (!stackable.empty() && u01(rng) < spec.p_stack && attempt < 200) {
                std::uniform_int_distribution<std::size_t> pick(0, stackable.size() - 1);
                support = stackable[pick(rng)];
                const Box& sb = world.box(support);
                Eigen::Vector3d c = (sb.lo + sb.hi) / 2.0;
                double jx = 0.2 * std::min(ext.x(), sb.hi.x() - sb.lo.x());
                double jy = 0.2 * std::min(ext.y(), sb.hi.y() - sb.lo.y());
                s.position = {c.x() + uniform(-jx, jx), c.y() + uniform(-jy, jy), sb.hi.z() + ext.z() / 2.0};
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, 2);
                support = kTableParts[pick(rng)];
                const Box& tb = world.box(support);
                s.position = {uniform(tb.lo.x() + ext.x() / 2.0, tb.hi.x() - ext.x() / 2.0),
                              uniform(tb.lo.y() + ext.y() / 2.0, tb.hi.y() - ext.y() / 2.0),
                              tb.hi.z() + ext.z() / 2.0};
            }
            if (world.try_place(it.name, s, support)) {
                placed = true;
                stackable.erase(std::remove(stackable.begin(), stackable.end(), support), stackable.end());
                stackable.push_back(it.name);
            }
        }
        if (!placed) throw GenerationError("could not place '" + it.name + "'");
    }

    Scenario sc;
    sc.objects = world.objects();
    return sc;
}

}  // namespace

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed, const GeometryConfig& cfg,
                           int id) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    Scenario sc = spec.roster == Roster::blocks ? generate_blocks(spec, rng, cfg)
                                                : generate_household(spec, rng, cfg);
    sc.id = id;
    sc.seed = seed;
    sc.cfg = cfg;
    sc.ground_truth = extract_relations(sc.objects, cfg);
    return sc;
}

Atom predicate_atom(std::string_view predicate, const std::string& o1, const std::string& o2) {
    if (predicate == "in") return Atom("in", {o1, o2});
    if (!side_from_relation_token(predicate))
        throw Error("unknown grounding predicate '" + std::string(predicate) + "'");
    return Atom("oc", {std::string(predicate), o1, o2});
}

bool label_oracle(std::string_view predicate, const std::string& o1, const std::string& o2,
                  const Scenario& sc) {
    Atom a = predicate_atom(predicate, o1, o2);
    auto known = [&](const std::string& o) { return sc.objects.count(o) || o == kAir; };
    if (!known(o1)) throw Error("unknown object '" + o1 + "'");
    if (!known(o2)) throw Error("unknown object '" + o2 + "'");
    if (o1 == o2) return false;
    return sc.ground_truth.contains(a);
}

}  // namespace ocplan::simworld
