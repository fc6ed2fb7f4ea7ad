#include "ocplan/model.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cctype>
#include <numbers>
#include <sstream>

namespace ocplan {

std::string canonical(std::string_view name) {
    std::string out(name);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

ObjectId::ObjectId(std::string_view name) : name_(canonical(name)) {
    if (name_.empty()) throw Error("object id must be non-empty");
}

bool is_reserved_object(std::string_view name) { return name == kAir || name == kHand; }

Side opposite(Side s) {
    switch (s) {
        case Side::top: return Side::bottom;
        case Side::bottom: return Side::top;
        case Side::left: return Side::right;
        case Side::right: return Side::left;
        case Side::front: return Side::back;
        case Side::back: return Side::front;
    }
    return s;
}

namespace {
constexpr std::array<std::string_view, 6> kRelationTokens{"on", "under", "left",
                                                          "right", "front", "back"};
constexpr std::array<std::string_view, 6> kOcTokens{"ocon",    "ocunder", "ocleft",
                                                    "ocright", "ocfront", "ocback"};
constexpr std::array<std::string_view, 4> kOrientationTokens{"upright", "upsidedown",
                                                             "horizleft", "horizright"};
constexpr std::array<std::string_view, 4> kOrientationAbbrev{"UR", "US", "HL", "HR"};
}  // namespace

std::string_view relation_token(Side s) { return kRelationTokens[static_cast<int>(s)]; }
std::string_view oc_token(Side s) { return kOcTokens[static_cast<int>(s)]; }

std::optional<Side> side_from_relation_token(std::string_view tok) {
    for (std::size_t i = 0; i < kRelationTokens.size(); ++i)
        if (kRelationTokens[i] == tok) return static_cast<Side>(i);
    return std::nullopt;
}

std::optional<Side> side_from_oc_token(std::string_view tok) {
    for (std::size_t i = 0; i < kOcTokens.size(); ++i)
        if (kOcTokens[i] == tok) return static_cast<Side>(i);
    return std::nullopt;
}

Eigen::Vector3d side_direction(Side s) {
    switch (s) {
        case Side::top: return Eigen::Vector3d::UnitZ();
        case Side::bottom: return -Eigen::Vector3d::UnitZ();
        case Side::left: return -Eigen::Vector3d::UnitX();
        case Side::right: return Eigen::Vector3d::UnitX();
        case Side::front: return -Eigen::Vector3d::UnitY();
        case Side::back: return Eigen::Vector3d::UnitY();
    }
    return Eigen::Vector3d::Zero();
}

std::string_view orientation_token(Orientation o) {
    return kOrientationTokens[static_cast<int>(o)];
}
std::string_view orientation_abbrev(Orientation o) {
    return kOrientationAbbrev[static_cast<int>(o)];
}

std::optional<Orientation> orientation_from_token(std::string_view tok) {
    for (std::size_t i = 0; i < kOrientationTokens.size(); ++i)
        if (kOrientationTokens[i] == tok) return static_cast<Orientation>(i);
    return std::nullopt;
}

bool is_vocabulary_token(std::string_view tok) {
    return side_from_relation_token(tok) || side_from_oc_token(tok) ||
           orientation_from_token(tok);
}

double orientation_pitch(Orientation o) {
    // Pitch is a rotation about +y (the observer's line of sight); +90 deg
    // turns the object's top towards the observer's right, i.e. clockwise
    // as seen from the front. Flip this sign to swap the HL/HR convention.
    constexpr double kHorizRightPitch = std::numbers::pi / 2.0;
    switch (o) {
        case Orientation::upright: return 0.0;
        case Orientation::horizright: return kHorizRightPitch;
        case Orientation::upsidedown: return std::numbers::pi;
        case Orientation::horizleft: return -kHorizRightPitch;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

Atom::Atom(std::string pred, std::vector<std::string> arguments)
    : predicate(std::move(pred)), args(std::move(arguments)) {}

bool Atom::is_ground() const {
    return std::none_of(args.begin(), args.end(), [](const auto& a) { return is_variable(a); });
}

std::string Atom::to_string() const {
    std::string out = "(" + predicate;
    for (const auto& a : args) out += " " + a;
    return out + ")";
}

std::size_t AtomHash::operator()(const Atom& a) const noexcept {
    std::size_t h = std::hash<std::string>{}(a.predicate);
    for (const auto& s : a.args) h ^= std::hash<std::string>{}(s) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

SymbolicState::SymbolicState(std::initializer_list<Atom> atoms) : atoms_(atoms) {}
SymbolicState::SymbolicState(const std::vector<Atom>& atoms) : atoms_(atoms.begin(), atoms.end()) {}

bool SymbolicState::contains_all(const std::vector<Atom>& atoms) const {
    return std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) { return contains(a); });
}

void OperatorSchema::check_bound_variables() const {
    auto check = [&](const std::vector<Atom>& atoms) {
        for (const auto& a : atoms)
            for (const auto& arg : a.args)
                if (is_variable(arg) &&
                    std::find(params.begin(), params.end(), arg) == params.end())
                    throw Error("action '" + name + "': variable " + arg +
                                " is not declared in :parameters");
    };
    check(pre_pos);
    check(pre_neg);
    check(add);
    check(del);
}

const std::string& GroundAction::arg(std::string_view param) const {
    for (std::size_t i = 0; i < params.size(); ++i)
        if (params[i] == param) return args[i];
    throw Error("action '" + name + "' has no parameter " + std::string(param));
}

std::string GroundAction::to_string() const {
    std::string out = name;
    for (const auto& a : args) out += " " + a;
    return out;
}

GroundAction instantiate(const OperatorSchema& schema, const std::vector<std::string>& args) {
    if (args.size() != schema.params.size())
        throw Error("action '" + schema.name + "': expected " +
                    std::to_string(schema.params.size()) + " arguments, got " +
                    std::to_string(args.size()));
    GroundAction g;
    g.name = schema.name;
    g.params = schema.params;
    g.args = args;
    auto subst = [&](const std::vector<Atom>& in) {
        std::vector<Atom> out;
        out.reserve(in.size());
        for (const auto& a : in) {
            Atom b = a;
            for (auto& s : b.args) {
                if (!is_variable(s)) continue;
                auto it = std::find(schema.params.begin(), schema.params.end(), s);
                if (it == schema.params.end())
                    throw Error("action '" + schema.name + "': unbound variable " + s);
                s = args[static_cast<std::size_t>(it - schema.params.begin())];
            }
            if (std::find(out.begin(), out.end(), b) == out.end()) out.push_back(std::move(b));
        }
        return out;
    };
    g.pre_pos = subst(schema.pre_pos);
    g.pre_neg = subst(schema.pre_neg);
    g.add = subst(schema.add);
    g.del = subst(schema.del);
    return g;
}

// ---------------------------------------------------------------------------

Vector9d PhysicalObjectState::vector() const {
    Vector9d z;
    z << position, orientation, bbox;
    return z;
}

Eigen::Matrix3d PhysicalObjectState::rotation() const {
    using Eigen::AngleAxisd;
    return (AngleAxisd(orientation.z(), Eigen::Vector3d::UnitZ()) *
            AngleAxisd(orientation.y(), Eigen::Vector3d::UnitY()) *
            AngleAxisd(orientation.x(), Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

PredicateSample make_sample(const PhysicalObjectState& z1, const PhysicalObjectState& z2) {
    return PredicateSample{z1.vector() - z2.vector()};
}

}  // namespace ocplan
