#pragma once

#include <Eigen/Core>

#include <array>
#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ocplan {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lowercases ASCII identifiers; every symbol is canonicalized this way.
std::string canonical(std::string_view name);

/// Symbolic identifier of an object. Always stored lowercase.
class ObjectId {
public:
    ObjectId() = default;
    explicit ObjectId(std::string_view name);

    const std::string& str() const { return name_; }
    bool empty() const { return name_.empty(); }

    auto operator<=>(const ObjectId&) const = default;

private:
    std::string name_;
};

inline const std::string kAir = "air";
inline const std::string kHand = "hand";

bool is_reserved_object(std::string_view name);

// ---------------------------------------------------------------------------
// Sides and orientations

enum class Side { top, bottom, left, right, front, back };

inline constexpr std::array<Side, 6> kAllSides{Side::top,  Side::bottom, Side::left,
                                               Side::right, Side::front, Side::back};
/// Sides that the four in-plane orientations permute.
inline constexpr std::array<Side, 4> kPlanarSides{Side::top, Side::bottom, Side::left,
                                                  Side::right};

Side opposite(Side s);

/// Plain relation token: on, under, left, right, front, back.
/// Used by the object-centered domain for object sides and by the hybrid
/// domain for observer-frame relations.
std::string_view relation_token(Side s);
/// Object-frame token of the hybrid domain: ocon, ocunder, ocleft, ...
std::string_view oc_token(Side s);

std::optional<Side> side_from_relation_token(std::string_view tok);
std::optional<Side> side_from_oc_token(std::string_view tok);

/// Unit vector of a side in its own frame. x = right, y = back, z = top.
Eigen::Vector3d side_direction(Side s);

enum class Orientation { upright, upsidedown, horizleft, horizright };

inline constexpr std::array<Orientation, 4> kOrientations{
    Orientation::upright, Orientation::upsidedown, Orientation::horizleft,
    Orientation::horizright};

std::string_view orientation_token(Orientation o);
/// Short form used in plan listings: UR, US, HL, HR.
std::string_view orientation_abbrev(Orientation o);
std::optional<Orientation> orientation_from_token(std::string_view tok);

/// True for every symbol of the fixed token vocabulary (relation tokens,
/// object-frame tokens, orientation tokens).
bool is_vocabulary_token(std::string_view tok);

// ---------------------------------------------------------------------------
// Symbolic layer

struct Atom {
    std::string predicate;
    std::vector<std::string> args;

    Atom() = default;
    Atom(std::string pred, std::vector<std::string> arguments);

    std::size_t arity() const { return args.size(); }
    bool is_ground() const;
    std::string to_string() const;

    auto operator<=>(const Atom&) const = default;
};

inline bool is_variable(std::string_view s) { return !s.empty() && s.front() == '?'; }

struct AtomHash {
    std::size_t operator()(const Atom& a) const noexcept;
};

/// Set of ground atoms; equality is order independent.
class SymbolicState {
public:
    SymbolicState() = default;
    SymbolicState(std::initializer_list<Atom> atoms);
    explicit SymbolicState(const std::vector<Atom>& atoms);

    bool contains(const Atom& a) const { return atoms_.count(a) != 0; }
    bool insert(const Atom& a) { return atoms_.insert(a).second; }
    bool erase(const Atom& a) { return atoms_.erase(a) != 0; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    auto begin() const { return atoms_.begin(); }
    auto end() const { return atoms_.end(); }
    const std::set<Atom>& atoms() const { return atoms_; }

    bool contains_all(const std::vector<Atom>& atoms) const;

    bool operator==(const SymbolicState&) const = default;

private:
    std::set<Atom> atoms_;
};

/// STRIPS operator with negative preconditions. Atom args starting with '?'
/// are variables and must be listed in `params`.
struct OperatorSchema {
    std::string name;
    std::vector<std::string> params;
    std::vector<Atom> pre_pos;
    std::vector<Atom> pre_neg;
    std::vector<Atom> add;
    std::vector<Atom> del;

    /// Throws Error naming the first body variable missing from params.
    void check_bound_variables() const;

    bool operator==(const OperatorSchema&) const = default;
};

/// Schema instance with every parameter bound.
struct GroundAction {
    std::string name;
    std::vector<std::string> params;  ///< parameter names of the schema
    std::vector<std::string> args;    ///< bound value per parameter
    std::vector<Atom> pre_pos;
    std::vector<Atom> pre_neg;
    std::vector<Atom> add;
    std::vector<Atom> del;

    /// Value bound to a parameter, e.g. arg("?obj").
    const std::string& arg(std::string_view param) const;
    std::string to_string() const;  ///< "name a1 a2 ..."

    bool operator==(const GroundAction& o) const { return name == o.name && args == o.args; }
};

/// Substitutes the binding into a schema; throws if a variable stays free.
GroundAction instantiate(const OperatorSchema& schema, const std::vector<std::string>& args);

struct Plan {
    std::vector<GroundAction> actions;

    std::size_t size() const { return actions.size(); }
    bool empty() const { return actions.empty(); }
};

// ---------------------------------------------------------------------------
// Physical layer

using Vector9d = Eigen::Matrix<double, 9, 1>;

/// Pose and bounding box of one object. Orientation holds extrinsic
/// rotation angles (roll about x, then pitch about y, then yaw about z),
/// so the rotation matrix is Rz(yaw) * Ry(pitch) * Rx(roll).
/// bbox holds the extents along the object's own axes.
struct PhysicalObjectState {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector3d orientation = Eigen::Vector3d::Zero();
    Eigen::Vector3d bbox = Eigen::Vector3d::Ones();

    /// (position, orientation, bbox) concatenated.
    Vector9d vector() const;
    Eigen::Matrix3d rotation() const;

    bool operator==(const PhysicalObjectState& o) const {
        return position == o.position && orientation == o.orientation && bbox == o.bbox;
    }
};

struct PredicateSample {
    Vector9d z = Vector9d::Zero();
};

/// z1 - z2 componentwise.
PredicateSample make_sample(const PhysicalObjectState& z1, const PhysicalObjectState& z2);

/// Pitch angle (radians) realising an in-plane orientation.
double orientation_pitch(Orientation o);

}  // namespace ocplan

template <>
struct std::hash<ocplan::Atom> {
    std::size_t operator()(const ocplan::Atom& a) const noexcept { return ocplan::AtomHash{}(a); }
};
