#pragma once

#include "ocplan/io.hpp"
#include "ocplan/pddl.hpp"

#include <set>
#include <string>

namespace ocplan::test {

inline std::string golden_path(const std::string& file) { return std::string(OCPLAN_GOLDEN_DIR) + "/" + file; }

/// First difference between two domains with literal order ignored inside
/// each precondition and effect list; empty when they agree.
inline std::string domain_difference(const pddl::DomainFile& a, const pddl::DomainFile& b) {
    if (a.name != b.name) return "domain name " + a.name + " vs " + b.name;
    if (a.operators.size() != b.operators.size()) return "operator count";
    auto as_set = [](const std::vector<Atom>& v) { return std::set<Atom>(v.begin(), v.end()); };
    for (const auto& op : a.operators) {
        const OperatorSchema* other = b.find(op.name);
        if (!other) return "missing operator " + op.name;
        if (op.params != other->params) return op.name + ": parameters";
        if (as_set(op.pre_pos) != as_set(other->pre_pos)) return op.name + ": positive preconditions";
        if (as_set(op.pre_neg) != as_set(other->pre_neg)) return op.name + ": negative preconditions";
        if (as_set(op.add) != as_set(other->add)) return op.name + ": add list";
        if (as_set(op.del) != as_set(other->del)) return op.name + ": delete list";
        if (op.pre_pos.size() != other->pre_pos.size() || op.add.size() != other->add.size() ||
            op.del.size() != other->del.size())
            return op.name + ": duplicated literals";
    }
    return {};
}

inline pddl::DomainFile golden_domain(const std::string& file) {
    return pddl::parse_domain(io::read_file(golden_path(file)));
}

}  // namespace ocplan::test
