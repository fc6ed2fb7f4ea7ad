#pragma once

#include "ocplan/model.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ocplan::pddl {

/// Syntax error with a 1-based source position.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

class ArityError : public ParseError {
public:
    using ParseError::ParseError;
};

class UnboundVariableError : public ParseError {
public:
    using ParseError::ParseError;
};

class UndeclaredObjectError : public ParseError {
public:
    using ParseError::ParseError;
};

struct DomainFile {
    std::string name;
    std::map<std::string, std::size_t> arities;
    std::vector<OperatorSchema> operators;

    const OperatorSchema* find(std::string_view op) const;

    bool operator==(const DomainFile&) const = default;
};

struct ProblemFile {
    std::string name;
    std::string domain;
    std::vector<std::string> objects;
    SymbolicState init;
    std::vector<Atom> goal;  ///< positive conjunction, deduplicated

    bool operator==(const ProblemFile&) const = default;
};

DomainFile parse_domain(std::string_view text);

/// Object references in :init/:goal must be declared in :objects, except
/// the reserved objects and the fixed side/orientation vocabulary.
ProblemFile parse_problem(std::string_view text);
/// Additionally checks atom arities against the domain's declarations.
ProblemFile parse_problem(std::string_view text, const DomainFile& domain);

std::string print_domain(const DomainFile& d);
std::string print_problem(const ProblemFile& p);

}  // namespace ocplan::pddl
