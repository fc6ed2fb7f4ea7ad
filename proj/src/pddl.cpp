#include "ocplan/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <set>
#include <sstream>

namespace ocplan::pddl {

ParseError::ParseError(const std::string& what, int line, int column)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

const OperatorSchema* DomainFile::find(std::string_view op) const {
    for (const auto& o : operators)
        if (o.name == op) return &o;
    return nullptr;
}

namespace {

struct Node {
    bool is_list = false;
    std::string symbol;
    std::vector<Node> items;
    int line = 0;
    int column = 0;
};

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    Node read_document() {
        skip();
        if (pos_ >= text_.size()) throw ParseError("empty input", line_, col_);
        Node n = read();
        skip();
        if (pos_ < text_.size()) throw ParseError("trailing input after top-level form", line_, col_);
        return n;
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    Node read() {
        skip();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_, col_);
        Node n;
        n.line = line_;
        n.column = col_;
        char c = text_[pos_];
        if (c == ')') throw ParseError("unexpected ')'", line_, col_);
        if (c == '(') {
            n.is_list = true;
            advance();
            for (;;) {
                skip();
                if (pos_ >= text_.size())
                    throw ParseError("unterminated list opened here", n.line, n.column);
                if (text_[pos_] == ')') {
                    advance();
                    break;
                }
                n.items.push_back(read());
            }
            return n;
        }
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            char d = text_[pos_];
            if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d))) break;
            advance();
        }
        n.symbol = canonical(text_.substr(start, pos_ - start));
        return n;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

[[noreturn]] void fail(const Node& at, const std::string& msg) {
    throw ParseError(msg, at.line, at.column);
}

const Node& expect_list(const Node& n, const std::string& what) {
    if (!n.is_list) fail(n, "expected " + what);
    return n;
}

const std::string& expect_symbol(const Node& n, const std::string& what) {
    if (n.is_list || n.symbol.empty()) fail(n, "expected " + what);
    return n.symbol;
}

bool head_is(const Node& n, std::string_view sym) {
    return n.is_list && !n.items.empty() && !n.items[0].is_list && n.items[0].symbol == sym;
}

struct Literal {
    Atom atom;
    bool negated = false;
    const Node* where = nullptr;
};

Atom read_atom(const Node& n) {
    expect_list(n, "atom");
    if (n.items.empty()) fail(n, "empty atom");
    Atom a;
    a.predicate = expect_symbol(n.items[0], "predicate name");
    if (a.predicate == "and" || a.predicate == "not" || a.predicate.front() == ':' ||
        is_variable(a.predicate))
        fail(n.items[0], "invalid predicate name '" + a.predicate + "'");
    for (std::size_t i = 1; i < n.items.size(); ++i) a.args.push_back(expect_symbol(n.items[i], "term"));
    return a;
}

Literal read_literal(const Node& n) {
    if (head_is(n, "not")) {
        if (n.items.size() != 2) fail(n, "(not ...) takes exactly one atom");
        return Literal{read_atom(n.items[1]), true, &n.items[1]};
    }
    return Literal{read_atom(n), false, &n};
}

/// Conjunction or a single literal.
std::vector<Literal> read_conjunction(const Node& n) {
    expect_list(n, "formula");
    std::vector<Literal> out;
    if (head_is(n, "and")) {
        for (std::size_t i = 1; i < n.items.size(); ++i) out.push_back(read_literal(n.items[i]));
    } else if (n.items.empty()) {
        // "()" is accepted as an empty conjunction
    } else {
        out.push_back(read_literal(n));
    }
    return out;
}

void push_unique(std::vector<Atom>& v, Atom a) {
    if (std::find(v.begin(), v.end(), a) == v.end()) v.push_back(std::move(a));
}

class ArityTable {
public:
    explicit ArityTable(std::map<std::string, std::size_t>& m) : m_(m) {}

    void declare(const Atom& a, const Node& where) {
        auto [it, inserted] = m_.emplace(a.predicate, a.arity());
        if (!inserted && it->second != a.arity())
            throw ArityError("predicate '" + a.predicate + "' used with arity " +
                                 std::to_string(a.arity()) + ", declared with arity " +
                                 std::to_string(it->second),
                             where.line, where.column);
    }

private:
    std::map<std::string, std::size_t>& m_;
};

OperatorSchema read_action(const Node& n, ArityTable& arity) {
    if (n.items.size() < 2) fail(n, "action needs a name");
    OperatorSchema op;
    op.name = expect_symbol(n.items[1], "action name");
    std::set<std::string> seen_keys;
    for (std::size_t i = 2; i < n.items.size(); i += 2) {
        const std::string& key = expect_symbol(n.items[i], "action keyword");
        if (i + 1 >= n.items.size()) fail(n.items[i], "missing value after " + key);
        if (!seen_keys.insert(key).second) fail(n.items[i], "duplicate " + key);
        const Node& val = n.items[i + 1];
        if (key == ":parameters") {
            expect_list(val, "parameter list");
            for (const auto& p : val.items) {
                const auto& v = expect_symbol(p, "parameter");
                if (!is_variable(v)) fail(p, "parameter '" + v + "' must start with '?'");
                if (std::find(op.params.begin(), op.params.end(), v) != op.params.end())
                    fail(p, "duplicate parameter " + v);
                op.params.push_back(v);
            }
        } else if (key == ":precondition") {
            for (auto& lit : read_conjunction(val)) {
                arity.declare(lit.atom, *lit.where);
                push_unique(lit.negated ? op.pre_neg : op.pre_pos, lit.atom);
            }
        } else if (key == ":effect") {
            for (auto& lit : read_conjunction(val)) {
                arity.declare(lit.atom, *lit.where);
                push_unique(lit.negated ? op.del : op.add, lit.atom);
            }
        } else {
            fail(n.items[i], "unsupported action keyword " + key);
        }
    }
    // Variable check with a source position.
    auto check = [&](const Node& formula) {
        std::vector<const Node*> stack{&formula};
        while (!stack.empty()) {
            const Node* cur = stack.back();
            stack.pop_back();
            if (!cur->is_list) {
                if (is_variable(cur->symbol) &&
                    std::find(op.params.begin(), op.params.end(), cur->symbol) == op.params.end())
                    throw UnboundVariableError("variable " + cur->symbol + " in action '" + op.name +
                                                   "' is not declared in :parameters",
                                               cur->line, cur->column);
                continue;
            }
            for (const auto& c : cur->items) stack.push_back(&c);
        }
    };
    for (std::size_t i = 2; i + 1 < n.items.size(); i += 2) {
        const auto& key = n.items[i].symbol;
        if (key == ":precondition" || key == ":effect") check(n.items[i + 1]);
    }
    return op;
}

void check_define(const Node& root, std::string_view kind) {
    expect_list(root, "(define ...)");
    if (!head_is(root, "define")) fail(root, "expected (define ...)");
    if (root.items.size() < 2 || !head_is(root.items[1], kind) || root.items[1].items.size() != 2)
        fail(root, "expected (" + std::string(kind) + " <name>) after define");
}

}  // namespace

DomainFile parse_domain(std::string_view text) {
    Node root = Reader(text).read_document();
    check_define(root, "domain");
    DomainFile d;
    d.name = expect_symbol(root.items[1].items[1], "domain name");
    ArityTable arity(d.arities);
    for (std::size_t i = 2; i < root.items.size(); ++i) {
        const Node& sec = expect_list(root.items[i], "domain section");
        if (sec.items.empty()) fail(sec, "empty section");
        const auto& key = expect_symbol(sec.items[0], "section keyword");
        if (key == ":requirements") {
            continue;
        } else if (key == ":predicates") {
            for (std::size_t j = 1; j < sec.items.size(); ++j) {
                Atom a = read_atom(sec.items[j]);
                for (std::size_t k = 0; k < a.args.size(); ++k)
                    if (!is_variable(a.args[k])) fail(sec.items[j].items[k + 1], "predicate declaration takes variables only");
                arity.declare(a, sec.items[j]);
            }
        } else if (key == ":action") {
            OperatorSchema op = read_action(sec, arity);
            if (d.find(op.name)) fail(sec, "duplicate action '" + op.name + "'");
            d.operators.push_back(std::move(op));
        } else {
            fail(sec.items[0], "unsupported domain section " + key);
        }
    }
    return d;
}

namespace {

ProblemFile parse_problem_impl(std::string_view text, const DomainFile* domain) {
    Node root = Reader(text).read_document();
    check_define(root, "problem");
    ProblemFile p;
    p.name = expect_symbol(root.items[1].items[1], "problem name");
    std::map<std::string, std::size_t> arities;
    if (domain) arities = domain->arities;
    ArityTable arity(arities);
    std::set<std::string> declared;
    bool have_goal = false, have_init = false;

    auto check_objects = [&](const Atom& a, const Node& where) {
        arity.declare(a, where);
        for (std::size_t k = 0; k < a.args.size(); ++k) {
            const auto& s = a.args[k];
            const Node& term = where.items[k + 1];
            if (is_variable(s)) fail(term, "variables are not allowed in problems");
            if (!declared.count(s) && !is_reserved_object(s) && !is_vocabulary_token(s))
                throw UndeclaredObjectError("undeclared object '" + s + "'", term.line, term.column);
        }
    };

    for (std::size_t i = 2; i < root.items.size(); ++i) {
        const Node& sec = expect_list(root.items[i], "problem section");
        if (sec.items.empty()) fail(sec, "empty section");
        const auto& key = expect_symbol(sec.items[0], "section keyword");
        if (key == ":domain") {
            if (sec.items.size() != 2) fail(sec, "(:domain <name>) expected");
            p.domain = expect_symbol(sec.items[1], "domain name");
        } else if (key == ":objects") {
            for (std::size_t j = 1; j < sec.items.size(); ++j) {
                const auto& o = expect_symbol(sec.items[j], "object name");
                if (is_variable(o)) fail(sec.items[j], "object names cannot start with '?'");
                if (!declared.insert(o).second) fail(sec.items[j], "duplicate object '" + o + "'");
                p.objects.push_back(o);
            }
        } else if (key == ":init") {
            have_init = true;
            for (std::size_t j = 1; j < sec.items.size(); ++j) {
                Atom a = read_atom(sec.items[j]);
                check_objects(a, sec.items[j]);
                p.init.insert(a);
            }
        } else if (key == ":goal") {
            have_goal = true;
            if (sec.items.size() != 2) fail(sec, "(:goal <formula>) expected");
            for (auto& lit : read_conjunction(sec.items[1])) {
                if (lit.negated) fail(*lit.where, "negative goals are not supported");
                check_objects(lit.atom, *lit.where);
                push_unique(p.goal, lit.atom);
            }
        } else {
            fail(sec.items[0], "unsupported problem section " + key);
        }
    }
    if (!have_init) fail(root, "problem has no :init section");
    if (!have_goal) fail(root, "problem has no :goal section");
    return p;
}

void print_atom(std::ostream& os, const Atom& a) { os << a.to_string(); }

}  // namespace

ProblemFile parse_problem(std::string_view text) { return parse_problem_impl(text, nullptr); }

ProblemFile parse_problem(std::string_view text, const DomainFile& domain) {
    return parse_problem_impl(text, &domain);
}

std::string print_domain(const DomainFile& d) {
    std::ostringstream os;
    os << "(define (domain " << d.name << ")\n";
    os << "  (:requirements :strips :negative-preconditions)\n";
    if (!d.arities.empty()) {
        os << "  (:predicates";
        for (const auto& [name, n] : d.arities) {
            os << "\n    (" << name;
            for (std::size_t i = 0; i < n; ++i) os << " ?a" << i;
            os << ")";
        }
        os << ")\n";
    }
    for (const auto& op : d.operators) {
        os << "  (:action " << op.name << "\n    :parameters (";
        for (std::size_t i = 0; i < op.params.size(); ++i) os << (i ? " " : "") << op.params[i];
        os << ")\n    :precondition (and";
        for (const auto& a : op.pre_pos) {
            os << "\n      ";
            print_atom(os, a);
        }
        for (const auto& a : op.pre_neg) {
            os << "\n      (not ";
            print_atom(os, a);
            os << ")";
        }
        os << ")\n    :effect (and";
        for (const auto& a : op.add) {
            os << "\n      ";
            print_atom(os, a);
        }
        for (const auto& a : op.del) {
            os << "\n      (not ";
            print_atom(os, a);
            os << ")";
        }
        os << "))\n";
    }
    os << ")\n";
    return os.str();
}

std::string print_problem(const ProblemFile& p) {
    std::ostringstream os;
    os << "(define (problem " << p.name << ")\n";
    if (!p.domain.empty()) os << "  (:domain " << p.domain << ")\n";
    os << "  (:objects";
    for (const auto& o : p.objects) os << " " << o;
    os << ")\n  (:init";
    for (const auto& a : p.init) {
        os << "\n    ";
        print_atom(os, a);
    }
    os << ")\n  (:goal (and";
    for (const auto& a : p.goal) {
        os << "\n    ";
        print_atom(os, a);
    }
    os << ")))\n";
    return os.str();
}

}  // namespace ocplan::pddl
