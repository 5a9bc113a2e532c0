#pragma once

// Core domain types: enumerated variables, propositional formulas over
// variable/value atoms, constraints and knowledge bases.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ckbm/error.hpp"

namespace ckbm {

struct Variable {
  std::string name;
  std::vector<std::string> domain;

  bool contains(std::string_view value) const {
    return std::find(domain.begin(), domain.end(), value) != domain.end();
  }

  /// Position of `value` in the domain, or -1.
  int index_of(std::string_view value) const {
    auto it = std::find(domain.begin(), domain.end(), value);
    return it == domain.end() ? -1 : static_cast<int>(it - domain.begin());
  }

  friend bool operator==(const Variable&, const Variable&) = default;
};

enum class CmpOp : std::uint8_t { Eq, Neq };

struct Atom {
  std::string variable;
  CmpOp op = CmpOp::Eq;
  std::string value;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Total or partial map variable -> value.
using Assignment = std::map<std::string, std::string, std::less<>>;

/// Immutable expression tree. Copies share structure.
class Formula {
 public:
  enum class Kind : std::uint8_t { Atom, Not, And, Or, Implies };

  static Formula atom(Atom a) { return Formula(Kind::Atom, std::move(a), nullptr, nullptr); }
  static Formula atom(std::string var, CmpOp op, std::string value) {
    return atom(Atom{std::move(var), op, std::move(value)});
  }
  static Formula negation(const Formula& operand) {
    return Formula(Kind::Not, {}, operand.node_, nullptr);
  }
  static Formula conjunction(const Formula& lhs, const Formula& rhs) {
    return Formula(Kind::And, {}, lhs.node_, rhs.node_);
  }
  static Formula disjunction(const Formula& lhs, const Formula& rhs) {
    return Formula(Kind::Or, {}, lhs.node_, rhs.node_);
  }
  static Formula implication(const Formula& lhs, const Formula& rhs) {
    return Formula(Kind::Implies, {}, lhs.node_, rhs.node_);
  }

  Kind kind() const { return node_->kind; }
  bool is_atom() const { return kind() == Kind::Atom; }

  const Atom& as_atom() const { return node_->atom; }
  /// Operand of Not, left child of binary nodes.
  Formula lhs() const { return Formula(node_->lhs); }
  Formula rhs() const { return Formula(node_->rhs); }
  Formula operand() const { return lhs(); }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::Atom: return a.as_atom() == b.as_atom();
      case Kind::Not: return a.operand() == b.operand();
      default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    }
  }

 private:
  struct Node {
    Kind kind;
    Atom atom;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  Formula(Kind kind, Atom a, std::shared_ptr<const Node> lhs, std::shared_ptr<const Node> rhs)
      : node_(std::make_shared<const Node>(
            Node{kind, std::move(a), std::move(lhs), std::move(rhs)})) {}

  std::shared_ptr<const Node> node_;
};

/// Not(f), structurally. No simplification.
inline Formula negate(const Formula& f) { return Formula::negation(f); }

/// Two-valued evaluation under an assignment covering every variable of `f`.
inline bool eval(const Formula& f, const Assignment& a) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      const Atom& atom = f.as_atom();
      auto it = a.find(atom.variable);
      if (it == a.end())
        throw Error(ErrorKind::UnassignedVariable,
                    "variable '" + atom.variable + "' is not assigned");
      bool equal = it->second == atom.value;
      return atom.op == CmpOp::Eq ? equal : !equal;
    }
    case Formula::Kind::Not: return !eval(f.operand(), a);
    case Formula::Kind::And: return eval(f.lhs(), a) && eval(f.rhs(), a);
    case Formula::Kind::Or: return eval(f.lhs(), a) || eval(f.rhs(), a);
    case Formula::Kind::Implies: return !eval(f.lhs(), a) || eval(f.rhs(), a);
  }
  return false;
}

namespace detail {
inline void collect_vars(const Formula& f, std::set<std::string>& out) {
  if (f.is_atom()) {
    out.insert(f.as_atom().variable);
  } else if (f.kind() == Formula::Kind::Not) {
    collect_vars(f.operand(), out);
  } else {
    collect_vars(f.lhs(), out);
    collect_vars(f.rhs(), out);
  }
}

template <typename Fn>
void for_each_atom(const Formula& f, Fn&& fn) {
  if (f.is_atom()) {
    fn(f.as_atom());
  } else if (f.kind() == Formula::Kind::Not) {
    for_each_atom(f.operand(), fn);
  } else {
    for_each_atom(f.lhs(), fn);
    for_each_atom(f.rhs(), fn);
  }
}
}  // namespace detail

inline std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  detail::collect_vars(f, out);
  return out;
}

struct Context {
  std::string variable;
  std::string value;

  friend bool operator==(const Context&, const Context&) = default;
};

/// True when `f` has the shape `ctx_var = v -> body` (with `v == ctx_value`
/// when a value is given).
inline bool is_guarded(const Formula& f, std::string_view ctx_var,
                       std::optional<std::string_view> ctx_value = std::nullopt) {
  if (f.kind() != Formula::Kind::Implies || !f.lhs().is_atom()) return false;
  const Atom& guard = f.lhs().as_atom();
  if (guard.op != CmpOp::Eq || guard.variable != ctx_var) return false;
  return !ctx_value || guard.value == *ctx_value;
}

struct Constraint {
  std::string id;
  Formula formula;
  std::string provenance;
  bool contextualized = false;
};

/// Returns `c` with its context guard removed; the id and provenance are kept.
inline Constraint strip_context(const Constraint& c, std::string_view ctx_var) {
  if (!c.contextualized || !is_guarded(c.formula, ctx_var))
    throw Error(ErrorKind::NotContextualized,
                "constraint '" + c.id + "' is not guarded by context variable '" +
                    std::string(ctx_var) + "'");
  return Constraint{c.id, c.formula.rhs(), c.provenance, false};
}

struct KnowledgeBase {
  std::string name;
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::optional<Context> context;

  const Variable* find_variable(std::string_view var) const {
    auto it = std::find_if(variables.begin(), variables.end(),
                           [&](const Variable& v) { return v.name == var; });
    return it == variables.end() ? nullptr : &*it;
  }

  const Constraint* find_constraint(std::string_view id) const {
    auto it = std::find_if(constraints.begin(), constraints.end(),
                           [&](const Constraint& c) { return c.id == id; });
    return it == constraints.end() ? nullptr : &*it;
  }

  std::vector<Formula> formulas() const {
    std::vector<Formula> out;
    out.reserve(constraints.size());
    for (const auto& c : constraints) out.push_back(c.formula);
    return out;
  }
};

/// Equality over everything the text format carries: name, context, variable
/// and constraint order, ids and formula shape.
inline bool same_structure(const KnowledgeBase& a, const KnowledgeBase& b) {
  if (a.name != b.name || a.context != b.context || a.variables != b.variables)
    return false;
  return std::equal(a.constraints.begin(), a.constraints.end(),
                    b.constraints.begin(), b.constraints.end(),
                    [](const Constraint& x, const Constraint& y) {
                      return x.id == y.id && x.formula == y.formula;
                    });
}

inline void validate_variables(std::span<const Variable> variables) {
  std::set<std::string_view> names;
  for (const auto& v : variables) {
    if (!names.insert(v.name).second)
      throw Error(ErrorKind::Validation, "duplicate variable '" + v.name + "'");
    if (v.domain.empty())
      throw Error(ErrorKind::Validation, "variable '" + v.name + "' has an empty domain");
    std::set<std::string_view> values;
    for (const auto& value : v.domain)
      if (!values.insert(value).second)
        throw Error(ErrorKind::Validation, "duplicate value '" + value +
                                               "' in domain of '" + v.name + "'");
  }
}

/// Every atom must reference a declared variable and an in-domain value.
inline void validate_formula(std::span<const Variable> variables, const Formula& f) {
  detail::for_each_atom(f, [&](const Atom& atom) {
    auto it = std::find_if(variables.begin(), variables.end(),
                           [&](const Variable& v) { return v.name == atom.variable; });
    if (it == variables.end())
      throw Error(ErrorKind::Validation, "undeclared variable '" + atom.variable + "'");
    if (!it->contains(atom.value))
      throw Error(ErrorKind::Validation, "value '" + atom.value +
                                             "' is not in the domain of '" +
                                             atom.variable + "'");
  });
}

inline void validate(const KnowledgeBase& kb) {
  validate_variables(kb.variables);
  if (kb.context) {
    const Variable* var = kb.find_variable(kb.context->variable);
    if (!var)
      throw Error(ErrorKind::Validation,
                  "context variable '" + kb.context->variable + "' is not declared");
    if (!var->contains(kb.context->value))
      throw Error(ErrorKind::Validation, "context value '" + kb.context->value +
                                             "' is not in the domain of '" +
                                             var->name + "'");
  }
  std::set<std::string_view> ids;
  for (const auto& c : kb.constraints) {
    if (!ids.insert(c.id).second)
      throw Error(ErrorKind::Validation, "duplicate constraint id '" + c.id + "'");
    try {
      validate_formula(kb.variables, c.formula);
    } catch (const Error& e) {
      throw Error(e.kind(), "constraint '" + c.id + "': " + e.what());
    }
    if (!c.contextualized) continue;
    // Merged KBs carry no single context; there any equality guard is fine.
    bool guarded = c.formula.kind() == Formula::Kind::Implies &&
                   c.formula.lhs().is_atom() && c.formula.lhs().as_atom().op == CmpOp::Eq;
    if (guarded && kb.context) guarded = is_guarded(c.formula, kb.context->variable);
    if (!guarded)
      throw Error(ErrorKind::Validation,
                  "constraint '" + c.id + "' is flagged contextualized but unguarded");
  }
}

}  // namespace ckbm
