#pragma once

// Embedded finite-domain engine. Depth-first search over variables in
// declaration order and values in domain order; a branch is pruned as soon
// as some constraint partially evaluates to FALSE. No propagation beyond
// that, no learning, no restarts.

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ckbm/error.hpp"
#include "ckbm/model.hpp"

namespace ckbm {

enum class Truth : std::uint8_t { False, True, Unknown };

/// Three-valued (Kleene) evaluation under a partial assignment.
inline Truth partial_eval(const Formula& f, const Assignment& a) {
  auto negate_truth = [](Truth t) {
    return t == Truth::Unknown ? t : (t == Truth::True ? Truth::False : Truth::True);
  };
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      const Atom& atom = f.as_atom();
      auto it = a.find(atom.variable);
      if (it == a.end()) return Truth::Unknown;
      bool equal = it->second == atom.value;
      return (atom.op == CmpOp::Eq) == equal ? Truth::True : Truth::False;
    }
    case Formula::Kind::Not: return negate_truth(partial_eval(f.operand(), a));
    case Formula::Kind::And: {
      Truth l = partial_eval(f.lhs(), a);
      if (l == Truth::False) return l;
      Truth r = partial_eval(f.rhs(), a);
      if (r == Truth::False) return r;
      return l == Truth::True && r == Truth::True ? Truth::True : Truth::Unknown;
    }
    case Formula::Kind::Or:
    case Formula::Kind::Implies: {
      Truth l = partial_eval(f.lhs(), a);
      if (f.kind() == Formula::Kind::Implies) l = negate_truth(l);
      if (l == Truth::True) return l;
      Truth r = partial_eval(f.rhs(), a);
      if (r == Truth::True) return r;
      return l == Truth::False && r == Truth::False ? Truth::False : Truth::Unknown;
    }
  }
  return Truth::Unknown;
}

struct SolveStats {
  std::uint64_t nodes_explored = 0;
  std::chrono::duration<double, std::milli> elapsed{0};
};

struct ConsistencyResult {
  bool consistent = false;
  SolveStats stats;

  explicit operator bool() const { return consistent; }
};

struct CountResult {
  std::uint64_t count = 0;
  /// Set when the count passed the cap; `count` is then a partial count.
  bool cap_exceeded = false;
  SolveStats stats;
};

namespace detail {

/// Formula flattened to index form: variables and values are positions.
struct CompiledFormula {
  struct Node {
    Formula::Kind kind;
    bool neq;
    int var;
    int value;
    int lhs;
    int rhs;
  };
  std::vector<Node> nodes;  // root is the last node
  std::vector<int> vars;    // distinct variables, ascending
};

inline int compile_node(const Formula& f, std::span<const Variable> variables,
                        CompiledFormula& out) {
  CompiledFormula::Node n{f.kind(), false, -1, -1, -1, -1};
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      const Atom& atom = f.as_atom();
      for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == atom.variable) n.var = static_cast<int>(i);
      if (n.var < 0)
        throw Error(ErrorKind::Validation, "undeclared variable '" + atom.variable + "'");
      n.value = variables[n.var].index_of(atom.value);
      if (n.value < 0)
        throw Error(ErrorKind::Validation, "value '" + atom.value +
                                               "' is not in the domain of '" +
                                               atom.variable + "'");
      n.neq = atom.op == CmpOp::Neq;
      out.vars.push_back(n.var);
      break;
    }
    case Formula::Kind::Not: n.lhs = compile_node(f.operand(), variables, out); break;
    default:
      n.lhs = compile_node(f.lhs(), variables, out);
      n.rhs = compile_node(f.rhs(), variables, out);
  }
  out.nodes.push_back(n);
  return static_cast<int>(out.nodes.size()) - 1;
}

inline CompiledFormula compile(const Formula& f, std::span<const Variable> variables) {
  CompiledFormula out;
  compile_node(f, variables, out);
  std::sort(out.vars.begin(), out.vars.end());
  out.vars.erase(std::unique(out.vars.begin(), out.vars.end()), out.vars.end());
  return out;
}

inline Truth eval_node(const CompiledFormula& cf, int idx, const std::vector<int>& values) {
  const auto& n = cf.nodes[idx];
  switch (n.kind) {
    case Formula::Kind::Atom: {
      int v = values[n.var];
      if (v < 0) return Truth::Unknown;
      return (v == n.value) != n.neq ? Truth::True : Truth::False;
    }
    case Formula::Kind::Not: {
      Truth t = eval_node(cf, n.lhs, values);
      return t == Truth::Unknown ? t : (t == Truth::True ? Truth::False : Truth::True);
    }
    case Formula::Kind::And: {
      Truth l = eval_node(cf, n.lhs, values);
      if (l == Truth::False) return l;
      Truth r = eval_node(cf, n.rhs, values);
      if (r == Truth::False) return r;
      return l == Truth::True && r == Truth::True ? Truth::True : Truth::Unknown;
    }
    case Formula::Kind::Or:
    case Formula::Kind::Implies: {
      Truth l = eval_node(cf, n.lhs, values);
      if (n.kind == Formula::Kind::Implies && l != Truth::Unknown)
        l = l == Truth::True ? Truth::False : Truth::True;
      if (l == Truth::True) return l;
      Truth r = eval_node(cf, n.rhs, values);
      if (r == Truth::True) return r;
      return l == Truth::False && r == Truth::False ? Truth::False : Truth::Unknown;
    }
  }
  return Truth::Unknown;
}

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return b > std::numeric_limits<std::uint64_t>::max() - a
             ? std::numeric_limits<std::uint64_t>::max()
             : a + b;
}

/// Backtracking engine shared by consistency checking, counting and
/// enumeration. Each constraint is re-evaluated only when one of its
/// variables is assigned; once decided TRUE it stays TRUE for every
/// extension (Kleene evaluation is monotone), which is what makes the
/// free-variable product shortcut valid.
class Search {
 public:
  enum class Mode { FirstSolution, Count, Enumerate };

  Search(std::span<const Variable> variables, std::span<const Formula> constraints)
      : variables_(variables),
        values_(variables.size(), -1),
        watches_(variables.size()),
        decided_(constraints.size(), false),
        suffix_product_(variables.size() + 1, 1) {
    compiled_.reserve(constraints.size());
    for (std::size_t c = 0; c < constraints.size(); ++c) {
      compiled_.push_back(compile(constraints[c], variables));
      for (int v : compiled_.back().vars) watches_[v].push_back(static_cast<int>(c));
    }
    for (std::size_t i = variables.size(); i-- > 0;)
      suffix_product_[i] = saturating_mul(suffix_product_[i + 1], variables[i].domain.size());
    undecided_ = constraints.size();
  }

  void run(Mode mode, std::optional<std::uint64_t> limit) {
    mode_ = mode;
    limit_ = limit;
    auto start = std::chrono::steady_clock::now();
    if (undecided_ == 0 && mode_ != Mode::Enumerate) {
      record(suffix_product_[0]);
    } else {
      descend(0);
    }
    stats_.elapsed = std::chrono::steady_clock::now() - start;
  }

  std::uint64_t count() const { return count_; }
  bool stopped() const { return stopped_; }
  const SolveStats& stats() const { return stats_; }
  std::vector<Assignment>& solutions() { return solutions_; }

 private:
  void record(std::uint64_t n) {
    count_ = saturating_add(count_, n);
    if (mode_ == Mode::FirstSolution || (limit_ && count_ > *limit_)) stopped_ = true;
    if (mode_ == Mode::Enumerate) {
      Assignment a;
      for (std::size_t i = 0; i < variables_.size(); ++i)
        a.emplace(variables_[i].name, variables_[i].domain[values_[i]]);
      solutions_.push_back(std::move(a));
      if (limit_ && solutions_.size() >= *limit_) stopped_ = true;
    }
  }

  void descend(std::size_t level) {
    if (level == variables_.size()) {
      record(1);
      return;
    }
    const int domain_size = static_cast<int>(variables_[level].domain.size());
    for (int value = 0; value < domain_size && !stopped_; ++value) {
      ++stats_.nodes_explored;
      values_[level] = value;
      std::size_t trail_mark = trail_.size();
      bool failed = false;
      for (int c : watches_[level]) {
        if (decided_[c]) continue;
        Truth t = eval_node(compiled_[c], static_cast<int>(compiled_[c].nodes.size()) - 1,
                            values_);
        if (t == Truth::False) {
          failed = true;
          break;
        }
        if (t == Truth::True) {
          decided_[c] = true;
          trail_.push_back(c);
          --undecided_;
        }
      }
      if (!failed) {
        if (undecided_ == 0 && mode_ != Mode::Enumerate)
          record(suffix_product_[level + 1]);
        else
          descend(level + 1);
      }
      while (trail_.size() > trail_mark) {
        decided_[trail_.back()] = false;
        trail_.pop_back();
        ++undecided_;
      }
      values_[level] = -1;
    }
  }

  std::span<const Variable> variables_;
  std::vector<CompiledFormula> compiled_;
  std::vector<int> values_;
  std::vector<std::vector<int>> watches_;
  std::vector<bool> decided_;
  std::vector<int> trail_;
  std::vector<std::uint64_t> suffix_product_;
  std::size_t undecided_ = 0;

  Mode mode_ = Mode::FirstSolution;
  std::optional<std::uint64_t> limit_;
  std::uint64_t count_ = 0;
  bool stopped_ = false;
  std::vector<Assignment> solutions_;
  SolveStats stats_;
};

}  // namespace detail

/// True iff some total assignment satisfies every constraint. Stops at the
/// first solution.
inline ConsistencyResult is_consistent(std::span<const Variable> variables,
                                       std::span<const Formula> constraints) {
  detail::Search search(variables, constraints);
  search.run(detail::Search::Mode::FirstSolution, std::nullopt);
  return {search.count() > 0, search.stats()};
}

inline ConsistencyResult is_consistent(const KnowledgeBase& kb) {
  auto formulas = kb.formulas();
  return is_consistent(kb.variables, formulas);
}

/// Exact number of satisfying total assignments. With a cap, the search
/// stops once the count exceeds it and reports `cap_exceeded`.
inline CountResult count_solutions(std::span<const Variable> variables,
                                   std::span<const Formula> constraints,
                                   std::optional<std::uint64_t> cap = std::nullopt) {
  detail::Search search(variables, constraints);
  search.run(detail::Search::Mode::Count, cap);
  return {search.count(), cap && search.count() > *cap, search.stats()};
}

inline CountResult count_solutions(const KnowledgeBase& kb,
                                   std::optional<std::uint64_t> cap = std::nullopt) {
  auto formulas = kb.formulas();
  return count_solutions(kb.variables, formulas, cap);
}

/// Up to `limit` satisfying assignments in variable-declaration/domain order.
inline std::vector<Assignment> enumerate_solutions(std::span<const Variable> variables,
                                                   std::span<const Formula> constraints,
                                                   std::uint64_t limit) {
  if (limit == 0) {
    detail::Search validated(variables, constraints);
    return {};
  }
  detail::Search search(variables, constraints);
  search.run(detail::Search::Mode::Enumerate, limit);
  return std::move(search.solutions());
}

inline constexpr std::uint64_t kBruteForceGuard = 10'000'000;

/// Independent oracle: walks the full Cartesian product and filters with
/// two-valued `eval`. Shares no code with the search above.
inline std::set<Assignment> brute_force_solutions(std::span<const Variable> variables,
                                                  std::span<const Formula> constraints) {
  validate_variables(variables);
  for (const auto& f : constraints) validate_formula(variables, f);
  std::uint64_t space = 1;
  for (const auto& v : variables) {
    space *= v.domain.size();
    if (space > kBruteForceGuard)
      throw Error(ErrorKind::SpaceTooLarge, "assignment space exceeds " +
                                                std::to_string(kBruteForceGuard));
  }
  std::set<Assignment> out;
  std::vector<std::size_t> odometer(variables.size(), 0);
  Assignment a;
  for (const auto& v : variables) a[v.name] = v.domain.front();
  for (;;) {
    bool ok = true;
    for (const auto& f : constraints)
      if (!eval(f, a)) {
        ok = false;
        break;
      }
    if (ok) out.insert(a);
    std::size_t i = 0;
    for (; i < variables.size(); ++i) {
      if (++odometer[i] < variables[i].domain.size()) {
        a[variables[i].name] = variables[i].domain[odometer[i]];
        break;
      }
      odometer[i] = 0;
      a[variables[i].name] = variables[i].domain.front();
    }
    if (i == variables.size()) break;
  }
  return out;
}

inline std::set<Assignment> brute_force_solutions(const KnowledgeBase& kb) {
  auto formulas = kb.formulas();
  return brute_force_solutions(kb.variables, formulas);
}

}  // namespace ckbm
