#pragma once

// Contextualization of source knowledge bases and the consistency-based
// merge: decontextualize every constraint whose negated body is
// inconsistent with the remaining model, then drop every constraint implied
// by the rest of the result.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ckbm/error.hpp"
#include "ckbm/model.hpp"
#include "ckbm/solver.hpp"

namespace ckbm {

struct MergeReport {
  std::vector<std::string> decontextualized_ids;
  std::vector<std::string> kept_contextualized_ids;
  std::vector<std::string> removed_redundant_ids;
  std::size_t checks_phase1 = 0;
  std::size_t checks_phase2 = 0;
  std::chrono::duration<double, std::milli> elapsed_phase1{0};
  std::chrono::duration<double, std::milli> elapsed_phase2{0};
  /// Share of constraints in the result that still carry a context guard.
  double contextualized_share = 0.0;
};

struct MergeResult {
  KnowledgeBase kb;
  MergeReport report;
};

/// Guards every constraint of `kb` with `ctx_var = ctx_val`. The context
/// variable is narrowed (or added, first) with domain {ctx_val}, so the
/// solution space is unchanged. Constraints already carrying that exact guard
/// are left as they are.
inline KnowledgeBase contextualize(const KnowledgeBase& kb, std::string_view ctx_var,
                                   std::string_view ctx_val) {
  validate(kb);
  if (!is_consistent(kb))
    throw Error(ErrorKind::InconsistentInput, "knowledge base '" + kb.name + "' is inconsistent");

  KnowledgeBase out = kb;
  auto it = std::find_if(out.variables.begin(), out.variables.end(),
                         [&](const Variable& v) { return v.name == ctx_var; });
  if (it == out.variables.end()) {
    out.variables.insert(out.variables.begin(),
                         Variable{std::string(ctx_var), {std::string(ctx_val)}});
  } else {
    if (!it->contains(ctx_val))
      throw Error(ErrorKind::Validation, "context value '" + std::string(ctx_val) +
                                             "' is not in the domain of '" +
                                             std::string(ctx_var) + "' in '" + kb.name + "'");
    it->domain = {std::string(ctx_val)};
  }
  out.context = Context{std::string(ctx_var), std::string(ctx_val)};

  Formula guard = Formula::atom(std::string(ctx_var), CmpOp::Eq, std::string(ctx_val));
  for (auto& c : out.constraints) {
    if (!is_guarded(c.formula, ctx_var, ctx_val)) c.formula = Formula::implication(guard, c.formula);
    c.contextualized = true;
  }
  validate(out);
  return out;
}

namespace detail {

/// Values of the context variable as seen by `kb`: its declared domain, or
/// the declared context value when the variable is absent.
inline std::vector<std::string> context_values(const KnowledgeBase& kb,
                                               std::string_view ctx_var) {
  if (const Variable* v = kb.find_variable(ctx_var)) return v->domain;
  if (kb.context && kb.context->variable == ctx_var) return {kb.context->value};
  return {};
}

}  // namespace detail

/// Checks that all sources share the non-context variables with identical
/// domains (as sets) and returns the common variable list in the first
/// source's order, with the context variable's domain set to the union of the
/// sources' context values.
inline std::vector<Variable> align(std::span<const KnowledgeBase> kbs, std::string_view ctx_var) {
  if (kbs.empty()) return {};
  const KnowledgeBase& first = kbs.front();
  auto as_set = [](const Variable& v) {
    return std::set<std::string>(v.domain.begin(), v.domain.end());
  };
  for (std::size_t k = 1; k < kbs.size(); ++k) {
    const KnowledgeBase& other = kbs[k];
    for (const auto& v : first.variables) {
      if (v.name == ctx_var) continue;
      const Variable* w = other.find_variable(v.name);
      if (!w)
        throw Error(ErrorKind::Alignment, "variable '" + v.name + "' is missing from '" +
                                              other.name + "'");
      if (as_set(v) != as_set(*w))
        throw Error(ErrorKind::Alignment, "variable '" + v.name + "' has different domains in '" +
                                              first.name + "' and '" + other.name + "'");
    }
    for (const auto& w : other.variables)
      if (w.name != ctx_var && !first.find_variable(w.name))
        throw Error(ErrorKind::Alignment, "variable '" + w.name + "' is missing from '" +
                                              first.name + "'");
  }

  Variable context{std::string(ctx_var), {}};
  for (const auto& kb : kbs)
    for (auto& value : detail::context_values(kb, ctx_var))
      if (!context.contains(value)) context.domain.push_back(std::move(value));

  std::vector<Variable> out;
  for (const auto& v : first.variables) out.push_back(v.name == ctx_var ? context : v);
  if (!context.domain.empty() && !first.find_variable(ctx_var))
    out.insert(out.begin(), context);
  return out;
}

inline std::vector<Variable> align(const KnowledgeBase& kb1, const KnowledgeBase& kb2,
                                   std::string_view ctx_var) {
  const KnowledgeBase both[] = {kb1, kb2};
  return align(both, ctx_var);
}

/// True iff removing `id` from `kb` and adding its negation is inconsistent.
inline bool is_redundant(const KnowledgeBase& kb, std::string_view id) {
  const Constraint* target = kb.find_constraint(id);
  if (!target)
    throw Error(ErrorKind::ConstraintNotFound,
                "constraint '" + std::string(id) + "' not found in '" + kb.name + "'");
  std::vector<Formula> check;
  for (const auto& c : kb.constraints)
    if (&c != target) check.push_back(c.formula);
  check.push_back(negate(target->formula));
  return !is_consistent(kb.variables, check);
}

namespace detail {

inline std::string sanitize_ident(std::string_view s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' ? c : '_';
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.')
    out.insert(out.begin(), 'k');
  return out;
}

/// Ids used by more than one source get a `.provenance` suffix.
inline void qualify_colliding_ids(std::vector<KnowledgeBase>& sources) {
  std::map<std::string, int> uses;
  for (const auto& kb : sources)
    for (const auto& c : kb.constraints) ++uses[c.id];
  std::set<std::string> taken;
  for (const auto& [id, n] : uses) taken.insert(id);
  for (auto& kb : sources)
    for (auto& c : kb.constraints) {
      if (uses[c.id] < 2) continue;
      std::string base =
          c.id + "." + sanitize_ident(c.provenance.empty() ? kb.name : c.provenance);
      std::string candidate = base;
      for (int i = 2; taken.count(candidate); ++i) candidate = base + "_" + std::to_string(i);
      taken.insert(candidate);
      c.id = std::move(candidate);
    }
}

}  // namespace detail

/// Merges N >= 2 contextualized, consistent, aligned sources with pairwise
/// different context values of one context variable.
///
/// Phase 1 walks CKB' (all source constraints, in source then file order).
/// For each guarded c' with body c, CKB' still contains c' itself; if
/// {not c} + CKB' + CKB is inconsistent, c goes into CKB unguarded, else c'
/// goes in. c' then leaves CKB'. Phase 2 walks CKB in insertion order and
/// drops c when (CKB - {c}) + {not c} is inconsistent, each check seeing the
/// already-reduced CKB.
inline MergeResult ckb_merge_all(std::span<const KnowledgeBase> inputs) {
  if (inputs.size() < 2)
    throw Error(ErrorKind::Validation, "merge needs at least two knowledge bases");

  std::string ctx_var;
  std::set<std::string> ctx_values;
  for (const auto& kb : inputs) {
    if (!kb.context)
      throw Error(ErrorKind::NotContextualized, "'" + kb.name + "' has no context");
    if (ctx_var.empty()) ctx_var = kb.context->variable;
    if (kb.context->variable != ctx_var)
      throw Error(ErrorKind::Validation, "sources use different context variables ('" +
                                             ctx_var + "', '" + kb.context->variable + "')");
    if (!ctx_values.insert(kb.context->value).second)
      throw Error(ErrorKind::Validation,
                  "context value '" + kb.context->value + "' is used by more than one source");
    validate(kb);
    for (const auto& c : kb.constraints)
      if (!c.contextualized || !is_guarded(c.formula, ctx_var, kb.context->value))
        throw Error(ErrorKind::NotContextualized,
                    "constraint '" + c.id + "' of '" + kb.name + "' is not contextualized");
    if (!is_consistent(kb))
      throw Error(ErrorKind::InconsistentInput, "knowledge base '" + kb.name + "' is inconsistent");
  }

  MergeResult result;
  KnowledgeBase& merged = result.kb;
  MergeReport& report = result.report;
  merged.variables = align(inputs, ctx_var);
  for (std::size_t i = 0; i < inputs.size(); ++i)
    merged.name += (i ? "+" : "") + inputs[i].name;

  std::vector<KnowledgeBase> sources(inputs.begin(), inputs.end());
  detail::qualify_colliding_ids(sources);
  std::vector<Constraint> pending;  // CKB'
  for (const auto& kb : sources)
    pending.insert(pending.end(), kb.constraints.begin(), kb.constraints.end());

  std::vector<Constraint>& result_set = merged.constraints;  // CKB
  std::vector<Formula> check;

  auto phase1_start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const Constraint& guarded = pending[i];
    Constraint body = strip_context(guarded, ctx_var);
    check.clear();
    check.push_back(negate(body.formula));
    for (std::size_t j = i; j < pending.size(); ++j) check.push_back(pending[j].formula);
    for (const auto& c : result_set) check.push_back(c.formula);
    ++report.checks_phase1;
    if (!is_consistent(merged.variables, check)) {
      report.decontextualized_ids.push_back(body.id);
      result_set.push_back(std::move(body));
    } else {
      report.kept_contextualized_ids.push_back(guarded.id);
      result_set.push_back(guarded);
    }
  }
  report.elapsed_phase1 = std::chrono::steady_clock::now() - phase1_start;

  auto phase2_start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < result_set.size();) {
    check.clear();
    for (std::size_t j = 0; j < result_set.size(); ++j)
      if (j != i) check.push_back(result_set[j].formula);
    check.push_back(negate(result_set[i].formula));
    ++report.checks_phase2;
    if (!is_consistent(merged.variables, check)) {
      report.removed_redundant_ids.push_back(result_set[i].id);
      result_set.erase(result_set.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  report.elapsed_phase2 = std::chrono::steady_clock::now() - phase2_start;

  std::size_t guarded = std::count_if(result_set.begin(), result_set.end(),
                                      [](const Constraint& c) { return c.contextualized; });
  report.contextualized_share =
      result_set.empty() ? 0.0 : static_cast<double>(guarded) / result_set.size();
  return result;
}

inline MergeResult ckb_merge(const KnowledgeBase& kb1c, const KnowledgeBase& kb2c) {
  const KnowledgeBase both[] = {kb1c, kb2c};
  return ckb_merge_all(both);
}

/// Number of assignments over the shared non-context variables that satisfy
/// every constraint body of both sources, context guards stripped.
inline std::uint64_t intersection_count(const KnowledgeBase& kb1, const KnowledgeBase& kb2,
                                        std::optional<std::string> ctx_var = std::nullopt) {
  if (!ctx_var) {
    if (kb1.context) ctx_var = kb1.context->variable;
    else if (kb2.context) ctx_var = kb2.context->variable;
    else ctx_var = std::string();
  }
  std::vector<Variable> shared = align(kb1, kb2, *ctx_var);
  std::erase_if(shared, [&](const Variable& v) { return v.name == *ctx_var; });

  std::vector<Formula> bodies;
  for (const KnowledgeBase* kb : {&kb1, &kb2})
    for (const auto& c : kb->constraints) {
      Formula body = !ctx_var->empty() && is_guarded(c.formula, *ctx_var) ? c.formula.rhs()
                                                                          : c.formula;
      if (!ctx_var->empty() && free_vars(body).count(*ctx_var))
        throw Error(ErrorKind::Validation, "constraint '" + c.id + "' of '" + kb->name +
                                               "' refers to context variable '" + *ctx_var +
                                               "' outside its guard");
      bodies.push_back(std::move(body));
    }
  return count_solutions(shared, bodies).count;
}

}  // namespace ckbm
