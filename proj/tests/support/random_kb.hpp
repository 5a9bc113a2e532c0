#pragma once

// Random variables, formulas and source KB pairs for property tests.

#include <random>
#include <string>
#include <vector>

#include "ckbm/model.hpp"
#include "ckbm/solver.hpp"

namespace ckbm::testing {

#ifdef CKBM_MODELS_DIR
inline std::string model_path(const std::string& name) {
  return std::string(CKBM_MODELS_DIR) + "/" + name;
}
#endif

inline std::vector<Variable> random_variables(std::mt19937_64& rng, int max_vars, int max_domain) {
  std::uniform_int_distribution<int> n_vars(1, max_vars);
  std::uniform_int_distribution<int> dom(1, max_domain);
  std::vector<Variable> vars;
  int n = n_vars(rng);
  for (int i = 0; i < n; ++i) {
    Variable v{"x" + std::to_string(i), {}};
    int d = dom(rng);
    for (int k = 0; k < d; ++k) v.domain.push_back("a" + std::to_string(k));
    vars.push_back(std::move(v));
  }
  return vars;
}

inline Formula random_formula(std::mt19937_64& rng, const std::vector<Variable>& vars, int depth) {
  std::uniform_int_distribution<int> kind(0, depth <= 0 ? 0 : 5);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  switch (kind(rng)) {
    case 0:
    case 1: {
      const Variable& v = vars[pick(vars.size())];
      return Formula::atom(v.name, pick(2) ? CmpOp::Eq : CmpOp::Neq, v.domain[pick(v.domain.size())]);
    }
    case 2: return Formula::negation(random_formula(rng, vars, depth - 1));
    case 3:
      return Formula::conjunction(random_formula(rng, vars, depth - 1),
                                  random_formula(rng, vars, depth - 1));
    case 4:
      return Formula::disjunction(random_formula(rng, vars, depth - 1),
                                  random_formula(rng, vars, depth - 1));
    default:
      return Formula::implication(random_formula(rng, vars, depth - 1),
                                  random_formula(rng, vars, depth - 1));
  }
}

inline std::vector<Formula> random_formulas(std::mt19937_64& rng, const std::vector<Variable>& vars,
                                            int max_count, int depth) {
  std::uniform_int_distribution<int> n(0, max_count);
  std::vector<Formula> out;
  int count = n(rng);
  for (int i = 0; i < count; ++i) out.push_back(random_formula(rng, vars, depth));
  return out;
}

/// A consistent source KB over `vars` plus a singleton context variable.
inline KnowledgeBase random_source(std::mt19937_64& rng, const std::vector<Variable>& vars,
                                   const std::string& name, const std::string& ctx_value,
                                   int max_constraints) {
  for (;;) {
    auto formulas = random_formulas(rng, vars, max_constraints, 2);
    if (!is_consistent(vars, formulas)) continue;
    KnowledgeBase kb;
    kb.name = name;
    kb.context = Context{"ctx", ctx_value};
    kb.variables.push_back(Variable{"ctx", {ctx_value}});
    kb.variables.insert(kb.variables.end(), vars.begin(), vars.end());
    for (std::size_t i = 0; i < formulas.size(); ++i)
      kb.constraints.push_back({"c" + std::to_string(i), formulas[i], name, false});
    return kb;
  }
}

/// Pairs often share constraints verbatim so that decontextualization and
/// redundancy removal actually fire.
inline std::pair<KnowledgeBase, KnowledgeBase> random_source_pair(std::mt19937_64& rng,
                                                                  int max_vars, int max_domain,
                                                                  int max_constraints) {
  auto vars = random_variables(rng, max_vars, max_domain);
  KnowledgeBase a = random_source(rng, vars, "A", "ctxA", max_constraints);
  KnowledgeBase b = random_source(rng, vars, "B", "ctxB", max_constraints);
  std::bernoulli_distribution copy(0.5);
  for (const auto& c : a.constraints)
    if (b.constraints.size() < static_cast<std::size_t>(max_constraints) && copy(rng)) {
      std::vector<Formula> trial = b.formulas();
      trial.push_back(c.formula);
      if (is_consistent(b.variables, trial))
        b.constraints.push_back({"d" + std::to_string(b.constraints.size()), c.formula, "B", false});
    }
  return {std::move(a), std::move(b)};
}

}  // namespace ckbm::testing
