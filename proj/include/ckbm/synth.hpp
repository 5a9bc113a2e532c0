#pragma once

// Seeded generation of consistent source knowledge base pairs for the merge
// benchmark. A pair shares some constraints verbatim (these decontextualize
// and one copy is later dropped as redundant) and carries some constraints
// unique to one source (these tend to stay guarded).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ckbm/error.hpp"
#include "ckbm/model.hpp"
#include "ckbm/solver.hpp"

namespace ckbm {

struct SynthConfig {
  std::size_t n_vars = 10;
  std::size_t domain_size = 4;
  /// Total constraints over both sources (|CKB'|).
  std::size_t n_constraints = 10;
  /// Fraction of the constraints that are source-unique.
  double context_share = 0.0;
  std::uint64_t seed = 0;

  double bare_atom_probability = 0.1;
  int max_retries = 100;
};

struct SynthPair {
  KnowledgeBase first;
  KnowledgeBase second;
};

inline constexpr const char* kSynthContextVar = "ctx";
inline constexpr const char* kSynthContextA = "ctxA";
inline constexpr const char* kSynthContextB = "ctxB";

/// How the constraint budget is split: `shared` formulas appear in both
/// sources, so |CKB'| = 2 * shared + unique_first + unique_second.
struct SynthSplit {
  std::size_t shared = 0;
  std::size_t unique_first = 0;
  std::size_t unique_second = 0;
};

inline SynthSplit synth_split(const SynthConfig& cfg) {
  auto unique = static_cast<std::size_t>(std::llround(cfg.context_share * cfg.n_constraints));
  SynthSplit split;
  split.unique_first = (unique + 1) / 2;
  split.unique_second = unique / 2;
  std::size_t rest = cfg.n_constraints - unique;
  split.shared = rest / 2;
  if (rest % 2) ++split.unique_first;
  return split;
}

namespace detail {

class SynthGenerator {
 public:
  explicit SynthGenerator(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    for (std::size_t i = 0; i < cfg.n_vars; ++i) {
      Variable v{"v" + std::to_string(i), {}};
      for (std::size_t d = 0; d < cfg.domain_size; ++d) v.domain.push_back("d" + std::to_string(d));
      variables_.push_back(std::move(v));
    }
  }

  SynthPair generate() {
    SynthSplit split = synth_split(cfg_);
    std::vector<Formula> shared = sample_consistent({}, split.shared, "shared constraints");
    return {make_source("synthA", kSynthContextA, "a", shared, split.unique_first),
            make_source("synthB", kSynthContextB, "b", shared, split.unique_second)};
  }

 private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  // `v1 = a -> v2 != b` with v1 != v2, or occasionally a bare `v != a`.
  Formula random_constraint() {
    if (std::bernoulli_distribution(cfg_.bare_atom_probability)(rng_)) {
      const Variable& v = variables_[pick(variables_.size())];
      return Formula::atom(v.name, CmpOp::Neq, v.domain[pick(v.domain.size())]);
    }
    std::size_t first = pick(variables_.size());
    std::size_t second = pick(variables_.size() - 1);
    if (second >= first) ++second;
    const Variable& v1 = variables_[first];
    const Variable& v2 = variables_[second];
    return Formula::implication(Formula::atom(v1.name, CmpOp::Eq, v1.domain[pick(v1.domain.size())]),
                                Formula::atom(v2.name, CmpOp::Neq, v2.domain[pick(v2.domain.size())]));
  }

  /// `count` fresh constraints that are consistent together with `base`.
  std::vector<Formula> sample_consistent(const std::vector<Formula>& base, std::size_t count,
                                         const std::string& what) {
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      std::vector<Formula> extra;
      for (std::size_t i = 0; i < count; ++i) extra.push_back(random_constraint());
      std::vector<Formula> all = base;
      all.insert(all.end(), extra.begin(), extra.end());
      if (count == 0 || is_consistent(variables_, all)) return extra;
    }
    throw Error(ErrorKind::GenerationFailed, "no consistent sample of " + what + " after " +
                                                 std::to_string(cfg_.max_retries) + " retries");
  }

  KnowledgeBase make_source(const std::string& name, const std::string& ctx_value,
                            const std::string& suffix, const std::vector<Formula>& shared,
                            std::size_t unique) {
    std::vector<Formula> own = sample_consistent(shared, unique, "constraints for " + name);
    KnowledgeBase kb;
    kb.name = name;
    kb.context = Context{kSynthContextVar, ctx_value};
    kb.variables.push_back(Variable{kSynthContextVar, {ctx_value}});
    kb.variables.insert(kb.variables.end(), variables_.begin(), variables_.end());
    for (std::size_t i = 0; i < shared.size(); ++i)
      kb.constraints.push_back({"s" + std::to_string(i) + suffix, shared[i], name, false});
    for (std::size_t i = 0; i < own.size(); ++i)
      kb.constraints.push_back({"u" + std::to_string(i) + suffix, own[i], name, false});
    std::shuffle(kb.constraints.begin(), kb.constraints.end(), rng_);
    return kb;
  }

  SynthConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<Variable> variables_;
};

}  // namespace detail

inline void validate_config(const SynthConfig& cfg) {
  if (cfg.n_constraints < 1)
    throw Error(ErrorKind::Validation, "n_constraints must be at least 1");
  if (!(cfg.context_share >= 0.0 && cfg.context_share <= 1.0))
    throw Error(ErrorKind::Validation, "context_share must lie in [0, 1]");
  if (cfg.n_vars < 2) throw Error(ErrorKind::Validation, "n_vars must be at least 2");
  if (cfg.domain_size < 2) throw Error(ErrorKind::Validation, "domain_size must be at least 2");
  if (cfg.max_retries < 0) throw Error(ErrorKind::Validation, "max_retries must not be negative");
}

/// Two consistent, uncontextualized source KBs over variables v0..v{n-1}
/// (values d0..d{k-1}) plus the context variable `ctx`, declared with
/// contexts ctxA and ctxB. Fully determined by `cfg`.
inline SynthPair synthesize_pair(const SynthConfig& cfg) {
  validate_config(cfg);
  return detail::SynthGenerator(cfg).generate();
}

}  // namespace ckbm
