#pragma once

// Experiment grid: knowledge base sizes x contextualization shares x trials.
// One pair is synthesized per cell; every trial reorders the constraints of
// both sources at random, times the merge and then a consistency check of the
// merged result.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ckbm/bench_row.hpp"
#include "ckbm/error.hpp"
#include "ckbm/merge.hpp"
#include "ckbm/solver.hpp"
#include "ckbm/synth.hpp"

namespace ckbm {

struct BenchOptions {
  std::vector<std::size_t> sizes{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<double> shares{0.1, 0.2, 0.3, 0.4, 0.5};
  int trials = 10;
  std::uint64_t seed = 0;
  std::size_t n_vars = 10;
  std::size_t domain_size = 4;
  /// Also count the merged KB's solutions per trial (untimed, slower).
  bool count_solutions = false;
  /// Run grid cells concurrently. Timings are then not trustworthy.
  bool parallel = false;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::int64_t whole_ms(std::chrono::steady_clock::duration d) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(d).count();
}

inline std::vector<BenchRow> run_cell(const BenchOptions& opts, std::size_t size_index,
                                      std::size_t share_index) {
  const std::size_t size = opts.sizes[size_index];
  const double share = opts.shares[share_index];
  const std::uint64_t cell_seed =
      splitmix64(opts.seed ^ splitmix64(size_index * 1000 + share_index));

  SynthConfig cfg;
  cfg.n_vars = opts.n_vars;
  cfg.domain_size = opts.domain_size;
  cfg.n_constraints = size;
  cfg.context_share = share;
  cfg.seed = cell_seed;
  SynthPair pair = synthesize_pair(cfg);
  KnowledgeBase first = contextualize(pair.first, kSynthContextVar, kSynthContextA);
  KnowledgeBase second = contextualize(pair.second, kSynthContextVar, kSynthContextB);

  std::vector<BenchRow> rows;
  for (int trial = 0; trial < opts.trials; ++trial) {
    std::mt19937_64 rng(splitmix64(cell_seed + static_cast<std::uint64_t>(trial) + 1));
    std::shuffle(first.constraints.begin(), first.constraints.end(), rng);
    std::shuffle(second.constraints.begin(), second.constraints.end(), rng);

    auto merge_start = std::chrono::steady_clock::now();
    MergeResult merged = ckb_merge(first, second);
    auto merge_end = std::chrono::steady_clock::now();
    ConsistencyResult solved = is_consistent(merged.kb);
    auto solve_end = std::chrono::steady_clock::now();
    if (!solved.consistent)
      throw std::logic_error("merged knowledge base is inconsistent");

    BenchRow row;
    row.kb_id = static_cast<int>(size_index) + 1;
    row.n_constraints = size;
    row.context_share_pct = static_cast<int>(std::lround(share * 100.0));
    row.trial = trial;
    row.merge_ms = whole_ms(merge_end - merge_start);
    row.solve_ms = whole_ms(solve_end - merge_end);
    row.checks_phase1 = merged.report.checks_phase1;
    row.checks_phase2 = merged.report.checks_phase2;
    row.achieved_share = merged.report.contextualized_share;
    if (row.checks_phase1 != size)
      throw std::logic_error("phase-1 check count " + std::to_string(row.checks_phase1) +
                             " differs from |CKB'| = " + std::to_string(size));
    if (opts.count_solutions) row.merged_solutions = count_solutions(merged.kb).count;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

/// One row per (size, share, trial), ordered by size, then share, then trial.
inline std::vector<BenchRow> run_benchmark(const BenchOptions& opts) {
  if (opts.trials < 1) throw Error(ErrorKind::Validation, "trials must be at least 1");

  auto cell = [&](std::size_t si, std::size_t hi) {
    try {
      return detail::run_cell(opts, si, hi);
    } catch (const Error& e) {
      throw Error(e.kind(), "cell (size " + std::to_string(opts.sizes[si]) + ", share " +
                                std::to_string(opts.shares[hi]) + "): " + e.what());
    }
  };

  std::vector<BenchRow> rows;
  if (opts.parallel) {
    std::vector<std::future<std::vector<BenchRow>>> jobs;
    for (std::size_t si = 0; si < opts.sizes.size(); ++si)
      for (std::size_t hi = 0; hi < opts.shares.size(); ++hi)
        jobs.push_back(std::async(std::launch::async, cell, si, hi));
    for (auto& job : jobs) {
      auto part = job.get();
      rows.insert(rows.end(), part.begin(), part.end());
    }
  } else {
    for (std::size_t si = 0; si < opts.sizes.size(); ++si)
      for (std::size_t hi = 0; hi < opts.shares.size(); ++hi) {
        auto part = cell(si, hi);
        rows.insert(rows.end(), part.begin(), part.end());
      }
  }
  return rows;
}

inline std::vector<BenchRow> run_benchmark(std::vector<std::size_t> sizes,
                                           std::vector<double> shares, int trials,
                                           std::uint64_t seed) {
  BenchOptions opts;
  opts.sizes = std::move(sizes);
  opts.shares = std::move(shares);
  opts.trials = trials;
  opts.seed = seed;
  return run_benchmark(opts);
}

}  // namespace ckbm
