#include <catch_amalgamated.hpp>

#include <map>

#include "ckbm/bench.hpp"

using namespace ckbm;

TEST_CASE("single cell, single trial", "[bench]") {
  auto rows = run_benchmark({10}, {0.1}, 1, 0);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].kb_id == 1);
  CHECK(rows[0].n_constraints == 10);
  CHECK(rows[0].context_share_pct == 10);
  CHECK(rows[0].trial == 0);
  CHECK(rows[0].checks_phase1 == 10);
  CHECK(rows[0].merge_ms >= 0);
  CHECK(rows[0].solve_ms >= 0);
}

TEST_CASE("grid shape and per-cell invariants", "[bench]") {
  BenchOptions opts;
  opts.sizes = {10, 20, 30};
  opts.shares = {0.1, 0.3, 0.5};
  opts.trials = 4;
  opts.seed = 17;
  opts.count_solutions = true;
  auto rows = run_benchmark(opts);
  REQUIRE(rows.size() == 3 * 3 * 4);

  std::map<std::pair<std::size_t, int>, std::set<std::uint64_t>> counts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BenchRow& r = rows[i];
    CHECK(r.trial == static_cast<int>(i % 4));
    CHECK(r.checks_phase1 == r.n_constraints);
    CHECK(r.checks_phase2 <= r.n_constraints);
    REQUIRE(r.merged_solutions);
    counts[{r.n_constraints, r.context_share_pct}].insert(*r.merged_solutions);
  }
  CHECK(counts.size() == 9);
  for (const auto& [cell, values] : counts) CHECK(values.size() == 1);
}

TEST_CASE("parallel mode yields the same rows apart from timings", "[bench]") {
  BenchOptions opts;
  opts.sizes = {10, 20};
  opts.shares = {0.2, 0.4};
  opts.trials = 2;
  opts.seed = 5;
  opts.count_solutions = true;
  auto serial = run_benchmark(opts);
  opts.parallel = true;
  auto parallel = run_benchmark(opts);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].n_constraints == parallel[i].n_constraints);
    CHECK(serial[i].checks_phase2 == parallel[i].checks_phase2);
    CHECK(serial[i].merged_solutions == parallel[i].merged_solutions);
  }
}

TEST_CASE("trials must be positive", "[bench]") {
  CHECK_THROWS_AS(run_benchmark({10}, {0.1}, 0, 0), Error);
}
