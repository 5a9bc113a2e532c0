#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace ckbm {

/// One timed merge of one benchmark grid cell.
struct BenchRow {
  int kb_id = 0;
  std::size_t n_constraints = 0;
  int context_share_pct = 0;
  int trial = 0;
  std::int64_t merge_ms = 0;
  std::int64_t solve_ms = 0;
  std::size_t checks_phase1 = 0;
  std::size_t checks_phase2 = 0;

  // Not part of the CSV.
  double achieved_share = 0.0;
  std::optional<std::uint64_t> merged_solutions;
};

}  // namespace ckbm
