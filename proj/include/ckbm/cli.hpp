#pragma once

// Command-line front end. `run_cli` is the whole program; tools/ckbm.cpp only
// forwards argv and the standard streams.
//
// Exit codes: 0 success, 1 validation/alignment error, 2 inconsistent input,
// 3 I/O or parse error, 4 cap or guard exceeded.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ckbm/bench.hpp"
#include "ckbm/error.hpp"
#include "ckbm/merge.hpp"
#include "ckbm/model.hpp"
#include "ckbm/solver.hpp"
#include "ckbm/synth.hpp"
#include "ckbm/textio.hpp"

namespace ckbm {

enum ExitStatus : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitInconsistent = 2,
  kExitIo = 3,
  kExitLimit = 4,
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InconsistentInput: return kExitInconsistent;
    case ErrorKind::Syntax:
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::SpaceTooLarge: return kExitLimit;
    default: return kExitValidation;
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
}

inline KnowledgeBase load_kb(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_kb(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ":" + e.what());
  }
}

namespace detail {

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return items.empty() ? "-" : out;
}

inline std::string format_report(const MergeResult& merged, std::size_t n_inputs) {
  const MergeReport& r = merged.report;
  std::ostringstream os;
  os << "merged: " << merged.kb.name << '\n'
     << "constraints: " << n_inputs << " in, " << merged.kb.constraints.size() << " out\n"
     << "decontextualized: " << join(r.decontextualized_ids) << '\n'
     << "kept contextualized: " << join(r.kept_contextualized_ids) << '\n'
     << "removed as redundant: " << join(r.removed_redundant_ids) << '\n'
     << "consistency checks: phase1=" << r.checks_phase1 << " phase2=" << r.checks_phase2 << '\n'
     << "elapsed ms: phase1=" << r.elapsed_phase1.count() << " phase2=" << r.elapsed_phase2.count()
     << '\n'
     << "contextualized share: " << r.contextualized_share << '\n';
  return os.str();
}

inline std::string format_json_report(const MergeResult& merged, std::size_t n_inputs) {
  const MergeReport& r = merged.report;
  nlohmann::json j;
  j["merged"] = merged.kb.name;
  j["constraints_in"] = n_inputs;
  j["constraints_out"] = merged.kb.constraints.size();
  j["decontextualized_ids"] = r.decontextualized_ids;
  j["kept_contextualized_ids"] = r.kept_contextualized_ids;
  j["removed_redundant_ids"] = r.removed_redundant_ids;
  j["checks_phase1"] = r.checks_phase1;
  j["checks_phase2"] = r.checks_phase2;
  j["elapsed_phase1_ms"] = r.elapsed_phase1.count();
  j["elapsed_phase2_ms"] = r.elapsed_phase2.count();
  j["contextualized_share"] = r.contextualized_share;
  return j.dump(2) + "\n";
}

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_file(path, text);
}

struct MergeArgs {
  std::vector<std::string> files;
  std::string context_var;
  std::vector<std::string> context_values;
  std::string out_path;
  std::string report_path;
  std::string json_report_path;
};

inline int cmd_merge(const MergeArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<KnowledgeBase> sources;
  for (const auto& f : args.files) sources.push_back(load_kb(f));

  if (!args.context_values.empty() && args.context_values.size() != sources.size())
    throw Error(ErrorKind::Validation, "--context-values needs one value per input file");

  std::string ctx_var = args.context_var;
  if (ctx_var.empty()) {
    if (!sources.front().context)
      throw Error(ErrorKind::Validation,
                  "'" + args.files.front() + "' declares no context; pass --context-var");
    ctx_var = sources.front().context->variable;
  }

  std::vector<KnowledgeBase> contextualized;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const KnowledgeBase& kb = sources[i];
    std::string value;
    if (!args.context_values.empty()) {
      value = args.context_values[i];
      if (kb.context && (kb.context->variable != ctx_var || kb.context->value != value))
        err << "warning: " << args.files[i] << " declares context " << kb.context->variable
            << " = " << kb.context->value << "; using " << ctx_var << " = " << value << '\n';
    } else {
      if (!kb.context || kb.context->variable != ctx_var)
        throw Error(ErrorKind::Validation, "'" + args.files[i] + "' declares no context on '" +
                                               ctx_var + "'; pass --context-values");
      value = kb.context->value;
    }
    if (!is_consistent(kb))
      throw Error(ErrorKind::InconsistentInput,
                  "knowledge base '" + kb.name + "' (" + args.files[i] + ") is inconsistent");
    contextualized.push_back(contextualize(kb, ctx_var, value));
  }

  std::size_t n_inputs = 0;
  for (const auto& kb : contextualized) n_inputs += kb.constraints.size();
  MergeResult merged = ckb_merge_all(contextualized);

  emit(args.out_path, serialize_kb(merged.kb), out);
  if (!args.report_path.empty()) emit(args.report_path, format_report(merged, n_inputs), out);
  if (!args.json_report_path.empty())
    emit(args.json_report_path, format_json_report(merged, n_inputs), out);
  return kExitOk;
}

inline int cmd_count(const std::string& file, std::optional<std::uint64_t> cap,
                     std::ostream& out) {
  CountResult r = count_solutions(load_kb(file), cap);
  if (r.cap_exceeded) {
    out << "cap exceeded: at least " << r.count << " solutions\n";
    return kExitLimit;
  }
  out << r.count << '\n';
  return kExitOk;
}

inline int cmd_check(const std::string& file, std::ostream& out) {
  out << (is_consistent(load_kb(file)) ? "consistent" : "inconsistent") << '\n';
  return kExitOk;
}

inline int cmd_solve(const std::string& file, std::uint64_t limit, std::ostream& out) {
  KnowledgeBase kb = load_kb(file);
  auto formulas = kb.formulas();
  for (const auto& a : enumerate_solutions(kb.variables, formulas, limit)) {
    for (std::size_t i = 0; i < kb.variables.size(); ++i)
      out << (i ? " " : "") << kb.variables[i].name << '=' << a.at(kb.variables[i].name);
    out << '\n';
  }
  return kExitOk;
}

inline int cmd_intersect(const std::string& file1, const std::string& file2,
                         const std::string& context_var, std::ostream& out) {
  KnowledgeBase kb1 = load_kb(file1);
  KnowledgeBase kb2 = load_kb(file2);
  std::optional<std::string> ctx;
  if (!context_var.empty()) ctx = context_var;
  out << intersection_count(kb1, kb2, ctx) << '\n';
  return kExitOk;
}

inline int cmd_synth(const SynthConfig& cfg, const std::string& out1, const std::string& out2) {
  SynthPair pair = synthesize_pair(cfg);
  std::ostringstream header;
  header << "# synthesized: seed " << cfg.seed << ", " << cfg.n_constraints
         << " constraints, share " << cfg.context_share << ", " << cfg.n_vars << " vars, domain "
         << cfg.domain_size << '\n';
  write_file(out1, header.str() + serialize_kb(pair.first));
  write_file(out2, header.str() + serialize_kb(pair.second));
  return kExitOk;
}

inline int cmd_bench(const BenchOptions& opts, const std::string& out_path, std::ostream& out) {
  auto rows = run_benchmark(opts);
  emit(out_path, write_bench_csv(rows), out);
  return kExitOk;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consistency-based merging of configuration knowledge bases"};
  app.require_subcommand(1);

  detail::MergeArgs merge_args;
  auto* merge = app.add_subcommand("merge", "Merge knowledge bases into one redundancy-free KB");
  merge->add_option("files", merge_args.files, "Input KB files")->required()->expected(2, -1);
  merge->add_option("--context-var", merge_args.context_var,
                    "Context variable (default: the first file's context declaration)");
  merge->add_option("--context-values", merge_args.context_values,
                    "One context value per file, overriding the files' declarations")
      ->delimiter(',');
  merge->add_option("-o,--out", merge_args.out_path, "Merged KB output (default: stdout)");
  merge->add_option("--report", merge_args.report_path, "Write a text merge report ('-' = stdout)");
  merge->add_option("--json-report", merge_args.json_report_path,
                    "Write a JSON merge report ('-' = stdout)");

  std::string file, file2, context_var;
  std::optional<std::uint64_t> cap;
  std::uint64_t limit = 10;

  auto* count = app.add_subcommand("count", "Count solutions of a KB");
  count->add_option("file", file)->required();
  count->add_option("--cap", cap, "Stop once the count exceeds this value");

  auto* check = app.add_subcommand("check", "Check a KB for consistency");
  check->add_option("file", file)->required();

  auto* solve = app.add_subcommand("solve", "Print solutions of a KB");
  solve->add_option("file", file)->required();
  solve->add_option("--limit", limit, "Maximum number of solutions")->capture_default_str();

  auto* intersect = app.add_subcommand("intersect", "Count common solutions of two KBs");
  intersect->add_option("file1", file)->required();
  intersect->add_option("file2", file2)->required();
  intersect->add_option("--context-var", context_var, "Context variable to project away");

  SynthConfig synth_cfg;
  std::string synth_out1, synth_out2;
  auto* synth = app.add_subcommand("synth", "Generate a random source KB pair");
  synth->add_option("out1", synth_out1, "First KB file")->required();
  synth->add_option("out2", synth_out2, "Second KB file")->required();
  synth->add_option("--constraints", synth_cfg.n_constraints, "Total constraints over both KBs")
      ->capture_default_str();
  synth->add_option("--share", synth_cfg.context_share, "Share of source-unique constraints")
      ->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed)->capture_default_str();
  synth->add_option("--vars", synth_cfg.n_vars)->capture_default_str();
  synth->add_option("--domain", synth_cfg.domain_size)->capture_default_str();

  BenchOptions bench_opts;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Run the merge benchmark grid, write CSV");
  bench->add_option("--sizes", bench_opts.sizes)->delimiter(',')->capture_default_str();
  bench->add_option("--shares", bench_opts.shares)->delimiter(',')->capture_default_str();
  bench->add_option("--trials", bench_opts.trials)->capture_default_str();
  bench->add_option("--seed", bench_opts.seed)->capture_default_str();
  bench->add_option("--vars", bench_opts.n_vars)->capture_default_str();
  bench->add_option("--domain", bench_opts.domain_size)->capture_default_str();
  bench->add_option("--out", bench_out, "CSV output (default: stdout)");
  bench->add_flag("--parallel", bench_opts.parallel, "Run grid cells concurrently (timings unreliable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*merge) return detail::cmd_merge(merge_args, out, err);
    if (*count) return detail::cmd_count(file, cap, out);
    if (*check) return detail::cmd_check(file, out);
    if (*solve) return detail::cmd_solve(file, limit, out);
    if (*intersect) return detail::cmd_intersect(file, file2, context_var, out);
    if (*synth) return detail::cmd_synth(synth_cfg, synth_out1, synth_out2);
    if (*bench) return detail::cmd_bench(bench_opts, bench_out, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  }
  return kExitValidation;
}

}  // namespace ckbm
