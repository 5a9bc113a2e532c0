#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "ckbm/cli.hpp"
#include "support/random_kb.hpp"

using namespace ckbm;
using ckbm::testing::model_path;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ckbm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("ckbm_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
             std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string with_color(const std::string& text, const std::string& domain) {
  std::string out = text;
  auto pos = out.find("var color : { white, black };");
  out.replace(pos, std::string("var color : { white, black };").size(), "var color : { " + domain + " };");
  return out;
}

}  // namespace

TEST_CASE("count, check and intersect on the car fixtures", "[cli]") {
  CHECK(run({"count", model_path("car_us.kb")}).out == "288\n");
  CHECK(run({"count", model_path("car_ger.kb")}).out == "324\n");
  CHECK(run({"count", model_path("car_union.kb")}).out == "612\n");
  CHECK(run({"intersect", model_path("car_us.kb"), model_path("car_ger.kb")}).out == "126\n");

  Run check = run({"check", model_path("inconsistent.kb")});
  CHECK(check.code == kExitOk);
  CHECK(check.out == "inconsistent\n");
  CHECK(run({"check", model_path("car_us.kb")}).out == "consistent\n");
}

TEST_CASE("count with a cap", "[cli]") {
  Run capped = run({"count", model_path("car_us.kb"), "--cap", "10"});
  CHECK(capped.code == kExitLimit);
  CHECK(capped.out.rfind("cap exceeded", 0) == 0);
  CHECK(run({"count", model_path("car_us.kb"), "--cap", "1000"}).out == "288\n");
}

TEST_CASE("solve prints var=value lines", "[cli]") {
  Run r = run({"solve", model_path("car_us.kb"), "--limit", "3"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.substr(0, r.out.find('\n')) ==
        "country=US type=combi color=white engine=l1 couplingdev=yes fuel=gas service=k15");
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
}

TEST_CASE("merge the car fixtures", "[cli][merge]") {
  TempDir dir;
  std::string merged_path = dir.file("merged.kb");
  std::string report_path = dir.file("report.txt");
  std::string json_path = dir.file("report.json");
  Run r = run({"merge", model_path("car_us.kb"), model_path("car_ger.kb"), "-o", merged_path,
               "--report", report_path, "--json-report", json_path});
  REQUIRE(r.code == kExitOk);

  KnowledgeBase merged = load_kb(merged_path);
  CHECK(merged.constraints.size() == 5);
  CHECK(count_solutions(merged).count == 612);
  CHECK(run({"count", merged_path}).out == "612\n");

  std::string report = read_file(report_path);
  CHECK(report.find("decontextualized: c2us, c2ger") != std::string::npos);
  CHECK(report.find("removed as redundant: c2us") != std::string::npos);
  CHECK(report.find("consistency checks: phase1=6 phase2=6") != std::string::npos);

  auto json = nlohmann::json::parse(read_file(json_path));
  CHECK(json["constraints_out"] == 5);
  CHECK(json["removed_redundant_ids"].size() == 1);
  CHECK(json["checks_phase1"] == 6);
}

TEST_CASE("merge to stdout with explicit contexts", "[cli][merge]") {
  Run r = run({"merge", model_path("car_us.kb"), model_path("car_ger.kb"), "--context-var", "country",
               "--context-values", "US,GER"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.err.empty());
  CHECK(r.out.find("var country : { US, GER };") != std::string::npos);
}

TEST_CASE("merge error paths", "[cli][merge]") {
  TempDir dir;

  SECTION("inconsistent input names the KB") {
    Run r = run({"merge", model_path("inconsistent.kb"), model_path("car_us.kb"), "--context-var",
                 "country", "--context-values", "X,US"});
    CHECK(r.code == kExitInconsistent);
    CHECK(r.err.find("contradiction") != std::string::npos);
  }

  SECTION("mismatched color domains") {
    std::string ger = dir.file("ger_red.kb");
    write_file(ger, with_color(read_file(model_path("car_ger.kb")), "white, black, red"));
    Run r = run({"merge", model_path("car_us.kb"), ger});
    CHECK(r.code == kExitValidation);
    CHECK(r.err.find("color") != std::string::npos);
  }

  SECTION("missing file") {
    CHECK(run({"merge", model_path("car_us.kb"), dir.file("nope.kb")}).code == kExitIo);
  }

  SECTION("syntax error") {
    std::string broken = dir.file("broken.kb");
    write_file(broken, "kb \"b\" { var x : { a } }");
    Run r = run({"count", broken});
    CHECK(r.code == kExitIo);
    CHECK(r.err.find("1:") != std::string::npos);
  }

  SECTION("out-of-domain value") {
    std::string bad = dir.file("bad.kb");
    write_file(bad, "kb \"b\" { var x : { a }; constraint c: x = q; }");
    CHECK(run({"count", bad}).code == kExitValidation);
  }

  SECTION("context override warns") {
    Run r = run({"merge", model_path("car_us.kb"), model_path("car_ger.kb"), "--context-values",
                 "US,DE"});
    CHECK(r.code == kExitValidation);  // DE is not in the declared country domain
    CHECK(r.err.find("warning") != std::string::npos);
  }

  SECTION("usage error") {
    CHECK(run({"merge", model_path("car_us.kb")}).code == kExitValidation);
    CHECK(run({}).code == kExitValidation);
  }
}

TEST_CASE("intersect with an empty-constraint KB", "[cli]") {
  TempDir dir;
  std::string empty = dir.file("empty.kb");
  KnowledgeBase ger = load_kb(model_path("car_ger.kb"));
  ger.constraints.clear();
  write_file(empty, serialize_kb(ger));
  // 288 solutions of the U.S. KB, projected away from the singleton country.
  CHECK(run({"intersect", model_path("car_us.kb"), empty}).out == "288\n");
}

TEST_CASE("intersect agrees with the oracle on random pairs", "[cli][oracle]") {
  TempDir dir;
  std::mt19937_64 rng(8);
  for (int round = 0; round < 20; ++round) {
    auto [a, b] = testing::random_source_pair(rng, 4, 3, 4);
    write_file(dir.file("a.kb"), serialize_kb(a));
    write_file(dir.file("b.kb"), serialize_kb(b));
    std::vector<Variable> shared(a.variables.begin() + 1, a.variables.end());
    std::vector<Formula> bodies = a.formulas();
    for (const auto& f : b.formulas()) bodies.push_back(f);
    CHECK(run({"intersect", dir.file("a.kb"), dir.file("b.kb")}).out ==
          std::to_string(brute_force_solutions(shared, bodies).size()) + "\n");
  }
}

TEST_CASE("synth writes a mergeable pair", "[cli][synth]") {
  TempDir dir;
  std::string a = dir.file("a.kb"), b = dir.file("b.kb");
  Run r = run({"synth", a, b, "--constraints", "12", "--share", "0.5", "--seed", "9", "--vars", "5"});
  REQUIRE(r.code == kExitOk);
  CHECK(read_file(a).rfind("# synthesized: seed 9", 0) == 0);
  KnowledgeBase ka = load_kb(a), kb = load_kb(b);
  CHECK(ka.constraints.size() + kb.constraints.size() == 12);

  std::string merged = dir.file("m.kb");
  REQUIRE(run({"merge", a, b, "-o", merged}).code == kExitOk);
  std::uint64_t union_count = count_solutions(contextualize(ka, "ctx", "ctxA")).count +
                              count_solutions(contextualize(kb, "ctx", "ctxB")).count;
  CHECK(run({"count", merged}).out == std::to_string(union_count) + "\n");
}

TEST_CASE("bench writes CSV", "[cli][bench]") {
  TempDir dir;
  std::string csv = dir.file("bench.csv");
  Run r = run({"bench", "--sizes", "10,20", "--shares", "0.1,0.5", "--trials", "2", "--out", csv});
  REQUIRE(r.code == kExitOk);
  std::string text = read_file(csv);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 2 * 2);
  CHECK(text.rfind("kb_id,n_constraints,context_share_pct,trial,", 0) == 0);
}
