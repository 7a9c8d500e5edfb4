#include "commands.hpp"
#include "config.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace oslab;
using namespace oslab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("oslab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string error_path(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

const char* kPairConfig = R"({
  "grid": {"d": 1, "L": 1.0, "N": 1024},
  "schedules": {"eps": {"kind": "power", "scale": 1.0, "exponent": -1.0}},
  "families": {"wave": {"kind": "oscillation", "profile": {"kind": "constant"}, "wavevector": [1.0], "scale": "eps"}},
  "symbols": {"psi": {"family": "rational", "alpha": [0], "l": 0, "m": 1}},
  "tests": {"phi": {"kind": "bump", "radius": 0.3}},
  "pair": {"cases": [{"name": "c_one", "u": "wave", "v": "dual", "omega": "eps", "phi": "phi", "symbol": "psi", "n": [1, 2, 4, 8, 16, 32]}]}
})";

}  // namespace

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("schema errors name the offending field") {
  CHECK(error_path([] { Config::parse(R"({"grid": {"d": 1, "L": 1, "N": 100}})").grid(); }) == "grid.N");
  CHECK(error_path([] { Config::parse(R"({"grid": {"d": 4, "L": 1, "N": 64}})").grid(); }) == "grid.d");
  CHECK(error_path([] { Config::parse(R"({"grid": {"d": 1, "L": 1, "N": 64, "M": 3}})").grid(); }) == "grid.M");
  const Config c = Config::parse(R"({
    "grid": {"d": 1, "L": 1, "N": 64},
    "schedules": {"bad": {"kind": "power", "exponent": "x"}},
    "symbols": {"r": {"family": "rational", "alpha": [0, 1], "l": 0, "m": 1}},
    "x": {"ref": "nowhere", "sym": "r", "sched": "bad", "fam": {"kind": "spiral"}}
  })");
  const Node x = c.section("x");
  CHECK(error_path([&] { c.schedule(x.at("ref")); }) == "x.ref");
  CHECK(error_path([&] { c.symbol(x.at("sym")); }) == "symbols.r.alpha");
  CHECK(error_path([&] { c.schedule(x.at("sched")); }) == "schedules.bad.exponent");
  CHECK(error_path([&] { c.family(x.at("fam")); }) == "x.fam.kind");
  CHECK(error_path([&] { c.section("missing"); }) == "missing");
  CHECK_THROWS_AS(Config::parse("{ not json"), ConfigError);
}

TEST_CASE("configured objects match their direct construction") {
  const Config c = Config::parse(kPairConfig);
  const Grid g = c.grid();
  CHECK(g == Grid(1, 1.0, 1024));
  const SequenceFamily f = c.family(c.section("families").at("wave"));
  CHECK(sup_norm(term(f, 4, g) - term(SequenceFamily::oscillation(Profile::constant(), Point::Ones(1),
                                                                  Schedule::power(1.0, -1.0), 2.0),
                                      4, g)) == 0.0);
  Freq xi(1);
  xi << 3.0;
  CHECK(c.symbol(c.section("symbols").at("psi"))(xi) == Complex(0.25));
  CHECK(c.n_schedule(Config::parse(R"({"n": {"dyadic": 3}})").section("n")) == std::vector<long long>{1, 2, 4, 8});
}

TEST_CASE("a run writes manifest, summary and traces") {
  const fs::path dir = scratch_dir("run");
  RunOptions opt;
  opt.subcommand = "pair";
  opt.config = write_config(dir, kPairConfig);
  opt.out = dir / "out";
  std::ostringstream log;
  CHECK(run(opt, log) == kExitOk);
  CHECK(fs::exists(opt.out / "manifest.json"));
  CHECK(fs::exists(opt.out / "summary.json"));
  CHECK(fs::exists(opt.out / "traces" / "pair_c_one.csv"));
  const json manifest = json::parse(slurp(opt.out / "manifest.json"));
  CHECK(manifest["config_hash"] == "fnv1a64:" + fnv1a_hex(kPairConfig));
  CHECK(manifest["version"] == kVersion);
  const json summary = json::parse(slurp(opt.out / "summary.json"));
  CHECK(summary["status"] == "pass");

  SUBCASE("identical inputs give byte-identical traces") {
    RunOptions again = opt;
    again.out = dir / "again";
    again.jobs = 3;
    std::ostringstream log2;
    CHECK(run(again, log2) == kExitOk);
    CHECK(slurp(opt.out / "traces" / "pair_c_one.csv") == slurp(again.out / "traces" / "pair_c_one.csv"));
  }
  SUBCASE("report reads the summary back") {
    RunOptions rep;
    rep.subcommand = "report";
    rep.config = opt.out;
    rep.out.clear();
    std::ostringstream out;
    CHECK(run(rep, out) == kExitOk);
    CHECK(out.str().find("[PASS] c_one") != std::string::npos);
  }
}

TEST_CASE("a numerical guard failure is a failed check, not a crash") {
  const fs::path dir = scratch_dir("guard");
  std::string text = kPairConfig;
  text.replace(text.find("[1, 2, 4, 8, 16, 32]"), 20, "[1, 2, 4, 8, 1024]");
  RunOptions opt;
  opt.subcommand = "pair";
  opt.config = write_config(dir, text);
  opt.out = dir / "out";
  std::ostringstream log;
  CHECK(run(opt, log) == kExitCheckFailed);
  CHECK(log.str().find("under-resolved") != std::string::npos);
}
