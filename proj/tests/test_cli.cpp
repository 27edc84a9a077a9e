#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bpulab/errors.hpp"
#include "bpulab/experiments.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bpulab;
using namespace bpulab::cli;
namespace fs = std::filesystem;

namespace {

struct ScratchDir {
  fs::path path = fs::temp_directory_path() / ("bpulab_cli_" + std::to_string(::getpid()));
  ScratchDir() { fs::create_directories(path); }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path scratch() {
  static const ScratchDir dir;
  return dir.path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

int lab(const std::string& args) {
  const std::string cmd = std::string(BPU_LAB_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

json parse(const char* text) { return json::parse(text); }

}  // namespace

TEST_CASE("fractions are reduced and validated") {
  CHECK(parse_fraction("1/2") == std::pair{1, 2});
  CHECK(parse_fraction("2/6") == std::pair{1, 3});
  CHECK(parse_fraction("5/64") == std::pair{5, 64});
  for (const char* bad : {"1/0", "3/2", "2/2", "0/5", "a/b", "1", "-1/2", "1/65", "1/ 2", "", "/3", "1/2/3"})
    CHECK_THROWS_AS(parse_fraction(bad), ConfigError);

  testsupport::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int r = rng.integer(2, 64);
    const int p = rng.integer(1, r - 1);
    const int g = rng.integer(1, 9);
    const auto [pp, rr] = parse_fraction(std::to_string(g * p) + "/" + std::to_string(g * r));
    CHECK(std::gcd(pp, rr) == 1);
    CHECK(pp * r == p * rr);
  }
}

TEST_CASE("config validation") {
  const auto cfg = parse_config(parse(R"({"experiment": "norm-sweep"})"));
  CHECK(cfg.kind == ExperimentKind::NormSweep);
  CHECK(cfg.r == 2);
  CHECK(cfg.nodes == 512);
  CHECK(cfg.l_max == 40);
  CHECK(cfg.profile_level == 80);
  CHECK(parse_config(parse(R"({"experiment": "profile", "c": "1/3"})")).profile_level == 78);

  const auto full = parse_config(parse(R"({
    "experiment": "theorem-check", "c": "2/6", "N": 256, "l_max": 30, "m": 2, "fit_step": 0.5,
    "half_weight": [{"m": 0, "cos": 1}, {"m": 1, "cos": 0.2}],
    "tangents": [{"f": [{"m": 2, "cos": 1}]}, {"g": [{"m": 1, "sin": 1}]}],
    "pairs": [[0, 1]], "levels": [3, 6], "seed": 9, "random_tangents": 4,
    "tolerances": {"theorem_rel": 0.05}, "output": "out/x"})"));
  CHECK(full.p == 1);
  CHECK(full.r == 3);
  CHECK(full.nodes == 256);
  CHECK(full.terms == 2);
  CHECK(full.fit_step == 0.5);
  CHECK(full.half_weight.size() == 2);
  CHECK(full.tangents.size() == 2);
  CHECK(full.tangents[1].g[0].sin == 1.0);
  CHECK(full.pairs == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(full.tol.theorem_rel == 0.05);
  CHECK(full.tol.norm_rel == 0.01);
  CHECK(full.seed == 9);

  const char* invalid[] = {
      R"([])",
      R"({})",
      R"({"experiment": "unknown"})",
      R"({"experiment": "norm-sweep", "c": "1/0"})",
      R"({"experiment": "norm-sweep", "c": 0.5})",
      R"({"experiment": "norm-sweep", "N": 96})",
      R"({"experiment": "norm-sweep", "N": 32})",
      R"({"experiment": "norm-sweep", "N": 512.5})",
      R"({"experiment": "norm-sweep", "l_max": 5})",
      R"({"experiment": "norm-sweep", "m": 0})",
      R"({"experiment": "norm-sweep", "tolerances": {"norm_rel": -1}})",
      R"({"experiment": "norm-sweep", "tolerances": {"norm_rel": 0}})",
      R"({"experiment": "norm-sweep", "tolerances": {"speed": 1}})",
      R"({"experiment": "norm-sweep", "colour": "red"})",
      R"({"experiment": "norm-sweep", "half_weight": [{"m": 300, "cos": 1}]})",
      R"({"experiment": "norm-sweep", "half_weight": [{"m": 1, "tan": 1}]})",
      R"({"experiment": "theorem-check", "tangents": [{"f": []}], "pairs": [[0, 1]]})",
      R"({"experiment": "decay", "c": "1/3", "levels": [3, 4]})",
      R"({"experiment": "decay", "decay": {"distances": [2.0]}})",
      R"({"experiment": "profile", "c": "1/3", "profile": {"k": 80}})",
      R"({"experiment": "norm-sweep", "fit_step": 0.25})",
      R"({"experiment": "norm-sweep", "seed": -1})",
      R"({"experiment": "norm-sweep", "output": ""})",
  };
  for (const char* text : invalid) {
    INFO(text);
    CHECK_THROWS_AS(parse_config(json::parse(text)), ConfigError);
  }
}

TEST_CASE("config hash") {
  const auto a = parse(R"({"experiment": "norm-sweep", "c": "1/2"})");
  const auto b = parse(R"({"c": "1/2", "experiment": "norm-sweep"})");
  const auto c = parse(R"({"experiment": "norm-sweep", "c": "1/3"})");
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("csv text") {
  CHECK(series_csv(Series{"empty", {}}) == "k,l,r,value_re,value_im\n");
  testsupport::Rng rng(8);
  Series s{"x", {}};
  for (int i = 0; i < 50; ++i) s.rows.push_back({i, i / 2, 2, rng.normal() * std::pow(10.0, rng.integer(-20, 20)), rng.normal()});
  std::istringstream in(series_csv(s));
  std::string line;
  std::getline(in, line);
  for (const auto& row : s.rows) {
    REQUIRE(std::getline(in, line));
    int k, l, r;
    double re, im;
    REQUIRE(std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf", &k, &l, &r, &re, &im) == 5);
    CHECK(k == row.k);
    CHECK(re == row.re);
    CHECK(im == row.im);
  }
}

TEST_CASE("reports are deterministic and complete") {
  const auto cfg = parse_config(parse(R"({"experiment": "norm-sweep", "c": "1/3", "l_max": 20})"));
  const auto res = run_experiment(cfg);
  CHECK(res.pass());
  REQUIRE(res.smallest_admissible_k);
  CHECK(*res.smallest_admissible_k == 3);

  const auto stem = (scratch() / "det" / "norm").string();
  const auto files = emit_report(cfg, res, stem);
  REQUIRE(files.csv.size() == 2);
  std::vector<std::string> first;
  for (const auto& f : files.csv) first.push_back(slurp(f));
  const auto manifest_text = slurp(files.manifest);
  emit_report(cfg, run_experiment(cfg), stem);
  for (std::size_t i = 0; i < files.csv.size(); ++i) CHECK(slurp(files.csv[i]) == first[i]);
  CHECK(slurp(files.manifest) == manifest_text);

  const auto m = json::parse(manifest_text);
  for (const char* key : {"config", "config_hash", "calibrated_signs", "c_omega", "c_g", "fits", "verdicts", "pass"})
    CHECK(m.contains(key));
  CHECK(m.at("config_hash") == config_hash(cfg.source));
  CHECK(m.at("c_omega").is_null());

  const auto empty = emit_report(cfg, ExperimentResult{}, (scratch() / "empty").string());
  REQUIRE(empty.csv.size() == 1);
  CHECK(slurp(empty.csv[0]) == "k,l,r,value_re,value_im\n");

  std::ofstream(scratch() / "blocker") << "x";
  CHECK_THROWS_AS(emit_report(cfg, res, (scratch() / "blocker" / "sub" / "out").string()), IoError);
}

TEST_CASE("failures surface as verdicts") {
  // Tolerance far below the O(1/k) truncation error of the fit.
  const auto strict = parse_config(parse(R"({"experiment": "norm-sweep", "tolerances": {"norm_rel": 1e-12}})"));
  const auto res = run_experiment(strict);
  CHECK_FALSE(res.pass());
  CHECK_FALSE(res.verdicts.at(0).pass);
  CHECK(res.verdicts.at(1).pass);

  // A flow that leaves the tubular neighbourhood is reported, not thrown.
  const auto wild = parse_config(parse(R"({"experiment": "identity-suite", "N": 128, "random_tangents": 2,
      "tangents": [{"f": [{"m": 1, "cos": 30}]}]})"));
  const auto r2 = run_experiment(wild);
  CHECK_FALSE(r2.pass());
  CHECK(r2.verdicts.back().name == "execution");
}

TEST_CASE("exit-code contract") {
  CHECK(lab("list-experiments") == 0);
  CHECK(lab("--list-experiments") == 0);
  CHECK(lab("") == 2);
  CHECK(lab("run") == 2);
  CHECK(lab("frobnicate") == 2);
  CHECK(lab("run --config " + (scratch() / "missing.json").string()) == 2);
  CHECK(lab("run --config " + write_config("broken.json", "{not json").string()) == 2);
  CHECK(lab("run --config " + write_config("bad_c.json", R"({"experiment": "norm-sweep", "c": "1/0"})").string()) == 2);
  const auto out = (scratch() / "cli" / "norm").string();
  CHECK(lab("run --config " +
            write_config("ok.json", R"({"experiment": "norm-sweep", "c": "1/2", "output": ")" + out + R"("})").string()) ==
        0);
  CHECK(fs::exists(out + ".json"));
  CHECK(lab("run --config " +
            write_config("fail.json", R"({"experiment": "norm-sweep", "tolerances": {"norm_rel": 1e-12}})").string()) ==
        1);

  const std::string listing = scratch() / "list.txt";
  REQUIRE(std::system((std::string(BPU_LAB_PATH) + " list-experiments > " + listing).c_str()) == 0);
  std::istringstream in(slurp(listing));
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == experiment_catalog().size());
}
