#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fuplab/experiment.hpp"
#include "json.hpp"

using namespace fuplab::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = FUPLAB_TEST_SOURCE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("fuplab_test_" + name);
  fs::remove_all(d);
  return d;
}

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool mentions(const std::vector<std::string>& diags, const std::string& text) {
  for (const auto& d : diags)
    if (d.find(text) != std::string::npos) return true;
  return false;
}

const char* kHoles = "schema: 1\ncommand: holes\nset: {kind: random, nu: 1/5, depth: 8, seed: 7}\n"
                     "nu: 1/5\nk: 0\nk0: 7\nn: 65536\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("shipped configs validate") {
  for (const auto& e : fs::directory_iterator(kSource / "configs")) {
    CAPTURE(e.path().string());
    CHECK(validate_config(slurp(e.path())).empty());
  }
}

TEST_CASE("validation diagnostics") {
  std::string bad = kHoles;
  bad.replace(bad.find("k0: 7"), 5, "k0: 20");
  const auto d = validate_config(bad);
  REQUIRE(d.size() == 1);
  CHECK(d[0].find("k0") != std::string::npos);
  CHECK(d[0].find("band constraint") != std::string::npos);

  const auto unknown = validate_config(std::string(kHoles) + "colour: red\n");
  REQUIRE(unknown.size() == 1);
  CHECK(unknown[0].find("colour") != std::string::npos);

  // every problem is reported, not just the first
  const auto many = validate_config("schema: 2\ncommand: holes\nnu: -1\n");
  CHECK(many.size() >= 3);
  CHECK(mentions(many, "schema"));
  CHECK_FALSE(validate_config("command: [").empty());
  CHECK(mentions(validate_config("schema: 1\ncommand: teleport\n"), "command"));
}

TEST_CASE("exit codes") {
  const auto out = fresh_dir("exit");
  RunOptions opts;
  opts.out_dir = out;
  const auto invalid = run_config(std::string(kHoles) + "colour: red\n", opts);
  CHECK(invalid.exit_code == kValidationFailure);
  CHECK_FALSE(fs::exists(out / "manifest.json"));

  const auto neg = run_config(slurp(kSource / "configs/porosity_full.yaml"), opts);
  CHECK(neg.exit_code == kCertificationNegative);
  const std::string csv = slurp(out / "porosity.csv");
  CHECK(csv.find("CERTIFIED_NOT_POROUS") != std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "negative");
  CHECK(manifest["command"] == "porosity");
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);

  const auto ok = run_config(slurp(kSource / "configs/norm.yaml"), opts);
  CHECK(ok.exit_code == kSuccess);
  CHECK(nlohmann::json::parse(slurp(out / "manifest.json"))["status"] == "ok");
  fs::remove_all(out);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("outputs match the frozen goldens") {
  for (const auto& g : fs::directory_iterator(kSource / "tests/golden")) {
    const std::string name = g.path().filename().string();
    CAPTURE(name);
    const auto out = fresh_dir("golden_" + name);
    RunOptions opts;
    opts.out_dir = out;
    opts.threads = 2;
    run_config(slurp(kSource / "configs" / (name + ".yaml")), opts);
    for (const auto& f : fs::directory_iterator(g.path())) {
      CAPTURE(f.path().filename().string());
      CHECK(slurp(out / f.path().filename()) == slurp(f.path()));
    }
    fs::remove_all(out);
  }
}

TEST_CASE("the binary is deterministic across runs and thread counts") {
  const std::string bin = FUPLAB_BINARY;
  const auto a = fresh_dir("bin_a"), b = fresh_dir("bin_b");
  for (const char* cfg : {"sweep", "harmonic", "chain"}) {
    CAPTURE(cfg);
    const std::string config = (kSource / "configs" / (std::string(cfg) + ".yaml")).string();
    REQUIRE(shell(bin + " run --config " + config + " --out " + a.string() + " --threads 1 >/dev/null") == 0);
    REQUIRE(shell(bin + " run --config " + config + " --out " + b.string() + " --threads 3 >/dev/null") == 0);
    for (const auto& f : fs::directory_iterator(a)) {
      if (f.path().filename() == "manifest.json") {
        auto ma = nlohmann::json::parse(slurp(f.path()));
        auto mb = nlohmann::json::parse(slurp(b / "manifest.json"));
        ma.erase("runtime");
        mb.erase("runtime");
        CHECK(ma == mb);
      } else {
        CHECK(slurp(f.path()) == slurp(b / f.path().filename()));
      }
    }
  }
  fs::remove_all(a);
  fs::remove_all(b);
  CHECK(shell(bin + " validate --config " + (kSource / "configs/holes.yaml").string() + " >/dev/null") == 0);
  CHECK(shell(bin + " run --bogus 2>/dev/null") == 2);
  CHECK(shell(bin + " run --config " + (kSource / "configs/porosity_full.yaml").string() + " --out " +
              fresh_dir("bin_full").string() + " >/dev/null") == 4);
}

}  // TEST_SUITE
