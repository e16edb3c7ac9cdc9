#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fuplab/experiment.hpp"

namespace {

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fuplab::cli;
  CLI::App app{"Fractal uncertainty experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FUPLAB_VERSION);

  std::string config, out = ".";
  std::optional<std::uint64_t> seed;
  int threads = 1;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("--config", config, "YAML config")->required();
  run->add_option("--out", out, "Output directory");
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("--config", config, "YAML config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kValidationFailure;
  }

  const auto text = slurp(config);
  if (!text) {
    std::cerr << "error: cannot read config " << config << "\n";
    return kValidationFailure;
  }

  if (*validate) {
    const auto diags = validate_config(*text);
    for (const auto& d : diags) std::cerr << "error: " << d << "\n";
    if (!diags.empty()) return kValidationFailure;
    std::cout << "ok\n";
    return kSuccess;
  }

  RunOptions opts;
  opts.out_dir = out;
  opts.seed = seed;
  opts.threads = threads;
  const auto result = run_config(*text, opts);
  for (const auto& d : result.diagnostics) std::cerr << "error: " << d << "\n";
  if (!result.error.empty()) std::cerr << "error: " << result.error << "\n";
  for (const auto& p : result.outputs) std::cout << p.string() << "\n";
  return result.exit_code;
}
