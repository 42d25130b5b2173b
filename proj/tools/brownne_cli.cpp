#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "brownne/brownne.h"

namespace {

const char* const subcommands[][2] = {
    {"ndd-convergence", "NDD error and quadrature/sampling agreement on random quadratics"},
    {"moments", "Kernel moments against a dense quadrature rule, and tails"},
    {"brownian-verify", "Mean, variance and normality of the NDD of Brownian paths"},
    {"iam", "Disc-position estimation by nonlocal gradient descent"},
    {"mlp-train", "Baseline vs Brownian ReLU networks on the bundled digits"},
    {"biased-gd", "Descent traces with biased nonlocal gradients on quadratics"},
};

int threads_from_env() {
  const char* env = std::getenv("BROWNNE_THREADS");
  if (!env) return 0;
  try {
    return std::stoi(env);
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments with nonlocal directional derivatives"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(brownne_version()));

  std::string config;
  std::uint64_t seed = 0;
  std::string out = ".";
  int threads = threads_from_env();

  for (const auto& sc : subcommands) {
    auto* cmd = app.add_subcommand(sc[0], sc[1]);
    cmd->add_option("--config", config, "key = value file; omitted keys take defaults")->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--threads", threads, "worker threads (default BROWNNE_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const auto status = brownne_run(name.c_str(), config.c_str(), seed, out.c_str(), threads);
  if (status == BROWNNE_OK) {
    std::cout << "wrote " << out << "/" << name << ".csv\n";
    return 0;
  }
  std::cerr << "brownne " << name << ": " << brownne_last_error() << "\n";
  return status == BROWNNE_ERR_CONFIG || status == BROWNNE_ERR_PARSE ? 2 : 3;
}
