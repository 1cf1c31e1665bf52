// Command-line front end. Every subcommand reads a JSON experiment config and
// writes its outputs under <out>/<config hash>/.
//
// Exit status: 0 success, 2 configuration error, 3 numerical failure,
// 1 anything else.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "toricq/errors.hpp"
#include "toricq/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config;
  std::string out;
  bool force = false;
  unsigned workers = 0;
};

CLI::App* add_command(CLI::App& app, const char* name, const char* help, Options& opts) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", opts.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", opts.out, "output root (overrides output_dir in the config)");
  sub->add_flag("--force", opts.force, "recompute even if outputs for this config exist");
  sub->add_option("--workers", opts.workers, "worker threads for study (0 = hardware concurrency)");
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantization of toric geodesics: Gram matrices, finite geodesics, Toeplitz and Bergman diagnostics"};
  app.set_version_flag("--version", std::string(toricq::kVersionTag));
  app.require_subcommand(1);

  Options opts;
  const std::pair<const char*, toricq::Command> commands[] = {
      {"legendre", toricq::Command::legendre}, {"gram", toricq::Command::gram},
      {"geodesic", toricq::Command::geodesic}, {"toeplitz", toricq::Command::toeplitz},
      {"bergman", toricq::Command::bergman},   {"study", toricq::Command::study},
  };
  const char* help[] = {
      "Legendre transforms f_t(s) along the geodesic",
      "endpoint Gram matrices",
      "pencil spectra of the finite geodesics",
      "Toeplitz trace, composition and perturbation diagnostics",
      "Bergman kernel deviation from the geodesic potential",
      "full convergence study with rate fits and plots",
  };
  CLI::App* subs[6];
  for (int i = 0; i < 6; ++i) subs[i] = add_command(app, commands[i].first, help[i], opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  toricq::Command command = toricq::Command::study;
  for (int i = 0; i < 6; ++i)
    if (subs[i]->parsed()) command = commands[i].second;

  try {
    const toricq::ExperimentConfig config = toricq::ExperimentConfig::load(opts.config);
    const std::string out = opts.out.empty() ? config.output_dir : opts.out;
    const toricq::CommandOutcome r = toricq::execute(command, config, out, opts.force, opts.workers);
    std::cout << (r.cache_hit ? "cached: " : "wrote: ") << r.directory.string() << '\n';
    if (r.numerical_failure) {
      std::cerr << "error: some rows failed numerically; see study.csv\n";
      return kExitNumerical;
    }
    return 0;
  } catch (const toricq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const toricq::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
