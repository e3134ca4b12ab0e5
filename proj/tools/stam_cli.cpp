#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "stam/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Three-block quantized training harness"};
  app.require_subcommand(1);

  std::string run_config, compare_config, suite;
  CLI::App* run = app.add_subcommand("run", "Execute one configured experiment");
  run->add_option("--config", run_config, "Config file (JSON, comments allowed)")->required();
  CLI::App* compare =
      app.add_subcommand("compare", "Run several algorithms on one shared problem");
  compare->add_option("--config", compare_config, "Config file (JSON, comments allowed)")
      ->required();
  CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
  verify
      ->add_option("suite", suite,
                   "One of: projection, unbiasedness, es, threshold, gradients")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return stam::cmd_run(run_config);
    if (compare->parsed()) return stam::cmd_compare(compare_config);
    if (verify->parsed()) return stam::cmd_verify(suite);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
