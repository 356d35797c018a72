#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "flab/experiments.hpp"

namespace {

int report_error(int code, const std::string& msg) {
  std::string line = msg;
  for (char& ch : line) {
    if (ch == '\n') ch = ' ';
  }
  std::fprintf(stderr, "ERR %d: %s\n", code, line.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  namespace fx = flab::experiments;
  CLI::App app{"flab: mean-field fluctuation lab"};
  std::string experiment, config_path, out_path;
  unsigned threads = 0;
  app.add_option("experiment", experiment, "moments | converge | ccr-decay | cluster-verify | bounds")
      ->required()
      ->check(CLI::IsMember(fx::experiment_names()));
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--out", out_path, "output file (default: config 'out', else stdout)");
  app.add_option("--threads", threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(2, e.what());
  }

  try {
    fx::ExperimentConfig cfg = fx::load_config(config_path, experiment);
    if (threads > 0) cfg.threads = threads;
    if (!out_path.empty()) cfg.out = out_path;
    const fx::RunResult result = fx::run_experiment(cfg);
    if (cfg.out.empty()) {
      std::cout << result.output << std::flush;
    } else {
      std::ofstream out(cfg.out, std::ios::binary);
      if (!out) return report_error(4, "cannot open output file '" + cfg.out + "'");
      out << result.output;
      if (!out.flush()) return report_error(4, "failed writing output file '" + cfg.out + "'");
    }
    if (result.exit_code != 0) return report_error(result.exit_code, "one or more checks failed");
    return 0;
  } catch (const flab::Error& e) {
    return report_error(fx::exit_code_for(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error(2, e.what());
  }
}
