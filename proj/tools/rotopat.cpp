// Command-line front end: one subcommand per experiment mode.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <vector>

#include "rotopat/errors.hpp"
#include "rotopat/harness.hpp"

int main(int argc, char** argv) {
  using namespace rotopat;

  CLI::App app{"Rotating-frame photoacoustic tomography experiments"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  std::vector<CLI::Option*> seed_options;
  int threads = 0;
  bool quiet = false;

  const std::pair<const char*, const char*> modes[] = {
      {"simulate", "Synthesize boundary traces for every rotation"},
      {"reconstruct", "Recover the absorption map from traces"},
      {"check-geometry", "Report the uniqueness and visibility conditions"},
      {"analyze-operator", "Assemble the linearized normal operator and its spectrum"},
      {"stability-sweep", "Measure the stability constant over random pairs"},
      {"self-test", "Run the quick solver checks"},
      {"run", "Run the mode named in the configuration"},
  };
  for (const auto& [name, help] : modes) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", config_path, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out,-o", out, "Output directory (overrides experiment.output)");
    seed_options.push_back(sub->add_option("--seed", seed, "Random seed (overrides experiment.seed)"));
    sub->add_option("--threads,-j", threads, "Worker threads, 0 keeps the default")->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet,-q", quiet, "Only print errors");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  ExperimentConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
    if (sub != "run") config.experiment.mode = parse_mode(sub);
  } catch (const rotopat::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (sub == "run" && config_path.empty()) {
    std::cerr << "error: run needs --config\n";
    return kExitConfig;
  }

  RunOptions opts;
  if (!out.empty()) opts.output = out;
  for (const CLI::Option* o : seed_options)
    if (o->count()) opts.seed = seed;
  opts.threads = threads;
  for (int i = 0; i < argc; ++i) opts.command += (i ? " " : "") + std::string(argv[i]);
  opts.log = quiet ? nullptr : &std::cerr;

  const RunResult r = run(config, opts);
  if (quiet && r.exit_code != 0) std::cerr << "error: " << r.message << "\n";
  return r.exit_code;
}
