// nlwave: certify / axioms / solve / converge / manufactured runs on a scenario.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlwave/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal second-order evolution equations: certification and solves"};
  app.require_subcommand(1, 1);
  app.set_help_flag("--help", "print this help and exit");
  nlwave::cli::RunConfig cfg;
  int m = 0, intervals = 0;
  double h = 0.0, tol = 0.0;
  std::vector<int> m_list;

  for (const char* name : {"certify", "axioms", "solve", "converge", "manufactured"}) {
    auto* sub = app.add_subcommand(name);
    sub->set_help_flag("--help", "print this help and exit");  // -h would clash with --h
    sub->add_option("--scenario", cfg.scenario, "shipped scenario: undamped_neumann or population");
    sub->add_option("--config", cfg.config, "scenario file");
    sub->add_option("--m", m, "Galerkin mode count");
    sub->add_option("--h", h, "RK4 step");
    sub->add_option("--intervals", intervals, "time-grid intervals on [0, T]");
    sub->add_option("--tol", tol, "fixed-point tolerance");
    sub->add_option("--m-list", m_list, "mode counts for converge")->delimiter(',');
    sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "seed for randomized probes")->capture_default_str();
    sub->add_option("--dump-fs", cfg.dump_fs, "write the fundamental-solution table to this file");
    sub->callback([&cfg, name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nlwave::cli::config_error;
  }
  auto* sub = app.get_subcommands().front();
  if (sub->count("--m")) cfg.m = m;
  if (sub->count("--h")) cfg.h = h;
  if (sub->count("--intervals")) cfg.intervals = intervals;
  if (sub->count("--tol")) cfg.tol = tol;
  if (sub->count("--m-list")) cfg.m_list = m_list;
  const int status = nlwave::cli::run(cfg, std::cerr);
  if (status == 0) std::cout << "wrote " << cfg.out << "/manifest.json\n";
  return status;
}
