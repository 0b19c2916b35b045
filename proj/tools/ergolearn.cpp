#include <CLI11.hpp>

#include <iostream>

#include "ergo/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian learning diagnostics for spin-chain eigenstates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ergolearn 0.1");

  ergo::cli::CommonOptions opt;
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 0;
  std::string command;

  const std::vector<std::pair<const char*, const char*>> commands{
      {"basis", "enumerate the local operator basis"},
      {"ed", "exact diagonalization, level statistics and entanglement"},
      {"varspec", "variance spectra and metrics on exact eigenstates"},
      {"sweep", "parameter sweep with ensemble averages"},
      {"qnd", "energy-filtered state preparation with per-round metrics"},
      {"shadows", "classical-shadow datasets and estimated metrics"},
      {"ff", "free-fermion analytics for the periodic transverse-field chain"},
      {"pipeline", "qnd -> shadows -> varspec with an explicit stage list"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", opt.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "random seed (overrides config)");
    sub->add_option("--out,-o", out, "output directory (overrides config)");
    sub->add_option("--jobs,-j", jobs, "worker threads (overrides config)")->check(CLI::PositiveNumber);
    sub->callback([&command, n = std::string(name)] { command = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ergo::cli::kExitOk : ergo::cli::kExitValidation;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--out")) opt.out = out;
    if (sub->count("--jobs")) opt.jobs = jobs;
  }
  return ergo::cli::dispatch(command, opt, std::cerr);
}
