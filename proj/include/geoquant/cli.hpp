#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoquant/solver.hpp"

namespace geoquant {

// Parsed invocation; filled by the command-line front end or directly by
// tests. Exactly one of input_csv / generator_spec supplies the data
// (figures builds its own).
struct RunConfig {
  std::string subcommand;  // quantile|contour|distfn|blackholes|extremes|clt|stability|figures|validate

  std::string input_csv;
  std::string generator_spec;
  std::size_t sample_n = 1000;  // draws when sampling a generator

  std::string reg_spec = "geometric";
  std::string reg2_spec;  // stability only

  double alpha = 0.5;
  std::vector<double> alphas;     // extremes grid; defaults to 1 - 10^-k
  std::string direction = "1,0";  // u as comma-separated coordinates
  int dirs = 64;                  // contour directions

  std::string output;          // path (or directory for figures); empty = stdout
  std::string format = "csv";  // csv|json|svg

  std::uint64_t seed = 0;
  bool seed_set = false;

  int grid = 41;            // distfn resolution per axis
  std::vector<double> box;  // distfn box lo..., hi...; empty = bbox x 1.5

  std::string figure_name;

  std::size_t clt_n = 500;
  int clt_reps = 2000;
  std::size_t oracle_n = 1000000;

  std::string rows_csv;  // validate: solver output to re-check

  int threads = 1;
  SolverOptions solver;
};

// Executes the configured subcommand. Returns 0 on success. Config errors
// throw std::invalid_argument / std::domain_error (exit 2 at the CLI);
// anything else is a runtime failure (exit 1).
int run(const RunConfig& cfg);

// CLI exit-code wrapper: 0 success, 1 runtime failure, 2 config error,
// printing a single machine-parsable "error: <code>: <message>" line.
int run_with_exit_codes(const RunConfig& cfg, std::ostream& err);

}  // namespace geoquant
