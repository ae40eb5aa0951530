#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "geoquant/cli.hpp"

namespace {

void add_common(CLI::App* cmd, geoquant::RunConfig* cfg, bool* seed_passed) {
  cmd->add_option("--input", cfg->input_csv, "Measure CSV (header row, optional weight column)");
  cmd->add_option("--generator", cfg->generator_spec,
                  "Generator spec: disk:r, segment:x1,y1,x2,y2, gauss:..., point:..., "
                  "circle:r,n, tri:..., mix:w1*spec1+w2*spec2");
  cmd->add_option("--n", cfg->sample_n, "Sample size when drawing from a generator");
  cmd->add_option("--reg", cfg->reg_spec, "Regularizer: geometric, power:<beta>, smoothstep:<tau>");
  cmd->add_option("--seed", cfg->seed, "Random seed")->each([seed_passed](const std::string&) {
    *seed_passed = true;
  });
  cmd->add_option("--output", cfg->output, "Output path (default stdout)");
  cmd->add_option("--format", cfg->format, "Output format: csv, json, svg");
  cmd->add_option("--tol", cfg->solver.grad_tol, "Solver gradient tolerance (relative)");
  cmd->add_option("--max-iter", cfg->solver.max_iter, "Solver iteration budget");
  cmd->add_option("--threads", cfg->threads, "Worker threads for contour arcs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized geometric quantiles for discrete measures"};
  app.require_subcommand(1);

  geoquant::RunConfig cfg;
  bool seed_passed = false;

  auto* quantile = app.add_subcommand("quantile", "Solve one r-quantile");
  quantile->add_option("--alpha", cfg.alpha, "Quantile order in [0,1)");
  quantile->add_option("--u", cfg.direction, "Direction, comma-separated");
  add_common(quantile, &cfg, &seed_passed);

  auto* contour = app.add_subcommand("contour", "Quantile contour over directions");
  contour->add_option("--alpha", cfg.alpha, "Quantile order in [0,1)");
  contour->add_option("--dirs", cfg.dirs, "Number of directions");
  add_common(contour, &cfg, &seed_passed);

  auto* distfn = app.add_subcommand("distfn", "Distribution function on a grid");
  distfn->add_option("--grid", cfg.grid, "Grid resolution per axis");
  distfn->add_option("--box", cfg.box, "Grid box: lo per axis then hi per axis");
  add_common(distfn, &cfg, &seed_passed);

  auto* blackholes = app.add_subcommand("blackholes", "Black-hole decomposition");
  add_common(blackholes, &cfg, &seed_passed);

  auto* extremes = app.add_subcommand("extremes", "Extreme-quantile norm diagnostics");
  extremes->add_option("--alphas", cfg.alphas, "Quantile orders (increasing, in [0.5,1))");
  extremes->add_option("--u", cfg.direction, "Direction, comma-separated");
  add_common(extremes, &cfg, &seed_passed);

  auto* clt = app.add_subcommand("clt", "Monte Carlo asymptotic-normality check");
  clt->add_option("--alpha", cfg.alpha, "Quantile order in [0,1)");
  clt->add_option("--u", cfg.direction, "Direction, comma-separated");
  clt->add_option("--clt-n", cfg.clt_n, "Per-replicate sample size");
  clt->add_option("--reps", cfg.clt_reps, "Number of replicates");
  clt->add_option("--oracle-n", cfg.oracle_n, "Oracle sample size");
  add_common(clt, &cfg, &seed_passed);

  auto* stability = app.add_subcommand("stability", "Quantile displacement vs regularizer L1 gap");
  stability->add_option("--alpha", cfg.alpha, "Quantile order in [0,1)");
  stability->add_option("--u", cfg.direction, "Direction, comma-separated");
  stability->add_option("--reg2", cfg.reg2_spec, "Second regularizer spec");
  add_common(stability, &cfg, &seed_passed);

  auto* figures = app.add_subcommand("figures", "Regenerate figure datasets");
  figures->add_option("--name", cfg.figure_name,
                      "Figure name: extreme1to4, extreme5to8, central1to4, central5to8, "
                      "threedirac_Fpmap, threedirac_1..4, continuous_1..4");
  figures->add_option("--dirs", cfg.dirs, "Contour directions");
  add_common(figures, &cfg, &seed_passed);

  auto* validate = app.add_subcommand("validate", "Re-check solver CSV rows against the certificate");
  validate->add_option("--rows", cfg.rows_csv, "CSV produced by quantile/contour");
  add_common(validate, &cfg, &seed_passed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  cfg.seed_set = seed_passed;
  if (const char* env = std::getenv("GEOQUANT_THREADS")) {
    try {
      cfg.threads = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "error: config: bad GEOQUANT_THREADS value\n";
      return 2;
    }
  }

  for (auto* sub : {quantile, contour, distfn, blackholes, extremes, clt, stability,
                    figures, validate}) {
    if (sub->parsed()) cfg.subcommand = sub->get_name();
  }
  return geoquant::run_with_exit_codes(cfg, std::cerr);
}
