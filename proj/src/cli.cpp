#include "geoquant/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "geoquant/analysis.hpp"
#include "geoquant/extremes.hpp"
#include "geoquant/inference.hpp"
#include "geoquant/io.hpp"
#include "geoquant/rng.hpp"
#include "geoquant/svg.hpp"

namespace geoquant {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t pos = 0;
    vals.push_back(std::stod(cell, &pos));
    if (pos != cell.size()) throw std::invalid_argument("bad coordinate '" + cell + "'");
  }
  if (vals.empty()) throw std::invalid_argument("empty vector");
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

Eigen::VectorXd parse_direction(const std::string& text) {
  Eigen::VectorXd u = parse_vector(text);
  const double n = u.norm();
  if (!(n > 0.0)) throw std::invalid_argument("direction must be nonzero");
  return u / n;
}

DiscreteMeasure load_measure(const RunConfig& cfg) {
  const bool has_file = !cfg.input_csv.empty();
  const bool has_gen = !cfg.generator_spec.empty();
  if (has_file == has_gen) {
    throw std::invalid_argument("exactly one of --input and --generator is required");
  }
  if (has_file) return read_measure_csv_file(cfg.input_csv);
  if (!cfg.seed_set) throw std::invalid_argument("--seed is required when sampling a generator");
  return Generator::parse(cfg.generator_spec).sample(cfg.sample_n, cfg.seed);
}

void require_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1)");
  }
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_solution_row(std::ostream& out, double theta, double alpha,
                        const QuantileSolution& sol) {
  out << format_double(theta) << "," << format_double(alpha);
  for (Eigen::Index i = 0; i < sol.point.size(); ++i) {
    out << "," << format_double(sol.point[i]);
  }
  out << "," << format_double(sol.certificate.residual) << "," << to_string(sol.status)
      << "," << sol.iterations << "\n";
}

void write_solution_header(std::ostream& out, Eigen::Index d) {
  out << "theta,alpha";
  for (Eigen::Index i = 0; i < d; ++i) out << ",x" << (i + 1);
  out << ",residual,status,iterations\n";
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    arr.push_back(std::move(row));
  }
  return arr;
}

nlohmann::json config_echo(const RunConfig& cfg) {
  nlohmann::json j;
  j["subcommand"] = cfg.subcommand;
  if (!cfg.input_csv.empty()) j["input"] = cfg.input_csv;
  if (!cfg.generator_spec.empty()) {
    j["generator"] = cfg.generator_spec;
    j["sample_n"] = cfg.sample_n;
  }
  j["reg"] = cfg.reg_spec;
  if (!cfg.reg2_spec.empty()) j["reg2"] = cfg.reg2_spec;
  j["alpha"] = cfg.alpha;
  j["direction"] = cfg.direction;
  if (cfg.seed_set) j["seed"] = cfg.seed;
  j["grad_tol"] = cfg.solver.grad_tol;
  j["max_iter"] = cfg.solver.max_iter;
  j["threads"] = cfg.threads;
  return j;
}

int run_quantile(const RunConfig& cfg) {
  const DiscreteMeasure m = load_measure(cfg);
  const Regularizer reg = Regularizer::parse(cfg.reg_spec);
  require_alpha(cfg.alpha);
  Eigen::VectorXd u = parse_direction(cfg.direction);
  if (u.size() != m.dim()) throw std::invalid_argument("direction dimension mismatch");
  const QuantileIndex idx(cfg.alpha, u);
  const QuantileSolution sol = quantile(m, reg, idx, cfg.solver);

  Output out(cfg.output);
  const double theta = m.dim() == 2 ? std::atan2(u[1], u[0]) : std::nan("");
  if (cfg.format == "json") {
    nlohmann::json j;
    j["config"] = config_echo(cfg);
    j["point"] = vector_json(sol.point);
    j["residual"] = sol.certificate.residual;
    j["atom_slack"] = sol.certificate.atom_slack;
    j["status"] = to_string(sol.status);
    j["iterations"] = sol.iterations;
    out.stream() << j.dump(2) << "\n";
  } else {
    write_solution_header(out.stream(), m.dim());
    write_solution_row(out.stream(), theta, cfg.alpha, sol);
  }
  return 0;
}

int run_contour(const RunConfig& cfg) {
  const DiscreteMeasure m = load_measure(cfg);
  const Regularizer reg = Regularizer::parse(cfg.reg_spec);
  require_alpha(cfg.alpha);
  if (m.dim() != 2) throw std::invalid_argument("contour requires two-dimensional data");
  SolverOptions opts = cfg.solver;
  opts.threads = cfg.threads;
  const auto entries = contour(m, reg, cfg.alpha, cfg.dirs, opts);

  Output out(cfg.output);
  write_solution_header(out.stream(), m.dim());
  for (const auto& entry : entries) {
    if (!entry.error.empty()) {
      throw std::runtime_error("contour direction failed: " + entry.error);
    }
    const double theta = std::atan2(entry.u[1], entry.u[0]);
    write_solution_row(out.stream(), theta, cfg.alpha, entry.solution);
  }
  return 0;
}

int run_distfn(const RunConfig& cfg) {
  const DiscreteMeasure m = load_measure(cfg);
  const Regularizer reg = Regularizer::parse(cfg.reg_spec);
  const Eigen::Index d = m.dim();
  if (cfg.grid < 2) throw std::invalid_argument("distfn grid must be >= 2");

  Eigen::VectorXd lo(d), hi(d);
  if (cfg.box.empty()) {
    lo = m.atoms().rowwise().minCoeff();
    hi = m.atoms().rowwise().maxCoeff();
    const Eigen::VectorXd mid = 0.5 * (lo + hi);
    const Eigen::VectorXd half = 0.75 * (hi - lo).cwiseMax(1e-6);
    lo = mid - half;
    hi = mid + half;
  } else {
    if (static_cast<Eigen::Index>(cfg.box.size()) != 2 * d) {
      throw std::invalid_argument("--box needs lo and hi per axis");
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      lo[i] = cfg.box[static_cast<std::size_t>(i)];
      hi[i] = cfg.box[static_cast<std::size_t>(d + i)];
    }
  }

  Output out(cfg.output);
  auto& os = out.stream();
  for (Eigen::Index i = 0; i < d; ++i) os << "x" << (i + 1) << ",";
  for (Eigen::Index i = 0; i < d; ++i) os << "f" << (i + 1) << ",";
  os << "fnorm\n";

  long total = 1;
  for (Eigen::Index i = 0; i < d; ++i) total *= cfg.grid;
  Eigen::VectorXd p(d);
  for (long k = 0; k < total; ++k) {
    long rem = k;
    for (Eigen::Index i = 0; i < d; ++i) {
      const long gi = rem % cfg.grid;
      rem /= cfg.grid;
      p[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(gi) / (cfg.grid - 1);
    }
    const Eigen::VectorXd F = dist_fn(m, reg, p);
    for (Eigen::Index i = 0; i < d; ++i) os << format_double(p[i]) << ",";
    for (Eigen::Index i = 0; i < d; ++i) os << format_double(F[i]) << ",";
    os << format_double(F.norm()) << "\n";
  }
  return 0;
}

nlohmann::json holes_json(const std::vector<BlackHole>& holes) {
  auto arr = nlohmann::json::array();
  for (const auto& hole : holes) {
    nlohmann::json h;
    h["atom"] = vector_json(hole.atom);
    h["center"] = vector_json(hole.center);
    h["radius"] = hole.radius;
    arr.push_back(std::move(h));
  }
  return arr;
}

void holes_svg(const std::string& path, const std::vector<BlackHole>& holes) {
  SvgCanvas canvas(-1.05, 1.05, -1.05, 1.05);
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(2);
  canvas.add_circle(origin, 1.0, "black");
  for (const auto& hole : holes) {
    canvas.add_circle(hole.center, hole.radius, "steelblue", true);
    canvas.add_dot(hole.center, 3.0, "black");
  }
  canvas.write_file(path);
}

int run_blackholes(const RunConfig& cfg) {
  const DiscreteMeasure m = load_measure(cfg);
  const Regularizer reg = Regularizer::parse(cfg.reg_spec);
  const auto holes = black_holes(m, reg);
  if (cfg.format == "svg") {
    if (m.dim() != 2) throw std::invalid_argument("svg output requires d = 2");
    if (cfg.output.empty()) throw std::invalid_argument("svg output requires --output");
    holes_svg(cfg.output, holes);
    return 0;
  }
  Output out(cfg.output);
  nlohmann::json j;
  j["config"] = config_echo(cfg);
  j["black_holes"] = holes_json(holes);
  out.stream() << j.dump(2) << "\n";
  return 0;
}

int run_extremes(const RunConfig& cfg) {
  const DiscreteMeasure m = load_measure(cfg);
  const Regularizer reg = Regularizer::parse(cfg.reg_spec);
  Eigen::VectorXd u = parse_direction(cfg.direction);
  if (u.size() != m.dim()) throw std::invalid_argument("direction dimension mismatch");

  std::vector<double> alphas = cfg.alphas;
  if (alphas.empty()) alphas = {0.9, 0.99, 0.999, 0.9999};

  const ExtremeCurve curve = extreme_curve(m, reg, u, alphas, cfg.solver);
  const double predicted = predicted_norm_limit(m, reg, u, std::min(curve.beta, 2.0));

  Output out(cfg.output);
  auto& os = out.stream();
  os << "alpha,norm,scaled_norm";
  for (Eigen::Index i = 0; i < m.dim(); ++i) os << ",gap" << (i + 1);
  os << ",predicted_limit\n";
  for (const auto& row : curve.rows) {
    os << format_double(row.alpha) << "," << format_double(row.norm) << ","
       << format_double(row.scaled_norm);
    for (Eigen::Index i = 0; i < m.dim(); ++i) {
      os << "," << format_double(row.direction_gap[i]);
    }
    os << "," << format_double(predicted) << "\n";
  }
  return 0;
}

int run_clt(const RunConfig& cfg) {
  if (cfg.generator_spec.empty()) throw std::invalid_argument("clt requires --generator");
  if (!cfg.seed_set) throw std::invalid_argument("clt requires --seed");
  const Generator gen = Generator::parse(cfg.generator_spec);
  const Regularizer reg = Regularizer::parse(cfg.reg_spec);
  require_alpha(cfg.alpha);
  Eigen::VectorXd u = parse_direction(cfg.direction);
  const QuantileIndex idx(cfg.alpha, u);

  ExperimentOptions opts;
  opts.oracle_n = cfg.oracle_n;
  opts.solver = cfg.solver;
  const CltReport report = clt_experiment(gen, reg, idx, cfg.clt_n, cfg.clt_reps,
                                          cfg.seed, opts);

  Output out(cfg.output);
  nlohmann::json j;
  j["config"] = config_echo(cfg);
  j["n"] = report.n;
  j["reps"] = report.reps;
  j["coverage95"] = report.coverage95;
  j["oracle_q0"] = vector_json(report.oracle_q0);
  j["sigma0"] = matrix_json(report.sigma0);
  j["empirical_cov"] = matrix_json(report.empirical_cov);
  j["failures"] = report.failures;
  auto quantiles = nlohmann::json::array();
  for (const auto& [level, empirical, reference] : report.mahalanobis_quantiles) {
    quantiles.push_back({{"level", level}, {"empirical", empirical}, {"chi2", reference}});
  }
  j["mahalanobis_quantiles"] = std::move(quantiles);
  out.stream() << j.dump(2) << "\n";
  return 0;
}

int run_stability(const RunConfig& cfg) {
  if (!cfg.seed_set) throw std::invalid_argument("stability requires --seed");
  if (cfg.reg2_spec.empty()) throw std::invalid_argument("stability requires --reg2");
  const DiscreteMeasure m = load_measure(cfg);
  const Regularizer reg1 = Regularizer::parse(cfg.reg_spec);
  const Regularizer reg2 = Regularizer::parse(cfg.reg2_spec);
  require_alpha(cfg.alpha);
  Eigen::VectorXd u = parse_direction(cfg.direction);
  const QuantileIndex idx(cfg.alpha, u);
  const StabilityGap gap = stability_gap(m, reg1, reg2, idx, cfg.solver);

  Output out(cfg.output);
  nlohmann::json j;
  j["config"] = config_echo(cfg);
  j["sq_dist"] = gap.sq_dist;
  j["l1"] = std::isinf(gap.l1) ? nlohmann::json("inf") : nlohmann::json(gap.l1);
  j["ratio"] = gap.ratio;
  j["ratio_flag"] = gap.flag == RatioFlag::Defined
                        ? "defined"
                        : (gap.flag == RatioFlag::ZeroDistance ? "zero_l1" : "infinite_l1");
  out.stream() << j.dump(2) << "\n";
  return 0;
}

int run_validate(const RunConfig& cfg) {
  if (cfg.rows_csv.empty()) throw std::invalid_argument("validate requires --rows");
  const DiscreteMeasure m = load_measure(cfg);
  const Regularizer reg = Regularizer::parse(cfg.reg_spec);
  if (m.dim() != 2) throw std::invalid_argument("validate handles d = 2 output");

  std::ifstream rows(cfg.rows_csv);
  if (!rows) throw std::invalid_argument("cannot open rows file '" + cfg.rows_csv + "'");
  std::string line;
  if (!std::getline(rows, line)) throw std::invalid_argument("rows file is empty");

  int checked = 0, failed = 0;
  while (std::getline(rows, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 6) throw std::invalid_argument("bad row: '" + line + "'");
    const double theta = std::stod(cells[0]);
    const double alpha = std::stod(cells[1]);
    Eigen::VectorXd x(2);
    x << std::stod(cells[2]), std::stod(cells[3]);
    Eigen::VectorXd u(2);
    u << std::cos(theta), std::sin(theta);
    const Certificate cert = certify_quantile(m, reg, QuantileIndex(alpha, u), x);
    ++checked;
    if (!cert.satisfied) ++failed;
  }
  Output out(cfg.output);
  out.stream() << "checked," << checked << "\nfailed," << failed << "\n";
  if (failed > 0) throw std::runtime_error(std::to_string(failed) + " rows fail the certificate");
  return 0;
}

// --- figures -------------------------------------------------------------

struct FigurePanel {
  std::string tag;
  Generator gen;
  std::size_t n;  // 0 = use the fixed measure below (exact atoms, no sampling)
  std::shared_ptr<const DiscreteMeasure> fixed;
};

struct FigureSpec {
  std::vector<FigurePanel> panels;
  std::vector<double> levels;
  std::vector<std::string> regs;
  bool blackholes_only = false;
};

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

Generator horizontal_segment() { return Generator::uniform_segment(vec2(-1, 0), vec2(1, 0)); }

std::vector<FigurePanel> triangle_panels() {
  const double s3 = std::sqrt(3.0);
  std::vector<FigurePanel> panels;
  auto tri = [&](const std::string& tag, Eigen::VectorXd a, Eigen::VectorXd b,
                 Eigen::VectorXd c) {
    auto fixed = std::make_shared<DiscreteMeasure>(
        DiscreteMeasure::from_points({a, b, c}));
    panels.push_back({tag, Generator::point_mass(a), 0, std::move(fixed)});
  };
  tri("p1", vec2(-1, -1 / s3), vec2(1, -1 / s3), vec2(0, s3 - 1 / s3));
  tri("p2", vec2(-1, -1.0 / 3), vec2(1, -1.0 / 3), vec2(0, 2.0 / 3));
  tri("p3", vec2(-1.0 / 3, -2.0 / 3), vec2(2.0 / 3, -2.0 / 3), vec2(-1.0 / 3, 4.0 / 3));
  tri("p4", vec2(0, -1.0 / 3), vec2(1, -1.0 / 3), vec2(-1, 2.0 / 3));
  return panels;
}

FigureSpec figure_spec(const std::string& name, std::size_t n) {
  const std::vector<double> extreme_levels = {0.9, 0.95, 0.99, 0.995};
  const std::vector<double> central_levels = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  const std::vector<double> dirac_levels = {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5,
                                            0.6,  0.7,  0.8, 0.9, 0.95, 0.99};
  const std::vector<double> continuous_levels = {0.25, 0.3, 0.4, 0.5,  0.6, 0.7,
                                                 0.75, 0.8, 0.9, 0.95, 0.99};

  auto segment_mix_panels = [&]() {
    std::vector<FigurePanel> panels;
    panels.push_back({"p1",
                      Generator::mixture({{0.5, horizontal_segment()},
                                          {0.5, Generator::uniform_segment(vec2(0, -1), vec2(0, 1))}}),
                      n, nullptr});
    panels.push_back({"p2",
                      Generator::mixture({{0.5, horizontal_segment()},
                                          {0.5, Generator::uniform_segment(vec2(0, -0.5), vec2(0, 0.5))}}),
                      n, nullptr});
    panels.push_back({"p3",
                      Generator::mixture({{0.5, horizontal_segment()},
                                          {0.5, Generator::uniform_segment(vec2(0, -0.05), vec2(0, 0.05))}}),
                      n, nullptr});
    panels.push_back({"p4",
                      Generator::mixture({{0.5, horizontal_segment()},
                                          {0.5, Generator::point_mass(vec2(0, 0))}}),
                      n, nullptr});
    return panels;
  };
  auto dirac_mix_panels = [&]() {
    std::vector<FigurePanel> panels;
    panels.push_back({"p1",
                      Generator::mixture({{0.5, horizontal_segment()},
                                          {0.5, Generator::point_mass(vec2(0, 1))}}),
                      n, nullptr});
    panels.push_back({"p2",
                      Generator::mixture({{2.0 / 3, horizontal_segment()},
                                          {1.0 / 3, Generator::point_mass(vec2(0, 2.0 / 3))}}),
                      n, nullptr});
    panels.push_back({"p3",
                      Generator::mixture({{5.0 / 6, horizontal_segment()},
                                          {1.0 / 6, Generator::point_mass(vec2(0, 1.0 / 3))}}),
                      n, nullptr});
    panels.push_back({"p4", horizontal_segment(), n, nullptr});
    return panels;
  };
  auto continuous_panel = [&](const std::string& which) {
    const double s3 = std::sqrt(3.0);
    const Eigen::VectorXd A = vec2(0, 1), B = vec2(s3 / 2, -0.5), C = vec2(-s3 / 2, -0.5);
    std::vector<FigurePanel> panels;
    if (which == "1") {
      panels.push_back({"p1",
                        Generator::mixture({{0.5, Generator::uniform_segment(A, C)},
                                            {0.5, Generator::uniform_segment(B, C)}}),
                        n, nullptr});
    } else if (which == "2") {
      panels.push_back({"p1", Generator::triangle(A, B, C), n, nullptr});
    } else if (which == "3") {
      Eigen::MatrixXd cov(2, 2);
      cov << 2.0 / 16, 1.0 / 16, 1.0 / 16, 1.0 / 16;
      panels.push_back({"p1", Generator::gaussian(vec2(0, 0), cov), n, nullptr});
    } else {
      Eigen::MatrixXd c1(2, 2), c2(2, 2), c3(2, 2);
      c1 << 1.25, -1, -1, 1.25;
      c2 << 1.25, 1, 1, 1.25;
      c3 << 1, 0, 0, 0.25;
      panels.push_back({"p1",
                        Generator::mixture({{3.0 / 8, Generator::gaussian(vec2(-1.5, 0), c1)},
                                            {3.0 / 8, Generator::gaussian(vec2(1.5, 0), c2)},
                                            {1.0 / 4, Generator::gaussian(vec2(0, -1.25), c3)}}),
                        n, nullptr});
    }
    return panels;
  };

  if (name == "extreme1to4") return {segment_mix_panels(), extreme_levels, {"geometric", "power:5", "power:10"}, false};
  if (name == "extreme5to8") return {dirac_mix_panels(), extreme_levels, {"geometric", "power:5", "power:10"}, false};
  if (name == "central1to4") return {segment_mix_panels(), central_levels, {"geometric", "power:2", "power:5"}, false};
  if (name == "central5to8") return {dirac_mix_panels(), central_levels, {"geometric", "power:2", "power:5"}, false};
  if (name == "threedirac_Fpmap") return {triangle_panels(), {}, {"geometric"}, true};
  for (int k = 1; k <= 4; ++k) {
    if (name == "threedirac_" + std::to_string(k)) {
      FigurePanel panel = triangle_panels()[static_cast<std::size_t>(k - 1)];
      panel.tag = "p1";  // single-panel figure
      return {{std::move(panel)}, dirac_levels, {"geometric", "power:2", "power:4"}, false};
    }
    if (name == "continuous_" + std::to_string(k)) {
      return {continuous_panel(std::to_string(k)), continuous_levels,
              {"geometric", "power:1", "power:2", "power:5"}, false};
    }
  }
  throw std::invalid_argument(
      "unknown figure '" + name +
      "'; names: extreme1to4, extreme5to8, central1to4, central5to8, "
      "threedirac_Fpmap, threedirac_1..4, continuous_1..4");
}

std::string reg_tag(const std::string& spec) {
  std::string tag = spec;
  for (char& c : tag) {
    if (c == ':' || c == '.') c = '_';
  }
  return tag;
}

int run_figures(const RunConfig& cfg) {
  if (cfg.figure_name.empty()) throw std::invalid_argument("figures requires --name");
  if (!cfg.seed_set) throw std::invalid_argument("figures requires --seed");
  const FigureSpec spec = figure_spec(cfg.figure_name, cfg.sample_n);
  const std::filesystem::path dir = cfg.output.empty() ? "." : cfg.output;
  std::filesystem::create_directories(dir);

  Rng root(cfg.seed);
  int panel_id = 0;
  for (const auto& panel : spec.panels) {
    ++panel_id;
    const DiscreteMeasure m =
        panel.n == 0
            ? *panel.fixed
            : panel.gen.sample(panel.n, root.spawn(static_cast<std::uint64_t>(panel_id)).seed());
    const std::string base = (dir / (cfg.figure_name + "_" + panel.tag)).string();

    {
      std::ofstream sample_out(base + "_sample.csv");
      write_measure_csv(sample_out, m);
    }

    const Eigen::VectorXd lo = m.atoms().rowwise().minCoeff();
    const Eigen::VectorXd hi = m.atoms().rowwise().maxCoeff();
    const double margin = 0.35 * std::max(1e-3, (hi - lo).maxCoeff());
    SvgCanvas canvas(lo[0] - margin, hi[0] + margin, lo[1] - margin, hi[1] + margin);
    for (Eigen::Index i = 0; i < m.size(); ++i) canvas.add_dot(m.atom(i), 1.5, "gray");

    if (spec.blackholes_only) {
      const auto holes = black_holes(m, Regularizer::geometric());
      std::ofstream jout(base + "_blackholes.json");
      nlohmann::json j;
      j["figure"] = cfg.figure_name;
      j["panel"] = panel.tag;
      j["black_holes"] = holes_json(holes);
      jout << j.dump(2) << "\n";
      holes_svg(base + "_blackholes.svg", holes);
      continue;
    }

    const std::vector<std::string> palette = {"black", "steelblue", "firebrick", "darkorange"};
    std::size_t color = 0;
    for (const auto& reg_spec_str : spec.regs) {
      const Regularizer reg = Regularizer::parse(reg_spec_str);
      std::ofstream csv(base + "_" + reg_tag(reg_spec_str) + ".csv");
      csv << "level,theta,x1,x2,residual,status,iterations\n";
      SolverOptions opts = cfg.solver;
      opts.threads = cfg.threads;
      for (const double level : spec.levels) {
        const auto entries = contour(m, reg, level, cfg.dirs, opts);
        std::vector<Eigen::VectorXd> ring;
        for (const auto& entry : entries) {
          if (!entry.error.empty()) {
            throw std::runtime_error("contour failed in figure: " + entry.error);
          }
          const double theta = std::atan2(entry.u[1], entry.u[0]);
          csv << format_double(level) << ",";
          csv << format_double(theta) << ","
              << format_double(entry.solution.point[0]) << ","
              << format_double(entry.solution.point[1]) << ","
              << format_double(entry.solution.certificate.residual) << ","
              << to_string(entry.solution.status) << "," << entry.solution.iterations
              << "\n";
          ring.push_back(entry.solution.point);
        }
        canvas.add_polyline(ring, palette[color % palette.size()], true, color > 0);
      }
      ++color;
    }
    canvas.write_file(base + ".svg");
  }
  return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
  if (cfg.subcommand == "quantile") return run_quantile(cfg);
  if (cfg.subcommand == "contour") return run_contour(cfg);
  if (cfg.subcommand == "distfn") return run_distfn(cfg);
  if (cfg.subcommand == "blackholes") return run_blackholes(cfg);
  if (cfg.subcommand == "extremes") return run_extremes(cfg);
  if (cfg.subcommand == "clt") return run_clt(cfg);
  if (cfg.subcommand == "stability") return run_stability(cfg);
  if (cfg.subcommand == "figures") return run_figures(cfg);
  if (cfg.subcommand == "validate") return run_validate(cfg);
  throw std::invalid_argument("unknown subcommand '" + cfg.subcommand + "'");
}

int run_with_exit_codes(const RunConfig& cfg, std::ostream& err) {
  try {
    return run(cfg);
  } catch (const std::invalid_argument& e) {
    err << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    err << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: runtime: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace geoquant
