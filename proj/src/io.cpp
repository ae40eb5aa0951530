#include "geoquant/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace geoquant {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

DiscreteMeasure read_measure_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty measure CSV");

  // Header: column names, one may be "weight".
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      names.push_back(cell);
    }
  }
  int weight_col = -1;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == "weight") weight_col = static_cast<int>(i);
  }
  const std::size_t d = names.size() - (weight_col >= 0 ? 1 : 0);
  if (d < 1) throw std::invalid_argument("measure CSV needs at least one coordinate column");

  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Eigen::VectorXd p(static_cast<Eigen::Index>(d));
    Eigen::Index coord = 0;
    std::size_t col = 0;
    double w = 1.0;
    while (std::getline(ss, cell, ',')) {
      double value = 0.0;
      try {
        std::size_t pos = 0;
        value = std::stod(cell, &pos);
        while (pos < cell.size() && cell[pos] == ' ') ++pos;
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad numeric cell '" + cell + "' at line " +
                                    std::to_string(line_no));
      }
      if (static_cast<int>(col) == weight_col) {
        w = value;
      } else {
        if (coord >= p.size()) {
          throw std::invalid_argument("too many columns at line " + std::to_string(line_no));
        }
        p[coord++] = value;
      }
      ++col;
    }
    if (coord != p.size()) {
      throw std::invalid_argument("too few columns at line " + std::to_string(line_no));
    }
    points.push_back(std::move(p));
    weights.push_back(w);
  }
  if (weight_col >= 0) return DiscreteMeasure::from_points(points, weights);
  return DiscreteMeasure::from_points(points);
}

DiscreteMeasure read_measure_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open measure file '" + path + "'");
  return read_measure_csv(in);
}

void write_measure_csv(std::ostream& out, const DiscreteMeasure& m) {
  for (Eigen::Index i = 0; i < m.dim(); ++i) out << "x" << (i + 1) << ",";
  out << "weight\n";
  for (Eigen::Index j = 0; j < m.size(); ++j) {
    for (Eigen::Index i = 0; i < m.dim(); ++i) out << format_double(m.atoms()(i, j)) << ",";
    out << format_double(m.weight(j)) << "\n";
  }
}

std::string measure_to_json(const DiscreteMeasure& m) {
  nlohmann::json j;
  j["dim"] = m.dim();
  auto atoms = nlohmann::json::array();
  auto weights = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    auto atom = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.dim(); ++k) atom.push_back(m.atoms()(k, i));
    atoms.push_back(std::move(atom));
    weights.push_back(m.weight(i));
  }
  j["atoms"] = std::move(atoms);
  j["weights"] = std::move(weights);
  return j.dump();
}

DiscreteMeasure measure_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const Eigen::Index d = j.at("dim").get<Eigen::Index>();
  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;
  for (const auto& atom : j.at("atoms")) {
    Eigen::VectorXd p(d);
    if (static_cast<Eigen::Index>(atom.size()) != d) {
      throw std::invalid_argument("atom has wrong dimension in JSON measure");
    }
    for (Eigen::Index k = 0; k < d; ++k) p[k] = atom[static_cast<std::size_t>(k)].get<double>();
    points.push_back(std::move(p));
  }
  for (const auto& w : j.at("weights")) weights.push_back(w.get<double>());
  return DiscreteMeasure::from_points(points, weights);
}

}  // namespace geoquant
