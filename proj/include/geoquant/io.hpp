#pragma once

#include <iosfwd>
#include <string>

#include "geoquant/measure.hpp"

namespace geoquant {

// CSV measure format: header row required, d numeric columns per point,
// optional column named "weight".
DiscreteMeasure read_measure_csv(std::istream& in);
DiscreteMeasure read_measure_csv_file(const std::string& path);
void write_measure_csv(std::ostream& out, const DiscreteMeasure& m);

// {"dim": d, "atoms": [[...], ...], "weights": [...]}
std::string measure_to_json(const DiscreteMeasure& m);
DiscreteMeasure measure_from_json(const std::string& text);

// Full-precision double formatting (round-trip exact, locale-free).
std::string format_double(double v);

}  // namespace geoquant
