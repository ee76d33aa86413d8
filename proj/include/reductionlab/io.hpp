#pragma once

// File formats: JSON inputs with field-path diagnostics, RFC 4180 CSV, and
// self-contained SVG line plots.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reductionlab/constants.hpp"
#include "reductionlab/errors.hpp"
#include "reductionlab/massdist.hpp"
#include "reductionlab/scenarios.hpp"
#include "reductionlab/solidstate.hpp"

namespace reductionlab::io {

using Json = nlohmann::ordered_json;

/// Malformed input file. where() is "file:line:column" for syntax errors and
/// "file: /json/pointer" for field errors.
class SchemaError : public InvalidInput {
 public:
  SchemaError(std::string where, const std::string& message)
      : InvalidInput(where + ": " + message), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Parses text, reporting syntax errors with line and column.
Json parse_json(const std::string& text, const std::string& source);
Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

/// {"kind": "uniform_sphere" | "uniform_rod" | "nucleus_lattice" | "grid" | "displaced", ...}.
/// A lattice may name a material preset instead of listing positions.
massdist::MassDistribution distribution_from_json(const Json& j, const std::string& source);

/// Either an explicit scenario or {"builder": name, "params": {...}}.
/// Outcome sets in files are 1-based state labels.
scenarios::Scenario scenario_from_json(const Json& j, const std::string& source);
/// Explicit form; builders are expanded.
Json scenario_to_json(const scenarios::Scenario& s);

reduction::Shape shape_from_json(const Json& j, const std::string& source,
                                 const std::string& pointer);
Json shape_to_json(const reduction::Shape& s);

/// Missing keys keep the values of `base`.
PhysicalConstants constants_from_json(const Json& j, const std::string& source,
                                      const PhysicalConstants& base = {});
Json constants_to_json(const PhysicalConstants& c);

std::map<std::string, solidstate::Material> materials_from_json(const Json& j,
                                                                const std::string& source);

/// "{1}", "{2,3,4}": ascending 1-based labels of a 0-based state set.
std::string outcome_label(const std::vector<std::size_t>& states);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

/// RFC 4180: CRLF line ends; fields with comma, quote, CR or LF are quoted.
std::string csv_field(const std::string& field);
std::string csv_line(const std::vector<std::string>& fields);
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 480;
};

std::string svg_line_plot(const std::vector<Series>& series, const PlotOptions& opts);

}  // namespace reductionlab::io
