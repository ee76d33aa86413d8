#include "reductionlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace reductionlab::io {

namespace {

using reduction::Shape;

// Field access with JSON-pointer diagnostics.
class Reader {
 public:
  Reader(const Json& j, std::string source, std::string pointer)
      : j_(j), source_(std::move(source)), pointer_(std::move(pointer)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& message) const { fail_at(pointer_, message); }
  [[noreturn]] void fail_at(const std::string& pointer, const std::string& message) const {
    throw SchemaError(source_ + ": " + (pointer.empty() ? "/" : pointer), message);
  }

  std::string child(const std::string& key) const { return pointer_ + "/" + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const Json& raw(const std::string& key) const {
    if (!has(key)) fail_at(child(key), "required field is missing");
    return j_.at(key);
  }

  double number(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number()) fail_at(child(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail_at(child(key), "expected a finite number");
    return d;
  }
  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::size_t count(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      fail_at(child(key), "expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }
  std::string text(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_string()) fail_at(child(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }
  std::vector<double> numbers(const std::string& key) const {
    return numbers_of(raw(key), child(key));
  }
  std::vector<double> numbers_of(const Json& v, const std::string& pointer) const {
    if (!v.is_array()) fail_at(pointer, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number() || !std::isfinite(v[k].get<double>())) {
        fail_at(pointer + "/" + std::to_string(k), "expected a finite number");
      }
      out.push_back(v[k].get<double>());
    }
    return out;
  }
  Vec3 vec3(const std::string& key) const {
    const auto v = numbers(key);
    if (v.size() != 3) fail_at(child(key), "expected three components");
    return {v[0], v[1], v[2]};
  }
  Vec3 vec3_or(const std::string& key, Vec3 fallback) const {
    return has(key) ? vec3(key) : fallback;
  }
  void only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, _] : j_.items()) {
      if (!allowed.count(k)) fail_at(child(k), "unknown field");
    }
  }

  const std::string& source() const { return source_; }
  const std::string& pointer() const { return pointer_; }

 private:
  const Json& j_;
  std::string source_;
  std::string pointer_;
};

// Library validation failures inside a file become schema errors there.
template <class F>
auto guarded(const std::string& source, const std::string& pointer, F&& build) {
  try {
    return build();
  } catch (const SchemaError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw SchemaError(source + ": " + (pointer.empty() ? "/" : pointer), e.what());
  }
}

massdist::MassDistribution lattice_from_json(const Reader& r) {
  if (r.has("material")) {
    r.only({"kind", "material", "temperature", "counts", "origin"});
    const auto mat = guarded(r.source(), r.child("material"),
                             [&] { return solidstate::preset(r.text("material")); });
    const double temperature = r.number_or("temperature", 300.0);
    const auto counts = r.numbers("counts");
    if (counts.size() != 3) r.fail_at(r.child("counts"), "expected three counts");
    for (double c : counts) {
      if (c < 1 || c != std::floor(c)) r.fail_at(r.child("counts"), "counts must be integers >= 1");
    }
    const Vec3 origin = r.vec3_or("origin", {});
    massdist::NucleusLattice lat;
    lat.nucleus_mass = mat.nucleus_mass;
    lat.nucleus_diameter = guarded(r.source(), r.child("temperature"), [&] {
      return solidstate::nucleus_extension(mat, temperature);
    });
    const double a = mat.lattice_constant;
    for (int i = 0; i < static_cast<int>(counts[0]); ++i) {
      for (int j = 0; j < static_cast<int>(counts[1]); ++j) {
        for (int k = 0; k < static_cast<int>(counts[2]); ++k) {
          lat.positions.push_back({origin.x + a * i, origin.y + a * j, origin.z + a * k});
        }
      }
    }
    return massdist::MassDistribution(std::move(lat));
  }
  r.only({"kind", "nucleus_mass", "nucleus_diameter", "positions"});
  massdist::NucleusLattice lat;
  lat.nucleus_mass = r.number("nucleus_mass");
  lat.nucleus_diameter = r.number("nucleus_diameter");
  const Json& pos = r.raw("positions");
  if (!pos.is_array()) r.fail_at(r.child("positions"), "expected an array of points");
  for (std::size_t k = 0; k < pos.size(); ++k) {
    const auto p = r.numbers_of(pos[k], r.child("positions") + "/" + std::to_string(k));
    if (p.size() != 3) {
      r.fail_at(r.child("positions") + "/" + std::to_string(k), "expected three components");
    }
    lat.positions.push_back({p[0], p[1], p[2]});
  }
  return massdist::MassDistribution(std::move(lat));
}

massdist::MassDistribution distribution_at(const Json& j, const std::string& source,
                                           const std::string& pointer) {
  const Reader r(j, source, pointer);
  const std::string kind = r.text("kind");
  return guarded(source, pointer, [&]() -> massdist::MassDistribution {
    if (kind == "uniform_sphere") {
      r.only({"kind", "mass", "diameter", "center"});
      return massdist::sphere(r.number("mass"), r.number("diameter"), r.vec3_or("center", {}));
    }
    if (kind == "uniform_rod") {
      r.only({"kind", "mass", "length", "diameter", "axis", "center"});
      return massdist::rod(r.number("mass"), r.number("length"), r.number("diameter"),
                           r.vec3_or("axis", {0.0, 0.0, 1.0}), r.vec3_or("center", {}));
    }
    if (kind == "nucleus_lattice") return lattice_from_json(r);
    if (kind == "grid") {
      r.only({"kind", "origin", "cell_size", "dims", "densities"});
      massdist::GridSampled g;
      g.origin = r.vec3_or("origin", {});
      g.cell_size = r.number("cell_size");
      const auto dims = r.numbers("dims");
      if (dims.size() != 3) r.fail_at(r.child("dims"), "expected three dimensions");
      for (double d : dims) {
        if (d < 1 || d != std::floor(d)) r.fail_at(r.child("dims"), "dims must be integers >= 1");
      }
      g.nx = static_cast<std::size_t>(dims[0]);
      g.ny = static_cast<std::size_t>(dims[1]);
      g.nz = static_cast<std::size_t>(dims[2]);
      g.densities = r.numbers("densities");
      if (g.densities.size() != g.nx * g.ny * g.nz) {
        r.fail_at(r.child("densities"), "expected nx*ny*nz densities");
      }
      return massdist::MassDistribution(std::move(g));
    }
    if (kind == "displaced") {
      r.only({"kind", "base", "offset"});
      return massdist::displaced(distribution_at(r.raw("base"), source, r.child("base")),
                                 r.vec3("offset"));
    }
    r.fail_at(r.child("kind"), "unknown distribution kind '" + kind + "'");
  });
}

Shape shape_at(const Json& j, const std::string& source, const std::string& pointer) {
  const Reader r(j, source, pointer);
  const std::string type = r.text("type");
  Shape shape;
  if (type == "constant") {
    r.only({"type"});
    shape = reduction::Constant{};
  } else if (type == "ramp") {
    r.only({"type", "t_on", "t_rise"});
    shape = reduction::Ramp{r.number("t_on"), r.number_or("t_rise", 0.0)};
  } else if (type == "table") {
    r.only({"type", "points"});
    const Json& pts = r.raw("points");
    if (!pts.is_array()) r.fail_at(r.child("points"), "expected an array of [t, factor] pairs");
    reduction::Table table;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const std::string where = r.child("points") + "/" + std::to_string(k);
      const auto p = r.numbers_of(pts[k], where);
      if (p.size() != 2) r.fail_at(where, "expected [t, factor]");
      table.points.emplace_back(p[0], p[1]);
    }
    shape = table;
  } else {
    r.fail_at(r.child("type"), "unknown profile type '" + type + "'");
  }
  guarded(source, pointer, [&] {
    reduction::validate_shape(shape);
    return 0;
  });
  return shape;
}

std::vector<std::vector<std::size_t>> index_matrix(const Json& v, const Reader& r,
                                                   const std::string& key) {
  const std::string pointer = r.child(key);
  if (!v.is_array()) r.fail_at(pointer, "expected a square matrix");
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string row = pointer + "/" + std::to_string(i);
    if (!v[i].is_array()) r.fail_at(row, "expected a row");
    out.emplace_back();
    for (std::size_t k = 0; k < v[i].size(); ++k) {
      if (!v[i][k].is_number_integer() || v[i][k].get<long long>() < 0) {
        r.fail_at(row + "/" + std::to_string(k), "expected a shape index");
      }
      out.back().push_back(v[i][k].get<std::size_t>());
    }
  }
  return out;
}

scenarios::Scenario built_scenario(const Reader& top) {
  top.only({"builder", "params", "name", "notes"});
  const std::string builder = top.text("builder");
  static const Json empty = Json::object();
  const Json& params = top.has("params") ? top.raw("params") : empty;
  const Reader r(params, top.source(), top.child("params"));
  const double e = r.number_or("e_plateau", 1e-25);
  const auto profile = [&]() -> Shape {
    return r.has("profile") ? shape_at(r.raw("profile"), r.source(), r.child("profile"))
                            : Shape{reduction::Constant{}};
  };
  scenarios::Scenario s = guarded(top.source(), r.pointer(), [&]() -> scenarios::Scenario {
    if (builder == "fig3a" || builder == "fig3b") {
      r.only({"n", "e_plateau", "profile"});
      return builder == "fig3a" ? scenarios::build_fig3a(r.count("n"), e, profile())
                                : scenarios::build_fig3b(r.count("n"), e, profile());
    }
    if (builder == "two_detector_overlap") {
      r.only({"c1sq", "c2sq", "e_plateau"});
      return scenarios::build_two_detector_overlap(r.number("c1sq"), r.number("c2sq"), e);
    }
    if (builder == "continuous_medium") {
      r.only({"n", "weights", "weight_profile", "sigma", "e_plateau"});
      const std::size_t n = r.count("n");
      std::vector<double> w;
      if (r.has("weights")) {
        w = r.numbers("weights");
      } else {
        const std::string kind = r.text_or("weight_profile", "uniform");
        if (kind == "uniform") {
          w.assign(n, 1.0);
        } else if (kind == "gaussian") {
          const double sigma = r.number_or("sigma", static_cast<double>(n) / 6.0);
          const double mid = 0.5 * static_cast<double>(n - 1);
          for (std::size_t k = 0; k < n; ++k) {
            const double u = (static_cast<double>(k) - mid) / sigma;
            w.push_back(std::exp(-0.5 * u * u));
          }
        } else {
          r.fail_at(r.child("weight_profile"), "expected 'uniform' or 'gaussian'");
        }
      }
      return scenarios::build_continuous_medium(n, w, e);
    }
    if (builder == "biology_star") {
      r.only({"n_mutants", "c1sq", "center", "e_plateau"});
      const std::string center = r.text_or("center", "original");
      if (center != "original" && center != "mutant") {
        r.fail_at(r.child("center"), "expected 'original' or 'mutant'");
      }
      return scenarios::build_biology_star(
          r.count("n_mutants"), r.number("c1sq"),
          center == "original" ? scenarios::StarCenter::original : scenarios::StarCenter::mutant,
          e);
    }
    if (builder == "delayed_detector") {
      r.only({"n", "e_plateau", "delta_t"});
      return scenarios::delayed_detector_scenario(scenarios::build_fig3b(r.count("n"), e),
                                                  r.number("delta_t"));
    }
    if (builder == "detector_network") {
      r.only({"weights", "detector_eg", "profile"});
      return scenarios::build_detector_network("detector_network", r.numbers("weights"),
                                               r.numbers("detector_eg"), profile());
    }
    top.fail_at(top.child("builder"), "unknown builder '" + builder + "'");
  });
  if (top.has("name")) s.name = top.text("name");
  if (top.has("notes")) s.notes = top.text("notes");
  return s;
}

scenarios::Scenario explicit_scenario(const Reader& r) {
  // "run", "constants" and "report" are written by the CLI into run metadata;
  // the CLI reads them, the scenario itself ignores them.
  r.only({"name", "weights", "couplings", "profiles", "profile_map", "expected", "notes", "run",
          "constants", "report"});
  scenarios::Scenario s;
  s.name = r.text_or("name", "scenario");
  s.notes = r.text_or("notes", "");
  s.superposition.weights = r.numbers("weights");
  const std::size_t n = s.superposition.weights.size();
  const Json& c = r.raw("couplings");
  if (!c.is_array() || c.size() != n) {
    r.fail_at(r.child("couplings"), "expected an n x n matrix matching the weights");
  }
  s.superposition.couplings = reduction::SquareMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string row = r.child("couplings") + "/" + std::to_string(i);
    const auto v = r.numbers_of(c[i], row);
    if (v.size() != n) r.fail_at(row, "row length does not match the weights");
    for (std::size_t k = 0; k < n; ++k) s.superposition.couplings(i, k) = v[k];
  }
  std::vector<Shape> shapes;
  if (r.has("profiles")) {
    const Json& p = r.raw("profiles");
    if (!p.is_array() || p.empty()) r.fail_at(r.child("profiles"), "expected a non-empty array");
    for (std::size_t k = 0; k < p.size(); ++k) {
      shapes.push_back(shape_at(p[k], r.source(), r.child("profiles") + "/" + std::to_string(k)));
    }
  } else {
    shapes.push_back(reduction::Constant{});
  }
  s.profile = reduction::CouplingProfile::uniform(n, shapes[0]);
  for (std::size_t k = 1; k < shapes.size(); ++k) s.profile.add_shape(shapes[k]);
  if (r.has("profile_map")) {
    const auto map = index_matrix(r.raw("profile_map"), r, "profile_map");
    if (map.size() != n) r.fail_at(r.child("profile_map"), "expected an n x n matrix");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string row = r.child("profile_map") + "/" + std::to_string(i);
      if (map[i].size() != n) r.fail_at(row, "row length does not match the weights");
      for (std::size_t k = 0; k < n; ++k) {
        if (map[i][k] >= shapes.size()) r.fail_at(row + "/" + std::to_string(k), "no such profile");
        if (map[i][k] != map[k][i]) r.fail_at(row + "/" + std::to_string(k), "map must be symmetric");
        if (i < k) s.profile.assign(i, k, map[i][k]);
      }
    }
  }
  if (r.has("expected")) {
    const Reader e(r.raw("expected"), r.source(), r.child("expected"));
    e.only({"provenance", "outcomes"});
    scenarios::Expected ex;
    ex.provenance = e.text_or("provenance", "");
    const Json& outs = e.raw("outcomes");
    if (!outs.is_array()) e.fail_at(e.child("outcomes"), "expected an array");
    for (std::size_t k = 0; k < outs.size(); ++k) {
      const Reader o(outs[k], r.source(), e.child("outcomes") + "/" + std::to_string(k));
      o.only({"states", "probability"});
      std::vector<std::size_t> set;
      for (double label : o.numbers("states")) {
        if (label < 1 || label > static_cast<double>(n) || label != std::floor(label)) {
          o.fail_at(o.child("states"), "states are 1-based labels up to n");
        }
        set.push_back(static_cast<std::size_t>(label) - 1);
      }
      std::sort(set.begin(), set.end());
      ex.outcomes[set] += o.number("probability");
    }
    s.expected = ex;
  }
  return s;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < end; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw SchemaError(source + ":" + std::to_string(line) + ":" + std::to_string(column),
                      "invalid JSON");
  }
}

Json read_json_file(const std::filesystem::path& path) {
  return parse_json(read_text_file(path), path.string());
}

massdist::MassDistribution distribution_from_json(const Json& j, const std::string& source) {
  return distribution_at(j, source, "");
}

Shape shape_from_json(const Json& j, const std::string& source, const std::string& pointer) {
  return shape_at(j, source, pointer);
}

Json shape_to_json(const Shape& shape) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, reduction::Constant>) {
          return {{"type", "constant"}};
        } else if constexpr (std::is_same_v<T, reduction::Ramp>) {
          return {{"type", "ramp"}, {"t_on", v.t_on}, {"t_rise", v.t_rise}};
        } else {
          Json pts = Json::array();
          for (const auto& [t, f] : v.points) pts.push_back({t, f});
          return {{"type", "table"}, {"points", pts}};
        }
      },
      shape);
}

scenarios::Scenario scenario_from_json(const Json& j, const std::string& source) {
  const Reader r(j, source, "");
  scenarios::Scenario s = r.has("builder") ? built_scenario(r) : explicit_scenario(r);
  guarded(source, "", [&] {
    s.validate();
    return 0;
  });
  return s;
}

Json scenario_to_json(const scenarios::Scenario& s) {
  const std::size_t n = s.size();
  Json j;
  j["name"] = s.name;
  j["weights"] = s.superposition.weights;
  Json c = Json::array();
  Json map = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    Json row = Json::array();
    Json mrow = Json::array();
    for (std::size_t k = 0; k < n; ++k) {
      row.push_back(s.superposition.couplings(i, k));
      mrow.push_back(s.profile.shape_of(i, k));
    }
    c.push_back(row);
    map.push_back(mrow);
  }
  j["couplings"] = c;
  Json shapes = Json::array();
  for (const auto& shape : s.profile.shapes()) shapes.push_back(shape_to_json(shape));
  j["profiles"] = shapes;
  j["profile_map"] = map;
  if (s.expected) {
    Json outs = Json::array();
    for (const auto& [set, p] : s.expected->outcomes) {
      Json labels = Json::array();
      for (std::size_t k : set) labels.push_back(k + 1);
      outs.push_back({{"states", labels}, {"probability", p}});
    }
    j["expected"] = {{"provenance", s.expected->provenance}, {"outcomes", outs}};
  }
  if (!s.notes.empty()) j["notes"] = s.notes;
  return j;
}

PhysicalConstants constants_from_json(const Json& j, const std::string& source,
                                      const PhysicalConstants& base) {
  const Reader r(j, source, "");
  r.only({"G", "hbar", "k_boltzmann", "c_light", "xi", "electron_mass", "elementary_charge",
          "vacuum_permittivity"});
  PhysicalConstants c = base;
  c.G = r.number_or("G", c.G);
  c.hbar = r.number_or("hbar", c.hbar);
  c.k_boltzmann = r.number_or("k_boltzmann", c.k_boltzmann);
  c.c_light = r.number_or("c_light", c.c_light);
  c.xi = r.number_or("xi", c.xi);
  c.electron_mass = r.number_or("electron_mass", c.electron_mass);
  c.elementary_charge = r.number_or("elementary_charge", c.elementary_charge);
  c.vacuum_permittivity = r.number_or("vacuum_permittivity", c.vacuum_permittivity);
  guarded(source, "", [&] {
    c.validate();
    return 0;
  });
  return c;
}

Json constants_to_json(const PhysicalConstants& c) {
  return {{"G", c.G},
          {"hbar", c.hbar},
          {"k_boltzmann", c.k_boltzmann},
          {"c_light", c.c_light},
          {"xi", c.xi},
          {"electron_mass", c.electron_mass},
          {"elementary_charge", c.elementary_charge},
          {"vacuum_permittivity", c.vacuum_permittivity}};
}

std::map<std::string, solidstate::Material> materials_from_json(const Json& j,
                                                                const std::string& source) {
  if (!j.is_object()) throw SchemaError(source + ": /", "expected an object of materials");
  std::map<std::string, solidstate::Material> out;
  for (const auto& [name, v] : j.items()) {
    const Reader r(v, source, "/" + name);
    r.only({"nucleus_mass", "lattice_constant", "phonon_velocity", "bulk_density",
            "thermal_expansion", "specific_heat", "compression_modulus",
            "relative_permittivity"});
    solidstate::Material m;
    m.name = name;
    m.nucleus_mass = r.number("nucleus_mass");
    m.lattice_constant = r.number("lattice_constant");
    m.phonon_velocity = r.number("phonon_velocity");
    m.bulk_density = r.number("bulk_density");
    m.thermal_expansion = r.number("thermal_expansion");
    m.specific_heat = r.number("specific_heat");
    m.compression_modulus = r.number("compression_modulus");
    m.relative_permittivity = r.number("relative_permittivity");
    guarded(source, "/" + name, [&] {
      m.validate();
      return 0;
    });
    out.emplace(name, m);
  }
  return out;
}

std::string outcome_label(const std::vector<std::size_t>& states) {
  std::string out = "{";
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (k) out += ",";
    out += std::to_string(states[k] + 1);
  }
  return out + "}";
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out += ',';
    out += csv_field(fields[k]);
  }
  return out + "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_open = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char ch = text[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    row_open = true;
    if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && k + 1 < text.size() && text[k + 1] == '\n') ++k;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      row_open = false;
    } else {
      field += ch;
    }
  }
  if (quoted) throw InvalidInput("csv: unterminated quoted field");
  if (row_open) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string tick_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::ceil(lo); e <= std::floor(hi) + 1e-9; e += 1.0) {
        out.push_back(std::pow(10.0, e));
      }
      if (out.size() < 2) {
        out = {std::pow(10.0, lo), std::pow(10.0, hi)};
      }
      return out;
    }
    for (int k = 0; k <= 5; ++k) out.push_back(lo + (hi - lo) * k / 5.0);
    return out;
  }
};

Axis make_axis(const std::vector<Series>& series, bool use_x, bool log) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double v : use_x ? s.x : s.y) {
      if (!std::isfinite(v) || (log && v <= 0.0)) continue;
      const double t = log ? std::log10(v) : v;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo <= 0.0) {
    const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log};
}

}  // namespace

std::string svg_line_plot(const std::vector<Series>& series, const PlotOptions& opts) {
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                        "#8c564b"};
  const double left = 80.0;
  const double right = 20.0;
  const double top = 40.0;
  const double bottom = 60.0;
  const double pw = opts.width - left - right;
  const double ph = opts.height - top - bottom;
  const Axis ax = make_axis(series, true, opts.log_x);
  const Axis ay = make_axis(series, false, opts.log_y);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
      << opts.height << "\" viewBox=\"0 0 " << opts.width << ' ' << opts.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << opts.width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(opts.title) << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double x = left + pw * ax.map(t);
    svg << "<line x1=\"" << x << "\" y1=\"" << top + ph << "\" x2=\"" << x << "\" y2=\""
        << top + ph + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << tick_text(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = top + ph * (1.0 - ay.map(t));
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
        << tick_text(t) << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << opts.height - 16
      << "\" text-anchor=\"middle\">" << xml_escape(opts.x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(opts.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if ((opts.log_x && s.x[i] <= 0.0) || (opts.log_y && s.y[i] <= 0.0)) continue;
      if (!first) svg << ' ';
      first = false;
      svg << left + pw * ax.map(s.x[i]) << ',' << top + ph * (1.0 - ay.map(s.y[i]));
    }
    svg << "\"/>\n";
    const double ly = top + 16.0 + 16.0 * static_cast<double>(k);
    svg << "<line x1=\"" << left + pw - 150 << "\" y1=\"" << ly << "\" x2=\"" << left + pw - 126
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + pw - 120 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace reductionlab::io
