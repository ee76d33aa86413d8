#include <doctest.h>

#include <filesystem>
#include <functional>
#include <limits>
#include <random>

#include "reductionlab/io.hpp"
#include "support.hpp"

using namespace reductionlab;
using io::Json;
using io::SchemaError;

namespace {

std::string where_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const SchemaError& e) {
    return e.where();
  }
  return "<no error>";
}

const std::filesystem::path kRoot = REDUCTIONLAB_SOURCE_DIR;

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("syntax errors carry line and column") {
    const std::string text = "{\n  \"weights\": [0.5,\n    0.5,,]\n}";
    CHECK(where_of([&] { io::parse_json(text, "bad.json"); }) == "bad.json:3:9");
    CHECK(where_of([&] { io::parse_json("", "empty.json"); }) == "empty.json:1:1");
    CHECK_THROWS_AS(io::read_json_file(kRoot / "no_such_file.json"), SchemaError);
  }

  TEST_CASE("field errors carry a JSON pointer") {
    const Json bad_row = Json::parse(R"({"weights":[0.5,0.5],"couplings":[[0,1],[1]]})");
    CHECK(where_of([&] { io::scenario_from_json(bad_row, "s.json"); }) == "s.json: /couplings/1");

    const Json bad_num = Json::parse(R"({"weights":[0.5,"x"],"couplings":[[0,1],[1,0]]})");
    CHECK(where_of([&] { io::scenario_from_json(bad_num, "s.json"); }) == "s.json: /weights/1");

    const Json unknown = Json::parse(R"({"weights":[1],"couplings":[[0]],"colour":"red"})");
    CHECK(where_of([&] { io::scenario_from_json(unknown, "s.json"); }) == "s.json: /colour");

    const Json bad_shape = Json::parse(
        R"({"weights":[0.5,0.5],"couplings":[[0,1],[1,0]],
            "profiles":[{"type":"ramp","t_on":0,"t_rise":-1}]})");
    CHECK(where_of([&] { io::scenario_from_json(bad_shape, "s.json"); }) ==
          "s.json: /profiles/0");

    const Json bad_label = Json::parse(
        R"({"weights":[0.5,0.5],"couplings":[[0,1],[1,0]],
            "expected":{"outcomes":[{"states":[3],"probability":1}]}})");
    CHECK(where_of([&] { io::scenario_from_json(bad_label, "s.json"); }) ==
          "s.json: /expected/outcomes/0/states");

    const Json bad_builder = Json::parse(R"({"builder":"fig3b","params":{"n":1}})");
    CHECK(where_of([&] { io::scenario_from_json(bad_builder, "s.json"); }) == "s.json: /params");

    // Library validation inside a file is reported at the file.
    const Json bad_weights = Json::parse(R"({"weights":[0.7,0.7],"couplings":[[0,1],[1,0]]})");
    CHECK(where_of([&] { io::scenario_from_json(bad_weights, "s.json"); }) == "s.json: /");

    const Json bad_dist = Json::parse(R"({"kind":"uniform_sphere","mass":-1,"diameter":1})");
    CHECK(where_of([&] { io::distribution_from_json(bad_dist, "d.json"); }) == "d.json: /");
    const Json nested = Json::parse(
        R"({"kind":"displaced","offset":[1,0,0],"base":{"kind":"cube","mass":1}})");
    CHECK(where_of([&] { io::distribution_from_json(nested, "d.json"); }) == "d.json: /base/kind");
  }

  TEST_CASE("format_double reads back exactly") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int k = 0; k < 2000; ++k) {
      const double v = std::ldexp(mant(gen), expo(gen));
      CHECK(std::stod(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
    CHECK(io::format_double(1e-25) == "1e-25");
    CHECK(io::format_double(0.1) == "0.1");
  }

  TEST_CASE("CSV is RFC 4180 with CRLF line ends") {
    CHECK(io::csv_line({"a", "b"}) == "a,b\r\n");
    CHECK(io::csv_field("{1,2}") == "\"{1,2}\"");
    CHECK(io::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(io::csv_field("plain") == "plain");

    const std::vector<std::vector<std::string>> rows = {
        {"scenario", "outcome", "note"},
        {"fig3b", "{1}", ""},
        {"chain", "{1,3}", "line one\nline two"},
        {"q\"uote", "x,y", "\r"},
    };
    std::string text;
    for (const auto& r : rows) text += io::csv_line(r);
    CHECK(io::parse_csv(text) == rows);
    CHECK(io::parse_csv("a,b\nc,d") ==
          std::vector<std::vector<std::string>>{{"a", "b"}, {"c", "d"}});
    CHECK_THROWS_AS(io::parse_csv("\"open"), InvalidInput);
  }

  TEST_CASE("outcome labels are ascending and one-based") {
    CHECK(io::outcome_label({0}) == "{1}");
    CHECK(io::outcome_label({1, 2, 3}) == "{2,3,4}");
    CHECK(io::outcome_label({}) == "{}");
  }

  TEST_CASE("the shipped materials file matches the built-in presets") {
    const auto mats =
        io::materials_from_json(io::read_json_file(kRoot / "data/materials.json"), "materials");
    REQUIRE(mats.size() == 4);
    for (const char* name : {"iron", "water", "sio2", "cu"}) {
      CAPTURE(name);
      REQUIRE(mats.contains(name));
      const auto& m = mats.at(name);
      const auto p = solidstate::preset(name);
      CHECK(m.nucleus_mass == p.nucleus_mass);
      CHECK(m.lattice_constant == p.lattice_constant);
      CHECK(m.phonon_velocity == p.phonon_velocity);
      CHECK(m.bulk_density == p.bulk_density);
      CHECK(m.thermal_expansion == p.thermal_expansion);
      CHECK(m.specific_heat == p.specific_heat);
      CHECK(m.compression_modulus == p.compression_modulus);
      CHECK(m.relative_permittivity == p.relative_permittivity);
    }
    const Json bad = Json::parse(R"({"lead":{"nucleus_mass":1}})");
    CHECK(where_of([&] { io::materials_from_json(bad, "m.json"); }) ==
          "m.json: /lead/lattice_constant");
  }

  TEST_CASE("constants: missing keys keep the base, round trip is exact") {
    const PhysicalConstants base;
    const auto c = io::constants_from_json(Json::parse(R"({"xi": 2.5})"), "c.json", base);
    CHECK(c.xi == 2.5);
    CHECK(c.G == base.G);
    CHECK(c.hbar == base.hbar);

    PhysicalConstants custom;
    custom.G = 1.0;
    custom.hbar = 3.0;
    const auto back = io::constants_from_json(io::constants_to_json(custom), "c.json");
    CHECK(back.G == 1.0);
    CHECK(back.hbar == 3.0);
    CHECK(back.c_light == custom.c_light);

    CHECK(where_of([&] { io::constants_from_json(Json::parse(R"({"g": 1})"), "c.json"); }) ==
          "c.json: /g");
    CHECK_THROWS_AS(io::constants_from_json(Json::parse(R"({"hbar": -1})"), "c.json"),
                    SchemaError);
  }

  TEST_CASE("shapes round-trip through JSON") {
    const std::vector<reduction::Shape> shapes = {
        reduction::Constant{},
        reduction::Ramp{1e-9, 2e-9},
        reduction::Table{{{0.0, 0.0}, {1.0, 0.5}, {1.0, 1.0}}},
    };
    for (const auto& s : shapes) {
      const Json j = io::shape_to_json(s);
      const auto back = io::shape_from_json(j, "x", "");
      CHECK(io::shape_to_json(back) == j);
      for (double t : {-1.0, 0.0, 5e-10, 1e-9, 2e-9, 1.0, 2.0}) {
        CHECK(reduction::factor(back, t) == reduction::factor(s, t));
      }
    }
    CHECK(where_of([] { io::shape_from_json(Json::parse(R"({"type":"wave"})"), "x", "/p"); }) ==
          "x: /p/type");
  }

  TEST_CASE("scenarios round-trip through the explicit form") {
    auto s = scenarios::build_fig3b(4, testing::kE, reduction::Ramp{0.0, 1e-9});
    s.expected = scenarios::Expected{{{{0}, 0.5}, {{1, 2, 3}, 0.5}}, "reference"};
    s.notes = "round trip";
    const auto back = io::scenario_from_json(io::scenario_to_json(s), "rt");
    CHECK(back.name == s.name);
    CHECK(back.notes == s.notes);
    CHECK(back.superposition.weights == s.superposition.weights);
    CHECK(back.superposition.couplings == s.superposition.couplings);
    REQUIRE(back.profile.size() == s.profile.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < s.size(); ++j) {
        CHECK(io::shape_to_json(back.profile.shapes()[back.profile.shape_of(i, j)]) ==
              io::shape_to_json(s.profile.shapes()[s.profile.shape_of(i, j)]));
      }
    }
    REQUIRE(back.expected);
    CHECK(back.expected->provenance == "reference");
    CHECK(back.expected->outcomes == s.expected->outcomes);
  }

  TEST_CASE("builders in files match the library builders") {
    const auto f = io::scenario_from_json(
        Json::parse(R"({"builder":"fig3b","params":{"n":5,"e_plateau":2e-25}})"), "b");
    const auto direct = scenarios::build_fig3b(5, 2e-25);
    CHECK(f.superposition.weights == direct.superposition.weights);
    CHECK(f.superposition.couplings == direct.superposition.couplings);

    const auto star = io::scenario_from_json(
        Json::parse(R"({"builder":"biology_star","params":{"n_mutants":3,"c1sq":0.9,
                       "center":"mutant"},"name":"tiny star"})"),
        "b");
    CHECK(star.name == "tiny star");
    CHECK(star.size() == 4);
    CHECK(where_of([] {
            io::scenario_from_json(Json::parse(R"({"builder":"nope"})"), "b");
          }) == "b: /builder");
  }

  TEST_CASE("distribution files") {
    const auto a = io::distribution_from_json(
        io::read_json_file(kRoot / "scenarios/distributions/sphere_a.json"), "a");
    REQUIRE(a.as<massdist::UniformSphere>() != nullptr);
    CHECK(massdist::total_mass(a) == 1.0);

    const auto lat = io::distribution_from_json(
        io::read_json_file(kRoot / "scenarios/distributions/iron_2x2x2.json"), "lat");
    REQUIRE(lat.as<massdist::NucleusLattice>() != nullptr);
    CHECK(lat.as<massdist::NucleusLattice>()->positions.size() == 8);
    CHECK(massdist::total_mass(lat) == doctest::Approx(8 * solidstate::iron().nucleus_mass).scale(0.0));

    const auto grid = io::distribution_from_json(
        Json::parse(R"({"kind":"grid","cell_size":0.5,"dims":[2,1,1],"densities":[1,3]})"), "g");
    CHECK(massdist::total_mass(grid) == doctest::Approx(0.5).scale(0.0));
    CHECK(where_of([] {
            io::distribution_from_json(
                Json::parse(R"({"kind":"grid","cell_size":1,"dims":[2,1,1],"densities":[1]})"),
                "g");
          }) == "g: /densities");
  }

  TEST_CASE("SVG plots are well formed") {
    io::Series a{"a & b", {1, 10, 100}, {1e-3, 1e-2, 1e-1}};
    io::Series b{"<ref>", {1, 10, 100}, {2e-3, 2e-2, 2e-1}};
    io::PlotOptions opts;
    opts.title = "t";
    opts.log_x = true;
    opts.log_y = true;
    const std::string svg = io::svg_line_plot({a, b}, opts);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("a &amp; b") != std::string::npos);
    CHECK(svg.find("&lt;ref&gt;") != std::string::npos);
    CHECK(svg.find("<ref>") == std::string::npos);
    std::size_t polylines = 0;
    for (std::size_t p = svg.find("<polyline"); p != std::string::npos;
         p = svg.find("<polyline", p + 1)) {
      ++polylines;
    }
    CHECK(polylines == 2);
    CHECK(svg.find("nan") == std::string::npos);

    // A flat or empty series still gives a finite plot.
    const std::string flat = io::svg_line_plot({{"flat", {0, 1}, {2, 2}}}, {});
    CHECK(flat.find("nan") == std::string::npos);
    CHECK(flat.find("inf") == std::string::npos);
  }
}
