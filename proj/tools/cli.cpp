#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "reductionlab/errors.hpp"
#include "reductionlab/massdist.hpp"
#include "reductionlab/montecarlo.hpp"
#include "reductionlab/reduction.hpp"
#include "reductionlab/solidstate.hpp"

namespace reductionlab::cli {

namespace {

using io::format_double;
using io::Json;

constexpr const char* kVersion = "reductionlab 0.1.0";

std::optional<double> expected_for(const scenarios::Scenario& s,
                                   const std::vector<std::size_t>& set) {
  if (!s.expected) return std::nullopt;
  const auto it = s.expected->outcomes.find(set);
  if (it == s.expected->outcomes.end()) return std::nullopt;
  return it->second;
}

void add_row(RunReport& r, const scenarios::Scenario& s, const std::vector<std::size_t>& set,
             double p, std::optional<double> se = std::nullopt) {
  ReportRow row;
  row.outcome = io::outcome_label(set);
  row.probability = p;
  row.standard_error = se;
  row.expected = expected_for(s, set);
  if (row.expected) row.provenance = s.expected->provenance;
  r.rows.push_back(std::move(row));
}

void add_none_row(RunReport& r, double p, std::optional<double> se = std::nullopt) {
  ReportRow row;
  row.outcome = "none";
  row.probability = p;
  row.standard_error = se;
  row.provenance = "no trigger before the horizon";
  r.rows.push_back(std::move(row));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
  if (!f) throw Error("cannot write " + path);
}

// Defaults, then constants embedded in a run file, then --constants, then
// the REDUCTIONLAB_CONSTANTS file.
PhysicalConstants resolve_constants(const Json* embedded, const std::string& flag_path) {
  PhysicalConstants c;
  if (embedded) c = io::constants_from_json(*embedded, "constants", c);
  if (!flag_path.empty()) c = io::constants_from_json(io::read_json_file(flag_path), flag_path, c);
  if (const char* env = std::getenv("REDUCTIONLAB_CONSTANTS"); env && *env) {
    c = io::constants_from_json(io::read_json_file(env), env, c);
  }
  return c;
}

Json param_value(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end && *end == '\0' && !text.empty()) {
    if (text.find_first_of(".eE") == std::string::npos && v >= 0 && v == std::floor(v)) {
      return static_cast<std::uint64_t>(v);
    }
    return v;
  }
  return text;
}

std::vector<double> sweep_values(const std::vector<double>& values, double from, double to,
                                 int steps, bool log) {
  if (!values.empty()) return values;
  if (steps < 1) throw InvalidInput("--steps must be >= 1");
  if (log && !(from > 0.0 && to > 0.0)) throw InvalidInput("--log needs a positive range");
  std::vector<double> out;
  for (int k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    out.push_back(log ? from * std::pow(to / from, t) : from + (to - from) * t);
  }
  return out;
}

int cmd_eg(const std::string& file_a, const std::string& file_b,
           const massdist::QuadratureConfig& cfg, const std::string& constants_path,
           std::ostream& out) {
  const PhysicalConstants consts = resolve_constants(nullptr, constants_path);
  const auto a = io::distribution_from_json(io::read_json_file(file_a), file_a);
  const auto b = io::distribution_from_json(io::read_json_file(file_b), file_b);
  const double eg = massdist::pair_eg(a, b, cfg, consts);
  out << "E_G = " << format_double(eg) << " J\n";
  out << "rate = " << format_double(eg / consts.hbar) << " 1/s\n";
  const auto* sa = a.as<massdist::UniformSphere>();
  const auto* sb = b.as<massdist::UniformSphere>();
  if (sa && sb && sa->mass == sb->mass && sa->diameter == sb->diameter) {
    const double sep = norm(sa->center - sb->center);
    const double exact = massdist::sphere_pair_eg(sa->mass, sa->diameter, sep, consts);
    out << "analytic sphere pair = " << format_double(exact) << " J\n";
    out << "relative difference = "
        << format_double(exact > 0.0 ? std::abs(eg - exact) / exact : std::abs(eg)) << "\n";
  }
  return kOk;
}

int cmd_sweep(const std::string& kind, const std::vector<double>& values, double from, double to,
              int steps, bool log, const std::string& material, double mass, double temperature,
              const std::string& geometry, double diameter, std::optional<double> beta,
              std::size_t n, double e_plateau, const std::string& constants_path,
              const std::string& out_path, const std::string& svg_path, std::ostream& out) {
  const PhysicalConstants consts = resolve_constants(nullptr, constants_path);
  std::ostringstream csv;
  io::Series main_series;
  io::Series ref_series;
  io::PlotOptions plot;
  if (kind == "solid_eg_curve") {
    const auto mat = solidstate::preset(material);
    solidstate::MacroGeometry geo;
    geo.kind = geometry == "disc" ? solidstate::MacroGeometry::Kind::disc
                                  : solidstate::MacroGeometry::Kind::rod;
    geo.diameter = diameter;
    geo.beta = beta;
    const auto xs = sweep_values(values, from, to, steps, log);
    const auto curve = solidstate::solid_eg_curve(mass, mat, temperature, geo, xs, 5.0, consts);
    const double plateau = solidstate::solid_plateau_eg(mass, mat, temperature, consts);
    csv << io::csv_line({"delta_x_m", "eg_J", "rate_per_s", "plateau_J"});
    for (const auto& p : curve) {
      csv << io::csv_line({format_double(p.dx), format_double(p.eg),
                           format_double(p.eg / consts.hbar), format_double(plateau)});
      main_series.x.push_back(p.dx);
      main_series.y.push_back(p.eg);
      ref_series.x.push_back(p.dx);
      ref_series.y.push_back(plateau);
    }
    main_series.label = "E_G";
    ref_series.label = "plateau";
    plot = {"E_G against displacement (" + material + ")", "displacement [m]", "E_G [J]", true,
            true};
  } else if (kind == "delayed_detector") {
    const auto base = scenarios::build_fig3b(n, e_plateau);
    const auto xs = sweep_values(values, from, to, steps, log);
    const auto sweep = scenarios::delayed_detector_sweep(base, xs, consts);
    csv << io::csv_line({"delta_t_s", "p1", "p1_closed_form"});
    for (const auto& p : sweep.points) {
      csv << io::csv_line({format_double(p.delta_t), format_double(p.p1), format_double(p.exact)});
      main_series.x.push_back(p.delta_t);
      main_series.y.push_back(p.p1);
      ref_series.x.push_back(p.delta_t);
      ref_series.y.push_back(p.exact);
    }
    out << "tau_fit = " << format_double(sweep.tau_fit) << " s, hbar/E_total = "
        << format_double(sweep.tau_reference) << " s\n";
    main_series.label = "cascade";
    ref_series.label = "closed form";
    plot = {"Delayed detector: p({1}) against delay", "delay [s]", "p({1})", log, false};
  } else if (kind == "fig3b_n") {
    const auto xs = values.empty() ? std::vector<double>{2, 4, 8, 16, 32} : values;
    csv << io::csv_line({"n", "p1_cascade", "p1_static"});
    for (double x : xs) {
      if (x < 2 || x != std::floor(x)) throw InvalidInput("n values must be integers >= 2");
      const auto s = scenarios::build_fig3b(static_cast<std::size_t>(x), e_plateau);
      const auto dist = reduction::cascade_distribution(s.superposition);
      const double p1 = dist.at({0});
      const double ps = reduction::static_probabilities(s.superposition)[0];
      csv << io::csv_line({format_double(x), format_double(p1), format_double(ps)});
      main_series.x.push_back(x);
      main_series.y.push_back(p1);
      ref_series.x.push_back(x);
      ref_series.y.push_back(ps);
    }
    main_series.label = "cascade p({1})";
    ref_series.label = "static p_1";
    plot = {"Mass-conserving detectors: p({1}) against n", "detectors n", "probability", true,
            false};
  } else {
    throw InvalidInput("unknown sweep '" + kind + "'");
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    write_file(out_path, csv.str());
  }
  if (!svg_path.empty()) write_file(svg_path, io::svg_line_plot({main_series, ref_series}, plot));
  return kOk;
}

int cmd_plan(double accuracy, double efficiency, std::ostream& out) {
  out << "successful measurements = " << scenarios::required_successes(accuracy) << "\n";
  out << "total trials = " << scenarios::required_trials(accuracy, efficiency) << "\n";
  return kOk;
}

}  // namespace

RunReport run_scenario(const scenarios::Scenario& s, const RunOptions& opts,
                       const PhysicalConstants& consts) {
  const auto start = std::chrono::steady_clock::now();
  s.validate();
  RunReport r;
  r.scenario = s.name;
  r.method = opts.method;
  reduction::TimedepOptions topts;
  topts.horizon = opts.horizon;
  double horizon_used = 0.0;

  if (opts.method == "static") {
    const auto p = reduction::static_probabilities(s.superposition);
    for (std::size_t j = 0; j < p.size(); ++j) add_row(r, s, {j}, p[j]);
  } else if (opts.method == "timedep") {
    const auto t = reduction::timedep_probabilities(s.superposition, s.profile, topts, consts);
    horizon_used = t.horizon;
    for (std::size_t j = 0; j < t.probabilities.size(); ++j) add_row(r, s, {j}, t.probabilities[j]);
    if (t.residual > 0.0) add_none_row(r, t.residual);
  } else if (opts.method == "cascade") {
    reduction::OutcomeDistribution dist;
    if (reduction::proportional(s.superposition, s.profile)) {
      dist = reduction::cascade_distribution(s.superposition);
    } else {
      dist = reduction::cascade_distribution(s.superposition, s.profile, topts, consts);
      horizon_used = topts.horizon ? *topts.horizon
                                   : reduction::default_horizon(s.superposition, s.profile, 0.0,
                                                                consts);
    }
    // The full set as an outcome means no trigger fired before the horizon.
    std::optional<double> none;
    for (const auto& [set, p] : dist) {
      if (set.size() == s.size()) {
        none = p;
      } else {
        add_row(r, s, set, p);
      }
    }
    if (none) add_none_row(r, *none);
  } else if (opts.method == "mc") {
    if (!reduction::can_trigger(s.superposition)) {
      throw StableSuperpositionError("no trigger can fire: the superposition is stable");
    }
    montecarlo::TrialConfig cfg;
    cfg.seed = opts.seed;
    cfg.n_trials = opts.trials;
    cfg.threads = opts.threads;
    cfg.horizon = opts.horizon;
    const auto est = montecarlo::estimate(s.superposition, s.profile, cfg, consts);
    horizon_used = est.horizon;
    for (const auto& [set, e] : est.outcomes) add_row(r, s, set, e.probability, e.standard_error);
    if (est.n_no_event > 0) {
      const double n = static_cast<double>(est.n_trials);
      const double p = static_cast<double>(est.n_no_event) / n;
      add_none_row(r, p, std::sqrt(p * (1.0 - p) / n));
    }
  } else {
    throw InvalidInput("unknown method '" + opts.method + "'");
  }

  Json meta = io::scenario_to_json(s);
  Json run = {{"method", opts.method}};
  if (opts.method == "mc") {
    run["seed"] = opts.seed;
    run["trials"] = opts.trials;
  }
  if (opts.horizon) run["horizon"] = *opts.horizon;
  meta["run"] = run;
  meta["constants"] = io::constants_to_json(consts);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  meta["report"] = {{"tool", kVersion},
                    {"rng", montecarlo::Rng::kId},
                    {"horizon_used", horizon_used},
                    {"threads", opts.threads},
                    {"wall_clock_s", elapsed}};
  r.metadata = std::move(meta);
  return r;
}

std::string report_csv(const RunReport& report) {
  std::string out = io::csv_line(
      {"scenario", "method", "outcome", "probability", "stderr", "expected", "provenance"});
  for (const auto& row : report.rows) {
    out += io::csv_line({report.scenario, report.method, row.outcome,
                         format_double(row.probability),
                         row.standard_error ? format_double(*row.standard_error) : "",
                         row.expected ? format_double(*row.expected) : "", row.provenance});
  }
  return out;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gravitationally induced state reduction: couplings, probabilities, sweeps",
               "reductionlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // eg
  auto* eg = app.add_subcommand("eg", "E_G and decay rate between two mass distributions");
  std::string eg_a;
  std::string eg_b;
  std::string eg_constants;
  massdist::QuadratureConfig qcfg;
  std::string scheme = "cell_average";
  eg->add_option("a", eg_a, "first distribution file")->required();
  eg->add_option("b", eg_b, "second distribution file")->required();
  eg->add_option("--tolerance", qcfg.rel_tolerance, "relative quadrature tolerance");
  eg->add_option("--resolution", qcfg.grid_resolution, "lattice cells per smallest feature");
  eg->add_option("--max-refinements", qcfg.max_refinements, "refinement levels");
  eg->add_option("--scheme", scheme, "singularity scheme")
      ->check(CLI::IsMember({"cell_average", "offset_midpoint"}));
  eg->add_option("--constants", eg_constants, "constants JSON file");

  // run
  auto* run = app.add_subcommand("run", "reduction probabilities for a scenario");
  std::string run_file;
  std::string builder;
  std::vector<std::string> params;
  RunOptions ropts;
  std::string run_out;
  std::string run_meta;
  std::string run_constants;
  double horizon = 0.0;
  run->add_option("scenario", run_file, "scenario JSON file");
  run->add_option("--builder", builder, "builder name instead of a file");
  run->add_option("--param", params, "builder parameter key=value (repeatable)");
  auto* method_opt = run->add_option("--method", ropts.method, "static, timedep, cascade or mc")
                         ->check(CLI::IsMember({"static", "timedep", "cascade", "mc"}));
  auto* trials_opt = run->add_option("--trials", ropts.trials, "Monte Carlo trials");
  auto* seed_opt = run->add_option("--seed", ropts.seed, "Monte Carlo seed");
  run->add_option("--threads", ropts.threads, "Monte Carlo worker threads");
  auto* horizon_opt = run->add_option("--horizon", horizon, "race horizon in s");
  run->add_option("--out", run_out, "CSV output path (stdout when absent)");
  run->add_option("--meta", run_meta, "metadata JSON output path");
  run->add_option("--constants", run_constants, "constants JSON file");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "one-parameter sweeps with CSV and SVG output");
  std::string sweep_kind;
  std::vector<double> values;
  double from = 0.0;
  double to = 1.0;
  int steps = 20;
  bool log_scale = false;
  std::string material = "iron";
  double mass = 0.1;
  double temperature = 300.0;
  std::string geometry = "rod";
  double diameter = 1e-3;
  double beta_value = 0.0;
  std::size_t n_detectors = 4;
  double e_plateau = 1e-25;
  std::string sweep_out;
  std::string sweep_svg;
  std::string sweep_constants;
  sweep->add_option("kind", sweep_kind, "solid_eg_curve, delayed_detector or fig3b_n")
      ->required()
      ->check(CLI::IsMember({"solid_eg_curve", "delayed_detector", "fig3b_n"}));
  sweep->add_option("--values", values, "explicit parameter values")->delimiter(',');
  sweep->add_option("--from", from, "range start");
  sweep->add_option("--to", to, "range end");
  sweep->add_option("--steps", steps, "intervals in the range");
  sweep->add_flag("--log", log_scale, "logarithmic spacing");
  sweep->add_option("--material", material, "iron, water, sio2 or cu");
  sweep->add_option("--mass", mass, "solid mass in kg");
  sweep->add_option("--temperature", temperature, "K");
  sweep->add_option("--geometry", geometry, "rod or disc")->check(CLI::IsMember({"rod", "disc"}));
  sweep->add_option("--diameter", diameter, "macroscopic diameter in m");
  auto* beta_opt = sweep->add_option("--beta", beta_value, "macroscopic shape factor");
  sweep->add_option("--n", n_detectors, "detectors");
  sweep->add_option("--e-plateau", e_plateau, "coupling scale in J");
  sweep->add_option("--out", sweep_out, "CSV output path");
  sweep->add_option("--svg", sweep_svg, "SVG plot path");
  sweep->add_option("--constants", sweep_constants, "constants JSON file");

  // plan
  auto* plan = app.add_subcommand("plan", "trials needed for a target accuracy");
  double accuracy = 0.01;
  double efficiency = 1.0;
  plan->add_option("--accuracy", accuracy, "target accuracy of p_1")->required();
  plan->add_option("--efficiency", efficiency, "detection efficiency");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kSchemaError;
  }

  try {
    if (*eg) {
      qcfg.singularity_scheme = scheme == "offset_midpoint"
                                    ? massdist::SingularityScheme::offset_midpoint
                                    : massdist::SingularityScheme::cell_average;
      return cmd_eg(eg_a, eg_b, qcfg, eg_constants, out);
    }
    if (*plan) return cmd_plan(accuracy, efficiency, out);
    if (*sweep) {
      std::optional<double> beta;
      if (*beta_opt) beta = beta_value;
      return cmd_sweep(sweep_kind, values, from, to, steps, log_scale, material, mass, temperature,
                       geometry, diameter, beta, n_detectors, e_plateau, sweep_constants,
                       sweep_out, sweep_svg, out);
    }
    // run
    if (run_file.empty() == builder.empty()) {
      err << "error: give either a scenario file or --builder\n";
      return kSchemaError;
    }
    Json doc;
    std::string source;
    if (!run_file.empty()) {
      doc = io::read_json_file(run_file);
      source = run_file;
    } else {
      Json p = Json::object();
      for (const auto& kv : params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
          err << "error: --param expects key=value, got '" << kv << "'\n";
          return kSchemaError;
        }
        p[kv.substr(0, eq)] = param_value(kv.substr(eq + 1));
      }
      doc = {{"builder", builder}, {"params", p}};
      source = "--builder " + builder;
    }
    const auto scenario = io::scenario_from_json(doc, source);
    // Settings stored by an earlier run are defaults; flags win.
    if (doc.is_object() && doc.contains("run")) {
      const Json& stored = doc["run"];
      if (!*method_opt && stored.contains("method")) ropts.method = stored["method"];
      if (!*seed_opt && stored.contains("seed")) ropts.seed = stored["seed"];
      if (!*trials_opt && stored.contains("trials")) ropts.trials = stored["trials"];
      if (!*horizon_opt && stored.contains("horizon")) horizon = stored["horizon"];
      if (stored.contains("horizon") || *horizon_opt) ropts.horizon = horizon;
    } else if (*horizon_opt) {
      ropts.horizon = horizon;
    }
    const Json* embedded = doc.is_object() && doc.contains("constants") ? &doc["constants"] : nullptr;
    const PhysicalConstants consts = resolve_constants(embedded, run_constants);
    const RunReport report = run_scenario(scenario, ropts, consts);
    const std::string csv = report_csv(report);
    if (run_out.empty()) {
      out << csv;
    } else {
      write_file(run_out, csv);
      out << "wrote " << report.rows.size() << " rows to " << run_out << "\n";
    }
    if (!run_meta.empty()) write_file(run_meta, report.metadata.dump(2) + "\n");
    return kOk;
  } catch (const io::SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kSchemaError;
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << " (last " << format_double(e.last_estimate())
        << ", previous " << format_double(e.previous_estimate()) << ")\n";
    return kConvergenceFailure;
  } catch (const StableSuperpositionError& e) {
    err << "stable superposition: " << e.what() << "\n";
    return kStableSuperposition;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return kSchemaError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace reductionlab::cli
