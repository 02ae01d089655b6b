#pragma once

#include "pnmc/pnmc.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

// Command-line front end: job config, pipeline orchestration, JSON reports.
namespace pnmc::cli {

namespace fs = std::filesystem;
using json = io::json;

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"residual", "solve", "reconstruct", "analyze",
                                          "canonicalize", "roundtrip", "export"};
  return c;
}

struct JobConfig {
  std::string command;
  std::string fixture;
  std::string input;
  std::string output;
  std::string report;
  std::string kind = "positive";  ///< jet case: positive | negative | degenerate
  std::size_t n = 65;
  int order = fixtures::kJetOrder;
  double radius = fixtures::kJetRadius;
  std::uint64_t seed = fixtures::kJetSeed;
  double g_edge = fixtures::kDegenerateEdgeG;
  double tol_build = 1e-3;
  double tol_beta = 1e-4;
  double tol_sep = kSeparabilityTol;
  double iso_tol = kIsotropyTol;
  bool literal_quadrature = false;

  json inputs() const {
    return {{"fixture", fixture}, {"input", input},   {"output", output}, {"case", kind},
            {"n", n},             {"order", order},   {"radius", radius}, {"seed", seed},
            {"g_edge", g_edge},   {"literal_quadrature", literal_quadrature}};
  }
  json tolerances() const {
    return {{"tol_build", tol_build}, {"tol_beta", tol_beta}, {"tol_sep", tol_sep}, {"iso_tol", iso_tol}};
  }

  void validate() const {
    auto bad = [](const std::string& m) { return Error(ErrorKind::ConfigError, m, "cli"); };
    if (std::find(commands().begin(), commands().end(), command) == commands().end())
      throw bad("unknown or missing command '" + command + "'");
    for (auto [name, v] : {std::pair{"tol_build", tol_build}, std::pair{"tol_beta", tol_beta},
                           std::pair{"tol_sep", tol_sep}, std::pair{"iso_tol", iso_tol}})
      if (!(v > 0.0) || !std::isfinite(v)) throw bad(std::string(name) + " must be positive");
    if (n < GridSpec::kMinNodes) throw bad("n must be at least 5");
    if (order < 2) throw bad("order must be at least 2");
    if (!(radius > 0.0)) throw bad("radius must be positive");
    (void)case_from_name(kind);
  }
};

namespace detail {

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::ConfigError, std::string("config key '") + key + "' has the wrong type", "cli");
  }
}

}  // namespace detail

/// Reads a JSON job object; unknown keys are rejected.
inline JobConfig config_from_json(const json& j, JobConfig c = {}) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "config must be a JSON object", "cli");
  for (const auto& [k, v] : j.items()) {
    const char* key = k.c_str();
    if (k == "command") c.command = detail::get_as<std::string>(v, key);
    else if (k == "fixture") c.fixture = detail::get_as<std::string>(v, key);
    else if (k == "input") c.input = detail::get_as<std::string>(v, key);
    else if (k == "output") c.output = detail::get_as<std::string>(v, key);
    else if (k == "report") c.report = detail::get_as<std::string>(v, key);
    else if (k == "case") c.kind = detail::get_as<std::string>(v, key);
    else if (k == "n") c.n = detail::get_as<std::size_t>(v, key);
    else if (k == "order") c.order = detail::get_as<int>(v, key);
    else if (k == "radius") c.radius = detail::get_as<double>(v, key);
    else if (k == "seed") c.seed = detail::get_as<std::uint64_t>(v, key);
    else if (k == "g_edge") c.g_edge = detail::get_as<double>(v, key);
    else if (k == "tol_build") c.tol_build = detail::get_as<double>(v, key);
    else if (k == "tol_beta") c.tol_beta = detail::get_as<double>(v, key);
    else if (k == "tol_sep") c.tol_sep = detail::get_as<double>(v, key);
    else if (k == "iso_tol") c.iso_tol = detail::get_as<double>(v, key);
    else if (k == "literal_quadrature") c.literal_quadrature = detail::get_as<bool>(v, key);
    else throw Error(ErrorKind::ConfigError, "unknown config key '" + k + "'", "cli");
  }
  return c;
}

/// 0 success, 1 config/validation, 2 numerical failure, 3 I/O.
constexpr int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::GridTooSmall:
    case ErrorKind::OutOfDomain:
    case ErrorKind::NearZeroField:
    case ErrorKind::DegenerateMetric:
    case ErrorKind::NotIsotropic:
    case ErrorKind::ConfigError: return 1;
    case ErrorKind::IoError: return 3;
    default: return 2;
  }
}

// ---- sources ----

inline bool is_triple_fixture(const std::string& f) {
  return f == "constant" || f == "jet" || f == "goursat-degenerate" || f == "goursat-hyperbolic" ||
         f == "nonsolution" || f == "perturbed";
}

inline CanonicalTriple fixture_triple(const JobConfig& c) {
  const std::string& f = c.fixture;
  if (f == "constant") return fixtures::constant(c.n);
  if (f == "jet") return fixtures::jet(case_from_name(c.kind), c.order, c.radius, c.n, c.seed);
  if (f == "goursat-degenerate") return fixtures::goursat_degenerate(c.n, c.g_edge);
  if (f == "goursat-hyperbolic") return fixtures::goursat_hyperbolic(c.n);
  if (f == "nonsolution") return fixtures::nonsolution(c.n);
  if (f == "perturbed") return fixtures::perturbed(c.n);
  if (f.empty()) throw Error(ErrorKind::ConfigError, "need --fixture or --input", "cli");
  throw Error(ErrorKind::ConfigError, "fixture '" + f + "' does not provide a triple", "cli");
}

inline CanonicalTriple load_triple(const JobConfig& c) {
  if (!c.input.empty()) return io::read_triple_bundle(c.input);
  return fixture_triple(c);
}

inline ReconstructionBundle build(const CanonicalTriple& t, const JobConfig& c) {
  return reconstruct(t, MinkVec::Zero(), standard_frame(), {c.tol_build, false});
}

inline Immersion load_immersion(const JobConfig& c) {
  if (!c.input.empty()) {
    const fs::path p = c.input;
    return io::read_immersion_csv(fs::is_directory(p) ? p / "immersion.csv" : p);
  }
  if (c.fixture == "cylinder") return fixtures::cylinder(c.n);
  return build(fixture_triple(c), c).immersion;
}

inline ClassifyTolerances classify_tolerances(const JobConfig& c) {
  ClassifyTolerances t;
  t.beta = c.tol_beta;
  return t;
}

// ---- commands; each fills metrics and writes outputs ----

inline json residual_metrics(const ResidualReport& r) {
  return {{"max", r.max_abs},
          {"interior_max", r.interior_max_abs},
          {"r1_max", r.r1.max_abs()},
          {"r1_interior_max", interior_max_abs(r.r1)},
          {"r2_max", r.r2.max_abs()},
          {"r2_interior_max", interior_max_abs(r.r2)},
          {"r3_max", r.r3.max_abs()},
          {"r3_interior_max", interior_max_abs(r.r3)}};
}

inline json cmd_residual(const JobConfig& c) { return residual_metrics(residual(load_triple(c))); }

inline json cmd_solve(const JobConfig& c) {
  if (c.fixture != "goursat-degenerate" && c.fixture != "goursat-hyperbolic" && c.fixture != "jet")
    throw Error(ErrorKind::ConfigError, "solve needs --fixture goursat-degenerate|goursat-hyperbolic|jet", "cli");
  const CanonicalTriple t = fixture_triple(c);
  if (!c.output.empty()) io::write_triple_bundle(c.output, t);
  json m = residual_metrics(residual(t));
  m["case"] = std::string(case_name(t.kind));
  m["grid"] = io::grid_json(t.grid());
  return m;
}

inline json cmd_reconstruct(const JobConfig& c) {
  const ReconstructionBundle b = build(load_triple(c), c);
  const json d = io::diagnostics_json(b.diagnostics);
  if (!c.output.empty()) {
    const fs::path o = c.output;
    io::write_immersion_csv(o / "immersion.csv", b.immersion);
    io::write_vtk(o / "immersion.vtk", b.immersion, &b.frames);
    io::write_json(o / "diagnostics.json", d);
  }
  return d;
}

inline json cmd_analyze(const JobConfig& c) {
  const Analysis a = analyze(load_immersion(c), classify_tolerances(c), c.iso_tol);
  json m = io::invariants_json(a.invariants);
  const FrameFunctions& fn = a.functions;
  m["nu"] = io::range_json(fn.nu);
  m["lambda1"] = io::range_json(fn.lambda1);
  m["mu1"] = io::range_json(fn.mu1);
  m["lambda2"] = io::range_json(fn.lambda2);
  m["mu2"] = io::range_json(fn.mu2);
  m["f"] = io::range_json(fn.f);
  m["isotropy_ratio"] = a.frame.form.isotropy_ratio;
  if (!c.output.empty()) {
    const fs::path o = c.output;
    io::write_json(o / "invariants.json", m);
    const InvariantReport& r = a.invariants;
    for (const auto& [name, s] :
         std::vector<std::pair<std::string, const ScalarField*>>{
             {"K_metric", &r.K_metric}, {"K_frame", &r.K_frame}, {"H2", &r.H2}, {"KmH2", &r.KmH2_formula},
             {"Delta1", &r.Delta1}, {"Delta2", &r.Delta2}, {"Delta3", &r.Delta3}, {"lambda1", &fn.lambda1},
             {"mu1", &fn.mu1}, {"lambda2", &fn.lambda2}, {"mu2", &fn.mu2}, {"nu", &fn.nu},
             {"beta1", &fn.beta1}, {"beta2", &fn.beta2}, {"f", &fn.f}})
      io::write_field_csv(o / (name + ".csv"), *s);
  }
  return m;
}

inline json cmd_canonicalize(const JobConfig& c) {
  CanonicalizeOptions opt;
  opt.iso_tol = c.iso_tol;
  opt.sep_tol = c.tol_sep;
  opt.literal_degenerate_quadrature = c.literal_quadrature;
  const CanonicalResult r = canonicalize(load_immersion(c), opt);
  json m{{"case_before", std::string(case_name(r.case_before))},
         {"case_after", std::string(case_name(r.case_after))},
         {"swapped", r.reparam.swapped},
         {"metric_law", r.metric_law},
         {"sigma_relation", r.sigma_relation},
         {"reanalysis_error", r.reanalysis_error},
         {"separability", {{"dev_u", r.separability.dev_u}, {"dev_v", r.separability.dev_v}, {"tol", r.separability.tol}}},
         {"new_grid", io::grid_json(r.reparam.new_grid)}};
  if (!c.output.empty()) {
    const fs::path o = c.output;
    io::write_immersion_csv(o / "immersion.csv", r.immersion);
    io::write_vtk(o / "immersion.vtk", r.immersion);
    io::write_triple_bundle(o, r.triple);
    io::write_json(o / "reparametrization.json", io::reparametrization_json(r.reparam));
  }
  return m;
}

/// Interior max of |lambda1 - lambda|, |mu1 - mu|, |nu - nu| per field.
struct Recovery {
  double lambda = 0.0, mu = 0.0, nu = 0.0;
  double max() const { return std::max({lambda, mu, nu}); }
};

inline Recovery recovery_error(const CanonicalTriple& t, const FrameFunctions& fn) {
  return {interior_max_abs(fn.lambda1 - t.lambda), interior_max_abs(fn.mu1 - t.mu), interior_max_abs(fn.nu - t.nu)};
}

inline std::string recovered_case(const InvariantReport& r) {
  if (interior_min(r.KmH2_formula) > 0.0) return "positive";
  if (interior_max(r.KmH2_formula) < 0.0) return "negative";
  return "mixed";
}

inline json cmd_roundtrip(const JobConfig& c) {
  const CanonicalTriple t = load_triple(c);
  const ReconstructionBundle b = build(t, c);
  const Analysis a = analyze(b.immersion, classify_tolerances(c), c.iso_tol);
  const Recovery e = recovery_error(t, a.functions);
  return {{"recovery_error", e.max()},
          {"lambda_error", e.lambda},
          {"mu_error", e.mu},
          {"nu_error", e.nu},
          {"recovered_case", recovered_case(a.invariants)},
          {"classification", std::string(node_class_name(a.invariants.overall))},
          {"beta_max", a.invariants.beta_max},
          {"K_metric_minus_K_frame", interior_max_abs(a.invariants.K_metric - a.invariants.K_frame)},
          {"diagnostics", io::diagnostics_json(b.diagnostics)}};
}

inline json cmd_export(const JobConfig& c) {
  if (c.input.empty() || c.output.empty())
    throw Error(ErrorKind::ConfigError, "export needs --input and --output", "cli");
  const Immersion m = load_immersion(c);
  std::optional<FrameField> frames;
  try {
    frames = geometric_frame(m, c.iso_tol).frame_field();
  } catch (const Error&) {
  }
  fs::path out = c.output;
  if (out.extension() != ".vtk") out /= "immersion.vtk";
  io::write_vtk(out, m, frames ? &*frames : nullptr);
  return {{"nodes", m.grid.size()}, {"normals", frames.has_value()}, {"vtk", out.string()}};
}

inline json dispatch(const JobConfig& c) {
  if (c.command == "residual") return cmd_residual(c);
  if (c.command == "solve") return cmd_solve(c);
  if (c.command == "reconstruct") return cmd_reconstruct(c);
  if (c.command == "analyze") return cmd_analyze(c);
  if (c.command == "canonicalize") return cmd_canonicalize(c);
  if (c.command == "roundtrip") return cmd_roundtrip(c);
  return cmd_export(c);
}

// ---- argv ----

struct Parsed {
  JobConfig config;
  bool help = false;
  std::string help_text;
};

inline Parsed parse(std::vector<std::string> args) {
  CLI::App app{"Timelike PNMC surfaces in Minkowski 4-space", "pnmc"};
  app.require_subcommand(0, 1);
  for (const auto& name : commands()) app.add_subcommand(name)->fallthrough();

  JobConfig f;
  std::string config_path;
  std::map<std::string, CLI::Option*> o;
  app.add_option("--config", config_path, "JSON job file with a 'command' field");
  o["fixture"] = app.add_option("--fixture", f.fixture, "constant|jet|goursat-degenerate|goursat-hyperbolic|cylinder|nonsolution|perturbed");
  o["input"] = app.add_option("--input", f.input, "triple bundle directory or immersion CSV");
  o["output"] = app.add_option("--output", f.output, "output directory");
  o["report"] = app.add_option("--report", f.report, "also write the JSON report here");
  o["case"] = app.add_option("--case", f.kind, "positive|negative|degenerate");
  o["n"] = app.add_option("--n", f.n, "grid nodes per axis");
  o["order"] = app.add_option("--order", f.order, "jet order");
  o["radius"] = app.add_option("--radius", f.radius, "jet patch half-width");
  o["seed"] = app.add_option("--seed", f.seed, "jet seed");
  o["g_edge"] = app.add_option("--g-edge", f.g_edge, "edge value of ln|mu| for goursat-degenerate");
  o["tol_build"] = app.add_option("--tol-build", f.tol_build);
  o["tol_beta"] = app.add_option("--tol-beta", f.tol_beta);
  o["tol_sep"] = app.add_option("--tol-sep", f.tol_sep);
  o["iso_tol"] = app.add_option("--iso-tol", f.iso_tol);
  o["literal_quadrature"] = app.add_flag("--literal-quadrature", f.literal_quadrature);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    return {{}, true, app.help()};
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorKind::ConfigError, e.what(), "cli");
  }

  JobConfig c;
  if (!config_path.empty()) c = config_from_json(io::read_json(config_path));
  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  // Flags given on the command line override the file.
  if (o["fixture"]->count()) c.fixture = f.fixture;
  if (o["input"]->count()) c.input = f.input;
  if (o["output"]->count()) c.output = f.output;
  if (o["report"]->count()) c.report = f.report;
  if (o["case"]->count()) c.kind = f.kind;
  if (o["n"]->count()) c.n = f.n;
  if (o["order"]->count()) c.order = f.order;
  if (o["radius"]->count()) c.radius = f.radius;
  if (o["seed"]->count()) c.seed = f.seed;
  if (o["g_edge"]->count()) c.g_edge = f.g_edge;
  if (o["tol_build"]->count()) c.tol_build = f.tol_build;
  if (o["tol_beta"]->count()) c.tol_beta = f.tol_beta;
  if (o["tol_sep"]->count()) c.tol_sep = f.tol_sep;
  if (o["iso_tol"]->count()) c.iso_tol = f.iso_tol;
  if (o["literal_quadrature"]->count()) c.literal_quadrature = f.literal_quadrature;
  return {c, false, {}};
}

/// Runs one job and prints its JSON report to out. Returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  json rep{{"command", nullptr}, {"inputs", nullptr}, {"tolerances", nullptr}, {"metrics", json::object()},
           {"status", "ok"}};
  JobConfig c;
  int code = 0;
  try {
    Parsed p = parse(args);
    if (p.help) {
      out << p.help_text;
      return 0;
    }
    c = p.config;
    rep["command"] = c.command;
    rep["inputs"] = c.inputs();
    rep["tolerances"] = c.tolerances();
    c.validate();
    rep["metrics"] = dispatch(c);
  } catch (const Error& e) {
    code = exit_code(e.kind());
    rep["status"] = "error";
    rep["error"] = {{"name", std::string(e.name())}, {"module", e.module()}, {"message", e.what()}};
    if (e.value != 0.0) rep["error"]["value"] = e.value;
    err << e.what() << '\n';
  } catch (const std::exception& e) {
    code = 2;
    rep["status"] = "error";
    rep["error"] = {{"name", "InternalError"}, {"module", "cli"}, {"message", e.what()}};
    err << e.what() << '\n';
  }
  const std::string text = rep.dump(2);
  out << text << '\n';
  if (!c.report.empty()) {
    try {
      io::write_json(c.report, rep);
    } catch (const Error& e) {
      err << e.what() << '\n';
      if (code == 0) code = 3;
    }
  }
  return code;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, out, err);
}

}  // namespace pnmc::cli
