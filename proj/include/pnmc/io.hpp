#pragma once

#include "pnmc/canonical_params.hpp"
#include "pnmc/errors.hpp"
#include "pnmc/fields.hpp"
#include "pnmc/frame_integration.hpp"
#include "pnmc/immersion.hpp"
#include "pnmc/natural_systems.hpp"
#include "pnmc/surface_analysis.hpp"

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// CSV, legacy VTK and JSON exchange formats.
namespace pnmc::io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace detail {

inline std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string(), "io");
  out.precision(17);
  return out;
}

inline std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + p.string(), "io");
  return in;
}

inline void expect_header(std::istream& in, const std::string& header, const fs::path& p) {
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    throw Error(ErrorKind::IoError, p.string() + ": expected header '" + header + "', got '" + line + "'", "io");
}

/// Rows of doubles with a fixed column count.
inline std::vector<std::vector<double>> read_rows(std::istream& in, std::size_t cols, const fs::path& p) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> r;
    const char* s = line.c_str();
    while (*s) {
      char* end = nullptr;
      const double x = std::strtod(s, &end);
      if (end == s) break;
      r.push_back(x);
      s = end;
      while (*s == ',' || *s == ' ' || *s == '\r') ++s;
    }
    if (r.size() != cols || *s)
      throw Error(ErrorKind::IoError, p.string() + ":" + std::to_string(lineno) + ": malformed row", "io");
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Recovers the grid from u-major, v-fastest (u, v) columns.
inline GridSpec grid_from_rows(const std::vector<std::vector<double>>& rows, const fs::path& p) {
  if (rows.empty()) throw Error(ErrorKind::IoError, p.string() + ": no data rows", "io");
  std::size_t nv = 1;
  while (nv < rows.size() && rows[nv][0] == rows[0][0]) ++nv;
  if (rows.size() % nv != 0) throw Error(ErrorKind::IoError, p.string() + ": ragged grid", "io");
  const std::size_t nu = rows.size() / nv;
  GridSpec g{rows.front()[0], rows.back()[0], rows.front()[1], rows.back()[1], nu, nv};
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::IoError, p.string() + ": " + e.what(), "io");
  }
  for (std::size_t i = 0; i < nu; ++i)
    for (std::size_t j = 0; j < nv; ++j) {
      const auto& r = rows[g.index(i, j)];
      const double tu = 1e-12 * (1.0 + std::abs(g.u(i))), tv = 1e-12 * (1.0 + std::abs(g.v(j)));
      if (std::abs(r[0] - g.u(i)) > tu || std::abs(r[1] - g.v(j)) > tv)
        throw Error(ErrorKind::IoError, p.string() + ": nodes are not a uniform u-major grid", "io");
    }
  return g;
}

}  // namespace detail

// ---- CSV ----

inline void write_field_csv(const fs::path& p, const ScalarField& s) {
  auto out = detail::open_out(p);
  const GridSpec& g = s.grid();
  out << "u,v,value\n";
  for (std::size_t i = 0; i < g.nu; ++i)
    for (std::size_t j = 0; j < g.nv; ++j)
      out << detail::fmt17(g.u(i)) << ',' << detail::fmt17(g.v(j)) << ',' << detail::fmt17(s(i, j)) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + p.string(), "io");
}

inline ScalarField read_field_csv(const fs::path& p) {
  auto in = detail::open_in(p);
  detail::expect_header(in, "u,v,value", p);
  const auto rows = detail::read_rows(in, 3, p);
  const GridSpec g = detail::grid_from_rows(rows, p);
  std::vector<double> vals(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) vals[k] = rows[k][2];
  return ScalarField(g, std::move(vals));
}

inline void write_immersion_csv(const fs::path& p, const Immersion& m) {
  auto out = detail::open_out(p);
  const GridSpec& g = m.grid;
  out << "u,v,x1,x2,x3,x4\n";
  for (std::size_t i = 0; i < g.nu; ++i)
    for (std::size_t j = 0; j < g.nv; ++j) {
      const MinkVec& z = m(i, j);
      out << detail::fmt17(g.u(i)) << ',' << detail::fmt17(g.v(j));
      for (int c = 0; c < 4; ++c) out << ',' << detail::fmt17(z[c]);
      out << '\n';
    }
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + p.string(), "io");
}

inline Immersion read_immersion_csv(const fs::path& p) {
  auto in = detail::open_in(p);
  detail::expect_header(in, "u,v,x1,x2,x3,x4", p);
  const auto rows = detail::read_rows(in, 6, p);
  const GridSpec g = detail::grid_from_rows(rows, p);
  Immersion m{g, std::vector<MinkVec>(rows.size())};
  for (std::size_t k = 0; k < rows.size(); ++k) m.points[k] = MinkVec(rows[k][2], rows[k][3], rows[k][4], rows[k][5]);
  return m;
}

// ---- JSON pieces ----

inline json grid_json(const GridSpec& g) {
  return {{"u0", g.u0}, {"u1", g.u1}, {"v0", g.v0}, {"v1", g.v1}, {"nu", g.nu}, {"nv", g.nv}};
}

inline GridSpec grid_from_json(const json& j) {
  try {
    GridSpec g{j.at("u0").get<double>(), j.at("u1").get<double>(), j.at("v0").get<double>(),
               j.at("v1").get<double>(), j.at("nu").get<std::size_t>(), j.at("nv").get<std::size_t>()};
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("grid: ") + e.what(), "io");
  }
}

inline void write_json(const fs::path& p, const json& j) {
  auto out = detail::open_out(p);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + p.string(), "io");
}

inline json read_json(const fs::path& p) {
  auto in = detail::open_in(p);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IoError, p.string() + ": " + e.what(), "io");
  }
}

inline json diagnostics_json(const ReconstructionDiagnostics& d) {
  return {{"gram_drift", d.gram_drift},
          {"path_discrepancy", d.path_discrepancy},
          {"compat_max", d.compat_max},
          {"residual_max", d.residual_max},
          {"position_path_discrepancy", d.position_path_discrepancy}};
}

inline json range_json(const ScalarField& s) {
  return {{"interior_max", interior_max(s)}, {"interior_min", interior_min(s)}};
}

inline json invariants_json(const InvariantReport& r) {
  json j;
  j["K_metric"] = range_json(r.K_metric);
  j["K_frame"] = range_json(r.K_frame);
  j["H2"] = range_json(r.H2);
  j["KmH2_direct"] = range_json(r.KmH2_direct);
  j["KmH2_formula"] = range_json(r.KmH2_formula);
  j["Delta1"] = range_json(r.Delta1);
  j["Delta2"] = range_json(r.Delta2);
  j["Delta3"] = range_json(r.Delta3);
  j["K_metric_minus_K_frame"] = interior_max_abs(r.K_metric - r.K_frame);
  j["classification"] = std::string(node_class_name(r.overall));
  j["nu_variation"] = r.nu_variation;
  j["beta_max"] = r.beta_max;
  j["beta_tol"] = r.beta_tol;
  return j;
}

inline json reparametrization_json(const Reparametrization& r) {
  return {{"kind", std::string(case_name(r.kind))},
          {"swapped", r.swapped},
          {"new_grid", grid_json(r.new_grid)},
          {"phi", r.phi},
          {"psi", r.psi},
          {"ubar", r.ubar},
          {"vbar", r.vbar}};
}

// ---- triple bundle: lambda.csv, mu.csv, nu.csv, triple.json ----

inline void write_triple_bundle(const fs::path& dir, const CanonicalTriple& t) {
  write_field_csv(dir / "lambda.csv", t.lambda);
  write_field_csv(dir / "mu.csv", t.mu);
  write_field_csv(dir / "nu.csv", t.nu);
  write_json(dir / "triple.json",
             {{"case", std::string(case_name(t.kind))}, {"sign_mu", t.sign_mu()}, {"grid", grid_json(t.grid())}});
}

inline CanonicalTriple read_triple_bundle(const fs::path& dir) {
  const json meta = read_json(dir / "triple.json");
  CanonicalTriple t{read_field_csv(dir / "lambda.csv"), read_field_csv(dir / "mu.csv"),
                    read_field_csv(dir / "nu.csv"), SurfaceCase::NegativeKH};
  try {
    t.kind = case_from_name(meta.at("case").get<std::string>());
    if (meta.contains("grid") && !(grid_from_json(meta["grid"]) == t.grid()))
      throw Error(ErrorKind::IoError, "triple.json grid does not match the CSV fields", "io");
    if (meta.contains("sign_mu") && meta["sign_mu"].get<int>() != t.sign_mu())
      throw Error(ErrorKind::IoError, "triple.json sign_mu does not match mu.csv", "io");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IoError, std::string("triple.json: ") + e.what(), "io");
  }
  ScalarField::check_same_grid(t.lambda, t.mu);
  ScalarField::check_same_grid(t.nu, t.mu);
  return t;
}

// ---- legacy VTK ----

/**
 * ASCII STRUCTURED_GRID. VTK's first dimension runs fastest, so DIMENSIONS is nv nu 1
 * to match the u-major storage. Points are (x1,x2,x3), x4 is point scalar data.
 */
inline void write_vtk(const fs::path& p, const Immersion& m, const FrameField* frames = nullptr) {
  if (frames && !(frames->grid == m.grid))
    throw Error(ErrorKind::InvalidArgument, "frame grid does not match immersion grid", "io");
  auto out = detail::open_out(p);
  const GridSpec& g = m.grid;
  out << "# vtk DataFile Version 3.0\nimmersion in R^4_1\nASCII\nDATASET STRUCTURED_GRID\n";
  out << "DIMENSIONS " << g.nv << ' ' << g.nu << " 1\n";
  out << "POINTS " << g.size() << " double\n";
  for (const MinkVec& z : m.points)
    out << detail::fmt17(z[0]) << ' ' << detail::fmt17(z[1]) << ' ' << detail::fmt17(z[2]) << '\n';
  out << "POINT_DATA " << g.size() << "\nSCALARS x4 double 1\nLOOKUP_TABLE default\n";
  for (const MinkVec& z : m.points) out << detail::fmt17(z[3]) << '\n';
  if (frames) {
    for (int r : {2, 3}) {
      out << "VECTORS n" << (r - 1) << " double\n";
      for (const FrameState& f : frames->frames) {
        const MinkVec n = f.vec(r);
        out << detail::fmt17(n[0]) << ' ' << detail::fmt17(n[1]) << ' ' << detail::fmt17(n[2]) << '\n';
      }
    }
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + p.string(), "io");
}

}  // namespace pnmc::io
