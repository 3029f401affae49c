#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "analytics.hpp"
#include "dynamics.hpp"
#include "markov.hpp"
#include "riccati.hpp"
#include "verify.hpp"

namespace dcg::io {

using nlohmann::ordered_json;

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// json numbers keep full precision through dump(); non-finite values become null
inline ordered_json num(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

inline ordered_json to_json(const GameParams& p) {
  return {{"epsilon", p.epsilon}, {"c", p.c}, {"sigma", p.sigma},
          {"horizon", p.horizon}, {"u", p.u}, {"branching", p.branching}};
}

inline std::string solution_csv(const RiccatiSolution& s) {
  std::string out = "t";
  for (const auto& n : s.phi_names) out += "," + n;
  for (const auto& n : s.psi_names) out += "," + n;
  out += "\n";
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    out += fmt(s.grid.node(k));
    for (const auto& f : s.phi) out += "," + fmt(f[k]);
    for (const auto& f : s.psi) out += "," + fmt(f[k]);
    out += "\n";
  }
  return out;
}

inline ordered_json to_json(const RiccatiSolution& s, bool with_data = true) {
  ordered_json j;
  j["kind"] = name(s.kind);
  j["size"] = s.size;
  j["params"] = to_json(s.params);
  j["grid"] = {{"t0", 0.0}, {"t_end", s.grid.horizon()}, {"step", s.grid.step()}, {"nodes", s.grid.size()}};
  j["tail_mass"] = s.tail_mass;
  if (s.closed_form_error) j["closed_form_max_error"] = *s.closed_form_error;
  j["columns"] = s.phi_names;
  for (const auto& n : s.psi_names) j["columns"].push_back(n);
  if (with_data) {
    ordered_json at_t0 = ordered_json::object();
    for (std::size_t c = 0; c < s.phi.size(); ++c) at_t0[s.phi_names[c]] = num(s.phi[c][0]);
    for (std::size_t c = 0; c < s.psi.size(); ++c) at_t0[s.psi_names[c]] = num(s.psi[c][0]);
    j["values_at_t0"] = at_t0;
  }
  return j;
}

inline std::string stationary_csv(const StationaryCoeffs& s) {
  std::string out = "k,phi\n";
  for (std::size_t k = 0; k < s.values.size(); ++k) out += std::to_string(k) + "," + fmt(s.values[k]) + "\n";
  return out;
}

inline ordered_json to_json(const StationaryCoeffs& s) {
  ordered_json j;
  j["kind"] = name(s.kind.topology);
  if (s.kind.topology == Topology::Mixed) j["u"] = s.kind.u;
  if (s.kind.topology == Topology::Tree) j["d"] = s.kind.d;
  j["values"] = s.values;
  if (s.psi) j["psi"] = num(*s.psi);
  if (s.kind.topology == Topology::Chain) {
    ordered_json ex = ordered_json::array();
    for (std::size_t k = 0; k < s.values.size() && k <= 64; ++k) ex.push_back(chain_coeff_exact(static_cast<int>(k)).str());
    j["exact"] = ex;
  }
  j["tail_mass"] = stationary_tail_mass(s.kind, static_cast<int>(s.values.size()) - 1);
  return j;
}

inline std::string transition_csv(const TransitionMatrix& m) {
  std::string out = "row,col,value\n";
  for (int i = 1; i <= m.size; ++i)
    for (int j = i; j <= m.size; ++j)
      out += std::to_string(i) + "," + std::to_string(j) + "," + fmt(m.entry(i, j)) + "\n";
  return out;
}

inline std::string curve_csv(const std::vector<CurvePoint>& c) {
  std::string out = "t,variance,tail_bound\n";
  for (const auto& p : c) out += fmt(p.t) + "," + fmt(p.value) + "," + fmt(p.tail_bound) + "\n";
  return out;
}

inline ordered_json to_json(const MomentReport& r) {
  ordered_json j;
  j["series_depth"] = r.series_depth;
  j["method"] = r.method;
  if (!r.variance.empty()) {
    j["variance"] = ordered_json::array();
    for (const auto& p : r.variance) j["variance"].push_back({{"t", p.t}, {"value", p.value}, {"tail_bound", p.tail_bound}});
  }
  if (!r.auto_cov.empty()) {
    j["auto_covariance"] = ordered_json::array();
    for (const auto& p : r.auto_cov)
      j["auto_covariance"].push_back({{"s", p.s}, {"t", p.t}, {"value", p.value}, {"tail_bound", p.tail_bound}});
  }
  if (!r.cross.empty()) {
    j["cross_covariance_limit"] = ordered_json::array();
    for (const auto& p : r.cross) j["cross_covariance_limit"].push_back({{"k", p.k}, {"value", p.value}, {"tail_bound", p.tail_bound}});
  }
  if (!r.table.empty()) {
    j["table"] = ordered_json::array();
    for (const auto& row : r.table) {
      ordered_json cr = ordered_json::array();
      for (const auto& c : row.cross) cr.push_back({{"k", c.k}, {"value", c.value}, {"tail_bound", c.tail_bound}});
      j["table"].push_back({{"u", row.u},
                            {"asymptotic_variance", row.asymptotic_variance},
                            {"cross_covariance_limits", cr},
                            {"classification", row.dependent ? "Dependent" : "Independent"}});
    }
  }
  return j;
}

inline ordered_json to_json(const VerificationReport& r) {
  ordered_json j;
  j["check"] = r.name;
  j["passed"] = r.passed();
  j["points"] = ordered_json::array();
  for (const auto& p : r.points) {
    ordered_json prm = ordered_json::object();
    for (const auto& [k, v] : p.params) prm[k] = v;
    ordered_json e{{"label", p.label}, {"params", prm}, {"residual", num(p.residual)},
                   {"tolerance", p.tolerance}, {"comparison", p.upper ? "<=" : ">"}, {"pass", p.pass()}};
    if (!p.error.empty()) e["error"] = p.error;
    j["points"].push_back(e);
  }
  j["notes"] = r.notes;
  return j;
}

inline ordered_json to_json(const ConjectureReport& r) {
  ordered_json j;
  j["params"] = to_json(r.params);
  j["stationary_phi0"] = std::sqrt(r.params.epsilon);
  j["stationary_phi1"] = -std::sqrt(r.params.epsilon) / 2;
  j["points"] = ordered_json::array();
  for (const auto& p : r.points) {
    ordered_json e{{"N", p.n}, {"r", num(p.r)}, {"phi0_t0", num(p.phi0_t0)}, {"phi1_t0", num(p.phi1_t0)},
                   {"sum_residual", num(p.sum_residual)}};
    if (!p.error.empty()) e["error"] = p.error;
    j["points"].push_back(e);
  }
  j["strictly_decreasing"] = r.strictly_decreasing;
  j["decay_exponent"] = r.decay_exponent;
  return j;
}

inline ordered_json to_json(const BcReport& r) {
  return {{"interior_max_diff", r.interior_max_diff}, {"column_N_max_diff", r.column_max_diff},
          {"general_vs_attracted_max_diff", r.general_max_diff}, {"general_psi_max", r.general_psi_max}};
}

// Product-sum curve of a ring solution, one row per node.
inline std::string ring_product_csv(const RiccatiSolution& s) {
  std::string out = "t,product_sum\n";
  const auto N = s.phi.size();
  for (std::size_t n = 0; n < s.grid.size(); ++n) {
    double acc = 0.0;
    for (std::size_t k = 1; k < N; ++k) acc += s.phi[k][n] * s.phi[N - k][n];
    out += fmt(s.grid.node(n)) + "," + fmt(acc) + "\n";
  }
  return out;
}

// Binary bundle: "DCGTRAJ\0", u32 version, u64 paths, u32 players, u32 samples,
// u64 seed, f64 step, f64 t_end, i32 player ids, f64 times, f64 data [path][player][sample].
constexpr char bundle_magic[8] = {'D', 'C', 'G', 'T', 'R', 'A', 'J', '\0'};
constexpr std::uint32_t bundle_version = 1;

inline void write_bundle(const std::filesystem::path& path, const TrajectoryBundle& b) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  auto put = [&](const auto& v) { f.write(reinterpret_cast<const char*>(&v), sizeof v); };
  f.write(bundle_magic, sizeof bundle_magic);
  put(bundle_version);
  put(static_cast<std::uint64_t>(b.n_paths));
  put(static_cast<std::uint32_t>(b.players.size()));
  put(static_cast<std::uint32_t>(b.times.size()));
  put(static_cast<std::uint64_t>(b.seed));
  put(b.config.step);
  put(b.config.t_end);
  for (int p : b.players) put(static_cast<std::int32_t>(p));
  f.write(reinterpret_cast<const char*>(b.times.data()), static_cast<std::streamsize>(b.times.size() * sizeof(double)));
  f.write(reinterpret_cast<const char*>(b.data.data()), static_cast<std::streamsize>(b.data.size() * sizeof(double)));
  if (!f) throw IoError("write failed for " + path.string());
}

inline TrajectoryBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  auto get = [&](auto& v) {
    f.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!f) throw IoError("truncated bundle " + path.string());
  };
  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, bundle_magic, sizeof magic) != 0) throw IoError("not a trajectory bundle");
  std::uint32_t version, np, ns;
  std::uint64_t paths, seed;
  TrajectoryBundle b;
  get(version);
  if (version != bundle_version) throw IoError("unsupported bundle version");
  get(paths);
  get(np);
  get(ns);
  get(seed);
  get(b.config.step);
  get(b.config.t_end);
  b.n_paths = paths;
  b.seed = seed;
  b.config.seed = seed;
  b.config.n_paths = paths;
  for (std::uint32_t i = 0; i < np; ++i) {
    std::int32_t p;
    get(p);
    b.players.push_back(p);
  }
  const auto here = f.tellg();
  f.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(f.tellg() - here);
  f.seekg(here);
  const std::uint64_t cells = remaining / sizeof(double), per_path = static_cast<std::uint64_t>(np) * ns;
  if (paths == 0 || per_path == 0 || remaining % sizeof(double) != 0 || cells < ns ||
      (cells - ns) % per_path != 0 || (cells - ns) / per_path != paths)
    throw IoError("bundle size does not match its header " + path.string());
  b.times.resize(ns);
  b.data.resize(static_cast<std::size_t>(paths) * np * ns);
  f.read(reinterpret_cast<char*>(b.times.data()), static_cast<std::streamsize>(ns * sizeof(double)));
  f.read(reinterpret_cast<char*>(b.data.data()), static_cast<std::streamsize>(b.data.size() * sizeof(double)));
  if (!f) throw IoError("truncated bundle " + path.string());
  return b;
}

} // namespace dcg::io
