// dcg: command-line front end for the directed-chain game library.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dcg.hpp"
#include "dcg/io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace dcg;

namespace {

constexpr const char* version = "1.0.0";

struct Command {
  std::string name;
  std::string help;
  ordered_json defaults;  // also defines the accepted keys and their types
  std::function<void(const ordered_json&, const fs::path&, std::vector<std::string>&)> run;
};

ordered_json common_defaults() {
  return {{"out", "out"}, {"format", "both"}, {"threads", 0}};
}

ordered_json game_defaults(double T = 1.0) {
  return {{"eps", 1.0}, {"c", 1.0}, {"sigma", 1.0}, {"T", T}, {"step", 1e-3}};
}

ordered_json merge(ordered_json a, const ordered_json& b) {
  for (auto it = b.begin(); it != b.end(); ++it) a[it.key()] = it.value();
  return a;
}

// Parse a flag string into the type of the default value.
ordered_json coerce(const std::string& key, const std::string& raw, const ordered_json& like) {
  try {
    if (like.is_array()) {
      ordered_json arr = ordered_json::array();
      std::stringstream ss(raw);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        if (!like.empty() && like.front().is_number_integer()) {
          const long long v = std::stoll(item, &pos);
          if (pos != item.size()) throw std::invalid_argument(item);
          arr.push_back(v);
        } else {
          const double v = std::stod(item, &pos);
          if (pos != item.size()) throw std::invalid_argument(item);
          arr.push_back(v);
        }
      }
      return arr;
    }
    std::size_t pos = 0;
    if (like.is_number_integer()) {
      const long long v = std::stoll(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    }
    if (like.is_number()) {
      const double v = std::stod(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    }
  } catch (const std::exception&) {
    throw ValidationError("bad value for --" + key + ": " + raw);
  }
  return raw;
}

void check_types(const ordered_json& cfg, const ordered_json& defaults) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (!defaults.contains(it.key())) throw ValidationError("unknown config key: " + it.key());
    const auto& d = defaults[it.key()];
    const auto& v = it.value();
    const bool ok = (d.is_number_integer() && v.is_number_integer()) || (d.is_number_float() && v.is_number()) ||
                    (d.is_string() && v.is_string()) || (d.is_array() && v.is_array());
    if (!ok) throw ValidationError("wrong type for config key: " + it.key());
  }
}

GameParams game(const ordered_json& c) {
  GameParams p;
  p.epsilon = c.value("eps", 1.0);
  p.c = c.value("c", 1.0);
  p.sigma = c.value("sigma", 1.0);
  p.horizon = c.value("T", 1.0);
  p.u = c.value("u", 1.0);
  p.branching = c.value("d", 1);
  p.validate();
  return p;
}

TimeGrid grid(const ordered_json& c) { return TimeGrid(c.at("T").get<double>(), c.at("step").get<double>()); }

bool want_csv(const ordered_json& c) { return c.at("format") != "json"; }
bool want_json(const ordered_json& c) { return c.at("format") != "csv"; }

void emit(const fs::path& dir, const std::string& file, const std::string& text, std::vector<std::string>& files) {
  io::write_text(dir / file, text);
  files.push_back(file);
}

int as_int(const ordered_json& c, const char* key) {
  const long long v = c.at(key).get<long long>();
  require(v >= std::numeric_limits<int>::min() && v <= std::numeric_limits<int>::max(), std::string(key) + " out of range");
  return static_cast<int>(v);
}

std::vector<int> int_list(const ordered_json& c, const char* key) {
  std::vector<int> v;
  for (const auto& x : c.at(key)) {
    require(x.is_number_integer(), std::string(key) + " must hold integers");
    v.push_back(x.get<int>());
  }
  return v;
}

std::vector<double> real_list(const ordered_json& c, const char* key) {
  std::vector<double> v;
  for (const auto& x : c.at(key)) {
    require(x.is_number(), std::string(key) + " must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

CoeffKind kind_of(const ordered_json& c) {
  const auto k = c.at("kind").get<std::string>();
  if (k == "chain") return CoeffKind::chain();
  if (k == "mixed") return CoeffKind::mixed(c.at("u").get<double>());
  if (k == "tree") return CoeffKind::tree(as_int(c, "d"));
  throw ValidationError("kind must be chain, mixed or tree");
}

void write_solution(const std::string& cmd, const RiccatiSolution& s, const ordered_json& c, const fs::path& dir,
                    std::vector<std::string>& files) {
  if (want_csv(c)) emit(dir, cmd + ".csv", io::solution_csv(s), files);
  if (want_json(c)) emit(dir, cmd + ".json", io::to_json(s).dump(2) + "\n", files);
}

std::vector<Command> commands() {
  std::vector<Command> v;

  v.push_back({"solve-chain", "finite directed chain", merge(game_defaults(), {{"N", 3}, {"bc", "attracted"}, {"a1", 1.0}, {"a2", 0.0}, {"m", 0.0}, {"c1", 1.0}, {"c2", 0.0}}),
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 const auto b = c.at("bc").get<std::string>();
                 BoundaryCondition bcnd;
                 if (b == "attracted") bcnd = bc::AttractedToZero{};
                 else if (b == "no-control") bcnd = bc::NoControl{};
                 else if (b == "general") bcnd = bc::General{c.at("a1"), c.at("a2"), c.at("m"), c.at("c1"), c.at("c2")};
                 else throw ValidationError("bc must be attracted, no-control or general");
                 write_solution("solve-chain", solve_finite_chain(game(c), bcnd, as_int(c, "N"), grid(c)), c, dir, files);
               }});

  v.push_back({"solve-ring", "periodic chain (circulant reduction)", merge(game_defaults(10.0), {{"N", 4}}),
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 const auto s = solve_periodic_chain(game(c), as_int(c, "N"), grid(c));
                 write_solution("solve-ring", s, c, dir, files);
                 if (want_csv(c)) emit(dir, "solve-ring_product.csv", io::ring_product_csv(s), files);
               }});

  v.push_back({"solve-tree", "directed tree offsets", merge(game_defaults(2.0), {{"d", 2}, {"depth", 30}}),
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 write_solution("solve-tree", solve_tree(game(c), as_int(c, "depth"), grid(c)), c, dir, files);
               }});

  v.push_back({"solve-infinite", "infinite chain offsets", merge(game_defaults(2.0), {{"depth", 30}}),
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 write_solution("solve-infinite", solve_infinite_chain(game(c), as_int(c, "depth"), grid(c)), c, dir, files);
               }});

  v.push_back({"solve-mixed", "chain/mean-field mixture (N = 0 selects the infinite system)",
               merge(game_defaults(2.0), {{"u", 0.5}, {"depth", 30}, {"N", 0}}),
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 const int N = as_int(c, "N");
                 const auto p = game(c);
                 const auto s = N == 0 ? solve_mixed_infinite(p, as_int(c, "depth"), grid(c)) : solve_mixed_finite(p, N, grid(c));
                 write_solution("solve-mixed", s, c, dir, files);
               }});

  v.push_back({"stationary", "stationary Catalan coefficients", {{"kind", "chain"}, {"depth", 10}, {"u", 1.0}, {"d", 2}},
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 const auto s = stationary_coeffs(kind_of(c), as_int(c, "depth"));
                 if (want_csv(c)) emit(dir, "stationary.csv", io::stationary_csv(s), files);
                 if (want_json(c)) emit(dir, "stationary.json", io::to_json(s).dump(2) + "\n", files);
               }});

  v.push_back({"transition", "closed-form transition kernel", {{"kind", "chain"}, {"u", 1.0}, {"d", 2}, {"size", 16}, {"t", 1.0}, {"paths", 0}, {"seed", 42}},
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 const auto g = build_generator(kind_of(c), as_int(c, "size"));
                 const auto m = transition_matrix(g, c.at("t").get<double>());
                 ordered_json j{{"t", m.t}, {"size", m.size}, {"generator_q", g.offdiag}, {"offsets", m.offsets},
                                {"row_sum_first", m.row_sum(1)}, {"survival", survival_probability(g, m.t)},
                                {"q_squared_residual", q_squared_residual(g).residual}};
                 const long long paths = c.at("paths").get<long long>();
                 require(paths >= 0, "paths must be >= 0");
                 if (paths > 0) {
                   const auto r = sample_chain(g, m.t, static_cast<std::uint64_t>(paths), c.at("seed").get<std::uint64_t>(),
                                               c.at("threads").get<unsigned>());
                   j["sample"] = {{"paths", r.n_paths}, {"counts", r.counts}, {"escaped", r.escaped}, {"killed", r.killed}};
                 }
                 if (want_csv(c)) emit(dir, "transition.csv", io::transition_csv(m), files);
                 if (want_json(c)) emit(dir, "transition.json", j.dump(2) + "\n", files);
               }});

  v.push_back({"simulate", "Euler-Maruyama equilibrium particle system",
               {{"mode", "chain"}, {"M", 64}, {"J", 40}, {"step", 0.01}, {"t_end", 10.0}, {"paths", 1000}, {"seed", 42}, {"sigma", 1.0},
                {"u", 1.0}, {"d", 1}, {"record_every", 10}, {"players", ordered_json::array({1})}, {"source", "stationary"}, {"eps", 1.0}, {"c", 1.0}},
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 const auto mode = c.at("mode").get<std::string>();
                 SimMode sm = mode == "chain" ? SimMode::Chain : mode == "mixed" ? SimMode::Mixed : mode == "tree" ? SimMode::Tree
                                                                                                     : throw ValidationError("mode must be chain, mixed or tree");
                 const int M = as_int(c, "M"), J = as_int(c, "J");
                 require(J >= 1 && J < M, "J must satisfy 1 <= J < M");
                 auto cfg = stationary_config(sm, M, J, c.at("u").get<double>(), as_int(c, "d"));
                 cfg.step = c.at("step");
                 cfg.t_end = c.at("t_end");
                 const long long paths = c.at("paths").get<long long>();
                 require(paths >= 2, "paths must be >= 2");
                 cfg.n_paths = static_cast<std::uint64_t>(paths);
                 cfg.seed = c.at("seed").get<std::uint64_t>();
                 cfg.sigma = c.at("sigma");
                 cfg.record_every = as_int(c, "record_every");
                 cfg.record_players = int_list(c, "players");
                 cfg.threads = c.at("threads").get<unsigned>();
                 std::optional<RiccatiSolution> sol;
                 const auto source = c.at("source").get<std::string>();
                 if (source == "riccati") {
                   GameParams p{c.at("eps"), c.at("c"), cfg.sigma, cfg.t_end, cfg.u, cfg.branching};
                   const TimeGrid g(cfg.t_end, cfg.step);
                   sol = sm == SimMode::Mixed ? solve_mixed_infinite(p, J, g) : sm == SimMode::Tree ? solve_tree(p, J, g) : solve_infinite_chain(p, J, g);
                   cfg.riccati = &*sol;
                 } else {
                   require(source == "stationary", "source must be stationary or riccati");
                 }
                 const auto b = simulate(cfg);
                 io::write_bundle(dir / "trajectories.bin", b);
                 files.push_back("trajectories.bin");
                 std::vector<MomentRequest> req;
                 for (int p : b.players)
                   for (double t : b.times) req.push_back({p, p, t, t});
                 const auto est = estimate_moments(b, req);
                 std::string csv = "player,t,variance,std_error\n";
                 for (const auto& e : est)
                   csv += std::to_string(e.request.player_a) + "," + io::fmt(e.request.time_a) + "," + io::fmt(e.covariance) + "," + io::fmt(e.std_error) + "\n";
                 const double ve = est.empty() ? 0.0 : est[b.times.size() - 1].covariance;
                 ordered_json j{{"paths", b.n_paths}, {"seed", b.seed}, {"players", b.players}, {"samples", b.times.size()},
                                {"trusted_players", b.trusted_players}, {"warnings", b.warnings},
                                {"tail_mass", stationary_tail_mass(sm == SimMode::Mixed ? CoeffKind::mixed(cfg.u) : CoeffKind::chain(), J)},
                                {"variance_first_player_t_end", ve}};
                 if (sm != SimMode::Tree && cfg.sigma == 1.0) j["analytic_variance_t_end"] = variance_at(cfg.t_end, sm == SimMode::Mixed ? cfg.u : 1.0, 60).value;
                 if (want_csv(c)) emit(dir, "simulate.csv", csv, files);
                 if (want_json(c)) emit(dir, "simulate.json", j.dump(2) + "\n", files);
               }});

  v.push_back({"variance", "exact variance curve", {{"u", 1.0}, {"t", ordered_json::array({1.0, 5.0, 10.0, 20.0})}, {"depth", 60}},
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 MomentReport r;
                 r.series_depth = as_int(c, "depth");
                 const double u = c.at("u");
                 r.variance = variance_curve(real_list(c, "t"), u, r.series_depth);
                 auto j = io::to_json(r);
                 j["asymptotic_variance"] = asymptotic_variance(u);
                 if (want_csv(c)) emit(dir, "variance.csv", io::curve_csv(r.variance), files);
                 if (want_json(c)) emit(dir, "variance.json", j.dump(2) + "\n", files);
               }});

  v.push_back({"covariance", "auto-covariance and cross-covariance limits",
               {{"u", 1.0}, {"s", 1.0}, {"t", ordered_json::array({1.0, 5.0, 10.0, 20.0})}, {"k", ordered_json::array({0, 1, 2, 3, 4})}, {"depth", 60}},
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 MomentReport r;
                 r.series_depth = as_int(c, "depth");
                 const double u = c.at("u"), s = c.at("s");
                 for (double t : real_list(c, "t")) r.auto_cov.push_back(auto_covariance(s, t, u, r.series_depth));
                 for (int k : int_list(c, "k")) r.cross.push_back(cross_covariance_limit(k, u, r.series_depth));
                 std::string csv = "s,t,autocovariance,tail_bound\n";
                 for (const auto& a : r.auto_cov) csv += io::fmt(a.s) + "," + io::fmt(a.t) + "," + io::fmt(a.value) + "," + io::fmt(a.tail_bound) + "\n";
                 if (want_csv(c)) emit(dir, "covariance.csv", csv, files);
                 if (want_json(c)) emit(dir, "covariance.json", io::to_json(r).dump(2) + "\n", files);
               }});

  v.push_back({"table1", "asymptotic variance and dependence by mixing weight",
               {{"u", ordered_json::array({0.0, 0.5, 1.0})}, {"depth", 60}},
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 const auto r = table1_report(real_list(c, "u"), as_int(c, "depth"));
                 std::string csv = "u,asymptotic_variance,cross_1,cross_2,cross_3,cross_4,classification\n";
                 for (const auto& row : r.table) {
                   csv += io::fmt(row.u) + "," + io::fmt(row.asymptotic_variance);
                   for (const auto& x : row.cross) csv += "," + io::fmt(x.value);
                   csv += std::string(",") + (row.dependent ? "Dependent" : "Independent") + "\n";
                 }
                 if (want_csv(c)) emit(dir, "table1.csv", csv, files);
                 if (want_json(c)) emit(dir, "table1.json", io::to_json(r).dump(2) + "\n", files);
               }});

  v.push_back({"verify-conjecture", "product-sum decay on the ring",
               merge(game_defaults(10.0), {{"N", ordered_json::array({4, 8, 16, 32, 64, 100})}}),
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 const auto r = conjecture_decay(game(c), int_list(c, "N"), grid(c), c.at("threads").get<unsigned>(), want_csv(c));
                 if (want_csv(c)) {
                   std::string csv = "N,r,phi0_t0,phi1_t0,sum_residual\n";
                   for (const auto& p : r.points)
                     csv += std::to_string(p.n) + "," + io::fmt(p.r) + "," + io::fmt(p.phi0_t0) + "," + io::fmt(p.phi1_t0) + "," + io::fmt(p.sum_residual) + "\n";
                   emit(dir, "verify-conjecture.csv", csv, files);
                   for (const auto& s : r.curves) {
                     emit(dir, "ring_N" + std::to_string(s.size) + ".csv", io::solution_csv(s), files);
                     emit(dir, "ring_N" + std::to_string(s.size) + "_product.csv", io::ring_product_csv(s), files);
                   }
                 }
                 if (want_json(c)) emit(dir, "verify-conjecture.json", io::to_json(r).dump(2) + "\n", files);
               }});

  v.push_back({"verify-bc", "boundary-condition independence", merge(game_defaults(2.0), {{"N", 6}}),
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 const auto r = bc_report(game(c), as_int(c, "N"), grid(c));
                 std::string csv = "check,residual,tolerance,pass\n";
                 for (const auto& p : r.points) csv += p.label + "," + io::fmt(p.residual) + "," + io::fmt(p.tolerance) + "," + (p.pass() ? "1" : "0") + "\n";
                 if (want_csv(c)) emit(dir, "verify-bc.csv", csv, files);
                 if (want_json(c)) emit(dir, "verify-bc.json", io::to_json(r).dump(2) + "\n", files);
               }});

  v.push_back({"identity-suite", "sum-to-zero, Q^2 and rho/Bessel identities", {{"step", 1e-3}},
               [](const ordered_json& c, const fs::path& dir, std::vector<std::string>& files) {
                 const auto r = identity_suite(c.at("step").get<double>());
                 std::string csv = "check,params,residual,tolerance,pass\n";
                 for (const auto& p : r.points) {
                   std::string prm;
                   for (const auto& [k, x] : p.params) prm += (prm.empty() ? "" : ";") + k + "=" + io::fmt(x);
                   csv += p.label + "," + prm + "," + io::fmt(p.residual) + "," + io::fmt(p.tolerance) + "," + (p.pass() ? "1" : "0") + "\n";
                 }
                 if (want_csv(c)) emit(dir, "identity-suite.csv", csv, files);
                 if (want_json(c)) emit(dir, "identity-suite.json", io::to_json(r).dump(2) + "\n", files);
               }});
  return v;
}

int fail(int status, const char* kind, const std::string& msg) {
  ordered_json m = msg;
  std::fprintf(stderr, "dcg: error status=%d kind=%s message=%s\n", status, kind, m.dump().c_str());
  return status;
}

} // namespace

int main(int argc, char** argv) {
  auto cmds = commands();
  CLI::App app{"Open-loop Nash equilibria of directed-chain LQ games and Catalan Markov chains"};
  app.set_version_flag("--version", version);
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::string> config_path;
  for (auto& cmd : cmds) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    const auto defs = merge(common_defaults(), cmd.defaults);
    for (auto it = defs.begin(); it != defs.end(); ++it) {
      std::string flag = "--" + it.key();
      std::replace(flag.begin() + 2, flag.end(), '_', '-');
      sub->add_option(flag, raw[cmd.name][it.key()], "default " + it.value().dump());
    }
    sub->add_option("--config", config_path[cmd.name], "JSON config; flags take precedence");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(1, "usage", e.what());
  }

  const auto started = std::chrono::steady_clock::now();
  for (auto& cmd : cmds) {
    auto* sub = app.get_subcommand(cmd.name);
    if (!sub->parsed()) continue;
    try {
      const auto defs = merge(common_defaults(), cmd.defaults);
      ordered_json cfg = defs;
      if (!config_path[cmd.name].empty()) {
        ordered_json file;
        try {
          file = ordered_json::parse(io::read_text(config_path[cmd.name]));
        } catch (const ordered_json::parse_error& e) {
          throw ValidationError(std::string("config is not valid JSON: ") + e.what());
        }
        if (file.contains("config") && file.contains("command")) file = file["config"];
        require(file.is_object(), "config must be a JSON object");
        check_types(file, defs);
        cfg = merge(cfg, file);
      }
      for (auto it = defs.begin(); it != defs.end(); ++it) {
        std::string flag = "--" + it.key();
        std::replace(flag.begin() + 2, flag.end(), '_', '-');
        if (sub->count(flag) > 0) cfg[it.key()] = coerce(it.key(), raw[cmd.name][it.key()], it.value());
      }
      const auto fmt = cfg.at("format").get<std::string>();
      require(fmt == "csv" || fmt == "json" || fmt == "both", "format must be csv, json or both");
      require(cfg.at("threads").get<long long>() >= 0, "threads must be >= 0");

      const fs::path dir = cfg.at("out").get<std::string>();
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());

      std::vector<std::string> files;
      cmd.run(cfg, dir, files);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      files.push_back("manifest.json");
      ordered_json manifest{{"command", cmd.name}, {"config", cfg}, {"library_version", version},
                            {"wall_time_seconds", wall}, {"files", files}};
      io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const ValidationError& e) {
      return fail(1, "validation", e.what());
    } catch (const BlowUpError& e) {
      return fail(2, "blowup", e.what());
    } catch (const IoError& e) {
      return fail(3, "io", e.what());
    } catch (const ordered_json::exception& e) {
      return fail(1, "validation", e.what());
    } catch (const std::overflow_error& e) {
      return fail(2, "numerical", e.what());
    } catch (const std::exception& e) {
      return fail(1, "validation", e.what());
    }
  }
  return 0;
}
