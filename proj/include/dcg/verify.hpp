#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "catalan.hpp"
#include "markov.hpp"
#include "parallel.hpp"
#include "riccati.hpp"

namespace dcg {

struct CheckPoint {
  std::string label;
  std::vector<std::pair<std::string, double>> params;
  double residual = 0.0;
  double tolerance = 0.0;
  bool upper = true;  // pass when residual <= tolerance, else when residual > tolerance
  std::string error;

  bool pass() const {
    if (!error.empty() || !std::isfinite(residual)) return false;
    return upper ? residual <= tolerance : residual > tolerance;
  }
};

struct VerificationReport {
  std::string name;
  std::vector<CheckPoint> points;
  std::vector<std::string> notes;

  bool passed() const {
    return std::all_of(points.begin(), points.end(), [](const CheckPoint& p) { return p.pass(); });
  }
  const CheckPoint& point(const std::string& label) const {
    for (const auto& p : points)
      if (p.label == label) return p;
    throw ValidationError("no check named " + label);
  }
};

// max over nodes of |sum_k w^k phi_t^k|
inline double weighted_sum_residual(const RiccatiSolution& s, double w = 1.0) {
  double r = 0.0;
  for (std::size_t n = 0; n < s.grid.size(); ++n) {
    double acc = 0.0, pw = 1.0;
    for (const auto& f : s.phi) {
      acc += pw * f[n];
      pw *= w;
    }
    r = std::max(r, std::abs(acc));
  }
  return r;
}

// max over nodes of |sum_{k=1}^{N-1} phi^k phi^{N-k}| for a ring solution.
inline double ring_product_sum(const RiccatiSolution& s) {
  const auto N = s.phi.size();
  double r = 0.0;
  for (std::size_t n = 0; n < s.grid.size(); ++n) {
    double acc = 0.0;
    for (std::size_t k = 1; k < N; ++k) acc += s.phi[k][n] * s.phi[N - k][n];
    r = std::max(r, std::abs(acc));
  }
  return r;
}

struct ConjecturePoint {
  int n = 0;
  double r = 0.0;
  double phi0_t0 = 0.0;
  double phi1_t0 = 0.0;
  double sum_residual = 0.0;
  std::string error;
};

struct ConjectureReport {
  GameParams params;
  std::vector<ConjecturePoint> points;
  bool strictly_decreasing = false;
  double decay_exponent = 0.0;  // OLS slope of log r on log N
  std::vector<RiccatiSolution> curves;
};

inline ConjectureReport conjecture_decay(const GameParams& p, const std::vector<int>& n_values,
                                         const TimeGrid& g, unsigned threads = 0, bool keep_curves = false) {
  require(!n_values.empty(), "need at least one N");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    require(n_values[i] >= 4, "each N must be >= 4");
    if (i > 0) require(n_values[i] > n_values[i - 1], "N values must be ascending");
  }
  ConjectureReport rep;
  rep.params = p;
  rep.points.resize(n_values.size());
  std::vector<std::optional<RiccatiSolution>> sols(n_values.size());
  parallel_for(n_values.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto& pt = rep.points[i];
      pt.n = n_values[i];
      try {
        auto s = solve_periodic_chain(p, pt.n, g);
        pt.r = ring_product_sum(s);
        pt.phi0_t0 = s.phi[0][0];
        pt.phi1_t0 = s.phi[1][0];
        pt.sum_residual = weighted_sum_residual(s);
        if (keep_curves) sols[i] = std::move(s);
      } catch (const std::exception& ex) {
        pt.error = ex.what();
      }
    }
  });
  for (auto& s : sols)
    if (s) rep.curves.push_back(std::move(*s));
  rep.strictly_decreasing = true;
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    if (!rep.points[i].error.empty()) rep.strictly_decreasing = false;
    if (i > 0 && !(rep.points[i].r < rep.points[i - 1].r)) rep.strictly_decreasing = false;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& pt : rep.points) {
    if (!pt.error.empty() || pt.r <= 0) continue;
    const double x = std::log(pt.n), y = std::log(pt.r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2) rep.decay_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return rep;
}

struct BcReport {
  double interior_max_diff = 0.0;  // j < N
  double column_max_diff = 0.0;    // j = N
  double general_max_diff = 0.0;   // General(a1=eps, m=0, c1=c) vs AttractedToZero
  double general_psi_max = 0.0;
};

inline BcReport bc_independence(const GameParams& p, int n_players, const TimeGrid& g) {
  require(n_players >= 3, "n_players must be >= 3");
  const auto a = solve_finite_chain(p, bc::AttractedToZero{}, n_players, g);
  const auto b = solve_finite_chain(p, bc::NoControl{}, n_players, g);
  const auto c = solve_finite_chain(p, bc::General{p.epsilon, 0.0, 0.0, p.c, 0.0}, n_players, g);
  BcReport r;
  const int N = n_players;
  for (int i = 1; i <= N; ++i)
    for (int j = i; j <= N; ++j) {
      const auto& x = a.pair(i, j);
      const auto& y = b.pair(i, j);
      const auto& z = c.pair(i, j);
      for (std::size_t n = 0; n < x.size(); ++n) {
        const double d = std::abs(x[n] - y[n]);
        if (j < N) r.interior_max_diff = std::max(r.interior_max_diff, d);
        else r.column_max_diff = std::max(r.column_max_diff, d);
        r.general_max_diff = std::max(r.general_max_diff, std::abs(x[n] - z[n]));
      }
    }
  for (const auto& f : c.psi)
    for (double v : f) r.general_psi_max = std::max(r.general_psi_max, std::abs(v));
  return r;
}

inline VerificationReport bc_report(const GameParams& p, int n_players, const TimeGrid& g) {
  const auto r = bc_independence(p, n_players, g);
  VerificationReport rep{"bc-independence", {}, {}};
  const std::vector<std::pair<std::string, double>> prm{
      {"epsilon", p.epsilon}, {"c", p.c}, {"T", p.horizon}, {"N", n_players}, {"h", g.step()}};
  rep.points.push_back({"interior", prm, r.interior_max_diff, 1e-10, true, ""});
  rep.points.push_back({"column-N", prm, r.column_max_diff, 1e-3, false, ""});
  rep.points.push_back({"general-vs-attracted", prm, r.general_max_diff, 1e-10, true, ""});
  rep.points.push_back({"general-psi", prm, r.general_psi_max, 1e-10, true, ""});
  return rep;
}

// Relative gap between rho_k(-nu^2) and (2nu)^{-k} sqrt(2nu/pi) e^nu K_{k-1/2}(nu).
inline double rho_bessel_gap(int k, double nu) {
  const double lhs = rho(k, -nu * nu);
  const double rhs = std::pow(2 * nu, -k) * std::sqrt(2 * nu / std::numbers::pi) * std::exp(nu) *
                     bessel_k_half(k, nu);
  return std::abs(lhs - rhs) / std::abs(rhs);
}

inline VerificationReport identity_suite(double step = 1e-3) {
  VerificationReport rep{"identity-suite", {}, {}};
  auto guarded = [&](CheckPoint pt, auto&& fn) {
    try {
      pt.residual = fn();
    } catch (const std::exception& ex) {
      pt.error = ex.what();
    }
    rep.points.push_back(std::move(pt));
  };
  GameParams base{1.0, 1.0, 1.0, 2.0, 1.0, 1};
  const TimeGrid g2(2.0, step);

  for (int depth : {30, 60})
    guarded({"chain-sum", {{"depth", depth}, {"epsilon", 1}, {"c", 1}, {"T", 2}}, 0, 1e-4, true, ""},
            [&] { return weighted_sum_residual(solve_infinite_chain(base, depth, g2)); });
  {
    auto p = base;
    p.u = 0.5;
    guarded({"mixed-sum", {{"u", 0.5}, {"depth", 30}, {"epsilon", 1}, {"c", 1}, {"T", 2}}, 0, 1e-4, true, ""},
            [&] { return weighted_sum_residual(solve_mixed_infinite(p, 30, g2)); });
  }
  for (int depth : {20, 40}) {
    auto p = base;
    p.branching = 3;
    guarded({"tree-sum", {{"d", 3}, {"depth", depth}, {"epsilon", 1}, {"c", 1}, {"T", 2}}, 0, 1e-3, true, ""},
            [&] { return weighted_sum_residual(solve_tree(p, depth, g2), 3.0); });
  }
  {
    auto p = base;
    p.horizon = 10;
    guarded({"ring-sum", {{"N", 4}, {"epsilon", 1}, {"c", 1}, {"T", 10}}, 0, 1e-10, true, ""},
            [&] { return weighted_sum_residual(solve_periodic_chain(p, 4, TimeGrid(10.0, step))); });
  }
  for (double u : {0.5, 1.0})
    guarded({"q-squared", {{"u", u}, {"size", 64}}, 0, 1e-12, true, ""},
            [&] { return q_squared_residual(build_generator(CoeffKind::mixed(u), 64)).residual; });
  guarded({"rho-bessel", {{"k", 3}, {"nu", 2}}, 0, 1e-12, true, ""}, [&] { return rho_bessel_gap(3, 2.0); });
  guarded({"rho-bessel-sweep", {{"k_max", 10}}, 0, 1e-12, true, ""}, [&] {
    double r = 0.0;
    for (int k = 0; k <= 10; ++k)
      for (double nu : {0.5, 1.0, 2.0, 5.0}) r = std::max(r, rho_bessel_gap(k, nu));
    return r;
  });
  rep.notes.push_back("offset sums are truncation dominated; deeper runs show the tail effect");
  return rep;
}

} // namespace dcg
