#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "catalan.hpp"
#include "errors.hpp"
#include "params.hpp"

namespace dcg {

enum class SolutionKind { FiniteChain, Ring, InfiniteOffsets, MixedInfinite, MixedFinite, Tree };

inline std::string name(SolutionKind k) {
  switch (k) {
  case SolutionKind::FiniteChain: return "finite-chain";
  case SolutionKind::Ring: return "ring";
  case SolutionKind::InfiniteOffsets: return "infinite-chain";
  case SolutionKind::MixedInfinite: return "mixed-infinite";
  case SolutionKind::MixedFinite: return "mixed-finite";
  case SolutionKind::Tree: return "tree";
  }
  return "?";
}

// Coefficient functions sampled on the grid nodes (index 0 is t = 0).
struct RiccatiSolution {
  TimeGrid grid;
  SolutionKind kind = SolutionKind::InfiniteOffsets;
  int size = 0;  // players for finite systems, depth for offset systems
  GameParams params;
  std::vector<std::string> phi_names;
  std::vector<std::vector<double>> phi;
  std::vector<std::string> psi_names;
  std::vector<std::vector<double>> psi;
  double tail_mass = 0.0;
  std::optional<double> closed_form_error;

  static std::size_t pair_index(int n, int i, int j) {
    require(1 <= i && i <= j && j <= n, "pair index out of range");
    const auto a = static_cast<std::size_t>(i - 1);
    return a * static_cast<std::size_t>(n) - a * (a - 1) / 2 + static_cast<std::size_t>(j - i);
  }

  bool is_finite() const {
    return kind == SolutionKind::FiniteChain || kind == SolutionKind::MixedFinite;
  }

  const std::vector<double>& pair(int i, int j) const {
    require(is_finite(), "pair access needs a finite-chain solution");
    return phi[pair_index(size, i, j)];
  }

  const std::vector<double>& offset(int k) const {
    require(!is_finite(), "offset access needs an offset solution");
    require(k >= 0 && static_cast<std::size_t>(k) < phi.size(), "offset out of range");
    return phi[static_cast<std::size_t>(k)];
  }

  // Linear interpolation between nodes.
  double at(const std::vector<double>& f, double t) const {
    require(t >= -1e-12 && t <= grid.horizon() * (1 + 1e-12), "time outside the grid");
    const double x = std::clamp(t, 0.0, grid.horizon()) / grid.step();
    const auto k = std::min(static_cast<std::size_t>(x), grid.steps() - 1);
    const double w = x - static_cast<double>(k);
    return (1 - w) * f[k] + w * f[k + 1];
  }
};

namespace detail {

// Classical RK4 in reversed time tau = T - t; f(t, y, dy) writes dy/dt.
template <class Rhs>
std::vector<std::vector<double>> integrate_backward(const TimeGrid& g, const std::vector<double>& yT,
                                                    Rhs&& f, const std::string& what) {
  const std::size_t m = yT.size(), n = g.steps();
  const double h = g.step(), T = g.horizon();
  std::vector<std::vector<double>> out(m, std::vector<double>(n + 1));
  std::vector<double> y = yT, k1(m), k2(m), k3(m), k4(m), tmp(m);
  for (std::size_t c = 0; c < m; ++c) out[c][n] = yT[c];
  // dy/dtau = -f
  auto F = [&](double tau, const std::vector<double>& x, std::vector<double>& d) {
    f(T - tau, x, d);
    for (auto& v : d) v = -v;
  };
  for (std::size_t s = 0; s < n; ++s) {
    const double tau = static_cast<double>(s) * h;
    F(tau, y, k1);
    for (std::size_t c = 0; c < m; ++c) tmp[c] = y[c] + 0.5 * h * k1[c];
    F(tau + 0.5 * h, tmp, k2);
    for (std::size_t c = 0; c < m; ++c) tmp[c] = y[c] + 0.5 * h * k2[c];
    F(tau + 0.5 * h, tmp, k3);
    for (std::size_t c = 0; c < m; ++c) tmp[c] = y[c] + h * k3[c];
    F(tau + h, tmp, k4);
    const std::size_t node = n - s - 1;
    for (std::size_t c = 0; c < m; ++c) {
      y[c] += h / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
      if (!std::isfinite(y[c]) || std::abs(y[c]) > 1e150)
        throw BlowUpError(what + ": nonfinite coefficient at t=" + std::to_string(g.node(node)),
                          g.node(node));
      out[c][node] = y[c];
    }
  }
  return out;
}

inline void check_grid(const GameParams& p, const TimeGrid& g) {
  p.validate();
  require(std::abs(g.horizon() - p.horizon) <= 1e-9 * p.horizon,
          "grid horizon does not match params.horizon");
}

inline std::vector<std::string> offset_names(int depth) {
  std::vector<std::string> v;
  for (int k = 0; k <= depth; ++k) v.push_back("phi_" + std::to_string(k));
  return v;
}

inline std::vector<std::string> pair_names(int n) {
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j <= n; ++j) v.push_back("phi_" + std::to_string(i) + "_" + std::to_string(j));
  return v;
}

inline std::vector<double> chain_terminal(int n, double c) {
  std::vector<double> y((static_cast<std::size_t>(n) * (n + 1)) / 2, 0.0);
  for (int i = 1; i <= n; ++i) {
    y[RiccatiSolution::pair_index(n, i, i)] = c;
    if (i < n) y[RiccatiSolution::pair_index(n, i, i + 1)] = -c;
  }
  return y;
}

// Offset cascade phi^k' = sum phi^i phi^{k-i} + eps1 d_{k1} - eps d_{k0}.
inline RiccatiSolution solve_offsets(const GameParams& p, int depth, const TimeGrid& g, double eps1,
                                     double c1, SolutionKind kind) {
  check_grid(p, g);
  require(depth >= 0, "depth must be >= 0");
  const auto m = static_cast<std::size_t>(depth) + 1;
  std::vector<double> yT{p.c};
  if (m > 1) yT.push_back(-c1);
  yT.resize(m, 0.0);
  const double eps = p.epsilon;
  auto f = [&](double, const std::vector<double>& y, std::vector<double>& d) {
    for (std::size_t k = 0; k < m; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i <= k; ++i) s += y[i] * y[k - i];
      d[k] = s;
    }
    d[0] -= eps;
    if (m > 1) d[1] += eps1;
  };
  RiccatiSolution s;
  s.grid = g;
  s.kind = kind;
  s.size = depth;
  s.params = p;
  s.phi_names = offset_names(depth);
  s.phi = integrate_backward(g, yT, f, name(kind));
  return s;
}

} // namespace detail

inline RiccatiSolution solve_finite_chain(const GameParams& p, const BoundaryCondition& b,
                                          int n_players, const TimeGrid& g) {
  detail::check_grid(p, g);
  validate(b);
  require(n_players >= 2, "n_players must be >= 2");
  const int N = n_players;
  const auto np = (static_cast<std::size_t>(N) * (N + 1)) / 2;
  const auto* gen = std::get_if<bc::General>(&b);
  const bool no_control = std::holds_alternative<bc::NoControl>(b);
  const double eps = p.epsilon;

  std::vector<double> yT = detail::chain_terminal(N, p.c);
  const auto nn = RiccatiSolution::pair_index(N, N, N);
  if (gen) {
    yT[nn] = gen->c1;
    yT.resize(np + N, 0.0);
    yT[np + N - 1] = -gen->c1 * gen->m;
  }

  auto idx = [N](int i, int j) { return RiccatiSolution::pair_index(N, i, j); };
  auto f = [&](double, const std::vector<double>& y, std::vector<double>& d) {
    for (int i = 1; i <= N; ++i) {
      for (int k = i; k <= N; ++k) {
        double s = 0.0;
        const int jmax = (no_control && k == N) ? N - 1 : k;
        for (int j = i; j <= jmax; ++j) s += y[idx(i, j)] * y[idx(j, k)];
        if (i < N) {
          if (k == i) s -= eps;
          if (k == i + 1) s += eps;
        } else {
          s -= gen ? gen->a1 : eps;
        }
        d[idx(i, k)] = s;
      }
    }
    if (gen) {
      for (int i = 1; i <= N; ++i) {
        double s = 0.0;
        for (int j = i; j <= N; ++j) s += y[idx(i, j)] * y[np + j - 1];
        if (i == N) s += gen->a1 * gen->m;
        d[np + i - 1] = s;
      }
    }
  };

  auto all = detail::integrate_backward(g, yT, f, "finite-chain");
  RiccatiSolution s;
  s.grid = g;
  s.kind = SolutionKind::FiniteChain;
  s.size = N;
  s.params = p;
  s.phi_names = detail::pair_names(N);
  s.phi.assign(std::make_move_iterator(all.begin()),
               std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(np)));
  if (gen) {
    for (int i = 1; i <= N; ++i) {
      s.psi_names.push_back("psi_" + std::to_string(i));
      s.psi.push_back(std::move(all[np + i - 1]));
    }
  }
  return s;
}

// Circulant reduction of the ring: phi^{N,k} for k = 0..N-1.
inline RiccatiSolution solve_periodic_chain(const GameParams& p, int n_players, const TimeGrid& g) {
  detail::check_grid(p, g);
  require(n_players >= 2, "n_players must be >= 2");
  const auto N = static_cast<std::size_t>(n_players);
  std::vector<double> yT(N, 0.0);
  yT[0] = p.c;
  yT[1] = -p.c;
  const double eps = p.epsilon;
  auto f = [&](double, const std::vector<double>& y, std::vector<double>& d) {
    for (std::size_t k = 0; k < N; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < N; ++j) s += y[j] * y[(k + N - j) % N];
      d[k] = s;
    }
    d[0] -= eps;
    d[1] += eps;
  };
  RiccatiSolution s;
  s.grid = g;
  s.kind = SolutionKind::Ring;
  s.size = n_players;
  s.params = p;
  s.phi_names = detail::offset_names(n_players - 1);
  s.phi = detail::integrate_backward(g, yT, f, "ring");
  return s;
}

inline RiccatiSolution solve_infinite_chain(const GameParams& p, int depth, const TimeGrid& g) {
  auto s = detail::solve_offsets(p, depth, g, p.epsilon, p.c, SolutionKind::InfiniteOffsets);
  s.tail_mass = std::sqrt(p.epsilon) * stationary_tail_mass(CoeffKind::chain(), depth);
  double err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    err = std::max(err, std::abs(s.phi[0][k] - generating_function(0.0, g.node(k), p)));
  s.closed_form_error = err;
  return s;
}

inline RiccatiSolution solve_tree(const GameParams& p, int depth, const TimeGrid& g) {
  const double d = p.branching;
  auto s = detail::solve_offsets(p, depth, g, p.epsilon / d, p.c / d, SolutionKind::Tree);
  s.tail_mass = std::sqrt(p.epsilon) * stationary_tail_mass(CoeffKind::tree(p.branching), depth);
  return s;
}

// Simplified mixed system: psi and the u-weighted offset cascade.
inline RiccatiSolution solve_mixed_infinite(const GameParams& p, int depth, const TimeGrid& g) {
  detail::check_grid(p, g);
  require(depth >= 0, "depth must be >= 0");
  const double u = p.u, eps = p.epsilon;
  const auto m = static_cast<std::size_t>(depth) + 1;
  // y[0] = psi, y[1 + k] = phi^k
  std::vector<double> yT(m + 1, 0.0);
  yT[0] = p.c;
  yT[1] = p.c;
  if (m > 1) yT[2] = -p.c;
  auto f = [&](double, const std::vector<double>& y, std::vector<double>& d) {
    const double psi = y[0];
    d[0] = (1 - u) * psi * psi - eps;
    for (std::size_t k = 0; k < m; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i <= k; ++i) s += y[1 + i] * y[1 + k - i];
      d[1 + k] = u * s + 2 * (1 - u) * psi * y[1 + k];
    }
    d[1] -= eps;
    if (m > 1) d[2] += eps;
  };
  auto all = detail::integrate_backward(g, yT, f, "mixed-infinite");
  RiccatiSolution s;
  s.grid = g;
  s.kind = SolutionKind::MixedInfinite;
  s.size = depth;
  s.params = p;
  s.psi_names = {"psi"};
  s.psi.push_back(std::move(all[0]));
  s.phi_names = detail::offset_names(depth);
  for (std::size_t k = 0; k < m; ++k) s.phi.push_back(std::move(all[1 + k]));
  s.tail_mass = std::sqrt(p.epsilon) * stationary_tail_mass(CoeffKind::mixed(u), depth);
  return s;
}

// Mixed finite system; theta follows the first-row equation.
inline RiccatiSolution solve_mixed_finite(const GameParams& p, int n_players, const TimeGrid& g) {
  detail::check_grid(p, g);
  require(n_players >= 2, "n_players must be >= 2");
  const int N = n_players;
  const double u = p.u, v = 1 - p.u, eps = p.epsilon, invN = 1.0 / N;
  const auto np = (static_cast<std::size_t>(N) * (N + 1)) / 2;
  std::vector<double> yT = detail::chain_terminal(N, p.c);
  yT.push_back(p.c * (1 - invN));
  auto idx = [N](int i, int j) { return RiccatiSolution::pair_index(N, i, j); };
  std::vector<double> col(N + 1), row(N + 1);
  auto f = [&, np](double, const std::vector<double>& y, std::vector<double>& d) {
    const double th = y[np];
    for (int l = 1; l <= N; ++l) {
      double s = 0.0;
      for (int j = 1; j <= l; ++j) s += y[idx(j, l)];
      col[l] = s;
    }
    for (int i = 1; i <= N; ++i) {
      double s = 0.0;
      for (int k = i; k <= N; ++k) s += y[idx(i, k)];
      row[i] = s;
    }
    const double S1 = row[1];
    for (int i = 1; i <= N; ++i) {
      const double pii = y[idx(i, i)];
      d[idx(i, i)] = u * pii * pii + 2 * v * th * pii - v * (1 - invN) * th * S1 -
                     v * th * invN * (col[i] + row[i]) - eps;
      for (int l = i + 1; l <= N; ++l) {
        double s = 0.0;
        for (int j = i; j <= l; ++j) s += y[idx(i, j)] * y[idx(j, l)];
        double r = u * s + 2 * v * th * y[idx(i, l)] + v * th * invN * S1 -
                   v * th * invN * (col[l] + row[i]);
        if (l == i + 1) r += eps;
        d[idx(i, l)] = r;
      }
    }
    d[np] = u * th * S1 + v * th * th - eps * (1 - invN);
  };
  auto all = detail::integrate_backward(g, yT, f, "mixed-finite");
  RiccatiSolution s;
  s.grid = g;
  s.kind = SolutionKind::MixedFinite;
  s.size = N;
  s.params = p;
  s.phi_names = detail::pair_names(N);
  s.psi_names = {"theta"};
  s.psi.push_back(std::move(all[np]));
  all.resize(np);
  s.phi = std::move(all);
  return s;
}

} // namespace dcg
