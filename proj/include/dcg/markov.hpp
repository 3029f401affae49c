#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "catalan.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace dcg {

// Upper-triangular Toeplitz generator: -1 on the diagonal, q_k on offset k.
struct GeneratorSpec {
  CoeffKind kind;
  int size = 0;
  std::vector<double> offdiag;  // q_1 .. q_{size-1}
  double diagonal = -1.0;

  double u() const { return kind.topology == Topology::Mixed ? kind.u : 1.0; }
  double q(int k) const { return k == 0 ? diagonal : offdiag[static_cast<std::size_t>(k - 1)]; }
  double retained_mass() const {
    double s = 0.0;
    for (double v : offdiag) s += v;
    return s;
  }
  // Total jump mass of the untruncated chain.
  double jump_mass() const { return 1.0 - std::sqrt(1.0 - u()); }
  double killing_mass() const { return std::sqrt(1.0 - u()); }

  std::vector<std::vector<double>> dense() const {
    const auto n = static_cast<std::size_t>(size);
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) m[i][j] = q(static_cast<int>(j - i));
    return m;
  }
};

inline GeneratorSpec build_generator(const CoeffKind& kind, int size) {
  require(size >= 2, "generator size must be >= 2");
  // tree generator coincides with the chain one
  const bool mixed = kind.topology == Topology::Mixed;
  const auto st = stationary_coeffs(mixed ? kind : CoeffKind::chain(), size - 1);
  GeneratorSpec g{kind, size, {}, -1.0};
  for (int k = 1; k < size; ++k) g.offdiag.push_back(-(mixed ? kind.u : 1.0) * st.values[k]);
  return g;
}

struct SquareCheck {
  double residual = 0.0;
  int interior_rows = 0;
  int fringe_rows = 0;
};

// max |Q^2 - (I - uB)| over rows whose band fits in the truncation.
inline SquareCheck q_squared_residual(const GeneratorSpec& g) {
  const auto q = g.dense();
  const int n = g.size;
  SquareCheck out;
  // products of upper-triangular Toeplitz matrices only see offsets <= j - i,
  // so truncation leaves every row exact
  out.interior_rows = n;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int l = i; l <= j; ++l) s += q[i][l] * q[l][j];
      const double target = (j == i) ? 1.0 : (j == i + 1 ? -g.u() : 0.0);
      out.residual = std::max(out.residual, std::abs(s - target));
    }
  return out;
}

struct TransitionMatrix {
  double t = 0.0;
  int size = 0;
  std::vector<double> offsets;  // p_{i,i+k}(t)

  double entry(int i, int j) const {
    require(i >= 1 && j >= 1 && i <= size && j <= size, "transition entry out of range");
    return j < i ? 0.0 : offsets[static_cast<std::size_t>(j - i)];
  }
  double row_sum(int i) const {
    double s = 0.0;
    for (int j = i; j <= size; ++j) s += entry(i, j);
    return s;
  }
};

// p_k(t) = u^k t^{2k} rho_k(-t^2) e^{-t} / k!
inline double transition_offset(int k, double u, double t) {
  if (t == 0.0) return k == 0 ? 1.0 : 0.0;
  if (k == 0) return std::exp(-t);
  if (u == 0.0) return 0.0;
  const auto lb = kernel_log_coeffs(k);
  const double lt = std::log(t), lu = std::log(u);
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += std::exp(lb[i] + (k - i) * lt + k * lu - t);
  return s;
}

inline TransitionMatrix transition_matrix(const GeneratorSpec& g, double t) {
  require(t >= 0 && std::isfinite(t), "t must be nonnegative");
  TransitionMatrix m{t, g.size, {}};
  for (int k = 0; k < g.size; ++k) m.offsets.push_back(transition_offset(k, g.u(), t));
  return m;
}

inline double survival_probability(const GeneratorSpec& g, double t) {
  return std::exp(-t * std::sqrt(1.0 - g.u()));
}

// max over offsets of |P(t+s) - P(t) P(s)|.
inline double semigroup_residual(const GeneratorSpec& g, double t, double s) {
  const auto a = transition_matrix(g, t), b = transition_matrix(g, s), ab = transition_matrix(g, t + s);
  double r = 0.0;
  for (int k = 0; k < g.size; ++k) {
    double v = 0.0;
    for (int i = 0; i <= k; ++i) v += a.offsets[i] * b.offsets[k - i];
    r = std::max(r, std::abs(v - ab.offsets[k]));
  }
  return r;
}

struct SampleResult {
  double t = 0.0;
  std::uint64_t n_paths = 0;
  std::vector<std::uint64_t> counts;  // end state 1..size
  std::uint64_t escaped = 0;          // jumped past the truncation
  std::uint64_t killed = 0;

  double frequency(int state) const {
    return static_cast<double>(counts[static_cast<std::size_t>(state - 1)]) / static_cast<double>(n_paths);
  }
  double survival() const {
    return 1.0 - static_cast<double>(killed) / static_cast<double>(n_paths);
  }
};

// Jump chain from state 1 with exponential(1) holding times.
inline SampleResult sample_chain(const GeneratorSpec& g, double t, std::uint64_t n_paths,
                                 std::uint64_t seed, unsigned threads = 0) {
  require(t >= 0 && std::isfinite(t), "t must be nonnegative");
  require(n_paths >= 1, "n_paths must be >= 1");
  std::vector<double> cum(g.offdiag.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < cum.size(); ++k) cum[k] = acc += g.offdiag[k];
  const double jump = std::max(g.jump_mass(), acc);

  // end offset per path, -1 escaped, -2 killed
  std::vector<int> end(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      std::mt19937_64 rng(stream_seed(seed, p));
      std::exponential_distribution<double> hold(1.0);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      double time = hold(rng);
      int at = 0;
      while (time <= t) {
        const double x = unif(rng);
        if (x >= jump) {
          at = -2;
          break;
        }
        const auto k = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), x) - cum.begin()) + 1;
        at += k;
        if (at >= g.size) {
          at = -1;
          break;
        }
        time += hold(rng);
      }
      end[p] = at;
    }
  });

  SampleResult r{t, n_paths, std::vector<std::uint64_t>(static_cast<std::size_t>(g.size), 0), 0, 0};
  for (int e : end) {
    if (e == -2) ++r.killed;
    else if (e == -1) ++r.escaped;
    else ++r.counts[static_cast<std::size_t>(e)];
  }
  return r;
}

} // namespace dcg
