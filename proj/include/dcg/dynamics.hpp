#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "catalan.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "riccati.hpp"

namespace dcg {

enum class SimMode { Chain, Mixed, Tree };

struct SimConfig {
  SimMode mode = SimMode::Chain;
  int n_players = 64;   // M
  int depth = 40;       // J
  double step = 0.01;
  double t_end = 10.0;
  std::uint64_t n_paths = 1000;
  std::uint64_t seed = 42;
  double sigma = 1.0;
  double u = 1.0;       // mixed weight
  int branching = 1;    // tree d
  double x0_std = 0.0;  // i.i.d. N(0, x0_std^2) initial data
  int record_every = 1; // store every k-th step
  std::vector<int> record_players;  // 1-based; empty means all
  unsigned threads = 0;
  double tail_warn = 0.1;

  // stationary phi^0..phi^J and psi for the mixed mode; for the tree these are
  // the drift weights d^j phi_tree^j, i.e. the chain coefficients
  std::vector<double> phi;
  double psi = 0.0;
  // optional time-varying source: phi^j(t), psi(t) from a solver
  const RiccatiSolution* riccati = nullptr;

  void validate() const {
    require(step > 0 && std::isfinite(step), "step must be positive");
    require(t_end > 0 && std::isfinite(t_end), "t_end must be positive");
    require(depth >= 1, "depth J must be >= 1");
    require(n_players >= 1, "n_players must be >= 1");
    require(depth < n_players, "depth J must be < n_players M");
    require(n_paths >= 1, "n_paths must be >= 1");
    require(sigma > 0, "sigma must be positive");
    require(u >= 0 && u <= 1, "u must lie in [0,1]");
    require(branching >= 1, "branching must be >= 1");
    require(record_every >= 1, "record_every must be >= 1");
    require(x0_std >= 0, "x0_std must be nonnegative");
    for (int p : record_players) require(p >= 1 && p <= n_players, "record player out of range");
    if (riccati) {
      require(!riccati->is_finite(), "time-varying source must be an offset solution");
      require(riccati->phi.size() >= static_cast<std::size_t>(depth) + 1,
              "time-varying source has fewer offsets than J");
      require(riccati->grid.horizon() >= t_end * (1 - 1e-12), "time-varying grid does not cover [0, t_end]");
      if (mode == SimMode::Mixed)
        require(!riccati->psi.empty(), "mixed mode needs psi in the time-varying source");
    } else {
      require(phi.size() >= static_cast<std::size_t>(depth) + 1, "need phi^0..phi^J");
    }
    const double r = std::round(t_end / step);
    require(std::abs(r * step - t_end) <= 1e-9 * t_end, "t_end must be a multiple of step");
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::round(t_end / step)); }
};

inline std::string name(SimMode m) {
  switch (m) {
  case SimMode::Chain: return "chain";
  case SimMode::Mixed: return "mixed";
  case SimMode::Tree: return "tree";
  }
  return "?";
}

// Convenience: stationary coefficients for the mode.
inline SimConfig stationary_config(SimMode mode, int n_players, int depth, double u = 1.0, int d = 1) {
  SimConfig c;
  c.mode = mode;
  c.n_players = n_players;
  c.depth = depth;
  c.u = u;
  c.branching = d;
  if (mode == SimMode::Mixed) {
    const auto s = stationary_coeffs(CoeffKind::mixed(u), depth);
    c.phi = s.values;
    c.psi = *s.psi;
  } else {
    // tree drift uses d^j phi_tree^j, which equals the chain coefficient
    c.phi = chain_stationary(depth);
  }
  return c;
}

struct TrajectoryBundle {
  std::uint64_t seed = 0;
  std::uint64_t n_paths = 0;
  std::vector<int> players;      // 1-based player ids stored
  std::vector<double> times;     // sample times
  std::vector<double> data;      // [path][player][sample]
  SimConfig config;
  std::vector<std::string> warnings;
  int trusted_players = 0;       // players i with i + J <= M

  std::size_t n_samples() const { return times.size(); }
  double& at(std::size_t path, std::size_t player, std::size_t sample) {
    return data[(path * players.size() + player) * times.size() + sample];
  }
  double at(std::size_t path, std::size_t player, std::size_t sample) const {
    return data[(path * players.size() + player) * times.size() + sample];
  }
  std::size_t player_slot(int player) const {
    const auto it = std::find(players.begin(), players.end(), player);
    require(it != players.end(), "player " + std::to_string(player) + " not recorded");
    return static_cast<std::size_t>(it - players.begin());
  }
  std::size_t sample_slot(double t) const {
    require(!times.empty(), "empty bundle");
    const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
    const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9 * dt);
    require(it != times.end() && std::abs(*it - t) <= 1e-9 * std::max(1.0, dt),
            "time " + std::to_string(t) + " not recorded");
    return static_cast<std::size_t>(it - times.begin());
  }
};

inline TrajectoryBundle simulate(const SimConfig& cfg) {
  cfg.validate();
  const int M = cfg.n_players, J = cfg.depth;
  const std::size_t n = cfg.steps();
  const double h = cfg.step;
  const bool mixed = cfg.mode == SimMode::Mixed;
  const double u = mixed ? cfg.u : 1.0;

  TrajectoryBundle b;
  b.seed = cfg.seed;
  b.n_paths = cfg.n_paths;
  b.config = cfg;
  b.config.riccati = nullptr;
  b.trusted_players = M - J;
  if (cfg.record_players.empty())
    for (int i = 1; i <= M; ++i) b.players.push_back(i);
  else
    b.players = cfg.record_players;
  for (std::size_t s = 0; s <= n; s += static_cast<std::size_t>(cfg.record_every))
    b.times.push_back(static_cast<double>(s) * h);
  b.data.assign(cfg.n_paths * b.players.size() * b.times.size(), 0.0);

  double tail = 0.0;
  if (!cfg.riccati) {
    const auto kind = mixed ? CoeffKind::mixed(u) : CoeffKind::chain();
    tail = stationary_tail_mass(kind, J);
    if (tail > cfg.tail_warn)
      b.warnings.push_back("truncation tail mass " + std::to_string(tail) + " exceeds threshold");
  }

  // noise std per player: generation k of the averaged tree carries variance h / d^{k-1}
  std::vector<double> noise(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i)
    noise[i] = cfg.sigma * std::sqrt(h) *
               (cfg.mode == SimMode::Tree ? std::pow(static_cast<double>(cfg.branching), -0.5 * i) : 1.0);

  // coefficient tables per step (drift uses the left endpoint)
  auto coeffs_at = [&](double t, std::vector<double>& a, double& damp) {
    if (cfg.riccati) {
      const bool tree = cfg.riccati->kind == SolutionKind::Tree;
      double w = 1.0;
      for (int j = 0; j <= J; ++j) {
        a[j] = u * w * cfg.riccati->at(cfg.riccati->phi[j], t);
        if (tree) w *= cfg.branching;
      }
      damp = mixed ? (1 - u) * cfg.riccati->at(cfg.riccati->psi[0], t) : 0.0;
    } else {
      for (int j = 0; j <= J; ++j) a[j] = u * cfg.phi[j];
      damp = (mixed && u < 1) ? (1 - u) * cfg.psi : 0.0;
    }
  };
  std::vector<std::vector<double>> table;
  std::vector<double> damps;
  if (cfg.riccati) {
    table.assign(n, std::vector<double>(static_cast<std::size_t>(J) + 1));
    damps.resize(n);
    for (std::size_t s = 0; s < n; ++s) coeffs_at(static_cast<double>(s) * h, table[s], damps[s]);
  } else {
    table.assign(1, std::vector<double>(static_cast<std::size_t>(J) + 1));
    damps.resize(1);
    coeffs_at(0.0, table[0], damps[0]);
  }

  std::vector<int> slot_of(static_cast<std::size_t>(M), -1);
  for (std::size_t k = 0; k < b.players.size(); ++k) slot_of[b.players[k] - 1] = static_cast<int>(k);

  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t pb, std::size_t pe) {
    std::vector<double> x(static_cast<std::size_t>(M) + J, 0.0), nx(static_cast<std::size_t>(M));
    std::vector<std::mt19937_64> rng;
    rng.reserve(static_cast<std::size_t>(M));
    // one distribution per stream: libstdc++ caches the second normal of each pair
    std::vector<std::normal_distribution<double>> gauss(static_cast<std::size_t>(M));
    for (std::size_t p = pb; p < pe; ++p) {
      rng.clear();
      for (int i = 0; i < M; ++i) {
        rng.emplace_back(stream_seed(cfg.seed, static_cast<std::uint64_t>(i), p));
        gauss[i].reset();
      }
      std::fill(x.begin(), x.end(), 0.0);
      if (cfg.x0_std > 0)
        for (int i = 0; i < M; ++i) x[i] = cfg.x0_std * gauss[i](rng[i]);
      auto record = [&](std::size_t sample) {
        for (int i = 0; i < M; ++i)
          if (slot_of[i] >= 0) b.at(p, static_cast<std::size_t>(slot_of[i]), sample) = x[i];
      };
      record(0);
      std::size_t next = 1;
      for (std::size_t s = 0; s < n; ++s) {
        const auto& a = table[cfg.riccati ? s : 0];
        const double damp = damps[cfg.riccati ? s : 0];
        for (int i = 0; i < M; ++i) {
          // entries past M stay zero in the padded state
          const double* xi = x.data() + i;
          double drift = 0.0;
          for (int j = 0; j <= J; ++j) drift += a[j] * xi[j];
          drift += damp * xi[0];
          nx[i] = xi[0] - drift * h + noise[i] * gauss[i](rng[i]);
        }
        std::copy(nx.begin(), nx.end(), x.begin());
        if ((s + 1) % static_cast<std::size_t>(cfg.record_every) == 0) record(next++);
      }
    }
  });
  return b;
}

struct MomentRequest {
  int player_a = 1, player_b = 1;
  double time_a = 0.0, time_b = 0.0;
};

struct MomentEstimate {
  MomentRequest request;
  double covariance = 0.0;
  double std_error = 0.0;
  double correlation = 0.0;
  double correlation_se = 0.0;
};

inline std::vector<MomentEstimate> estimate_moments(const TrajectoryBundle& b,
                                                    const std::vector<MomentRequest>& reqs) {
  require(b.n_paths >= 2, "need at least two paths");
  std::vector<MomentEstimate> out;
  const auto n = static_cast<double>(b.n_paths);
  for (const auto& r : reqs) {
    const auto pa = b.player_slot(r.player_a), pb = b.player_slot(r.player_b);
    const auto sa = b.sample_slot(r.time_a), sb = b.sample_slot(r.time_b);
    double ma = 0, mb = 0;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
      ma += b.at(p, pa, sa);
      mb += b.at(p, pb, sb);
    }
    ma /= n;
    mb /= n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
      const double da = b.at(p, pa, sa) - ma, db = b.at(p, pb, sb) - mb;
      cov += da * db;
      va += da * da;
      vb += db * db;
    }
    cov /= n - 1;
    va /= n - 1;
    vb /= n - 1;
    double m4 = 0;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
      const double z = (b.at(p, pa, sa) - ma) * (b.at(p, pb, sb) - mb) - cov;
      m4 += z * z;
    }
    MomentEstimate e{r, cov, std::sqrt(m4 / (n - 1) / n), 0.0, 0.0};
    if (va > 0 && vb > 0) {
      e.correlation = cov / std::sqrt(va * vb);
      e.correlation_se = (1 - e.correlation * e.correlation) / std::sqrt(n - 3 > 0 ? n - 3 : 1);
    }
    out.push_back(e);
  }
  return out;
}

} // namespace dcg
