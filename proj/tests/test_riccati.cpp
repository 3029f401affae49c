#include <gtest/gtest.h>

#include <boost/numeric/odeint.hpp>

#include "dcg.hpp"

using namespace dcg;

namespace {

GameParams params(double T, double eps = 1.0, double c = 1.0, double u = 1.0, int d = 1) {
  return GameParams{eps, c, 1.0, T, u, d};
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

} // namespace

TEST(FiniteChain, TwoPlayersInClosedForm) {
  const auto s = solve_finite_chain(params(1.0), bc::AttractedToZero{}, 2, TimeGrid(1.0, 1e-3));
  const auto& g = s.grid;
  for (std::size_t k = 0; k < g.size(); k += 100) {
    const double tau = 1.0 - g.node(k);
    EXPECT_NEAR(s.pair(1, 1)[k], 1.0, 1e-14);
    EXPECT_NEAR(s.pair(2, 2)[k], 1.0, 1e-14);
    EXPECT_NEAR(s.pair(1, 2)[k], -0.5 - 0.5 * std::exp(-2 * tau), 1e-12);
  }
}

TEST(FiniteChain, TerminalConditions) {
  const auto s = solve_finite_chain(params(1.0, 1.0, 0.7), bc::AttractedToZero{}, 4, TimeGrid(1.0, 1e-2));
  const auto n = s.grid.steps();
  for (int i = 1; i <= 4; ++i)
    for (int j = i; j <= 4; ++j) {
      const double want = j == i ? 0.7 : (j == i + 1 ? -0.7 : 0.0);
      EXPECT_EQ(s.pair(i, j)[n], want);
    }
}

// Columns before the boundary follow the translation-invariant offset system.
TEST(FiniteChain, InteriorEqualsInfiniteOffsets) {
  const TimeGrid g(2.0, 1e-3);
  const auto fin = solve_finite_chain(params(2.0), bc::NoControl{}, 8, g);
  const auto inf = solve_infinite_chain(params(2.0), 8, g);
  for (int i = 1; i < 8; ++i)
    for (int j = i; j < 8; ++j) EXPECT_LT(max_abs_diff(fin.pair(i, j), inf.offset(j - i)), 1e-12) << i << j;
}

TEST(FiniteChain, GeneralBoundaryPsi) {
  const double m = 0.8;
  const auto s = solve_finite_chain(params(1.5), bc::General{1.0, 0.0, m, 1.0, 0.0}, 5, TimeGrid(1.5, 1e-3));
  ASSERT_EQ(s.psi.size(), 5u);
  for (double v : s.psi[4]) EXPECT_NEAR(v, -m, 1e-12);
  for (double v : s.pair(5, 5)) EXPECT_NEAR(v, 1.0, 1e-12);
  EXPECT_GT(std::abs(s.psi[3][0]), 1e-3);
  EXPECT_EQ(s.psi[0].back(), 0.0);
}

TEST(FiniteChain, RejectsBadInput) {
  const TimeGrid g(1.0, 0.1);
  EXPECT_THROW(solve_finite_chain(params(1.0), bc::AttractedToZero{}, 1, g), ValidationError);
  EXPECT_THROW(solve_finite_chain(params(2.0), bc::AttractedToZero{}, 3, g), ValidationError);
  EXPECT_THROW(solve_finite_chain(params(1.0), bc::General{-1, 0, 0, 1, 0}, 3, g), ValidationError);
}

TEST(InfiniteChain, RootMatchesClosedForm) {
  const auto s = solve_infinite_chain(params(2.0), 20, TimeGrid(2.0, 1e-3));
  ASSERT_TRUE(s.closed_form_error.has_value());
  EXPECT_LT(*s.closed_form_error, 1e-12);
  auto q = params(1.0, 1.0, 0.0);
  EXPECT_NEAR(solve_infinite_chain(q, 3, TimeGrid(1.0, 1e-3)).phi[0][0], std::tanh(1.0), 1e-12);
}

TEST(InfiniteChain, FourthOrderConvergence) {
  const auto p = params(2.0, 1.0, 0.0);
  const double exact = std::tanh(2.0);
  const double e1 = std::abs(solve_infinite_chain(p, 2, TimeGrid(2.0, 0.1)).phi[0][0] - exact);
  const double e2 = std::abs(solve_infinite_chain(p, 2, TimeGrid(2.0, 0.05)).phi[0][0] - exact);
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(InfiniteChain, LongHorizonReachesStationaryCoefficients) {
  const auto s = solve_infinite_chain(params(30.0), 10, TimeGrid(30.0, 1e-2));
  const auto st = chain_stationary(10);
  for (int k = 0; k <= 10; ++k) EXPECT_NEAR(s.phi[k][0], st[k], 1e-8) << k;
}

TEST(InfiniteChain, SqrtEpsilonScaling) {
  const auto s = solve_infinite_chain(params(30.0, 4.0), 6, TimeGrid(30.0, 1e-2));
  const auto st = chain_stationary(6);
  for (int k = 0; k <= 6; ++k) EXPECT_NEAR(s.phi[k][0], 2.0 * st[k], 1e-8) << k;
}

TEST(InfiniteChain, TailMassReported) {
  const auto s = solve_infinite_chain(params(1.0, 4.0), 40, TimeGrid(1.0, 1e-2));
  EXPECT_NEAR(s.tail_mass, 2.0 * stationary_tail_mass(CoeffKind::chain(), 40), 1e-15);
  EXPECT_THROW(s.pair(1, 1), ValidationError);
  EXPECT_THROW(s.offset(41), ValidationError);
}

TEST(Interpolation, LinearBetweenNodes) {
  const auto s = solve_finite_chain(params(1.0), bc::AttractedToZero{}, 2, TimeGrid(1.0, 0.5));
  const auto& f = s.pair(1, 2);
  EXPECT_DOUBLE_EQ(s.at(f, 0.25), 0.5 * (f[0] + f[1]));
  EXPECT_DOUBLE_EQ(s.at(f, 1.0), f[2]);
  EXPECT_THROW(s.at(f, 1.5), ValidationError);
}

TEST(Tree, UnitBranchingIsTheChain) {
  const TimeGrid g(2.0, 1e-3);
  const auto a = solve_tree(params(2.0), 15, g), b = solve_infinite_chain(params(2.0), 15, g);
  for (int k = 0; k <= 15; ++k) EXPECT_EQ(a.phi[k], b.phi[k]);
}

TEST(Tree, RescalesToTheChain) {
  const TimeGrid g(2.0, 1e-3);
  for (int d : {2, 3}) {
    const auto t = solve_tree(params(2.0, 1.0, 1.0, 1.0, d), 12, g);
    const auto c = solve_infinite_chain(params(2.0), 12, g);
    for (int k = 0; k <= 12; ++k)
      for (std::size_t n = 0; n < g.size(); n += 250)
        EXPECT_NEAR(std::pow(d, k) * t.phi[k][n], c.phi[k][n], 1e-12) << d << " " << k;
  }
}

TEST(Ring, TerminalAndShape) {
  const auto s = solve_periodic_chain(params(10.0), 6, TimeGrid(10.0, 1e-2));
  ASSERT_EQ(s.phi.size(), 6u);
  EXPECT_EQ(s.phi[0].back(), 1.0);
  EXPECT_EQ(s.phi[1].back(), -1.0);
  EXPECT_EQ(s.phi[2].back(), 0.0);
}

// On a large ring, wrap-around contributions are tiny on a short horizon.
TEST(Ring, LargeRingApproachesInfiniteChain) {
  const TimeGrid g(1.0, 1e-3);
  const auto r = solve_periodic_chain(params(1.0), 80, g);
  const auto c = solve_infinite_chain(params(1.0), 10, g);
  for (int k = 0; k <= 10; ++k) EXPECT_LT(max_abs_diff(r.phi[k], c.phi[k]), 1e-9) << k;
}

TEST(Mixed, UnitWeightIsTheChain) {
  const TimeGrid g(2.0, 1e-3);
  const auto m = solve_mixed_infinite(params(2.0), 10, g), c = solve_infinite_chain(params(2.0), 10, g);
  for (int k = 0; k <= 10; ++k) EXPECT_LT(max_abs_diff(m.phi[k], c.phi[k]), 1e-13);
  for (std::size_t n = 0; n < g.size(); n += 100) EXPECT_NEAR(m.psi[0][n], 1.0 + (2.0 - g.node(n)), 1e-10);
}

TEST(Mixed, LongHorizonStationary) {
  for (double u : {0.0, 0.5, 0.75}) {
    const auto s = solve_mixed_infinite(params(40.0, 1.0, 1.0, u), 8, TimeGrid(40.0, 1e-2));
    const auto st = stationary_coeffs(CoeffKind::mixed(u), 8);
    EXPECT_NEAR(s.psi[0][0], *st.psi, 1e-8) << u;
    for (int k = 0; k <= 8; ++k) EXPECT_NEAR(s.phi[k][0], st.values[k], 1e-8) << u << " " << k;
  }
}

TEST(MixedFinite, UnitWeightIsTheFiniteChain) {
  const TimeGrid g(2.0, 1e-3);
  const auto m = solve_mixed_finite(params(2.0), 5, g);
  const auto c = solve_finite_chain(params(2.0), bc::AttractedToZero{}, 5, g);
  for (int i = 1; i <= 5; ++i)
    for (int j = i; j <= 5; ++j) EXPECT_LT(max_abs_diff(m.pair(i, j), c.pair(i, j)), 1e-10);
  EXPECT_NEAR(m.psi[0].back(), 0.8, 1e-15);
}

// theta decouples at u = 0: theta' = theta^2 - eps (1 - 1/N).
TEST(MixedFinite, PureMeanFieldTheta) {
  const int N = 4;
  const double T = 2.0, h = 1e-3, e = 1.0 * (1 - 1.0 / N);
  const auto s = solve_mixed_finite(params(T, 1.0, 1.0, 0.0), N, TimeGrid(T, h));
  double th = 1.0 * (1 - 1.0 / N);
  auto f = [&](double x) { return -(x * x - e); };
  for (int k = 0; k < 2000; ++k) {
    const double k1 = f(th), k2 = f(th + h / 2 * k1), k3 = f(th + h / 2 * k2), k4 = f(th + h * k3);
    th += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  EXPECT_NEAR(s.psi[0][0], th, 1e-12);
  EXPECT_NEAR(s.psi[0][0], std::sqrt(e), 1e-2);
}

// Independent oracle: the undivided equations, theta' solved first and each
// phi' recovered by dividing through by u, integrated with an adaptive stepper.
TEST(MixedFinite, MatchesRawEquationsWithOdeint) {
  for (double u : {0.3, 0.7}) {
    const int N = 4;
    const double T = 1.5, eps = 1.3, c = 0.9, v = 1 - u, iN = 1.0 / N;
    const auto s = solve_mixed_finite(params(T, eps, c, u), N, TimeGrid(T, 1e-3));
    auto id = [N](int i, int j) { return RiccatiSolution::pair_index(N, i, j); };
    const std::size_t np = N * (N + 1) / 2;
    using State = std::vector<double>;
    auto rhs = [&](const State& y, State& dy, double) {
      const double th = y[np];
      auto col = [&](int l) {
        double a = 0;
        for (int j = 1; j <= l; ++j) a += y[id(j, l)];
        return a;
      };
      auto row = [&](int i) {
        double a = 0;
        for (int k = i; k <= N; ++k) a += y[id(i, k)];
        return a;
      };
      const double thdot = (u * v * th * row(1) + v * v * th * th - v * eps * (1 - iN)) / v;
      dy[np] = thdot;
      for (int i = 1; i <= N; ++i)
        for (int l = i; l <= N; ++l) {
          double conv = 0;
          for (int j = i; j <= l; ++j) conv += y[id(i, j)] * y[id(j, l)];
          const double cross = u * v * th * iN * (col(l) + row(i));
          double lhs_rest, rhs_val;
          if (l == i) {
            lhs_rest = -u * u * conv - 2 * u * v * th * y[id(i, i)] + v * thdot * (1 - iN) - v * v * th * th * (1 - iN) + cross;
            rhs_val = -u * eps - v * eps * (1 - iN) * (1 - iN);
          } else {
            lhs_rest = -u * u * conv - 2 * u * v * th * y[id(i, l)] - v * thdot * iN + v * v * th * th * iN + cross;
            rhs_val = (l == i + 1 ? u * eps : 0.0) + v * eps * (1 - iN) * iN;
          }
          dy[id(i, l)] = (rhs_val - lhs_rest) / u;
        }
    };
    State y(np + 1, 0.0);
    for (int i = 1; i <= N; ++i) {
      y[id(i, i)] = c;
      if (i < N) y[id(i, i + 1)] = -c;
    }
    y[np] = c * (1 - iN);
    namespace ode = boost::numeric::odeint;
    ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-13, 1e-13), rhs, y, T, 0.0, -1e-3);
    for (int i = 1; i <= N; ++i)
      for (int l = i; l <= N; ++l) EXPECT_NEAR(s.pair(i, l)[0], y[id(i, l)], 1e-9) << u << " " << i << l;
    EXPECT_NEAR(s.psi[0][0], y[np], 1e-9);
  }
}

TEST(Integrator, BlowUpIsReportedWithTime) {
  const TimeGrid g(2.0, 1e-3);
  try {
    detail::integrate_backward(g, {1.0}, [](double, const std::vector<double>& y, std::vector<double>& d) { d[0] = -y[0] * y[0]; }, "test");
    FAIL() << "no blow-up";
  } catch (const BlowUpError& e) {
    EXPECT_NEAR(e.time(), 1.0, 0.01);
  }
}
