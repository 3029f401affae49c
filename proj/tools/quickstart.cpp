// Minimal library tour: stationary coefficients, a Riccati solve, the kernel and the variance.
#include <cstdio>

#include "dcg.hpp"

int main() {
  using namespace dcg;

  const auto st = stationary_coeffs(CoeffKind::chain(), 5);
  for (std::size_t k = 0; k < st.values.size(); ++k) std::printf("phi^%zu = %s\n", k, chain_coeff_exact(int(k)).str().c_str());

  GameParams p;
  p.horizon = 5;
  const auto sol = solve_infinite_chain(p, 20, TimeGrid(p.horizon, 1e-3));
  std::printf("phi^1 at t=0: %.10f (stationary -0.5)\n", sol.offset(1)[0]);

  const auto gen = build_generator(CoeffKind::chain(), 16);
  const auto P = transition_matrix(gen, 1.0);
  std::printf("p_11(1) = %.7f, p_12(1) = %.7f\n", P.entry(1, 1), P.entry(1, 2));

  std::printf("Var(X_5) = %.6f, limit %.6f\n", variance_at(5.0, 1.0, 60).value, asymptotic_variance(1.0));
  return 0;
}
