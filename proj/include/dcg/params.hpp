#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace dcg {

struct GameParams {
  double epsilon = 1.0;
  double c = 1.0;
  double sigma = 1.0;
  double horizon = 1.0;
  double u = 1.0;
  int branching = 1;

  void validate() const {
    require(std::isfinite(epsilon) && epsilon > 0, "epsilon must be positive");
    require(std::isfinite(c) && c >= 0, "c must be nonnegative");
    require(std::isfinite(sigma) && sigma > 0, "sigma must be positive");
    require(std::isfinite(horizon) && horizon > 0, "horizon must be positive");
    require(u >= 0 && u <= 1, "u must lie in [0,1]");
    require(branching >= 1, "branching must be >= 1");
  }
};

namespace bc {

struct General {
  double a1 = 1.0;
  double a2 = 0.0;
  double m = 0.0;
  double c1 = 1.0;
  double c2 = 0.0;
};
struct AttractedToZero {};
struct NoControl {};

} // namespace bc

using BoundaryCondition = std::variant<bc::General, bc::AttractedToZero, bc::NoControl>;

inline void validate(const BoundaryCondition& b) {
  if (auto g = std::get_if<bc::General>(&b)) {
    require(g->a1 > 0, "General boundary condition needs a1 > 0");
    require(g->c1 > 0, "General boundary condition needs c1 > 0");
  }
}

inline std::string name(const BoundaryCondition& b) {
  if (std::holds_alternative<bc::General>(b)) return "general";
  if (std::holds_alternative<bc::AttractedToZero>(b)) return "attracted-to-zero";
  return "no-control";
}

// Uniform grid on [0, T].
class TimeGrid {
public:
  TimeGrid() = default;

  TimeGrid(double horizon, double step) {
    require(std::isfinite(horizon) && horizon > 0, "grid horizon must be positive");
    require(std::isfinite(step) && step > 0, "grid step must be positive");
    require(step <= horizon * (1 + 1e-12), "grid step exceeds horizon");
    const double n = std::round(horizon / step);
    require(std::abs(n * step - horizon) <= 1e-9 * horizon,
            "horizon is not an integer multiple of the step (nonuniform grid)");
    T_ = horizon;
    n_ = static_cast<std::size_t>(n);
    h_ = horizon / static_cast<double>(n_);
  }

  static TimeGrid from_nodes(const std::vector<double>& nodes) {
    require(nodes.size() >= 2, "grid needs at least two nodes");
    require(nodes.front() == 0.0, "grid must start at 0");
    TimeGrid g(nodes.back(), nodes[1] - nodes[0]);
    require(g.steps() + 1 == nodes.size(), "grid is not uniform");
    for (std::size_t k = 0; k < nodes.size(); ++k)
      require(std::abs(nodes[k] - g.node(k)) <= 1e-9 * g.horizon(), "grid is not uniform");
    return g;
  }

  double horizon() const { return T_; }
  double step() const { return h_; }
  std::size_t steps() const { return n_; }
  std::size_t size() const { return n_ + 1; }
  double node(std::size_t k) const { return k == n_ ? T_ : static_cast<double>(k) * h_; }

  std::vector<double> nodes() const {
    std::vector<double> v(size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = node(k);
    return v;
  }

private:
  double T_ = 1.0;
  double h_ = 1.0;
  std::size_t n_ = 1;
};

} // namespace dcg
