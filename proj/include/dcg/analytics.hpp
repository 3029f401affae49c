#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "catalan.hpp"
#include "errors.hpp"

namespace dcg {

namespace detail {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == neg_inf) return b;
  if (b == neg_inf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

} // namespace detail

// log of the regularized lower incomplete gamma P(a, y), integer a >= 1.
inline double log_lower_gamma_p(int a, double y) {
  require(a >= 1, "log_lower_gamma_p: a must be >= 1");
  require(y >= 0, "log_lower_gamma_p: y must be nonnegative");
  if (y == 0) return detail::neg_inf;
  const double ly = std::log(y);
  if (y < a + 1.0) {
    double term = 1.0, sum = 1.0;
    for (int n = 1; n < 10000; ++n) {
      term *= y / (a + n);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return -y + a * ly - std::lgamma(a + 1.0) + std::log(sum);
  }
  // 1 - Q with Q = e^{-y} sum_{j<a} y^j / j!
  double q = 0.0;
  for (int j = 0; j < a; ++j) q += std::exp(-y + j * ly - std::lgamma(j + 1.0));
  return std::log1p(-std::min(q, 1.0));
}

// log of int_0^x s^m e^{-2s} ds.
inline double log_power_exp_integral(int m, double x) {
  require(m >= 0, "power must be >= 0");
  if (x <= 0) return detail::neg_inf;
  return std::lgamma(m + 1.0) - (m + 1) * std::numbers::ln2 + log_lower_gamma_p(m + 1, 2 * x);
}

// log of int_0^inf s^m e^{-2s} ds.
inline double log_power_exp_integral_inf(int m) {
  return std::lgamma(m + 1.0) - (m + 1) * std::numbers::ln2;
}

// (1/2) C(4k,2k) / ((2k+1) 16^k): the k-th term of the limiting variance series at u = 1.
inline double variance_series_term(int k) {
  return std::exp(std::lgamma(4.0 * k + 1) - 2 * std::lgamma(2.0 * k + 1) - std::log(2.0 * k + 1) -
                  (4.0 * k + 1) * std::numbers::ln2);
}

// Closed form of the limiting series: (1/2) sqrt(2 / (1 + sqrt(1 - u^2))).
inline double asymptotic_variance_closed(double u) {
  require(u >= 0 && u <= 1, "u must lie in [0,1]");
  return 0.5 * std::sqrt(2.0 / (1.0 + std::sqrt(1.0 - u * u)));
}

// (1/2)(sqrt2/4) x sqrt(x^2 - sqrt(x^4 - 16)) with x = 2/sqrt(u).
inline double asymptotic_variance(double u) {
  require(u >= 0 && u <= 1, "u must lie in [0,1]");
  if (u == 0) return 0.5;
  const double x2 = 4.0 / u;
  const double r = std::sqrt(std::max(0.0, x2 * x2 - 16.0));
  return 0.5 * (std::numbers::sqrt2 / 4.0) * std::sqrt(x2) * std::sqrt(16.0 / (x2 + r));
}

inline double asymptotic_variance_tree(int d) {
  require(d >= 1, "branching must be >= 1");
  return (std::numbers::sqrt2 / 2.0) / std::sqrt(1.0 + std::sqrt((d - 1.0) / d));
}

// sum_{k > K} u^{2k} a_k, a rigorous bound on every truncated series below.
inline double variance_series_tail(double u, int K) {
  require(u >= 0 && u <= 1, "u must lie in [0,1]");
  require(K >= 0, "depth must be >= 0");
  if (u == 0) return 0.0;
  if (u == 1) {
    double s = 0.0;
    for (int k = 0; k <= K; ++k) s += variance_series_term(k);
    return std::max(0.0, asymptotic_variance_closed(1.0) - s);
  }
  double tail = 0.0;
  const double l2 = 2 * std::log(u);
  for (int k = K + 1; k < 1000000; ++k) {
    const double term = std::exp(std::log(variance_series_term(k)) + k * l2);
    tail += term;
    if (term < 1e-18 * tail || term == 0) break;
  }
  return tail;
}

// Bound a_{K+1} u^{2K+2} / (1 - u^2) from the term ratio being below u^2.
inline double variance_series_tail_bound(double u, int K) {
  require(u >= 0 && u < 1, "u must lie in [0,1)");
  return variance_series_term(K + 1) * std::pow(u, 2 * K + 2) / (1 - u * u);
}

inline double variance_series_partial(double u, int K) {
  double s = 0.0;
  for (int k = 0; k <= K; ++k) s += variance_series_term(k) * std::pow(u, 2 * k);
  return s;
}

struct CurvePoint {
  double t = 0.0;
  double value = 0.0;
  double tail_bound = 0.0;
};

inline CurvePoint variance_at(double t, double u, int depth) {
  require(t >= 0 && std::isfinite(t), "t must be nonnegative");
  require(u >= 0 && u <= 1, "u must lie in [0,1]");
  require(depth >= 0, "series depth must be >= 0");
  CurvePoint pt{t, 0.0, variance_series_tail(u, depth)};
  if (t == 0) return pt;
  const int K = u == 0 ? 0 : depth;
  std::vector<double> li(static_cast<std::size_t>(2 * K) + 1);
  for (int m = 0; m <= 2 * K; ++m) li[m] = log_power_exp_integral(m, t);
  double acc = detail::neg_inf;
  for (int k = 0; k <= K; ++k) {
    const auto lb = kernel_log_coeffs(k);
    const double lw = k == 0 ? 0.0 : 2 * k * std::log(u);
    for (std::size_t a = 0; a < lb.size(); ++a)
      for (std::size_t b = 0; b < lb.size(); ++b) {
        const int m = kernel_power(k, static_cast<int>(a)) + kernel_power(k, static_cast<int>(b));
        acc = detail::log_add(acc, lw + lb[a] + lb[b] + li[m]);
      }
  }
  pt.value = std::exp(acc);
  return pt;
}

inline std::vector<CurvePoint> variance_curve(const std::vector<double>& t_values, double u, int depth = 60) {
  std::vector<CurvePoint> out;
  for (double t : t_values) out.push_back(variance_at(t, u, depth));
  return out;
}

struct AutoCovariance {
  double s = 0.0, t = 0.0;
  double value = 0.0;
  double tail_bound = 0.0;
};

// E[X_s X_t] = sum_k u^{2k} e^{-(t-s)} int_0^s P_k(v+t-s) P_k(v) e^{-2v} dv.
inline AutoCovariance auto_covariance(double s, double t, double u, int depth = 60) {
  require(s >= 0 && std::isfinite(t), "s must be nonnegative");
  require(s <= t, "auto_covariance needs s <= t");
  require(u >= 0 && u <= 1, "u must lie in [0,1]");
  require(depth >= 0, "series depth must be >= 0");
  AutoCovariance r{s, t, 0.0, variance_series_tail(u, depth)};
  if (s == 0) return r;
  const double tau = t - s;
  const double ltau = tau > 0 ? std::log(tau) : detail::neg_inf;
  const int K = u == 0 ? 0 : depth;
  std::vector<double> li(static_cast<std::size_t>(2 * K) + 1);
  for (int m = 0; m <= 2 * K; ++m) li[m] = log_power_exp_integral(m, s);
  // log binomials
  auto lbinom = [](int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  };
  double acc = detail::neg_inf;
  for (int k = 0; k <= K; ++k) {
    const auto lb = kernel_log_coeffs(k);
    const double lw = (k == 0 ? 0.0 : 2 * k * std::log(u)) - tau;
    for (std::size_t a = 0; a < lb.size(); ++a) {
      const int pa = kernel_power(k, static_cast<int>(a));
      for (int q = 0; q <= pa; ++q) {
        // (v + tau)^{pa} -> C(pa, q) v^q tau^{pa-q}
        if (pa - q > 0 && tau == 0) continue;
        const double lc = lbinom(pa, q) + (pa - q > 0 ? (pa - q) * ltau : 0.0);
        for (std::size_t b = 0; b < lb.size(); ++b) {
          const int m = q + kernel_power(k, static_cast<int>(b));
          acc = detail::log_add(acc, lw + lb[a] + lb[b] + lc + li[m]);
        }
      }
    }
  }
  r.value = std::exp(acc);
  return r;
}

struct CrossLimit {
  int k = 0;
  double value = 0.0;
  double tail_bound = 0.0;
};

// lim_t E[X_t^1 X_t^{k+1}] = sum_j u^{k+2j} int_0^inf P_{k+j} P_j e^{-2s} ds.
inline CrossLimit cross_covariance_limit(int k, double u, int depth = 60) {
  require(k >= 0, "offset k must be >= 0");
  require(u >= 0 && u <= 1, "u must lie in [0,1]");
  require(depth >= 0, "series depth must be >= 0");
  CrossLimit r{k, 0.0, variance_series_tail(u, depth)};
  if (u == 0) {
    r.value = k == 0 ? 0.5 : 0.0;
    return r;
  }
  const double lu = std::log(u);
  double acc = detail::neg_inf;
  for (int j = 0; j <= depth; ++j) {
    const auto la = kernel_log_coeffs(k + j), lb = kernel_log_coeffs(j);
    const double lw = (k + 2 * j) * lu;
    for (std::size_t a = 0; a < la.size(); ++a)
      for (std::size_t b = 0; b < lb.size(); ++b) {
        const int m = kernel_power(k + j, static_cast<int>(a)) + kernel_power(j, static_cast<int>(b));
        acc = detail::log_add(acc, lw + la[a] + lb[b] + log_power_exp_integral_inf(m));
      }
  }
  r.value = std::exp(acc);
  return r;
}

struct Table1Row {
  double u = 0.0;
  double asymptotic_variance = 0.0;
  std::vector<CrossLimit> cross;
  bool dependent = false;
};

struct MomentReport {
  int series_depth = 60;
  std::string method = "exact gamma sums with incomplete-gamma closed forms";
  std::vector<CurvePoint> variance;
  std::vector<AutoCovariance> auto_cov;
  std::vector<CrossLimit> cross;
  std::vector<Table1Row> table;
};

constexpr double independence_threshold = 1e-10;

inline MomentReport table1_report(const std::vector<double>& u_values, int depth = 60, int max_offset = 4) {
  MomentReport rep;
  rep.series_depth = depth;
  for (double u : u_values) {
    require(u >= 0 && u <= 1, "u must lie in [0,1]");
    Table1Row row{u, asymptotic_variance(u), {}, false};
    for (int k = 1; k <= max_offset; ++k) {
      row.cross.push_back(cross_covariance_limit(k, u, depth));
      if (std::abs(row.cross.back().value) > independence_threshold) row.dependent = true;
    }
    rep.table.push_back(std::move(row));
  }
  return rep;
}

// Coefficients c_i of K_{k-1/2}(t) = sqrt(pi/(2t)) e^{-t} sum_i c_i t^{-i}.
inline std::vector<double> bessel_half_coeffs(int k) {
  const int n = k == 0 ? 1 : k;
  std::vector<double> c(static_cast<std::size_t>(n));
  double term = 1.0;
  for (int i = 0; i < n; ++i) {
    c[i] = term;
    term *= static_cast<double>(n + i) * (n - 1 - i) / ((i + 1.0) * 2.0);
  }
  return c;
}

// int_0^inf t^{alpha-1} K_{k-1/2}(t)^2 dt via the finite Bessel sums.
inline double bessel_square_moment_gamma_sum(int alpha, int k) {
  const auto c = bessel_half_coeffs(k);
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) {
      const int m = alpha - 1 - static_cast<int>(i + j);
      require(m > 0, "moment diverges at the origin");
      s += c[i] * c[j] * std::exp(std::lgamma(static_cast<double>(m)) - m * std::numbers::ln2);
    }
  return std::numbers::pi / 2 * s;
}

// sqrt(pi) G(a/2+nu) G(a/2-nu) G(a/2) / (4 G((a+1)/2)).
inline double bessel_square_moment_identity(double alpha, double nu) {
  const double h = alpha / 2;
  require(h > std::abs(nu), "identity needs alpha/2 > |nu|");
  return std::sqrt(std::numbers::pi) / 4 *
         std::exp(std::lgamma(h + nu) + std::lgamma(h - nu) + std::lgamma(h) - std::lgamma((alpha + 1) / 2));
}

} // namespace dcg
