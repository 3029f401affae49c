#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "params.hpp"

namespace dcg {

using u128 = unsigned __int128;

// Signed rational with 128-bit magnitude; every operation is overflow-checked.
class Rational {
public:
  Rational() = default;
  Rational(std::int64_t n)
      : neg_(n < 0), num_(n < 0 ? static_cast<u128>(-(n + 1)) + 1 : static_cast<u128>(n)) {}
  Rational(bool negative, u128 num, u128 den) : neg_(negative), num_(num), den_(den) {
    if (den_ == 0) throw std::domain_error("rational with zero denominator");
    reduce();
  }

  bool negative() const { return neg_ && num_ != 0; }
  u128 num() const { return num_; }
  u128 den() const { return den_; }

  double to_double() const {
    const double v = static_cast<long double>(num_) / static_cast<long double>(den_);
    return negative() ? -v : v;
  }

  std::string str() const {
    std::string s = negative() ? "-" : "";
    s += to_string(num_);
    if (den_ != 1) s += "/" + to_string(den_);
    return s;
  }

  friend Rational operator*(const Rational& a, const Rational& b) {
    // cross-reduce first to keep magnitudes small
    const u128 g1 = gcd(a.num_, b.den_), g2 = gcd(b.num_, a.den_);
    return Rational(a.negative() != b.negative(), mul(a.num_ / g1, b.num_ / g2),
                    mul(a.den_ / g2, b.den_ / g1));
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    const u128 g = gcd(a.den_, b.den_);
    const u128 den = mul(a.den_ / g, b.den_);
    const u128 x = mul(a.num_, b.den_ / g), y = mul(b.num_, a.den_ / g);
    if (a.negative() == b.negative()) return Rational(a.negative(), add(x, y), den);
    return x >= y ? Rational(a.negative(), x - y, den) : Rational(b.negative(), y - x, den);
  }

  friend Rational operator-(const Rational& a) { return Rational(!a.negative(), a.num_, a.den_); }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.negative() == b.negative() && a.num_ == b.num_ && a.den_ == b.den_;
  }

  static u128 gcd(u128 a, u128 b) {
    while (b != 0) {
      const u128 r = a % b;
      a = b;
      b = r;
    }
    return a == 0 ? 1 : a;
  }

  static u128 mul(u128 a, u128 b) {
    u128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("rational overflow");
    return r;
  }

  static u128 add(u128 a, u128 b) {
    u128 r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("rational overflow");
    return r;
  }

  static std::string to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v != 0) {
      s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    }
    return s;
  }

private:
  void reduce() {
    const u128 g = gcd(num_, den_);
    num_ /= g;
    den_ /= g;
    if (num_ == 0) {
      neg_ = false;
      den_ = 1;
    }
  }

  bool neg_ = false;
  u128 num_ = 0;
  u128 den_ = 1;
};

// Catalan number C_n, exact for n <= 64.
inline u128 catalan_number(int n) {
  require(n >= 0 && n <= 64, "catalan_number: n must lie in [0,64]");
  u128 c = 1;
  for (int m = 0; m < n; ++m) {
    const u128 num = Rational::mul(c, 2 * (2 * static_cast<u128>(m) + 1));
    c = num / (static_cast<u128>(m) + 2);
  }
  return c;
}

// Stationary chain coefficient phi^j: 1 for j = 0, -C_{j-1} / 2^{2j-1} otherwise.
inline Rational chain_coeff_exact(int j) {
  require(j >= 0 && j <= 64, "chain_coeff_exact: j must lie in [0,64]");
  if (j == 0) return Rational(1);
  return Rational(true, catalan_number(j - 1), static_cast<u128>(1) << (2 * j - 1));
}

inline std::vector<double> chain_stationary(int depth) {
  require(depth >= 0, "depth must be >= 0");
  std::vector<double> phi(static_cast<std::size_t>(depth) + 1);
  phi[0] = 1.0;
  if (depth >= 1) phi[1] = -0.5;
  for (int j = 1; j < depth; ++j)
    phi[j + 1] = phi[j] * (2.0 * j - 1.0) / (2.0 * (j + 1.0));
  return phi;
}

enum class Topology { Chain, Mixed, Tree };

struct CoeffKind {
  Topology topology = Topology::Chain;
  double u = 1.0;
  int d = 1;

  static CoeffKind chain() { return {}; }
  static CoeffKind mixed(double u) { return {Topology::Mixed, u, 1}; }
  static CoeffKind tree(int d) { return {Topology::Tree, 1.0, d}; }
};

inline std::string name(Topology t) {
  switch (t) {
  case Topology::Chain: return "chain";
  case Topology::Mixed: return "mixed";
  case Topology::Tree: return "tree";
  }
  return "?";
}

struct StationaryCoeffs {
  CoeffKind kind;
  std::vector<double> values;
  std::optional<double> psi;
};

inline StationaryCoeffs stationary_coeffs(const CoeffKind& kind, int depth) {
  require(depth >= 0, "depth must be >= 0");
  StationaryCoeffs s{kind, chain_stationary(depth), std::nullopt};
  switch (kind.topology) {
  case Topology::Chain: break;
  case Topology::Mixed: {
    const double u = kind.u;
    require(u >= 0 && u <= 1, "u must lie in [0,1]");
    const double r = std::sqrt(1.0 - u);
    s.psi = u < 1 ? 1.0 / r : std::numeric_limits<double>::infinity();
    // (1 - sqrt(1-u)) / u without the 0/0 at u = 0
    s.values[0] = 1.0 / (1.0 + r);
    double w = 1.0;
    for (std::size_t k = 2; k < s.values.size(); ++k) {
      w *= u;
      s.values[k] *= w;
    }
    break;
  }
  case Topology::Tree: {
    require(kind.d >= 1, "branching must be >= 1");
    double w = 1.0;
    for (std::size_t k = 1; k < s.values.size(); ++k) {
      w /= kind.d;
      s.values[k] *= w;
    }
    break;
  }
  }
  return s;
}

// Sum over offsets beyond depth of |phi^j| for the stationary coefficients.
inline double stationary_tail_mass(const CoeffKind& kind, int depth) {
  require(depth >= 0, "depth must be >= 0");
  const double w = kind.topology == Topology::Mixed ? kind.u
                   : kind.topology == Topology::Tree ? 1.0 / kind.d
                                                     : 1.0;
  if (w == 1.0) {
    // chain masses sum to one
    double s = 0.0, p = 0.5;
    for (int j = 1; j <= depth; ++j) {
      s += p;
      p *= (2.0 * j - 1.0) / (2.0 * (j + 1.0));
    }
    return std::max(0.0, 1.0 - s);
  }
  // p_j w^{j-1} (mixed) or p_j w^j (tree), summed until negligible
  const double shift = kind.topology == Topology::Mixed ? 1.0 : 0.0;
  double p = 0.5, tail = 0.0;
  for (int j = 1; j < 100000000; ++j) {
    const double term = p * std::pow(w, j - shift);
    if (j > depth) {
      tail += term;
      if (term < 1e-18 * std::max(tail, 1e-300)) break;
    }
    if (term == 0.0) break;
    p *= (2.0 * j - 1.0) / (2.0 * (j + 1.0));
  }
  return tail;
}

// S_t(z) = sum_k z^k phi_t^k in closed form.
inline double generating_function(double z, double t, const GameParams& p) {
  require(z >= 0 && z <= 1, "z must lie in [0,1]");
  require(t >= 0 && t <= p.horizon, "t must lie in [0,T]");
  if (z == 1.0) return 0.0;
  const double w = 1.0 - z;
  const double a = std::sqrt(p.epsilon * w);
  const double cw = p.c * w;
  const double E = std::exp(-2.0 * a * (p.horizon - t));
  const double num = -a * a - cw * a + (a * a - cw * a) * E;
  const double den = -a - cw + (cw - a) * E;
  return num / den;
}

// rho_k(x) = sum_{p=k}^{2k-1} a_p (-x)^{-p/2}; coeffs[i] holds a_{k+i}.
struct RhoPolynomial {
  int order = 0;
  std::vector<Rational> coeffs;

  double operator()(double x) const {
    require(x < 0, "rho: x must be negative");
    if (order == 0) return coeffs.empty() ? 1.0 : coeffs[0].to_double();
    const double y = std::sqrt(-x);
    double v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;)
      v = v / y + coeffs[i].to_double();
    return v * std::pow(y, -order);
  }
};

// Closed form: a_j = (j-1)! / (2^k (2j-2k)!! (2k-j-1)!).
inline RhoPolynomial rho_polynomial(int k) {
  require(k >= 0, "rho order must be >= 0");
  RhoPolynomial r{k, {}};
  if (k == 0) {
    r.coeffs.push_back(Rational(1));
    return r;
  }
  Rational a(false, 1, static_cast<u128>(1) << k);
  if (k >= 127) throw std::overflow_error("rho order too large for exact coefficients");
  for (int j = k; j <= 2 * k - 1; ++j) {
    r.coeffs.push_back(a);
    if (j < 2 * k - 1)
      a = a * Rational(false, static_cast<u128>(j) * static_cast<u128>(2 * k - j - 1),
                       2 * static_cast<u128>(j - k + 1));
  }
  return r;
}

// Same polynomial from rho_{k+1} = rho_k' + rho_k / (2 sqrt(-x)).
inline RhoPolynomial rho_polynomial_recursive(int k) {
  require(k >= 0, "rho order must be >= 0");
  // a[p] is the coefficient of (-x)^{-p/2}
  std::vector<Rational> a{Rational(1)};
  for (int m = 0; m < k; ++m) {
    std::vector<Rational> b(a.size() + 2);
    for (std::size_t p = 0; p < a.size(); ++p) {
      if (a[p] == Rational(0)) continue;
      b[p + 2] = b[p + 2] + a[p] * Rational(false, p, 2);
      b[p + 1] = b[p + 1] + a[p] * Rational(false, 1, 2);
    }
    a = std::move(b);
  }
  RhoPolynomial r{k, {}};
  if (k == 0) {
    r.coeffs.push_back(Rational(1));
    return r;
  }
  for (int p = k; p <= 2 * k - 1; ++p) r.coeffs.push_back(a[p]);
  for (std::size_t p = 0; p < a.size(); ++p)
    if ((static_cast<int>(p) < k || static_cast<int>(p) > 2 * k - 1) && !(a[p] == Rational(0)))
      throw std::logic_error("rho recursion produced a term outside the closed-form support");
  return r;
}

// Floating-point closed-form sum, usable for any order.
inline double rho(int k, double x) {
  require(k >= 0, "rho order must be >= 0");
  require(x < 0, "rho: x must be negative");
  if (k == 0) return 1.0;
  const double y = std::sqrt(-x);
  double term = std::pow(2.0 * y, -k);
  double sum = 0.0;
  for (int j = k; j <= 2 * k - 1; ++j) {
    sum += term;
    term *= static_cast<double>(j) * (2.0 * k - j - 1) / (2.0 * (j - k + 1) * y);
  }
  return sum;
}

// K_{k-1/2}(x) from its finite sum.
inline double bessel_k_half(int k, double x) {
  require(k >= 0, "bessel_k_half: k must be >= 0");
  require(x > 0, "bessel_k_half: x must be positive");
  const int n = k == 0 ? 1 : k;
  double term = 1.0, sum = 0.0;
  for (int j = 0; j <= n - 1; ++j) {
    sum += term;
    term *= static_cast<double>(n + j) * (n - 1 - j) / ((j + 1.0) * 2.0 * x);
  }
  return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) * sum;
}

// log b_{k,i} with P_k(s) = s^{2k} rho_k(-s^2) / k! = sum_{i<k} b_{k,i} s^{k-i}.
inline std::vector<double> kernel_log_coeffs(int k) {
  require(k >= 0, "kernel order must be >= 0");
  if (k == 0) return {0.0};
  std::vector<double> lb(static_cast<std::size_t>(k));
  const double ln2 = std::numbers::ln2;
  for (int i = 0; i < k; ++i)
    lb[i] = std::lgamma(k + i) - std::lgamma(i + 1.0) - std::lgamma(static_cast<double>(k - i)) -
            (k + i) * ln2 - std::lgamma(k + 1.0);
  return lb;
}

// Powers of s matching kernel_log_coeffs(k).
inline int kernel_power(int k, int i) { return k == 0 ? 0 : k - i; }

inline double kernel_poly(int k, double s) {
  if (k == 0) return 1.0;
  if (s == 0) return 0.0;
  const auto lb = kernel_log_coeffs(k);
  const double ls = std::log(s);
  double v = 0.0;
  for (int i = 0; i < k; ++i) v += std::exp(lb[i] + (k - i) * ls);
  return v;
}

} // namespace dcg
