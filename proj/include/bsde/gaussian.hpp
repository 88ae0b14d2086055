#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bsde/errors.hpp"

namespace bsde {

// Dense polynomial in one variable, coefficients in ascending powers.
using Poly = std::vector<double>;

inline double poly_eval(const Poly& c, double x) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
  return v;
}

// E[G^j] for G ~ N(0, var): 0 for odd j, var^{j/2} (j-1)!! for even j.
inline std::vector<double> gaussian_moments(std::size_t upto, double var) {
  std::vector<double> m(upto + 1, 0.0);
  m[0] = 1.0;
  for (std::size_t j = 2; j <= upto; j += 2)
    m[j] = m[j - 2] * var * static_cast<double>(j - 1);
  return m;
}

inline double binomial(std::size_t n, std::size_t k) {
  double b = 1.0;
  for (std::size_t i = 0; i < k; ++i)
    b = b * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return b;
}

// q(x) = E[P(x + G)], G ~ N(0, var). Exact for polynomials:
// q_j = sum_{k >= j} C(k, j) c_k E[G^{k-j}].
inline Poly propagate_mean(const Poly& p, double var) {
  if (p.empty()) return {};
  const std::size_t d = p.size() - 1;
  const auto mu = gaussian_moments(d, var);
  Poly q(p.size(), 0.0);
  for (std::size_t k = 0; k <= d; ++k)
    for (std::size_t j = 0; j <= k; ++j)
      q[j] += binomial(k, j) * p[k] * mu[k - j];
  return q;
}

// r(x) = E[P(x + G) * G], G ~ N(0, var).
// r_j = sum_{k >= j} C(k, j) c_k E[G^{k-j+1}].
inline Poly propagate_increment(const Poly& p, double var) {
  if (p.empty()) return {};
  const std::size_t d = p.size() - 1;
  const auto mu = gaussian_moments(d + 1, var);
  Poly r(p.size(), 0.0);
  for (std::size_t k = 0; k <= d; ++k)
    for (std::size_t j = 0; j <= k; ++j)
      r[j] += binomial(k, j) * p[k] * mu[k - j + 1];
  return r;
}

// Probabilists' Hermite polynomial He_k(x), used as a regression basis.
inline double hermite_he(std::size_t k, double x) {
  double h0 = 1.0;
  if (k == 0) return h0;
  double h1 = x;
  for (std::size_t j = 1; j < k; ++j) {
    const double h2 = x * h1 - static_cast<double>(j) * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

// Closed-form conditional expectations of the Gaussian functionals used by
// the exact estimator and its tests.
namespace exact_cond {

// E(W_T | W_t = x) = x.
inline double terminal_w(double x) { return x; }

// E(W_T^2 | W_t = x) = x^2 + (T - t).
inline double terminal_w2(double x, double t, double T) {
  return x * x + (T - t);
}

// E(e^{b (W_T - W_s)} | F_t) for s <= t: e^{b (w_t - w_s)} e^{b^2 (T - t)/2}.
inline double exp_increment(double b, double w_t, double w_s, double t,
                            double T) {
  require(t <= T, ErrorKind::InvalidArgument, "need t <= T");
  return std::exp(b * (w_t - w_s) + 0.5 * b * b * (T - t));
}

}  // namespace exact_cond

}  // namespace bsde
