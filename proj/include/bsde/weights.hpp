#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bsde/ensemble.hpp"
#include "bsde/errors.hpp"
#include "bsde/parallel.hpp"
#include "bsde/problem.hpp"

namespace bsde {

// Discrete Malliavin weight rho^pi.
//  Integral:  dW integrals taken on the fine grid, dr integrals in closed
//             form for constant coefficients and by trapezoid otherwise.
//  LeftPoint: coefficients frozen at the left coarse node (experimental; the
//             convergence theorem is proved for the integral form).
enum class WeightVariant { Integral, LeftPoint };

namespace detail {

// Deterministic dr contribution of one coarse interval k for phi(t).
template <typename Phi>
double interval_time_integral(const CoarseView& view, std::size_t k,
                              Phi&& phi) {
  const auto& fine = view.ensemble().fine();
  double s = 0.0;
  for (std::size_t m = view.node_fine_index(k); m < view.node_fine_index(k + 1);
       ++m)
    s += 0.5 * (phi(fine.time(m)) + phi(fine.time(m + 1))) * fine.dt(m);
  return s;
}

}  // namespace detail

// Exponent increments e_k of the weight over each coarse interval k, per
// path: rho^pi_{t_i,t_j} = exp(sum_{k=i}^{j-1} e_k). Stored cumulatively so
// any (i, j) weight is one exponent difference. Layout: [node * n_paths + p]
// with node in [0, n].
inline std::vector<double> weight_exponent_cumulative(const GeneratorSpec& gen,
                                                      const CoarseView& view,
                                                      WeightVariant variant) {
  require(gen.is_deterministic, ErrorKind::UnsupportedProblem,
          "discrete weights need a deterministic generator");
  require(gen.linear.has_value(), ErrorKind::GeneratorNotLinear,
          "discrete weights need linear coefficients (G2)");
  const auto& lc = *gen.linear;
  const auto& ens = view.ensemble();
  const auto& fine = ens.fine();
  const std::size_t n = view.n();
  const std::size_t N = ens.n_paths();

  // Deterministic dr parts per interval.
  std::vector<double> drift(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (variant == WeightVariant::LeftPoint) {
      const double t = view.coarse().time(k);
      const double h = lc.h(t);
      drift[k] = (lc.g(t) - 0.5 * h * h) * view.coarse().dt(k);
    } else if (lc.g_const && lc.h_const) {
      const double phi = *lc.g_const - 0.5 * (*lc.h_const) * (*lc.h_const);
      drift[k] = phi * view.coarse().dt(k);
    } else {
      drift[k] = detail::interval_time_integral(view, k, [&](double s) {
        const double hs = lc.h(s);
        return lc.g(s) - 0.5 * hs * hs;
      });
    }
  }

  std::vector<double> cum((n + 1) * N);
  parallel_blocks(N, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      double acc = 0.0;
      cum[p] = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        double stoch;
        if (variant == WeightVariant::LeftPoint) {
          stoch = lc.h(view.coarse().time(k)) * view.dw(p, k);
        } else if (lc.h_const) {
          // Constant h factors out of the fine dW sum, which makes the two
          // variants agree exactly on a single interval.
          stoch = *lc.h_const * view.dw(p, k);
        } else {
          stoch = 0.0;
          for (std::size_t m = view.node_fine_index(k);
               m < view.node_fine_index(k + 1); ++m)
            stoch += lc.h(fine.time(m)) * ens.increment(p, m);
        }
        acc += stoch + drift[k];
        cum[(k + 1) * N + p] = acc;
      }
    }
  });
  return cum;
}

// Per-path rho^pi_{t_i,t_j} for coarse indices i <= j.
inline std::vector<double> discrete_weights(const GeneratorSpec& gen,
                                            const CoarseView& view,
                                            std::size_t i, std::size_t j,
                                            WeightVariant variant) {
  require(i <= j && j <= view.n(), ErrorKind::InvalidArgument,
          "discrete_weights: need i <= j <= n");
  const std::size_t N = view.ensemble().n_paths();
  const auto cum = weight_exponent_cumulative(gen, view, variant);
  std::vector<double> out(N);
  for (std::size_t p = 0; p < N; ++p)
    out[p] = std::exp(cum[j * N + p] - cum[i * N + p]);
  return out;
}

// Deterministic moments of the weight exponent over [t_{i+1}, T], each in
// the same discretization the weight itself uses. With
// H = (discretized) int h dW and D = (discretized) int (g - h^2/2) dr, the
// conditional expectation of rho^pi * P(W_T) given W_{t_i} = x is
//   exp(D + var_h/2) * E[ P(x + cov_h + G) ],  G ~ N(0, T - t_i),
// since H is Gaussian and independent of F_{t_i} with Cov(W_T - W_{t_i}, H)
// = cov_h. This is what the exact estimator evaluates.
struct WeightMoments {
  double drift = 0.0;  // D
  double var_h = 0.0;  // Var(H)
  double cov_h = 0.0;  // Cov(W_T - W_{t_i}, H)
};

inline WeightMoments weight_moments(const GeneratorSpec& gen,
                                    const CoarseView& view,
                                    std::size_t i_plus_1,
                                    WeightVariant variant) {
  require(gen.linear.has_value(), ErrorKind::GeneratorNotLinear,
          "weight moments need linear coefficients (G2)");
  const auto& lc = *gen.linear;
  const auto& fine = view.ensemble().fine();
  WeightMoments out;
  const std::size_t n = view.n();
  if (variant == WeightVariant::LeftPoint) {
    for (std::size_t k = i_plus_1; k < n; ++k) {
      const double t = view.coarse().time(k);
      const double dt = view.coarse().dt(k);
      const double h = lc.h(t);
      out.drift += (lc.g(t) - 0.5 * h * h) * dt;
      out.var_h += h * h * dt;
      out.cov_h += h * dt;
    }
    return out;
  }
  if (lc.g_const && lc.h_const) {
    const double tau = view.coarse().time(n) - view.coarse().time(i_plus_1);
    const double h = *lc.h_const;
    out.drift = (*lc.g_const - 0.5 * h * h) * tau;
    out.var_h = h * h * tau;
    out.cov_h = h * tau;
    return out;
  }
  for (std::size_t k = i_plus_1; k < n; ++k) {
    out.drift += detail::interval_time_integral(view, k, [&](double s) {
      const double hs = lc.h(s);
      return lc.g(s) - 0.5 * hs * hs;
    });
    for (std::size_t m = view.node_fine_index(k);
         m < view.node_fine_index(k + 1); ++m) {
      const double h = lc.h(fine.time(m));
      out.var_h += h * h * fine.dt(m);
      out.cov_h += h * fine.dt(m);
    }
  }
  return out;
}

}  // namespace bsde
