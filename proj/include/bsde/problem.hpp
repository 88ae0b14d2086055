#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bsde/ensemble.hpp"
#include "bsde/errors.hpp"
#include "bsde/gaussian.hpp"
#include "bsde/parallel.hpp"

namespace bsde {

// Linear generator f(t, y, z) = g(t) y + h(t) z + f1(t). Constant
// coefficients are tracked so time integrals can be taken in closed form.
struct LinearCoeffs {
  std::function<double(double)> g, h, f1;
  std::optional<double> g_const, h_const, f1_const;

  static LinearCoeffs constants(double a, double b, double c) {
    LinearCoeffs lc;
    lc.g = [a](double) { return a; };
    lc.h = [b](double) { return b; };
    lc.f1 = [c](double) { return c; };
    lc.g_const = a;
    lc.h_const = b;
    lc.f1_const = c;
    return lc;
  }
};

struct GeneratorSpec {
  std::function<double(double, double, double)> f;      // (t, y, z)
  std::function<double(double, double, double)> df_dy;  // partial_y f
  std::function<double(double, double, double)> df_dz;  // partial_z f
  double lipschitz_L = 0.0;
  double time_holder_L2 = 0.0;
  bool is_deterministic = true;
  bool depends_on_z = true;
  bool is_zero = false;
  std::optional<LinearCoeffs> linear;
};

inline GeneratorSpec zero_generator() {
  GeneratorSpec g;
  auto zero = [](double, double, double) { return 0.0; };
  g.f = zero;
  g.df_dy = zero;
  g.df_dz = zero;
  g.lipschitz_L = 0.0;
  g.depends_on_z = false;
  g.is_zero = true;
  g.linear = LinearCoeffs::constants(0.0, 0.0, 0.0);
  return g;
}

inline GeneratorSpec linear_generator(double a, double b, double c) {
  GeneratorSpec g;
  g.f = [a, b, c](double, double y, double z) { return a * y + b * z + c; };
  g.df_dy = [a](double, double, double) { return a; };
  g.df_dz = [b](double, double, double) { return b; };
  g.lipschitz_L = std::max(std::abs(a), std::abs(b));
  g.depends_on_z = b != 0.0;
  g.is_zero = a == 0.0 && b == 0.0 && c == 0.0;
  g.linear = LinearCoeffs::constants(a, b, c);
  return g;
}

// Terminal functional xi with optional Malliavin derivative D_theta xi and
// the state vector used by regression estimators.
struct TerminalSpec {
  std::function<double(const PathView&)> xi;
  std::function<double(const PathView&, double)> d_xi;  // null when unknown
  std::size_t state_dim = 1;
  // state(view, fine_index, out): writes state_dim values.
  std::function<void(const PathView&, std::size_t, double*)> state;
  // One forward sweep filling states at several fine indices at once; the
  // default calls `state` per node, problems with path-dependent state
  // override it with a single pass.
  std::function<void(const PathView&, std::span<const std::size_t>, double*)>
      state_sweep;
};

inline TerminalSpec make_terminal(std::function<double(const PathView&)> xi) {
  TerminalSpec t;
  t.xi = std::move(xi);
  t.state_dim = 1;
  t.state = [](const PathView& v, std::size_t k, double* out) {
    out[0] = v.w_at(k);
  };
  return t;
}

// Exact reference solution evaluated at a fine grid index of one path.
struct Reference {
  std::function<double(const PathView&, std::size_t)> Y;
  std::function<double(const PathView&, std::size_t)> Z;
};

// Closed-form machinery the exact estimator relies on: every scheme value
// surface is a polynomial of degree <= value_degree in W_t, and D_theta xi
// is a fixed polynomial in W_T.
struct ExactOps {
  int value_degree = 1;
  Poly d_xi_poly;
};

struct BsdeProblem {
  std::string name;
  double horizon = 1.0;
  GeneratorSpec generator;
  TerminalSpec terminal;
  std::optional<Reference> reference;
  std::optional<ExactOps> exact;

  void fill_states(const PathView& view, std::span<const std::size_t> nodes,
                   double* out) const {
    if (terminal.state_sweep) {
      terminal.state_sweep(view, nodes, out);
      return;
    }
    for (std::size_t i = 0; i < nodes.size(); ++i)
      terminal.state(view, nodes[i], out + i * terminal.state_dim);
  }
};

using ParamMap = std::map<std::string, double>;

namespace detail {

inline double get_param(const ParamMap& params, const std::string& key,
                        std::optional<double> fallback = std::nullopt) {
  const auto it = params.find(key);
  if (it != params.end()) return it->second;
  require(fallback.has_value(), ErrorKind::InvalidArgument,
          "missing required problem parameter '" + key + "'");
  return *fallback;
}

}  // namespace detail

// f = 0, xi = W_T. Y_t = W_t, Z_t = 1.
inline BsdeProblem make_martingale() {
  BsdeProblem prob;
  prob.name = "martingale";
  prob.generator = zero_generator();
  prob.terminal = make_terminal([](const PathView& v) { return v.terminal(); });
  prob.terminal.d_xi = [](const PathView&, double) { return 1.0; };
  prob.reference = Reference{
      [](const PathView& v, std::size_t k) { return v.w_at(k); },
      [](const PathView&, std::size_t) { return 1.0; }};
  prob.exact = ExactOps{1, Poly{1.0}};
  return prob;
}

// f = 0, xi = W_T^2. Y_t = W_t^2 + (T - t), Z_t = 2 W_t.
inline BsdeProblem make_quadratic(double horizon) {
  BsdeProblem prob;
  prob.name = "quadratic";
  prob.horizon = horizon;
  prob.generator = zero_generator();
  prob.terminal = make_terminal([](const PathView& v) {
    const double w = v.terminal();
    return w * w;
  });
  prob.terminal.d_xi = [](const PathView& v, double) {
    return 2.0 * v.terminal();
  };
  prob.reference = Reference{
      [horizon](const PathView& v, std::size_t k) {
        const double w = v.w_at(k);
        return w * w + (horizon - v.time(k));
      },
      [](const PathView& v, std::size_t k) { return 2.0 * v.w_at(k); }};
  prob.exact = ExactOps{2, Poly{0.0, 2.0}};
  return prob;
}

// f = 0, xi = (W_T^2 - T)/2, the n = 2 iterated integral with g = 1/2
// symmetrized. Y_t = (W_t^2 - t)/2, Z_t = W_t, D_theta xi = W_T.
inline BsdeProblem make_hermite2(double horizon) {
  BsdeProblem prob;
  prob.name = "hermite2";
  prob.horizon = horizon;
  prob.generator = zero_generator();
  prob.terminal = make_terminal([horizon](const PathView& v) {
    const double w = v.terminal();
    return 0.5 * (w * w - horizon);
  });
  prob.terminal.d_xi = [](const PathView& v, double) { return v.terminal(); };
  prob.reference = Reference{
      [](const PathView& v, std::size_t k) {
        const double w = v.w_at(k);
        return 0.5 * (w * w - v.time(k));
      },
      [](const PathView& v, std::size_t k) { return v.w_at(k); }};
  prob.exact = ExactOps{2, Poly{0.0, 1.0}};
  return prob;
}

// f = a y + b z + c, xi = W_T.
// Y_t = e^{a(T-t)} (W_t + b (T-t)) + c (e^{a(T-t)} - 1)/a, Z_t = e^{a(T-t)},
// with the a -> 0 limit c (T-t) for the constant part.
inline BsdeProblem make_linear_const(double horizon, double a, double b,
                                     double c) {
  BsdeProblem prob;
  prob.name = "linear_const";
  prob.horizon = horizon;
  prob.generator = linear_generator(a, b, c);
  prob.terminal = make_terminal([](const PathView& v) { return v.terminal(); });
  prob.terminal.d_xi = [](const PathView&, double) { return 1.0; };
  auto const_part = [a, c](double tau) {
    if (std::abs(a) < 1e-12) return c * tau;
    return c * std::expm1(a * tau) / a;
  };
  prob.reference = Reference{
      [horizon, a, b, const_part](const PathView& v, std::size_t k) {
        const double tau = horizon - v.time(k);
        const double e = std::exp(a * tau);
        return e * (v.w_at(k) + b * tau) + const_part(tau);
      },
      [horizon, a](const PathView& v, std::size_t k) {
        return std::exp(a * (horizon - v.time(k)));
      }};
  prob.exact = ExactOps{1, Poly{1.0}};
  return prob;
}

// Lipschitz nonlinear generator with xi = tanh(W_T); no closed reference.
// f = L (sin y + z cos z / (1 + z^2)): both partials are bounded by 1 in
// absolute value, so the Lipschitz constant in |dy| + |dz| form is L.
inline BsdeProblem make_smooth_terminal(double horizon, double L) {
  BsdeProblem prob;
  prob.name = "smooth_terminal";
  prob.horizon = horizon;
  GeneratorSpec g;
  g.f = [L](double, double y, double z) {
    return L * (std::sin(y) + z * std::cos(z) / (1.0 + z * z));
  };
  g.df_dy = [L](double, double y, double) { return L * std::cos(y); };
  g.df_dz = [L](double, double, double z) {
    const double d = 1.0 + z * z;
    return L * ((std::cos(z) - z * std::sin(z)) / d -
                2.0 * z * z * std::cos(z) / (d * d));
  };
  g.lipschitz_L = L;
  g.depends_on_z = true;
  prob.generator = std::move(g);
  prob.terminal = make_terminal(
      [](const PathView& v) { return std::tanh(v.terminal()); });
  prob.terminal.d_xi = [](const PathView& v, double) {
    const double t = std::tanh(v.terminal());
    return 1.0 - t * t;
  };
  return prob;
}

// Forward X by Euler on the fine grid with affine drift/volatility,
// xi = phi(int_0^T X_r^2 dr) by the trapezoid rule. State for regression is
// (X_t, running integral). No closed reference and no Malliavin derivative.
struct FbsdeCoeffs {
  double x0 = 0.0;
  double b0 = 0.0, b1 = 0.0;  // drift b(t, x) = b0 + b1 x
  double s0 = 1.0, s1 = 0.0;  // vol sigma(t, x) = s0 + s1 x
  bool phi_tanh = false;      // phi = tanh, otherwise identity
  double fa = 0.0, fb = 0.0, fc = 0.0;  // generator f = fa y + fb z + fc
};

inline BsdeProblem make_fbsde_energy(double horizon, const FbsdeCoeffs& cf) {
  BsdeProblem prob;
  prob.name = "fbsde_energy";
  prob.horizon = horizon;
  prob.generator = (cf.fa == 0.0 && cf.fb == 0.0 && cf.fc == 0.0)
                       ? zero_generator()
                       : linear_generator(cf.fa, cf.fb, cf.fc);

  // One Euler sweep producing (X_k, I_k) at the requested fine indices.
  auto sweep = [cf](const PathView& v, std::span<const std::size_t> nodes,
                    double* out) {
    const std::size_t n = v.n();
    double x = cf.x0;
    double integral = 0.0;
    std::size_t next = 0;
    for (std::size_t k = 0; k <= n; ++k) {
      while (next < nodes.size() && nodes[next] == k) {
        out[2 * next] = x;
        out[2 * next + 1] = integral;
        ++next;
      }
      if (k == n) break;
      const double dt = v.time(k + 1) - v.time(k);
      const double dw = v.w_at(k + 1) - v.w_at(k);
      const double x_next =
          x + (cf.b0 + cf.b1 * x) * dt + (cf.s0 + cf.s1 * x) * dw;
      integral += 0.5 * (x * x + x_next * x_next) * dt;
      x = x_next;
    }
  };

  TerminalSpec t;
  t.xi = [cf, sweep](const PathView& v) {
    const std::size_t node = v.n();
    double out[2];
    sweep(v, std::span<const std::size_t>(&node, 1), out);
    return cf.phi_tanh ? std::tanh(out[1]) : out[1];
  };
  t.state_dim = 2;
  t.state = [sweep](const PathView& v, std::size_t k, double* out) {
    sweep(v, std::span<const std::size_t>(&k, 1), out);
  };
  t.state_sweep = sweep;
  prob.terminal = std::move(t);
  return prob;
}

// Named problem factory used by the CLI.
inline BsdeProblem builtin(const std::string& name, const ParamMap& params) {
  const double T = detail::get_param(params, "horizon", 1.0);
  if (name == "martingale") {
    auto p = make_martingale();
    p.horizon = T;
    return p;
  }
  if (name == "quadratic") return make_quadratic(T);
  if (name == "hermite2") return make_hermite2(T);
  if (name == "linear_const")
    return make_linear_const(T, detail::get_param(params, "a"),
                             detail::get_param(params, "b"),
                             detail::get_param(params, "c"));
  if (name == "smooth_terminal")
    return make_smooth_terminal(T, detail::get_param(params, "L", 0.5));
  if (name == "fbsde_energy") {
    FbsdeCoeffs cf;
    cf.x0 = detail::get_param(params, "x0");
    cf.b0 = detail::get_param(params, "b0", 0.0);
    cf.b1 = detail::get_param(params, "b1", 0.0);
    cf.s0 = detail::get_param(params, "s0", 1.0);
    cf.s1 = detail::get_param(params, "s1", 0.0);
    cf.phi_tanh = detail::get_param(params, "phi_tanh", 0.0) != 0.0;
    cf.fa = detail::get_param(params, "fa", 0.0);
    cf.fb = detail::get_param(params, "fb", 0.0);
    cf.fc = detail::get_param(params, "fc", 0.0);
    return make_fbsde_energy(T, cf);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown problem '" + name + "'");
}

// Per-path terminal values xi.
inline std::vector<double> eval_terminal(const BsdeProblem& prob,
                                         const PathEnsemble& ens) {
  const std::size_t n = ens.fine().n();
  std::vector<double> out(ens.n_paths());
  parallel_blocks(ens.n_paths(),
                  [&](std::size_t, std::size_t lo, std::size_t hi) {
                    std::vector<double> w(n + 1);
                    for (std::size_t p = lo; p < hi; ++p) {
                      ens.fill_path_w(p, w);
                      PathView view{&ens.fine(), w.data()};
                      out[p] = prob.terminal.xi(view);
                    }
                  });
  return out;
}

// Per-path Malliavin derivatives D_theta xi.
inline std::vector<double> malliavin_terminal(const BsdeProblem& prob,
                                              const PathEnsemble& ens,
                                              double theta) {
  require(static_cast<bool>(prob.terminal.d_xi), ErrorKind::UnsupportedProblem,
          "problem '" + prob.name + "' has no Malliavin derivative evaluator");
  const std::size_t n = ens.fine().n();
  std::vector<double> out(ens.n_paths());
  parallel_blocks(ens.n_paths(),
                  [&](std::size_t, std::size_t lo, std::size_t hi) {
                    std::vector<double> w(n + 1);
                    for (std::size_t p = lo; p < hi; ++p) {
                      ens.fill_path_w(p, w);
                      PathView view{&ens.fine(), w.data()};
                      out[p] = prob.terminal.d_xi(view, theta);
                    }
                  });
  return out;
}

// Per-path stochastic exponential rho_{t,r} for a linear generator:
// exp{ int_t^r h dW + int_t^r (g - h^2/2) ds } with the dW sum taken on the
// fine grid (left endpoints) and the ds integral in closed form for constant
// coefficients, trapezoid otherwise.
inline std::vector<double> linear_rho(const GeneratorSpec& gen,
                                      const PathEnsemble& ens,
                                      std::size_t t_index,
                                      std::size_t r_index) {
  require(gen.linear.has_value(), ErrorKind::GeneratorNotLinear,
          "linear_rho needs a generator with linear coefficients");
  require(t_index <= r_index && r_index <= ens.fine().n(),
          ErrorKind::InvalidArgument, "need t_index <= r_index <= n");
  const auto& lc = *gen.linear;
  const auto& fine = ens.fine();

  // Deterministic ds part.
  double drift = 0.0;
  if (lc.g_const && lc.h_const) {
    const double phi = *lc.g_const - 0.5 * (*lc.h_const) * (*lc.h_const);
    drift = phi * (fine.time(r_index) - fine.time(t_index));
  } else {
    for (std::size_t m = t_index; m < r_index; ++m) {
      auto phi = [&](double s) {
        const double hs = lc.h(s);
        return lc.g(s) - 0.5 * hs * hs;
      };
      drift += 0.5 * (phi(fine.time(m)) + phi(fine.time(m + 1))) * fine.dt(m);
    }
  }

  std::vector<double> out(ens.n_paths());
  parallel_blocks(
      ens.n_paths(), [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
          double stoch = 0.0;
          if (lc.h_const) {
            double dw = 0.0;
            for (std::size_t m = t_index; m < r_index; ++m)
              dw += ens.increment(p, m);
            stoch = *lc.h_const * dw;
          } else {
            for (std::size_t m = t_index; m < r_index; ++m)
              stoch += lc.h(fine.time(m)) * ens.increment(p, m);
          }
          out[p] = std::exp(stoch + drift);
        }
      });
  return out;
}

}  // namespace bsde
