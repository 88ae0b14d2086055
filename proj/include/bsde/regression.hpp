#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bsde/errors.hpp"
#include "bsde/gaussian.hpp"

namespace bsde {

enum class BasisFamily { Monomial, Hermite };

struct RegressionSpec {
  int degree = 4;
  double ridge = 1e-10;
  BasisFamily basis = BasisFamily::Monomial;
};

struct FitInfo {
  bool rank_deficient = false;
  std::size_t basis_size = 0;
};

namespace detail {

// Multi-indices with total degree <= degree over `dim` coordinates, graded
// lexicographic order. Coordinates with zero variance are frozen out.
inline std::vector<std::vector<int>> basis_exponents(
    std::size_t dim, int degree, const std::vector<bool>& active) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(dim, 0);
  for (int total = 0; total <= degree; ++total) {
    // enumerate compositions of `total` into dim parts
    std::function<void(std::size_t, int)> rec = [&](std::size_t d, int left) {
      if (d + 1 == dim) {
        cur[d] = left;
        bool ok = true;
        for (std::size_t j = 0; j < dim; ++j)
          if (cur[j] > 0 && !active[j]) ok = false;
        if (ok) out.push_back(cur);
        return;
      }
      for (int k = left; k >= 0; --k) {
        cur[d] = k;
        rec(d + 1, left - k);
      }
    };
    rec(0, total);
  }
  return out;
}

}  // namespace detail

// Least-squares regression of values on basis functions of the states,
// evaluated back at every path's state. States are standardized to zero
// mean / unit variance per coordinate before the basis is formed; the
// normal-equation route is avoided in favor of a QR factorization, with the
// ridge term appended as extra rows.
inline std::vector<double> fit_predict(const double* states, std::size_t n,
                                       std::size_t dim,
                                       std::span<const double> values,
                                       const RegressionSpec& spec,
                                       FitInfo* info = nullptr) {
  require(values.size() == n, ErrorKind::InvalidArgument,
          "fit_predict: states/values length mismatch");
  require(spec.degree >= 0 && spec.ridge >= 0.0, ErrorKind::InvalidArgument,
          "fit_predict: need degree >= 0 and ridge >= 0");

  // Standardization per coordinate.
  std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
  std::vector<bool> active(dim, false);
  for (std::size_t d = 0; d < dim; ++d) {
    double m = 0.0;
    for (std::size_t p = 0; p < n; ++p) m += states[p * dim + d];
    m /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double u = states[p * dim + d] - m;
      v += u * u;
    }
    v /= static_cast<double>(n);
    mean[d] = m;
    sd[d] = std::sqrt(v);
    active[d] = sd[d] > 0.0;
  }

  const auto exps = detail::basis_exponents(dim, spec.degree, active);
  const std::size_t K = exps.size();
  require(n >= K, ErrorKind::InvalidArgument,
          "fit_predict: fewer samples than basis functions");

  Eigen::MatrixXd phi(n, K);
  std::vector<double> u(dim);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t d = 0; d < dim; ++d)
      u[d] = active[d] ? (states[p * dim + d] - mean[d]) / sd[d] : 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double term = 1.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const int e = exps[k][d];
        if (e == 0) continue;
        if (spec.basis == BasisFamily::Hermite)
          term *= hermite_he(static_cast<std::size_t>(e), u[d]);
        else
          for (int j = 0; j < e; ++j) term *= u[d];
      }
      phi(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = term;
    }
  }

  Eigen::VectorXd rhs(n);
  for (std::size_t p = 0; p < n; ++p) rhs(static_cast<Eigen::Index>(p)) = values[p];

  Eigen::VectorXd coef;
  bool deficient = false;
  if (spec.ridge > 0.0) {
    Eigen::MatrixXd aug(n + K, K);
    aug.topRows(n) = phi;
    aug.bottomRows(K) =
        std::sqrt(spec.ridge) * Eigen::MatrixXd::Identity(K, K);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + K);
    b.head(n) = rhs;
    coef = aug.householderQr().solve(b);
    if (info) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> probe(phi);
      deficient = probe.rank() < static_cast<Eigen::Index>(K);
    }
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
    deficient = qr.rank() < static_cast<Eigen::Index>(K);
    coef = qr.solve(rhs);
  }
  if (info) {
    info->rank_deficient = deficient;
    info->basis_size = K;
  }

  Eigen::VectorXd pred = phi * coef;
  return std::vector<double>(pred.data(), pred.data() + n);
}

inline std::vector<double> fit_predict(std::span<const double> states_1d,
                                       std::span<const double> values,
                                       const RegressionSpec& spec,
                                       FitInfo* info = nullptr) {
  return fit_predict(states_1d.data(), states_1d.size(), 1, values, spec,
                     info);
}

}  // namespace bsde
