#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <new>
#include <span>
#include <utility>
#include <vector>

#include "bsde/errors.hpp"
#include "bsde/parallel.hpp"
#include "bsde/partition.hpp"
#include "bsde/rng.hpp"

namespace bsde {

// One path's Brownian values on the fine grid, W[0] = 0.
struct PathView {
  const Partition* fine = nullptr;
  const double* w = nullptr;  // fine->n() + 1 values

  double time(std::size_t k) const { return fine->time(k); }
  double w_at(std::size_t k) const { return w[k]; }
  double terminal() const { return w[fine->n()]; }
  std::size_t n() const { return fine->n(); }
};

// Brownian increments on a fine partition for n_paths paths. Increment
// (p, k) is a pure function of (seed, p, k); cumulative W values are derived
// on demand so a regenerated ensemble is bit-identical.
class PathEnsemble {
 public:
  PathEnsemble(Partition fine, std::size_t n_paths, std::uint64_t seed)
      : fine_(std::move(fine)), n_paths_(n_paths), seed_(seed) {
    require(n_paths_ >= 1, ErrorKind::InvalidArgument, "n_paths must be >= 1");
    allocate();
    const std::size_t n = fine_.n();
    std::vector<double> sqrt_dt(n);
    for (std::size_t k = 0; k < n; ++k) sqrt_dt[k] = std::sqrt(fine_.dt(k));
    parallel_blocks(n_paths_, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t p = lo; p < hi; ++p) {
        double* row = increments_.data() + p * n;
        for (std::size_t k = 0; k < n; ++k)
          row[k] = sqrt_dt[k] * normal_draw(seed_, static_cast<std::uint32_t>(p),
                                            static_cast<std::uint32_t>(k), 0u,
                                            kStreamEnsemble);
      }
    });
  }

  // Test/oracle constructor from explicit increment rows.
  PathEnsemble(Partition fine, std::vector<double> increments,
               std::size_t n_paths)
      : fine_(std::move(fine)),
        n_paths_(n_paths),
        seed_(0),
        increments_(std::move(increments)) {
    require(increments_.size() == n_paths_ * fine_.n(),
            ErrorKind::InvalidArgument, "increment matrix shape mismatch");
  }

  const Partition& fine() const { return fine_; }
  std::size_t n_paths() const { return n_paths_; }
  std::uint64_t seed() const { return seed_; }

  double increment(std::size_t p, std::size_t k) const {
    return increments_[p * fine_.n() + k];
  }
  std::span<const double> increments_row(std::size_t p) const {
    return {increments_.data() + p * fine_.n(), fine_.n()};
  }

  // Fills out[0..n] with the path's W values (prefix sums, W_0 = 0).
  void fill_path_w(std::size_t p, std::span<double> out) const {
    const std::size_t n = fine_.n();
    const double* row = increments_.data() + p * n;
    out[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) out[k + 1] = out[k] + row[k];
  }

  double terminal_w(std::size_t p) const {
    const std::size_t n = fine_.n();
    const double* row = increments_.data() + p * n;
    double w = 0.0;
    for (std::size_t k = 0; k < n; ++k) w += row[k];
    return w;
  }

 private:
  void allocate() {
    try {
      increments_.resize(n_paths_ * fine_.n());
    } catch (const std::bad_alloc&) {
      throw Error(ErrorKind::Resource, "cannot allocate increment matrix");
    }
  }

  Partition fine_;
  std::size_t n_paths_;
  std::uint64_t seed_;
  std::vector<double> increments_;
};

inline PathEnsemble sample_ensemble(const Partition& fine, std::size_t n_paths,
                                    std::uint64_t seed) {
  return PathEnsemble(fine, n_paths, seed);
}

// Coarse-grid view of an ensemble. Coarse nodes are index subsets of the
// fine grid; coarse increments are sums of the fine increments inside each
// interval, taken in index order.
class CoarseView {
 public:
  CoarseView(const PathEnsemble& ens, std::vector<std::size_t> node_fine)
      : ens_(&ens), node_fine_(std::move(node_fine)) {
    require(node_fine_.size() >= 2 && node_fine_.front() == 0 &&
                node_fine_.back() == ens.fine().n(),
            ErrorKind::InvalidArgument, "coarse view must span [0, T]");
    for (std::size_t i = 0; i + 1 < node_fine_.size(); ++i)
      require(node_fine_[i] < node_fine_[i + 1], ErrorKind::InvalidArgument,
              "coarse node indices must be strictly increasing");
    std::vector<double> times(node_fine_.size());
    for (std::size_t i = 0; i < node_fine_.size(); ++i)
      times[i] = ens.fine().time(node_fine_[i]);
    coarse_.emplace(std::move(times));
  }

  const PathEnsemble& ensemble() const { return *ens_; }
  const Partition& coarse() const { return *coarse_; }
  std::size_t n() const { return coarse_->n(); }
  std::size_t node_fine_index(std::size_t i) const { return node_fine_[i]; }

  // Coarse increment over [t_i, t_{i+1}] for one path: exact sum of the
  // fine increments inside the interval.
  double dw(std::size_t p, std::size_t i) const {
    double s = 0.0;
    for (std::size_t k = node_fine_[i]; k < node_fine_[i + 1]; ++k)
      s += ens_->increment(p, k);
    return s;
  }

  double w_node(std::size_t i, std::span<const double> fine_w) const {
    return fine_w[node_fine_[i]];
  }

 private:
  const PathEnsemble* ens_;
  std::vector<std::size_t> node_fine_;
  std::optional<Partition> coarse_;
};

// Coarse view from an explicit partition; every coarse time must appear in
// the fine grid exactly.
inline CoarseView coarsen(const PathEnsemble& ens, const Partition& coarse) {
  const auto& fine_times = ens.fine().times();
  std::vector<std::size_t> node_fine;
  node_fine.reserve(coarse.times().size());
  for (double t : coarse.times()) {
    const auto it = std::lower_bound(fine_times.begin(), fine_times.end(), t);
    require(it != fine_times.end() && *it == t, ErrorKind::InvalidArgument,
            "coarse partition is not an index subset of the fine grid");
    node_fine.push_back(static_cast<std::size_t>(it - fine_times.begin()));
  }
  return CoarseView(ens, std::move(node_fine));
}

// Coarse view with n_coarse intervals where n_coarse divides the fine count.
inline CoarseView coarsen_uniform(const PathEnsemble& ens,
                                  std::size_t n_coarse) {
  const std::size_t n_fine = ens.fine().n();
  require(n_coarse >= 1 && n_fine % n_coarse == 0, ErrorKind::InvalidArgument,
          "coarse step count must divide the fine step count");
  const std::size_t stride = n_fine / n_coarse;
  std::vector<std::size_t> node_fine(n_coarse + 1);
  for (std::size_t i = 0; i <= n_coarse; ++i) node_fine[i] = i * stride;
  return CoarseView(ens, std::move(node_fine));
}

}  // namespace bsde
