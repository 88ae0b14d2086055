#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "bsde/errors.hpp"

namespace bsde {

// Time grid pi = {0 = t_0 < t_1 < ... < t_n = T}.
class Partition {
 public:
  explicit Partition(std::vector<double> times) : times_(std::move(times)) {
    require(times_.size() >= 2, ErrorKind::InvalidArgument,
            "partition needs at least two time points");
    require(times_.front() == 0.0, ErrorKind::InvalidArgument,
            "partition must start at 0");
    for (std::size_t i = 0; i + 1 < times_.size(); ++i)
      require(times_[i] < times_[i + 1], ErrorKind::InvalidArgument,
              "partition times must be strictly increasing");
  }

  std::size_t n() const { return times_.size() - 1; }
  double horizon() const { return times_.back(); }
  double time(std::size_t i) const { return times_[i]; }
  double dt(std::size_t i) const { return times_[i + 1] - times_[i]; }
  const std::vector<double>& times() const { return times_; }

 private:
  std::vector<double> times_;
};

inline Partition uniform_partition(double horizon, std::size_t n) {
  require(horizon > 0.0, ErrorKind::InvalidArgument, "horizon must be > 0");
  require(n >= 1, ErrorKind::InvalidArgument, "step count must be >= 1");
  std::vector<double> times(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    times[i] = static_cast<double>(i) * horizon / static_cast<double>(n);
  return Partition(std::move(times));
}

struct MeshStats {
  double mesh;       // |pi| = max_i dt_i
  double max_ratio;  // max_i dt_i / dt_{i+1}, 1 for a single step
};

inline MeshStats mesh_stats(const Partition& p) {
  double mesh = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) mesh = std::max(mesh, p.dt(i));
  double ratio = 1.0;
  for (std::size_t i = 0; i + 1 < p.n(); ++i)
    ratio = std::max(ratio, p.dt(i) / p.dt(i + 1));
  return {mesh, ratio};
}

}  // namespace bsde
