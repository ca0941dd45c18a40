#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "vinebud/errors.hpp"

namespace vinebud {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct KMeansConfig {
  int k = 25;
  int max_iterations = 100;
  // Stop once every center moves less than this (Euclidean) in one update.
  double epsilon = 1e-3;
  std::uint64_t seed = 0;

  void validate() const {
    if (k < 1) throw ArgumentError("k-means needs k >= 1");
    if (max_iterations < 1) throw ArgumentError("k-means needs max_iterations >= 1");
    if (!(epsilon > 0)) throw ArgumentError("k-means needs epsilon > 0");
  }
};

template <typename Scalar>
struct KMeansResult {
  RowMatrix<Scalar> centers;
  std::vector<int> assignment;
  // Sum of squared distances to the nearest center for the final centers.
  Scalar objective = 0;
  // objective_history[t]: objective of the assignment made at iteration t.
  std::vector<Scalar> objective_history;
  int iterations = 0;
  bool converged = false;
};

// Index of the nearest row of `centers`; ties go to the lowest index.
template <typename DerivedC, typename DerivedV>
int nearest_row(const Eigen::MatrixBase<DerivedC>& centers, const Eigen::MatrixBase<DerivedV>& v,
                typename DerivedC::Scalar* distance2 = nullptr) {
  using Scalar = typename DerivedC::Scalar;
  int best = -1;
  Scalar best_d = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const Scalar d = (centers.row(c) - v.derived().transpose()).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (distance2) *distance2 = best_d;
  return best;
}

// k-means++ seeding: first center uniform, then proportional to the squared
// distance to the nearest chosen center. When every remaining point already
// coincides with a center the draw falls back to uniform.
template <typename Derived, typename Rng>
RowMatrix<typename Derived::Scalar> kmeans_init_pp(const Eigen::MatrixBase<Derived>& points, int k, Rng& rng) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.rows();
  if (k < 1) throw ArgumentError("k-means++ needs k >= 1");
  if (n < k) throw ArgumentError("k-means++ needs at least k points");

  RowMatrix<Scalar> centers(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = points.row(pick(rng));

  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = static_cast<double>((points.row(i) - centers.row(0)).squaredNorm());

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    Eigen::Index chosen = n - 1;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        target -= d2[i];
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
      while (d2[chosen] <= 0.0) --chosen;  // rounding at the tail
    } else {
      chosen = pick(rng);
    }
    centers.row(c) = points.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], static_cast<double>((points.row(i) - centers.row(c)).squaredNorm()));
  }
  return centers;
}

// Lloyd iterations from k-means++ seeds. An empty cluster is re-seeded with the
// point farthest from its current center.
template <typename Derived, typename Rng>
KMeansResult<typename Derived::Scalar> kmeans(const Eigen::MatrixBase<Derived>& points, const KMeansConfig& cfg,
                                              Rng& rng) {
  using Scalar = typename Derived::Scalar;
  cfg.validate();
  const Eigen::Index n = points.rows(), dim = points.cols();
  if (n < cfg.k) throw ArgumentError("k-means needs at least k points");

  KMeansResult<Scalar> res;
  res.centers = kmeans_init_pp(points, cfg.k, rng);
  res.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<Scalar> dist(static_cast<std::size_t>(n));

  auto assign = [&]() {
    Scalar obj = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      res.assignment[i] = nearest_row(res.centers, points.row(i).transpose(), &dist[i]);
      obj += dist[i];
    }
    return obj;
  };

  for (int it = 0; it < cfg.max_iterations; ++it) {
    res.objective_history.push_back(assign());
    res.iterations = it + 1;

    RowMatrix<Scalar> sums = RowMatrix<Scalar>::Zero(cfg.k, dim);
    std::vector<Eigen::Index> counts(cfg.k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(res.assignment[i]) += points.row(i);
      ++counts[res.assignment[i]];
    }
    RowMatrix<Scalar> next = res.centers;
    for (int c = 0; c < cfg.k; ++c)
      if (counts[c] > 0) next.row(c) = sums.row(c) / static_cast<Scalar>(counts[c]);
    for (int c = 0; c < cfg.k; ++c) {
      if (counts[c] > 0) continue;
      Eigen::Index far = 0;
      Scalar far_d = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar d = (points.row(i) - next.row(res.assignment[i])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      next.row(c) = points.row(far);
      res.assignment[far] = c;
    }

    const Scalar shift = (next - res.centers).rowwise().norm().maxCoeff();
    res.centers = std::move(next);
    if (shift < static_cast<Scalar>(cfg.epsilon)) {
      res.converged = true;
      break;
    }
  }
  res.objective = assign();
  return res;
}

}  // namespace vinebud
