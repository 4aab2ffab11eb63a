#include "serw/mmspace.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace serw {

namespace {

Eigen::VectorXd resolve_weights(Eigen::VectorXd weights, int n) {
  if (weights.size() == 0)
    return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  if (weights.size() != n)
    throw std::invalid_argument("weights length " +
                                std::to_string(weights.size()) +
                                " does not match point count " +
                                std::to_string(n));
  for (int i = 0; i < n; ++i) {
    if (!(weights(i) > 0.0))
      throw std::invalid_argument("weight " + std::to_string(i) +
                                  " is not strictly positive");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("weights must sum to 1 within 1e-12, got " +
                                std::to_string(weights.sum()));
  return weights;
}

void validate_distance_matrix(const Eigen::MatrixXd& d) {
  const int n = static_cast<int>(d.rows());
  if (d.cols() != n) throw std::invalid_argument("distance matrix not square");
  for (int i = 0; i < n; ++i) {
    if (d(i, i) != 0.0)
      throw std::invalid_argument("distance matrix diagonal entry " +
                                  std::to_string(i) + " is nonzero");
    for (int j = i + 1; j < n; ++j) {
      if (!(d(i, j) >= 0.0))
        throw std::invalid_argument("negative or NaN distance at (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      if (std::abs(d(i, j) - d(j, i)) > 1e-12)
        throw std::invalid_argument("distance matrix asymmetric at (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
    }
  }
  // Triangle inequality on every triple for small n, on a fixed-seed
  // sample otherwise. Slack 1e-9.
  auto check = [&](int i, int j, int k) {
    if (d(i, j) > d(i, k) + d(k, j) + 1e-9)
      throw std::invalid_argument(
          "triangle inequality violated on triple (" + std::to_string(i) +
          "," + std::to_string(j) + "," + std::to_string(k) + ")");
  };
  if (n <= 16) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) check(i, j, k);
  } else {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int t = 0; t < 2000; ++t) check(pick(rng), pick(rng), pick(rng));
  }
}

}  // namespace

Eigen::MatrixXd pairwise_distance_matrix(const Eigen::MatrixXd& points) {
  const int n = static_cast<int>(points.rows());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (points.row(i) - points.row(j)).norm();
    }
  }
  return d;
}

MmSpace MmSpace::euclidean(Eigen::MatrixXd points, Eigen::VectorXd weights) {
  if (points.rows() == 0) throw std::invalid_argument("empty point set");
  if (!points.allFinite())
    throw std::invalid_argument("points contain non-finite values");
  MmSpace s;
  s.metric_ = Metric::Euclidean;
  s.weights_ = resolve_weights(std::move(weights),
                               static_cast<int>(points.rows()));
  s.dist_ = pairwise_distance_matrix(points);
  s.points_ = std::move(points);
  return s;
}

MmSpace MmSpace::precomputed(Eigen::MatrixXd dist, Eigen::VectorXd weights) {
  if (dist.rows() == 0) throw std::invalid_argument("empty distance matrix");
  validate_distance_matrix(dist);
  MmSpace s;
  s.metric_ = Metric::Precomputed;
  s.weights_ = resolve_weights(std::move(weights),
                               static_cast<int>(dist.rows()));
  s.dist_ = std::move(dist);
  return s;
}

const Eigen::MatrixXd& MmSpace::points() const {
  if (metric_ != Metric::Euclidean)
    throw std::invalid_argument(
        "coordinates are not available for a precomputed-metric space");
  return points_;
}

Moments moments(const MmSpace& space) {
  if (space.metric() != Metric::Euclidean)
    throw std::invalid_argument(
        "moments need Euclidean coordinates; precomputed metric unsupported");
  Moments m;
  const Eigen::MatrixXd& x = space.points();
  const Eigen::VectorXd& w = space.weights();
  for (int i = 0; i < space.size(); ++i) {
    const double norm = x.row(i).norm();
    m.m1 += w(i) * norm;
    m.m2 += w(i) * norm * norm;
  }
  return m;
}

MmSpace l2_normalize(const MmSpace& space) {
  if (space.metric() != Metric::Euclidean)
    throw std::invalid_argument(
        "l2_normalize needs Euclidean coordinates");
  Eigen::MatrixXd x = space.points();
  for (int i = 0; i < x.rows(); ++i) {
    const double norm = x.row(i).norm();
    if (norm == 0.0)
      throw std::invalid_argument("cannot l2-normalize zero point " +
                                  std::to_string(i));
    x.row(i) /= norm;
  }
  return MmSpace::euclidean(std::move(x), space.weights());
}

double lower_bound_constant(const Moments& mu, const Moments& nu) {
  return 2.0 * (mu.m1 + nu.m1);
}

double upper_bound_constant(const Moments& mu, const Moments& nu) {
  return (std::sqrt(mu.m2) + std::sqrt(mu.m1)) *
             (std::sqrt(nu.m2) + std::sqrt(nu.m1)) +
         mu.m2 + nu.m2;
}

}  // namespace serw
