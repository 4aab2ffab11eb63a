#pragma once

#include <Eigen/Dense>

namespace serw {

enum class Metric { Euclidean, Precomputed };

/// First and second moments of a measure, taken as distances to the
/// ambient origin: m1 = sum_i w_i ||x_i||, m2 = sum_i w_i ||x_i||^2.
struct Moments {
  double m1 = 0.0;
  double m2 = 0.0;
};

/// Finite metric measure space: n points with strictly positive weights
/// summing to one, and a pairwise distance matrix that is either derived
/// from Euclidean coordinates or supplied directly.
///
/// Instances are immutable after construction and safe to share across
/// threads for reading. The distance matrix is computed eagerly.
class MmSpace {
 public:
  /// Euclidean space from an n x D coordinate matrix. An empty weight
  /// vector means uniform 1/n.
  static MmSpace euclidean(Eigen::MatrixXd points,
                           Eigen::VectorXd weights = Eigen::VectorXd());

  /// Space with a user-supplied n x n distance matrix. The matrix must
  /// have a zero diagonal, be symmetric and satisfy the triangle
  /// inequality on sampled triples.
  static MmSpace precomputed(Eigen::MatrixXd dist,
                             Eigen::VectorXd weights = Eigen::VectorXd());

  int size() const { return static_cast<int>(weights_.size()); }
  int ambient_dim() const { return static_cast<int>(points_.cols()); }
  Metric metric() const { return metric_; }

  const Eigen::MatrixXd& points() const;
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::MatrixXd& distance_matrix() const { return dist_; }

 private:
  MmSpace() = default;

  Eigen::MatrixXd points_;   // n x D, empty for precomputed spaces
  Eigen::VectorXd weights_;  // n, positive, sums to 1
  Eigen::MatrixXd dist_;     // n x n cached distance matrix
  Metric metric_ = Metric::Euclidean;
};

/// Plain pairwise Euclidean distance matrix of a row-point matrix.
Eigen::MatrixXd pairwise_distance_matrix(const Eigen::MatrixXd& points);

/// Moments of the measure w.r.t. the ambient origin. Requires Euclidean
/// metric (origin distances are unknown for precomputed spaces).
Moments moments(const MmSpace& space);

/// Returns a copy of the space with every point scaled to unit 2-norm.
/// Weights are unchanged; the result has m1 = m2 = 1.
MmSpace l2_normalize(const MmSpace& space);

/// Additive constant of the lower cost-relation bound:
/// 2 (M1(mu) + M1(nu)).
double lower_bound_constant(const Moments& mu, const Moments& nu);

/// Additive constant of the upper cost-relation bound:
/// (sqrt(M2(mu)) + sqrt(M1(mu))) (sqrt(M2(nu)) + sqrt(M1(nu)))
///   + M2(mu) + M2(nu).
double upper_bound_constant(const Moments& mu, const Moments& nu);

}  // namespace serw
