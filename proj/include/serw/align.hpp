#pragma once

#include <Eigen/Dense>
#include <vector>

#include "serw/ot.hpp"

namespace serw {

/// Orthogonal d x d matrix (reflections permitted).
struct Rotation {
  Eigen::MatrixXd matrix;

  bool is_orthogonal(double tol = 1e-10) const;
  static Rotation identity(int d);
};

/// Least-squares orthogonal alignment: returns the orthogonal R
/// minimizing sum_i w_i ||source_i - R target_i||^2 (rows are points).
/// Solved through the SVD of the weighted cross-covariance. An empty
/// weight vector means uniform weights.
Rotation procrustes(const Eigen::MatrixXd& source,
                    const Eigen::MatrixXd& target,
                    Eigen::VectorXd row_weights = Eigen::VectorXd());

struct InvariantOtResult {
  Rotation rotation;
  Coupling coupling;
  /// Half the alignment objective at the returned iterates,
  /// (1/2) sum_ij pi_ij ||x_i - R y_j||^2.
  double cost = 0.0;
  std::vector<double> cost_history;  // per round, non-increasing
  int rounds = 0;
};

/// Joint minimization over a transport plan and an orthogonal map:
/// alternates (a) plan <- exact OT under cost ||x_i - R y_j||^2 and
/// (b) R <- weighted Procrustes on the coupling's soft correspondence,
/// starting from R = I, until the relative cost decrease drops below
/// tol or max_rounds is hit.
InvariantOtResult invariant_ot(const Eigen::MatrixXd& x_emb,
                               const Eigen::MatrixXd& y_emb,
                               const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& nu, int max_rounds = 50,
                               double tol = 1e-9);

}  // namespace serw
