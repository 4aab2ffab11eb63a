#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "serw/mmspace.hpp"
#include "serw/ot.hpp"

namespace serw {

struct GwSolution {
  Coupling coupling;
  double gw_squared = 0.0;
  int restarts_used = 0;
  /// Objective trace of the winning restart, non-increasing.
  std::vector<double> objective_history;
};

struct GwConfig {
  int restarts = 5;
  std::uint64_t seed = 0;
  int max_iterations = 1000;
  double gap_tol = 1e-9;        // Frank-Wolfe gap
  double decrease_tol = 1e-10;  // relative objective decrease
  /// Cross-checking variant: entropic mirror iterations with a Sinkhorn
  /// inner solver instead of conditional gradient.
  bool entropic = false;
  double epsilon = 0.0;  // entropic variant only; <= 0 means auto
};

/// Gromov-Wasserstein objective at a fixed plan:
/// (1/2) sum_{iji'j'} (cx[i,i'] - cy[j,j'])^2 pi[i,j] pi[i',j'],
/// evaluated through the quadratic-expansion contraction (three matrix
/// products), never the quartic loop.
double gw_objective(const Eigen::MatrixXd& cx, const Eigen::MatrixXd& cy,
                    const Coupling& pi);

/// Multi-restart conditional-gradient descent on the (non-convex) GW
/// objective: exact-OT linear minimization oracle, exact line search on
/// the quadratic. Restart 0 starts from the product coupling, the others
/// from seeded random feasible plans. The result is a stationary point
/// and therefore an upper bound on the true squared GW distance.
GwSolution gw_solve(const MmSpace& a, const MmSpace& b, GwConfig config = {});
GwSolution gw_solve(const MmSpace& a, const MmSpace& b, int restarts,
                    std::uint64_t seed);

/// First lower bound: squared eccentricity transport,
/// (1/2) * exact OT cost over |s_X(x_i) - s_Y(y_j)|^2 where
/// s_X(x_i) = (sum_i' w_i' cx[i,i']^2)^(1/2). Never exceeds the true
/// squared GW distance.
double flb(const MmSpace& a, const MmSpace& b);

/// Random plan with the given marginals: iterative proportional fitting
/// of a positive seeded matrix. Used for solver restarts and tests.
Eigen::MatrixXd random_feasible_plan(const Eigen::VectorXd& mu,
                                     const Eigen::VectorXd& nu,
                                     std::uint64_t seed);

}  // namespace serw
