#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "serw/mmspace.hpp"

namespace serw {

/// Thrown when an iterative solver fails (pivot-cap exceeded, SVD
/// breakdown). Input validation failures throw std::invalid_argument.
struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Transport plan with its prescribed marginals. Row sums match
/// row_marginal and column sums match col_marginal within 1e-9; entries
/// are nonnegative (clamped at zero on output).
struct Coupling {
  Eigen::MatrixXd plan;
  Eigen::VectorXd row_marginal;
  Eigen::VectorXd col_marginal;

  bool is_feasible(double tol = 1e-9) const;
};

struct OtSolution {
  Coupling coupling;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Optimality certificate recovered from the final simplex basis:
/// potentials u, v with u_i + v_j <= c_ij (up to the stated violation)
/// and cost = <u, mu> + <v, nu> up to the stated gap.
struct ExactOtCertificate {
  Eigen::VectorXd row_potentials;
  Eigen::VectorXd col_potentials;
  double max_reduced_cost_violation = 0.0;
  double duality_gap = 0.0;
};

/// Exact solution of the transportation LP
///   min <cost, pi>  s.t.  pi 1 = mu, pi^T 1 = nu, pi >= 0
/// by the network simplex on the bipartite transportation graph.
/// Dantzig pricing with a Bland's-rule fallback after a pivot-count
/// threshold. The returned plan is a vertex (at most n+m-1 nonzeros).
OtSolution exact_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& mu,
                    const Eigen::VectorXd& nu,
                    ExactOtCertificate* certificate = nullptr);

struct SinkhornParams {
  double epsilon = 0.0;  // <= 0 means 1e-2 * max cost entry
  int max_iter = 10000;
  double tol = 1e-9;     // max L1 marginal residual
};

/// Entropy-regularized transport via log-domain Sinkhorn iterations.
/// The reported cost is the transport part only (no entropy term).
/// Non-convergence is reported through converged=false, never thrown.
OtSolution sinkhorn(const Eigen::MatrixXd& cost, const Eigen::VectorXd& mu,
                    const Eigen::VectorXd& nu, SinkhornParams params = {});

enum class OtSolver { Exact, Sinkhorn };

/// Transport between two Euclidean spaces of equal ambient dimension,
/// with squared-distance ground cost. The solution cost is the squared
/// 2-Wasserstein distance.
OtSolution w2_solve(const MmSpace& a, const MmSpace& b,
                    OtSolver solver = OtSolver::Exact,
                    SinkhornParams sinkhorn_params = {});

double w2_squared(const MmSpace& a, const MmSpace& b,
                  OtSolver solver = OtSolver::Exact,
                  SinkhornParams sinkhorn_params = {});

}  // namespace serw
