#include "serw/align.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>
#include <string>

namespace serw {

namespace {

// Orthogonal maximizer of tr(R M), M = U S V^T  =>  R = V U^T.
Rotation max_trace_rotation(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success)
    throw solver_error("SVD failed in orthogonal alignment");
  Rotation r;
  r.matrix = svd.matrixV() * svd.matrixU().transpose();
  return r;
}

double alignment_objective(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                           const Eigen::MatrixXd& rot,
                           const Eigen::MatrixXd& plan) {
  const Eigen::MatrixXd ry = y * rot.transpose();  // rows R y_j
  double j = 0.0;
  for (int a = 0; a < x.rows(); ++a)
    for (int b = 0; b < y.rows(); ++b)
      if (plan(a, b) != 0.0)
        j += plan(a, b) * (x.row(a) - ry.row(b)).squaredNorm();
  return j;
}

// Starting rotations for the alternation. The block descent only finds a
// local optimum, so besides the identity we align the principal axes of
// the two clouds (uncentered second moments, sign ambiguity enumerated
// over the leading axes). For a rotated copy one of these candidates is
// the planted map itself, and the candidate set rotates with the inputs,
// which keeps the solve equivariant under global rotations.
std::vector<Eigen::MatrixXd> starting_rotations(const Eigen::MatrixXd& x,
                                                const Eigen::MatrixXd& y,
                                                const Eigen::VectorXd& mu,
                                                const Eigen::VectorXd& nu) {
  const int d = static_cast<int>(x.cols());
  std::vector<Eigen::MatrixXd> starts{Eigen::MatrixXd::Identity(d, d)};

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(
      x.transpose() * mu.asDiagonal() * x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ey(
      y.transpose() * nu.asDiagonal() * y);
  if (ex.info() != Eigen::Success || ey.info() != Eigen::Success)
    return starts;
  const Eigen::MatrixXd& v = ex.eigenvectors();
  const Eigen::MatrixXd& u = ey.eigenvectors();

  const long work = static_cast<long>(x.rows()) * y.rows();
  const int sign_axes = std::min(d, work <= 20000 ? 5 : 2);
  Eigen::VectorXd signs = Eigen::VectorXd::Ones(d);
  for (int mask = 0; mask < (1 << sign_axes); ++mask) {
    // Eigenvalues come in ascending order; flip the trailing (leading
    // variance) axes.
    for (int a = 0; a < sign_axes; ++a)
      signs(d - 1 - a) = (mask >> a) & 1 ? -1.0 : 1.0;
    starts.push_back(v * signs.asDiagonal() * u.transpose());
  }
  return starts;
}

struct AlternationRun {
  Rotation rotation;
  Coupling coupling;
  double objective = 0.0;
  std::vector<double> history;  // halved objective per round
  int rounds = 0;
};

AlternationRun alternate(const Eigen::MatrixXd& x_emb,
                         const Eigen::MatrixXd& y_emb,
                         const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                         Eigen::MatrixXd rotation, int max_rounds,
                         double tol) {
  const int n = static_cast<int>(x_emb.rows());
  const int m = static_cast<int>(y_emb.rows());
  AlternationRun run;
  run.coupling.row_marginal = mu;
  run.coupling.col_marginal = nu;
  run.coupling.plan = mu * nu.transpose();
  run.rotation.matrix = std::move(rotation);

  double prev = alignment_objective(x_emb, y_emb, run.rotation.matrix,
                                    run.coupling.plan);
  Eigen::MatrixXd cost(n, m);
  for (int round = 0; round < max_rounds; ++round) {
    const Eigen::MatrixXd ry = y_emb * run.rotation.matrix.transpose();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        cost(i, j) = (x_emb.row(i) - ry.row(j)).squaredNorm();
    run.coupling = exact_ot(cost, mu, nu).coupling;

    // Soft-correspondence Procrustes update: maximize
    // sum_ij pi_ij x_i^T R y_j = tr(R y^T pi^T x).
    const Eigen::MatrixXd cross =
        y_emb.transpose() * run.coupling.plan.transpose() * x_emb;
    run.rotation = max_trace_rotation(cross);

    const double objective = alignment_objective(
        x_emb, y_emb, run.rotation.matrix, run.coupling.plan);
    run.history.push_back(0.5 * objective);
    run.rounds = round + 1;
    if (objective > prev + 1e-9 * std::max(1.0, prev))
      throw solver_error("invariant_ot objective increased");
    const double decrease = prev - objective;
    prev = objective;
    if (decrease <= tol * std::max(1.0, objective)) break;
  }
  run.objective = prev;
  return run;
}

}  // namespace

bool Rotation::is_orthogonal(double tol) const {
  if (matrix.rows() != matrix.cols()) return false;
  const Eigen::MatrixXd gram = matrix.transpose() * matrix;
  const double err =
      (gram - Eigen::MatrixXd::Identity(matrix.rows(), matrix.cols())).norm();
  return err <= tol && std::abs(std::abs(matrix.determinant()) - 1.0) <= 1e-8;
}

Rotation Rotation::identity(int d) {
  return Rotation{Eigen::MatrixXd::Identity(d, d)};
}

Rotation procrustes(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target,
                    Eigen::VectorXd row_weights) {
  if (source.rows() != target.rows() || source.cols() != target.cols())
    throw std::invalid_argument("procrustes: shape mismatch " +
                                std::to_string(source.rows()) + "x" +
                                std::to_string(source.cols()) + " vs " +
                                std::to_string(target.rows()) + "x" +
                                std::to_string(target.cols()));
  const int k = static_cast<int>(source.rows());
  if (row_weights.size() == 0)
    row_weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  if (row_weights.size() != k)
    throw std::invalid_argument("procrustes: weight length mismatch");
  // Minimizing sum w ||s - R t||^2 maximizes tr(R M) with
  // M = target^T diag(w) source.
  const Eigen::MatrixXd m =
      target.transpose() * row_weights.asDiagonal() * source;
  return max_trace_rotation(m);
}

InvariantOtResult invariant_ot(const Eigen::MatrixXd& x_emb,
                               const Eigen::MatrixXd& y_emb,
                               const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& nu, int max_rounds,
                               double tol) {
  if (x_emb.cols() != y_emb.cols())
    throw std::invalid_argument("invariant_ot: embedding dimension mismatch");
  if (x_emb.rows() != mu.size() || y_emb.rows() != nu.size())
    throw std::invalid_argument("invariant_ot: marginal length mismatch");

  const std::vector<Eigen::MatrixXd> starts =
      starting_rotations(x_emb, y_emb, mu, nu);
  AlternationRun best;
  bool have = false;
  for (const Eigen::MatrixXd& r0 : starts) {
    AlternationRun run = alternate(x_emb, y_emb, mu, nu, r0, max_rounds, tol);
    if (!have || run.objective < best.objective) {
      best = std::move(run);
      have = true;
    }
  }

  InvariantOtResult result;
  result.rotation = std::move(best.rotation);
  result.coupling = std::move(best.coupling);
  result.cost = 0.5 * best.objective;
  result.cost_history = std::move(best.history);
  result.rounds = best.rounds;
  return result;
}

}  // namespace serw
