#include "serw/gromov.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "serw/threading.hpp"

namespace serw {

namespace {

// Unhalved quadratic objective J(pi) and helpers. With row sums r and
// column sums c,
//   J(pi) = r^T (cx o cx) r + c^T (cy o cy) c - 2 <pi, cx pi cy>,
// which matches the quartic double integral for any nonnegative pi.
struct GwProblem {
  Eigen::MatrixXd cx, cy, cx2, cy2;
  Eigen::VectorXd mu, nu;

  double objective(const Eigen::MatrixXd& plan) const {
    const Eigen::VectorXd r = plan.rowwise().sum();
    const Eigen::VectorXd c = plan.colwise().sum().transpose();
    const double quad = (plan.array() * (cx * plan * cy).array()).sum();
    return r.dot(cx2 * r) + c.dot(cy2 * c) - 2.0 * quad;
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& plan) const {
    const Eigen::VectorXd r = plan.rowwise().sum();
    const Eigen::VectorXd c = plan.colwise().sum().transpose();
    Eigen::MatrixXd g = (-4.0 * (cx * plan * cy));
    g.colwise() += 2.0 * (cx2 * r);
    g.rowwise() += (2.0 * (cy2 * c)).transpose();
    return g;
  }
};

GwProblem make_problem(const MmSpace& a, const MmSpace& b) {
  GwProblem p;
  p.cx = a.distance_matrix();
  p.cy = b.distance_matrix();
  p.cx2 = p.cx.array().square();
  p.cy2 = p.cy.array().square();
  p.mu = a.weights();
  p.nu = b.weights();
  return p;
}

struct DescentOutcome {
  Eigen::MatrixXd plan;
  double objective = 0.0;
  std::vector<double> history;
};

// Conditional gradient from a feasible starting plan. The objective is
// quadratic, so the line search is exact: J(pi + t d) = J + bt + at^2.
DescentOutcome frank_wolfe(const GwProblem& p, Eigen::MatrixXd plan,
                           const GwConfig& config) {
  DescentOutcome out;
  double objective = p.objective(plan);
  out.history.push_back(0.5 * objective);
  for (int it = 0; it < config.max_iterations; ++it) {
    const Eigen::MatrixXd grad = p.gradient(plan);
    const Eigen::MatrixXd vertex = exact_ot(grad, p.mu, p.nu).coupling.plan;
    const Eigen::MatrixXd dir = vertex - plan;
    const double b = (grad.array() * dir.array()).sum();
    const double gap = -b;
    if (gap < config.gap_tol) break;
    // Quadratic coefficient along the segment; the direction has zero
    // row/column sums, so only the cross term survives.
    const double a = -2.0 * (dir.array() * (p.cx * dir * p.cy).array()).sum();
    double t = 1.0;
    if (a > 0.0) t = std::clamp(-b / (2.0 * a), 0.0, 1.0);
    plan += t * dir;
    const double next = objective + t * b + t * t * a;
    out.history.push_back(0.5 * next);
    const double decrease = objective - next;
    objective = next;
    if (decrease <= config.decrease_tol * std::max(1.0, std::abs(objective)))
      break;
  }
  out.plan = std::move(plan);
  out.objective = p.objective(out.plan);  // refresh against drift
  return out;
}

// Assignment-level polish for equal-size uniform marginals, where the
// plan vertices are scaled permutations and the objective reduces to a
// quadratic assignment value. Frank-Wolfe stalls at first-order
// stationary vertices; a steepest-descent pass over swap, 3-cycle and
// double-transposition moves escapes the shallow ones.
double permutation_objective(const GwProblem& p, const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int i2 = 0; i2 < n; ++i2) {
      const double diff = p.cx(i, i2) - p.cy(perm[i], perm[i2]);
      total += diff * diff;
    }
  return total / (static_cast<double>(n) * n);
}

bool uniform_square(const GwProblem& p) {
  if (p.mu.size() != p.nu.size()) return false;
  const double w = 1.0 / static_cast<double>(p.mu.size());
  return (p.mu.array() - w).abs().maxCoeff() <= 1e-12 &&
         (p.nu.array() - w).abs().maxCoeff() <= 1e-12;
}

Eigen::MatrixXd assignment_polish(const GwProblem& p, Eigen::MatrixXd plan,
                                  double& objective) {
  const int n = static_cast<int>(plan.rows());
  if (!uniform_square(p) || n < 2 || n > 128) return plan;

  std::vector<int> perm(n, -1);
  std::vector<char> used(n, 0);
  for (int i = 0; i < n; ++i) {
    int arg = 0;
    plan.row(i).maxCoeff(&arg);
    if (used[arg]) return plan;  // not permutation-supported
    used[arg] = 1;
    perm[i] = arg;
  }
  double cur = permutation_objective(p, perm);
  if (cur > objective + 1e-12) return plan;  // rounding made it worse

  const bool deep_moves = n <= 16;
  bool improved = true;
  while (improved) {
    improved = false;
    for (int i = 0; i < n && !improved; ++i)
      for (int j = i + 1; j < n && !improved; ++j) {
        std::swap(perm[i], perm[j]);
        const double v = permutation_objective(p, perm);
        if (v < cur - 1e-13)
          cur = v, improved = true;
        else
          std::swap(perm[i], perm[j]);
      }
    if (!deep_moves) continue;
    for (int i = 0; i < n && !improved; ++i)
      for (int j = 0; j < n && !improved; ++j) {
        if (j == i) continue;
        for (int k = 0; k < n && !improved; ++k) {
          if (k == i || k == j) continue;
          const int pi = perm[i], pj = perm[j], pk = perm[k];
          perm[i] = pj;
          perm[j] = pk;
          perm[k] = pi;
          const double v = permutation_objective(p, perm);
          if (v < cur - 1e-13) {
            cur = v;
            improved = true;
          } else {
            perm[i] = pi;
            perm[j] = pj;
            perm[k] = pk;
          }
        }
      }
    for (int i = 0; i < n && !improved; ++i)
      for (int j = i + 1; j < n && !improved; ++j)
        for (int k = i + 1; k < n && !improved; ++k) {
          if (k == j) continue;
          for (int l = k + 1; l < n && !improved; ++l) {
            if (l == j) continue;
            std::swap(perm[i], perm[j]);
            std::swap(perm[k], perm[l]);
            const double v = permutation_objective(p, perm);
            if (v < cur - 1e-13)
              cur = v, improved = true;
            else {
              std::swap(perm[k], perm[l]);
              std::swap(perm[i], perm[j]);
            }
          }
        }
  }
  if (cur >= objective) return plan;
  objective = cur;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) out(i, perm[i]) = 1.0 / n;
  return out;
}

// One restart: conditional gradient, then polish/re-descend cycles until
// neither phase improves.
DescentOutcome descend(const GwProblem& p, Eigen::MatrixXd start,
                       const GwConfig& config) {
  DescentOutcome out = frank_wolfe(p, std::move(start), config);
  for (int cycle = 0; cycle < 3; ++cycle) {
    double objective = out.objective;
    Eigen::MatrixXd polished = assignment_polish(p, out.plan, objective);
    if (objective >= out.objective - 1e-13) break;
    out.history.push_back(0.5 * objective);
    DescentOutcome next = frank_wolfe(p, polished, config);
    if (next.objective >= objective) {
      out.plan = std::move(polished);
      out.objective = objective;
      break;
    }
    out.plan = std::move(next.plan);
    out.objective = next.objective;
    out.history.insert(out.history.end(), next.history.begin() + 1,
                       next.history.end());
  }
  return out;
}

// Entropic cross-check: mirror iterations pi <- sinkhorn(grad, eps).
DescentOutcome entropic_descent(const GwProblem& p, Eigen::MatrixXd plan,
                                const GwConfig& config) {
  DescentOutcome out;
  double objective = p.objective(plan);
  out.history.push_back(0.5 * objective);
  double best = objective;
  Eigen::MatrixXd best_plan = plan;
  for (int it = 0; it < config.max_iterations; ++it) {
    const Eigen::MatrixXd grad = p.gradient(plan);
    SinkhornParams sp;
    sp.epsilon = config.epsilon > 0.0
                     ? config.epsilon
                     : 1e-2 * std::max(1e-300, grad.cwiseAbs().maxCoeff());
    plan = sinkhorn(grad, p.mu, p.nu, sp).coupling.plan;
    const double next = p.objective(plan);
    if (next < best) {
      best = next;
      best_plan = plan;
      out.history.push_back(0.5 * next);
    }
    if (std::abs(next - objective) <=
        config.decrease_tol * std::max(1.0, std::abs(next)))
      break;
    objective = next;
  }
  out.plan = std::move(best_plan);
  out.objective = best;
  return out;
}

}  // namespace

double gw_objective(const Eigen::MatrixXd& cx, const Eigen::MatrixXd& cy,
                    const Coupling& pi) {
  GwProblem p;
  p.cx = cx;
  p.cy = cy;
  p.cx2 = cx.array().square();
  p.cy2 = cy.array().square();
  return 0.5 * p.objective(pi.plan);
}

Eigen::MatrixXd random_feasible_plan(const Eigen::VectorXd& mu,
                                     const Eigen::VectorXd& nu,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd k(mu.size(), nu.size());
  for (int i = 0; i < k.rows(); ++i)
    for (int j = 0; j < k.cols(); ++j) k(i, j) = std::exp(gauss(rng));
  // Iterative proportional fitting onto the transportation polytope.
  for (int it = 0; it < 2000; ++it) {
    const Eigen::VectorXd r = k.rowwise().sum();
    k.array().colwise() *= (mu.array() / r.array());
    const Eigen::VectorXd c = k.colwise().sum().transpose();
    k.array().rowwise() *= (nu.array() / c.array()).transpose();
    const double res = (k.rowwise().sum() - mu).cwiseAbs().maxCoeff();
    if (res < 1e-13) break;
  }
  return k;
}

namespace {

Eigen::VectorXd scaled_eccentricities(const Eigen::MatrixXd& c2,
                                      const Eigen::VectorXd& w) {
  Eigen::VectorXd s = (c2 * w).array().sqrt();
  const double lo = s.minCoeff();
  const double hi = s.maxCoeff();
  if (hi > lo) s = (s.array() - lo) / (hi - lo);
  return s;
}

// Restart plans built from the eccentricity profiles rather than raw
// indices, so relabeling or rigidly moving an input reproduces the same
// descent trajectories and the solved value stays isometry-invariant.
Eigen::MatrixXd seeded_restart_plan(const GwProblem& p, std::uint64_t seed) {
  const Eigen::VectorXd sx = scaled_eccentricities(p.cx2, p.mu);
  const Eigen::VectorXd sy = scaled_eccentricities(p.cy2, p.nu);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.5, 1.5);
  std::uniform_real_distribution<double> freq(0.5, 6.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(p.mu.size(), p.nu.size());
  for (int k = 0; k < 3; ++k) {
    const double a = amp(rng), fx = freq(rng), fy = freq(rng);
    const double px = phase(rng), py = phase(rng);
    for (int i = 0; i < cost.rows(); ++i)
      for (int j = 0; j < cost.cols(); ++j)
        cost(i, j) +=
            a * std::cos(fx * sx(i) + px) * std::cos(fy * sy(j) + py);
  }
  return exact_ot(cost, p.mu, p.nu).coupling.plan;
}

// First-lower-bound coupling: transport between eccentricity profiles.
Eigen::MatrixXd eccentricity_plan(const GwProblem& p) {
  const Eigen::VectorXd sx = (p.cx2 * p.mu).array().sqrt();
  const Eigen::VectorXd sy = (p.cy2 * p.nu).array().sqrt();
  Eigen::MatrixXd cost(sx.size(), sy.size());
  for (int i = 0; i < sx.size(); ++i)
    for (int j = 0; j < sy.size(); ++j) {
      const double diff = sx(i) - sy(j);
      cost(i, j) = diff * diff;
    }
  return exact_ot(cost, p.mu, p.nu).coupling.plan;
}

}  // namespace

GwSolution gw_solve(const MmSpace& a, const MmSpace& b, GwConfig config) {
  if (config.restarts < 1)
    throw std::invalid_argument("gw_solve needs at least one restart");
  const GwProblem problem = make_problem(a, b);

  std::vector<DescentOutcome> outcomes(config.restarts);
  parallel_for(config.restarts, [&](int r) {
    Eigen::MatrixXd start;
    if (r == 0)
      start = problem.mu * problem.nu.transpose();
    else if (r == 1)
      start = eccentricity_plan(problem);
    else
      start = seeded_restart_plan(problem,
                                  config.seed * 0x9e3779b97f4a7c15ULL + r);
    outcomes[r] = config.entropic
                      ? entropic_descent(problem, std::move(start), config)
                      : descend(problem, std::move(start), config);
  });

  int best = 0;
  for (int r = 1; r < config.restarts; ++r)
    if (outcomes[r].objective < outcomes[best].objective) best = r;

  GwSolution sol;
  sol.coupling.plan = outcomes[best].plan.cwiseMax(0.0);
  sol.coupling.row_marginal = problem.mu;
  sol.coupling.col_marginal = problem.nu;
  sol.gw_squared = 0.5 * outcomes[best].objective;
  sol.restarts_used = config.restarts;
  sol.objective_history = std::move(outcomes[best].history);
  return sol;
}

GwSolution gw_solve(const MmSpace& a, const MmSpace& b, int restarts,
                    std::uint64_t seed) {
  GwConfig config;
  config.restarts = restarts;
  config.seed = seed;
  return gw_solve(a, b, config);
}

double flb(const MmSpace& a, const MmSpace& b) {
  const Eigen::VectorXd sx =
      (a.distance_matrix().array().square().matrix() * a.weights())
          .array()
          .sqrt();
  const Eigen::VectorXd sy =
      (b.distance_matrix().array().square().matrix() * b.weights())
          .array()
          .sqrt();
  Eigen::MatrixXd cost(sx.size(), sy.size());
  for (int i = 0; i < sx.size(); ++i)
    for (int j = 0; j < sy.size(); ++j) {
      const double diff = sx(i) - sy(j);
      cost(i, j) = diff * diff;
    }
  return 0.5 * exact_ot(cost, a.weights(), b.weights()).cost;
}

}  // namespace serw
