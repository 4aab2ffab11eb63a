#include "serw/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace serw {

namespace {

void validate_marginals(const Eigen::MatrixXd& cost, const Eigen::VectorXd& mu,
                        const Eigen::VectorXd& nu) {
  if (cost.rows() != mu.size() || cost.cols() != nu.size())
    throw std::invalid_argument("cost matrix shape does not match marginals");
  if (!cost.allFinite())
    throw std::invalid_argument("cost matrix has non-finite entries");
  if (mu.minCoeff() < 0.0 || nu.minCoeff() < 0.0)
    throw std::invalid_argument("marginals must be nonnegative");
  if (std::abs(mu.sum() - 1.0) > 1e-9 || std::abs(nu.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("marginal mismatch: masses must sum to 1");
}

// Spanning-tree basis for the bipartite transportation graph.
// Nodes 0..n-1 are rows, n..n+m-1 are columns.
struct Basis {
  struct Arc {
    int row, col;
    double flow;
  };
  int n, m;
  std::vector<Arc> arcs;                      // exactly n+m-1 arcs
  std::vector<std::vector<int>> adjacency;    // node -> arc ids
  std::vector<int> parent, parent_arc, order;  // BFS tree from node 0
  Eigen::VectorXd u, v;                        // dual potentials

  void rebuild_adjacency() {
    adjacency.assign(n + m, {});
    for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
      adjacency[arcs[a].row].push_back(a);
      adjacency[n + arcs[a].col].push_back(a);
    }
  }

  // Rebuilds parent pointers and dual potentials by BFS from node 0.
  void refresh(const Eigen::MatrixXd& cost) {
    rebuild_adjacency();
    const int total = n + m;
    parent.assign(total, -1);
    parent_arc.assign(total, -1);
    order.clear();
    order.reserve(total);
    std::vector<char> seen(total, 0);
    std::vector<int> queue{0};
    seen[0] = 1;
    for (size_t q = 0; q < queue.size(); ++q) {
      int node = queue[q];
      order.push_back(node);
      for (int a : adjacency[node]) {
        const int other = node < n ? n + arcs[a].col : arcs[a].row;
        if (seen[other]) continue;
        seen[other] = 1;
        parent[other] = node;
        parent_arc[other] = a;
        queue.push_back(other);
      }
    }
    if (static_cast<int>(queue.size()) != total)
      throw solver_error("transportation basis is not a spanning tree");
    u.resize(n);
    v.resize(m);
    u(0) = 0.0;
    for (int node : order) {
      if (node == 0) continue;
      const Arc& arc = arcs[parent_arc[node]];
      if (node < n)
        u(node) = cost(arc.row, arc.col) - v(arc.col);
      else
        v(node - n) = cost(arc.row, arc.col) - u(arc.row);
    }
  }
};

// Northwest-corner starting basis: exactly n+m-1 arcs, degenerate zero
// flows included.
Basis northwest_corner(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu) {
  Basis basis;
  basis.n = static_cast<int>(mu.size());
  basis.m = static_cast<int>(nu.size());
  Eigen::VectorXd a = mu, b = nu;
  int i = 0, j = 0;
  const int want = basis.n + basis.m - 1;
  while (static_cast<int>(basis.arcs.size()) < want) {
    const double t = std::max(0.0, std::min(a(i), b(j)));
    basis.arcs.push_back({i, j, t});
    a(i) -= t;
    b(j) -= t;
    if (i == basis.n - 1 && j == basis.m - 1) break;
    if (j == basis.m - 1)
      ++i;
    else if (i == basis.n - 1)
      ++j;
    else if (a(i) <= b(j))
      ++i;
    else
      ++j;
  }
  if (static_cast<int>(basis.arcs.size()) != want)
    throw solver_error("northwest corner rule produced a deficient basis");
  return basis;
}

}  // namespace

bool Coupling::is_feasible(double tol) const {
  if (plan.rows() != row_marginal.size() || plan.cols() != col_marginal.size())
    return false;
  if (plan.minCoeff() < -1e-15) return false;
  const Eigen::VectorXd r = plan.rowwise().sum();
  const Eigen::VectorXd c = plan.colwise().sum();
  return (r - row_marginal).cwiseAbs().maxCoeff() <= tol &&
         (c - col_marginal).cwiseAbs().maxCoeff() <= tol;
}

OtSolution exact_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& mu,
                    const Eigen::VectorXd& nu,
                    ExactOtCertificate* certificate) {
  validate_marginals(cost, mu, nu);
  const int n = static_cast<int>(mu.size());
  const int m = static_cast<int>(nu.size());

  // Balance exactly; the input masses already agree within 1e-9.
  Eigen::VectorXd nu_bal = nu * (mu.sum() / nu.sum());

  Basis basis = northwest_corner(mu, nu_bal);
  basis.refresh(cost);

  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double price_tol = 1e-11 * scale;
  const int bland_after = 20 * (n + m) + 200;
  const int pivot_cap = 400 * (n + m) + 2000;

  int pivots = 0;
  std::vector<char> on_cycle(n + m, 0);
  for (;; ++pivots) {
    if (pivots > pivot_cap)
      throw solver_error("transportation simplex exceeded pivot cap after " +
                         std::to_string(pivots) + " iterations");
    // Pricing: most negative reduced cost (Dantzig), or first negative
    // in index order once the Bland threshold is reached.
    const bool bland = pivots >= bland_after;
    int ei = -1, ej = -1;
    double best = -price_tol;
    for (int i = 0; i < n && (ei < 0 || !bland); ++i) {
      for (int j = 0; j < m; ++j) {
        const double rc = cost(i, j) - basis.u(i) - basis.v(j);
        if (rc < best) {
          best = rc;
          ei = i;
          ej = j;
          if (bland) break;
        }
      }
    }
    if (ei < 0) break;  // optimal

    // The entering arc closes a unique cycle through the tree: walk both
    // endpoints to the root and splice at the first common node.
    std::fill(on_cycle.begin(), on_cycle.end(), 0);
    for (int node = ei; node != -1; node = basis.parent[node])
      on_cycle[node] = 1;
    int meet = n + ej;
    while (!on_cycle[meet]) meet = basis.parent[meet];

    // Node sequence ei -> ... -> meet (row side), then meet -> ... -> n+ej
    // reversed (column side); the entering arc closes it.
    std::vector<int> path_nodes;
    for (int node = ei; node != meet; node = basis.parent[node])
      path_nodes.push_back(node);
    path_nodes.push_back(meet);
    std::vector<int> tail;
    for (int node = n + ej; node != meet; node = basis.parent[node])
      tail.push_back(node);
    for (auto it = tail.rbegin(); it != tail.rend(); ++it)
      path_nodes.push_back(*it);

    // Pushing t on the entering arc alternates +t / -t around the cycle
    // (the graph is bipartite, so the cycle has even length). Arcs
    // adjacent to the entering one lose t; the path from a row node to a
    // column node alternates starting and ending with a losing arc.
    struct Step {
      int arc;
      int sign;
    };
    std::vector<Step> steps;
    for (size_t p = 0; p + 1 < path_nodes.size(); ++p) {
      const int from = path_nodes[p];
      const int to = path_nodes[p + 1];
      const int child = basis.parent[to] == from ? to : from;
      const int arc = basis.parent_arc[child];
      steps.push_back({arc, from < n ? -1 : 1});
    }

    double t = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (const Step& s : steps) {
      if (s.sign < 0 && basis.arcs[s.arc].flow < t) {
        t = basis.arcs[s.arc].flow;
        leaving = s.arc;
      }
    }
    if (leaving < 0)
      throw solver_error("transportation cycle without a leaving arc");

    for (const Step& s : steps) {
      basis.arcs[s.arc].flow =
          std::max(0.0, basis.arcs[s.arc].flow + s.sign * t);
    }
    basis.arcs[leaving] = {ei, ej, t};
    basis.refresh(cost);
  }

  OtSolution sol;
  sol.coupling.plan = Eigen::MatrixXd::Zero(n, m);
  for (const auto& arc : basis.arcs)
    sol.coupling.plan(arc.row, arc.col) += std::max(0.0, arc.flow);
  sol.coupling.row_marginal = mu;
  sol.coupling.col_marginal = nu;
  sol.cost = (cost.array() * sol.coupling.plan.array()).sum();
  sol.iterations = pivots;
  sol.converged = true;

  if (certificate != nullptr) {
    certificate->row_potentials = basis.u;
    certificate->col_potentials = basis.v;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        worst = std::max(worst, basis.u(i) + basis.v(j) - cost(i, j));
    certificate->max_reduced_cost_violation = worst;
    certificate->duality_gap =
        std::abs(sol.cost - (basis.u.dot(mu) + basis.v.dot(nu_bal)));
  }
  return sol;
}

OtSolution sinkhorn(const Eigen::MatrixXd& cost, const Eigen::VectorXd& mu,
                    const Eigen::VectorXd& nu, SinkhornParams params) {
  validate_marginals(cost, mu, nu);
  const int n = static_cast<int>(mu.size());
  const int m = static_cast<int>(nu.size());
  const double scale = std::max(1e-300, cost.cwiseAbs().maxCoeff());
  const double eps_target =
      params.epsilon > 0.0 ? params.epsilon : 1e-2 * scale;
  if (!(eps_target > 0.0))
    throw std::invalid_argument("epsilon must be positive");

  const Eigen::VectorXd log_mu = mu.array().log();
  const Eigen::VectorXd log_nu = nu.array().log();
  const Eigen::MatrixXd cost_t = cost.transpose();  // contiguous row access
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd z(std::max(n, m)), lse_rows(n), lse_cols(m);

  // Smoothed warm levels cut the iteration count at small target
  // epsilon; the potentials carry over between levels.
  std::vector<double> levels{eps_target};
  for (double warm = eps_target * 4.0; warm < 0.05 * scale; warm *= 4.0)
    levels.push_back(warm);
  std::reverse(levels.begin(), levels.end());

  OtSolution sol;
  double eps_active = levels.front();
  int used = 0;
  for (size_t level = 0; level < levels.size() && used < params.max_iter;
       ++level) {
    const double eps = levels[level];
    eps_active = eps;
    const bool final_level = level + 1 == levels.size();
    const double level_tol = final_level ? params.tol : 1e-4;
    for (int at_level = 0; used < params.max_iter; ++used, ++at_level) {
      // Row log-sums at the current potentials; the pre-update row
      // residual falls out for free. Column sums are exact after every
      // g-update at the same epsilon, so the test needs one full update
      // at this level first.
      double residual = 0.0;
      for (int i = 0; i < n; ++i) {
        z.head(m) = (g - cost_t.col(i)) / eps;
        const double top = z.head(m).maxCoeff();
        lse_rows(i) = top + std::log((z.head(m).array() - top).exp().sum());
        residual += std::abs(std::exp(f(i) / eps + lse_rows(i)) - mu(i));
      }
      if (at_level > 0 && residual < level_tol) {
        if (final_level) sol.converged = true;
        break;
      }
      f = eps * (log_mu - lse_rows);
      for (int j = 0; j < m; ++j) {
        z.head(n) = (f - cost.col(j)) / eps;
        const double top = z.head(n).maxCoeff();
        lse_cols(j) = top + std::log((z.head(n).array() - top).exp().sum());
      }
      g = eps * (log_nu - lse_cols);
    }
  }

  Eigen::MatrixXd plan(n, m);
  for (int j = 0; j < m; ++j)
    plan.col(j) = ((f.array() + g(j) - cost.col(j).array()) / eps_active).exp();
  sol.coupling.plan = plan;
  sol.coupling.row_marginal = mu;
  sol.coupling.col_marginal = nu;
  sol.cost = (cost.array() * plan.array()).sum();
  sol.iterations = used;
  return sol;
}

OtSolution w2_solve(const MmSpace& a, const MmSpace& b, OtSolver solver,
                    SinkhornParams sinkhorn_params) {
  if (a.metric() != Metric::Euclidean || b.metric() != Metric::Euclidean)
    throw std::invalid_argument("w2 needs Euclidean spaces");
  if (a.ambient_dim() != b.ambient_dim())
    throw std::invalid_argument("ambient dimension mismatch: " +
                                std::to_string(a.ambient_dim()) + " vs " +
                                std::to_string(b.ambient_dim()));
  Eigen::MatrixXd cost(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < b.size(); ++j)
      cost(i, j) = (a.points().row(i) - b.points().row(j)).squaredNorm();
  if (solver == OtSolver::Exact)
    return exact_ot(cost, a.weights(), b.weights());
  return sinkhorn(cost, a.weights(), b.weights(), sinkhorn_params);
}

double w2_squared(const MmSpace& a, const MmSpace& b, OtSolver solver,
                  SinkhornParams sinkhorn_params) {
  return w2_solve(a, b, solver, sinkhorn_params).cost;
}

}  // namespace serw
