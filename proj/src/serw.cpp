#include "serw/serw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "serw/log.hpp"

namespace serw {

namespace {

Eigen::MatrixXd base_embedding(const MmSpace& space, const SerwConfig& config,
                               int d) {
  if (config.embed == BaseEmbed::Mds) return mds_embed(space, d).coords;
  return lle_embed(space, d, config.lle_k);
}

std::vector<int> sample_indices(int n, int count, std::mt19937_64& rng) {
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(count);
  return all;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m,
                          const std::vector<int>& rows) {
  Eigen::MatrixXd out(rows.size(), m.cols());
  for (size_t r = 0; r < rows.size(); ++r) out.row(r) = m.row(rows[r]);
  return out;
}

// Ratios of embedded to original distances over unordered pairs.
std::vector<double> pair_ratios(const Eigen::MatrixXd& cx,
                                const Eigen::MatrixXd& emb) {
  const Eigen::MatrixXd ce = pairwise_distance_matrix(emb);
  std::vector<double> ratios;
  ratios.reserve(cx.rows() * (cx.rows() - 1) / 2);
  for (int i = 0; i < cx.rows(); ++i)
    for (int j = i + 1; j < cx.cols(); ++j) {
      if (cx(i, j) <= 0.0)
        throw std::invalid_argument(
            "duplicate points: zero original distance in distortion ratios");
      ratios.push_back(ce(i, j) / cx(i, j));
    }
  return ratios;
}

struct BatchPenalty {
  double loss = 0.0;
  Eigen::MatrixXd grad;  // w.r.t. embedded batch rows
};

BatchPenalty batch_distortion(const Eigen::MatrixXd& emb_batch,
                              const std::vector<int>& idx,
                              const Eigen::MatrixXd& cx,
                              DistortionThreshold threshold) {
  const int k = static_cast<int>(idx.size());
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> orig, embd;
  pairs.reserve(k * (k - 1) / 2);
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      const double d0 = cx(idx[a], idx[b]);
      if (d0 <= 0.0)
        throw std::invalid_argument(
            "duplicate points sampled into a training batch");
      pairs.emplace_back(a, b);
      orig.push_back(d0);
      embd.push_back((emb_batch.row(a) - emb_batch.row(b)).norm());
    }
  BatchPenalty out;
  out.loss = distortion_loss(orig, embd, threshold);
  out.grad = distortion_loss_grad(emb_batch, pairs, orig, threshold);
  return out;
}

SerwResult assemble_result(const MmSpace& a, const MmSpace& b,
                           const InvariantOtResult& inv,
                           ResidualEmbedding phi, ResidualEmbedding psi,
                           const Eigen::MatrixXd& phi_full,
                           const Eigen::MatrixXd& psi_full,
                           std::vector<double> trace) {
  SerwResult result;
  result.value = inv.cost;
  result.rotation = inv.rotation;
  result.coupling = inv.coupling;
  result.phi = std::move(phi);
  result.psi = std::move(psi);
  result.distortions = {
      estimate_distortion(a.distance_matrix(),
                          pairwise_distance_matrix(phi_full)),
      estimate_distortion(b.distance_matrix(),
                          pairwise_distance_matrix(psi_full))};
  result.objective_trace = std::move(trace);
  return result;
}

}  // namespace

double alignment_cost(const Eigen::MatrixXd& x_emb,
                      const Eigen::MatrixXd& y_emb, const Rotation& rotation,
                      const Coupling& coupling) {
  if (x_emb.cols() != y_emb.cols())
    throw std::invalid_argument("alignment_cost: dimension mismatch");
  if (coupling.plan.rows() != x_emb.rows() ||
      coupling.plan.cols() != y_emb.rows())
    throw std::invalid_argument("alignment_cost: plan shape mismatch");
  const Eigen::MatrixXd ry = y_emb * rotation.matrix.transpose();
  double j = 0.0;
  for (int i = 0; i < x_emb.rows(); ++i)
    for (int jj = 0; jj < y_emb.rows(); ++jj)
      if (coupling.plan(i, jj) != 0.0)
        j += coupling.plan(i, jj) * (x_emb.row(i) - ry.row(jj)).squaredNorm();
  return j;
}

SerwResult fserw(const MmSpace& a, const MmSpace& b,
                 const Eigen::MatrixXd& phi_emb, const Eigen::MatrixXd& psi_emb,
                 InnerOtParams inner) {
  if (phi_emb.cols() != psi_emb.cols())
    throw std::invalid_argument("fserw: embeddings must share a dimension");
  if (phi_emb.rows() != a.size() || psi_emb.rows() != b.size())
    throw std::invalid_argument("fserw: embedding row count mismatch");
  const InvariantOtResult inv = invariant_ot(
      phi_emb, psi_emb, a.weights(), b.weights(), inner.max_rounds, inner.tol);
  ResidualEmbedding phi;  // identity placeholders around the fixed inputs
  phi.base = phi_emb;
  ResidualEmbedding psi;
  psi.base = psi_emb;
  return assemble_result(a, b, inv, std::move(phi), std::move(psi), phi_emb,
                         psi_emb, {});
}

SerwResult serw_train(const MmSpace& a, const MmSpace& b, SerwConfig config) {
  if (config.epochs < 0 || config.batches < 1)
    throw std::invalid_argument("serw_train: epochs >= 0 and batches >= 1");
  const int n = a.size();
  const int m = b.size();
  const int d =
      config.dim > 0 ? config.dim : target_dimension(n, m);
  const int batch = config.batch_size > 0
                        ? std::min({config.batch_size, n, m})
                        : std::min(n, m);
  if (batch < 2 && config.epochs > 0)
    throw std::invalid_argument("serw_train: batch size must be >= 2");

  const Eigen::MatrixXd base_x = base_embedding(a, config, d);
  const Eigen::MatrixXd base_y = base_embedding(b, config, d);
  const Eigen::MatrixXd& cx = a.distance_matrix();
  const Eigen::MatrixXd& cy = b.distance_matrix();

  std::vector<int> widths = config.net_widths;
  if (widths.empty()) widths = {2 * d};

  std::mt19937_64 rng(config.seed);
  ResidualEmbedding phi = ResidualEmbedding::make(base_x, widths, rng());
  ResidualEmbedding psi = ResidualEmbedding::make(base_y, widths, rng());
  AdamOptimizer adam_x(config.lr), adam_y(config.lr);

  const Eigen::VectorXd batch_w =
      Eigen::VectorXd::Constant(batch, 1.0 / batch);
  std::vector<double> trace;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Gate thresholds are refreshed once per epoch from the full
    // current ratios.
    const DistortionThreshold tau_x =
        distortion_threshold(pair_ratios(cx, phi.forward(base_x)));
    const DistortionThreshold tau_y =
        distortion_threshold(pair_ratios(cy, psi.forward(base_y)));

    for (int bstep = 0; bstep < config.batches; ++bstep) {
      const std::vector<int> idx = sample_indices(n, batch, rng);
      const std::vector<int> idy = sample_indices(m, batch, rng);
      const Eigen::MatrixXd bx = take_rows(base_x, idx);
      const Eigen::MatrixXd by = take_rows(base_y, idy);
      const Eigen::MatrixXd px = phi.forward(bx);
      const Eigen::MatrixXd py = psi.forward(by);

      InvariantOtResult inv;
      try {
        inv = invariant_ot(px, py, batch_w, batch_w, config.inner.max_rounds,
                           config.inner.tol);
      } catch (const solver_error& e) {
        throw solver_error("inner solve failed at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(bstep) + " after " +
                           std::to_string(trace.size()) + " steps: " +
                           e.what());
      }
      const Eigen::MatrixXd& plan = inv.coupling.plan;
      const Eigen::MatrixXd ry = py * inv.rotation.matrix.transpose();

      // Gradients of the transport term (1/2) sum pi ||px_i - R py_j||^2
      // at fixed plan and rotation.
      const Eigen::VectorXd row_mass = plan.rowwise().sum();
      const Eigen::VectorXd col_mass = plan.colwise().sum().transpose();
      const Eigen::MatrixXd gx_transport =
          row_mass.asDiagonal() * px - plan * ry;
      const Eigen::MatrixXd gy_transport =
          (col_mass.asDiagonal() * ry - plan.transpose() * px) *
          inv.rotation.matrix;

      const BatchPenalty dx = batch_distortion(px, idx, cx, tau_x);
      const BatchPenalty dy = batch_distortion(py, idy, cy, tau_y);

      trace.push_back(inv.cost -
                      config.distortion_weight * (dx.loss + dy.loss));

      const Eigen::MatrixXd gx =
          gx_transport - config.distortion_weight * dx.grad;
      const Eigen::MatrixXd gy =
          gy_transport - config.distortion_weight * dy.grad;

      auto grads_x = phi.backward(bx, gx);
      auto grads_y = psi.backward(by, gy);
      adam_x.step(phi.layers, grads_x, /*maximize=*/true);
      adam_y.step(psi.layers, grads_y, /*maximize=*/true);
    }
  }

  const Eigen::MatrixXd phi_full = phi.forward(base_x);
  const Eigen::MatrixXd psi_full = psi.forward(base_y);
  const InvariantOtResult inv =
      invariant_ot(phi_full, psi_full, a.weights(), b.weights(),
                   config.inner.max_rounds, config.inner.tol);
  return assemble_result(a, b, inv, std::move(phi), std::move(psi), phi_full,
                         psi_full, std::move(trace));
}

BoundsReport check_bounds(const MmSpace& a, const MmSpace& b,
                          const SerwResult& serw, const GwSolution& gw) {
  const Moments mom_a = moments(a);
  const Moments mom_b = moments(b);
  BoundsReport report;
  report.gw_squared = gw.gw_squared;
  report.serw_squared = serw.value;
  const double tau_phi = serw.distortions.first.tau;
  const double tau_psi = serw.distortions.second.tau;
  report.alpha = 2.0 * (tau_phi * tau_psi - 1.0);
  report.beta = 2.0 * (tau_phi * tau_phi + tau_psi * tau_psi);
  report.m_bar = lower_bound_constant(mom_a, mom_b);
  report.m_underbar = upper_bound_constant(mom_a, mom_b);
  report.slack_lower = report.serw_squared + report.alpha * report.m_bar -
                       0.5 * report.gw_squared;
  report.slack_upper = report.beta * report.gw_squared +
                       4.0 * report.beta * report.m_underbar -
                       report.serw_squared;
  report.lower_holds = report.slack_lower >= -1e-7;
  report.upper_holds = report.slack_upper >= -1e-7;
  return report;
}

}  // namespace serw
