#include "serw/embed.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "serw/ot.hpp"

namespace serw {

int target_dimension(int n, int m, double c) {
  if (n < 2 || m < 2)
    throw std::invalid_argument("target_dimension needs n, m >= 2");
  const double l = std::log(static_cast<double>(std::max(n, m)));
  return static_cast<int>(std::ceil(c * l * l));
}

MdsEmbedding mds_embed(const MmSpace& space, int d) {
  const int n = space.size();
  if (d < 1 || d > n - 1)
    throw std::invalid_argument("mds_embed needs 1 <= d <= n-1, got d = " +
                                std::to_string(d) + " with n = " +
                                std::to_string(n));
  const Eigen::MatrixXd& dist = space.distance_matrix();
  const Eigen::MatrixXd sq = dist.array().square();
  const Eigen::MatrixXd center =
      Eigen::MatrixXd::Identity(n, n) -
      Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd b = -0.5 * center * sq * center;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success)
    throw solver_error("eigendecomposition failed in mds_embed");
  const Eigen::VectorXd evals = solver.eigenvalues();  // ascending
  const double eig_floor = 1e-12 * std::max(1.0, evals.cwiseAbs().maxCoeff());

  MdsEmbedding out;
  out.coords = Eigen::MatrixXd::Zero(n, d);
  int col = 0;
  for (int k = n - 1; k >= 0 && col < d; --k) {
    if (evals(k) <= eig_floor) break;
    out.coords.col(col++) =
        solver.eigenvectors().col(k) * std::sqrt(evals(k));
  }
  out.positive_eigenvalues = col;
  out.padded = col < d;

  // Eigenvectors of the centered Gram are mean-zero already, so the
  // centroid sits at the origin. If the ambient origin is a data point,
  // shift its image to zero instead.
  if (space.metric() == Metric::Euclidean) {
    for (int i = 0; i < n; ++i) {
      if (space.points().row(i).norm() <= 1e-14) {
        const Eigen::RowVectorXd shift = out.coords.row(i);
        out.coords.rowwise() -= shift;
        out.origin_enforced = true;
        break;
      }
    }
  }
  return out;
}

namespace {

std::vector<std::vector<int>> knn_indices(const Eigen::MatrixXd& dist, int k) {
  const int n = static_cast<int>(dist.rows());
  std::vector<std::vector<int>> nbrs(n);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (dist(i, a) != dist(i, b)) return dist(i, a) < dist(i, b);
      return a < b;
    });
    for (int idx : order) {
      if (idx == i) continue;
      nbrs[i].push_back(idx);
      if (static_cast<int>(nbrs[i].size()) == k) break;
    }
  }
  return nbrs;
}

void check_knn_connected(const std::vector<std::vector<int>>& nbrs) {
  const int n = static_cast<int>(nbrs.size());
  std::vector<std::vector<int>> sym(n);
  for (int i = 0; i < n; ++i)
    for (int j : nbrs[i]) {
      sym[i].push_back(j);
      sym[j].push_back(i);
    }
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> queue{s};
    comp[s] = ncomp;
    for (size_t q = 0; q < queue.size(); ++q)
      for (int j : sym[queue[q]])
        if (comp[j] < 0) {
          comp[j] = ncomp;
          queue.push_back(j);
        }
    ++ncomp;
  }
  if (ncomp > 1) {
    std::string msg = "k-NN graph is disconnected into " +
                      std::to_string(ncomp) + " components; sizes:";
    for (int c = 0; c < ncomp; ++c) {
      const long size = std::count(comp.begin(), comp.end(), c);
      msg += " " + std::to_string(size);
    }
    throw std::invalid_argument(msg);
  }
}

}  // namespace

Eigen::MatrixXd lle_weights(const MmSpace& space, int k_neighbors,
                            double reg) {
  const int n = space.size();
  if (k_neighbors <= 0) k_neighbors = std::min(10, n - 1);
  if (k_neighbors >= n)
    throw std::invalid_argument("lle needs k_neighbors < n");

  const Eigen::MatrixXd& dist = space.distance_matrix();
  const auto nbrs = knn_indices(dist, k_neighbors);
  check_knn_connected(nbrs);

  // Reconstruction weights. The local Gram of neighbor differences is
  // recovered from distances: <xi-xa, xi-xb> = (d_ia^2 + d_ib^2 - d_ab^2)/2,
  // which also covers precomputed metrics.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  const int k = k_neighbors;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd gram(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        const int ia = nbrs[i][a], ib = nbrs[i][b];
        gram(a, b) = 0.5 * (dist(i, ia) * dist(i, ia) +
                            dist(i, ib) * dist(i, ib) -
                            dist(ia, ib) * dist(ia, ib));
      }
    const double local_reg =
        reg > 0.0 ? reg : 1e-3 * std::max(gram.trace(), 1e-12) / k;
    gram.diagonal().array() += local_reg;
    Eigen::VectorXd sol = gram.ldlt().solve(Eigen::VectorXd::Ones(k));
    const double total = sol.sum();
    if (total == 0.0 || !std::isfinite(total))
      throw solver_error("singular reconstruction system in lle at point " +
                         std::to_string(i));
    sol /= total;
    for (int a = 0; a < k; ++a) w(i, nbrs[i][a]) = sol(a);
  }
  return w;
}

Eigen::MatrixXd lle_embed(const MmSpace& space, int d, int k_neighbors,
                          double reg) {
  const int n = space.size();
  if (d < 1 || d >= n)
    throw std::invalid_argument("lle_embed needs 1 <= d < n");
  const Eigen::MatrixXd w = lle_weights(space, k_neighbors, reg);
  const Eigen::MatrixXd iw =
      Eigen::MatrixXd::Identity(n, n) - w;
  const Eigen::MatrixXd m = iw.transpose() * iw;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success)
    throw solver_error("eigendecomposition failed in lle_embed");

  // Bottom eigenvectors, skipping the constant one; scaled by sqrt(n) so
  // columns are orthonormal under the 1/n inner product.
  Eigen::MatrixXd coords(n, d);
  for (int c = 0; c < d; ++c)
    coords.col(c) = solver.eigenvectors().col(c + 1) * std::sqrt(double(n));
  return coords;
}

DistortionEstimate estimate_distortion(const Eigen::MatrixXd& cx,
                                       const Eigen::MatrixXd& c_emb) {
  const int n = static_cast<int>(cx.rows());
  if (c_emb.rows() != n || c_emb.cols() != cx.cols() || cx.cols() != n)
    throw std::invalid_argument("estimate_distortion: shape mismatch");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (cx(i, j) <= 0.0)
        throw std::invalid_argument(
            "estimate_distortion: duplicate points (zero distance at pair " +
            std::to_string(i) + "," + std::to_string(j) + ")");
      const double ratio = c_emb(i, j) / cx(i, j);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  if (!std::isfinite(lo) || lo <= 0.0)
    throw std::invalid_argument(
        "estimate_distortion: embedding collapses a pair to zero distance");
  DistortionEstimate e;
  e.ratio_min = lo;
  e.ratio_max = hi;
  e.kappa = lo;
  e.tau = hi / lo;
  return e;
}

DistortionThreshold distortion_threshold(const std::vector<double>& ratios) {
  if (ratios.empty())
    throw std::invalid_argument("distortion_threshold: no ratios");
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  return DistortionThreshold{std::max(0.9 * *hi, *lo)};
}

double distortion_loss(const std::vector<double>& original_dists,
                       const std::vector<double>& embedded_dists,
                       DistortionThreshold threshold) {
  if (original_dists.size() != embedded_dists.size())
    throw std::invalid_argument("distortion_loss: pair count mismatch");
  double loss = 0.0;
  for (size_t p = 0; p < original_dists.size(); ++p) {
    const double ratio = embedded_dists[p] / original_dists[p];
    if (ratio > threshold.tau_tilde) loss += ratio;
  }
  return loss;
}

Eigen::MatrixXd distortion_loss_grad(
    const Eigen::MatrixXd& points_emb,
    const std::vector<std::pair<int, int>>& pairs,
    const std::vector<double>& original_dists, DistortionThreshold threshold) {
  if (pairs.size() != original_dists.size())
    throw std::invalid_argument("distortion_loss_grad: pair count mismatch");
  Eigen::MatrixXd grad =
      Eigen::MatrixXd::Zero(points_emb.rows(), points_emb.cols());
  for (size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    const Eigen::RowVectorXd diff = points_emb.row(i) - points_emb.row(j);
    const double emb_dist = diff.norm();
    const double ratio = emb_dist / original_dists[p];
    if (ratio <= threshold.tau_tilde || emb_dist == 0.0) continue;
    const Eigen::RowVectorXd g = diff / (emb_dist * original_dists[p]);
    grad.row(i) += g;
    grad.row(j) -= g;
  }
  return grad;
}

namespace {

inline double leaky(double x) {
  return x >= 0.0 ? x : ResidualEmbedding::kLeakySlope * x;
}

inline double leaky_grad(double x) {
  return x >= 0.0 ? 1.0 : ResidualEmbedding::kLeakySlope;
}

}  // namespace

ResidualEmbedding ResidualEmbedding::make(Eigen::MatrixXd base,
                                          const std::vector<int>& hidden_widths,
                                          std::uint64_t seed) {
  const int d = static_cast<int>(base.cols());
  std::vector<int> dims{d};
  for (int w : hidden_widths) {
    if (w < 1) throw std::invalid_argument("hidden width must be >= 1");
    dims.push_back(w);
  }
  dims.push_back(d);

  std::mt19937_64 rng(seed);
  ResidualEmbedding emb;
  emb.base = std::move(base);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    Eigen::MatrixXd w(dims[l], dims[l + 1]);
    if (l + 2 == dims.size()) {
      // Zero output layer: the residual starts exactly at zero while the
      // hidden layers keep nonzero activations for the first gradient.
      w.setZero();
    } else {
      std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(dims[l]));
      for (int r = 0; r < w.rows(); ++r)
        for (int c = 0; c < w.cols(); ++c) w(r, c) = gauss(rng);
    }
    emb.layers.push_back(std::move(w));
  }
  return emb;
}

Eigen::MatrixXd ResidualEmbedding::forward(
    const Eigen::MatrixXd& base_batch) const {
  if (base_batch.cols() != base.cols())
    throw std::invalid_argument("forward: batch width mismatch");
  if (layers.empty()) return base_batch;  // identity placeholder
  Eigen::MatrixXd h = base_batch;
  for (const Eigen::MatrixXd& w : layers) {
    if (h.cols() != w.rows())
      throw std::invalid_argument("forward: layer shape mismatch");
    h = (h * w).unaryExpr([](double x) { return leaky(x); });
  }
  return base_batch + h;
}

std::vector<Eigen::MatrixXd> ResidualEmbedding::backward(
    const Eigen::MatrixXd& base_batch, const Eigen::MatrixXd& upstream) const {
  if (upstream.rows() != base_batch.rows() ||
      upstream.cols() != base.cols())
    throw std::invalid_argument("backward: upstream shape mismatch");
  const size_t depth = layers.size();
  std::vector<Eigen::MatrixXd> activations(depth + 1), preacts(depth);
  activations[0] = base_batch;
  for (size_t l = 0; l < depth; ++l) {
    preacts[l] = activations[l] * layers[l];
    activations[l + 1] =
        preacts[l].unaryExpr([](double x) { return leaky(x); });
  }

  std::vector<Eigen::MatrixXd> grads(depth);
  Eigen::MatrixXd delta = upstream;  // d loss / d activation
  for (size_t l = depth; l-- > 0;) {
    const Eigen::MatrixXd dpre =
        delta.array() *
        preacts[l].unaryExpr([](double x) { return leaky_grad(x); }).array();
    grads[l] = activations[l].transpose() * dpre;
    if (l > 0) delta = dpre * layers[l].transpose();
  }
  return grads;
}

void AdamOptimizer::step(std::vector<Eigen::MatrixXd>& weights,
                         const std::vector<Eigen::MatrixXd>& grads,
                         bool maximize) {
  if (weights.size() != grads.size())
    throw std::invalid_argument("adam: weight/gradient count mismatch");
  if (m_.empty()) {
    for (const auto& w : weights) {
      m_.emplace_back(Eigen::ArrayXXd::Zero(w.rows(), w.cols()));
      v_.emplace_back(Eigen::ArrayXXd::Zero(w.rows(), w.cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t l = 0; l < weights.size(); ++l) {
    const Eigen::ArrayXXd g =
        maximize ? (-grads[l].array()).eval() : grads[l].array().eval();
    m_[l] = beta1_ * m_[l] + (1.0 - beta1_) * g;
    v_[l] = beta2_ * v_[l] + (1.0 - beta2_) * g.square();
    weights[l].array() -=
        lr_ * (m_[l] / bc1) / ((v_[l] / bc2).sqrt() + eps_);
  }
}

}  // namespace serw
