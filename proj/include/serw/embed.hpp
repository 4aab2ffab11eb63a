#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "serw/mmspace.hpp"

namespace serw {

/// Target dimension for a common embedding space of two samples of sizes
/// n and m: ceil(c * ln(max(n,m))^2), default c = 1.
int target_dimension(int n, int m, double c = 1.0);

struct MdsEmbedding {
  Eigen::MatrixXd coords;  // n x d
  int positive_eigenvalues = 0;
  bool padded = false;           // fewer than d usable eigenpairs
  bool origin_enforced = false;  // an input point sat at the origin
};

/// Classical multidimensional scaling: double-center the squared
/// distance matrix, keep the top-d nonnegative eigenpairs, coordinates
/// are eigenvectors scaled by sqrt(eigenvalue). The output is centered
/// at the origin; when the ambient origin is itself a data point the
/// embedding is translated so that point maps to zero.
MdsEmbedding mds_embed(const MmSpace& space, int d);

/// Locally linear embedding: per-point reconstruction weights from the
/// k-NN Gram system with Tikhonov regularization, then the bottom
/// non-constant eigenvectors of (I-W)^T (I-W), scaled to be orthonormal
/// under the 1/n inner product. k_neighbors <= 0 selects min(10, n-1);
/// reg <= 0 selects 1e-3 * trace(local Gram) / k per point.
Eigen::MatrixXd lle_embed(const MmSpace& space, int d, int k_neighbors = 0,
                          double reg = 0.0);

/// The n x n reconstruction-weight matrix used by lle_embed; each row is
/// supported on the point's neighbors and sums to one.
Eigen::MatrixXd lle_weights(const MmSpace& space, int k_neighbors = 0,
                            double reg = 0.0);

/// Empirical two-sided distortion of an embedding, from the pairwise
/// ratios c_emb / cx over distinct pairs: kappa is the smallest ratio,
/// tau the largest over smallest, so that for every pair
/// kappa * cx <= c_emb <= tau * kappa * cx.
struct DistortionEstimate {
  double kappa = 1.0;
  double tau = 1.0;
  double ratio_min = 1.0;
  double ratio_max = 1.0;
};

DistortionEstimate estimate_distortion(const Eigen::MatrixXd& cx,
                                       const Eigen::MatrixXd& c_emb);

struct DistortionThreshold {
  double tau_tilde = 1.0;
};

/// Gate threshold max(0.9 * max ratio, min ratio) from the current
/// pairwise ratios.
DistortionThreshold distortion_threshold(const std::vector<double>& ratios);

/// Gated distortion penalty: sum over pairs of (embedded/original)
/// distance ratios exceeding the threshold.
double distortion_loss(const std::vector<double>& original_dists,
                       const std::vector<double>& embedded_dists,
                       DistortionThreshold threshold);

/// Subgradient of distortion_loss with respect to the embedded
/// coordinates, with the gate treated as a constant (straight-through).
/// pairs index rows of points_emb; original_dists aligns with pairs.
Eigen::MatrixXd distortion_loss_grad(
    const Eigen::MatrixXd& points_emb,
    const std::vector<std::pair<int, int>>& pairs,
    const std::vector<double>& original_dists, DistortionThreshold threshold);

/// Residual embedding x -> x + g(x) where g is a bias-free MLP with
/// leaky-ReLU activations (slope 0.01) after every layer. The base
/// projection is frozen; only the layer weights train. The last layer is
/// zero-initialized so a fresh embedding is exactly the identity on its
/// base.
struct ResidualEmbedding {
  static constexpr double kLeakySlope = 0.01;

  Eigen::MatrixXd base;                 // frozen h output, n x d
  std::vector<Eigen::MatrixXd> layers;  // weight l: d_l x d_{l+1}, no bias

  /// hidden_widths lists the inner layer sizes; the chain is
  /// d -> hidden... -> d. An empty list builds a single d x d layer.
  static ResidualEmbedding make(Eigen::MatrixXd base,
                                const std::vector<int>& hidden_widths,
                                std::uint64_t seed);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& base_batch) const;

  /// Reverse-mode gradients of a scalar loss with upstream derivative
  /// d loss / d output, for every layer weight matrix.
  std::vector<Eigen::MatrixXd> backward(const Eigen::MatrixXd& base_batch,
                                        const Eigen::MatrixXd& upstream) const;
};

/// Adam with elementwise moment estimates over a list of weight
/// matrices.
class AdamOptimizer {
 public:
  AdamOptimizer(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// In-place update. With maximize=true the step ascends the objective.
  void step(std::vector<Eigen::MatrixXd>& weights,
            const std::vector<Eigen::MatrixXd>& grads, bool maximize = false);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Eigen::ArrayXXd> m_, v_;
};

}  // namespace serw
