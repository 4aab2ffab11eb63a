#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "serw/align.hpp"
#include "serw/embed.hpp"
#include "serw/gromov.hpp"
#include "serw/mmspace.hpp"

namespace serw {

struct InnerOtParams {
  int max_rounds = 50;
  double tol = 1e-9;
};

enum class BaseEmbed { Mds, Lle };

struct SerwConfig {
  int epochs = 1;      // 0 reduces the run to fserw on the base embeddings
  int batches = 1;     // per epoch
  int batch_size = 0;  // <= 0 means min(n, m)
  std::uint64_t seed = 0;
  double lr = 1e-3;
  InnerOtParams inner;
  std::vector<int> net_widths;  // hidden widths; empty means {2d}
  BaseEmbed embed = BaseEmbed::Mds;
  int dim = 0;  // <= 0 means target_dimension(n, m)
  int lle_k = 0;
  /// Weight of the distortion penalties against the transport term; the
  /// objective uses unit weight by default.
  double distortion_weight = 1.0;
};

struct SerwResult {
  /// Estimate of the squared distance: half the alignment objective at
  /// the returned rotation and coupling.
  double value = 0.0;
  Rotation rotation;
  Coupling coupling;
  ResidualEmbedding phi;
  ResidualEmbedding psi;
  std::pair<DistortionEstimate, DistortionEstimate> distortions;
  std::vector<double> objective_trace;
};

struct BoundsReport {
  double gw_squared = 0.0;
  double serw_squared = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double m_bar = 0.0;
  double m_underbar = 0.0;
  bool lower_holds = false;
  bool upper_holds = false;
  double slack_lower = 0.0;
  double slack_upper = 0.0;
};

/// Unhalved alignment objective sum_ij pi_ij ||x_i - R y_j||^2.
double alignment_cost(const Eigen::MatrixXd& x_emb,
                      const Eigen::MatrixXd& y_emb, const Rotation& rotation,
                      const Coupling& coupling);

/// Fixed-embedding distance: joint plan/rotation minimization on the
/// given embedded clouds; value is half the alignment objective. The
/// result's residual embeddings are identity placeholders around the
/// given matrices.
SerwResult fserw(const MmSpace& a, const MmSpace& b,
                 const Eigen::MatrixXd& phi_emb, const Eigen::MatrixXd& psi_emb,
                 InnerOtParams inner = {});

/// Alternating max-min training: per batch, solve the invariant OT
/// problem on the embedded batch, then take an Adam ascent step on the
/// transport-minus-distortion objective with the plan and rotation held
/// fixed. The reported value is recomputed on the full embedded sets.
/// Deterministic given the config seed.
SerwResult serw_train(const MmSpace& a, const MmSpace& b, SerwConfig config);

/// Evaluates the two cost-relation inequalities between squared GW and
/// the computed squared SERW value, with constants from the measured
/// distortions: alpha = 2(tau_phi tau_psi - 1), beta =
/// 2(tau_phi^2 + tau_psi^2), additive terms from the moment constants.
BoundsReport check_bounds(const MmSpace& a, const MmSpace& b,
                          const SerwResult& serw, const GwSolution& gw);

}  // namespace serw
