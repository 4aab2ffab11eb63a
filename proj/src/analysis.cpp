#include "serw/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "serw/gromov.hpp"
#include "serw/log.hpp"
#include "serw/threading.hpp"

namespace serw {

DtwResult dtw(const std::vector<double>& a, const std::vector<double>& b,
              DtwLocalCost local) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("dtw: sequences must be nonempty");
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  auto cell = [&](int i, int j) {
    const double diff = a[i] - b[j];
    return local == DtwLocalCost::Absolute ? std::abs(diff) : diff * diff;
  };

  Eigen::MatrixXd acc(n, m);
  Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic> move(n, m);
  acc(0, 0) = cell(0, 0);
  move(0, 0) = 0;
  for (int i = 1; i < n; ++i) {
    acc(i, 0) = acc(i - 1, 0) + cell(i, 0);
    move(i, 0) = 1;  // advance first sequence
  }
  for (int j = 1; j < m; ++j) {
    acc(0, j) = acc(0, j - 1) + cell(0, j);
    move(0, j) = 2;  // advance second sequence
  }
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < m; ++j) {
      // Tie preference: diagonal, then first-sequence step, then second.
      double best = acc(i - 1, j - 1);
      signed char mv = 0;
      if (acc(i - 1, j) < best) {
        best = acc(i - 1, j);
        mv = 1;
      }
      if (acc(i, j - 1) < best) {
        best = acc(i, j - 1);
        mv = 2;
      }
      acc(i, j) = best + cell(i, j);
      move(i, j) = mv;
    }
  }

  DtwResult out;
  out.distance = acc(n - 1, m - 1);
  int i = n - 1, j = m - 1;
  out.path.emplace_back(i, j);
  while (i != 0 || j != 0) {
    switch (move(i, j)) {
      case 0: --i; --j; break;
      case 1: --i; break;
      default: --j; break;
    }
    out.path.emplace_back(i, j);
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

namespace {

double frame_distance(const MmSpace& first, const MmSpace& frame,
                      const CurveOptions& options, int frame_index,
                      const std::vector<Eigen::MatrixXd>& embeddings) {
  switch (options.metric) {
    case CurveMetric::GW: {
      GwConfig config;
      config.restarts = options.gw_restarts;
      config.seed = options.seed + static_cast<std::uint64_t>(frame_index);
      return std::sqrt(std::max(0.0, gw_solve(first, frame, config).gw_squared));
    }
    case CurveMetric::W2: {
      SinkhornParams sp;
      sp.epsilon = options.sinkhorn_epsilon;
      return std::sqrt(
          std::max(0.0, w2_squared(first, frame, options.w2_solver, sp)));
    }
    case CurveMetric::FSERW: {
      const SerwResult r =
          fserw(first, frame, embeddings[0], embeddings[frame_index]);
      return std::sqrt(std::max(0.0, r.value));
    }
  }
  return 0.0;
}

}  // namespace

std::vector<double> sequence_curve(const std::vector<MmSpace>& frames,
                                   CurveOptions options) {
  if (frames.size() < 2)
    throw std::invalid_argument("sequence_curve needs at least two frames");
  const int count = static_cast<int>(frames.size());

  std::vector<Eigen::MatrixXd> embeddings;
  if (options.metric == CurveMetric::FSERW) {
    embeddings.resize(count);
    const int d = options.dim > 0
                      ? options.dim
                      : std::max(1, std::min(frames[0].size() - 1,
                                             frames[0].metric() ==
                                                     Metric::Euclidean
                                                 ? frames[0].ambient_dim()
                                                 : 2));
    parallel_for(count, [&](int k) {
      embeddings[k] = options.embed == BaseEmbed::Mds
                          ? mds_embed(frames[k], d).coords
                          : lle_embed(frames[k], d);
    });
  }

  std::vector<double> curve(count, 0.0);
  parallel_for(count, [&](int k) {
    curve[k] = k == 0 ? 0.0
                      : frame_distance(frames[0], frames[k], options, k,
                                       embeddings);
  });

  const double mean =
      std::accumulate(curve.begin(), curve.end(), 0.0) / count;
  for (double& v : curve) v -= mean;
  double top = 0.0;
  for (double v : curve) top = std::max(top, std::abs(v));
  if (top > 0.0)
    for (double& v : curve) v /= top;
  return curve;
}

CurveReport dimension_sweep(const MmSpace& a, const MmSpace& b,
                            const std::vector<int>& dims, BaseEmbed embed,
                            std::uint64_t seed) {
  if (dims.empty()) throw std::invalid_argument("dimension_sweep: no dims");
  const GwSolution gw = gw_solve(a, b, 5, seed);
  const double gw_dist = std::sqrt(std::max(0.0, gw.gw_squared));

  CurveReport report;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int d : dims) {
    report.dims.push_back(d);
    try {
      SerwConfig config;
      config.epochs = 0;
      config.dim = d;
      config.embed = embed;
      config.seed = seed;
      const SerwResult serw = serw_train(a, b, config);
      const BoundsReport bounds = check_bounds(a, b, serw, gw);
      report.distortion_rates.push_back(
          std::max(serw.distortions.first.tau, serw.distortions.second.tau));
      report.upper_bounds.push_back(bounds.beta * bounds.gw_squared +
                                    4.0 * bounds.beta * bounds.m_underbar);
      report.serw_ratios.push_back(
          gw_dist > 0.0 ? std::sqrt(std::max(0.0, serw.value)) / gw_dist
                        : nan);
      report.gw_ratios.push_back(gw_dist);
    } catch (const std::exception& e) {
      log_info("dimension_sweep: d = " + std::to_string(d) +
               " failed: " + e.what());
      report.distortion_rates.push_back(nan);
      report.upper_bounds.push_back(nan);
      report.serw_ratios.push_back(nan);
      report.gw_ratios.push_back(nan);
    }
  }
  return report;
}

ProximityRatios proximity_ratios(const MmSpace& x, const MmSpace& y,
                                 const MmSpace& z, int dim, BaseEmbed embed,
                                 std::uint64_t seed) {
  const int d = dim > 0 ? dim : target_dimension(x.size(), y.size());

  auto embed_one = [&](const MmSpace& s) {
    return embed == BaseEmbed::Mds ? mds_embed(s, d).coords : lle_embed(s, d);
  };
  const Eigen::MatrixXd ex = embed_one(x);
  const Eigen::MatrixXd ey = embed_one(y);
  const Eigen::MatrixXd ez = embed_one(z);

  const double gw_xy =
      std::sqrt(std::max(0.0, gw_solve(x, y, 5, seed).gw_squared));
  const double gw_yz =
      std::sqrt(std::max(0.0, gw_solve(y, z, 5, seed + 1).gw_squared));
  const double gw_xz =
      std::sqrt(std::max(0.0, gw_solve(x, z, 5, seed + 2).gw_squared));
  const double s_xy = std::sqrt(std::max(0.0, fserw(x, y, ex, ey).value));
  const double s_yz = std::sqrt(std::max(0.0, fserw(y, z, ey, ez).value));
  const double s_xz = std::sqrt(std::max(0.0, fserw(x, z, ex, ez).value));

  if (gw_yz <= 0.0 || s_yz <= 0.0)
    throw std::invalid_argument(
        "proximity_ratios: degenerate denominator, Y and Z coincide");

  ProximityRatios out;
  out.gw = {gw_xy / gw_yz, gw_xz / gw_yz};
  out.serw = {s_xy / s_yz, s_xz / s_yz};
  out.ordering_agreement =
      (out.gw[0] <= out.gw[1]) == (out.serw[0] <= out.serw[1]);
  return out;
}

std::vector<MmSpace> make_cyclic_sequence(CycleConfig config) {
  if (config.points < 3 || config.frames < 2)
    throw std::invalid_argument("make_cyclic_sequence: too few points/frames");
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::MatrixXd base(config.points, 2);
  for (int i = 0; i < config.points; ++i) {
    base(i, 0) = gauss(rng);
    base(i, 1) = gauss(rng);
  }

  std::vector<MmSpace> frames;
  frames.reserve(config.frames);
  for (int t = 0; t < config.frames; ++t) {
    const double phase = 2.0 * M_PI * t / config.period;
    const double sx = 1.0 + config.amplitude * std::sin(phase);
    const double sy = 1.0 + config.amplitude * std::cos(phase);
    Eigen::MatrixXd pts = base;
    pts.col(0) *= sx;
    pts.col(1) *= sy;
    if (config.noise > 0.0)
      for (int i = 0; i < pts.rows(); ++i) {
        pts(i, 0) += config.noise * gauss(rng);
        pts(i, 1) += config.noise * gauss(rng);
      }
    if (config.rigid_rotations) {
      const double angle = 2.0 * M_PI * t / config.frames;
      Eigen::Matrix2d rot;
      rot << std::cos(angle), -std::sin(angle), std::sin(angle),
          std::cos(angle);
      pts = pts * rot.transpose();
    }
    frames.push_back(MmSpace::euclidean(std::move(pts)));
  }
  return frames;
}

}  // namespace serw
