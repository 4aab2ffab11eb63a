#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "serw/mmspace.hpp"
#include "serw/ot.hpp"
#include "serw/serw.hpp"

namespace serw {

struct DtwResult {
  double distance = 0.0;
  /// Monotone index alignment from (0,0) to (len1-1, len2-1) with steps
  /// (1,0), (0,1) or (1,1).
  std::vector<std::pair<int, int>> path;
};

enum class DtwLocalCost { Absolute, Squared };

/// Classic O(len1 * len2) dynamic-programming warp distance. Ties in the
/// predecessor choice prefer the diagonal step, then advancing the first
/// sequence, then the second.
DtwResult dtw(const std::vector<double>& a, const std::vector<double>& b,
              DtwLocalCost local = DtwLocalCost::Absolute);

enum class CurveMetric { GW, FSERW, W2 };

struct CurveOptions {
  CurveMetric metric = CurveMetric::GW;
  int dim = 0;  // FSERW embedding dimension; <= 0 means ambient/auto
  BaseEmbed embed = BaseEmbed::Mds;
  int gw_restarts = 5;
  std::uint64_t seed = 0;
  OtSolver w2_solver = OtSolver::Exact;
  double sinkhorn_epsilon = 0.0;
};

/// Distance from frame 0 to every frame, centered (mean subtracted) and
/// max-normalized (divided by the largest magnitude, when non-constant).
std::vector<double> sequence_curve(const std::vector<MmSpace>& frames,
                                   CurveOptions options = {});

/// Per-dimension sweep quantities; entries of failed dimensions are NaN.
struct CurveReport {
  std::vector<int> dims;
  std::vector<double> distortion_rates;  // max of the two measured taus
  std::vector<double> upper_bounds;      // beta GW^2 + 4 beta M_underbar
  std::vector<double> serw_ratios;       // S_d / GW (distance scale)
  std::vector<double> gw_ratios;         // GW distance, constant reference
};

CurveReport dimension_sweep(const MmSpace& a, const MmSpace& b,
                            const std::vector<int>& dims, BaseEmbed embed,
                            std::uint64_t seed);

struct ProximityRatios {
  std::array<double, 2> gw{};    // GW(X,Y)/GW(Y,Z), GW(X,Z)/GW(Y,Z)
  std::array<double, 2> serw{};  // FSERW analogues, distance scale
  bool ordering_agreement = false;
};

ProximityRatios proximity_ratios(const MmSpace& x, const MmSpace& y,
                                 const MmSpace& z, int dim, BaseEmbed embed,
                                 std::uint64_t seed);

/// Synthetic stand-in for a cyclically deforming shape sequence: a seeded
/// planar cloud whose axes breathe with the given period. Optional rigid
/// rotations leave every within-frame metric untouched.
struct CycleConfig {
  int points = 24;
  int frames = 40;
  double period = 10.0;
  double amplitude = 0.4;
  double noise = 0.0;
  bool rigid_rotations = false;
  std::uint64_t seed = 0;
};

std::vector<MmSpace> make_cyclic_sequence(CycleConfig config = {});

}  // namespace serw
