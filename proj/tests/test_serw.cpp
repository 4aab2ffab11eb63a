#include <doctest.h>

#include <cmath>

#include "serw/serw.hpp"
#include "support.hpp"

using namespace serw;

namespace {

MmSpace random_space(int n, int d, std::uint64_t seed, bool anisotropic = false) {
  auto gen = testsupport::rng(seed);
  return MmSpace::euclidean(anisotropic
                                ? testsupport::anisotropic_cloud(n, d, gen)
                                : testsupport::random_cloud(n, d, gen));
}

}  // namespace

TEST_CASE("alignment_cost basics") {
  auto gen = testsupport::rng(50);
  const Eigen::MatrixXd x = testsupport::random_cloud(6, 3, gen);
  Coupling diag;
  diag.row_marginal = testsupport::uniform_weights(6);
  diag.col_marginal = diag.row_marginal;
  diag.plan = Eigen::MatrixXd::Zero(6, 6);
  diag.plan.diagonal().setConstant(1.0 / 6);
  CHECK(alignment_cost(x, x, Rotation::identity(3), diag) == 0.0);

  Eigen::MatrixXd u(1, 2), v(1, 2);
  u << 1, 0;
  v << 0, 1;
  Coupling one;
  one.plan = Eigen::MatrixXd::Constant(1, 1, 1.0);
  one.row_marginal = one.col_marginal = Eigen::VectorXd::Ones(1);
  CHECK(alignment_cost(u, v, Rotation::identity(2), one) ==
        doctest::Approx(2.0));
}

TEST_CASE("alignment_cost matches a double-loop oracle") {
  auto gen = testsupport::rng(51);
  const Eigen::MatrixXd x = testsupport::random_cloud(7, 3, gen);
  const Eigen::MatrixXd y = testsupport::random_cloud(5, 3, gen);
  const Rotation r{testsupport::random_orthogonal(3, gen)};
  Coupling pi;
  pi.row_marginal = testsupport::uniform_weights(7);
  pi.col_marginal = testsupport::uniform_weights(5);
  pi.plan = random_feasible_plan(pi.row_marginal, pi.col_marginal, 4);

  double ref = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 5; ++j) {
      double sq = 0.0;
      for (int c = 0; c < 3; ++c) {
        double ry = 0.0;
        for (int c2 = 0; c2 < 3; ++c2) ry += r.matrix(c, c2) * y(j, c2);
        const double diff = x(i, c) - ry;
        sq += diff * diff;
      }
      ref += pi.plan(i, j) * sq;
    }
  CHECK(alignment_cost(x, y, r, pi) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("fserw vanishes on rotated pushforward pairs") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto gen = testsupport::rng(1300 + seed);
    const Eigen::MatrixXd cloud = testsupport::anisotropic_cloud(12, 4, gen);
    const MmSpace a = MmSpace::euclidean(cloud);
    const Eigen::MatrixXd phi = mds_embed(a, 3).coords;
    const Eigen::MatrixXd r0 = testsupport::random_orthogonal(3, gen);
    const Eigen::MatrixXd psi = phi * r0.transpose();
    const MmSpace b = MmSpace::euclidean(psi);  // ambient 3 vs 4
    const SerwResult res = fserw(a, b, phi, psi);
    CHECK(res.value < 1e-8);
  }
}

TEST_CASE("fserw of a space against itself is zero") {
  const MmSpace a = random_space(9, 3, 52);
  const Eigen::MatrixXd phi = mds_embed(a, 2).coords;
  CHECK(fserw(a, a, phi, phi).value <= 1e-12);
}

TEST_CASE("fserw is symmetric under swapping the sides") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const MmSpace a = random_space(8, 3, 1400 + seed, true);
    const MmSpace b = random_space(10, 2, 1500 + seed, true);
    const Eigen::MatrixXd ea = mds_embed(a, 2).coords;
    const Eigen::MatrixXd eb = mds_embed(b, 2).coords;
    const double forward = fserw(a, b, ea, eb).value;
    const double backward = fserw(b, a, eb, ea).value;
    CHECK(std::abs(forward - backward) <= 1e-7);
  }
}

TEST_CASE("fserw dimension mismatch is an input error") {
  const MmSpace a = random_space(5, 3, 53);
  CHECK_THROWS_AS(
      fserw(a, a, mds_embed(a, 2).coords, mds_embed(a, 3).coords),
      std::invalid_argument);
}

TEST_CASE("sqrt(fserw) obeys the triangle inequality on shared embeddings") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MmSpace x = random_space(8, 3, 1600 + seed, true);
    const MmSpace y = random_space(9, 4, 1700 + seed, true);
    const MmSpace z = random_space(7, 2, 1800 + seed, true);
    const Eigen::MatrixXd ex = mds_embed(x, 2).coords;
    const Eigen::MatrixXd ey = mds_embed(y, 2).coords;
    const Eigen::MatrixXd ez = mds_embed(z, 2).coords;
    const double dxy = std::sqrt(fserw(x, y, ex, ey).value);
    const double dyz = std::sqrt(fserw(y, z, ey, ez).value);
    const double dxz = std::sqrt(fserw(x, z, ex, ez).value);
    CHECK(dxz <= dxy + dyz + 1e-6);
  }
}

TEST_CASE("fserw result is internally consistent") {
  const MmSpace a = random_space(8, 3, 54);
  const MmSpace b = random_space(6, 3, 55);
  const Eigen::MatrixXd ea = mds_embed(a, 2).coords;
  const Eigen::MatrixXd eb = mds_embed(b, 2).coords;
  const SerwResult res = fserw(a, b, ea, eb);
  // Reported value is half the alignment objective at the returned
  // iterates, and the plan marginals are exactly the input weights.
  CHECK(res.value ==
        doctest::Approx(0.5 * alignment_cost(ea, eb, res.rotation,
                                             res.coupling))
            .epsilon(1e-9));
  CHECK((res.coupling.row_marginal - a.weights()).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((res.coupling.col_marginal - b.weights()).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(res.coupling.is_feasible(1e-9));
}

TEST_CASE("serw_train with zero epochs reduces to fserw") {
  const MmSpace a = random_space(9, 3, 56);
  const MmSpace b = random_space(8, 4, 57);
  SerwConfig config;
  config.epochs = 0;
  config.dim = 3;
  const SerwResult trained = serw_train(a, b, config);
  const SerwResult fixed =
      fserw(a, b, mds_embed(a, 3).coords, mds_embed(b, 3).coords);
  CHECK(std::abs(trained.value - fixed.value) <= 1e-12);
  CHECK(trained.objective_trace.empty());
}

TEST_CASE("serw_train traces stay finite and runs are seed-deterministic") {
  const MmSpace a = random_space(10, 3, 58);
  const MmSpace b = random_space(9, 2, 59);
  SerwConfig config;
  config.epochs = 2;
  config.batches = 3;
  config.batch_size = 6;
  config.dim = 2;
  config.seed = 11;
  const SerwResult r1 = serw_train(a, b, config);
  const SerwResult r2 = serw_train(a, b, config);
  CHECK(r1.value == r2.value);
  CHECK(r1.objective_trace.size() == 6);
  for (double v : r1.objective_trace) CHECK(std::isfinite(v));
  for (size_t i = 0; i < r1.objective_trace.size(); ++i)
    CHECK(r1.objective_trace[i] == r2.objective_trace[i]);
  CHECK(r1.rotation.is_orthogonal());
}

TEST_CASE("training keeps distortion near the base level on isometric pairs") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto gen = testsupport::rng(1900 + seed);
    const Eigen::MatrixXd cloud = testsupport::random_cloud(10, 3, gen);
    Eigen::MatrixXd moved = cloud * testsupport::random_orthogonal(3, gen);
    const MmSpace a = MmSpace::euclidean(cloud);
    const MmSpace b = MmSpace::euclidean(moved);

    SerwConfig probe;
    probe.epochs = 0;
    probe.dim = 3;
    const SerwResult initial = serw_train(a, b, probe);

    SerwConfig config = probe;
    config.epochs = 2;
    config.batches = 2;
    config.seed = seed;
    const SerwResult final_result = serw_train(a, b, config);
    CHECK(final_result.distortions.first.tau <=
          initial.distortions.first.tau * 1.05);
    CHECK(final_result.distortions.second.tau <=
          initial.distortions.second.tau * 1.05);
  }
}

TEST_CASE("check_bounds constants and flags") {
  SUBCASE("identical spaces with identical embeddings") {
    const MmSpace a = random_space(8, 3, 60);
    const Eigen::MatrixXd e = mds_embed(a, 2).coords;
    const SerwResult serw = fserw(a, a, e, e);
    const GwSolution gw = gw_solve(a, a, 3, 0);
    const BoundsReport rep = check_bounds(a, a, serw, gw);
    CHECK(rep.serw_squared <= 1e-10);
    CHECK(rep.gw_squared <= 1e-8);
    CHECK(rep.lower_holds);
    CHECK(rep.upper_holds);
  }
  SUBCASE("isometric embeddings give alpha 0 and beta 4") {
    const MmSpace a = random_space(7, 3, 61);
    const MmSpace b = random_space(6, 3, 62);
    const Eigen::MatrixXd ea = mds_embed(a, 3).coords;  // full rank: tau = 1
    const Eigen::MatrixXd eb = mds_embed(b, 3).coords;
    const SerwResult serw = fserw(a, b, ea, eb);
    const GwSolution gw = gw_solve(a, b, 5, 1);
    const BoundsReport rep = check_bounds(a, b, serw, gw);
    CHECK(rep.alpha == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(rep.beta == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(rep.upper_holds);
  }
  SUBCASE("l2-normalized inputs use the closed-form moment constants") {
    const MmSpace a = l2_normalize(random_space(8, 3, 63));
    const MmSpace b = l2_normalize(random_space(7, 4, 64));
    const SerwResult serw =
        fserw(a, b, mds_embed(a, 2).coords, mds_embed(b, 2).coords);
    const GwSolution gw = gw_solve(a, b, 3, 2);
    const BoundsReport rep = check_bounds(a, b, serw, gw);
    CHECK(rep.m_bar == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(rep.m_underbar == doctest::Approx(6.0).epsilon(1e-12));
  }
  SUBCASE("upper bound holds on random cross-dimensional instances") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const MmSpace a = random_space(8, 3, 2000 + seed);
      const MmSpace b = random_space(9, 5, 2100 + seed);
      SerwConfig config;
      config.epochs = 1;
      config.batches = 2;
      config.dim = 3;
      config.seed = seed;
      const SerwResult serw = serw_train(a, b, config);
      const GwSolution gw = gw_solve(a, b, 5, seed);
      const BoundsReport rep = check_bounds(a, b, serw, gw);
      CHECK(rep.slack_upper >= -1e-6);
    }
  }
}
