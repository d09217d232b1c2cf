#include "qtm/reference.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace qtm;

namespace {

std::mt19937 rng(31337);

MachineConfig ideal_config(double g13, double g23, double gamma1 = 0.01, double gamma3 = 0.01) {
  MachineConfig c;
  c.g13 = g13;
  c.g23 = g23;
  c.U = kInfinite;
  c.mu1 = kInfinite;
  c.gamma1 = gamma1;
  c.gamma3 = gamma3;
  return c;
}

// kernel of the closed-form matrix, normalized to unit population sum
ComplexVector reduced_kernel(const ComplexMatrix& m) {
  Eigen::ComplexEigenSolver<ComplexMatrix> es(m, /*computeEigenvectors=*/true);
  Eigen::Index k = 0;
  es.eigenvalues().cwiseAbs().minCoeff(&k);
  ComplexVector v = es.eigenvectors().col(k);
  return v / (v(0) + v(4) + v(8) + v(9));
}

int kernel_dimension(const ComplexMatrix& m) {
  Eigen::ComplexEigenSolver<ComplexMatrix> es(m, /*computeEigenvectors=*/false);
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  int count = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i)) < 1e-9 * scale) ++count;
  return count;
}

}  // namespace

TEST_CASE("reduced operator basis layout") {
  const auto basis = reduced_operator_basis();
  REQUIRE(basis.size() == 10);
  CHECK(basis[0].first.occupations == std::vector<int>{1, 0, 0});
  CHECK(basis[0].second.occupations == std::vector<int>{1, 0, 0});
  CHECK(basis[2].first.occupations == std::vector<int>{1, 0, 0});
  CHECK(basis[2].second.occupations == std::vector<int>{0, 0, 1});
  CHECK(basis[9].first.occupations == std::vector<int>{0, 0, 0});
  CHECK(basis[9].second.occupations == std::vector<int>{0, 0, 0});
}

TEST_CASE("closed-form reduced Liouvillian entries") {
  const double g13 = 0.3, g23 = 0.7, rp100 = 0.11, rm300 = 0.23, rp300 = 0.05;
  const ComplexMatrix m = reduced_liouvillian_matrix(g13, g23, rp100, rm300, rp300);

  CHECK(m(0, 9) == Complex{rp100, 0});
  CHECK(m(2, 2) == Complex{-rm300 / 2, 0});
  CHECK(m(8, 8) == Complex{-rm300, 0});
  CHECK(m(8, 9) == Complex{rp300, 0});
  CHECK(m(9, 8) == Complex{rm300, 0});
  CHECK(m(9, 9) == Complex{-rp100 - rp300, 0});
  CHECK(m(0, 2) == kImag * g13);
  CHECK(m(1, 2) == kImag * g23);
  CHECK(m(6, 0) == -kImag * g13);

  // transcription checksum, frozen after the first full verification: each
  // coupling appears 12 times, the pump rate and sink excitation rate twice,
  // the sink relaxation rate four times (in magnitude)
  const double checksum = m.cwiseAbs().sum();
  CHECK(checksum ==
        Catch::Approx(12 * (g13 + g23) + 2 * rp100 + 4 * rm300 + 2 * rp300).margin(1e-13));
  CHECK(checksum == Catch::Approx(13.24).margin(1e-13));

  CHECK_THROWS_AS(reduced_liouvillian_matrix(1, 1, -0.1, 0, 0), std::invalid_argument);
}

TEST_CASE("closed-form matrix conserves probability") {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix m =
        reduced_liouvillian_matrix(u(rng), u(rng), u(rng), u(rng), u(rng));
    // the population rows are |100><100|, |010><010|, |001><001|, |000><000|
    for (int c = 0; c < 10; ++c)
      CHECK(std::abs(m(0, c) + m(4, c) + m(8, c) + m(9, c)) < 1e-14);
  }
}

TEST_CASE("every closed-form parameter is live") {
  const double base[5] = {0.3, 0.7, 0.11, 0.23, 0.05};
  const ComplexMatrix m0 = reduced_liouvillian_matrix(base[0], base[1], base[2], base[3], base[4]);
  for (int p = 0; p < 5; ++p) {
    double bumped[5];
    std::copy(base, base + 5, bumped);
    bumped[p] += 1e-3;
    const ComplexMatrix m1 =
        reduced_liouvillian_matrix(bumped[0], bumped[1], bumped[2], bumped[3], bumped[4]);
    CHECK((m1 - m0).cwiseAbs().maxCoeff() >= 1e-3 - 1e-15);
  }
}

TEST_CASE("closed-form kernel is one dimensional and matches the analytic state") {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const ComplexMatrix m =
        reduced_liouvillian_matrix(u(rng), u(rng), u(rng), u(rng), u(rng));
    CHECK(kernel_dimension(m) == 1);
  }

  SECTION("equal couplings give the antisymmetric pair") {
    const ComplexVector v = reduced_kernel(reduced_liouvillian_matrix(0.4, 0.4, 0.1, 0.07, 0.03));
    const double want[10] = {0.5, -0.5, 0, -0.5, 0.5, 0, 0, 0, 0, 0};
    for (int i = 0; i < 10; ++i) CHECK(std::abs(v(i) - want[i]) < 1e-10);
  }

  SECTION("general couplings reproduce the vectorized analytic state") {
    const double g13 = 0.25, g23 = 0.6;
    const ComplexVector v =
        reduced_kernel(reduced_liouvillian_matrix(g13, g23, 0.1, 0.07, 0.03));
    const double norm = std::hypot(g13, g23);
    const double psi[3] = {g23 / norm, -g13 / norm, 0.0};  // |100>, |010>, |001>
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(v(i * 3 + j) - psi[i] * psi[j]) < 1e-10);
    CHECK(std::abs(v(9)) < 1e-10);  // empty ground population
  }
}

TEST_CASE("engine agrees with the closed form") {
  SECTION("across a coupling grid") {
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const MachineConfig cfg = ideal_config(0.01 + 0.02 * i, 0.01 + 0.02 * j, 0.02, 0.015);
        CHECK(engine_vs_reduced_matrix(cfg) < 1e-12);
      }
  }
  SECTION("with a thermally occupied sink") {
    MachineConfig cfg = ideal_config(0.05, 0.08);
    cfg.mu3 = 0.4;
    cfg.T3 = 2.0;
    CHECK(engine_vs_reduced_matrix(cfg) < 1e-12);
  }
  SECTION("decoupled corner") {
    CHECK(engine_vs_reduced_matrix(ideal_config(0.0, 0.0)) < 1e-12);
  }
  SECTION("finite configs are rejected") {
    MachineConfig cfg;
    cfg.U = 5.0;
    CHECK_THROWS_AS(engine_vs_reduced_matrix(cfg), std::invalid_argument);
  }
}

TEST_CASE("limit study walks to the analytic state") {
  MachineConfig base;
  base.g13 = base.g23 = 0.05;
  base.gamma1 = base.gamma3 = 0.1;
  base.mu1 = 2.0;
  base.U = 4.0;
  const std::vector<double> scales = {1, 2, 4, 8, 16, 32};
  const auto rows = limit_convergence_study(base, scales);
  REQUIRE(rows.size() == scales.size());

  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].mu == Catch::Approx(2.0 * scales[i]));
    CHECK(rows[i].U == Catch::Approx(4.0 * scales[i] * scales[i]));
    CHECK(rows[i].residual < 1e-9);
    if (i >= 2) CHECK(rows[i].fidelity >= rows[i - 1].fidelity);  // monotone once clear of s=1
  }
  CHECK(rows.back().fidelity > 1.0 - 1e-3);
  CHECK(std::abs(rows.back().j_ss) < 1e-9);
  CHECK(rows.back().concurrence == Catch::Approx(1.0).margin(1e-3));
  CHECK(rows.back().purity_ss > 1.0 - 1e-3);

  SECTION("bad inputs") {
    CHECK_THROWS_AS(limit_convergence_study(base, {0.0}), std::invalid_argument);
    MachineConfig inf_base = base;
    inf_base.U = kInfinite;
    inf_base.mu1 = kInfinite;
    CHECK_THROWS_AS(limit_convergence_study(inf_base, {1.0}), std::invalid_argument);
  }
}

TEST_CASE("W-state steady check") {
  SECTION("equal couplings reach the equal-amplitude W state") {
    for (std::size_t n : {2, 3, 4, 5}) {
      GeneralMachineConfig g;
      g.n = n;
      g.couplings.assign(n - 1, {0.05, 0.05});
      g.gamma1 = 0.01;
      g.gamma_sink.assign(n - 1, 0.01);
      const auto report = wstate_steady_check(g);
      CHECK(report.pass);
      CHECK(report.n == n);
      CHECK(report.fidelity_w > 1.0 - 1e-10);
      CHECK(report.fidelity_general > 1.0 - 1e-10);
      CHECK(report.zero_mode_count == 1);
      CHECK(report.gap > 0.0);
      CHECK(report.residual < 1e-9);
    }
  }

  SECTION("weighted couplings: frozen overlap with the W state") {
    GeneralMachineConfig g;
    g.n = 3;
    g.couplings = {{1.0, 2.0}, {1.0, 1.0}};  // alphas (0.5, 1), beta = 2.25
    g.gamma1 = 0.1;
    g.gamma_sink = {0.2, 0.2};
    const auto report = wstate_steady_check(g);
    CHECK(report.pass);
    CHECK(report.fidelity_general > 1.0 - 1e-10);
    CHECK(report.fidelity_w == Catch::Approx(25.0 / 27.0).margin(1e-9));
  }

  SECTION("random draws") {
    std::uniform_real_distribution<double> gdist(0.02, 0.3), rdist(0.005, 0.1);
    for (std::size_t n : {2, 3, 4, 5}) {
      for (int trial = 0; trial < 3; ++trial) {
        GeneralMachineConfig g;
        g.n = n;
        for (std::size_t j = 0; j + 1 < n; ++j) {
          g.couplings.push_back({gdist(rng), gdist(rng)});
          g.gamma_sink.push_back(rdist(rng));
        }
        g.gamma1 = rdist(rng);
        const auto report = wstate_steady_check(g);
        CHECK(report.pass);
        CHECK(report.fidelity_general > 1.0 - 1e-10);
      }
    }
  }

  SECTION("bad inputs") {
    GeneralMachineConfig g;
    g.n = 7;
    g.couplings.assign(6, {1.0, 1.0});
    g.gamma_sink.assign(6, 0.1);
    CHECK_THROWS_AS(wstate_steady_check(g), std::invalid_argument);

    GeneralMachineConfig zero;
    zero.n = 2;
    zero.couplings = {{1.0, 0.0}};  // no drain path for the target qubit
    zero.gamma_sink = {0.1};
    CHECK_THROWS_AS(wstate_steady_check(zero), std::invalid_argument);
  }
}
