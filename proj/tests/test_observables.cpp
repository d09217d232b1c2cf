#include "qtm/observables.hpp"

#include "qtm/liouvillian.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace qtm;

namespace {

std::mt19937 rng(7120);

ComplexVector random_pure(Eigen::Index d) {
  std::normal_distribution<double> n;
  ComplexVector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex{n(rng), n(rng)};
  v.normalize();
  return v;
}

Machine ideal_machine(double g13, double g23, double gamma = 0.01) {
  MachineConfig c;
  c.g13 = g13;
  c.g23 = g23;
  c.U = kInfinite;
  c.mu1 = kInfinite;
  c.gamma1 = gamma;
  c.gamma3 = gamma;
  return build_three_qubit_machine(c);
}

ComplexMatrix basis_density(Eigen::Index d, Eigen::Index i) {
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  rho(i, i) = 1.0;
  return rho;
}

ComplexMatrix pair_state(const Machine& m, const ComplexMatrix& rho) {
  const ComplexMatrix full = m.restricted() ? expand_operator(rho, m.basis, 3) : rho;
  return partial_trace(full, {0, 1}, 3);
}

}  // namespace

TEST_CASE("target state amplitudes") {
  const TargetState s = singlet();
  CHECK(s.amplitudes(2) == Complex{1.0 / std::sqrt(2.0), 0});
  CHECK(s.amplitudes(1) == Complex{-1.0 / std::sqrt(2.0), 0});
  CHECK(s.amplitudes.norm() == Catch::Approx(1.0));

  const TargetState t = psi_ss(1.0, 2.0);
  CHECK(t.amplitudes(0b100).real() == Catch::Approx(2.0 / std::sqrt(5.0)));
  CHECK(t.amplitudes(0b010).real() == Catch::Approx(-1.0 / std::sqrt(5.0)));
  CHECK(t.amplitudes.norm() == Catch::Approx(1.0));

  // one-sided coupling: the surviving component is made real positive
  CHECK(psi_ss(1.0, 0.0).amplitudes(0b010) == Complex{1, 0});
  CHECK_THROWS_AS(psi_ss(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("W-family amplitudes") {
  const TargetState w = general_w({0.5, 1.0});  // n = 3, beta = 2.25
  REQUIRE(w.amplitudes.size() == 32);
  CHECK(w.amplitudes(0b10000).real() == Catch::Approx(2.0 / 3.0));
  CHECK(w.amplitudes(0b01000).real() == Catch::Approx(-1.0 / 3.0));
  CHECK(w.amplitudes(0b00100).real() == Catch::Approx(-2.0 / 3.0));
  CHECK(w.amplitudes.norm() == Catch::Approx(1.0));

  const TargetState w3 = w_state(3);
  CHECK(w3.label == "w_3");
  CHECK(w3.amplitudes(0b10000).real() == Catch::Approx(1.0 / std::sqrt(3.0)));
  CHECK(w3.amplitudes(0b01000).real() == Catch::Approx(-1.0 / std::sqrt(3.0)));
  CHECK(w3.amplitudes(0b00100).real() == Catch::Approx(-1.0 / std::sqrt(3.0)));
  CHECK_THROWS_AS(w_state(1), std::invalid_argument);

  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> alphas = {u(rng), u(rng), u(rng)};  // n = 4
    const TargetState g = general_w(alphas);
    CHECK(g.amplitudes.norm() == Catch::Approx(1.0).epsilon(1e-12));
    const Complex lead = g.amplitudes(0b1000000);
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      const Complex a = g.amplitudes(Eigen::Index{1} << (5 - j));
      CHECK(std::abs(a / lead + alphas[j]) < 1e-12);
    }
  }
}

TEST_CASE("restricting targets to a machine basis") {
  const auto basis = single_excitation_basis(3);
  const TargetState t = restrict_to_basis(psi_ss(0.3, 0.7), basis);
  REQUIRE(t.amplitudes.size() == 4);
  CHECK(t.amplitudes(0) == Complex{0, 0});
  CHECK(t.amplitudes(1).real() == Catch::Approx(0.7 / std::hypot(0.3, 0.7)));
  CHECK(t.amplitudes(2).real() == Catch::Approx(-0.3 / std::hypot(0.3, 0.7)));
  CHECK(t.amplitudes(3) == Complex{0, 0});

  const std::vector<BasisState> missing = {BasisState({0, 0, 0}), BasisState({1, 0, 0}),
                                           BasisState({0, 0, 1})};
  CHECK_THROWS_AS(restrict_to_basis(psi_ss(0.3, 0.7), missing), std::invalid_argument);
}

TEST_CASE("concurrence on reference states") {
  const TargetState s = singlet();
  const ComplexMatrix bell = s.amplitudes * s.amplitudes.adjoint();
  CHECK(concurrence_paper(bell) == Catch::Approx(1.0));
  CHECK(concurrence_wootters(bell) == Catch::Approx(1.0));

  const ComplexMatrix mixed = 0.25 * ComplexMatrix::Identity(4, 4);
  CHECK(concurrence_paper(mixed) == 0.0);
  CHECK(concurrence_wootters(mixed) < 1e-12);

  const ComplexMatrix product = basis_density(4, 2);  // |10><10|
  CHECK(concurrence_paper(product) == 0.0);
  CHECK(concurrence_wootters(product) < 1e-12);

  CHECK_THROWS_AS(concurrence_paper(ComplexMatrix::Zero(8, 8)), std::invalid_argument);
}

TEST_CASE("spin-flip concurrence against the pure-state closed form") {
  // for |psi> = a|00> + b|01> + c|10> + d|11>, C = 2|ad - bc|
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexVector v = random_pure(4);
    const double expected = 2.0 * std::abs(v(0) * v(3) - v(1) * v(2));
    CHECK(concurrence_wootters(v * v.adjoint()) == Catch::Approx(expected).margin(1e-10));
  }
}

TEST_CASE("pair concurrence of the analytic steady state is sin(2 theta)") {
  for (double theta : {0.2, 0.5, M_PI / 4, 1.1, 1.4}) {
    const TargetState t = psi_ss(std::sin(theta), std::cos(theta));
    const ComplexMatrix rho = t.amplitudes * t.amplitudes.adjoint();
    const ComplexMatrix pair = partial_trace(rho, {0, 1}, 3);
    CHECK(concurrence_paper(pair) == Catch::Approx(std::sin(2 * theta)));
    CHECK(concurrence_wootters(pair) == Catch::Approx(std::sin(2 * theta)).margin(1e-9));
  }
}

TEST_CASE("machine steady states: closed form agrees with the spin flip") {
  SECTION("ideal, asymmetric couplings give C = 0.8") {
    const Machine m = ideal_machine(1.0, 2.0);
    const ComplexMatrix rho = steady_state(build_liouvillian(m));
    const ComplexMatrix pair = pair_state(m, rho);
    CHECK(concurrence_paper(pair) == Catch::Approx(0.8).margin(1e-9));
    CHECK(concurrence_wootters(pair) == Catch::Approx(0.8).margin(1e-9));
  }
  SECTION("finite machines across the bias/interaction plane") {
    for (auto [mu, U] : {std::pair{8.0, 15.0}, {15.0, 15.0}, {3.0, 5.0}}) {
      MachineConfig c;
      c.g13 = c.g23 = 0.05;
      c.gamma1 = c.gamma3 = 0.1;
      c.U = U;
      c.mu1 = mu;
      const Machine m = build_three_qubit_machine(c);
      const ComplexMatrix pair = pair_state(m, steady_state(build_liouvillian(m)));
      CHECK(std::abs(concurrence_paper(pair) - concurrence_wootters(pair)) < 1e-9);
    }
  }
}

TEST_CASE("fidelity and purity basics") {
  const TargetState s = singlet();
  const ComplexMatrix bell = s.amplitudes * s.amplitudes.adjoint();
  CHECK(fidelity_pure(bell, s) == Catch::Approx(1.0));
  const ComplexMatrix orth = basis_density(4, 0);
  CHECK(fidelity_pure(orth, s) == Catch::Approx(0.0).margin(1e-15));
  CHECK(fidelity_pure(0.25 * ComplexMatrix::Identity(4, 4), s) == Catch::Approx(0.25));
  CHECK_THROWS_AS(fidelity_pure(ComplexMatrix::Identity(8, 8), s), std::invalid_argument);

  CHECK(purity(bell) == Catch::Approx(1.0));
  CHECK(purity(0.25 * ComplexMatrix::Identity(4, 4)) == Catch::Approx(0.25));
}

TEST_CASE("energy currents from the ground state") {
  const Machine m = ideal_machine(0.05, 0.05);
  const ComplexMatrix ground = basis_density(4, 0);
  const auto cur = energy_currents(ground, m.hamiltonian, m.jumps);

  const double nf = fermi_dirac(1.0, 0.0, 1.0);
  CHECK(cur.q1 == Catch::Approx(0.01 * 1.0));       // pump injects gamma1 * eps
  CHECK(cur.q3 == Catch::Approx(0.01 * nf * 1.0));  // sink absorbs at the thermal rate
  CHECK(cur.j == Catch::Approx(0.5 * (cur.q1 - cur.q3)));
  CHECK(cur.j > 0.0);
}

TEST_CASE("energy currents vanish with the reservoirs") {
  MachineConfig c;
  c.U = 5.0;
  c.gamma1 = 0.0;
  c.gamma3 = 0.0;
  const Machine m = build_three_qubit_machine(c);
  CHECK(m.jumps.empty());
  const auto cur = energy_currents(basis_density(8, 0), m.hamiltonian, m.jumps);
  CHECK(cur.q1 == 0.0);
  CHECK(cur.q3 == 0.0);
  CHECK(cur.j == 0.0);

  c.gamma3 = 0.1;  // left reservoir absent, right active
  c.g13 = c.g23 = 0.05;  // couplings keep the kernel one dimensional
  const Machine right_only = build_three_qubit_machine(c);
  const auto cur2 = energy_currents(steady_state(build_liouvillian(right_only)),
                                    right_only.hamiltonian, right_only.jumps);
  CHECK(cur2.q1 == 0.0);
  CHECK(std::abs(cur2.q3) < 1e-10);  // thermal equilibrium with a single bath

  CHECK_THROWS_AS(energy_currents(0.25 * ComplexMatrix::Identity(4, 4), m.hamiltonian, m.jumps),
                  std::invalid_argument);
}

TEST_CASE("dark state check") {
  const Machine m = ideal_machine(0.3, 0.7);
  SECTION("the analytic steady state is dark") {
    const TargetState t = restrict_to_basis(psi_ss(0.3, 0.7), m.basis);
    const auto report = dark_state_check(t, m.hamiltonian, m.jumps);
    CHECK(report.pass);
    REQUIRE(report.jump_actions.size() == 3);
    for (const auto& action : report.jump_actions) {
      CHECK(action.annihilates);
      CHECK(action.norm < 1e-10);
    }
    CHECK(report.eigenvalue.real() == Catch::Approx(1.0));  // single-excitation energy
    CHECK(std::abs(report.eigenvalue.imag()) < 1e-12);
    CHECK(report.eigen_residual < 1e-10);
  }
  SECTION("an excited sink is not dark") {
    ComplexVector v = ComplexVector::Zero(4);
    v(3) = 1.0;
    const auto report = dark_state_check(TargetState{v, "sink"}, m.hamiltonian, m.jumps);
    CHECK_FALSE(report.pass);
    bool relax_acts = false;
    for (const auto& action : report.jump_actions)
      if (action.direction == Direction::kRelax && action.norm > 0.9) relax_acts = true;
    CHECK(relax_acts);
  }
  SECTION("a mismatched superposition survives the jumps but fails the eigen test") {
    const TargetState wrong = restrict_to_basis(psi_ss(2.0, 1.0), m.basis);
    const auto report = dark_state_check(wrong, m.hamiltonian, m.jumps);
    CHECK_FALSE(report.pass);
    for (const auto& action : report.jump_actions) CHECK(action.annihilates);
    CHECK(report.eigen_residual > 0.1);
  }
  SECTION("the W state is dark for the larger machine") {
    GeneralMachineConfig g;
    g.n = 4;
    g.couplings.assign(3, {0.05, 0.05});
    g.gamma1 = 0.01;
    g.gamma_sink.assign(3, 0.01);
    const Machine wm = build_general_machine(g);
    const TargetState t = restrict_to_basis(w_state(4), wm.basis);
    CHECK(dark_state_check(t, wm.hamiltonian, wm.jumps).pass);
  }
}
