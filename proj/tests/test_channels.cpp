#include <catch2/catch_amalgamated.hpp>

#include "support/oracles.hpp"

using namespace locq;

namespace {

KrausSet amplitude_damping_kraus(double gamma) {
  CMatrix k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
  k1 << 0, std::sqrt(gamma), 0, 0;
  return KrausSet(2, {k0, k1});
}

DensityMatrix pure(const CVector& v) { return DensityMatrix(v * v.adjoint()); }

} // namespace

TEST_CASE("kraus_to_stiefel stacks and validates") {
  SECTION("identity channel") {
    const KrausSet id(2, {CMatrix::Identity(2, 2)});
    const StiefelPoint s = kraus_to_stiefel(id);
    CHECK(s.n() == 8);
    CHECK(s.l() == 2);
    CHECK(max_abs(s.matrix().topRows(2) - CMatrix::Identity(2, 2)) == 0.0);
    CHECK(max_abs(s.matrix().bottomRows(6)) == 0.0);
    CHECK(s.feasibility_residual() <= 1e-12);
  }
  SECTION("unitary channel {X}") {
    const KrausSet flip(2, {pauli_x()});
    CHECK(kraus_to_stiefel(flip).feasibility_residual() <= 1e-12);
  }
  SECTION("amplitude damping pair") {
    const StiefelPoint s = kraus_to_stiefel(amplitude_damping_kraus(0.3));
    CHECK(s.feasibility_residual() <= 1e-12);
  }
  SECTION("trace-preservation violation throws") {
    CHECK_THROWS_AS(KrausSet(2, {CMatrix(0.5 * CMatrix::Identity(2, 2))}), std::invalid_argument);
  }
}

TEST_CASE("stiefel_to_kraus round trips") {
  Rng rng(31);
  const StiefelPoint s = random_point(8, 2, rng);
  const KrausSet k = stiefel_to_kraus(s);
  REQUIRE(k.operators.size() == 4);
  for (size_t i = 0; i < 4; ++i)
    CHECK(max_abs(k.operators[i] - s.matrix().middleRows(static_cast<Index>(i) * 2, 2)) == 0.0);
  CHECK(max_abs(kraus_to_stiefel(k).matrix() - s.matrix()) == 0.0);

  SECTION("identity-channel point decomposes to I plus zero blocks") {
    const KrausSet id = stiefel_to_kraus(kraus_to_stiefel(KrausSet(2, {CMatrix::Identity(2, 2)})));
    CHECK(max_abs(id.operators[0] - CMatrix::Identity(2, 2)) == 0.0);
    for (size_t i = 1; i < 4; ++i) CHECK(max_abs(id.operators[i]) == 0.0);
  }
  SECTION("wrong shape throws") {
    CHECK_THROWS_AS(stiefel_to_kraus(random_point(6, 2, rng)), std::invalid_argument);
  }
}

TEST_CASE("published Kraus table satisfies completeness at print precision") {
  // Operators printed to two decimals; the completeness defect reflects that.
  using row = std::array<Complex, 2>;
  auto m = [](row r0, row r1) {
    CMatrix k(2, 2);
    k << r0[0], r0[1], r1[0], r1[1];
    return k;
  };
  const Complex j(0, 1);
  const std::vector<CMatrix> ka = {
      m({0.99 + 0.07 * j, 0.0}, {0.0, 0.99 + 0.08 * j}),
      m({0.06 - 0.08 * j, 0.0}, {0.0, 0.06 - 0.07 * j}),
      m({0.05 + 0.04 * j, 0.0}, {0.0, 0.05 + 0.04 * j}),
      m({-0.01 + 0.03 * j, 0.0}, {0.0, -0.01 + 0.02 * j})};
  const std::vector<CMatrix> kb = {
      m({0.0, -0.04 + 0.07 * j}, {0.06 - 0.10 * j, 0.73 + 0.07 * j}),
      m({0.0, -0.27 - 0.50 * j}, {0.41 + 0.75 * j, 0.08 - 0.09 * j}),
      m({0.0, -0.10 + 0.21 * j}, {0.15 - 0.31 * j, 0.04 + 0.05 * j}),
      m({0.0, 0.07 + 0.23 * j}, {-0.11 - 0.34 * j, -0.01 - 0.02 * j})};
  for (const auto& set : {ka, kb}) {
    CMatrix completeness = CMatrix::Zero(2, 2);
    for (const CMatrix& k : set) completeness += k.adjoint() * k;
    CHECK(max_abs(completeness - CMatrix::Identity(2, 2)) <= 1e-2);
  }
}

TEST_CASE("build_sigma block structure") {
  SECTION("scalar case is the identity") {
    const auto perm = build_sigma(1, 1, 1, 1);
    REQUIRE(perm.size() == 1);
    CHECK(perm[0] == 0);
  }
  SECTION("sigma is a bijection") {
    const auto perm = build_sigma(8, 2, 8, 2);
    const CMatrix p = permutation_matrix(perm);
    CHECK(max_abs(p * p.adjoint() - CMatrix::Identity(64, 64)) == 0.0);
  }
  SECTION("stacked blocks equal the Kronecker products, 2x2") {
    Rng rng(32);
    const StiefelPoint pa = random_point(8, 2, rng);
    const StiefelPoint pb = random_point(8, 2, rng);
    const LocalChannelPoint c(pa, pb);
    const KrausSet ka = stiefel_to_kraus(c.s_a());
    const KrausSet kb = stiefel_to_kraus(c.s_b());
    const CMatrix stacked = c.stacked_matrix();
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j) {
        const CMatrix block = stacked.middleRows((i * 4 + j) * 4, 4);
        CHECK(max_abs(block - kron(ka.operators[static_cast<size_t>(i)],
                                   kb.operators[static_cast<size_t>(j)])) <= 1e-13);
      }
  }
  SECTION("stacked blocks equal the Kronecker products, 2x3") {
    Rng rng(33);
    const StiefelPoint pa = random_point(8, 2, rng);
    const StiefelPoint pb = random_point(27, 3, rng);
    const LocalChannelPoint c(pa, pb);
    const KrausSet ka = stiefel_to_kraus(c.s_a());
    const KrausSet kb = stiefel_to_kraus(c.s_b());
    const CMatrix stacked = c.stacked_matrix();
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 9; ++j) {
        const CMatrix block = stacked.middleRows((i * 9 + j) * 6, 6);
        CHECK(max_abs(block - kron(ka.operators[static_cast<size_t>(i)],
                                   kb.operators[static_cast<size_t>(j)])) <= 1e-13);
      }
  }
  SECTION("inconsistent dimensions throw") {
    CHECK_THROWS_AS(build_sigma(8, 2, 9, 2), std::invalid_argument);
  }
}

TEST_CASE("apply_channel") {
  Rng rng(34);
  const DensityMatrix rho = random_density_matrix(2, rng);

  SECTION("identity channel preserves the state") {
    const KrausSet id(2, {CMatrix::Identity(2, 2)});
    CHECK(max_abs(apply_channel(id, rho).matrix() - rho.matrix()) <= 1e-14);
  }
  SECTION("sink channel forces |0><0|") {
    CMatrix k0 = CMatrix::Zero(2, 2), k1 = CMatrix::Zero(2, 2);
    k0(0, 0) = 1.0; // |0><0|
    k1(0, 1) = 1.0; // |0><1|
    const KrausSet sink(2, {k0, k1});
    const CMatrix out = apply_channel(sink, rho).matrix();
    CMatrix expected = CMatrix::Zero(2, 2);
    expected(0, 0) = 1.0;
    CHECK(max_abs(out - expected) <= 1e-14);
  }
  SECTION("full amplitude damping decays |1><1| to |0><0|") {
    const DensityMatrix one = pure(basis_ket(2, 1));
    const CMatrix out = apply_channel(amplitude_damping_kraus(1.0), one).matrix();
    CHECK(out(0, 0).real() == Catch::Approx(1.0));
  }
}

TEST_CASE("apply_local_channel") {
  Rng rng(35);

  SECTION("identity (x) identity preserves the state") {
    const KrausSet id(2, {CMatrix::Identity(2, 2)});
    const LocalChannelPoint c(kraus_to_stiefel(id), kraus_to_stiefel(id));
    const DensityMatrix rho = random_density_matrix(4, rng);
    CHECK(max_abs(apply_local_channel(c, rho).matrix() - rho.matrix()) <= 1e-13);
  }
  SECTION("local unitaries preserve entanglement of a Bell state") {
    const StiefelPoint ua = random_point(2, 2, rng); // a random unitary
    const StiefelPoint ub = random_point(2, 2, rng);
    const LocalChannelPoint c(kraus_to_stiefel(KrausSet(2, {ua.matrix()})),
                              kraus_to_stiefel(KrausSet(2, {ub.matrix()})));
    const DensityMatrix out = apply_local_channel(c, bell_state(Bell::PhiPlus));
    CHECK(out.purity() == Catch::Approx(1.0).margin(1e-12));
    CHECK(concurrence(out) == Catch::Approx(1.0).margin(1e-10));
  }
  SECTION("equals the flattened product Kraus family") {
    for (int trial = 0; trial < 10; ++trial) {
      const StiefelPoint c_fa = random_point(8, 2, rng);
      const StiefelPoint c_fb = random_point(8, 2, rng);
      const LocalChannelPoint c(c_fa, c_fb);
      const KrausSet ka = stiefel_to_kraus(c.s_a());
      const KrausSet kb = stiefel_to_kraus(c.s_b());
      std::vector<CMatrix> flat;
      for (const CMatrix& a : ka.operators)
        for (const CMatrix& b : kb.operators) flat.push_back(kron(a, b));
      const KrausSet joint(4, std::move(flat));
      const DensityMatrix rho = random_density_matrix(4, rng);
      CHECK(max_abs(apply_local_channel(c, rho).matrix() - apply_channel(joint, rho).matrix()) <=
            1e-12);
    }
  }
  SECTION("CPTP outputs on random inputs") {
    const StiefelPoint c_fa = random_point(8, 2, rng);
    const StiefelPoint c_fb = random_point(8, 2, rng);
    const LocalChannelPoint c(c_fa, c_fb);
    for (int trial = 0; trial < 20; ++trial) {
      const DensityMatrix out = apply_local_channel(c, random_density_matrix(4, rng));
      CHECK(std::abs(out.matrix().trace().real() - 1.0) <= 1e-9);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(out.matrix(), Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    }
  }
}

TEST_CASE("apply_postselected") {
  Rng rng(36);
  const StiefelPoint c_fa = random_point(8, 2, rng);
  const StiefelPoint c_fb = random_point(8, 2, rng);
  const LocalChannelPoint c(c_fa, c_fb);
  const DensityMatrix rho = random_density_matrix(4, rng);

  SECTION("keeping every block reproduces the channel with probability 1") {
    const auto [state, prob] = apply_postselected(c, Selector::keep_all(16, 4), rho);
    CHECK(prob == Catch::Approx(1.0).margin(1e-10));
    CHECK(max_abs(state.matrix() - apply_local_channel(c, rho).matrix()) <= 1e-12);
  }
  SECTION("keeping no block is measure zero") {
    CHECK_THROWS_AS(apply_postselected(c, Selector(16, 4, {}), rho), MeasureZeroError);
  }
  SECTION("POVM element oracle for a single kept block") {
    const double s = 1.0 / std::sqrt(2.0);
    const CMatrix frag = s * CMatrix::Identity(2, 2);
    const KrausSet half(2, {frag, frag});
    const LocalChannelPoint iso(kraus_to_stiefel(half), kraus_to_stiefel(half));
    const auto [state, prob] = apply_postselected(iso, Selector::keep_block(16, 4, 0), rho);
    const CMatrix e1 = frag.adjoint() * frag;
    const double expected = (kron(e1, e1) * rho.matrix()).trace().real();
    CHECK(std::abs(prob - expected) <= 1e-13);
    CHECK(max_abs(state.matrix() - rho.matrix()) <= 1e-12); // proportional Kraus leaves rho intact
  }
  SECTION("selectors over a partition recompose the full channel") {
    const Selector first(16, 4, {0, 1, 2, 3, 4});
    const Selector second(16, 4, {5, 6, 7, 8, 9, 10});
    const Selector third(16, 4, {11, 12, 13, 14, 15});
    CMatrix weighted = CMatrix::Zero(4, 4);
    for (const Selector* omega : {&first, &second, &third}) {
      const auto [state, prob] = apply_postselected(c, *omega, rho);
      weighted += prob * state.matrix();
    }
    CHECK(max_abs(weighted - apply_local_channel(c, rho).matrix()) <= 1e-10);
  }
  SECTION("selector shape mismatch throws") {
    CHECK_THROWS_AS(apply_postselected(c, Selector::keep_all(4, 4), rho), std::invalid_argument);
  }
}

TEST_CASE("selector omega matrix structure") {
  const Selector omega = Selector::keep_block(4, 2, 1);
  const CMatrix m = omega.omega_matrix();
  CHECK(m.rows() == 8);
  CHECK(max_abs(m * m - m) == 0.0);       // idempotent
  CHECK(max_abs(m - m.adjoint()) == 0.0); // diagonal 0/1
  CHECK(m(2, 2).real() == 1.0);
  CHECK(m(3, 3).real() == 1.0);
  CHECK(m.diagonal().sum().real() == 2.0);
}
