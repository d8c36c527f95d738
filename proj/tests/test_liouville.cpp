#include <catch2/catch_amalgamated.hpp>

#include "qknit/liouville.hpp"
#include "test_support.hpp"

using namespace qknit;
using qknit::testing::random_density;
using qknit::testing::random_matrix;
using qknit::testing::random_unitary;

TEST_CASE("vectorize identity gives |00>+|11>") {
  auto v = vectorize(gates::identity(2));
  Vector expect(4);
  expect << 1, 0, 0, 1;
  REQUIRE((v.amps - expect).norm() == 0.0);
}

TEST_CASE("vectorize matrix unit |0><1|") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1;
  auto v = vectorize(m);
  REQUIRE(v.amps(1) == Cplx(1, 0));
  REQUIRE(v.amps.cwiseAbs().sum() == 1.0);
}

TEST_CASE("vectorize round-trips exactly") {
  std::mt19937_64 rng(7);
  // oracle: direct row-major reshape
  Matrix m = random_matrix(3, 3, rng);
  auto v = vectorize(m);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) REQUIRE(v.amps(i * 3 + j) == m(i, j));
  REQUIRE(devectorize(v) == m);
}

TEST_CASE("vectorize rejects non-square input") {
  REQUIRE_THROWS_AS(vectorize(Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("unitary_superop identity") {
  auto s = unitary_superop(gates::identity(2));
  REQUIRE((s.m - Matrix::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("unitary_superop X flips |0><0|") {
  auto s = unitary_superop(gates::pauli_x());
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 1;
  auto out = devectorize(apply(s, vectorize(rho)));
  Matrix expect = Matrix::Zero(2, 2);
  expect(1, 1) = 1;
  REQUIRE((out - expect).norm() <= 1e-14);
}

TEST_CASE("unitary_superop matches direct conjugation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    int d = 2 + int(rng() % 3);
    Matrix u = random_unitary(d, rng);
    Matrix rho = random_density(d, rng);
    auto out = devectorize(apply(unitary_superop(u), vectorize(rho)));
    REQUIRE((out - u * rho * u.adjoint()).norm() <= 1e-12);
  }
}

TEST_CASE("unitary_superop rejects non-unitary input") {
  Matrix m = 2.0 * gates::pauli_x();
  REQUIRE_THROWS_AS(unitary_superop(m), ValidationError);
}

TEST_CASE("unitary_superop is a homomorphism") {
  std::mt19937_64 rng(13);
  Matrix u = random_unitary(4, rng), v = random_unitary(4, rng);
  Matrix prod = unitary_superop(u).m * unitary_superop(v).m;
  REQUIRE((prod - unitary_superop(Matrix(u * v)).m).norm() <= 1e-12);
}

TEST_CASE("kraus_superop of a single unitary equals unitary_superop") {
  std::mt19937_64 rng(17);
  Matrix u = random_unitary(3, rng);
  auto a = kraus_superop({u});
  REQUIRE((a.m - unitary_superop(u).m).norm() <= 1e-13);
  REQUIRE(a.cptp == true);
}

TEST_CASE("depolarizing channel is CPTP") {
  double p = 0.2;
  std::vector<Matrix> ks = {std::sqrt(1 - 3 * p / 4) * gates::identity(2),
                            std::sqrt(p / 4) * gates::pauli_x(),
                            std::sqrt(p / 4) * gates::pauli_y(),
                            std::sqrt(p / 4) * gates::pauli_z()};
  auto s = kraus_superop(ks);
  REQUIRE(s.cptp == true);
  REQUIRE(is_cptp(s));
}

TEST_CASE("trace-decreasing Kraus set flagged non-CPTP") {
  Matrix k = Matrix::Zero(2, 2);
  k(0, 0) = 1;
  auto s = kraus_superop({k});
  REQUIRE(s.cptp == false);
}

TEST_CASE("kraus_superop rejects shape mismatch") {
  REQUIRE_THROWS_AS(kraus_superop({gates::identity(2), gates::identity(3)}), DimensionError);
}

TEST_CASE("CPTP maps preserve trace of density inputs") {
  std::mt19937_64 rng(19);
  double p = 0.37;
  auto s = kraus_superop({std::sqrt(1 - p) * gates::identity(2),
                          std::sqrt(p) * gates::pauli_z()});
  for (int trial = 0; trial < 10; ++trial) {
    auto out = apply(s, vectorize(random_density(2, rng)));
    REQUIRE(std::abs(trace_of(out) - Cplx(1, 0)) <= 1e-10);
  }
}

TEST_CASE("apply identity leaves state unchanged") {
  std::mt19937_64 rng(23);
  auto v = vectorize(random_density(4, rng));
  Space s{{Party::A, 2}, {Party::B, 2}};
  auto out = apply(identity_superop(s), v);
  REQUIRE((out.amps - v.amps).norm() == 0.0);
}

TEST_CASE("partial trace of a Bell pair is maximally mixed") {
  Vector bell(4);
  bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
  Matrix rho = bell * bell.adjoint();
  Space s{{Party::A, 2}, {Party::B, 2}};
  auto red = partial_trace(vectorize(rho), s, {true, false});
  REQUIRE((devectorize(red) - 0.5 * gates::identity(2)).norm() <= 1e-14);
}

TEST_CASE("tensor of superoperators matches two-qubit conjugation") {
  std::mt19937_64 rng(29);
  auto sx = unitary_superop(gates::pauli_x(), single_space(2, Party::A));
  auto sz = unitary_superop(gates::pauli_z(), single_space(2, Party::B));
  auto st = tensor(sx, sz);
  Matrix rho = kron(random_density(2, rng), random_density(2, rng));
  Matrix u = kron(gates::pauli_x(), gates::pauli_z());
  auto out = devectorize(apply(st, vectorize(rho)));
  REQUIRE((out - u * rho * u.adjoint()).norm() <= 1e-12);
  REQUIRE(st.in_space.size() == 2);
}

TEST_CASE("tensor against generic random superoperators") {
  std::mt19937_64 rng(31);
  auto s1 = kraus_superop({random_unitary(2, rng)});
  auto s2 = kraus_superop({random_unitary(3, rng)});
  auto st = tensor(s1, s2);
  Matrix rho1 = random_density(2, rng), rho2 = random_density(3, rng);
  auto out = devectorize(apply(st, vectorize(kron(rho1, rho2))));
  Matrix e1 = devectorize(apply(s1, vectorize(rho1)));
  Matrix e2 = devectorize(apply(s2, vectorize(rho2)));
  REQUIRE((out - kron(e1, e2)).norm() <= 1e-12);
}

TEST_CASE("choi state of the identity channel is separable across the cut") {
  Space s{{Party::A, 2}, {Party::B, 2}};
  auto choi = choi_state(identity_superop(s));
  REQUIRE(std::abs(purity(choi.state) - 1.0) <= 1e-10);
  // product of two Bell pairs across (A,RA)|(B,RB): reduced state on the A side is pure
  std::vector<bool> keep;
  for (const auto& f : choi.space) keep.push_back(on_side_a(f.party));
  auto red = partial_trace(choi.state, choi.space, keep);
  REQUIRE(std::abs(purity(red) - 1.0) <= 1e-10);
}

TEST_CASE("choi state of CNOT is pure") {
  Space s{{Party::A, 2}, {Party::B, 2}};
  auto choi = choi_state(unitary_superop(gates::cnot(), s));
  REQUIRE(std::abs(purity(choi.state) - 1.0) <= 1e-10);
  REQUIRE(std::abs(std::real(trace_of(choi.state)) - 1.0) <= 1e-10);
}

TEST_CASE("choi state of SWAP has uniform Schmidt coefficients across the cut") {
  Space s{{Party::A, 2}, {Party::B, 2}};
  auto choi = choi_state(unitary_superop(gates::swap_gate(), s));
  Vector ket = pure_state_ket(choi.state);
  // dense SVD oracle: regroup the ket into (A,RA) x (B,RB) and read singular values
  Indexer idx(choi.space);  // [A, B, RA, RB]
  Matrix m(4, 4);
  for (int flat = 0; flat < 16; ++flat) {
    auto t = idx.unpack(flat);
    m(t[0] * 2 + t[2], t[1] * 2 + t[3]) = ket(flat);
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  for (int k = 0; k < 4; ++k) REQUIRE(std::abs(svd.singularValues()(k) - 0.5) <= 1e-10);
}

TEST_CASE("choi state of a CPTP map is PSD with trace 1") {
  double p = 0.25;
  auto dep = kraus_superop({std::sqrt(1 - 3 * p / 4) * gates::identity(2),
                            std::sqrt(p / 4) * gates::pauli_x(),
                            std::sqrt(p / 4) * gates::pauli_y(),
                            std::sqrt(p / 4) * gates::pauli_z()});
  dep.in_space = dep.out_space = Space{{Party::A, 2}};
  auto channel = tensor(dep, identity_superop(Space{{Party::B, 2}}));
  auto choi = choi_state(channel);
  REQUIRE(std::abs(std::real(trace_of(choi.state)) - 1.0) <= 1e-10);
  Eigen::SelfAdjointEigenSolver<Matrix> es(devectorize(choi.state));
  REQUIRE(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("insert and contract are mutually consistent") {
  std::mt19937_64 rng(37);
  Space s{{Party::A, 2}};
  Space anc{{Party::AncA, 2}};
  Matrix rho_anc = random_density(2, rng);
  auto ins = insert_state_superop(s, 1, anc, rho_anc);
  auto v = vectorize(random_density(2, rng));
  auto big = apply(ins, v);
  REQUIRE((devectorize(big) - kron(devectorize(v), rho_anc)).norm() <= 1e-13);
  // contracting the ancilla with the identity effect recovers the partial trace
  auto back = apply(povm_branch_superop(ins.out_space, 1, 1, gates::identity(2)), big);
  REQUIRE((back.amps - v.amps).norm() <= 1e-12);
}

TEST_CASE("povm branch contraction reproduces Born probabilities") {
  std::mt19937_64 rng(41);
  Space s{{Party::A, 2}, {Party::AncA, 2}};
  Matrix rho = random_density(4, rng);
  Matrix e0 = Matrix::Zero(2, 2);
  e0(0, 0) = 1;
  auto out = apply(povm_branch_superop(s, 1, 1, e0), vectorize(rho));
  // oracle: Tr_anc[(I ⊗ |0><0|) rho]
  Matrix proj = kron(gates::identity(2), e0);
  Matrix cond = proj * rho * proj;
  Matrix expect = Matrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a) expect(i, j) += cond(i * 2 + a, j * 2 + a);
  REQUIRE((devectorize(out) - expect).norm() <= 1e-12);
}
