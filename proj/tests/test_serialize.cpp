#include <catch2/catch_amalgamated.hpp>

#include "qknit/serialize.hpp"
#include "test_support.hpp"

using namespace qknit;
using qknit::testing::random_matrix;
using qknit::testing::random_unitary;

TEST_CASE("matrix JSON round trip") {
  std::mt19937_64 rng(103);
  Matrix m = random_matrix(3, 5, rng);
  Matrix back = matrix_from_json(matrix_to_json(m));
  REQUIRE((m - back).norm() == 0.0);
}

TEST_CASE("space and resource JSON round trips") {
  Space s{{Party::A, 2}, {Party::AncB, 3}, {Party::RefA, 4}};
  Space back = space_from_json(space_to_json(s));
  REQUIRE(back.size() == s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    REQUIRE(back[i].party == s[i].party);
    REQUIRE(back[i].dim == s[i].dim);
  }
  for (const auto& r : {ResourceState::separable(), ResourceState::bell(3),
                        ResourceState::psi(0.4), ResourceState::pure_schmidt({0.8, 0.6})}) {
    auto rb = resource_from_json(resource_to_json(r));
    REQUIRE(rb.kind == r.kind);
    auto c1 = r.schmidt_coefficients(), c2 = rb.schmidt_coefficients();
    REQUIRE(c1.size() == c2.size());
    for (size_t i = 0; i < c1.size(); ++i) REQUIRE(c1[i] == c2[i]);
  }
}

TEST_CASE("gate-cut config JSON round trip preserves the reconstruction") {
  std::mt19937_64 rng(107);
  Matrix u = random_unitary(4, rng);
  for (const auto& c : {build_bell_gate_cut(u, 2, 2), build_lo_gate_cut(u, 2, 2)}) {
    auto back = config_from_json(config_to_json(c));
    REQUIRE(back.kind == c.kind);
    REQUIRE(back.gamma == c.gamma);
    REQUIRE(back.terms.size() == c.terms.size());
    REQUIRE((reconstruct_superop(back).m - reconstruct_superop(c).m).norm() <= 1e-12);
  }
}

TEST_CASE("wire-cut config JSON round trip") {
  // teleportation exercises measurement corrections, the separable protocol
  // exercises signed instrument branches
  for (const auto& c : {build_wire_cut(ResourceState::bell(2), 2),
                        build_wire_cut(ResourceState::separable(), 2)}) {
    auto back = config_from_json(config_to_json(c));
    REQUIRE((reconstruct_superop(back).m - reconstruct_superop(c).m).norm() <= 1e-12);
    REQUIRE(back.out_space[0].party == Party::B);
    REQUIRE(back.locality == "LOCC");
  }
  // non-constructive configs survive too
  auto nc = build_wire_cut(ResourceState::separable(), 3);
  auto back = config_from_json(config_to_json(nc));
  REQUIRE_FALSE(back.constructive);
  REQUIRE(back.gamma == nc.gamma);
  REQUIRE(back.note == nc.note);
}

TEST_CASE("result serializers expose the expected fields") {
  auto c = build_bell_gate_cut(gates::cnot(), 2, 2);
  Matrix rho = 0.25 * gates::identity(4);
  auto est = mc_estimate(c, rho, kron(gates::pauli_z(), gates::pauli_z()), 100, 1);
  auto je = estimate_to_json(est);
  REQUIRE(je.at("shots") == 100);
  REQUIRE(je.at("gamma") == c.gamma);
  REQUIRE(je.at("seed") == 1);
  std::int64_t total = 0;
  for (const auto& [key, n] : je.at("branch_counts").items()) total += n.get<std::int64_t>();
  REQUIRE(total == 100);

  auto jb = bounds_to_json(bound_set(gates::cnot(), 2, 2, ResourceState::psi(0.6)));
  REQUIRE(std::abs(jb.at("upper_bell").get<double>() - 2.0) <= 1e-10);
  REQUIRE(std::abs(jb.at("upper_psi_r").get<double>() - 2.25) <= 1e-10);
  auto jb2 = bounds_to_json(bound_set(gates::cnot(), 2, 2));
  REQUIRE(jb2.at("upper_psi_r").is_null());
  REQUIRE_FALSE(jb2.at("reason").get<std::string>().empty());

  auto ja = audit_to_json(locality_audit(c));
  REQUIRE(ja.at("class") == "LO");
  auto jc = accounting_to_json(bell_accounting(operator_schmidt(gates::cnot(), 2, 2)));
  REQUIRE(std::abs(jc.at("p_bell").get<double>() - 0.5) <= 1e-10);
  REQUIRE(std::abs(jc.at("expected_bells").get<double>() - 2.0) <= 1e-10);
}
