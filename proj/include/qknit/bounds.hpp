#pragma once

// Closed-form sampling-overhead bounds for gate and wire cuts, and the
// entanglement/overhead trade-off for controlled-phase gates.

#include <cmath>
#include <optional>
#include <string>

#include "qknit/qpd.hpp"

namespace qknit {

struct BoundSet {
  std::vector<double> lambdas;  // operator Schmidt coefficients
  double l1_sq = 0;
  double l2_sq = 0;
  double lower_schmidt = 0;  // Schmidt-robustness lower bound for any pure assistance
  std::optional<double> lower_entropy;  // 2^(E(Choi) - E(resource)), when defined
  double upper_bell = 0;  // one Bell pair per cut gate
  double upper_free = 0;  // local operations, no entanglement: 2 l1^2 - l2^2
  std::optional<double> free_optimal_kak;  // 2 l1^2 - 1, KAK-like gates only
  std::optional<double> upper_psi_r;       // psi(r)-assisted overhead, when r given
  double regularized = 0;                  // per-gate overhead in the many-copy limit
  double entropy_bits = 0;  // entanglement generated across the cut, in bits
  std::string reason;       // why optional fields are absent
};

// Bounds for cutting a single bipartite unitary, optionally relative to a
// specific pure resource state and/or a psi(r) Schmidt parameter.
inline BoundSet bound_set(const LUD& lud, std::optional<ResourceState> resource = std::nullopt,
                          std::optional<double> r = std::nullopt) {
  BoundSet b;
  b.lambdas = lud.lambdas;
  double l1 = 0;
  for (double l : b.lambdas) {
    l1 += l;
    b.l2_sq += l * l;
  }
  b.l1_sq = l1 * l1;
  b.upper_bell = b.l1_sq;
  b.upper_free = 2 * b.l1_sq - b.l2_sq;
  b.regularized = b.l1_sq;
  double lam0 = b.lambdas.empty() ? 0 : b.lambdas[0];
  b.lower_schmidt = std::max(1.0, b.l1_sq - 2 * lam0 * (l1 - lam0));
  b.entropy_bits = entanglement_entropy(b.lambdas);

  if (lud.kak_like)
    b.free_optimal_kak = 2 * b.l1_sq - 1;
  else
    b.reason += "free_optimal_kak needs unitary local factors; ";

  double e_res = resource ? resource->entanglement_entropy_bits() : 0.0;
  if (b.entropy_bits >= e_res - 1e-12)
    b.lower_entropy = std::pow(2.0, b.entropy_bits - e_res);
  else
    b.reason += "entropy bound needs the resource no more entangled than the Choi state; ";

  std::optional<double> rr = r;
  if (!rr && resource && resource->kind == ResourceState::Kind::Psi) rr = resource->r;
  if (rr) {
    if (*rr < 0 || *rr > 1) throw ValidationError("bound_set: r must lie in [0,1]");
    double nu = (*rr < 1) ? 1.0 / std::sqrt(1 - *rr * *rr)
                          : std::numeric_limits<double>::infinity();
    b.upper_psi_r = b.l2_sq + std::min(nu, 2.0) * (b.l1_sq - b.l2_sq);
  } else {
    b.reason += "upper_psi_r needs a psi(r) resource or an explicit r; ";
  }
  return b;
}

inline BoundSet bound_set(const Matrix& u, int da, int db,
                          std::optional<ResourceState> resource = std::nullopt,
                          std::optional<double> r = std::nullopt) {
  return bound_set(operator_schmidt(u, da, db), resource, r);
}

// Sampling overhead for cutting a d-dimensional wire with the given resource:
// gamma = 2 / F_d - 1 with F_d the fully entangled fraction.
inline double wire_overhead(const ResourceState& res, int d) {
  if (d < 2) throw ValidationError("wire_overhead: wire dimension must be >= 2");
  double f = fully_entangled_fraction(res, d);
  if (f <= 0) throw UnsupportedError("wire_overhead: vanishing entangled fraction");
  return 2.0 / f - 1.0;
}

// Overhead for simulating a unitary directly from its Choi state:
// 2 / F_{d_U} - 1 with d_U the operator Schmidt rank. Valid only for the
// class of unitaries whose decomposition can be recovered from the Choi
// state; class membership is asserted by the caller, not checked.
inline double special_unitary_overhead(const LUD& lud, const ResourceState& res) {
  int d_u = schmidt_rank(lud.lambdas);
  if (d_u < 2) return 1.0;  // product gate: nothing to assist
  double f = fully_entangled_fraction(res, d_u);
  if (f <= 0) throw UnsupportedError("special_unitary_overhead: vanishing entangled fraction");
  return 2.0 / f - 1.0;
}

// Entanglement/overhead trade-off for cphase(theta) = diag(1,1,1,e^{i theta}).
// gamma_bell and gamma_free come from the gate's actual operator Schmidt
// values (giving 1 + |sin(theta/2)|); expected_bells_paper is the closed form
// |sin theta| + sin^2 theta, whose theta is a half-angle convention of the
// same gate. Both are reported side by side.
struct CphaseTradeoff {
  double theta = 0;
  double gamma_free = 0;            // 2 l1^2 - 1
  double gamma_bell = 0;            // l1^2 = 1 + |sin(theta/2)|
  double p_bell = 0;                // 1 - 1/l1^2
  double expected_bells_svd = 0;    // p_bell * l1^4
  double expected_bells_paper = 0;  // |sin theta| + sin^2 theta
};

inline CphaseTradeoff cphase_tradeoff(double theta) {
  CphaseTradeoff t;
  t.theta = theta;
  LUD lud = operator_schmidt(gates::cphase(theta), 2, 2);
  t.gamma_bell = lud.l1_sq();
  t.gamma_free = 2 * lud.l1_sq() - 1;
  auto acc = bell_accounting(lud);
  t.p_bell = acc.p_bell;
  t.expected_bells_svd = acc.expected_bells;
  double s = std::abs(std::sin(theta));
  t.expected_bells_paper = s + s * s;
  return t;
}

// Angle at which consuming Bell pairs stops paying off against gate
// teleportation: |sin theta| = (sqrt(5) - 1) / 2, where the closed-form
// expected Bell consumption crosses 1.
inline double cphase_breakeven_sin() { return (std::sqrt(5.0) - 1.0) / 2.0; }
inline double cphase_breakeven_angle() { return std::asin(cphase_breakeven_sin()); }

}  // namespace qknit
