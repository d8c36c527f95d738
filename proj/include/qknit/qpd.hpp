#pragma once

// Quasi-probability decompositions of nonlocal gates and cut wires.
//
// A config is a list of sampled terms; each term is a pipeline of stages
// (unitaries, resource-state insertions, measurements with signed outcomes
// and classical corrections, or signed instruments). Expanding a term over
// its measurement outcomes / instrument branches yields CP branch maps, and
//   S_target = gamma * sum_t p_t * sum_branches sign * branch.

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qknit/liouville.hpp"
#include "qknit/schmidt.hpp"
#include "qknit/types.hpp"

namespace qknit {

// ---------------------------------------------------------------------------
// Stages

struct OpStage {
  int first = 0;
  int count = 0;
  Matrix u;  // unitary on the contiguous factor range
};

struct InsertStage {
  int position = 0;
  Space ins_space;
  Matrix rho;  // density operator on the inserted factors
  ResourceState resource;
  bool entangled = false;
};

struct MeasureOutcome {
  Matrix effect;  // POVM effect on the measured factors
  double sign = 1;
  int corr_first = 0;
  int corr_count = 0;  // 0: no correction
  Matrix correction;   // unitary on the post-measurement space
};

struct MeasureStage {
  int first = 0;
  int count = 0;
  std::vector<MeasureOutcome> outcomes;
};

struct InstrumentBranch {
  Matrix k;  // single Kraus operator
  double sign = 1;
};

// Local measure-and-reprepare channel with signed branches; `relabel` moves
// the affected factors to another party (a wire crossing the cut).
struct InstrumentStage {
  int first = 0;
  int count = 0;
  std::vector<InstrumentBranch> branches;
  int classical_bits = 0;
  std::optional<Party> relabel;
};

using Stage = std::variant<OpStage, InsertStage, MeasureStage, InstrumentStage>;

struct QpdTerm {
  double probability = 0;
  std::vector<Stage> stages;
};

struct QpdConfig {
  std::string kind;  // "bell_gate", "lo_gate", "psi_gate", "wire"
  Space in_space;
  Space out_space;
  double gamma = 0;
  bool constructive = true;
  std::string locality = "LO";  // declared class: "LO" or "LOCC"
  std::string note;
  std::vector<QpdTerm> terms;
  ResourceState resource = ResourceState::separable();
};

// ---------------------------------------------------------------------------
// Branch expansion

// Expanded branch of a term: a single Kraus chain rho -> K rho K†. Mixed
// insertions and higher-rank POVM effects are split spectrally into further
// Kraus branches, so the representation is exact.
struct TermBranch {
  double sign = 1;
  Matrix k;  // dout x din
  Space out_space;
  std::vector<int> outcomes;  // outcome index per measurement/instrument stage
};

namespace detail {

inline void range_dims(const Space& s, int first, int count, int& dl, int& dm, int& dr) {
  dl = dm = dr = 1;
  for (int i = 0; i < int(s.size()); ++i) {
    if (i < first)
      dl *= s[i].dim;
    else if (i < first + count)
      dm *= s[i].dim;
    else
      dr *= s[i].dim;
  }
}

// Spectral decomposition of a PSD matrix into weighted kets.
inline std::vector<Vector> psd_kets(const Matrix& m, double cutoff = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  std::vector<Vector> kets;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double w = es.eigenvalues()(i);
    if (w > cutoff) kets.push_back(std::sqrt(w) * es.eigenvectors().col(i));
  }
  return kets;
}

// K -> (I ⊗ u ⊗ I) K on a contiguous range.
inline Matrix apply_ranged(const Space& s, int first, int count, const Matrix& u,
                           const Matrix& k) {
  int dl, dm, dr;
  range_dims(s, first, count, dl, dm, dr);
  if (int(u.rows()) != dm) throw DimensionError("apply_ranged: operator shape mismatch");
  Matrix out = Matrix::Zero(k.rows(), k.cols());
  for (int l = 0; l < dl; ++l)
    for (int a = 0; a < dm; ++a)
      for (int r = 0; r < dr; ++r) {
        const int row = (l * dm + a) * dr + r;
        for (int b = 0; b < dm; ++b) {
          if (u(a, b) == Cplx(0, 0)) continue;
          out.row(row) += u(a, b) * k.row((l * dm + b) * dr + r);
        }
      }
  return out;
}

// K -> (I ⊗ |phi> ⊗ I) K, splicing the ket's factors in at `position`.
inline Matrix insert_ket(const Space& s, int position, const Vector& phi, const Matrix& k) {
  int dl = 1, dr = 1;
  for (int i = 0; i < int(s.size()); ++i) (i < position ? dl : dr) *= s[i].dim;
  const int dins = int(phi.size());
  Matrix out(k.rows() * dins, k.cols());
  for (int l = 0; l < dl; ++l)
    for (int a = 0; a < dins; ++a)
      for (int r = 0; r < dr; ++r)
        out.row((l * dins + a) * dr + r) = phi(a) * k.row(l * dr + r);
  return out;
}

// K -> (I ⊗ <e| ⊗ I) K, removing the measured factors.
inline Matrix contract_ket(const Space& s, int first, int count, const Vector& e,
                           const Matrix& k) {
  int dl, dm, dr;
  range_dims(s, first, count, dl, dm, dr);
  if (int(e.size()) != dm) throw DimensionError("contract_ket: effect shape mismatch");
  Matrix out = Matrix::Zero(dl * dr, k.cols());
  for (int l = 0; l < dl; ++l)
    for (int r = 0; r < dr; ++r) {
      const int row = l * dr + r;
      for (int a = 0; a < dm; ++a)
        out.row(row) += std::conj(e(a)) * k.row((l * dm + a) * dr + r);
    }
  return out;
}

}  // namespace detail

inline std::vector<TermBranch> expand_term(const QpdTerm& t, const Space& in_space) {
  const int din = dim_of(in_space);
  std::vector<TermBranch> cur;
  cur.push_back({1.0, Matrix::Identity(din, din), in_space, {}});
  for (const auto& stage : t.stages) {
    std::vector<TermBranch> next;
    for (const auto& br : cur) {
      const Space& sp = br.out_space;
      if (const auto* op = std::get_if<OpStage>(&stage)) {
        TermBranch nb = br;
        nb.k = detail::apply_ranged(sp, op->first, op->count, op->u, br.k);
        next.push_back(std::move(nb));
      } else if (const auto* ins = std::get_if<InsertStage>(&stage)) {
        Space nsp(sp.begin(), sp.begin() + ins->position);
        nsp.insert(nsp.end(), ins->ins_space.begin(), ins->ins_space.end());
        nsp.insert(nsp.end(), sp.begin() + ins->position, sp.end());
        for (const auto& phi : detail::psd_kets(ins->rho)) {
          TermBranch nb = br;
          nb.k = detail::insert_ket(sp, ins->position, phi, br.k);
          nb.out_space = nsp;
          next.push_back(std::move(nb));
        }
      } else if (const auto* ms = std::get_if<MeasureStage>(&stage)) {
        Space nsp(sp.begin(), sp.begin() + ms->first);
        nsp.insert(nsp.end(), sp.begin() + ms->first + ms->count, sp.end());
        for (int o = 0; o < int(ms->outcomes.size()); ++o) {
          const auto& out = ms->outcomes[o];
          for (const auto& e : detail::psd_kets(out.effect)) {
            TermBranch nb = br;
            nb.sign = br.sign * out.sign;
            nb.k = detail::contract_ket(sp, ms->first, ms->count, e, br.k);
            nb.out_space = nsp;
            if (out.corr_count > 0)
              nb.k = detail::apply_ranged(nsp, out.corr_first, out.corr_count, out.correction,
                                          nb.k);
            nb.outcomes.push_back(o);
            next.push_back(std::move(nb));
          }
        }
      } else if (const auto* is = std::get_if<InstrumentStage>(&stage)) {
        Space nsp = sp;
        if (is->relabel)
          for (int i = is->first; i < is->first + is->count; ++i) nsp[i].party = *is->relabel;
        for (int o = 0; o < int(is->branches.size()); ++o) {
          const auto& ib = is->branches[o];
          TermBranch nb = br;
          nb.sign = br.sign * ib.sign;
          nb.k = detail::apply_ranged(sp, is->first, is->count, ib.k, br.k);
          nb.out_space = nsp;
          nb.outcomes.push_back(o);
          next.push_back(std::move(nb));
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

inline Superoperator branch_superop(const TermBranch& br, const Space& in_space) {
  Superoperator so;
  so.in_space = in_space;
  so.out_space = br.out_space;
  so.m = kron(br.k, br.k.conjugate());
  return so;
}

// Sum of the branch maps of a term: the channel actually run when the term is
// sampled. Must be CPTP for a valid config.
inline Superoperator term_channel(const QpdTerm& t, const Space& in_space) {
  auto brs = expand_term(t, in_space);
  Superoperator total = branch_superop(brs.at(0), in_space);
  for (size_t i = 1; i < brs.size(); ++i) total.m += kron(brs[i].k, brs[i].k.conjugate());
  total.cptp.reset();
  return total;
}

inline Superoperator reconstruct_superop(const QpdConfig& c) {
  if (!c.constructive)
    throw UnsupportedError("reconstruct_superop: config is not constructive (" + c.note + ")");
  if (c.terms.empty()) throw ConfigError("reconstruct_superop: no terms");
  std::optional<Superoperator> acc;
  for (const auto& t : c.terms)
    for (const auto& br : expand_term(t, c.in_space)) {
      Matrix w = (c.gamma * t.probability * br.sign) * kron(br.k, br.k.conjugate());
      if (!acc) {
        acc = branch_superop(br, c.in_space);
        acc->m = std::move(w);
      } else {
        acc->m += w;
      }
    }
  acc->cptp.reset();
  return *acc;
}

// Gamma implied by the branch maps via trace preservation of the target:
// applying the signed mixture to the maximally mixed state must have unit
// trace after multiplying by gamma.
inline double implied_gamma(const QpdConfig& c) {
  if (!c.constructive) return c.gamma;
  const int din = dim_of(c.in_space);
  double denom = 0;
  for (const auto& t : c.terms)
    for (const auto& br : expand_term(t, c.in_space))
      denom += t.probability * br.sign * br.k.squaredNorm() / double(din);
  if (std::abs(denom) < 1e-14) throw ConsistencyError("implied_gamma: singular decomposition");
  return 1.0 / denom;
}

// Recompute gamma from the branch trace formula and check it against the
// stored value.
inline double config_gamma(const QpdConfig& c, double tol = 1e-8) {
  double g = implied_gamma(c);
  if (std::abs(g - c.gamma) > tol * std::max(1.0, c.gamma))
    throw ConsistencyError("config_gamma: stored gamma disagrees with the branch recomputation");
  return g;
}

inline void validate(const QpdConfig& c, double tol = 1e-8) {
  if (c.gamma < 1.0 - tol) throw ConsistencyError("validate: gamma below 1");
  if (!c.constructive) return;
  double psum = 0;
  for (const auto& t : c.terms) {
    if (t.probability <= 0) throw ConfigError("validate: non-positive term probability");
    psum += t.probability;
    if (!is_cptp(term_channel(t, c.in_space), tol))
      throw ConsistencyError("validate: term channel is not CPTP");
  }
  if (std::abs(psum - 1.0) > tol) throw ConsistencyError("validate: probabilities do not sum to 1");
  if (std::abs(implied_gamma(c) - c.gamma) > tol * c.gamma)
    throw ConsistencyError("validate: stored gamma inconsistent with branches");
}

// ---------------------------------------------------------------------------
// Gate cut builders

namespace detail {

inline Matrix ket_density(const Vector& k) { return k * k.adjoint(); }

inline Vector plus_ket() {
  Vector v(2);
  v << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  return v;
}
inline Vector minus_ket() {
  Vector v(2);
  v << 1 / std::sqrt(2.0), -1 / std::sqrt(2.0);
  return v;
}

// Controlled factor pair: UA = A_i x |+><+| + A_j x |-><-| on (A, anc_a),
// UB = |+><+| x B_i + |-><-| x B_j on (anc_b, B).
inline Matrix controlled_pair_a(const Matrix& ai, const Matrix& aj) {
  Matrix pp = ket_density(plus_ket()), pm = ket_density(minus_ket());
  return kron(ai, pp) + kron(aj, pm);
}
inline Matrix controlled_pair_b(const Matrix& bi, const Matrix& bj) {
  Matrix pp = ket_density(plus_ket()), pm = ket_density(minus_ket());
  return kron(pp, bi) + kron(pm, bj);
}

inline MeasureStage parity_measure(double base_sign) {
  MeasureStage ms;
  ms.first = 1;
  ms.count = 2;
  for (int m = 0; m < 4; ++m) {
    MeasureOutcome out;
    out.effect = Matrix::Zero(4, 4);
    out.effect(m, m) = 1;
    out.sign = base_sign * ((((m >> 1) + m) & 1) ? -1.0 : 1.0);
    ms.outcomes.push_back(std::move(out));
  }
  return ms;
}

inline QpdTerm local_diag_term(double p, const Matrix& ai, const Matrix& bi) {
  QpdTerm t;
  t.probability = p;
  t.stages.push_back(OpStage{0, 2, kron(ai, bi)});
  return t;
}

// Off-diagonal term skeleton: insert a two-qubit ancilla state between the
// parties, apply the controlled factor pair, measure the ancillas with the
// parity sign.
inline QpdTerm cross_term(double p, const LUD& lud, int i, int j, const Matrix& anc_rho,
                          const ResourceState& res, bool entangled, double base_sign) {
  QpdTerm t;
  t.probability = p;
  t.stages.push_back(InsertStage{1, Space{{Party::AncA, 2}, {Party::AncB, 2}}, anc_rho, res,
                                 entangled});
  Matrix ua = controlled_pair_a(lud.a_factors[i], lud.a_factors[j]);
  Matrix ub = controlled_pair_b(lud.b_factors[i], lud.b_factors[j]);
  t.stages.push_back(OpStage{0, 4, kron(ua, ub)});
  t.stages.push_back(parity_measure(base_sign));
  return t;
}

inline LUD kak_lud_or_throw(const Matrix& u, int da, int db) {
  LUD lud = operator_schmidt(u, da, db);
  if (!lud.kak_like)
    throw UnsupportedError("gate cut: no local unitary decomposition with unitary factors found");
  return lud;
}

}  // namespace detail

namespace detail {

inline void require_kak(const LUD& lud) {
  if (!lud.kak_like)
    throw UnsupportedError("gate cut: no local unitary decomposition with unitary factors found");
}

}  // namespace detail

// Gate cut consuming one Bell pair per cross term; gamma = (sum lambda)^2.
// Terms are indexed by ordered factor pairs (i,j) with prob lambda_i lambda_j
// / gamma; the diagonal i = j terms are purely local and skip the resource.
inline QpdConfig build_bell_gate_cut(const LUD& lud) {
  detail::require_kak(lud);
  QpdConfig c;
  c.kind = "bell_gate";
  c.in_space = c.out_space = Space{{Party::A, lud.d_a}, {Party::B, lud.d_b}};
  c.gamma = lud.l1_sq();
  c.locality = "LO";
  c.resource = ResourceState::bell(2);
  const int n = int(lud.lambdas.size());
  Matrix phi2 = detail::ket_density(ResourceState::bell(2).ket());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double p = lud.lambdas[i] * lud.lambdas[j] / c.gamma;
      if (i == j)
        c.terms.push_back(detail::local_diag_term(p, lud.a_factors[i], lud.b_factors[i]));
      else
        c.terms.push_back(
            detail::cross_term(p, lud, i, j, phi2, ResourceState::bell(2), true, 1.0));
    }
  return c;
}

inline QpdConfig build_bell_gate_cut(const Matrix& u, int da, int db) {
  return build_bell_gate_cut(detail::kak_lud_or_throw(u, da, db));
}

// Gate cut with local operations only; gamma = 2 (sum lambda)^2 - sum lambda^2.
// Cross terms average over signed separable ancilla insertions.
inline QpdConfig build_lo_gate_cut(const LUD& lud) {
  detail::require_kak(lud);
  QpdConfig c;
  c.kind = "lo_gate";
  c.in_space = c.out_space = Space{{Party::A, lud.d_a}, {Party::B, lud.d_b}};
  c.gamma = 2 * lud.l1_sq() - lud.l2_sq();
  c.locality = "LO";
  c.resource = ResourceState::separable();
  const int n = int(lud.lambdas.size());
  for (int i = 0; i < n; ++i)
    c.terms.push_back(detail::local_diag_term(lud.lambdas[i] * lud.lambdas[i] / c.gamma,
                                              lud.a_factors[i], lud.b_factors[i]));
  // single-qubit eigenbases: w = 0 the computational basis (+ sign), w = 1 the
  // circular basis (- sign)
  Vector z0(2), z1(2), y0(2), y1(2);
  z0 << 1, 0;
  z1 << 0, 1;
  y0 << 1 / std::sqrt(2.0), Cplx(0, 1) / std::sqrt(2.0);
  y1 << 1 / std::sqrt(2.0), Cplx(0, -1) / std::sqrt(2.0);
  const Vector kets[2][2] = {{z0, z1}, {y0, y1}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double p = lud.lambdas[i] * lud.lambdas[j] / (2 * c.gamma);
      for (int w = 0; w < 2; ++w)
        for (int s = 0; s < 2; ++s)
          for (int t = 0; t < 2; ++t) {
            Matrix rho = detail::ket_density(Vector(kron_vec(kets[w][s], kets[w][t])));
            double base = (w == 0 ? 1.0 : -1.0) * (s ? -1.0 : 1.0) * (t ? -1.0 : 1.0);
            c.terms.push_back(detail::cross_term(p, lud, i, j, rho, ResourceState::separable(),
                                                 false, base));
          }
    }
  return c;
}

inline QpdConfig build_lo_gate_cut(const Matrix& u, int da, int db) {
  return build_lo_gate_cut(detail::kak_lud_or_throw(u, da, db));
}

// Gate cut assisted by the partially entangled pair psi(r); for weakly
// entangled resources (1/sqrt(1-r^2) >= 2) the local-operations cut is
// cheaper and is used instead.
inline QpdConfig build_psi_gate_cut(const LUD& lud, double r) {
  if (r < 0 || r > 1) throw ValidationError("build_psi_gate_cut: r must lie in [0,1]");
  detail::require_kak(lud);
  const double nu = (r < 1) ? 1.0 / std::sqrt(1 - r * r) : std::numeric_limits<double>::infinity();
  if (nu >= 2) {
    QpdConfig c = build_lo_gate_cut(lud);
    c.kind = "psi_gate";
    c.resource = ResourceState::psi(r);
    c.note = "resource too weakly entangled; local-operations cut is optimal";
    return c;
  }
  QpdConfig c;
  c.kind = "psi_gate";
  c.in_space = c.out_space = Space{{Party::A, lud.d_a}, {Party::B, lud.d_b}};
  c.gamma = lud.l2_sq() + nu * (lud.l1_sq() - lud.l2_sq());
  c.locality = "LO";
  c.resource = ResourceState::psi(r);
  const int n = int(lud.lambdas.size());
  for (int i = 0; i < n; ++i)
    c.terms.push_back(detail::local_diag_term(lud.lambdas[i] * lud.lambdas[i] / c.gamma,
                                              lud.a_factors[i], lud.b_factors[i]));
  // psi(r) expressed in the |+>/|-> control basis
  auto sc = ResourceState::psi(r).schmidt_coefficients();
  Vector psi = sc[0] * kron_vec(detail::plus_ket(), detail::plus_ket()) +
               sc[1] * kron_vec(detail::minus_ket(), detail::minus_ket());
  Matrix rho = detail::ket_density(psi);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      c.terms.push_back(detail::cross_term(2 * nu * lud.lambdas[i] * lud.lambdas[j] / c.gamma, lud,
                                           i, j, rho, ResourceState::psi(r), true, 1.0));
  return c;
}

inline QpdConfig build_psi_gate_cut(const Matrix& u, int da, int db, double r) {
  return build_psi_gate_cut(detail::kak_lud_or_throw(u, da, db), r);
}

inline QpdConfig build_gate_cut(const LUD& lud, const ResourceState& res) {
  switch (res.kind) {
    case ResourceState::Kind::Separable: return build_lo_gate_cut(lud);
    case ResourceState::Kind::Bell:
      if (res.d != 2) throw UnsupportedError("gate cut: only qubit Bell pairs are supported");
      return build_bell_gate_cut(lud);
    case ResourceState::Kind::Psi: return build_psi_gate_cut(lud, res.r);
    case ResourceState::Kind::PureSchmidt:
      throw UnsupportedError("gate cut: no constructive protocol for generic pure resources");
  }
  throw UnsupportedError("gate cut: unknown resource");
}

inline QpdConfig build_gate_cut(const Matrix& u, int da, int db, const ResourceState& res) {
  return build_gate_cut(detail::kak_lud_or_throw(u, da, db), res);
}

// ---------------------------------------------------------------------------
// Wire cut builders

// Cut a d-dimensional wire: the identity channel from party A to party B.
inline QpdConfig build_wire_cut(const ResourceState& res, int d) {
  if (d < 2) throw ValidationError("build_wire_cut: wire dimension must be >= 2");
  QpdConfig c;
  c.kind = "wire";
  c.in_space = Space{{Party::A, d}};
  c.out_space = Space{{Party::B, d}};
  c.locality = "LOCC";
  c.resource = res;

  if (res.kind == ResourceState::Kind::Bell && res.d == d) {
    // teleportation: gamma = 1, one term, generalized Bell measurement with
    // Heisenberg-Weyl corrections
    c.gamma = 1;
    QpdTerm t;
    t.probability = 1;
    t.stages.push_back(InsertStage{1, Space{{Party::AncA, d}, {Party::B, d}},
                                   detail::ket_density(ResourceState::bell(d).ket()),
                                   ResourceState::bell(d), true});
    MeasureStage ms;
    ms.first = 0;
    ms.count = 2;
    Vector phi = ResourceState::bell(d).ket();
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) {
        Matrix mpq = Matrix::Identity(d, d);
        for (int k = 0; k < p; ++k) mpq = gates::shift_x(d) * mpq;
        for (int k = 0; k < q; ++k) mpq = gates::clock_z(d) * mpq;
        Vector phipq = kron(mpq, Matrix::Identity(d, d)) * phi;
        MeasureOutcome out;
        out.effect = detail::ket_density(phipq);
        out.sign = 1;
        out.corr_first = 0;
        out.corr_count = 1;
        out.correction = mpq;
        ms.outcomes.push_back(std::move(out));
      }
    t.stages.push_back(std::move(ms));
    c.terms.push_back(std::move(t));
    return c;
  }

  if (res.kind == ResourceState::Kind::Separable) {
    c.gamma = 2.0 * d - 1.0;
    if (d != 2) {
      c.constructive = false;
      c.note = "measure-and-prepare protocol implemented for qubit wires only";
      return c;
    }
    // id = 2 * (random Pauli-basis measure & keep) - (measure & flip),
    // averaged over the three bases
    Vector bases[3][2];
    bases[0][0] = Vector(2);
    bases[0][0] << 1, 0;
    bases[0][1] = Vector(2);
    bases[0][1] << 0, 1;
    bases[1][0] = detail::plus_ket();
    bases[1][1] = detail::minus_ket();
    bases[2][0] = Vector(2);
    bases[2][0] << 1 / std::sqrt(2.0), Cplx(0, 1) / std::sqrt(2.0);
    bases[2][1] = Vector(2);
    bases[2][1] << 1 / std::sqrt(2.0), Cplx(0, -1) / std::sqrt(2.0);
    for (int w = 0; w < 3; ++w)
      for (int flip = 0; flip < 2; ++flip) {
        QpdTerm t;
        t.probability = flip ? 1.0 / 9.0 : 2.0 / 9.0;
        InstrumentStage is;
        is.first = 0;
        is.count = 1;
        is.classical_bits = 1;
        is.relabel = Party::B;
        for (int s = 0; s < 2; ++s) {
          InstrumentBranch br;
          br.k = bases[w][flip ? 1 - s : s] * bases[w][s].adjoint();
          br.sign = flip ? -1.0 : 1.0;
          is.branches.push_back(std::move(br));
        }
        t.stages.push_back(std::move(is));
        c.terms.push_back(std::move(t));
      }
    return c;
  }

  // generic pure resource: gamma = 2 / F_d - 1 from the fully entangled
  // fraction; no constructive protocol provided
  double f = fully_entangled_fraction(res, d);
  if (f <= 0) throw UnsupportedError("build_wire_cut: resource has vanishing entangled fraction");
  c.gamma = 2.0 / f - 1.0;
  c.constructive = false;
  c.note = "sampling overhead from the fully entangled fraction; protocol not constructed";
  return c;
}

// ---------------------------------------------------------------------------
// Composition and accounting

// Tensor product of two configs acting on disjoint wires. Assumes each term
// pipeline restores its own factor count (true for all gate cuts built here).
inline QpdConfig tensor_configs(const QpdConfig& c1, const QpdConfig& c2) {
  if (!c1.constructive || !c2.constructive)
    throw UnsupportedError("tensor_configs: both configs must be constructive");
  QpdConfig c;
  c.kind = c1.kind + "*" + c2.kind;
  c.in_space = c1.in_space;
  c.in_space.insert(c.in_space.end(), c2.in_space.begin(), c2.in_space.end());
  c.out_space = c1.out_space;
  c.out_space.insert(c.out_space.end(), c2.out_space.begin(), c2.out_space.end());
  c.gamma = c1.gamma * c2.gamma;
  c.locality = (c1.locality == "LOCC" || c2.locality == "LOCC") ? "LOCC" : "LO";
  c.resource = c1.resource;
  const int off = int(c1.in_space.size());
  for (const auto& t1 : c1.terms)
    for (const auto& t2 : c2.terms) {
      QpdTerm t;
      t.probability = t1.probability * t2.probability;
      t.stages = t1.stages;
      for (Stage st : t2.stages) {
        std::visit(
            [&](auto& s) {
              using T = std::decay_t<decltype(s)>;
              if constexpr (std::is_same_v<T, OpStage> || std::is_same_v<T, MeasureStage> ||
                            std::is_same_v<T, InstrumentStage>)
                s.first += off;
              else
                s.position += off;
              if constexpr (std::is_same_v<T, MeasureStage>)
                for (auto& o : s.outcomes) o.corr_first += off;
            },
            st);
        t.stages.push_back(std::move(st));
      }
      c.terms.push_back(std::move(t));
    }
  return c;
}

// Trivial single-term config: do nothing to the given wires. Useful for
// extending a cut to untouched wires before composing.
inline QpdConfig identity_config(const Space& s) {
  QpdConfig c;
  c.kind = "identity";
  c.in_space = c.out_space = s;
  c.gamma = 1;
  QpdTerm t;
  t.probability = 1;
  c.terms.push_back(std::move(t));
  return c;
}

// Sequential composition: run `earlier`, feed its output into `later`.
// Probabilities and gammas multiply; the composed config reconstructs
// later ∘ earlier. The factor dimensions of earlier's output must match
// later's input position by position (party labels may differ, e.g. after a
// wire crossing).
inline QpdConfig compose_configs(const QpdConfig& later, const QpdConfig& earlier) {
  if (!later.constructive || !earlier.constructive)
    throw UnsupportedError("compose_configs: both configs must be constructive");
  if (later.in_space.size() != earlier.out_space.size())
    throw DimensionError("compose_configs: factor count mismatch at the interface");
  for (size_t i = 0; i < later.in_space.size(); ++i)
    if (later.in_space[i].dim != earlier.out_space[i].dim)
      throw DimensionError("compose_configs: factor dimension mismatch at the interface");
  QpdConfig c;
  c.kind = later.kind + "." + earlier.kind;
  c.in_space = earlier.in_space;
  c.out_space = later.out_space;
  c.gamma = later.gamma * earlier.gamma;
  c.locality = (later.locality == "LOCC" || earlier.locality == "LOCC") ? "LOCC" : "LO";
  c.resource = earlier.resource;
  for (const auto& t1 : earlier.terms)
    for (const auto& t2 : later.terms) {
      QpdTerm t;
      t.probability = t1.probability * t2.probability;
      t.stages = t1.stages;
      t.stages.insert(t.stages.end(), t2.stages.begin(), t2.stages.end());
      c.terms.push_back(std::move(t));
    }
  return c;
}

// Entanglement consumption: P_B is the probability a sample consumes a Bell
// pair, expected_bells the pairs consumed per unit-variance estimate
// (~gamma^2 samples).
struct BellAccounting {
  double p_bell = 0;
  double expected_bells = 0;
};

inline BellAccounting bell_accounting(const LUD& lud) {
  detail::require_kak(lud);
  const double l1sq = lud.l1_sq();
  BellAccounting acc;
  acc.p_bell = 1.0 - 1.0 / l1sq;
  acc.expected_bells = acc.p_bell * l1sq * l1sq;
  return acc;
}

// Same accounting read off a constructed config's terms.
struct ConfigBellAccounting {
  double p_bell = 0;  // probability a sample consumes the resource
  double gamma = 0;
  double expected_bells_per_sample = 0;
  double expected_bells = 0;  // per unit-variance estimate, ~gamma^2 samples
};

inline ConfigBellAccounting config_bell_accounting(const QpdConfig& c) {
  ConfigBellAccounting acc;
  acc.gamma = c.gamma;
  if (!c.constructive)
    throw UnsupportedError("config_bell_accounting: config is not constructive");
  for (const auto& t : c.terms) {
    int pairs = 0;
    for (const auto& st : t.stages)
      if (const auto* ins = std::get_if<InsertStage>(&st))
        if (ins->entangled) ++pairs;
    if (pairs > 0) acc.p_bell += t.probability;
    acc.expected_bells_per_sample += t.probability * pairs;
  }
  acc.expected_bells = acc.expected_bells_per_sample * c.gamma * c.gamma;
  return acc;
}

}  // namespace qknit
