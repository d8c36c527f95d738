#pragma once

// Dense Liouville-space calculus: operator vectorization (double kets),
// superoperators with party-partition metadata, Choi states.
//
// Vectorization convention: |O>> = (O ⊗ I_d) |I_d>> with |I_d>> = sum_i |i,i>,
// i.e. |O>>[(i,j)] = O(i,j) with the flat index i*d + j (row-major).
// Under this convention vec(U rho U†) = (U ⊗ U*) vec(rho).

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "qknit/types.hpp"

namespace qknit {

// ---------------------------------------------------------------------------
// Vectorized operators

struct VectorizedOperator {
  int dim = 0;
  Vector amps;  // length dim*dim
};

inline VectorizedOperator vectorize(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("vectorize: matrix must be square");
  if (!all_finite(m)) throw ValidationError("vectorize: non-finite entries");
  const int d = int(m.rows());
  VectorizedOperator v;
  v.dim = d;
  v.amps.resize(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) v.amps(i * d + j) = m(i, j);
  return v;
}

inline Matrix devectorize(const VectorizedOperator& v) {
  const int d = v.dim;
  if (v.amps.size() != Eigen::Index(d) * d) throw DimensionError("devectorize: length mismatch");
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = v.amps(i * d + j);
  return m;
}

inline Cplx trace_of(const VectorizedOperator& v) {
  Cplx t = 0;
  for (int i = 0; i < v.dim; ++i) t += v.amps(i * v.dim + i);
  return t;
}

// ---------------------------------------------------------------------------
// Party-partitioned tensor factors

enum class Party { A, B, AncA, AncB, RefA, RefB };

inline bool on_side_a(Party p) { return p == Party::A || p == Party::AncA || p == Party::RefA; }

inline const char* party_name(Party p) {
  switch (p) {
    case Party::A: return "A";
    case Party::B: return "B";
    case Party::AncA: return "anc_a";
    case Party::AncB: return "anc_b";
    case Party::RefA: return "ref_a";
    case Party::RefB: return "ref_b";
  }
  return "?";
}

struct Factor {
  Party party;
  int dim;
};

using Space = std::vector<Factor>;

inline int dim_of(const Space& s) {
  int d = 1;
  for (const auto& f : s) d *= f.dim;
  return d;
}

// Mixed-radix helper over a factor list (factor 0 most significant).
struct Indexer {
  std::vector<int> dims;
  std::vector<int> strides;

  explicit Indexer(const Space& s) {
    dims.reserve(s.size());
    for (const auto& f : s) dims.push_back(f.dim);
    strides.assign(dims.size(), 1);
    for (int i = int(dims.size()) - 2; i >= 0; --i) strides[i] = strides[i + 1] * dims[i + 1];
  }
  int total() const { return dims.empty() ? 1 : strides[0] * dims[0]; }
  std::vector<int> unpack(int flat) const {
    std::vector<int> idx(dims.size());
    for (size_t k = 0; k < dims.size(); ++k) {
      idx[k] = flat / strides[k];
      flat %= strides[k];
    }
    return idx;
  }
  int pack(const std::vector<int>& idx) const {
    int flat = 0;
    for (size_t k = 0; k < dims.size(); ++k) flat += idx[k] * strides[k];
    return flat;
  }
};

// ---------------------------------------------------------------------------
// Superoperators

struct Superoperator {
  Space in_space;
  Space out_space;
  Matrix m;  // (out_dim^2) x (in_dim^2)
  std::optional<bool> cptp;

  int in_dim() const { return dim_of(in_space); }
  int out_dim() const { return dim_of(out_space); }
};

inline Space single_space(int d, Party p = Party::A) { return Space{{p, d}}; }

inline Superoperator identity_superop(const Space& s) {
  Superoperator so;
  so.in_space = so.out_space = s;
  const int d2 = dim_of(s) * dim_of(s);
  so.m = Matrix::Identity(d2, d2);
  so.cptp = true;
  return so;
}

inline Superoperator unitary_superop(const Matrix& u, const Space& s) {
  if (int(u.rows()) != dim_of(s) || u.rows() != u.cols())
    throw DimensionError("unitary_superop: dimension mismatch with space");
  if (!is_unitary(u)) throw ValidationError("unitary_superop: input not unitary");
  Superoperator so;
  so.in_space = so.out_space = s;
  so.m = kron(u, u.conjugate());
  so.cptp = true;
  return so;
}

inline Superoperator unitary_superop(const Matrix& u) {
  return unitary_superop(u, single_space(int(u.rows())));
}

inline Superoperator kraus_superop(const std::vector<Matrix>& ks, const Space& out_s,
                                   const Space& in_s) {
  if (ks.empty()) throw DimensionError("kraus_superop: empty Kraus list");
  const int dout = dim_of(out_s), din = dim_of(in_s);
  for (const auto& k : ks)
    if (int(k.rows()) != dout || int(k.cols()) != din)
      throw DimensionError("kraus_superop: Kraus operator shape mismatch");
  Superoperator so;
  so.in_space = in_s;
  so.out_space = out_s;
  so.m = Matrix::Zero(dout * dout, din * din);
  Matrix norm = Matrix::Zero(din, din);
  for (const auto& k : ks) {
    so.m += kron(k, k.conjugate());
    norm += k.adjoint() * k;
  }
  so.cptp = (norm - Matrix::Identity(din, din)).norm() <= kDefaultTol * std::sqrt(double(din));
  return so;
}

inline Superoperator kraus_superop(const std::vector<Matrix>& ks) {
  const int d = int(ks.at(0).rows());
  return kraus_superop(ks, single_space(d), single_space(int(ks.at(0).cols())));
}

inline VectorizedOperator apply(const Superoperator& s, const VectorizedOperator& v) {
  if (v.dim != s.in_dim()) throw DimensionError("apply: dimension mismatch");
  VectorizedOperator out;
  out.dim = s.out_dim();
  out.amps = s.m * v.amps;
  return out;
}

inline Superoperator compose(const Superoperator& later, const Superoperator& earlier) {
  if (later.in_dim() != earlier.out_dim()) throw DimensionError("compose: dimension mismatch");
  Superoperator so;
  so.in_space = earlier.in_space;
  so.out_space = later.out_space;
  so.m = later.m * earlier.m;
  return so;
}

// Tensor product of superoperators; concatenates the factor lists.
inline Superoperator tensor(const Superoperator& s1, const Superoperator& s2) {
  Superoperator so;
  so.in_space = s1.in_space;
  so.in_space.insert(so.in_space.end(), s2.in_space.begin(), s2.in_space.end());
  so.out_space = s1.out_space;
  so.out_space.insert(so.out_space.end(), s2.out_space.begin(), s2.out_space.end());
  const int o1 = s1.out_dim(), o2 = s2.out_dim(), i1 = s1.in_dim(), i2 = s2.in_dim();
  so.m = Matrix::Zero(o1 * o2 * o1 * o2, i1 * i2 * i1 * i2);
  for (int r1 = 0; r1 < o1; ++r1)
    for (int r2 = 0; r2 < o2; ++r2)
      for (int c1 = 0; c1 < o1; ++c1)
        for (int c2 = 0; c2 < o2; ++c2) {
          const int row = ((r1 * o2 + r2) * o1 + c1) * o2 + c2;
          for (int a1 = 0; a1 < i1; ++a1)
            for (int a2 = 0; a2 < i2; ++a2)
              for (int b1 = 0; b1 < i1; ++b1)
                for (int b2 = 0; b2 < i2; ++b2) {
                  const Cplx val = s1.m(r1 * o1 + c1, a1 * i1 + b1) * s2.m(r2 * o2 + c2, a2 * i2 + b2);
                  if (val != Cplx(0, 0))
                    so.m(row, ((a1 * i2 + a2) * i1 + b1) * i2 + b2) += val;
                }
        }
  if (s1.cptp.has_value() && s2.cptp.has_value()) so.cptp = *s1.cptp && *s2.cptp;
  return so;
}

// Conjugation by a unitary acting on a contiguous factor range [first, first+count).
inline Superoperator embed_unitary(const Space& s, int first, int count, const Matrix& u) {
  int dl = 1, dm = 1, dr = 1;
  for (int k = 0; k < int(s.size()); ++k) {
    if (k < first)
      dl *= s[k].dim;
    else if (k < first + count)
      dm *= s[k].dim;
    else
      dr *= s[k].dim;
  }
  if (int(u.rows()) != dm) throw DimensionError("embed_unitary: dimension mismatch");
  Matrix full = kron(kron(Matrix::Identity(dl, dl), u), Matrix::Identity(dr, dr));
  return unitary_superop(full, s);
}

// State insertion: maps vec(sigma) on `s` to vec(reorder(sigma ⊗ rho)) on the
// space with `ins` spliced in at `position`.
inline Superoperator insert_state_superop(const Space& s, int position, const Space& ins,
                                          const Matrix& rho) {
  const int dins = dim_of(ins);
  if (int(rho.rows()) != dins || rho.rows() != rho.cols())
    throw DimensionError("insert_state_superop: state shape mismatch");
  int dl = 1, dr = 1;
  for (int k = 0; k < int(s.size()); ++k) (k < position ? dl : dr) *= s[k].dim;
  Superoperator so;
  so.in_space = s;
  so.out_space = Space(s.begin(), s.begin() + position);
  so.out_space.insert(so.out_space.end(), ins.begin(), ins.end());
  so.out_space.insert(so.out_space.end(), s.begin() + position, s.end());
  const int din = dl * dr, dout = din * dins;
  so.m = Matrix::Zero(dout * dout, din * din);
  for (int rl = 0; rl < dl; ++rl)
    for (int rr = 0; rr < dr; ++rr)
      for (int cl = 0; cl < dl; ++cl)
        for (int cr = 0; cr < dr; ++cr)
          for (int ri = 0; ri < dins; ++ri)
            for (int ci = 0; ci < dins; ++ci) {
              const int row_out = (rl * dins + ri) * dr + rr;
              const int col_out = (cl * dins + ci) * dr + cr;
              const int row_in = rl * dr + rr;
              const int col_in = cl * dr + cr;
              so.m(row_out * dout + col_out, row_in * din + col_in) = rho(ri, ci);
            }
  return so;
}

// POVM branch contraction <<E| on a contiguous factor range [first, first+count);
// the measured factors are removed from the space.
inline Superoperator povm_branch_superop(const Space& s, int first, int count,
                                         const Matrix& effect) {
  int dl = 1, dm = 1, dr = 1;
  for (int k = 0; k < int(s.size()); ++k) {
    if (k < first)
      dl *= s[k].dim;
    else if (k < first + count)
      dm *= s[k].dim;
    else
      dr *= s[k].dim;
  }
  if (int(effect.rows()) != dm) throw DimensionError("povm_branch_superop: effect shape mismatch");
  Superoperator so;
  so.in_space = s;
  so.out_space = Space(s.begin(), s.begin() + first);
  so.out_space.insert(so.out_space.end(), s.begin() + first + count, s.end());
  const int dfull = dl * dm * dr, drem = dl * dr;
  so.m = Matrix::Zero(drem * drem, dfull * dfull);
  for (int rl = 0; rl < dl; ++rl)
    for (int rr = 0; rr < dr; ++rr)
      for (int cl = 0; cl < dl; ++cl)
        for (int cr = 0; cr < dr; ++cr) {
          const int row_out = (rl * dr + rr) * drem + (cl * dr + cr);
          for (int a = 0; a < dm; ++a)
            for (int b = 0; b < dm; ++b) {
              if (effect(a, b) == Cplx(0, 0)) continue;
              const int row_in = (rl * dm + a) * dr + rr;
              const int col_in = (cl * dm + b) * dr + cr;
              so.m(row_out, row_in * dfull + col_in) += std::conj(effect(a, b));
            }
        }
  return so;
}

// Partial trace over the factors with keep[k] == false.
inline VectorizedOperator partial_trace(const VectorizedOperator& v, const Space& s,
                                        const std::vector<bool>& keep) {
  if (v.dim != dim_of(s) || keep.size() != s.size())
    throw DimensionError("partial_trace: shape mismatch");
  Space kept;
  for (size_t k = 0; k < s.size(); ++k)
    if (keep[k]) kept.push_back(s[k]);
  Indexer full(s);
  Indexer red(kept);
  const int dk = red.total();
  Matrix out = Matrix::Zero(dk, dk);
  Matrix rho = devectorize(v);
  for (int r = 0; r < v.dim; ++r) {
    auto ri = full.unpack(r);
    for (int c = 0; c < v.dim; ++c) {
      auto ci = full.unpack(c);
      bool diag = true;
      for (size_t k = 0; k < s.size(); ++k)
        if (!keep[k] && ri[k] != ci[k]) {
          diag = false;
          break;
        }
      if (!diag) continue;
      std::vector<int> rk, ck;
      for (size_t k = 0; k < s.size(); ++k)
        if (keep[k]) {
          rk.push_back(ri[k]);
          ck.push_back(ci[k]);
        }
      out(red.pack(rk), red.pack(ck)) += rho(r, c);
    }
  }
  return vectorize(out);
}

inline double purity(const VectorizedOperator& v) {
  Matrix rho = devectorize(v);
  return std::real((rho * rho).trace());
}

// Trace preservation in Liouville form: <<I_out| S = <<I_in|.
inline bool is_trace_preserving(const Superoperator& s, double tol = kDefaultTol) {
  Vector id_out = vectorize(Matrix::Identity(s.out_dim(), s.out_dim())).amps;
  Vector id_in = vectorize(Matrix::Identity(s.in_dim(), s.in_dim())).amps;
  return (s.m.adjoint() * id_out - id_in).norm() <= tol * std::sqrt(double(s.in_dim()));
}

// ---------------------------------------------------------------------------
// Choi states

struct ChoiState {
  Space space;                // [in-space factors..., RefA, RefB]
  VectorizedOperator state;   // density operator on the doubled space
};

// Choi matrix of a superoperator in the (row ⊗ col) operator basis; PSD iff CP.
inline Matrix choi_matrix(const Superoperator& s) {
  const int din = s.in_dim(), dout = s.out_dim();
  Matrix c(dout * din, dout * din);
  for (int r = 0; r < dout; ++r)
    for (int i = 0; i < din; ++i)
      for (int rp = 0; rp < dout; ++rp)
        for (int ip = 0; ip < din; ++ip)
          c(r * din + i, rp * din + ip) = s.m(r * dout + rp, i * din + ip);
  return c;
}

inline bool is_cptp(const Superoperator& s, double tol = kDefaultTol) {
  if (!is_trace_preserving(s, tol)) return false;
  Matrix c = choi_matrix(s);
  if ((c - c.adjoint()).norm() > tol * c.rows()) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  return es.eigenvalues().minCoeff() >= -tol * c.rows();
}

// Choi state of a bipartite map: (S ⊗ id) acting on |Phi_{A,RA}> ⊗ |Phi_{B,RB}>,
// recorded with the (A,RA)|(B,RB) cut implicit in the party labels.
inline ChoiState choi_state(const Superoperator& s) {
  int da = 0, db = 0;
  for (const auto& f : s.in_space) {
    if (f.party == Party::A)
      da = (da == 0 ? 1 : da) * f.dim;
    else if (f.party == Party::B)
      db = (db == 0 ? 1 : db) * f.dim;
    else
      throw ConfigError("choi_state: input space must carry A/B partition labels");
  }
  if (da == 0 || db == 0) throw ConfigError("choi_state: both parties must be present");
  if (s.in_dim() != s.out_dim()) throw DimensionError("choi_state: equal in/out dims required");
  Space refs{{Party::RefA, da}, {Party::RefB, db}};
  const int d = da * db;
  // |psi> on [A, B, RefA, RefB]: psi[(a,b,ra,rb)] = delta(a,ra) delta(b,rb) / sqrt(d)
  Vector psi = Vector::Zero(d * d);
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b) {
      const int sys = a * db + b, ref = a * db + b;
      psi(sys * d + ref) = 1.0 / std::sqrt(double(d));
    }
  VectorizedOperator init;
  init.dim = d * d;
  init.amps.resize(init.dim * init.dim);
  for (int r = 0; r < init.dim; ++r)
    for (int c = 0; c < init.dim; ++c) init.amps(r * init.dim + c) = psi(r) * std::conj(psi(c));
  Superoperator ext = tensor(s, identity_superop(refs));
  ChoiState out;
  out.space = ext.out_space;
  out.state = apply(ext, init);
  return out;
}

// Extract the ket of a pure density operator (largest eigenvector).
inline Vector pure_state_ket(const VectorizedOperator& v, double tol = kDefaultTol) {
  if (std::abs(purity(v) - 1.0) > 1e3 * tol)
    throw ValidationError("pure_state_ket: state is not pure");
  Eigen::SelfAdjointEigenSolver<Matrix> es(devectorize(v));
  Eigen::Index imax;
  es.eigenvalues().maxCoeff(&imax);
  Vector ket = es.eigenvectors().col(imax);
  // fix global phase: largest-magnitude amplitude real positive
  Eigen::Index amax;
  ket.cwiseAbs().maxCoeff(&amax);
  ket *= std::conj(ket(amax)) / std::abs(ket(amax));
  return ket;
}

}  // namespace qknit
