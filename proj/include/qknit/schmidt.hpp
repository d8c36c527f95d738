#pragma once

// Operator Schmidt decompositions (local unitary decompositions), state Schmidt
// coefficients, fully entangled fraction and entanglement entropy.

#include <cmath>
#include <numeric>
#include <optional>

#include "qknit/liouville.hpp"
#include "qknit/types.hpp"

namespace qknit {

// Local unitary decomposition U = sum_i lambda_i A_i ⊗ B_i with lambda_i > 0
// descending. When kak_like, the factors are unitary and sum lambda_i^2 = 1;
// otherwise they are Hilbert-Schmidt normalized.
struct LUD {
  std::vector<double> lambdas;
  std::vector<Matrix> a_factors;
  std::vector<Matrix> b_factors;
  bool kak_like = false;
  int d_a = 0;
  int d_b = 0;

  double l1() const {
    double s = 0;
    for (double l : lambdas) s += l;
    return s;
  }
  double l1_sq() const { return l1() * l1(); }
  double l2_sq() const {
    double s = 0;
    for (double l : lambdas) s += l * l;
    return s;
  }
  Matrix reconstruct() const {
    Matrix u = Matrix::Zero(d_a * d_b, d_a * d_b);
    for (size_t i = 0; i < lambdas.size(); ++i) u += lambdas[i] * kron(a_factors[i], b_factors[i]);
    return u;
  }
};

struct ResourceState {
  enum class Kind { Separable, Bell, Psi, PureSchmidt };
  Kind kind = Kind::Separable;
  int d = 2;                     // bell dimension
  double r = 0;                  // psi parameter
  std::vector<double> coeffs;    // pure_schmidt coefficients

  static ResourceState separable() { return {Kind::Separable, 2, 0, {}}; }
  static ResourceState bell(int d) { return {Kind::Bell, d, 0, {}}; }
  static ResourceState psi(double r) {
    if (r < 0 || r > 1) throw ValidationError("psi(r): r must lie in [0,1]");
    return {Kind::Psi, 2, r, {}};
  }
  static ResourceState pure_schmidt(std::vector<double> coeffs) {
    double s = 0;
    for (double c : coeffs) s += c * c;
    if (std::abs(s - 1.0) > 1e-12) throw ValidationError("pure_schmidt: coefficients not normalized");
    std::sort(coeffs.begin(), coeffs.end(), std::greater<double>());
    return {Kind::PureSchmidt, int(coeffs.size()), 0, std::move(coeffs)};
  }

  bool is_pure() const { return kind != Kind::Separable; }

  // Schmidt coefficients of the pure resource (descending).
  std::vector<double> schmidt_coefficients() const {
    switch (kind) {
      case Kind::Separable: return {1.0};
      case Kind::Bell: return std::vector<double>(d, 1.0 / std::sqrt(double(d)));
      case Kind::Psi: return {std::sqrt((1 + r) / 2), std::sqrt((1 - r) / 2)};
      case Kind::PureSchmidt: return coeffs;
    }
    return {};
  }

  // Two-qudit ket |s> = sum_i s_i |i,i> on dims (local_dim, local_dim).
  Vector ket() const {
    auto s = schmidt_coefficients();
    const int n = int(s.size());
    Vector k = Vector::Zero(n * n);
    for (int i = 0; i < n; ++i) k(i * n + i) = s[i];
    return k;
  }
  int local_dim() const { return int(schmidt_coefficients().size()); }
  Matrix density() const {
    Vector k = ket();
    return k * k.adjoint();
  }

  double entanglement_entropy_bits() const {
    double e = 0;
    for (double s : schmidt_coefficients()) {
      double p = s * s;
      if (p > 1e-15) e -= p * std::log2(p);
    }
    return e;
  }
};

namespace detail {

// Reshuffle a bipartite operator into the d_a^2 x d_b^2 coefficient matrix:
// C[(a,a'),(b,b')] = U[(a,b),(a',b')].
inline Matrix reshuffle(const Matrix& u, int da, int db) {
  Matrix c(da * da, db * db);
  for (int a = 0; a < da; ++a)
    for (int ap = 0; ap < da; ++ap)
      for (int b = 0; b < db; ++b)
        for (int bp = 0; bp < db; ++bp)
          c(a * da + ap, b * db + bp) = u(a * db + b, ap * db + bp);
  return c;
}

inline Matrix unvec_col(const Vector& v, int d) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = v(i * d + j);
  return m;
}

// For 2x2 matrices: coordinates in which unitary-proportional matrices are
// exactly the complex multiples of real vectors. M = sum_mu v_mu P_mu /sqrt(2)
// maps to u = (v_0, -i v_1, -i v_2, -i v_3).
inline Eigen::Vector4cd su2_coords(const Matrix& m) {
  const Matrix paulis[4] = {gates::identity(2), gates::pauli_x(), gates::pauli_y(),
                            gates::pauli_z()};
  Eigen::Vector4cd u;
  for (int mu = 0; mu < 4; ++mu) {
    Cplx v = (paulis[mu].adjoint() * m).trace() / std::sqrt(2.0);
    u(mu) = (mu == 0) ? v : Cplx(0, -1) * v;
  }
  return u;
}

inline Matrix from_su2_coords(const Eigen::Vector4cd& u) {
  const Matrix paulis[4] = {gates::identity(2), gates::pauli_x(), gates::pauli_y(),
                            gates::pauli_z()};
  Matrix m = Matrix::Zero(2, 2);
  for (int mu = 0; mu < 4; ++mu) {
    Cplx v = (mu == 0) ? u(mu) : Cplx(0, 1) * u(mu);
    m += v * paulis[mu] / std::sqrt(2.0);
  }
  return m;
}

// Rotate a degenerate block of HS-orthonormal 2x2 factor pairs onto a basis
// where both sides are unitary-proportional, if one exists.
//
// In su2 coordinates a matrix is unitary-proportional iff its coordinate
// vector is a phase times a real vector. Writing a candidate basis element as
// A_m = sum_l q_l A'_l (so B_m = sum_l conj(q_l) B'_l), both-sided reality
// forces (conj(S_A) S_B) q = phase * q with S = E^T E the coordinate Gram
// matrices, plus the antilinear constraint conj(S_A) conj(q) = phase * q.
inline bool unitarize_block_2x2(std::vector<Matrix>& a_block, std::vector<Matrix>& b_block) {
  const int k = int(a_block.size());
  if (k == 1) return true;  // single factor: phase freedom only
  Eigen::MatrixXcd ea(4, k), eb(4, k);
  for (int l = 0; l < k; ++l) {
    ea.col(l) = su2_coords(a_block[l]);
    eb.col(l) = su2_coords(b_block[l]);
  }
  Eigen::MatrixXcd sa = ea.transpose() * ea;
  Eigen::MatrixXcd sb = eb.transpose() * eb;
  // spans must be conjugation-closed, i.e. the Gram matrices unitary
  auto near_unitary = [&](const Eigen::MatrixXcd& s) {
    return (s.adjoint() * s - Eigen::MatrixXcd::Identity(k, k)).norm() <= 1e-8 * k;
  };
  if (!near_unitary(sa) || !near_unitary(sb)) return false;

  Eigen::MatrixXcd g = sa.conjugate() * sb;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(g);
  if (es.info() != Eigen::Success) return false;

  // group eigenvectors by eigenvalue and resolve each eigenspace against the
  // antilinear constraint via its fixed-point (real) basis
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    Cplx ex = es.eigenvalues()(x), ey = es.eigenvalues()(y);
    if (std::abs(ex.real() - ey.real()) > 1e-8) return ex.real() < ey.real();
    return ex.imag() < ey.imag();
  });
  std::vector<Eigen::VectorXcd> basis;
  int start = 0;
  while (start < k) {
    int end = start + 1;
    while (end < k && std::abs(es.eigenvalues()(order[end]) - es.eigenvalues()(order[start])) < 1e-8)
      ++end;
    const int r = end - start;
    Eigen::MatrixXcd p(k, r);
    for (int i = 0; i < r; ++i) p.col(i) = es.eigenvectors().col(order[start + i]);
    // orthonormalize the eigenspace basis
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(p);
    p = Eigen::MatrixXcd(qr.householderQ()).leftCols(r);
    Eigen::MatrixXcd m = p.adjoint() * sa.conjugate() * p.conjugate();
    if ((m * m.conjugate() - Eigen::MatrixXcd::Identity(r, r)).norm() > 1e-7 * r) return false;
    // fixed basis of the antiunitary c -> M conj(c)
    std::vector<Eigen::VectorXcd> fixed;
    for (int seed = 0; seed < 2 * r && int(fixed.size()) < r; ++seed) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(r);
      if (seed < r)
        v(seed) = 1;
      else
        v(seed - r) = Cplx(0, 1);
      for (const auto& f : fixed) v -= f.dot(v) * f;
      Eigen::VectorXcd w = v + m * v.conjugate();
      if (w.norm() < 1e-6) w = Cplx(0, 1) * (v - m * v.conjugate());
      for (const auto& f : fixed) w -= f.dot(w) * f;
      if (w.norm() < 1e-6) continue;
      fixed.push_back(w.normalized());
    }
    if (int(fixed.size()) != r) return false;
    for (const auto& c : fixed) basis.push_back(p * c);
    start = end;
  }
  if (int(basis.size()) != k) return false;

  std::vector<Matrix> a_new(k), b_new(k);
  for (int m2 = 0; m2 < k; ++m2) {
    a_new[m2] = Matrix::Zero(a_block[0].rows(), a_block[0].cols());
    b_new[m2] = Matrix::Zero(b_block[0].rows(), b_block[0].cols());
    for (int l = 0; l < k; ++l) {
      a_new[m2] += basis[m2](l) * a_block[l];
      b_new[m2] += std::conj(basis[m2](l)) * b_block[l];
    }
  }
  a_block = std::move(a_new);
  b_block = std::move(b_new);
  return true;
}

inline bool lex_less(const Matrix& x, const Matrix& y) {
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) {
      double dr = x(i, j).real() - y(i, j).real();
      if (std::abs(dr) > 1e-9) return dr < 0;
      double di = x(i, j).imag() - y(i, j).imag();
      if (std::abs(di) > 1e-9) return di < 0;
    }
  return false;
}

}  // namespace detail

// Singular values of the reshuffled operator, scaled so that sum lambda^2 = 1
// for unitary input. Fast path shared with the benchmark harness.
inline std::vector<double> operator_schmidt_values(const Matrix& u, int da, int db) {
  Eigen::JacobiSVD<Matrix> svd(detail::reshuffle(u, da, db));
  std::vector<double> out(svd.singularValues().size());
  const double scale = std::sqrt(double(da) * db);
  for (size_t i = 0; i < out.size(); ++i) out[i] = svd.singularValues()(int(i)) / scale;
  return out;
}

inline LUD operator_schmidt(const Matrix& u, int da, int db, double sv_cutoff = 1e-12) {
  if (int(u.rows()) != da * db || u.rows() != u.cols())
    throw DimensionError("operator_schmidt: dimension mismatch");
  if (!is_unitary(u)) throw ValidationError("operator_schmidt: input not unitary");
  Eigen::JacobiSVD<Matrix> svd(detail::reshuffle(u, da, db),
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  LUD lud;
  lud.d_a = da;
  lud.d_b = db;
  std::vector<Matrix> a_hs, b_hs;  // HS-normalized factors
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) <= sv_cutoff) break;
    lud.lambdas.push_back(sv(i) / std::sqrt(double(da) * db));
    a_hs.push_back(detail::unvec_col(svd.matrixU().col(i), da));
    b_hs.push_back(detail::unvec_col(svd.matrixV().col(i).conjugate(), db));
  }
  const int n = int(lud.lambdas.size());

  // Degenerate singular-value blocks leave the factor basis free; for qubit
  // parties, rotate each block onto unitary-proportional factors.
  bool unitarizable = true;
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && std::abs(lud.lambdas[end] - lud.lambdas[start]) < 1e-8) ++end;
    if (da == 2 && db == 2) {
      std::vector<Matrix> ab(a_hs.begin() + start, a_hs.begin() + end);
      std::vector<Matrix> bb(b_hs.begin() + start, b_hs.begin() + end);
      if (detail::unitarize_block_2x2(ab, bb)) {
        std::copy(ab.begin(), ab.end(), a_hs.begin() + start);
        std::copy(bb.begin(), bb.end(), b_hs.begin() + start);
      } else {
        unitarizable = false;
      }
    }
    start = end;
  }

  // Scale to the unitary-factor convention and test it.
  lud.a_factors.resize(n);
  lud.b_factors.resize(n);
  bool all_unitary = unitarizable;
  for (int i = 0; i < n; ++i) {
    lud.a_factors[i] = std::sqrt(double(da)) * a_hs[i];
    lud.b_factors[i] = std::sqrt(double(db)) * b_hs[i];
    if (!is_unitary(lud.a_factors[i], kUnitaryFactorTol) ||
        !is_unitary(lud.b_factors[i], kUnitaryFactorTol))
      all_unitary = false;
  }
  if (!all_unitary) {
    // fall back to the HS-normalized convention
    for (int i = 0; i < n; ++i) {
      lud.a_factors[i] = a_hs[i];
      lud.b_factors[i] = b_hs[i];
      lud.lambdas[i] = sv(i);
    }
    lud.kak_like = false;
  } else {
    lud.kak_like = true;
  }

  // Deterministic output: phase-fix each A factor (largest-magnitude entry real
  // positive), then order ties lexicographically.
  for (int i = 0; i < n; ++i) {
    Eigen::Index rmax = 0, cmax = 0;
    lud.a_factors[i].cwiseAbs().maxCoeff(&rmax, &cmax);
    Cplx z = lud.a_factors[i](rmax, cmax);
    Cplx ph = z / std::abs(z);
    lud.a_factors[i] *= std::conj(ph);
    lud.b_factors[i] *= ph;
  }
  start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && std::abs(lud.lambdas[end] - lud.lambdas[start]) < 1e-8) ++end;
    std::vector<int> order(end - start);
    std::iota(order.begin(), order.end(), start);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return detail::lex_less(lud.a_factors[x], lud.a_factors[y]); });
    std::vector<Matrix> at, bt;
    for (int o : order) {
      at.push_back(lud.a_factors[o]);
      bt.push_back(lud.b_factors[o]);
    }
    std::copy(at.begin(), at.end(), lud.a_factors.begin() + start);
    std::copy(bt.begin(), bt.end(), lud.b_factors.begin() + start);
    start = end;
  }
  return lud;
}

// Schmidt coefficients of a pure state across a cut given by per-factor flags
// (true = row side). Descending, sum of squares 1.
inline std::vector<double> state_schmidt(const VectorizedOperator& v, const Space& space,
                                         const std::vector<bool>& row_side) {
  if (std::abs(purity(v) - 1.0) > 1e-8)
    throw ValidationError("state_schmidt: input state is not pure");
  Vector ket = pure_state_ket(v);
  Indexer idx(space);
  Space rows, cols;
  for (size_t k = 0; k < space.size(); ++k) (row_side[k] ? rows : cols).push_back(space[k]);
  Indexer ri(rows), ci(cols);
  Matrix m = Matrix::Zero(ri.total(), ci.total());
  for (int flat = 0; flat < idx.total(); ++flat) {
    auto t = idx.unpack(flat);
    std::vector<int> rpart, cpart;
    for (size_t k = 0; k < space.size(); ++k) (row_side[k] ? rpart : cpart).push_back(t[k]);
    m(ri.pack(rpart), ci.pack(cpart)) = ket(flat);
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  std::vector<double> out;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    double s = svd.singularValues()(i);
    if (s > 1e-10) out.push_back(s);
  }
  return out;
}

inline std::vector<bool> cut_by_party_a(const Space& space) {
  std::vector<bool> row;
  for (const auto& f : space) row.push_back(on_side_a(f.party));
  return row;
}

inline int schmidt_rank(const std::vector<double>& coeffs, double tol = 1e-8) {
  int n = 0;
  for (double c : coeffs)
    if (c > tol) ++n;
  return n;
}

inline double entanglement_entropy(const std::vector<double>& schmidt_coeffs) {
  double e = 0;
  for (double s : schmidt_coeffs) {
    double p = s * s;
    if (p > 1e-15) e -= p * std::log2(p);
  }
  return e;
}

inline double entanglement_entropy(const VectorizedOperator& v, const Space& space,
                                   const std::vector<bool>& row_side) {
  return entanglement_entropy(state_schmidt(v, space, row_side));
}

inline double entanglement_entropy(const ChoiState& choi) {
  return entanglement_entropy(choi.state, choi.space, cut_by_party_a(choi.space));
}

// Fully entangled fraction F_d of a resource state. For a pure two-qudit state
// with Schmidt coefficients s: F_d = (sum of the d largest s_i)^2 / d.
inline double fully_entangled_fraction(const ResourceState& rho, int d) {
  if (d < 1) throw ValidationError("fully_entangled_fraction: d must be positive");
  if (rho.kind == ResourceState::Kind::Separable) return 1.0 / d;
  auto s = rho.schmidt_coefficients();
  double sum = 0;
  for (int i = 0; i < d && i < int(s.size()); ++i) sum += s[i];
  return sum * sum / d;
}

}  // namespace qknit
