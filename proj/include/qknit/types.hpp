#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qknit {

using Cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-10;
inline constexpr double kUnitaryFactorTol = 1e-8;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vector kron_vec(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline bool is_unitary(const Matrix& m, double tol = kDefaultTol) {
  if (m.rows() != m.cols()) return false;
  Matrix g = m.adjoint() * m;
  return (g - Matrix::Identity(m.rows(), m.cols())).norm() <= tol * std::sqrt(double(m.rows()));
}

inline bool is_hermitian(const Matrix& m, double tol = kDefaultTol) {
  return m.rows() == m.cols() && (m - m.adjoint()).norm() <= tol;
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

namespace gates {

inline Matrix identity(int d) { return Matrix::Identity(d, d); }

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Cplx(0, -1), Cplx(0, 1), 0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Matrix hadamard() {
  Matrix m(2, 2);
  double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

inline Matrix cnot() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
  return m;
}

inline Matrix cz() {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = -1;
  return m;
}

inline Matrix swap_gate() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
  return m;
}

inline Matrix iswap() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(3, 3) = 1;
  m(1, 2) = m(2, 1) = Cplx(0, 1);
  return m;
}

inline Matrix cphase(double theta) {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = std::exp(Cplx(0, theta));
  return m;
}

// Generalized qudit shift and clock operators.
inline Matrix shift_x(int d) {
  Matrix m = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) m((j + 1) % d, j) = 1;
  return m;
}

inline Matrix clock_z(int d) {
  Matrix m = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) m(j, j) = std::exp(Cplx(0, 2.0 * M_PI * j / d));
  return m;
}

}  // namespace gates

}  // namespace qknit
