// Copyright 2026 The MCB Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense complex linear algebra on small Hermitian matrices: spectra,
// exponentials, norms and vector dilations.

#ifndef MCB_LINALG_HPP_
#define MCB_LINALG_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>

namespace mcb {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Raised when an iterative numerical routine fails to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Square complex matrix with A = A*. The constructor symmetrizes its input,
// (A + A*) / 2, so accumulated round-off never produces an invalid value.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(const ComplexMatrix& a) : a_(a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
      throw std::invalid_argument("HermitianMatrix: need a non-empty square matrix, got " +
                                  std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
    symmetrize();
  }

  explicit HermitianMatrix(const RealMatrix& a) : HermitianMatrix(ComplexMatrix(a.cast<Complex>())) {}

  static HermitianMatrix zero(int m) { return HermitianMatrix(ComplexMatrix(ComplexMatrix::Zero(m, m))); }
  static HermitianMatrix identity(int m) { return HermitianMatrix(ComplexMatrix(ComplexMatrix::Identity(m, m))); }

  static HermitianMatrix diagonal(std::span<const double> d) {
    ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(d.size()),
                                          static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) a(i, i) = d[i];
    return HermitianMatrix(a);
  }

  int dim() const { return static_cast<int>(a_.rows()); }
  const ComplexMatrix& matrix() const { return a_; }
  Complex operator()(int i, int j) const { return a_(i, j); }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    a_ += o.a_;
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& o) {
    a_ -= o.a_;
    return *this;
  }
  HermitianMatrix& operator*=(double s) {
    a_ *= s;
    return *this;
  }

  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }
  friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }

 private:
  void symmetrize() {
    ComplexMatrix adj = a_.adjoint();
    a_ = 0.5 * (a_ + adj);
    for (Eigen::Index i = 0; i < a_.rows(); ++i) a_(i, i) = a_(i, i).real();
  }

  ComplexMatrix a_;
};

struct Eigensystem {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns are orthonormal eigenvectors
};

inline Eigensystem eigensystem(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver did not converge (dim " + std::to_string(a.dim()) +
                         ")");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline RealVector eigenvalues(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver did not converge (dim " + std::to_string(a.dim()) +
                         ")");
  }
  return solver.eigenvalues();
}

inline double lambda_max(const HermitianMatrix& a) { return eigenvalues(a).maxCoeff(); }
inline double lambda_min(const HermitianMatrix& a) { return eigenvalues(a).minCoeff(); }

// e^{zA} = U e^{z Lambda} U*.
inline ComplexMatrix expm_scaled(const HermitianMatrix& a, Complex z) {
  const Eigensystem es = eigensystem(a);
  Eigen::VectorXcd d(es.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::exp(z * es.values(i));
  return es.vectors * d.asDiagonal() * es.vectors.adjoint();
}

// Real scaling keeps the result Hermitian.
inline HermitianMatrix expm_hermitian(const HermitianMatrix& a, double s) {
  return HermitianMatrix(expm_scaled(a, Complex(s, 0.0)));
}

inline double op_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

// For Hermitian input the operator norm is the largest |eigenvalue|.
inline double op_norm(const HermitianMatrix& a) {
  const RealVector ev = eigenvalues(a);
  return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
}

inline double frobenius_norm(const ComplexMatrix& a) { return a.norm(); }
inline double frobenius_norm(const HermitianMatrix& a) { return a.matrix().norm(); }

inline double trace_exp(const HermitianMatrix& a) { return eigenvalues(a).array().exp().sum(); }

// (n+1)x(n+1) matrix [[0, v^T], [v, 0]]; its spectrum is {+|v|, -|v|, 0, ...}.
inline HermitianMatrix dilation(std::span<const double> v) {
  const auto n = static_cast<Eigen::Index>(v.size());
  ComplexMatrix a = ComplexMatrix::Zero(n + 1, n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(0, i + 1) = v[static_cast<std::size_t>(i)];
    a(i + 1, 0) = v[static_cast<std::size_t>(i)];
  }
  return HermitianMatrix(a);
}

inline HermitianMatrix dilation(const RealVector& v) {
  return dilation(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

}  // namespace mcb

#endif  // MCB_LINALG_HPP_
