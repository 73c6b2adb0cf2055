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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "mcb/linalg.hpp"
#include "mcb/random_models.hpp"
#include "mcb/rng.hpp"

namespace mcb {
namespace {

TEST(HermitianMatrix, SymmetrizesInput) {
  ComplexMatrix a(2, 2);
  a << Complex(1, 0.5), Complex(2, 1), Complex(0, 0), Complex(3, 0);
  const HermitianMatrix h(a);
  EXPECT_NEAR(std::abs(h(0, 1) - std::conj(h(1, 0))), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(h(0, 0).imag(), 0.0);
  EXPECT_EQ(h(0, 1), Complex(1, 0.5));
}

TEST(HermitianMatrix, RejectsNonSquare) {
  EXPECT_THROW(HermitianMatrix(ComplexMatrix(2, 3)), std::invalid_argument);
}

TEST(LambdaMax, Diagonal) {
  const std::vector<double> d = {1.0, 2.0};
  EXPECT_DOUBLE_EQ(lambda_max(HermitianMatrix::diagonal(d)), 2.0);
  EXPECT_DOUBLE_EQ(lambda_max(HermitianMatrix::zero(3)), 0.0);
}

TEST(LambdaMax, DilationOfThreeFour) {
  const std::vector<double> v = {3.0, 4.0};
  const HermitianMatrix h = dilation(v);
  EXPECT_EQ(h.dim(), 3);
  EXPECT_NEAR(lambda_max(h), 5.0, 1e-12);
  EXPECT_NEAR(lambda_min(h), -5.0, 1e-12);
  // Brute-force cross-check with a general (non-Hermitian) eigensolver.
  Eigen::ComplexEigenSolver<ComplexMatrix> ces(h.matrix());
  double top = -1e300;
  for (Eigen::Index i = 0; i < 3; ++i) top = std::max(top, ces.eigenvalues()(i).real());
  EXPECT_NEAR(top, 5.0, 1e-10);
}

TEST(LambdaMax, MatchesSortedSpectrumOnRandom) {
  Stream s(11);
  for (int k = 0; k < 50; ++k) {
    const HermitianMatrix a = random_hermitian(1 + static_cast<int>(s.below(6)), 1.0, s);
    Eigen::ComplexEigenSolver<ComplexMatrix> ces(a.matrix());
    double top = -1e300;
    for (Eigen::Index i = 0; i < ces.eigenvalues().size(); ++i) top = std::max(top, ces.eigenvalues()(i).real());
    EXPECT_LE(std::abs(lambda_max(a) - top), 1e-10 * (1.0 + op_norm(a)));
  }
}

TEST(ExpmScaled, ZeroScaleIsIdentity) {
  Stream s(3);
  const HermitianMatrix a = random_hermitian(4, 1.0, s);
  EXPECT_NEAR((expm_scaled(a, Complex(0, 0)) - ComplexMatrix::Identity(4, 4)).norm(), 0.0, 1e-14);
}

TEST(ExpmScaled, DiagonalCase) {
  const std::vector<double> d = {1.0, -1.0};
  const ComplexMatrix e = expm_scaled(HermitianMatrix::diagonal(d), Complex(1, 0));
  EXPECT_NEAR(e(0, 0).real(), std::exp(1.0), 1e-14);
  EXPECT_NEAR(e(1, 1).real(), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(std::abs(e(0, 1)), 0.0, 1e-15);
}

TEST(ExpmScaled, MatchesScalingAndSquaring) {
  Stream s(5);
  for (int k = 0; k < 100; ++k) {
    const int m = 1 + static_cast<int>(s.below(6));
    const HermitianMatrix a = random_hermitian(m, 1.0, s);
    const Complex z(s.uniform(-2.0, 2.0), s.uniform(-2.0, 2.0));
    const ComplexMatrix ref = (z * a.matrix()).exp();
    const ComplexMatrix got = expm_scaled(a, z);
    EXPECT_LE((got - ref).norm(), 1e-9 * ref.norm()) << "instance " << k;
  }
}

TEST(ExpmScaled, NormBoundedByExponentOfNorm) {
  Stream s(7);
  for (int k = 0; k < 100; ++k) {
    const HermitianMatrix a = random_hermitian(1 + static_cast<int>(s.below(5)), 1.0, s);
    const Complex z(s.uniform(-1.5, 1.5), s.uniform(-1.5, 1.5));
    EXPECT_LE(op_norm(expm_scaled(a, z)), std::exp(std::abs(z) * op_norm(a)) * (1.0 + 1e-12));
  }
}

TEST(Norms, Examples) {
  const std::vector<double> d = {1.0, -3.0};
  EXPECT_NEAR(op_norm(ComplexMatrix(HermitianMatrix::diagonal(d).matrix())), 3.0, 1e-14);
  EXPECT_NEAR(op_norm(HermitianMatrix::diagonal(d)), 3.0, 1e-14);
  EXPECT_DOUBLE_EQ(frobenius_norm(ComplexMatrix(ComplexMatrix::Identity(4, 4))), 2.0);
  EXPECT_NEAR(trace_exp(HermitianMatrix::zero(3)), 3.0, 1e-14);
}

TEST(Norms, OpNormOfHermitianMatchesSvd) {
  Stream s(13);
  for (int k = 0; k < 50; ++k) {
    const HermitianMatrix a = random_hermitian(1 + static_cast<int>(s.below(6)), 2.0, s);
    EXPECT_NEAR(op_norm(a), op_norm(a.matrix()), 1e-10 * (1.0 + op_norm(a)));
    EXPECT_LE(op_norm(a), frobenius_norm(a) + 1e-12);
  }
}

TEST(TraceExp, DominatesTopEigenvalue) {
  Stream s(17);
  for (int k = 0; k < 100; ++k) {
    const HermitianMatrix a = random_hermitian(1 + static_cast<int>(s.below(6)), 1.0, s);
    const double t = s.uniform(-3.0, 3.0);
    EXPECT_GE(trace_exp(t * a), std::exp(t * lambda_max(a)) * (1.0 - 1e-12));
  }
}

TEST(Dilation, Examples) {
  const std::vector<double> zero = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(frobenius_norm(dilation(zero)), 0.0);
  const std::vector<double> one = {1.0};
  const HermitianMatrix d = dilation(one);
  EXPECT_EQ(d(0, 1), Complex(1, 0));
  EXPECT_EQ(d(1, 0), Complex(1, 0));
  EXPECT_NEAR(lambda_max(d), 1.0, 1e-15);
}

TEST(Dilation, OpNormIsEuclideanNorm) {
  Stream s(19);
  for (int k = 0; k < 200; ++k) {
    RealVector v(1 + static_cast<int>(s.below(12)));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(s);
    EXPECT_NEAR(op_norm(dilation(v)), v.norm(), 1e-12 * (1.0 + v.norm()));
  }
}

TEST(ExpBounds, DifferenceBoundsOnRandomComplex) {
  Stream s(23);
  for (int k = 0; k < 100; ++k) {
    const int m = 1 + static_cast<int>(s.below(5));
    const ComplexMatrix a = random_complex(m, 0.7, s);
    const ComplexMatrix b = random_complex(m, 0.7, s);
    const double r = std::max(op_norm(a), op_norm(b));
    const ComplexMatrix d = a.exp() - b.exp();
    EXPECT_LE(op_norm(d), std::exp(r) * op_norm(ComplexMatrix(a - b)) * (1.0 + 1e-9));
    EXPECT_LE(d.norm(), std::exp(r) * (a - b).norm() * (1.0 + 1e-9));
  }
}

}  // namespace
}  // namespace mcb
