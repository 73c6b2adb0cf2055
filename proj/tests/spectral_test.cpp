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

#include "mcb/random_models.hpp"
#include "mcb/spectral.hpp"

namespace mcb {
namespace {

TEST(SigmaStep, EqualRowsGiveZero) {
  Stream s(1);
  const RealVector pi = random_distribution(4, s);
  const RealVector mu_prev = random_distribution(4, s);
  EXPECT_NEAR(sigma_step(FiniteKernel::rank_one(pi), mu_prev, pi), 0.0, 1e-12);
}

TEST(SigmaStep, IdentityGivesOne) {
  Stream s(2);
  const RealVector mu = random_distribution(5, s);
  EXPECT_NEAR(sigma_step(FiniteKernel::identity(5), mu, mu), 1.0, 1e-12);
}

TEST(SigmaStep, SymmetricTwoState) {
  const RealVector u = RealVector::Constant(2, 0.5);
  for (double p : {0.0, 0.1, 0.3, 0.5, 0.8, 1.0}) {
    const FiniteKernel k(RealMatrix{{1 - p, p}, {p, 1 - p}});
    EXPECT_NEAR(sigma_step(k, u, u), std::abs(1 - 2 * p), 1e-12) << "p=" << p;
  }
}

TEST(SigmaStep, RestrictsToSupports) {
  // State 2 carries no mass at either time and is unreachable.
  const FiniteKernel k(RealMatrix{{0.5, 0.5, 0.0}, {0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}});
  const RealVector mu{{0.5, 0.5, 0.0}};
  EXPECT_NEAR(sigma_step(k, mu, mu), 0.0, 1e-12);
}

TEST(SigmaStep, ZeroMassReachableStateIsAnError) {
  const FiniteKernel k(RealMatrix{{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_THROW(sigma_step(k, RealVector{{1.0, 0.0}}, RealVector{{1.0, 0.0}}), NumericalError);
}

TEST(SigmaStep, AtMostOneOnRandomChains) {
  Stream s(3);
  for (int k = 0; k < 500; ++k) {
    RandomChainOptions opt;
    opt.states = 2 + static_cast<int>(s.below(5));
    opt.horizon = 3;
    opt.min_mix = 0.0;
    opt.point_start = s.bernoulli(0.3);
    const FiniteMarkovModel model = random_chain(opt, s);
    for (int t = 1; t <= 3; ++t) EXPECT_LE(sigma_t(model, t), 1.0 + 1e-12);
  }
}

// Weighted Frobenius norm sqrt(sum_x mu(x) |F(x)|_F^2).
double weighted_norm(const std::vector<ComplexMatrix>& f, const RealVector& mu) {
  double acc = 0.0;
  for (Eigen::Index x = 0; x < mu.size(); ++x) acc += mu(x) * f[static_cast<std::size_t>(x)].squaredNorm();
  return std::sqrt(acc);
}

TEST(SigmaStep, MatrixValuedContraction) {
  Stream s(4);
  for (int k = 0; k < 200; ++k) {
    const int n = 2 + static_cast<int>(s.below(4));
    const int m = 1 + static_cast<int>(s.below(3));
    const FiniteKernel p = random_kernel(n, s);
    const RealVector mu_prev = random_distribution(n, s);
    const RealVector mu = p.matrix().transpose() * mu_prev;
    const double sigma = sigma_step(p, mu_prev, mu);
    std::vector<ComplexMatrix> f;
    ComplexMatrix mean = ComplexMatrix::Zero(m, m);
    for (int x = 0; x < n; ++x) {
      f.push_back(random_hermitian(m, 1.0, s).matrix());
      mean += mu(x) * f.back();
    }
    for (auto& v : f) v -= mean;
    std::vector<ComplexMatrix> pf;
    for (int x = 0; x < n; ++x) {
      ComplexMatrix acc = ComplexMatrix::Zero(m, m);
      for (int y = 0; y < n; ++y) acc += p(x, y) * f[static_cast<std::size_t>(y)];
      pf.push_back(acc);
    }
    EXPECT_LE(weighted_norm(pf, mu_prev), sigma * weighted_norm(f, mu) + 1e-9);
  }
}

TEST(SigmaStep, VariationalSamplesNeverExceed) {
  Stream s(5);
  for (int k = 0; k < 20; ++k) {
    const int n = 2 + static_cast<int>(s.below(5));
    const FiniteKernel p = random_kernel(n, s, 0.2);
    const RealVector mu_prev = random_distribution(n, s);
    const RealVector mu = p.matrix().transpose() * mu_prev;
    const double sigma = sigma_step(p, mu_prev, mu);
    double best = 0.0;
    for (int r = 0; r < 1000; ++r) {
      RealVector f(n);
      for (int y = 0; y < n; ++y) f(y) = normal(s);
      f.array() -= mu.dot(f);
      const double den = std::sqrt(mu.dot(f.cwiseProduct(f)));
      const RealVector pf = p.matrix() * f;
      best = std::max(best, std::sqrt(mu_prev.dot(pf.cwiseProduct(pf))) / den);
    }
    EXPECT_LE(best, sigma + 1e-9);
    EXPECT_GE(best, 0.5 * sigma - 1e-9);
  }
}

TEST(EffectiveLambda, Examples) {
  EXPECT_DOUBLE_EQ(effective_lambda(SigmaProfile(std::vector<double>(9, 0.0))).value, 1.0);
  EXPECT_NEAR(effective_lambda(SigmaProfile(std::vector<double>(5000, 0.6))).value, 0.4, 1e-12);
  EXPECT_NEAR(effective_lambda(SigmaProfile({0.5, 0.9})).value, 1.0 / 2.35, 1e-15);
  EXPECT_TRUE(effective_lambda(SigmaProfile(std::vector<double>(2000000, 1.0))).assumption_weak);
}

TEST(SigmaProfile, IdentityAndMixingModels) {
  const FiniteMetricSpace space = FiniteMetricSpace::line(std::vector<double>{0, 1, 2});
  const RealVector u = RealVector::Constant(3, 1.0 / 3);
  const FiniteMarkovModel id(space, u, KernelSequence::list({FiniteKernel::identity(3)}, true));
  const FiniteMarkovModel mix(space, u, KernelSequence::list({FiniteKernel::rank_one(u)}, true));
  const SigmaProfile frozen = sigma_profile(id, 4);
  const SigmaProfile mixed = sigma_profile(mix, 4);
  for (double v : frozen.values()) EXPECT_NEAR(v, 1.0, 1e-12);
  for (double v : mixed.values()) EXPECT_NEAR(v, 0.0, 1e-12);
}

}  // namespace
}  // namespace mcb
