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

// Seeded generators for random instances: matrices, metrics, kernels,
// chains and observables.

#ifndef MCB_RANDOM_MODELS_HPP_
#define MCB_RANDOM_MODELS_HPP_

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mcb/chain.hpp"
#include "mcb/linalg.hpp"
#include "mcb/rng.hpp"

namespace mcb {

inline double normal(Stream& s) { return std::normal_distribution<double>(0.0, 1.0)(s); }

// Entries i.i.d. complex Gaussian with E|a_ij|^2 = scale^2.
inline ComplexMatrix random_complex(int m, double scale, Stream& s) {
  ComplexMatrix a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = Complex(normal(s), normal(s)) * (scale / std::numbers::sqrt2);
  return a;
}

inline HermitianMatrix random_hermitian(int m, double scale, Stream& s) {
  return HermitianMatrix(random_complex(m, scale, s));
}

// Strictly positive weights normalized to 1 (flat Dirichlet).
inline RealVector random_distribution(int n, Stream& s) {
  RealVector p(n);
  for (int i = 0; i < n; ++i) p(i) = -std::log1p(-s.uniform()) + 1e-12;
  return p / p.sum();
}

// Off-diagonal distances uniform in [1, 2]; any such matrix is a metric.
inline FiniteMetricSpace random_metric(int n, Stream& s) {
  RealMatrix d = RealMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = s.uniform(1.0, 2.0);
  return FiniteMetricSpace(std::move(d));
}

inline RealMatrix renormalize_rows(RealMatrix p) {
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) /= p.row(i).sum();
  return p;
}

// Dense random row-stochastic matrix; with sparsity > 0 each off-diagonal
// entry is zeroed with that probability (the diagonal keeps rows valid).
inline FiniteKernel random_kernel(int n, Stream& s, double sparsity = 0.0) {
  RealMatrix p(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      p(i, j) = (i != j && s.uniform() < sparsity) ? 0.0 : -std::log1p(-s.uniform()) + 1e-12;
  return FiniteKernel(renormalize_rows(std::move(p)));
}

// (1 - a) R + a 1 pi^T with a in [min_mix, max_mix]: the rank-one part
// pulls rows together, so on metrics with d in [1, 2] kappa >= 2a - 1.
inline FiniteKernel random_mixing_kernel(int n, Stream& s, double min_mix, double max_mix = 0.95) {
  const double a = s.uniform(min_mix, max_mix);
  const RealMatrix r = random_kernel(n, s).matrix();
  const RealVector pi = random_distribution(n, s);
  RealMatrix p = (1.0 - a) * r;
  for (int i = 0; i < n; ++i) p.row(i) += a * pi.transpose();
  return FiniteKernel(renormalize_rows(std::move(p)));
}

struct RandomChainOptions {
  int states = 3;
  int horizon = 5;
  double min_mix = 0.5;
  double max_mix = 0.95;
  bool point_start = false;  // mu0 = delta_0 instead of a random law
};

inline FiniteMarkovModel random_chain(const RandomChainOptions& opt, Stream& s) {
  FiniteMetricSpace space = random_metric(opt.states, s);
  RealVector mu0 = RealVector::Zero(opt.states);
  if (opt.point_start) {
    mu0(0) = 1.0;
  } else {
    mu0 = random_distribution(opt.states, s);
  }
  std::vector<FiniteKernel> kernels;
  kernels.reserve(static_cast<std::size_t>(opt.horizon));
  for (int t = 0; t < opt.horizon; ++t) kernels.push_back(random_mixing_kernel(opt.states, s, opt.min_mix, opt.max_mix));
  return FiniteMarkovModel(std::move(space), std::move(mu0), KernelSequence::list(std::move(kernels)));
}

// Independent Hermitian values per (t, x) for t = 1..horizon.
inline ObservableSequence random_observables(int states, int horizon, int m, double scale, Stream& s) {
  std::vector<std::vector<HermitianMatrix>> frames(static_cast<std::size_t>(horizon));
  for (auto& f : frames) {
    f.reserve(static_cast<std::size_t>(states));
    for (int x = 0; x < states; ++x) f.push_back(random_hermitian(m, scale, s));
  }
  return ObservableSequence(std::move(frames), /*periodic=*/false);
}

}  // namespace mcb

#endif  // MCB_RANDOM_MODELS_HPP_
