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

// The dyadic chain X_t = X_{t-1}/2 + (D/2) B_t on [0, D] with fair bits B_t,
// its cosine observables, and a finite grid version of the same kernel.

#ifndef MCB_DYADIC_HPP_
#define MCB_DYADIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcb/chain.hpp"
#include "mcb/parallel.hpp"
#include "mcb/rng.hpp"
#include "mcb/stats.hpp"

namespace mcb {

// W1 between (delta_a + delta_b)/2 and (delta_c + delta_d)/2 on the line:
// the monotone (sorted) matching is optimal.
inline double two_atom_w1(double a, double b, double c, double d) {
  if (a > b) std::swap(a, b);
  if (c > d) std::swap(c, d);
  return 0.5 * (std::abs(a - c) + std::abs(b - d));
}

// 1 - W1(P(x,.), P(y,.)) / |x - y| for the continuous dyadic kernel.
inline double dyadic_pair_curvature(double x, double y, double D) {
  const double w = two_atom_w1(x / 2.0, x / 2.0 + D / 2.0, y / 2.0, y / 2.0 + D / 2.0);
  return 1.0 - w / std::abs(x - y);
}

// Largest l with pi * Delta * 2^l <= L * D.
inline int dyadic_horizon(double D, double delta, double L) {
  if (!(D > 0.0 && delta > 0.0 && L > 0.0)) throw std::invalid_argument("dyadic: D, Delta, L must be > 0");
  const double ratio = L * D / (std::numbers::pi * delta);
  if (ratio < 2.0) throw std::invalid_argument("dyadic: need pi * Delta * 2 <= L * D so that l >= 1");
  int l = static_cast<int>(std::floor(std::log2(ratio)));
  while (std::numbers::pi * delta * std::ldexp(1.0, l + 1) <= L * D) ++l;
  while (std::numbers::pi * delta * std::ldexp(1.0, l) > L * D) --l;
  return l;
}

// F_t(x) = (Delta/2) cos(2 pi 2^t x / D).
inline double dyadic_observable(int t, double x, double D, double delta) {
  return 0.5 * delta * std::cos(2.0 * std::numbers::pi * std::ldexp(x, t) / D);
}

struct TightnessReport {
  int ell = 0;
  std::int64_t reps = 0;
  std::int64_t exceed = 0;  // #{S_l > Delta l / 4}
  double p_hat = 0.0;
  double se = 0.0;
  double max_identity_error = 0.0;  // max |S_l - (Delta/2) l cos(2 pi X_0 / D)|
  double identity_tolerance = 0.0;
  double mean = 0.0;  // of S_l
  double mean_se = 0.0;

  bool identity_ok() const { return max_identity_error <= identity_tolerance; }
};

inline TightnessReport tightness_experiment(double D, double delta, double L, std::int64_t reps, std::uint64_t seed,
                                            int threads = 1) {
  if (reps < 1) throw std::invalid_argument("tightness: need at least one trajectory");
  TightnessReport rep;
  rep.ell = dyadic_horizon(D, delta, L);
  rep.reps = reps;
  rep.identity_tolerance = 1e-6 * rep.ell * delta;
  const Stream master(seed);
  std::vector<double> sums(static_cast<std::size_t>(reps));
  std::vector<double> errors(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    Stream s = master.child(r);
    const double x0 = s.uniform(0.0, D);
    double x = x0;
    double sum = 0.0;
    for (int t = 1; t <= rep.ell; ++t) {
      x = x / 2.0 + (s.bernoulli(0.5) ? D / 2.0 : 0.0);
      sum += dyadic_observable(t, x, D, delta);
    }
    sums[r] = sum;
    errors[r] = std::abs(sum - 0.5 * delta * rep.ell * std::cos(2.0 * std::numbers::pi * x0 / D));
  });
  RunningMoments mom;
  for (std::size_t r = 0; r < sums.size(); ++r) {
    mom.add(sums[r]);
    rep.exceed += sums[r] > delta * rep.ell / 4.0;
    rep.max_identity_error = std::max(rep.max_identity_error, errors[r]);
  }
  rep.p_hat = static_cast<double>(rep.exceed) / static_cast<double>(reps);
  rep.se = binomial_se(1.0 / 3.0, reps);
  rep.mean = mom.mean;
  rep.mean_se = mom.standard_error();
  return rep;
}

// Grid {k D / 2^J : 0 <= k <= 2^J}. The two atoms x/2 and x/2 + D/2 of the
// dyadic kernel land on the grid for even k; for odd k each atom is split
// evenly between its two grid neighbours. The split preserves means and keeps
// the kernel stochastically monotone, so W1(P(x), P(y)) = |x - y| / 2 exactly.
// Support diameters are D/2 on even states and D/2 + D/2^J on odd ones.
inline FiniteKernel dyadic_grid_kernel(int J) {
  if (J < 1 || J > 12) throw std::invalid_argument("dyadic grid: need 1 <= J <= 12");
  const int n = 1 << J;
  RealMatrix p = RealMatrix::Zero(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) {
    for (int shift : {0, n / 2}) {
      if (k % 2 == 0) {
        p(k, k / 2 + shift) += 0.5;
      } else {
        p(k, (k - 1) / 2 + shift) += 0.25;
        p(k, (k + 1) / 2 + shift) += 0.25;
      }
    }
  }
  return FiniteKernel(std::move(p));
}

inline FiniteMetricSpace dyadic_grid_space(int J, double D) {
  if (J < 1 || J > 12) throw std::invalid_argument("dyadic grid: need 1 <= J <= 12");
  std::vector<double> pts((static_cast<std::size_t>(1) << J) + 1);
  const double n = static_cast<double>(pts.size() - 1);
  for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = D * static_cast<double>(k) / n;
  return FiniteMetricSpace::line(pts);
}

}  // namespace mcb

#endif  // MCB_DYADIC_HPP_
