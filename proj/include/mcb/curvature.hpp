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

// Ollivier curvature of a kernel step and the aggregates built on it.

#ifndef MCB_CURVATURE_HPP_
#define MCB_CURVATURE_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcb/chain.hpp"
#include "mcb/parallel.hpp"
#include "mcb/transport.hpp"

namespace mcb {

// kappa = inf_{x != y} 1 - W1(P(x,.), P(y,.)) / d(x, y), exhaustive pair scan.
inline double ollivier_kappa(const FiniteKernel& p, const FiniteMetricSpace& space, int threads = 1) {
  const int n = p.size();
  if (n != space.size()) throw ModelError("ollivier_kappa: kernel and space sizes differ");
  if (n < 2) return 1.0;
  std::vector<Atoms> rows(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) rows[static_cast<std::size_t>(x)] = atoms_of(p.matrix().row(x).transpose());
  // Row x scans y > x; per-row minima are reduced afterwards.
  std::vector<double> row_min(static_cast<std::size_t>(n), 1.0);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t x) {
    double best = 1.0;
    for (int y = static_cast<int>(x) + 1; y < n; ++y) {
      const double w = wasserstein1_atoms(rows[x], rows[static_cast<std::size_t>(y)], space.matrix());
      best = std::min(best, 1.0 - w / space(static_cast<int>(x), y));
    }
    row_min[x] = best;
  });
  return *std::min_element(row_min.begin(), row_min.end());
}

inline double ollivier_kappa(const FiniteMarkovModel& model, int t, int threads = 1) {
  return ollivier_kappa(*model.kernel(t), model.space(), threads);
}

// kappa_1..kappa_T in [0, 1]. Values in [-1e-6, 0) are round-off and clamp
// to 0; anything lower means the kernel expands distances and is rejected.
class CurvatureProfile {
 public:
  CurvatureProfile() = default;

  explicit CurvatureProfile(std::vector<double> kappas) : kappas_(std::move(kappas)) {
    for (std::size_t t = 0; t < kappas_.size(); ++t) {
      double& k = kappas_[t];
      if (!std::isfinite(k) || k < -1e-6 || k > 1.0 + 1e-9) {
        throw ModelError("curvature profile: kappa_" + std::to_string(t + 1) + " = " + std::to_string(k) +
                         " outside [0, 1]");
      }
      if (k < 0.0) {
        k = 0.0;
        ++clamped_;
      }
      k = std::min(k, 1.0);
    }
  }

  const std::vector<double>& values() const { return kappas_; }
  std::size_t size() const { return kappas_.size(); }
  double operator[](std::size_t t) const { return kappas_[t]; }
  int clamped() const { return clamped_; }

 private:
  std::vector<double> kappas_;
  int clamped_ = 0;
};

// An aggregate rate together with the flag raised when it is below 1e-6.
struct EffectiveRate {
  double value = 1.0;
  bool assumption_weak = false;
};

inline EffectiveRate make_rate(double worst_sum) {
  EffectiveRate r;
  r.value = 1.0 / worst_sum;
  r.assumption_weak = r.value < 1e-6;
  return r;
}

// 1 / max_t (1 + sum_{k<=t} prod_{l=k}^{t} (1 - kappa_l)).
inline EffectiveRate effective_kappa(const CurvatureProfile& profile) {
  double tail = 0.0;
  double worst = 1.0;
  for (double k : profile.values()) {
    tail = (1.0 - k) * (1.0 + tail);
    worst = std::max(worst, 1.0 + tail);
  }
  return make_rate(worst);
}

// 1 / max over windows s <= t of (1 + sum_{k=s}^{t} prod_{l=s}^{k} (1 - kappa_l)).
// For fixed s the sum grows with t, so only t = T matters.
inline EffectiveRate effective_kappa_tilde(const CurvatureProfile& profile) {
  double head = 0.0;
  double worst = 1.0;
  const auto& k = profile.values();
  for (std::size_t s = k.size(); s-- > 0;) {
    head = (1.0 - k[s]) * (1.0 + head);
    worst = std::max(worst, 1.0 + head);
  }
  return make_rate(worst);
}

// sum_{i=1}^{n} e^{pi kappa (i-1) / 24} prod_{l=n-i+2}^{n} (1 - kappa_l).
inline double tilted_sum(const CurvatureProfile& profile, double kappa, int n) {
  if (n < 1 || static_cast<std::size_t>(n) > profile.size()) {
    throw std::invalid_argument("tilted_sum: n = " + std::to_string(n) + " outside profile of length " +
                                std::to_string(profile.size()));
  }
  const double r = std::exp(std::numbers::pi * kappa / 24.0);
  double prod = 1.0;
  double weight = 1.0;
  double sum = 0.0;
  for (int i = 1; i <= n; ++i) {
    if (i >= 2) {
      prod *= 1.0 - profile[static_cast<std::size_t>(n - i + 1)];  // kappa_{n-i+2}
      weight *= r;
    }
    sum += weight * prod;
  }
  return sum;
}

inline CurvatureProfile curvature_profile(const FiniteMarkovModel& model, int horizon, int threads = 1) {
  std::vector<double> kappas(static_cast<std::size_t>(horizon));
  std::vector<std::pair<int, double>> cache;  // (kernel slot, kappa)
  for (int t = 1; t <= horizon; ++t) {
    const int slot = model.kernels().slot(t);
    const auto hit = std::find_if(cache.begin(), cache.end(), [&](const auto& e) { return e.first == slot; });
    if (hit != cache.end()) {
      kappas[static_cast<std::size_t>(t - 1)] = hit->second;
      continue;
    }
    const double k = ollivier_kappa(model, t, threads);
    cache.emplace_back(slot, k);
    kappas[static_cast<std::size_t>(t - 1)] = k;
  }
  return CurvatureProfile(std::move(kappas));
}

}  // namespace mcb

#endif  // MCB_CURVATURE_HPP_
