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

// One-step second singular values of a kernel between consecutive marginals
// and the effective gap aggregated from them.

#ifndef MCB_SPECTRAL_HPP_
#define MCB_SPECTRAL_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcb/chain.hpp"
#include "mcb/curvature.hpp"

namespace mcb {

// Norm of P on mean-zero functions, L2(mu) -> L2(mu_prev). Both sides are
// restricted to their supports; B = D'^{1/2} P D^{-1/2} with the constant
// direction u = sqrt(mu) projected out.
inline double sigma_step(const FiniteKernel& p, const RealVector& mu_prev, const RealVector& mu) {
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<int> col_pos(static_cast<std::size_t>(mu.size()), -1);
  for (Eigen::Index x = 0; x < mu_prev.size(); ++x)
    if (mu_prev(x) > 0.0) rows.push_back(static_cast<int>(x));
  for (Eigen::Index y = 0; y < mu.size(); ++y) {
    if (mu(y) > 0.0) {
      col_pos[static_cast<std::size_t>(y)] = static_cast<int>(cols.size());
      cols.push_back(static_cast<int>(y));
    }
  }
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(cols.size());
  RealMatrix b = RealMatrix::Zero(r, c);
  for (Eigen::Index a = 0; a < r; ++a) {
    const int x = rows[static_cast<std::size_t>(a)];
    for (int y = 0; y < p.size(); ++y) {
      if (p(x, y) == 0.0) continue;
      const int k = col_pos[static_cast<std::size_t>(y)];
      if (k < 0) {
        throw NumericalError("sigma: state " + std::to_string(y) + " is reachable from the support of mu_{t-1} " +
                             "but has zero mass under mu_t");
      }
      b(a, k) = std::sqrt(mu_prev(x)) * p(x, y) / std::sqrt(mu(y));
    }
  }
  RealVector u(c);
  for (Eigen::Index k = 0; k < c; ++k) u(k) = std::sqrt(mu(cols[static_cast<std::size_t>(k)]));
  u /= u.norm();
  const RealMatrix bt = b - (b * u) * u.transpose();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(bt.transpose() * bt, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("sigma: eigensolver did not converge");
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

inline double sigma_t(const FiniteMarkovModel& model, int t) {
  if (t < 1) throw std::invalid_argument("sigma_t: need t >= 1");
  const auto mus = marginals(model, t);
  return sigma_step(*model.kernel(t), mus[static_cast<std::size_t>(t - 1)], mus[static_cast<std::size_t>(t)]);
}

class SigmaProfile {
 public:
  SigmaProfile() = default;

  explicit SigmaProfile(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
    for (std::size_t t = 0; t < sigmas_.size(); ++t) {
      if (!(sigmas_[t] >= 0.0) || sigmas_[t] > 1.0 + 1e-10) {
        throw NumericalError("sigma profile: sigma_" + std::to_string(t + 1) + " = " +
                             std::to_string(sigmas_[t]) + " outside [0, 1]");
      }
    }
  }

  const std::vector<double>& values() const { return sigmas_; }
  std::size_t size() const { return sigmas_.size(); }
  double operator[](std::size_t t) const { return sigmas_[t]; }

 private:
  std::vector<double> sigmas_;
};

inline SigmaProfile sigma_profile(const FiniteMarkovModel& model, int horizon) {
  const auto mus = marginals(model, horizon);
  std::vector<double> s(static_cast<std::size_t>(horizon));
  for (int t = 1; t <= horizon; ++t) {
    s[static_cast<std::size_t>(t - 1)] =
        sigma_step(*model.kernel(t), mus[static_cast<std::size_t>(t - 1)], mus[static_cast<std::size_t>(t)]);
  }
  return SigmaProfile(std::move(s));
}

// 1 / max_t sum_{k=1}^{t+1} prod_{l=k}^{t} sigma_l.
inline EffectiveRate effective_lambda(const SigmaProfile& profile) {
  double tail = 0.0;
  double worst = 1.0;
  for (double s : profile.values()) {
    tail = std::min(s, 1.0) * (1.0 + tail);
    worst = std::max(worst, 1.0 + tail);
  }
  return make_rate(worst);
}

}  // namespace mcb

#endif  // MCB_SPECTRAL_HPP_
