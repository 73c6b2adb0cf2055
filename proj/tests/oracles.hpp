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

// Independent reference computations used only by the tests.

#ifndef MCB_TESTS_ORACLES_HPP_
#define MCB_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "mcb/chain.hpp"
#include "mcb/linalg.hpp"

namespace mcb::oracle {

// W1 on the line as the integral of |F_mu - F_nu|.
inline double cdf_w1(const std::vector<double>& points, const RealVector& mu, const RealVector& nu) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  double fm = 0.0;
  double fn = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    fm += mu(static_cast<Eigen::Index>(order[k]));
    fn += nu(static_cast<Eigen::Index>(order[k]));
    total += std::abs(fm - fn) * (points[order[k + 1]] - points[order[k]]);
  }
  return total;
}

// Projection onto {sum x = 0, |x_i| <= M} by enumerating every assignment
// of coordinates to {lower bound, upper bound, free}. For a fixed pattern the
// free coordinates are y_i - theta; the best feasible candidate is optimal.
inline RealVector qp_projection(const RealVector& y, double M) {
  const int n = static_cast<int>(y.size());
  int patterns = 1;
  for (int i = 0; i < n; ++i) patterns *= 3;
  RealVector best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int p = 0; p < patterns; ++p) {
    RealVector x(n);
    int code = p;
    double fixed = 0.0;
    double free_sum = 0.0;
    int free_count = 0;
    std::vector<int> state(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = code % 3;
      code /= 3;
      if (state[static_cast<std::size_t>(i)] == 0) {
        x(i) = -M;
        fixed -= M;
      } else if (state[static_cast<std::size_t>(i)] == 1) {
        x(i) = M;
        fixed += M;
      } else {
        free_sum += y(i);
        ++free_count;
      }
    }
    if (free_count == 0) {
      if (std::abs(fixed) > 1e-12) continue;
    } else {
      const double theta = (free_sum + fixed) / free_count;
      bool ok = true;
      for (int i = 0; i < n; ++i) {
        if (state[static_cast<std::size_t>(i)] != 2) continue;
        x(i) = y(i) - theta;
        if (std::abs(x(i)) > M + 1e-12) ok = false;
      }
      if (!ok) continue;
    }
    const double d = (x - y).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = x;
    }
  }
  return best;
}

// Calls visit(path, probability) for every path X_0..X_n of positive mass.
inline void enumerate_paths(const FiniteMarkovModel& model, int n,
                            const std::function<void(const std::vector<int>&, double)>& visit) {
  std::vector<int> path(static_cast<std::size_t>(n) + 1);
  std::function<void(int, double)> rec = [&](int t, double prob) {
    if (t == n) {
      visit(path, prob);
      return;
    }
    const auto p = model.kernel(t + 1);
    for (int y = 0; y < model.size(); ++y) {
      const double q = (*p)(path[static_cast<std::size_t>(t)], y);
      if (q == 0.0) continue;
      path[static_cast<std::size_t>(t) + 1] = y;
      rec(t + 1, prob * q);
    }
  };
  for (int x = 0; x < model.size(); ++x) {
    if (model.mu0()(x) == 0.0) continue;
    path[0] = x;
    rec(0, model.mu0()(x));
  }
}

// a_t = sum_y tr V_t(y) with V_t(y) = W_t(y)* (sum_x P_t(x,y) V_{t-1}(x)) W_t(y)
// and V_1(y) = mu_1(y) W_1(y)* W_1(y); uses tr(M M*) = tr(M* M).
inline std::vector<double> forward_an(const FiniteMarkovModel& model, const ObservableSequence& obs, double s,
                                      double phi, int n) {
  const int m = obs.dim();
  const int k = model.size();
  std::vector<double> a{static_cast<double>(m)};
  RealVector mu = model.mu0();
  std::vector<ComplexMatrix> v(static_cast<std::size_t>(k), ComplexMatrix::Zero(m, m));
  const Complex z = 0.5 * s * std::polar(1.0, phi);
  for (int t = 1; t <= n; ++t) {
    const auto p = model.kernel(t);
    const RealVector next = p->matrix().transpose() * mu;
    ComplexMatrix mean = ComplexMatrix::Zero(m, m);
    for (int x = 0; x < k; ++x) mean += next(x) * obs.at(t, x).matrix();
    std::vector<ComplexMatrix> nv(static_cast<std::size_t>(k));
    double total = 0.0;
    for (int y = 0; y < k; ++y) {
      const ComplexMatrix c = obs.at(t, y).matrix() - mean;
      const ComplexMatrix w = (z * c).exp();
      ComplexMatrix in = ComplexMatrix::Zero(m, m);
      if (t == 1) {
        in = next(y) * ComplexMatrix::Identity(m, m);
      } else {
        for (int x = 0; x < k; ++x) in += (*p)(x, y) * v[static_cast<std::size_t>(x)];
      }
      nv[static_cast<std::size_t>(y)] = w.adjoint() * in * w;
      total += nv[static_cast<std::size_t>(y)].trace().real();
    }
    v = std::move(nv);
    mu = next;
    a.push_back(total);
  }
  return a;
}

}  // namespace mcb::oracle

#endif  // MCB_TESTS_ORACLES_HPP_
