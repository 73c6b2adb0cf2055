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

#ifndef MCB_STATS_HPP_
#define MCB_STATS_HPP_

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mcb {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Exact two-sided binomial interval for k successes in n trials.
inline Interval clopper_pearson(std::int64_t k, std::int64_t n, double confidence = 0.999) {
  if (n <= 0 || k < 0 || k > n) throw std::invalid_argument("clopper_pearson: need 0 <= k <= n, n > 0");
  const double alpha = 1.0 - confidence;
  Interval ci;
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  ci.lo = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, alpha / 2.0);
  ci.hi = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - alpha / 2.0);
  return ci;
}

inline double binomial_se(double p, std::int64_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

// Pearson goodness of fit of observed counts against expected probabilities.
// Cells with zero expected mass must be empty and are skipped.
inline double chi_square_pvalue(const std::vector<std::int64_t>& observed, const std::vector<double>& expected_p) {
  if (observed.size() != expected_p.size()) throw std::invalid_argument("chi_square: size mismatch");
  std::int64_t total = 0;
  for (auto o : observed) total += o;
  double stat = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected_p[i] * static_cast<double>(total);
    if (e <= 0.0) {
      if (observed[i] != 0) return 0.0;
      continue;
    }
    const double d = static_cast<double>(observed[i]) - e;
    stat += d * d / e;
    ++cells;
  }
  if (cells < 2) return 1.0;
  boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

struct RunningMoments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double standard_error() const { return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

}  // namespace mcb

#endif  // MCB_STATS_HPP_
