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

// Time-inhomogeneous Markov chains on finite metric spaces: exact marginal
// propagation, path sampling, matrix-valued observables and the per-step
// regularity quantities (Lipschitz constant, oscillations, granularity).
//
// Time is 1-based throughout: kernel t moves X_{t-1} to X_t, observable t is
// evaluated at X_t, and mu_t is the law of X_t.

#ifndef MCB_CHAIN_HPP_
#define MCB_CHAIN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcb/linalg.hpp"
#include "mcb/rng.hpp"

namespace mcb {

// Invalid model data (non-metric distances, non-stochastic rows, ...).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A time index beyond the horizon of a finite kernel or observable list.
class HorizonError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class FiniteMetricSpace {
 public:
  FiniteMetricSpace() = default;

  explicit FiniteMetricSpace(RealMatrix dist, bool check_triangle = true) : dist_(std::move(dist)) {
    const Eigen::Index n = dist_.rows();
    if (n == 0 || dist_.cols() != n) throw ModelError("metric: distance matrix must be square and non-empty");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (dist_(i, i) != 0.0) throw ModelError("metric: nonzero diagonal at " + std::to_string(i));
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isfinite(dist_(i, j)) || dist_(i, j) < 0.0) {
          throw ModelError("metric: entry (" + std::to_string(i) + "," + std::to_string(j) +
                           ") is negative or not finite");
        }
        if (std::abs(dist_(i, j) - dist_(j, i)) > 1e-9) {
          throw ModelError("metric: asymmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
        if (i != j && dist_(i, j) == 0.0) {
          throw ModelError("metric: distinct states " + std::to_string(i) + " and " + std::to_string(j) +
                           " at distance 0");
        }
      }
    }
    if (check_triangle) {
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j)
            if (dist_(i, j) > dist_(i, k) + dist_(k, j) + 1e-9) {
              throw ModelError("metric: triangle inequality fails for (" + std::to_string(i) + "," +
                               std::to_string(k) + "," + std::to_string(j) + ")");
            }
    }
    diameter_ = dist_.maxCoeff();
  }

  // Points on the real line with d(x, y) = |x - y|.
  static FiniteMetricSpace line(std::span<const double> points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    RealMatrix d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::abs(points[i] - points[j]);
    return FiniteMetricSpace(std::move(d), /*check_triangle=*/false);
  }

  int size() const { return static_cast<int>(dist_.rows()); }
  double operator()(int i, int j) const { return dist_(i, j); }
  double diameter() const { return diameter_; }
  const RealMatrix& matrix() const { return dist_; }

 private:
  RealMatrix dist_;
  double diameter_ = 0.0;
};

class FiniteKernel {
 public:
  FiniteKernel() = default;

  explicit FiniteKernel(RealMatrix rows) : p_(std::move(rows)) {
    const Eigen::Index n = p_.rows();
    if (n == 0 || p_.cols() != n) throw ModelError("kernel: matrix must be square and non-empty");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!(p_(i, j) >= 0.0)) {
          throw ModelError("kernel: negative or NaN entry at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
        }
      }
      const double sum = p_.row(i).sum();
      if (std::abs(sum - 1.0) > 1e-12) {
        throw ModelError("kernel: row " + std::to_string(i) + " sums to " + std::to_string(sum));
      }
    }
  }

  static FiniteKernel identity(int n) { return FiniteKernel(RealMatrix::Identity(n, n)); }

  // Every row equal to pi: one step forgets the starting point.
  static FiniteKernel rank_one(const RealVector& pi) {
    RealMatrix p(pi.size(), pi.size());
    for (Eigen::Index i = 0; i < pi.size(); ++i) p.row(i) = pi.transpose();
    return FiniteKernel(std::move(p));
  }

  int size() const { return static_cast<int>(p_.rows()); }
  double operator()(int i, int j) const { return p_(i, j); }
  const RealMatrix& matrix() const { return p_; }

 private:
  RealMatrix p_;
};

// The sequence t -> P_t. Either an explicit list (finite, or cycled when
// periodic) or a rule evaluated on demand for long structured horizons.
class KernelSequence {
 public:
  using Rule = std::function<FiniteKernel(int)>;

  KernelSequence() = default;

  static KernelSequence list(std::vector<FiniteKernel> kernels, bool periodic = false) {
    if (kernels.empty()) throw ModelError("kernel sequence: empty list");
    KernelSequence s;
    for (auto& k : kernels) s.kernels_.push_back(std::make_shared<const FiniteKernel>(std::move(k)));
    s.periodic_ = periodic;
    return s;
  }

  static KernelSequence rule(Rule rule, std::optional<int> horizon = std::nullopt) {
    KernelSequence s;
    s.rule_ = std::move(rule);
    s.horizon_ = horizon;
    return s;
  }

  std::optional<int> horizon() const {
    if (rule_) return horizon_;
    if (periodic_) return std::nullopt;
    return static_cast<int>(kernels_.size());
  }

  bool covers(int t) const {
    const auto h = horizon();
    return t >= 1 && (!h || t <= *h);
  }

  // Identifies distinct kernels so callers can cache per-kernel work.
  int slot(int t) const {
    check(t);
    if (rule_) return t - 1;
    return periodic_ ? (t - 1) % static_cast<int>(kernels_.size()) : t - 1;
  }

  std::shared_ptr<const FiniteKernel> at(int t) const {
    check(t);
    if (rule_) return std::make_shared<const FiniteKernel>(rule_(t));
    return kernels_[static_cast<std::size_t>(slot(t))];
  }

 private:
  void check(int t) const {
    if (!covers(t)) {
      throw HorizonError("kernel sequence: step " + std::to_string(t) + " outside horizon " +
                         (horizon() ? std::to_string(*horizon()) : std::string("(unbounded)")));
    }
  }

  std::vector<std::shared_ptr<const FiniteKernel>> kernels_;
  bool periodic_ = false;
  Rule rule_;
  std::optional<int> horizon_;
};

class FiniteMarkovModel {
 public:
  FiniteMarkovModel() = default;

  FiniteMarkovModel(FiniteMetricSpace space, RealVector mu0, KernelSequence kernels)
      : space_(std::move(space)), mu0_(std::move(mu0)), kernels_(std::move(kernels)) {
    if (mu0_.size() != space_.size()) throw ModelError("model: mu0 length differs from space size");
    if ((mu0_.array() < 0.0).any()) throw ModelError("model: mu0 has negative mass");
    if (std::abs(mu0_.sum() - 1.0) > 1e-12) throw ModelError("model: mu0 does not sum to 1");
    if (kernels_.covers(1) && kernels_.at(1)->size() != space_.size()) {
      throw ModelError("model: kernel size differs from space size");
    }
  }

  const FiniteMetricSpace& space() const { return space_; }
  const RealVector& mu0() const { return mu0_; }
  const KernelSequence& kernels() const { return kernels_; }
  int size() const { return space_.size(); }

  std::shared_ptr<const FiniteKernel> kernel(int t) const {
    auto k = kernels_.at(t);
    if (k->size() != size()) {
      throw ModelError("model: kernel " + std::to_string(t) + " has size " + std::to_string(k->size()));
    }
    return k;
  }

 private:
  FiniteMetricSpace space_;
  RealVector mu0_;
  KernelSequence kernels_;
};

// mu_0 .. mu_t (t + 1 vectors).
inline std::vector<RealVector> marginals(const FiniteMarkovModel& model, int t) {
  if (t < 0) throw std::invalid_argument("marginals: negative horizon");
  std::vector<RealVector> mus;
  mus.reserve(static_cast<std::size_t>(t) + 1);
  mus.push_back(model.mu0());
  for (int k = 1; k <= t; ++k) {
    const auto p = model.kernel(k);
    mus.push_back(p->matrix().transpose() * mus.back());
  }
  return mus;
}

// mu_1 .. mu_t with mu_k = mu_{k-1} P_k.
inline std::vector<RealVector> propagate(const FiniteMarkovModel& model, int t) {
  if (t < 1) throw std::invalid_argument("propagate: need t >= 1");
  auto mus = marginals(model, t);
  mus.erase(mus.begin());
  return mus;
}

struct Trajectory {
  int initial = 0;          // X_0
  std::vector<int> states;  // X_1 .. X_n
  std::uint64_t stream_key = 0;
};

// Inverse-CDF sampling tables for kernels 1..n, one per distinct kernel.
class PathSampler {
 public:
  PathSampler(const FiniteMarkovModel& model, int n) : n_(n), size_(model.size()) {
    if (n < 1) throw std::invalid_argument("sampler: need n >= 1");
    initial_ = cumulative(model.mu0());
    slots_.resize(static_cast<std::size_t>(n));
    std::vector<int> seen;
    for (int t = 1; t <= n; ++t) {
      const int slot = model.kernels().slot(t);
      const auto it = std::find(seen.begin(), seen.end(), slot);
      if (it != seen.end()) {
        slots_[static_cast<std::size_t>(t - 1)] = static_cast<int>(it - seen.begin());
        continue;
      }
      const auto p = model.kernel(t);
      std::vector<double> table;
      table.reserve(static_cast<std::size_t>(size_) * static_cast<std::size_t>(size_));
      for (int x = 0; x < size_; ++x) {
        const auto row = cumulative(p->matrix().row(x).transpose());
        table.insert(table.end(), row.begin(), row.end());
      }
      tables_.push_back(std::move(table));
      slots_[static_cast<std::size_t>(t - 1)] = static_cast<int>(seen.size());
      seen.push_back(slot);
    }
  }

  int horizon() const { return n_; }

  int sample_initial(Stream& stream) const { return draw(initial_.data(), stream.uniform()); }

  int step(int t, int from, Stream& stream) const {
    const auto& table = tables_[static_cast<std::size_t>(slots_[static_cast<std::size_t>(t - 1)])];
    return draw(table.data() + static_cast<std::ptrdiff_t>(from) * size_, stream.uniform());
  }

 private:
  std::vector<double> cumulative(const RealVector& p) const {
    std::vector<double> c(static_cast<std::size_t>(p.size()));
    double acc = 0.0;
    int last_positive = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      acc += p(i);
      c[static_cast<std::size_t>(i)] = acc;
      if (p(i) > 0.0) last_positive = static_cast<int>(i);
    }
    // Round-off must never send u in [0, 1) past the last state with mass.
    for (std::size_t i = static_cast<std::size_t>(last_positive); i < c.size(); ++i) c[i] = 1.0;
    return c;
  }

  int draw(const double* cdf, double u) const {
    return static_cast<int>(std::upper_bound(cdf, cdf + size_, u) - cdf);
  }

  int n_;
  int size_;
  std::vector<double> initial_;
  std::vector<std::vector<double>> tables_;
  std::vector<int> slots_;
};

inline Trajectory sample_trajectory(const PathSampler& sampler, Stream stream) {
  Trajectory traj;
  traj.stream_key = stream.key();
  traj.initial = sampler.sample_initial(stream);
  traj.states.resize(static_cast<std::size_t>(sampler.horizon()));
  int x = traj.initial;
  for (int t = 1; t <= sampler.horizon(); ++t) {
    x = sampler.step(t, x, stream);
    traj.states[static_cast<std::size_t>(t - 1)] = x;
  }
  return traj;
}

inline Trajectory sample_trajectory(const FiniteMarkovModel& model, int n, Stream stream) {
  return sample_trajectory(PathSampler(model, n), stream);
}

// t -> (x -> F_t(x)), stored as frames of per-state matrices. Frame k serves
// time k + 1; a periodic sequence cycles through its frames.
class ObservableSequence {
 public:
  ObservableSequence() = default;

  ObservableSequence(std::vector<std::vector<HermitianMatrix>> frames, bool periodic)
      : frames_(std::move(frames)), periodic_(periodic) {
    if (frames_.empty() || frames_.front().empty()) throw ModelError("observables: no frames");
    states_ = static_cast<int>(frames_.front().size());
    dim_ = frames_.front().front().dim();
    for (const auto& f : frames_) {
      if (static_cast<int>(f.size()) != states_) throw ModelError("observables: ragged frames");
      for (const auto& a : f) {
        if (a.dim() != dim_) throw ModelError("observables: mixed matrix dimensions");
      }
    }
  }

  static ObservableSequence constant(const HermitianMatrix& c, int states) {
    return ObservableSequence({std::vector<HermitianMatrix>(static_cast<std::size_t>(states), c)}, true);
  }

  // Same per-state matrices at every time.
  static ObservableSequence homogeneous(std::vector<HermitianMatrix> values) {
    return ObservableSequence({std::move(values)}, true);
  }

  int dim() const { return dim_; }
  int states() const { return states_; }
  std::optional<int> horizon() const {
    if (periodic_) return std::nullopt;
    return static_cast<int>(frames_.size());
  }

  int frame_index(int t) const {
    if (t < 1 || (!periodic_ && t > static_cast<int>(frames_.size()))) {
      throw HorizonError("observables: time " + std::to_string(t) + " outside horizon");
    }
    return (t - 1) % static_cast<int>(frames_.size());
  }

  const std::vector<HermitianMatrix>& frame(int t) const {
    return frames_[static_cast<std::size_t>(frame_index(t))];
  }
  const HermitianMatrix& at(int t, int x) const { return frame(t)[static_cast<std::size_t>(x)]; }

 private:
  std::vector<std::vector<HermitianMatrix>> frames_;
  bool periodic_ = true;
  int states_ = 0;
  int dim_ = 0;
};

inline HermitianMatrix weighted_mean(const std::vector<HermitianMatrix>& values, const RealVector& mu) {
  ComplexMatrix acc = ComplexMatrix::Zero(values.front().dim(), values.front().dim());
  for (Eigen::Index x = 0; x < mu.size(); ++x) {
    if (mu(x) != 0.0) acc += mu(x) * values[static_cast<std::size_t>(x)].matrix();
  }
  return HermitianMatrix(acc);
}

inline void check_compatible(const FiniteMarkovModel& model, const ObservableSequence& obs) {
  if (obs.states() != model.size()) {
    throw ModelError("observables defined on " + std::to_string(obs.states()) + " states, model has " +
                     std::to_string(model.size()));
  }
}

// E F_t(X_t) = sum_x mu_t(x) F_t(x).
inline HermitianMatrix exact_mean(const FiniteMarkovModel& model, const ObservableSequence& obs, int t) {
  check_compatible(model, obs);
  const auto mus = marginals(model, t);
  return weighted_mean(obs.frame(t), mus.back());
}

// Exact means for t = 1..n (entry t - 1), from one propagation pass.
inline std::vector<HermitianMatrix> exact_means(const FiniteMarkovModel& model, const ObservableSequence& obs,
                                                int n) {
  check_compatible(model, obs);
  const auto mus = marginals(model, n);
  std::vector<HermitianMatrix> means;
  means.reserve(static_cast<std::size_t>(n));
  for (int t = 1; t <= n; ++t) means.push_back(weighted_mean(obs.frame(t), mus[static_cast<std::size_t>(t)]));
  return means;
}

// S = sum_t (F_t(X_t) - E F_t(X_t)).
inline HermitianMatrix centered_sum(const Trajectory& traj, const ObservableSequence& obs,
                                    const std::vector<HermitianMatrix>& means) {
  if (traj.states.size() != means.size()) {
    throw std::invalid_argument("centered_sum: trajectory has " + std::to_string(traj.states.size()) +
                                " steps but " + std::to_string(means.size()) + " means were given");
  }
  ComplexMatrix acc = ComplexMatrix::Zero(obs.dim(), obs.dim());
  for (std::size_t k = 0; k < means.size(); ++k) {
    const int t = static_cast<int>(k) + 1;
    acc += obs.at(t, traj.states[k]).matrix() - means[k].matrix();
  }
  return HermitianMatrix(acc);
}

// sup_{x != y} |F_t(x) - F_t(y)|_op / d(x, y).
inline double lipschitz_op(const ObservableSequence& obs, const FiniteMetricSpace& space, int t) {
  const auto& f = obs.frame(t);
  double best = 0.0;
  for (int x = 0; x < space.size(); ++x)
    for (int y = x + 1; y < space.size(); ++y)
      best = std::max(best, op_norm(f[x] - f[y]) / space(x, y));
  return best;
}

inline double oscillation_op(const ObservableSequence& obs, int t) {
  const auto& f = obs.frame(t);
  double best = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x)
    for (std::size_t y = x + 1; y < f.size(); ++y) best = std::max(best, op_norm(f[x] - f[y]));
  return best;
}

inline double oscillation_frob(const ObservableSequence& obs, int t) {
  const auto& f = obs.frame(t);
  double best = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x)
    for (std::size_t y = x + 1; y < f.size(); ++y) best = std::max(best, frobenius_norm(f[x] - f[y]));
  return best;
}

// max_x diam supp P_t(x, .).
inline double granularity(const FiniteKernel& p, const FiniteMetricSpace& space) {
  double best = 0.0;
  std::vector<int> support;
  for (int x = 0; x < p.size(); ++x) {
    support.clear();
    for (int y = 0; y < p.size(); ++y)
      if (p(x, y) > 0.0) support.push_back(y);
    for (std::size_t a = 0; a < support.size(); ++a)
      for (std::size_t b = a + 1; b < support.size(); ++b)
        best = std::max(best, space(support[a], support[b]));
  }
  return best;
}

inline double granularity(const FiniteMarkovModel& model, int t) {
  return granularity(*model.kernel(t), model.space());
}

}  // namespace mcb

#endif  // MCB_CHAIN_HPP_
