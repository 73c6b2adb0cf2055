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

// Projected Elo ratings tracking a dynamic Bradley-Terry-Luce environment.
//
// Ratings live in X_M = [-M, M]^n with zero sum. The environment is the
// pair (rho, q): true ratings in X_M and a distribution over the n(n-1)/2
// unordered pairs, stored in lexicographic order (0,1), (0,2), ..., (n-2,n-1).
// One joint step at time t plays a match under E^t, updates X^{t-1} to X^t,
// and then draws E^{t+1} from the environment kernel.

#ifndef MCB_ELO_HPP_
#define MCB_ELO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcb/bounds.hpp"
#include "mcb/linalg.hpp"
#include "mcb/parallel.hpp"
#include "mcb/rng.hpp"
#include "mcb/stats.hpp"

namespace mcb {

inline int pair_count(int n) { return n * (n - 1) / 2; }

inline int pair_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

inline std::vector<std::pair<int, int>> pair_table(int n) {
  std::vector<std::pair<int, int>> t;
  t.reserve(static_cast<std::size_t>(pair_count(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) t.emplace_back(i, j);
  return t;
}

inline RealVector uniform_pairs(int n) {
  return RealVector::Constant(pair_count(n), 1.0 / static_cast<double>(pair_count(n)));
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// argmin |x - y|_2 over {sum x = 0, |x_i| <= M}: x_i = clip(y_i - theta) with
// theta the root of the nonincreasing map theta -> sum_i clip(y_i - theta).
inline RealVector project_zero_sum_box(const RealVector& y, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("projection: M must be > 0");
  const Eigen::Index n = y.size();
  auto g = [&](double theta) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += std::clamp(y(i) - theta, -M, M);
    return s;
  };
  std::vector<double> bp;
  bp.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    bp.push_back(y(i) - M);
    bp.push_back(y(i) + M);
  }
  std::sort(bp.begin(), bp.end());
  double theta = std::numeric_limits<double>::quiet_NaN();
  // g(bp.front()) = n M - ... >= 0 and g(bp.back()) <= 0.
  std::size_t hi = 0;
  while (hi < bp.size() && g(bp[hi]) > 0.0) ++hi;
  if (hi < bp.size() && hi > 0) {
    const double a = bp[hi - 1];
    const double b = bp[hi];
    if (g(b) == 0.0) {
      theta = b;
    } else {
      // On (a, b) the free set is fixed; g is affine there.
      const double mid = 0.5 * (a + b);
      double fixed = 0.0;
      double free_sum = 0.0;
      int free_count = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = y(i) - mid;
        if (v <= -M) {
          fixed -= M;
        } else if (v >= M) {
          fixed += M;
        } else {
          free_sum += y(i);
          ++free_count;
        }
      }
      if (free_count > 0) theta = std::clamp((fixed + free_sum) / free_count, a, b);
    }
  } else if (hi < bp.size()) {
    theta = bp[0];
  }
  if (!std::isfinite(theta)) {
    double lo = bp.front();
    double up = bp.back();
    for (int it = 0; it < 200 && up - lo > 1e-12 * std::max(1.0, std::abs(lo) + std::abs(up)); ++it) {
      const double mid = 0.5 * (lo + up);
      (g(mid) > 0.0 ? lo : up) = mid;
    }
    theta = 0.5 * (lo + up);
  }
  RealVector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = std::clamp(y(i) - theta, -M, M);
  return x;
}

// Probability that player i beats player j.
inline double btl_win_probability(const RealVector& rho, int i, int j) { return logistic(rho(i) - rho(j)); }

// Returns the winner of a match between i and j.
inline int btl_outcome(const RealVector& rho, int i, int j, Stream& s) {
  return s.bernoulli(btl_win_probability(rho, i, j)) ? i : j;
}

struct EnvironmentState {
  RealVector rho;
  RealVector q;
};

inline void validate(const EnvironmentState& e, double M) {
  const Eigen::Index n = e.rho.size();
  if (n < 2 || e.q.size() != pair_count(static_cast<int>(n))) throw std::invalid_argument("environment: bad shape");
  if (std::abs(e.rho.sum()) > 1e-9 || e.rho.cwiseAbs().maxCoeff() > M + 1e-12) {
    throw std::invalid_argument("environment: rho must be zero-sum with |rho_i| <= M");
  }
  if ((e.q.array() < 0.0).any() || std::abs(e.q.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("environment: q must be a probability vector over pairs");
  }
}

// Draws a pair index from q by inversion.
inline int sample_pair(const RealVector& q, Stream& s) {
  const double u = s.uniform();
  double acc = 0.0;
  int last = 0;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    if (q(k) <= 0.0) continue;
    acc += q(k);
    last = static_cast<int>(k);
    if (u < acc) return last;
  }
  return last;
}

// Winner gains eta * sigma(x_loser - x_winner), loser pays the same; then project.
inline RealVector elo_update(const RealVector& x, int winner, int loser, double eta, double M) {
  RealVector y = x;
  const double delta = eta * logistic(x(loser) - x(winner));
  y(winner) += delta;
  y(loser) -= delta;
  return project_zero_sum_box(y, M);
}

inline RealVector elo_step(const RealVector& x, const EnvironmentState& e, double eta, double M, Stream& s,
                           const std::vector<std::pair<int, int>>& pairs) {
  const auto [i, j] = pairs[static_cast<std::size_t>(sample_pair(e.q, s))];
  const int w = btl_outcome(e.rho, i, j, s);
  return elo_update(x, w, w == i ? j : i, eta, M);
}

// Second smallest eigenvalue of sum_{i<j} q_ij (e_i - e_j)(e_i - e_j)^T.
inline double laplacian_lambda(const RealVector& q, int n) {
  if (q.size() != pair_count(n)) throw std::invalid_argument("laplacian: q has the wrong length");
  RealMatrix lap = RealMatrix::Zero(n, n);
  const auto pairs = pair_table(n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const double w = q(static_cast<Eigen::Index>(k));
    lap(i, i) += w;
    lap(j, j) += w;
    lap(i, j) -= w;
    lap(j, i) -= w;
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(lap, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("laplacian: eigensolver did not converge");
  return std::max(0.0, es.eigenvalues()(1));
}

inline double elo_curvature(double eta, double M, double lambda) { return eta * std::exp(-4.0 * M) * lambda / 8.0; }

// |rho - rho'|_2 + 2 sqrt(2) |q - q'|_TV.
inline double env_distance(const EnvironmentState& a, const EnvironmentState& b) {
  return (a.rho - b.rho).norm() + 2.0 * std::numbers::sqrt2 * 0.5 * (a.q - b.q).cwiseAbs().sum();
}

inline double joint_distance(const RealVector& x, const EnvironmentState& a, const RealVector& y,
                             const EnvironmentState& b) {
  return (x - y).norm() + env_distance(a, b);
}

// Upper bound on the diameter of the joint state space.
inline double joint_diameter(int n, double M) { return 4.0 * M * std::sqrt(static_cast<double>(n)) + 2.0 * std::numbers::sqrt2; }

enum class EnvKind { kStatic, kArContract };

// rho' = Proj((1 - nu) rho + zeta) with zeta uniform on the zero-sum ball of
// radius r; q' = (1 - nu) q + nu q_base.
struct EnvDynamics {
  EnvKind kind = EnvKind::kStatic;
  double nu = 1.0;
  double radius = 0.0;
  RealVector q_base;

  // One-step support radii for rho and q under ratings bounded by M.
  double h_rho(int n, double M) const {
    return kind == EnvKind::kStatic ? 0.0 : nu * M * std::sqrt(static_cast<double>(n)) + radius;
  }
  double h_q() const { return kind == EnvKind::kStatic ? 0.0 : nu; }

  // Analytic bound on E[|rho' - rho|_2^2 + 4 M |rho' - rho|_1].
  double drift_envelope(int n, double M) const {
    const double h = h_rho(n, M);
    return h * h + 4.0 * M * std::sqrt(static_cast<double>(n)) * h;
  }

  // Same bound at a given rho, using |rho|_2 in place of M sqrt(n).
  double drift_envelope_at(const RealVector& rho, double M) const {
    if (kind == EnvKind::kStatic) return 0.0;
    const double h = nu * rho.norm() + radius;
    return h * h + 4.0 * M * std::sqrt(static_cast<double>(rho.size())) * h;
  }
};

// Uniform on {v : sum v = 0, |v|_2 <= r}, an (n-1)-dimensional ball.
inline RealVector zero_sum_ball(int n, double r, Stream& s) {
  RealVector g(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) g(i) = normal(s);
    g.array() -= g.mean();
    norm = g.norm();
  } while (norm == 0.0);
  const double radius = r * std::pow(s.uniform(), 1.0 / static_cast<double>(n - 1));
  return g * (radius / norm);
}

// With noise supplied, both environments can be driven by the same draw.
inline EnvironmentState env_step_with(const EnvironmentState& e, const EnvDynamics& dyn, double M,
                                      const RealVector& zeta) {
  if (dyn.kind == EnvKind::kStatic) return e;
  EnvironmentState next;
  next.rho = project_zero_sum_box((1.0 - dyn.nu) * e.rho + zeta, M);
  next.q = (1.0 - dyn.nu) * e.q + dyn.nu * dyn.q_base;
  return next;
}

inline EnvironmentState env_step(const EnvironmentState& e, const EnvDynamics& dyn, double M, Stream& s) {
  if (dyn.kind == EnvKind::kStatic) return e;
  return env_step_with(e, dyn, M, zero_sum_ball(static_cast<int>(e.rho.size()), dyn.radius, s));
}

struct DriftEstimate {
  double value = 0.0;     // max over visited states of the estimated drift
  double se = 0.0;        // standard error at the maximizing state
  double envelope = 0.0;  // analytic bound at that state
  bool within_envelope = true;
};

// Monte Carlo drift functional E[|rho' - rho|^2 + 4M |rho' - rho|_1 | rho]
// with `resamples` draws per visited state; reports the worst state.
inline DriftEstimate drift_estimate(const std::vector<EnvironmentState>& visited, const EnvDynamics& dyn, double M,
                                    int resamples, Stream s) {
  if (visited.size() < 2) throw std::invalid_argument("drift_estimate: need at least two visited states");
  DriftEstimate out;
  bool first = true;
  for (std::size_t k = 0; k < visited.size(); ++k) {
    const EnvironmentState& e = visited[k];
    RunningMoments mom;
    Stream sk = s.child(k);
    for (int r = 0; r < resamples; ++r) {
      const EnvironmentState next = env_step(e, dyn, M, sk);
      const RealVector d = next.rho - e.rho;
      mom.add(d.squaredNorm() + 4.0 * M * d.cwiseAbs().sum());
    }
    const double env = dyn.drift_envelope_at(e.rho, M);
    if (mom.mean > env + 3.0 * mom.standard_error() + 1e-12) out.within_envelope = false;
    if (first || mom.mean > out.value) {
      out.value = mom.mean;
      out.se = mom.standard_error();
      out.envelope = env;
      first = false;
    }
  }
  return out;
}

enum class RatingInit { kZero, kSpread };

struct EloConfig {
  int n = 10;
  double M = 2.0;
  double eta = 0.05;
  EnvDynamics env;
  RealVector q0;         // empty: uniform
  RatingInit rho_init = RatingInit::kSpread;
  long T = 1000;         // averaging window length
  long T0 = 0;           // burn-in before the window
  int reps = 10;
  std::uint64_t seed = 1;
  double eps = 1.0;
  double delta = 0.1;
  std::vector<double> C_sweep;
  int drift_resamples = 200;
  int drift_states = 50;

  void validate() const {
    if (n < 2) throw std::invalid_argument("elo: need at least two players");
    if (!(M > 1.0)) throw std::invalid_argument("elo: need M > 1");
    if (!(eta > 0.0 && eta < 0.5)) throw std::invalid_argument("elo: eta must lie in (0, 1/2)");
    if (!(env.nu > 0.0 && env.nu <= 1.0)) throw std::invalid_argument("elo: nu must lie in (0, 1]");
    if (eta > env.nu / 2.0) throw std::invalid_argument("elo: eta must not exceed nu/2");
    if (env.kind == EnvKind::kArContract && env.q_base.size() != pair_count(n)) {
      throw std::invalid_argument("elo: q_base has the wrong length");
    }
    if (!(env.radius >= 0.0)) throw std::invalid_argument("elo: noise radius must be >= 0");
    if (T < 1 || T0 < 0 || reps < 1) throw std::invalid_argument("elo: need T >= 1, T0 >= 0, reps >= 1");
    if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("elo: need eps > 0, delta in (0,1)");
    for (double c : C_sweep)
      if (!(c > 0.0)) throw std::invalid_argument("elo: every swept C must be > 0");
  }

  RealVector initial_q() const { return q0.size() ? q0 : uniform_pairs(n); }

  // Evenly spaced in [-M/2, M/2] (zero-sum), or all zero.
  RealVector initial_rho() const {
    RealVector r = RealVector::Zero(n);
    if (rho_init == RatingInit::kSpread)
      for (int i = 0; i < n; ++i) r(i) = M * (static_cast<double>(i) / (n - 1) - 0.5);
    return r;
  }
};

struct TrackingStep {
  long t = 0;
  double mean_err2 = 0.0;
  double lemma_rhs = 0.0;
  double min_ci = 0.0;  // 0.999 normal interval for the rep mean
  double max_ci = 0.0;
};

struct WindowResult {
  double C = 0.0;
  double min_T = 0.0;
  long window = 0;  // ceil(min_T), the window actually averaged
  bool feasible = false;
  double radius = 0.0;
  int violations = 0;
  double violation_rate = 0.0;
};

struct PointResult {
  double C = 0.0;
  long burn_in = 0;
  bool feasible = false;
  double radius = 0.0;
  double probability = 0.0;
  int exceed = 0;
  double exceed_rate = 0.0;
};

struct TrackingReport {
  double lambda = 0.0;
  double kappa = 0.0;
  double drift = 0.0;  // Delta used in the bounds
  std::optional<DriftEstimate> drift_check;
  double h_rho = 0.0;
  double h_q = 0.0;
  double granularity = 0.0;  // B
  std::vector<TrackingStep> steps;
  bool lemma_ok = true;        // rep mean <= rhs at every t
  bool lemma_ci_ok = true;     // upper CI <= rhs at every t
  double plateau_max = 0.0;    // max rep mean for t > T0
  double plateau_bound = 0.0;  // 2 eta^2 / kappa
  bool plateau_ok = true;
  std::vector<WindowResult> windows;
  std::vector<PointResult> points;
  std::optional<std::size_t> selected_window;  // smallest feasible C
  bool window_ok = true;                       // violation rate <= delta at the selected C
};

namespace detail {

struct RepTrace {
  std::vector<double> err2;           // t = 1..T0+T
  std::vector<double> window_norms;   // one per swept C (NaN if infeasible)
  std::vector<double> point_norms;    // |X^t - rho^t| at each feasible burn-in
  std::vector<EnvironmentState> env;  // visited environments (rep 0 only)
};

}  // namespace detail

inline TrackingReport run_tracking(const EloConfig& cfg, int threads = 1) {
  cfg.validate();
  TrackingReport rep;
  const int n = cfg.n;
  const RealVector q0 = cfg.initial_q();
  const RealVector rho0 = cfg.initial_rho();
  validate(EnvironmentState{rho0, q0}, cfg.M);
  // q^t is a convex combination of q0 and q_base and lambda is concave in q.
  rep.lambda = laplacian_lambda(q0, n);
  if (cfg.env.kind == EnvKind::kArContract) rep.lambda = std::min(rep.lambda, laplacian_lambda(cfg.env.q_base, n));
  rep.kappa = elo_curvature(cfg.eta, cfg.M, rep.lambda);
  if (!(rep.kappa > 0.0)) throw std::invalid_argument("elo: matchup graph is disconnected, curvature is zero");
  rep.drift = cfg.env.kind == EnvKind::kStatic ? 0.0 : cfg.env.drift_envelope(n, cfg.M);
  rep.h_rho = cfg.env.h_rho(n, cfg.M);
  rep.h_q = cfg.env.h_q();
  rep.granularity = elo_granularity(cfg.eta, rep.h_rho, rep.h_q);
  const EloBoundInputs inputs{n, cfg.M, cfg.eta, rep.kappa, rep.drift};

  const long horizon = cfg.T0 + cfg.T;
  for (double c : cfg.C_sweep) {
    WindowResult w;
    w.C = c;
    const EloAvgBound b = elo_avg_bound(cfg.eps, cfg.delta, inputs, c);
    w.min_T = b.min_T;
    w.window = std::max(1L, static_cast<long>(std::ceil(b.min_T)));
    w.feasible = w.window <= cfg.T;
    w.radius = b.radius;
    rep.windows.push_back(w);
    PointResult p;
    p.C = c;
    const EloPointBound pb = elo_point_bound(cfg.eps, rep.granularity, inputs, c);
    p.burn_in = std::max(1L, pb.burn_in);
    p.feasible = p.burn_in <= horizon;
    p.radius = pb.radius;
    p.probability = pb.probability;
    rep.points.push_back(p);
  }

  const auto pairs = pair_table(n);
  const Stream master(cfg.seed);
  const EnvironmentState e1{rho0, q0};
  const double x0_err2 = (RealVector::Zero(n) - rho0).squaredNorm();
  const std::size_t nsteps = static_cast<std::size_t>(horizon);
  std::vector<double> sum(nsteps, 0.0);
  std::vector<double> sum2(nsteps, 0.0);
  std::vector<EnvironmentState> visited;

  auto run_rep = [&](int r, detail::RepTrace& tr) {
    Stream s = master.child(static_cast<std::uint64_t>(r));
    Stream env_stream = s.child(1);
    Stream match_stream = s.child(2);
    tr.err2.assign(nsteps, 0.0);
    tr.window_norms.assign(rep.windows.size(), std::numeric_limits<double>::quiet_NaN());
    tr.point_norms.assign(rep.points.size(), std::numeric_limits<double>::quiet_NaN());
    const long stride = std::max(1L, horizon / std::max(2, cfg.drift_states));
    RealVector x = RealVector::Zero(n);
    EnvironmentState e = e1;
    RealVector window_sum = RealVector::Zero(n);
    for (long t = 1; t <= horizon; ++t) {
      x = elo_step(x, e, cfg.eta, cfg.M, match_stream, pairs);
      const RealVector diff = x - e.rho;
      tr.err2[static_cast<std::size_t>(t - 1)] = diff.squaredNorm();
      if (t > cfg.T0) {
        window_sum += diff;
        const long k = t - cfg.T0;
        for (std::size_t c = 0; c < rep.windows.size(); ++c)
          if (rep.windows[c].feasible && rep.windows[c].window == k) tr.window_norms[c] = window_sum.norm() / k;
      }
      for (std::size_t c = 0; c < rep.points.size(); ++c)
        if (rep.points[c].feasible && rep.points[c].burn_in == t) tr.point_norms[c] = diff.norm();
      if (r == 0 && (t - 1) % stride == 0) tr.env.push_back(e);
      e = env_step(e, cfg.env, cfg.M, env_stream);
    }
  };

  // Batches keep memory bounded; within a batch traces are reduced in rep order.
  const int batch = std::max(1, std::min(cfg.reps, 4 * std::max(1, threads)));
  std::vector<detail::RepTrace> traces(static_cast<std::size_t>(batch));
  for (int start = 0; start < cfg.reps; start += batch) {
    const int count = std::min(batch, cfg.reps - start);
    parallel_for(static_cast<std::size_t>(count), threads,
                 [&](std::size_t k) { run_rep(start + static_cast<int>(k), traces[k]); });
    for (int k = 0; k < count; ++k) {
      const auto& tr = traces[static_cast<std::size_t>(k)];
      for (std::size_t t = 0; t < nsteps; ++t) {
        sum[t] += tr.err2[t];
        sum2[t] += tr.err2[t] * tr.err2[t];
      }
      for (std::size_t c = 0; c < rep.windows.size(); ++c)
        if (rep.windows[c].feasible && tr.window_norms[c] > rep.windows[c].radius) ++rep.windows[c].violations;
      for (std::size_t c = 0; c < rep.points.size(); ++c)
        if (rep.points[c].feasible && tr.point_norms[c] >= rep.points[c].radius) ++rep.points[c].exceed;
      if (start + k == 0) visited = tr.env;
    }
  }

  const double reps = cfg.reps;
  const double z = 3.2905267314919255;  // two-sided 0.999 normal quantile
  rep.plateau_bound = 2.0 * cfg.eta * cfg.eta / rep.kappa;
  for (long t = 1; t <= horizon; ++t) {
    TrackingStep st;
    st.t = t;
    const std::size_t i = static_cast<std::size_t>(t - 1);
    st.mean_err2 = sum[i] / reps;
    const double var = cfg.reps > 1 ? std::max(0.0, (sum2[i] - reps * st.mean_err2 * st.mean_err2) / (reps - 1.0)) : 0.0;
    const double half = z * std::sqrt(var / reps);
    st.min_ci = st.mean_err2 - half;
    st.max_ci = st.mean_err2 + half;
    st.lemma_rhs = std::pow(1.0 - rep.kappa, static_cast<double>(t - 1)) * x0_err2 + rep.drift / rep.kappa +
                   2.0 * cfg.eta * cfg.eta / rep.kappa;
    if (st.mean_err2 > st.lemma_rhs) rep.lemma_ok = false;
    if (st.max_ci > st.lemma_rhs) rep.lemma_ci_ok = false;
    if (t > cfg.T0) rep.plateau_max = std::max(rep.plateau_max, st.mean_err2);
    rep.steps.push_back(st);
  }
  // Static environments contribute no drift, so the plateau is 2 eta^2 / kappa.
  rep.plateau_ok = rep.plateau_max <= rep.plateau_bound + rep.drift / rep.kappa;

  for (auto& w : rep.windows) w.violation_rate = w.feasible ? w.violations / reps : 0.0;
  for (auto& p : rep.points) p.exceed_rate = p.feasible ? p.exceed / reps : 0.0;
  for (std::size_t c = 0; c < rep.windows.size(); ++c) {
    if (!rep.windows[c].feasible) continue;
    if (!rep.selected_window || rep.windows[c].C < rep.windows[*rep.selected_window].C) rep.selected_window = c;
  }
  rep.window_ok = rep.selected_window && rep.windows[*rep.selected_window].violation_rate <= cfg.delta;

  if (cfg.env.kind != EnvKind::kStatic && visited.size() >= 2) {
    rep.drift_check = drift_estimate(visited, cfg.env, cfg.M, cfg.drift_resamples, master.child(0xd1f7ULL));
  }
  return rep;
}

}  // namespace mcb

#endif  // MCB_ELO_HPP_
