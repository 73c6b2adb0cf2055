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

// Monte Carlo tail estimation against the closed-form bounds, and exact
// path-enumeration oracles for the matrix moment generating function and
// its renewal coefficients.

#ifndef MCB_MC_VERIFY_HPP_
#define MCB_MC_VERIFY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcb/bounds.hpp"
#include "mcb/chain.hpp"
#include "mcb/curvature.hpp"
#include "mcb/linalg.hpp"
#include "mcb/parallel.hpp"
#include "mcb/rng.hpp"
#include "mcb/spectral.hpp"
#include "mcb/stats.hpp"

namespace mcb {

// ---------------------------------------------------------------------------
// Chain summary: every scalar the bound evaluators consume.

struct ChainSummary {
  int m = 0;
  int n = 0;
  double D = 0.0;
  double L = 0.0;
  double delta_op = 0.0;
  double delta_f = 0.0;
  double sigma_inf = 0.0;
  CurvatureProfile kappas;
  SigmaProfile sigmas;
  EffectiveRate kappa;
  EffectiveRate kappa_tilde;
  EffectiveRate lambda;
  std::vector<double> lipschitz;  // L_t
  std::vector<double> granularity;

  bool curv_applies() const { return !kappa.assumption_weak && L > 0.0; }
  bool spec_applies() const { return !lambda.assumption_weak && delta_op > 0.0; }
  bool olv_point_applies() const { return !kappa.assumption_weak && L > 0.0 && sigma_inf > 0.0; }
  bool olv_avg_applies() const { return !kappa_tilde.assumption_weak && L > 0.0 && sigma_inf > 0.0; }

  BoundParams params(double eps) const {
    BoundParams p;
    p.m = m;
    p.n = n;
    p.eps = eps;
    p.L = L;
    p.D = D;
    p.delta_op = delta_op;
    p.delta_f = delta_f;
    p.kappa = kappa.value;
    p.lambda = lambda.value;
    p.sigma_inf = sigma_inf;
    p.kappa_tilde = kappa_tilde.value;
    return p;
  }
};

inline ChainSummary summarize(const FiniteMarkovModel& model, const ObservableSequence& obs, int n,
                              int threads = 1) {
  check_compatible(model, obs);
  ChainSummary s;
  s.m = obs.dim();
  s.n = n;
  s.D = model.space().diameter();
  s.kappas = curvature_profile(model, n, threads);
  s.sigmas = sigma_profile(model, n);
  s.kappa = effective_kappa(s.kappas);
  s.kappa_tilde = effective_kappa_tilde(s.kappas);
  s.lambda = effective_lambda(s.sigmas);
  std::vector<std::pair<int, double>> gran_cache;
  for (int t = 1; t <= n; ++t) {
    const int slot = model.kernels().slot(t);
    auto hit = std::find_if(gran_cache.begin(), gran_cache.end(), [&](const auto& e) { return e.first == slot; });
    double g;
    if (hit != gran_cache.end()) {
      g = hit->second;
    } else {
      g = granularity(model, t);
      gran_cache.emplace_back(slot, g);
    }
    s.granularity.push_back(g);
    s.sigma_inf = std::max(s.sigma_inf, g);
  }
  std::vector<int> seen_frames;
  std::vector<double> frame_lip;
  for (int t = 1; t <= n; ++t) {
    const int f = obs.frame_index(t);
    const auto hit = std::find(seen_frames.begin(), seen_frames.end(), f);
    if (hit != seen_frames.end()) {
      s.lipschitz.push_back(frame_lip[static_cast<std::size_t>(hit - seen_frames.begin())]);
      continue;
    }
    const double l = lipschitz_op(obs, model.space(), t);
    seen_frames.push_back(f);
    frame_lip.push_back(l);
    s.lipschitz.push_back(l);
    s.L = std::max(s.L, l);
    s.delta_op = std::max(s.delta_op, oscillation_op(obs, t));
    s.delta_f = std::max(s.delta_f, oscillation_frob(obs, t));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Path statistics.

// F_t(x) - E F_t(X_t) for t = 1..n, stored flat for the sampling loop.
class CenteredTable {
 public:
  CenteredTable(const FiniteMarkovModel& model, const ObservableSequence& obs, int n)
      : n_(n), states_(model.size()), m_(obs.dim()) {
    const auto means = exact_means(model, obs, n);
    const std::size_t block = static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_);
    data_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(states_) * block);
    for (int t = 1; t <= n; ++t) {
      for (int x = 0; x < states_; ++x) {
        const ComplexMatrix c = obs.at(t, x).matrix() - means[static_cast<std::size_t>(t - 1)].matrix();
        Complex* dst = &data_[offset(t, x)];
        for (int j = 0; j < m_; ++j)
          for (int i = 0; i < m_; ++i) dst[static_cast<std::size_t>(j * m_ + i)] = c(i, j);
      }
    }
  }

  int dim() const { return m_; }
  int horizon() const { return n_; }
  const Complex* at(int t, int x) const { return &data_[offset(t, x)]; }

  HermitianMatrix matrix(const Complex* p) const {
    return HermitianMatrix(ComplexMatrix(Eigen::Map<const ComplexMatrix>(p, m_, m_)));
  }

 private:
  std::size_t offset(int t, int x) const {
    return (static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(states_) + static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_);
  }

  int n_;
  int states_;
  int m_;
  std::vector<Complex> data_;
};

struct PathStatistics {
  double lambda_max = 0.0;  // lambda_max(S)
  double op_norm = 0.0;     // |S|_op
  double point = 0.0;       // |F_n(X_n) - E F_n(X_n)|_op
};

inline PathStatistics path_statistics(const CenteredTable& table, const PathSampler& sampler, Stream stream,
                                      std::vector<Complex>& acc) {
  const int n = table.horizon();
  const std::size_t block = static_cast<std::size_t>(table.dim()) * static_cast<std::size_t>(table.dim());
  std::fill(acc.begin(), acc.end(), Complex(0.0, 0.0));
  int x = sampler.sample_initial(stream);
  for (int t = 1; t <= n; ++t) {
    x = sampler.step(t, x, stream);
    const Complex* f = table.at(t, x);
    for (std::size_t k = 0; k < block; ++k) acc[k] += f[k];
  }
  const RealVector ev = eigenvalues(table.matrix(acc.data()));
  PathStatistics out;
  out.lambda_max = ev.maxCoeff();
  out.op_norm = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
  out.point = op_norm(table.matrix(table.at(n, x)));
  return out;
}

// One entry per trajectory r, driven by master.child(r).
inline std::vector<PathStatistics> simulate_paths(const FiniteMarkovModel& model, const ObservableSequence& obs,
                                                  int n, std::int64_t reps, std::uint64_t seed, int threads = 1) {
  check_compatible(model, obs);
  const CenteredTable table(model, obs, n);
  const PathSampler sampler(model, n);
  const Stream master(seed);
  std::vector<PathStatistics> out(static_cast<std::size_t>(reps));
  const std::size_t block = static_cast<std::size_t>(obs.dim()) * static_cast<std::size_t>(obs.dim());
  const int workers = std::max(1, threads);
  const std::size_t chunks = static_cast<std::size_t>(workers);
  parallel_for(chunks, workers, [&](std::size_t c) {
    std::vector<Complex> acc(block);
    const std::size_t begin = out.size() * c / chunks;
    const std::size_t end = out.size() * (c + 1) / chunks;
    for (std::size_t r = begin; r < end; ++r) out[r] = path_statistics(table, sampler, master.child(r), acc);
  });
  return out;
}

struct TailEstimate {
  std::vector<double> eps_grid;
  std::vector<std::int64_t> counts;
  std::int64_t reps = 0;
  std::vector<double> ci_lower;
  std::vector<double> ci_upper;

  double p_hat(std::size_t i) const { return static_cast<double>(counts[i]) / static_cast<double>(reps); }
};

enum class TailSide { kAtLeast, kGreater };

// counts[i] = #{r : values[r] >= thresholds[i]} (or > for kGreater).
inline TailEstimate tail_estimate(const std::vector<double>& values, const std::vector<double>& eps_grid,
                                  const std::vector<double>& thresholds, TailSide side,
                                  double confidence = 0.999) {
  TailEstimate t;
  t.eps_grid = eps_grid;
  t.reps = static_cast<std::int64_t>(values.size());
  for (double th : thresholds) {
    std::int64_t c = 0;
    for (double v : values) c += side == TailSide::kAtLeast ? (v >= th) : (v > th);
    t.counts.push_back(c);
    const Interval ci = clopper_pearson(c, t.reps, confidence);
    t.ci_lower.push_back(ci.lo);
    t.ci_upper.push_back(ci.hi);
  }
  return t;
}

// Empirical P(lambda_max(S) >= n eps) on a grid.
inline TailEstimate empirical_tail(const FiniteMarkovModel& model, const ObservableSequence& obs, int n,
                                   const std::vector<double>& eps_grid, std::int64_t reps, std::uint64_t seed,
                                   int threads = 1) {
  if (reps < 100) throw std::invalid_argument("empirical_tail: need at least 100 trajectories");
  const auto stats = simulate_paths(model, obs, n, reps, seed, threads);
  std::vector<double> values;
  values.reserve(stats.size());
  for (const auto& s : stats) values.push_back(s.lambda_max);
  std::vector<double> thresholds;
  for (double e : eps_grid) thresholds.push_back(n * e);
  return tail_estimate(values, eps_grid, thresholds, TailSide::kAtLeast);
}

// ---------------------------------------------------------------------------
// Dominance tables.

struct DominanceRow {
  double eps = 0.0;
  std::int64_t count = 0;  // lambda_max(S) >= n eps
  double p_hat = 0.0;
  Interval ci;
  std::int64_t count_norm = 0;  // |S|_op > n eps
  Interval ci_norm;
  std::int64_t count_point = 0;  // |F_n(X_n) - E F_n(X_n)|_op >= eps
  Interval ci_point;
  std::optional<TailBound> curv;
  std::optional<TailBound> spec;
  std::optional<TailBound> olv_point;
  std::optional<TailBound> olv_avg;
};

struct DominanceTable {
  ChainSummary summary;
  std::int64_t reps = 0;
  std::vector<DominanceRow> rows;
};

// Evenly spaced grid on (0, 1.25 * max_r lambda_max(S_r) / n]; above the
// sample maximum every count is zero and the tail is not resolved.
inline std::vector<double> default_eps_grid(const std::vector<PathStatistics>& stats, int n, int points = 20) {
  double top = 0.0;
  for (const auto& s : stats) top = std::max(top, s.lambda_max / n);
  if (!(top > 0.0)) top = 1.0;
  top *= 1.25;
  std::vector<double> grid;
  for (int k = 1; k <= points; ++k) grid.push_back(top * k / points);
  return grid;
}

inline DominanceTable dominance_table(const FiniteMarkovModel& model, const ObservableSequence& obs, int n,
                                      std::vector<double> eps_grid, std::int64_t reps, std::uint64_t seed,
                                      int threads = 1, double confidence = 0.999) {
  if (reps < 100) throw std::invalid_argument("dominance: need at least 100 trajectories");
  DominanceTable table;
  table.summary = summarize(model, obs, n, threads);
  table.reps = reps;
  const auto stats = simulate_paths(model, obs, n, reps, seed, threads);
  if (eps_grid.empty()) eps_grid = default_eps_grid(stats, n);
  std::vector<double> lmax;
  std::vector<double> norm;
  std::vector<double> point;
  for (const auto& s : stats) {
    lmax.push_back(s.lambda_max);
    norm.push_back(s.op_norm);
    point.push_back(s.point);
  }
  std::vector<double> scaled;
  for (double e : eps_grid) scaled.push_back(n * e);
  const TailEstimate t_lmax = tail_estimate(lmax, eps_grid, scaled, TailSide::kAtLeast, confidence);
  const TailEstimate t_norm = tail_estimate(norm, eps_grid, scaled, TailSide::kGreater, confidence);
  const TailEstimate t_point = tail_estimate(point, eps_grid, eps_grid, TailSide::kAtLeast, confidence);
  const ChainSummary& s = table.summary;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    DominanceRow row;
    row.eps = eps_grid[i];
    row.count = t_lmax.counts[i];
    row.p_hat = t_lmax.p_hat(i);
    row.ci = {t_lmax.ci_lower[i], t_lmax.ci_upper[i]};
    row.count_norm = t_norm.counts[i];
    row.ci_norm = {t_norm.ci_lower[i], t_norm.ci_upper[i]};
    row.count_point = t_point.counts[i];
    row.ci_point = {t_point.ci_lower[i], t_point.ci_upper[i]};
    const BoundParams p = s.params(row.eps);
    if (s.curv_applies()) row.curv = bound_curv(p);
    if (s.spec_applies()) row.spec = bound_spec(p);
    if (s.olv_point_applies()) row.olv_point = bound_ollivier_point(p);
    if (s.olv_avg_applies()) row.olv_avg = bound_ollivier_avg(p);
    table.rows.push_back(row);
  }
  return table;
}

struct DominanceVerdict {
  bool ok = true;
  int comparisons = 0;
  std::vector<std::string> violations;
};

// Each bound is compared with the tail of its own event. Where a bound
// reports an empty event the count itself must be zero.
inline DominanceVerdict check_dominance(const DominanceTable& table) {
  DominanceVerdict v;
  auto check = [&](const DominanceRow& row, const std::optional<TailBound>& b, std::int64_t count, double ci_hi,
                   const char* name) {
    if (!b) return;
    ++v.comparisons;
    const bool bad = b->event_empty ? count != 0 : ci_hi > b->probability;
    if (bad) {
      std::ostringstream msg;
      msg << name << " at eps=" << row.eps << ": count=" << count << " ci_hi=" << ci_hi
          << " bound=" << b->probability << (b->event_empty ? " (event empty)" : "");
      v.violations.push_back(msg.str());
      v.ok = false;
    }
  };
  for (const auto& row : table.rows) {
    check(row, row.curv, row.count, row.ci.hi, "curv");
    check(row, row.spec, row.count, row.ci.hi, "spec");
    check(row, row.olv_point, row.count_point, row.ci_point.hi, "olv_pt");
    check(row, row.olv_avg, row.count_norm, row.ci_norm.hi, "olv_avg");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Renewal oracles.

// phi grid used for falsification runs.
inline std::vector<double> phi_grid() {
  const double q = std::numbers::pi / 8.0;
  return {0.0, q, -q, 2 * q, -2 * q, 3 * q, -3 * q, 4 * q, -4 * q};
}

struct RenewalLedger {
  int n = 0;
  double s = 0.0;
  double phi = 0.0;
  std::vector<double> a;             // a_0..a_n
  std::vector<HermitianMatrix> B;    // B_{n,1..n}
  std::vector<double> b;             // b_{n,1..n}
};

// W_t(x) = exp(e^{i phi} s F~_t(x) / 2) and the centered values, t = 1..n.
struct RenewalFactors {
  std::vector<RealVector> mus;                          // mu_0..mu_n
  std::vector<std::vector<HermitianMatrix>> centered;   // [t-1][x]
  std::vector<std::vector<ComplexMatrix>> W;            // [t-1][x]
};

inline RenewalFactors renewal_factors(const FiniteMarkovModel& model, const ObservableSequence& obs, double s,
                                      double phi, int n) {
  check_compatible(model, obs);
  RenewalFactors f;
  f.mus = marginals(model, n);
  const Complex z = 0.5 * s * std::polar(1.0, phi);
  for (int t = 1; t <= n; ++t) {
    const HermitianMatrix mean = weighted_mean(obs.frame(t), f.mus[static_cast<std::size_t>(t)]);
    std::vector<HermitianMatrix> c;
    std::vector<ComplexMatrix> w;
    for (int x = 0; x < model.size(); ++x) {
      c.push_back(obs.at(t, x) - mean);
      w.push_back(expm_scaled(c.back(), z));
    }
    f.centered.push_back(std::move(c));
    f.W.push_back(std::move(w));
  }
  return f;
}

inline void check_enumeration_guard(int states, int n) {
  if (std::pow(static_cast<double>(states), n) > 1e6) {
    throw std::invalid_argument("exact enumeration: |Omega|^n = " + std::to_string(states) + "^" +
                                std::to_string(n) + " exceeds 1e6");
  }
}

// a_j = E tr(M_j M_j*) for j = 0..n by summing over all paths X_1..X_n.
inline std::vector<double> exact_an(const FiniteMarkovModel& model, const ObservableSequence& obs, double s,
                                    double phi, int n) {
  if (n < 0) throw std::invalid_argument("exact_an: negative n");
  const int m = obs.dim();
  std::vector<double> a(static_cast<std::size_t>(n) + 1, 0.0);
  a[0] = m;
  if (n == 0) return a;
  check_enumeration_guard(model.size(), n);
  const RenewalFactors f = renewal_factors(model, obs, s, phi, n);
  std::vector<std::shared_ptr<const FiniteKernel>> kernels;
  for (int t = 1; t <= n; ++t) kernels.push_back(model.kernel(t));
  const int k = model.size();
  std::vector<ComplexMatrix> prefix(static_cast<std::size_t>(n) + 1);
  prefix[0] = ComplexMatrix::Identity(m, m);
  // Depth-first over paths; prob is P(X_1..X_t).
  auto visit = [&](auto&& self, int t, int x, double prob) -> void {
    const ComplexMatrix& mt = prefix[static_cast<std::size_t>(t)];
    a[static_cast<std::size_t>(t)] += prob * (mt * mt.adjoint()).trace().real();
    if (t == n) return;
    const FiniteKernel& p = *kernels[static_cast<std::size_t>(t)];
    for (int y = 0; y < k; ++y) {
      const double q = p(x, y);
      if (q == 0.0) continue;
      prefix[static_cast<std::size_t>(t) + 1] = mt * f.W[static_cast<std::size_t>(t)][static_cast<std::size_t>(y)];
      self(self, t + 1, y, prob * q);
    }
  };
  const RealVector& mu1 = f.mus[1];
  for (int x = 0; x < k; ++x) {
    if (mu1(x) == 0.0) continue;
    prefix[1] = f.W[0][static_cast<std::size_t>(x)];
    visit(visit, 1, x, mu1(x));
  }
  return a;
}

// B_{n,i}, b_{n,i} for i = 1..n by the backward recursion.
inline RenewalLedger renewal_coefficients(const FiniteMarkovModel& model, const ObservableSequence& obs, double s,
                                          double phi, int n) {
  if (n < 1) throw std::invalid_argument("renewal_coefficients: need n >= 1");
  const RenewalFactors f = renewal_factors(model, obs, s, phi, n);
  const int k = model.size();
  RenewalLedger led;
  led.n = n;
  led.s = s;
  led.phi = phi;
  const double gamma = std::cos(phi);
  std::vector<HermitianMatrix> h(static_cast<std::size_t>(k));  // H_{n,i-1} as a function of x
  for (int i = 1; i <= n; ++i) {
    const int tau = n - i + 1;
    std::vector<HermitianMatrix> theta(static_cast<std::size_t>(k));
    if (i == 1) {
      for (int x = 0; x < k; ++x)
        theta[static_cast<std::size_t>(x)] = expm_hermitian(f.centered[static_cast<std::size_t>(n - 1)][x], s * gamma);
    } else {
      const auto p = model.kernel(tau + 1);
      for (int x = 0; x < k; ++x) {
        ComplexMatrix ph = ComplexMatrix::Zero(obs.dim(), obs.dim());
        for (int y = 0; y < k; ++y)
          if ((*p)(x, y) != 0.0) ph += (*p)(x, y) * h[static_cast<std::size_t>(y)].matrix();
        const ComplexMatrix& w = f.W[static_cast<std::size_t>(tau - 1)][static_cast<std::size_t>(x)];
        theta[static_cast<std::size_t>(x)] = HermitianMatrix(ComplexMatrix(w * ph * w.adjoint()));
      }
    }
    const HermitianMatrix b = weighted_mean(theta, f.mus[static_cast<std::size_t>(tau)]);
    for (int x = 0; x < k; ++x) h[static_cast<std::size_t>(x)] = theta[static_cast<std::size_t>(x)] - b;
    led.B.push_back(b);
    led.b.push_back(op_norm(b));
  }
  return led;
}

struct RenewalCheck {
  int n = 0;
  double lhs = 0.0;  // a_n
  double rhs = 0.0;  // sum_i b_{n,i} a_{n-i}
};

struct RenewalReport {
  bool ok = true;
  std::vector<RenewalCheck> checks;  // one per horizon 1..n
  double measured_C = 0.0;
  bool close_ok = true;
  RenewalLedger ledger;  // at the full horizon, with a_0..a_n

  std::string dump() const {
    std::ostringstream os;
    os.precision(17);
    os << "renewal n=" << ledger.n << " s=" << ledger.s << " phi=" << ledger.phi << " C=" << measured_C << "\n";
    for (const auto& c : checks) os << "  n'=" << c.n << " a=" << c.lhs << " rhs=" << c.rhs << "\n";
    for (std::size_t i = 0; i < ledger.a.size(); ++i) os << "  a_" << i << "=" << ledger.a[i] << "\n";
    for (std::size_t i = 0; i < ledger.b.size(); ++i) os << "  b_" << (i + 1) << "=" << ledger.b[i] << "\n";
    return os.str();
  }
};

// Checks a_k <= sum_i b_{k,i} a_{k-i} for every k <= n; then, with C the
// smallest constant such that sum_i b_{k,i} <= 1 + C s^2 for all k <= n,
// checks a_k <= m (1 + C s^2)^k.
inline RenewalReport verify_renewal(const FiniteMarkovModel& model, const ObservableSequence& obs, double s,
                                    double phi, int n, double tol = 1e-9) {
  RenewalReport rep;
  const auto a = exact_an(model, obs, s, phi, n);
  const int m = obs.dim();
  double c = 0.0;
  for (int k = 1; k <= n; ++k) {
    const RenewalLedger led = renewal_coefficients(model, obs, s, phi, k);
    RenewalCheck chk;
    chk.n = k;
    chk.lhs = a[static_cast<std::size_t>(k)];
    double sum_b = 0.0;
    for (int i = 1; i <= k; ++i) {
      chk.rhs += led.b[static_cast<std::size_t>(i - 1)] * a[static_cast<std::size_t>(k - i)];
      sum_b += led.b[static_cast<std::size_t>(i - 1)];
    }
    if (chk.lhs > chk.rhs + tol * (1.0 + chk.rhs)) rep.ok = false;
    if (s > 0.0) c = std::max(c, (sum_b - 1.0) / (s * s));
    rep.checks.push_back(chk);
    if (k == n) rep.ledger = led;
  }
  rep.ledger.a = a;
  rep.measured_C = c;
  for (int k = 0; k <= n; ++k) {
    const double rhs = m * std::pow(1.0 + c * s * s, k);
    if (a[static_cast<std::size_t>(k)] > rhs + tol * (1.0 + rhs)) rep.close_ok = false;
  }
  return rep;
}

}  // namespace mcb

#endif  // MCB_MC_VERIFY_HPP_
