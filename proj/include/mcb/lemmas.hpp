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

// Randomized property checks for the auxiliary inequalities behind the
// tail bounds. Each check draws its instances from
// Stream(seed).child(check id).child(instance), so a failure is reproducible
// from the reported seed and instance index alone.

#ifndef MCB_LEMMAS_HPP_
#define MCB_LEMMAS_HPP_

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mcb/chain.hpp"
#include "mcb/curvature.hpp"
#include "mcb/linalg.hpp"
#include "mcb/mc_verify.hpp"
#include "mcb/random_models.hpp"
#include "mcb/rng.hpp"
#include "mcb/spectral.hpp"

namespace mcb {

struct LemmaResult {
  std::string name;
  int instances = 0;
  int failures = 0;
  double worst_excess = -INFINITY;  // max over instances of lhs - rhs
  int first_failure = -1;
  std::uint64_t seed = 0;

  bool ok() const { return failures == 0 && instances > 0; }
};

struct LemmaReport {
  std::vector<LemmaResult> results;

  bool ok() const {
    return std::all_of(results.begin(), results.end(), [](const LemmaResult& r) { return r.ok(); });
  }

  std::string summary() const {
    std::ostringstream os;
    os.precision(6);
    for (const auto& r : results) {
      os << (r.ok() ? "ok   " : "FAIL ") << r.name << " instances=" << r.instances << " failures=" << r.failures
         << " worst_excess=" << r.worst_excess;
      if (!r.ok()) os << " seed=" << r.seed << " first_failure=" << r.first_failure;
      os << "\n";
    }
    return os.str();
  }
};

// One check: given the instance stream, return lhs - rhs (<= tol passes).
using LemmaCheck = std::function<double(Stream&)>;

inline LemmaResult run_lemma(const std::string& name, std::uint64_t id, std::uint64_t seed, int count, double tol,
                             const LemmaCheck& check) {
  LemmaResult r;
  r.name = name;
  r.seed = seed;
  const Stream base = Stream(seed).child(id);
  for (int k = 0; k < count; ++k) {
    Stream s = base.child(static_cast<std::uint64_t>(k));
    const double excess = check(s);
    ++r.instances;
    r.worst_excess = std::max(r.worst_excess, excess);
    if (!(excess <= tol)) {
      ++r.failures;
      if (r.first_failure < 0) r.first_failure = k;
    }
  }
  return r;
}

// sup_{x != y} |G(x) - G(y)|_op / d(x, y) for general matrix maps.
inline double lipschitz_matrix(const std::vector<ComplexMatrix>& g, const FiniteMetricSpace& space) {
  double best = 0.0;
  for (int x = 0; x < space.size(); ++x)
    for (int y = x + 1; y < space.size(); ++y)
      best = std::max(best, op_norm(ComplexMatrix(g[x] - g[y])) / space(x, y));
  return best;
}

inline double sup_norm(const std::vector<ComplexMatrix>& g) {
  double best = 0.0;
  for (const auto& a : g) best = std::max(best, op_norm(a));
  return best;
}

// (PF)(x) = sum_y P(x, y) F(y).
inline std::vector<ComplexMatrix> apply_kernel(const FiniteKernel& p, const std::vector<ComplexMatrix>& f) {
  std::vector<ComplexMatrix> out;
  for (int x = 0; x < p.size(); ++x) {
    ComplexMatrix acc = ComplexMatrix::Zero(f[0].rows(), f[0].cols());
    for (int y = 0; y < p.size(); ++y) acc += p(x, y) * f[y];
    out.push_back(acc);
  }
  return out;
}

// (sum_x mu(x) |F(x)|_F^2)^{1/2}.
inline double weighted_l2(const std::vector<ComplexMatrix>& f, const RealVector& mu) {
  double acc = 0.0;
  for (Eigen::Index x = 0; x < mu.size(); ++x) acc += mu(x) * f[static_cast<std::size_t>(x)].squaredNorm();
  return std::sqrt(acc);
}

namespace lemma_checks {

inline double hoeffding(Stream& s) {
  const int m = 1 + static_cast<int>(s.below(4));
  const int atoms = 2 + static_cast<int>(s.below(5));
  const RealVector p = random_distribution(atoms, s);
  std::vector<HermitianMatrix> y;
  HermitianMatrix mean = HermitianMatrix::zero(m);
  for (int k = 0; k < atoms; ++k) {
    y.push_back(random_hermitian(m, 1.0, s));
    mean += p(k) * y.back();
  }
  double r = 0.0;
  for (auto& v : y) {
    v -= mean;
    r = std::max(r, op_norm(v));
  }
  r *= s.uniform(1.0, 1.5);  // any R dominating the spectrum
  const double sc = s.uniform(-3.0, 3.0) / r;
  ComplexMatrix e = ComplexMatrix::Zero(m, m);
  for (int k = 0; k < atoms; ++k) e += p(k) * expm_hermitian(y[k], sc).matrix();
  const double c = std::cosh(sc * r);
  return lambda_max(HermitianMatrix(ComplexMatrix(e - c * ComplexMatrix::Identity(m, m))));
}

struct ExpPair {
  ComplexMatrix a;
  ComplexMatrix b;
};

inline ExpPair exp_pair(Stream& s) {
  const int m = 1 + static_cast<int>(s.below(5));
  ExpPair p;
  p.a = random_complex(m, s.uniform(0.1, 1.5), s);
  p.b = s.bernoulli(0.5) ? ComplexMatrix(p.a + random_complex(m, s.uniform(1e-4, 0.5), s))
                         : random_complex(m, s.uniform(0.1, 1.5), s);
  return p;
}

inline double exp_norm(Stream& s) {
  const ComplexMatrix a = random_complex(1 + static_cast<int>(s.below(5)), s.uniform(0.1, 2.0), s);
  const ComplexMatrix ea = a.exp();
  const double rhs = std::exp(op_norm(a));
  return (op_norm(ea) - rhs) / rhs;
}

inline double exp_diff_op(Stream& s) {
  const ExpPair p = exp_pair(s);
  const double lhs = op_norm(ComplexMatrix(p.a.exp() - p.b.exp()));
  const double rhs = std::exp(std::max(op_norm(p.a), op_norm(p.b))) * op_norm(ComplexMatrix(p.a - p.b));
  return (lhs - rhs) / (1e-300 + rhs);
}

inline double exp_diff_frob(Stream& s) {
  const ExpPair p = exp_pair(s);
  const double lhs = (p.a.exp() - p.b.exp()).norm();
  const double rhs = std::exp(std::max(op_norm(p.a), op_norm(p.b))) * (p.a - p.b).norm();
  return (lhs - rhs) / (1e-300 + rhs);
}

inline double product_rule(Stream& s) {
  const int k = 2 + static_cast<int>(s.below(4));
  const int m = 1 + static_cast<int>(s.below(3));
  const FiniteMetricSpace space = random_metric(k, s);
  std::vector<ComplexMatrix> g;
  std::vector<ComplexMatrix> h;
  std::vector<ComplexMatrix> gh;
  for (int x = 0; x < k; ++x) {
    g.push_back(random_complex(m, 1.0, s));
    h.push_back(random_complex(m, 1.0, s));
    gh.push_back(g.back() * h.back());
  }
  const double lhs = lipschitz_matrix(gh, space);
  const double rhs = sup_norm(g) * lipschitz_matrix(h, space) + lipschitz_matrix(g, space) * sup_norm(h);
  return (lhs - rhs) / rhs;
}

inline double diam_center(Stream& s) {
  const int k = 2 + static_cast<int>(s.below(4));
  const int m = 1 + static_cast<int>(s.below(3));
  const FiniteMetricSpace space = random_metric(k, s);
  const RealVector mu = random_distribution(k, s);
  std::vector<ComplexMatrix> h;
  ComplexMatrix mean = ComplexMatrix::Zero(m, m);
  for (int x = 0; x < k; ++x) {
    h.push_back(random_complex(m, 1.0, s));
    mean += mu(x) * h.back();
  }
  std::vector<ComplexMatrix> centered;
  for (const auto& v : h) centered.push_back(v - mean);
  const double lhs = sup_norm(centered);
  const double rhs = space.diameter() * lipschitz_matrix(h, space);
  return (lhs - rhs) / rhs;
}

inline double lipschitz_lift(Stream& s) {
  const int k = 2 + static_cast<int>(s.below(4));
  const int m = 1 + static_cast<int>(s.below(3));
  const FiniteMetricSpace space = random_metric(k, s);
  const FiniteKernel p = s.bernoulli(0.5) ? random_mixing_kernel(k, s, 0.3) : random_kernel(k, s, 0.3);
  const double a = 1.0 - ollivier_kappa(p, space);
  std::vector<ComplexMatrix> f;
  for (int x = 0; x < k; ++x) f.push_back(random_hermitian(m, 1.0, s).matrix());
  const double lhs = lipschitz_matrix(apply_kernel(p, f), space);
  const double rhs = a * lipschitz_matrix(f, space);
  return lhs - rhs;
}

inline double l2_lift(Stream& s) {
  const int k = 2 + static_cast<int>(s.below(4));
  const int m = 1 + static_cast<int>(s.below(3));
  const RealVector mu_prev = random_distribution(k, s);
  const FiniteKernel p = random_kernel(k, s, 0.3);
  const RealVector mu = p.matrix().transpose() * mu_prev;
  const double sigma = sigma_step(p, mu_prev, mu);
  std::vector<ComplexMatrix> f;
  ComplexMatrix mean = ComplexMatrix::Zero(m, m);
  for (int x = 0; x < k; ++x) {
    f.push_back(random_hermitian(m, 1.0, s).matrix());
    mean += mu(x) * f.back();
  }
  for (auto& v : f) v -= mean;
  return weighted_l2(apply_kernel(p, f), mu_prev) - sigma * weighted_l2(f, mu);
}

inline double sigma_bound(Stream& s) {
  const int k = 2 + static_cast<int>(s.below(6));
  RealVector mu_prev = random_distribution(k, s);
  if (k > 2 && s.bernoulli(0.5)) {
    mu_prev(static_cast<Eigen::Index>(s.below(static_cast<std::uint64_t>(k)))) = 0.0;
    mu_prev /= mu_prev.sum();
  }
  const FiniteKernel p = random_kernel(k, s, s.uniform(0.0, 0.7));
  const RealVector mu = p.matrix().transpose() * mu_prev;
  return sigma_step(p, mu_prev, mu) - 1.0;
}

inline double tilted(Stream& s) {
  const int len = 1 + static_cast<int>(s.below(50));
  std::vector<double> k(static_cast<std::size_t>(len));
  for (auto& v : k) {
    const double u = s.uniform();
    v = u < 0.2 ? 0.0 : (u < 0.3 ? 1.0 : s.uniform());
  }
  const CurvatureProfile profile(k);
  double worst = -INFINITY;
  for (int n = 1; n <= len; ++n) {
    // The assumption must hold up to the horizon considered.
    const CurvatureProfile prefix(std::vector<double>(k.begin(), k.begin() + n));
    const double kappa = effective_kappa(prefix).value;
    worst = std::max(worst, tilted_sum(profile, kappa, n) - 3.0 / kappa);
  }
  return worst;
}

// Coefficient bounds for 0 < s <= 1/(LD) on chains with kappa_t >= 0.
inline double coefficients(Stream& s) {
  RandomChainOptions opt;
  opt.states = 2 + static_cast<int>(s.below(3));
  opt.horizon = 1 + static_cast<int>(s.below(5));
  opt.min_mix = 0.5;
  const FiniteMarkovModel model = random_chain(opt, s);
  const int m = 1 + static_cast<int>(s.below(2));
  const ObservableSequence obs = random_observables(opt.states, opt.horizon, m, 1.0, s);
  const int n = opt.horizon;
  double l = 0.0;
  for (int t = 1; t <= n; ++t) l = std::max(l, lipschitz_op(obs, model.space(), t));
  const double d = model.space().diameter();
  const double sc = s.uniform(0.05, 1.0) / (l * d);
  const auto phis = phi_grid();
  const double phi = phis[static_cast<std::size_t>(s.below(phis.size()))];
  const CurvatureProfile kap = curvature_profile(model, n);
  const RenewalLedger led = renewal_coefficients(model, obs, sc, phi, n);
  const double sld = sc * l * d;
  double worst = led.b[0] - std::exp(sld * sld / 2.0);
  for (int i = 2; i <= n; ++i) {
    double prod = 1.0;
    for (int ell = n - i + 2; ell <= n; ++ell) prod *= std::exp(2.0 * sld) * (1.0 - kap[static_cast<std::size_t>(ell - 1)]);
    worst = std::max(worst, led.b[static_cast<std::size_t>(i - 1)] - 2.0 * sld * sld * prod);
  }
  return worst;
}

inline double trace_exp_lower(Stream& s) {
  const HermitianMatrix a = random_hermitian(1 + static_cast<int>(s.below(5)), s.uniform(0.1, 2.0), s);
  const double sc = s.uniform(-2.0, 2.0);
  const double rhs = std::exp(sc * lambda_max(a));
  return (rhs - trace_exp(sc * a)) / rhs;
}

}  // namespace lemma_checks

inline LemmaReport verify_lemma_suite(std::uint64_t seed, int count = 100) {
  LemmaReport rep;
  auto add = [&](const char* name, std::uint64_t id, double tol, const LemmaCheck& c) {
    rep.results.push_back(run_lemma(name, id, seed, count, tol, c));
  };
  add("matrix_hoeffding", 1, 1e-10, lemma_checks::hoeffding);
  add("exp_norm", 2, 1e-9, lemma_checks::exp_norm);
  add("exp_diff_op", 3, 1e-9, lemma_checks::exp_diff_op);
  add("exp_diff_frobenius", 4, 1e-9, lemma_checks::exp_diff_frob);
  add("lipschitz_product_rule", 5, 1e-12, lemma_checks::product_rule);
  add("diam_center", 6, 1e-12, lemma_checks::diam_center);
  add("lipschitz_lift", 7, 1e-9, lemma_checks::lipschitz_lift);
  add("l2_lift", 8, 1e-9, lemma_checks::l2_lift);
  add("sigma_at_most_one", 9, 1e-12, lemma_checks::sigma_bound);
  add("tilted_sum", 10, 1e-9, lemma_checks::tilted);
  add("coefficient_bounds", 11, 1e-12, lemma_checks::coefficients);
  add("trace_exp_lower", 12, 1e-12, lemma_checks::trace_exp_lower);
  return rep;
}

}  // namespace mcb

#endif  // MCB_LEMMAS_HPP_
