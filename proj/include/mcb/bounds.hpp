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

// Closed-form tail bounds for matrix-valued additive functionals of
// inhomogeneous chains, their inversion for sample-size planning, and the
// tracking bounds for projected Elo ratings.

#ifndef MCB_BOUNDS_HPP_
#define MCB_BOUNDS_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mcb {

class MissingParameter : public std::invalid_argument {
 public:
  explicit MissingParameter(std::string_view name)
      : std::invalid_argument("bound parameter '" + std::string(name) + "' is required but not set") {}
};

// Raised when the inputs contradict each other or leave an evaluator's window.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BoundParams {
  std::optional<double> m;
  std::optional<double> n;
  std::optional<double> eps;
  std::optional<double> L;
  std::optional<double> D;
  std::optional<double> delta_op;
  std::optional<double> delta_f;
  std::optional<double> kappa;
  std::optional<double> lambda;
  std::optional<double> sigma_inf;
  std::optional<double> kappa_tilde;
};

struct TailBound {
  double probability = 1.0;
  bool event_empty = false;  // deviation exceeds the almost-sure range
};

enum class BoundKind { kCurv, kCurvDiam, kSpec, kOllivierPoint, kOllivierAvg };

inline std::string_view bound_name(BoundKind k) {
  switch (k) {
    case BoundKind::kCurv: return "curv";
    case BoundKind::kCurvDiam: return "curv_diam";
    case BoundKind::kSpec: return "spec";
    case BoundKind::kOllivierPoint: return "olv_pt";
    case BoundKind::kOllivierAvg: return "olv_avg";
  }
  return "?";
}

namespace detail {

inline double need(const std::optional<double>& v, std::string_view name) {
  if (!v) throw MissingParameter(name);
  return *v;
}

inline double positive(const std::optional<double>& v, std::string_view name) {
  const double x = need(v, name);
  if (!(x > 0.0)) throw ParameterError("bound parameter '" + std::string(name) + "' must be > 0");
  return x;
}

inline double deviation(const BoundParams& p) {
  const double e = need(p.eps, "eps");
  if (!(e >= 0.0)) throw ParameterError("bound parameter 'eps' must be >= 0");
  return e;
}

inline double prefactor(double m) { return std::pow(m, 2.0 - std::numbers::pi / 4.0); }

inline TailBound chernoff(double m, double n, double eps, double v2) {
  return {std::min(1.0, prefactor(m) * std::exp(-n * eps * eps / (2.0 * v2))), false};
}

inline void check_ordering(const BoundParams& p) {
  if (p.delta_op && p.L && p.D && *p.delta_op > *p.L * *p.D * (1.0 + 1e-12)) {
    throw ParameterError("delta_op exceeds L*D");
  }
  if (p.delta_op && p.delta_f && *p.delta_f < *p.delta_op * (1.0 - 1e-12)) {
    throw ParameterError("delta_f is smaller than delta_op");
  }
}

}  // namespace detail

inline double variance_curv(const BoundParams& p) {
  const double l = detail::positive(p.L, "L");
  const double d = detail::positive(p.D, "D");
  const double k = detail::positive(p.kappa, "kappa");
  return 192.0 / (std::numbers::pi * std::numbers::pi) * l * l * d * d / k;
}

inline double variance_curv_diam(const BoundParams& p) {
  const double l = detail::positive(p.L, "L");
  const double d = detail::positive(p.D, "D");
  const double k = detail::positive(p.kappa, "kappa");
  const double a = detail::positive(p.delta_op, "delta_op");
  if (a > l * d * (1.0 + 1e-12)) throw ParameterError("delta_op exceeds L*D");
  return 3200.0 / (std::numbers::pi * std::numbers::pi) * a * a / k * (1.0 + std::log(l * d / a));
}

inline double variance_spec(const BoundParams& p) {
  const double a = detail::positive(p.delta_op, "delta_op");
  const double f = detail::positive(p.delta_f, "delta_f");
  const double lam = detail::positive(p.lambda, "lambda");
  if (f < a * (1.0 - 1e-12)) throw ParameterError("delta_f is smaller than delta_op");
  return 768.0 / (std::numbers::pi * std::numbers::pi) * a * f / lam;
}

// P(lambda_max(S) >= n eps) with curvature and diameter.
inline TailBound bound_curv(const BoundParams& p) {
  detail::check_ordering(p);
  const double m = detail::positive(p.m, "m");
  const double n = detail::positive(p.n, "n");
  const double eps = detail::deviation(p);
  const double v2 = variance_curv(p);
  if (eps > *p.L * *p.D) return {0.0, true};
  return detail::chernoff(m, n, eps, v2);
}

// Same event, variance driven by the oscillation under uniform curvature.
inline TailBound bound_curv_diam(const BoundParams& p) {
  detail::check_ordering(p);
  const double m = detail::positive(p.m, "m");
  const double n = detail::positive(p.n, "n");
  const double eps = detail::deviation(p);
  const double v2 = variance_curv_diam(p);
  if (eps > *p.delta_op) return {0.0, true};
  return detail::chernoff(m, n, eps, v2);
}

// Same event, variance from the effective gap.
inline TailBound bound_spec(const BoundParams& p) {
  detail::check_ordering(p);
  const double m = detail::positive(p.m, "m");
  const double n = detail::positive(p.n, "n");
  const double eps = detail::deviation(p);
  const double v2 = variance_spec(p);
  if (eps > *p.delta_op) return {0.0, true};
  return detail::chernoff(m, n, eps, v2);
}

// P(|F_n(X_n) - E F_n(X_n)|_op >= eps) from a fixed starting point.
inline TailBound bound_ollivier_point(const BoundParams& p) {
  const double m = detail::positive(p.m, "m");
  const double eps = detail::deviation(p);
  const double l = detail::positive(p.L, "L");
  const double s = detail::positive(p.sigma_inf, "sigma_inf");
  const double k = detail::positive(p.kappa, "kappa");
  return {std::min(1.0, 2.0 * m * std::exp(-eps * eps * k / (8.0 * l * l * s * s))), false};
}

// P(|S / n|_op > eps) from a fixed starting point, with T = n.
inline TailBound bound_ollivier_avg(const BoundParams& p) {
  const double m = detail::positive(p.m, "m");
  const double n = detail::positive(p.n, "n");
  const double eps = detail::deviation(p);
  const double l = detail::positive(p.L, "L");
  const double s = detail::positive(p.sigma_inf, "sigma_inf");
  const double k = detail::positive(p.kappa_tilde, "kappa_tilde");
  return {std::min(1.0, 2.0 * m * std::exp(-k * k * n * eps * eps / (8.0 * l * l * s * s))), false};
}

inline TailBound evaluate_bound(BoundKind kind, const BoundParams& p) {
  switch (kind) {
    case BoundKind::kCurv: return bound_curv(p);
    case BoundKind::kCurvDiam: return bound_curv_diam(p);
    case BoundKind::kSpec: return bound_spec(p);
    case BoundKind::kOllivierPoint: return bound_ollivier_point(p);
    case BoundKind::kOllivierAvg: return bound_ollivier_avg(p);
  }
  throw std::logic_error("unknown bound kind");
}

// Smallest n with bound <= delta. The closed-form solve is corrected by a
// local search so that evaluate(n) <= delta < evaluate(n - 1).
inline long invert_for_n(BoundKind kind, BoundParams p, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("invert_for_n: delta must lie in (0, 1)");
  const double eps = detail::deviation(p);
  if (!(eps > 0.0)) throw ParameterError("invert_for_n: eps must be > 0");
  const double m = detail::positive(p.m, "m");
  double rate = 0.0;  // bound(n) = min(1, a * exp(-rate * n))
  double a = detail::prefactor(m);
  switch (kind) {
    case BoundKind::kCurv:
      if (eps > detail::need(p.L, "L") * detail::need(p.D, "D")) {
        throw ParameterError("invert_for_n: eps outside the window eps <= L*D");
      }
      rate = eps * eps / (2.0 * variance_curv(p));
      break;
    case BoundKind::kCurvDiam:
      if (eps > detail::need(p.delta_op, "delta_op")) {
        throw ParameterError("invert_for_n: eps outside the window eps <= delta_op");
      }
      rate = eps * eps / (2.0 * variance_curv_diam(p));
      break;
    case BoundKind::kSpec:
      if (eps > detail::need(p.delta_op, "delta_op")) {
        throw ParameterError("invert_for_n: eps outside the window eps <= delta_op");
      }
      rate = eps * eps / (2.0 * variance_spec(p));
      break;
    case BoundKind::kOllivierAvg: {
      const double l = detail::positive(p.L, "L");
      const double s = detail::positive(p.sigma_inf, "sigma_inf");
      const double k = detail::positive(p.kappa_tilde, "kappa_tilde");
      a = 2.0 * m;
      rate = k * k * eps * eps / (8.0 * l * l * s * s);
      break;
    }
    case BoundKind::kOllivierPoint:
      throw ParameterError("invert_for_n: the pointwise bound does not depend on n");
  }
  auto eval = [&](long n) {
    p.n = static_cast<double>(n);
    return evaluate_bound(kind, p).probability;
  };
  long n = 1;
  if (a > delta) n = std::max(1L, static_cast<long>(std::ceil(std::log(a / delta) / rate)));
  while (n > 1 && eval(n - 1) <= delta) --n;
  while (eval(n) > delta) ++n;
  return n;
}

// One-step support diameter of the joint Elo chain.
inline double elo_granularity(double eta, double h_rho, double h_q) {
  return 2.0 * std::numbers::sqrt2 * eta + 2.0 * h_rho + 4.0 * std::numbers::sqrt2 * h_q;
}

struct EloBoundInputs {
  int players = 0;  // n
  double M = 0.0;
  double eta = 0.0;
  double kappa = 0.0;
  double drift = 0.0;  // Delta
};

struct EloPointBound {
  long burn_in = 0;
  double radius = 0.0;
  double probability = 1.0;
};

struct EloAvgBound {
  double min_T = 0.0;
  double radius = 0.0;
};

namespace detail {

inline void check_elo(const EloBoundInputs& in, std::optional<double> c) {
  if (!c) throw MissingParameter("C");
  if (!(*c > 0.0)) throw ParameterError("elo bound: C must be > 0");
  if (in.players < 2 || !(in.M > 0.0) || !(in.eta > 0.0) || !(in.kappa > 0.0) || !(in.drift >= 0.0)) {
    throw ParameterError("elo bound: need n >= 2, M > 0, eta > 0, kappa > 0 and Delta >= 0");
  }
}

inline double tracking_radius(const EloBoundInputs& in, double eps) {
  return std::sqrt(in.drift / in.kappa) + (1.0 + eps) * std::sqrt(2.0 * in.eta * in.eta / in.kappa);
}

}  // namespace detail

inline EloPointBound elo_point_bound(double eps, double B, const EloBoundInputs& in, std::optional<double> C) {
  detail::check_elo(in, C);
  if (!(eps > 0.0)) throw ParameterError("elo bound: eps must be > 0");
  EloPointBound out;
  const double burn = *C / in.kappa * std::log(in.players * in.M / (eps * in.eta));
  out.burn_in = std::max(0L, static_cast<long>(std::ceil(burn)));
  out.radius = detail::tracking_radius(in, eps) + *C * eps * B / std::sqrt(in.kappa);
  out.probability = std::min(1.0, 2.0 * std::exp(-eps * eps));
  return out;
}

inline EloAvgBound elo_avg_bound(double eps, double delta, const EloBoundInputs& in, std::optional<double> C) {
  detail::check_elo(in, C);
  if (!(eps > 0.0)) throw ParameterError("elo bound: eps must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("elo bound: delta must lie in (0, 1)");
  EloAvgBound out;
  out.min_T = *C / (eps * eps * in.eta * in.eta) * in.M * in.M * in.players * std::log(in.players / delta);
  out.radius = detail::tracking_radius(in, eps);
  return out;
}

}  // namespace mcb

#endif  // MCB_BOUNDS_HPP_
