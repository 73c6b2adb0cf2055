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

// Config parsing, experiment commands and report writers behind `lab`.
// Column orders of every CSV are listed in README.md.

#ifndef MCB_CLI_HPP_
#define MCB_CLI_HPP_

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcb/bounds.hpp"
#include "mcb/chain.hpp"
#include "mcb/curvature.hpp"
#include "mcb/dyadic.hpp"
#include "mcb/elo.hpp"
#include "mcb/lemmas.hpp"
#include "mcb/mc_verify.hpp"
#include "mcb/random_models.hpp"
#include "mcb/spectral.hpp"
#include "mcb/transport.hpp"

namespace mcb::cli {

using Json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kVerificationFailure = 3, kNumericalFailure = 4 };

// Schema violation; the message names the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Formatting.

// Shortest text that round-trips, capped at 17 significant digits.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline std::string fmt(std::optional<double> v) { return v ? fmt(*v) : std::string(); }

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("csv: row width differs from header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::size_t columns_;
  std::ostringstream out_;
};

inline std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

// Collects output files in memory, then writes them and a manifest that
// lists each by content hash.
class OutputSet {
 public:
  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

  Json write(const std::filesystem::path& dir, Json manifest) const {
    std::filesystem::create_directories(dir);
    Json outputs = Json::array();
    for (const auto& [name, content] : files_) {
      std::ofstream f(dir / name, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
      f << content;
      outputs.push_back({{"file", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    }
    manifest["outputs"] = outputs;
    std::ofstream m(dir / "manifest.json", std::ios::binary);
    m << manifest.dump(2) << '\n';
    return manifest;
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

// ---------------------------------------------------------------------------
// Field access with path-qualified diagnostics.

inline const Json& field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key + ": required field is missing");
  return *it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

inline std::int64_t integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(path + ": expected an integer");
  return j.get<std::int64_t>();
}

inline double number_or(const Json& j, const std::string& key, double fallback, const std::string& path) {
  auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, path + "." + key);
}

inline std::int64_t integer_or(const Json& j, const std::string& key, std::int64_t fallback, const std::string& path) {
  auto it = j.find(key);
  return it == j.end() ? fallback : integer(*it, path + "." + key);
}

inline std::uint64_t seed_of(const Json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return v;
  }
  throw ConfigError(path + ": expected an unsigned 64-bit seed");
}

inline std::vector<double> vector_of(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

inline RealVector real_vector(const Json& j, const std::string& path) {
  const auto v = vector_of(j, path);
  return Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Square matrix as nested rows, or flat row-major with the given size.
inline RealMatrix real_matrix(const Json& j, int size, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected a matrix");
  RealMatrix a(size, size);
  if (!j.empty() && j[0].is_array()) {
    if (static_cast<int>(j.size()) != size) throw ConfigError(path + ": expected " + std::to_string(size) + " rows");
    for (int i = 0; i < size; ++i) {
      const auto row = vector_of(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
      if (static_cast<int>(row.size()) != size) {
        throw ConfigError(path + "[" + std::to_string(i) + "]: expected " + std::to_string(size) + " entries");
      }
      for (int k = 0; k < size; ++k) a(i, k) = row[static_cast<std::size_t>(k)];
    }
    return a;
  }
  const auto flat = vector_of(j, path);
  if (flat.size() != static_cast<std::size_t>(size) * static_cast<std::size_t>(size)) {
    throw ConfigError(path + ": expected " + std::to_string(size * size) + " row-major entries");
  }
  for (int i = 0; i < size; ++i)
    for (int k = 0; k < size; ++k) a(i, k) = flat[static_cast<std::size_t>(i * size + k)];
  return a;
}

// Hermitian entries are numbers or [re, im] pairs, nested as rows.
inline HermitianMatrix hermitian(const Json& j, int m, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != m) {
    throw ConfigError(path + ": expected " + std::to_string(m) + " rows");
  }
  ComplexMatrix a(m, m);
  for (int i = 0; i < m; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != m) {
      throw ConfigError(rp + ": expected " + std::to_string(m) + " entries");
    }
    for (int k = 0; k < m; ++k) {
      const Json& e = row[static_cast<std::size_t>(k)];
      const std::string ep = rp + "[" + std::to_string(k) + "]";
      if (e.is_array()) {
        if (e.size() != 2) throw ConfigError(ep + ": complex entries are [re, im]");
        a(i, k) = Complex(number(e[0], ep), number(e[1], ep));
      } else {
        a(i, k) = Complex(number(e, ep), 0.0);
      }
    }
  }
  if ((a - a.adjoint()).norm() > 1e-9 * (1.0 + a.norm())) throw ConfigError(path + ": matrix is not Hermitian");
  return HermitianMatrix(a);
}

// ---------------------------------------------------------------------------
// Models and observables.

struct RuleSpec {
  KernelSequence kernels;
  std::optional<FiniteMetricSpace> space;
};

// Built-in kernel rules:
//   identity                              P_t = I
//   mixing {pi?}                          every row equal to pi (default uniform)
//   dyadic_grid {J, D?}                   dyadic kernel on the grid k D / 2^J
//   random_inhomogeneous {seed, min_mix?, max_mix?, horizon?}
inline RuleSpec builtin_rule(const Json& rule, std::optional<int> size, const std::string& path) {
  const std::string name = field(rule, "name", path).get<std::string>();
  const Json params = rule.contains("params") ? rule["params"] : Json::object();
  const std::string pp = path + ".params";
  RuleSpec out;
  if (name == "identity" || name == "mixing") {
    if (!size) throw ConfigError(path + ": rule '" + name + "' needs model.size");
    const int n = *size;
    if (name == "identity") {
      out.kernels = KernelSequence::list({FiniteKernel::identity(n)}, true);
    } else {
      RealVector pi = params.contains("pi") ? real_vector(params["pi"], pp + ".pi")
                                            : RealVector(RealVector::Constant(n, 1.0 / n));
      if (pi.size() != n) throw ConfigError(pp + ".pi: length differs from model.size");
      out.kernels = KernelSequence::list({FiniteKernel::rank_one(pi)}, true);
    }
    return out;
  }
  if (name == "dyadic_grid") {
    const int J = static_cast<int>(integer(field(params, "J", pp), pp + ".J"));
    const double D = number_or(params, "D", 1.0, pp);
    if (size && *size != (1 << J) + 1) throw ConfigError(pp + ".J: grid size 2^J + 1 differs from model.size");
    out.kernels = KernelSequence::list({dyadic_grid_kernel(J)}, true);
    out.space = dyadic_grid_space(J, D);
    return out;
  }
  if (name == "random_inhomogeneous") {
    if (!size) throw ConfigError(path + ": rule '" + name + "' needs model.size");
    const int n = *size;
    const Stream master(seed_of(field(params, "seed", pp), pp + ".seed"));
    const double lo = number_or(params, "min_mix", 0.5, pp);
    const double hi = number_or(params, "max_mix", 0.95, pp);
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) throw ConfigError(pp + ": need 0 <= min_mix <= max_mix <= 1");
    std::optional<int> horizon;
    if (params.contains("horizon")) horizon = static_cast<int>(integer(params["horizon"], pp + ".horizon"));
    out.kernels = KernelSequence::rule(
        [master, n, lo, hi](int t) {
          Stream s = master.child(static_cast<std::uint64_t>(t));
          return random_mixing_kernel(n, s, lo, hi);
        },
        horizon);
    return out;
  }
  throw ConfigError(path + ".name: unknown rule '" + name + "'");
}

// {size?, dist? | points?, mu0?, kernels: [...], periodic?} or {..., rule: {...}}.
inline FiniteMarkovModel parse_model(const Json& j, const std::string& path = "model") {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  std::optional<int> size;
  if (j.contains("size")) size = static_cast<int>(integer(j["size"], path + ".size"));
  if (size && *size < 1) throw ConfigError(path + ".size: must be >= 1");
  std::optional<FiniteMetricSpace> space;
  KernelSequence kernels;
  try {
    if (j.contains("rule")) {
      RuleSpec r = builtin_rule(j["rule"], size, path + ".rule");
      kernels = std::move(r.kernels);
      space = std::move(r.space);
    } else {
      if (!size) throw ConfigError(path + ".size: required with explicit kernels");
      const Json& ks = field(j, "kernels", path);
      if (!ks.is_array() || ks.empty()) throw ConfigError(path + ".kernels: expected a non-empty array");
      std::vector<FiniteKernel> list;
      for (std::size_t k = 0; k < ks.size(); ++k) {
        list.emplace_back(real_matrix(ks[k], *size, path + ".kernels[" + std::to_string(k) + "]"));
      }
      kernels = KernelSequence::list(std::move(list), j.value("periodic", false));
    }
    if (j.contains("dist")) {
      if (!size) throw ConfigError(path + ".size: required with dist");
      space = FiniteMetricSpace(real_matrix(j["dist"], *size, path + ".dist"));
    } else if (j.contains("points")) {
      const auto pts = vector_of(j["points"], path + ".points");
      space = FiniteMetricSpace::line(pts);
    }
    if (!space) throw ConfigError(path + ": need dist, points, or a rule that defines the space");
    if (size && space->size() != *size) throw ConfigError(path + ": space size differs from model.size");
    RealVector mu0;
    if (j.contains("mu0")) {
      mu0 = real_vector(j["mu0"], path + ".mu0");
    } else {
      mu0 = RealVector::Constant(space->size(), 1.0 / space->size());
    }
    return FiniteMarkovModel(std::move(*space), std::move(mu0), std::move(kernels));
  } catch (const ModelError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// {kind: constant, value} | {kind: explicit, frames, periodic?} |
// {kind: random, m, scale?, seed, horizon}
inline ObservableSequence parse_observables(const Json& j, int states, const std::string& path = "observables") {
  const std::string kind = field(j, "kind", path).get<std::string>();
  try {
    if (kind == "constant") {
      const Json& v = field(j, "value", path);
      return ObservableSequence::constant(hermitian(v, static_cast<int>(v.size()), path + ".value"), states);
    }
    if (kind == "explicit") {
      const Json& fr = field(j, "frames", path);
      if (!fr.is_array() || fr.empty()) throw ConfigError(path + ".frames: expected a non-empty array");
      std::vector<std::vector<HermitianMatrix>> frames;
      for (std::size_t t = 0; t < fr.size(); ++t) {
        const std::string fp = path + ".frames[" + std::to_string(t) + "]";
        if (!fr[t].is_array() || static_cast<int>(fr[t].size()) != states) {
          throw ConfigError(fp + ": expected one matrix per state (" + std::to_string(states) + ")");
        }
        std::vector<HermitianMatrix> frame;
        for (std::size_t x = 0; x < fr[t].size(); ++x) {
          const Json& a = fr[t][x];
          frame.push_back(hermitian(a, static_cast<int>(a.size()), fp + "[" + std::to_string(x) + "]"));
        }
        frames.push_back(std::move(frame));
      }
      return ObservableSequence(std::move(frames), j.value("periodic", true));
    }
    if (kind == "random") {
      const int m = static_cast<int>(integer(field(j, "m", path), path + ".m"));
      const int horizon = static_cast<int>(integer(field(j, "horizon", path), path + ".horizon"));
      if (m < 1 || horizon < 1) throw ConfigError(path + ": need m >= 1 and horizon >= 1");
      Stream s(seed_of(field(j, "seed", path), path + ".seed"));
      return random_observables(states, horizon, m, number_or(j, "scale", 1.0, path), s);
    }
  } catch (const ModelError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(path + ".kind: unknown observable kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Run context.

struct RunOptions {
  Json config;
  std::string config_text;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // --seed overrides config.seed
  int threads = 1;
};

struct CommandResult {
  OutputSet outputs;
  Json summary = Json::object();
  std::map<std::string, bool> checks;
  std::uint64_t seed = 0;
};

inline std::uint64_t effective_seed(const RunOptions& o) {
  if (o.seed) return *o.seed;
  if (o.config.contains("seed")) return seed_of(o.config["seed"], "seed");
  return 0;
}

inline int horizon_of(const Json& cfg) {
  const int n = static_cast<int>(integer(field(cfg, "n", "config"), "config.n"));
  if (n < 1) throw ConfigError("config.n: must be >= 1");
  return n;
}

inline Json rate_json(const EffectiveRate& r) { return {{"value", r.value}, {"assumption_weak", r.assumption_weak}}; }

// ---------------------------------------------------------------------------
// curvature

inline CommandResult cmd_curvature(const RunOptions& o) {
  CommandResult res;
  res.seed = effective_seed(o);
  const FiniteMarkovModel model = parse_model(field(o.config, "model", "config"));
  const int n = horizon_of(o.config);
  std::optional<ObservableSequence> obs;
  if (o.config.contains("observables")) obs = parse_observables(o.config["observables"], model.size());
  const CurvatureProfile kappas = curvature_profile(model, n, o.threads);
  const SigmaProfile sigmas = sigma_profile(model, n);
  std::optional<ChainSummary> summary;
  if (obs) summary = summarize(model, *obs, n, o.threads);

  CsvWriter csv({"t", "kappa_t", "sigma_t", "granularity_t", "lipschitz_t", "delta_op_t", "delta_f_t"});
  double sigma_inf = 0.0;
  for (int t = 1; t <= n; ++t) {
    const std::size_t i = static_cast<std::size_t>(t - 1);
    const double g = summary ? summary->granularity[i] : granularity(model, t);
    sigma_inf = std::max(sigma_inf, g);
    csv.row({std::to_string(t), fmt(kappas[i]), fmt(sigmas[i]), fmt(g),
             obs ? fmt(summary->lipschitz[i]) : "", obs ? fmt(oscillation_op(*obs, t)) : "",
             obs ? fmt(oscillation_frob(*obs, t)) : ""});
  }
  res.outputs.add("curvature.csv", csv.str());
  Json s = {{"n", n},
            {"states", model.size()},
            {"D", model.space().diameter()},
            {"kappa", rate_json(effective_kappa(kappas))},
            {"kappa_tilde", rate_json(effective_kappa_tilde(kappas))},
            {"lambda", rate_json(effective_lambda(sigmas))},
            {"sigma_inf", sigma_inf},
            {"clamped_kappas", kappas.clamped()}};
  if (summary) {
    s["m"] = summary->m;
    s["L"] = summary->L;
    s["delta_op"] = summary->delta_op;
    s["delta_f"] = summary->delta_f;
  }
  res.summary = s;
  return res;
}

// ---------------------------------------------------------------------------
// bounds

inline BoundParams parse_params(const Json& j, const std::string& path) {
  BoundParams p;
  auto opt = [&](const char* key, std::optional<double>& dst) {
    if (j.contains(key)) dst = number(j[key], path + "." + key);
  };
  opt("m", p.m);
  opt("n", p.n);
  opt("eps", p.eps);
  opt("L", p.L);
  opt("D", p.D);
  opt("delta_op", p.delta_op);
  opt("delta_f", p.delta_f);
  opt("kappa", p.kappa);
  opt("lambda", p.lambda);
  opt("sigma_inf", p.sigma_inf);
  opt("kappa_tilde", p.kappa_tilde);
  return p;
}

inline std::vector<double> parse_eps(const Json& cfg) {
  if (cfg.contains("eps")) return vector_of(cfg["eps"], "config.eps");
  if (cfg.contains("eps_range")) {
    const Json& r = cfg["eps_range"];
    const double lo = number(field(r, "lo", "config.eps_range"), "config.eps_range.lo");
    const double hi = number(field(r, "hi", "config.eps_range"), "config.eps_range.hi");
    const int k = static_cast<int>(integer(field(r, "points", "config.eps_range"), "config.eps_range.points"));
    if (k < 1 || !(hi >= lo)) throw ConfigError("config.eps_range: need points >= 1 and hi >= lo");
    std::vector<double> g;
    for (int i = 0; i < k; ++i) g.push_back(k == 1 ? lo : lo + (hi - lo) * i / (k - 1));
    return g;
  }
  return {};
}

// Params come from config.params, or are computed from model + observables
// (config.params then overrides individual fields).
inline CommandResult cmd_bounds(const RunOptions& o) {
  CommandResult res;
  res.seed = effective_seed(o);
  BoundParams base;
  if (o.config.contains("model")) {
    const FiniteMarkovModel model = parse_model(o.config["model"]);
    const ObservableSequence obs = parse_observables(field(o.config, "observables", "config"), model.size());
    const ChainSummary s = summarize(model, obs, horizon_of(o.config), o.threads);
    base = s.params(0.0);
    if (s.kappa.assumption_weak) base.kappa.reset();
    if (s.kappa_tilde.assumption_weak) base.kappa_tilde.reset();
    if (s.lambda.assumption_weak) base.lambda.reset();
  }
  if (o.config.contains("params")) {
    const BoundParams over = parse_params(o.config["params"], "config.params");
    auto merge = [](std::optional<double>& dst, const std::optional<double>& src) {
      if (src) dst = src;
    };
    merge(base.m, over.m);
    merge(base.n, over.n);
    merge(base.L, over.L);
    merge(base.D, over.D);
    merge(base.delta_op, over.delta_op);
    merge(base.delta_f, over.delta_f);
    merge(base.kappa, over.kappa);
    merge(base.lambda, over.lambda);
    merge(base.sigma_inf, over.sigma_inf);
    merge(base.kappa_tilde, over.kappa_tilde);
  }
  const std::vector<double> eps = parse_eps(o.config);
  if (eps.empty()) throw ConfigError("config: need eps or eps_range");
  std::optional<double> delta;
  if (o.config.contains("delta")) delta = number(o.config["delta"], "config.delta");

  const std::vector<BoundKind> kinds = {BoundKind::kCurv, BoundKind::kCurvDiam, BoundKind::kSpec,
                                        BoundKind::kOllivierPoint, BoundKind::kOllivierAvg};
  std::vector<std::string> header = {"eps"};
  for (BoundKind k : kinds) {
    header.emplace_back(bound_name(k));
    header.push_back(std::string(bound_name(k)) + "_event_empty");
    if (delta) header.push_back(std::string(bound_name(k)) + "_n_for_delta");
  }
  CsvWriter csv(header);
  Json skipped = Json::object();
  for (double e : eps) {
    BoundParams p = base;
    p.eps = e;
    std::vector<std::string> row = {fmt(e)};
    for (BoundKind k : kinds) {
      std::string val, empty, inv;
      try {
        const TailBound b = evaluate_bound(k, p);
        val = fmt(b.probability);
        empty = b.event_empty ? "1" : "0";
      } catch (const std::invalid_argument& err) {
        skipped[std::string(bound_name(k))] = err.what();
      }
      if (delta && !val.empty()) {
        try {
          inv = std::to_string(invert_for_n(k, p, *delta));
        } catch (const std::invalid_argument&) {
        }
      }
      row.push_back(val);
      row.push_back(empty);
      if (delta) row.push_back(inv);
    }
    csv.row(row);
  }
  res.outputs.add("bounds.csv", csv.str());
  Json params = Json::object();
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) params[key] = *v;
  };
  put("m", base.m);
  put("n", base.n);
  put("L", base.L);
  put("D", base.D);
  put("delta_op", base.delta_op);
  put("delta_f", base.delta_f);
  put("kappa", base.kappa);
  put("lambda", base.lambda);
  put("sigma_inf", base.sigma_inf);
  put("kappa_tilde", base.kappa_tilde);
  res.summary = {{"params", params}, {"unavailable", skipped}};
  return res;
}

// ---------------------------------------------------------------------------
// simulate

inline CommandResult cmd_simulate(const RunOptions& o) {
  CommandResult res;
  res.seed = effective_seed(o);
  const FiniteMarkovModel model = parse_model(field(o.config, "model", "config"));
  const ObservableSequence obs = parse_observables(field(o.config, "observables", "config"), model.size());
  const int n = horizon_of(o.config);
  const std::int64_t reps = integer(field(o.config, "reps", "config"), "config.reps");
  if (reps < 100) throw ConfigError("config.reps: need at least 100 trajectories");
  const DominanceTable table = dominance_table(model, obs, n, parse_eps(o.config), reps, res.seed, o.threads);
  const DominanceVerdict verdict = check_dominance(table);

  auto prob = [](const std::optional<TailBound>& b) { return b ? fmt(b->probability) : std::string(); };
  CsvWriter tail({"eps", "count", "N", "p_hat", "ci_lo", "ci_hi", "bound_curv", "bound_spec", "bound_olv_pt",
                  "bound_olv_avg"});
  CsvWriter events({"eps", "count_lambda_max", "ci_hi_lambda_max", "count_op_norm", "ci_hi_op_norm", "count_point",
                    "ci_hi_point", "curv_event_empty", "spec_event_empty"});
  for (const auto& r : table.rows) {
    tail.row({fmt(r.eps), std::to_string(r.count), std::to_string(table.reps), fmt(r.p_hat), fmt(r.ci.lo),
              fmt(r.ci.hi), prob(r.curv), prob(r.spec), prob(r.olv_point), prob(r.olv_avg)});
    events.row({fmt(r.eps), std::to_string(r.count), fmt(r.ci.hi), std::to_string(r.count_norm), fmt(r.ci_norm.hi),
                std::to_string(r.count_point), fmt(r.ci_point.hi), r.curv ? (r.curv->event_empty ? "1" : "0") : "",
                r.spec ? (r.spec->event_empty ? "1" : "0") : ""});
  }
  res.outputs.add("tail.csv", tail.str());
  res.outputs.add("events.csv", events.str());
  const ChainSummary& s = table.summary;
  res.summary = {{"n", n},
                 {"reps", reps},
                 {"m", s.m},
                 {"D", s.D},
                 {"L", s.L},
                 {"delta_op", s.delta_op},
                 {"delta_f", s.delta_f},
                 {"sigma_inf", s.sigma_inf},
                 {"kappa", rate_json(s.kappa)},
                 {"kappa_tilde", rate_json(s.kappa_tilde)},
                 {"lambda", rate_json(s.lambda)},
                 {"comparisons", verdict.comparisons},
                 {"violations", verdict.violations}};
  res.checks["dominance"] = verdict.ok;
  return res;
}

// ---------------------------------------------------------------------------
// elo

inline EloConfig parse_elo(const Json& j, std::uint64_t seed) {
  const std::string path = "config";
  EloConfig c;
  c.n = static_cast<int>(integer(field(j, "n", path), path + ".n"));
  c.M = number(field(j, "M", path), path + ".M");
  c.eta = number(field(j, "eta", path), path + ".eta");
  c.env.nu = number(field(j, "nu", path), path + ".nu");
  c.T = integer(field(j, "T", path), path + ".T");
  c.T0 = integer_or(j, "T0", 0, path);
  c.reps = static_cast<int>(integer(field(j, "reps", path), path + ".reps"));
  c.seed = seed;
  c.eps = number(field(j, "eps", path), path + ".eps");
  c.delta = number(field(j, "delta", path), path + ".delta");
  c.C_sweep = vector_of(field(j, "C_sweep", path), path + ".C_sweep");
  c.drift_resamples = static_cast<int>(integer_or(j, "drift_resamples", c.drift_resamples, path));
  c.drift_states = static_cast<int>(integer_or(j, "drift_states", c.drift_states, path));
  if (c.n < 2) throw ConfigError(path + ".n: need at least two players");
  const std::string init = j.value("rho_init", std::string("spread"));
  if (init == "spread") {
    c.rho_init = RatingInit::kSpread;
  } else if (init == "zero") {
    c.rho_init = RatingInit::kZero;
  } else {
    throw ConfigError(path + ".rho_init: expected 'spread' or 'zero'");
  }
  if (j.contains("q0")) c.q0 = real_vector(j["q0"], path + ".q0");
  const Json& env = field(j, "env", path);
  const std::string kind = field(env, "kind", path + ".env").get<std::string>();
  if (kind == "static") {
    c.env.kind = EnvKind::kStatic;
  } else if (kind == "ar-contract") {
    c.env.kind = EnvKind::kArContract;
    const Json params = env.contains("params") ? env["params"] : Json::object();
    c.env.radius = number_or(params, "radius", 0.0, path + ".env.params");
    c.env.q_base = params.contains("q_base") ? real_vector(params["q_base"], path + ".env.params.q_base")
                                             : uniform_pairs(c.n);
  } else {
    throw ConfigError(path + ".env.kind: expected 'static' or 'ar-contract'");
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

inline CommandResult cmd_elo(const RunOptions& o) {
  CommandResult res;
  res.seed = effective_seed(o);
  const EloConfig cfg = parse_elo(o.config, res.seed);
  const TrackingReport rep = run_tracking(cfg, o.threads);

  CsvWriter steps({"t", "mean_err2", "lemma_rhs", "min_ci", "max_ci"});
  for (const auto& s : rep.steps)
    steps.row({std::to_string(s.t), fmt(s.mean_err2), fmt(s.lemma_rhs), fmt(s.min_ci), fmt(s.max_ci)});
  CsvWriter windows({"C", "min_T", "window", "feasible", "radius", "violations", "violation_rate"});
  for (const auto& w : rep.windows)
    windows.row({fmt(w.C), fmt(w.min_T), std::to_string(w.window), w.feasible ? "1" : "0", fmt(w.radius),
                 std::to_string(w.violations), fmt(w.violation_rate)});
  CsvWriter points({"C", "burn_in", "feasible", "radius", "probability", "exceed", "exceed_rate"});
  for (const auto& p : rep.points)
    points.row({fmt(p.C), std::to_string(p.burn_in), p.feasible ? "1" : "0", fmt(p.radius), fmt(p.probability),
                std::to_string(p.exceed), fmt(p.exceed_rate)});
  res.outputs.add("elo_steps.csv", steps.str());
  res.outputs.add("elo_windows.csv", windows.str());
  res.outputs.add("elo_points.csv", points.str());

  Json s = {{"lambda", rep.lambda},
            {"kappa", rep.kappa},
            {"drift", rep.drift},
            {"h_rho", rep.h_rho},
            {"h_q", rep.h_q},
            {"B", rep.granularity},
            {"plateau_max", rep.plateau_max},
            {"plateau_bound", rep.plateau_bound},
            {"lemma_ok", rep.lemma_ok},
            {"lemma_ci_ok", rep.lemma_ci_ok},
            {"plateau_ok", rep.plateau_ok},
            {"window_ok", rep.window_ok}};
  if (rep.selected_window) s["selected_C"] = rep.windows[*rep.selected_window].C;
  if (rep.drift_check) {
    s["drift_estimate"] = {{"value", rep.drift_check->value},
                           {"se", rep.drift_check->se},
                           {"envelope", rep.drift_check->envelope},
                           {"within_envelope", rep.drift_check->within_envelope}};
    res.checks["drift_within_envelope"] = rep.drift_check->within_envelope &&
                                          rep.drift_check->value <= rep.drift + 3.0 * rep.drift_check->se;
  }
  res.summary = s;
  res.checks["lemma"] = rep.lemma_ok;
  res.checks["plateau"] = rep.plateau_ok;
  if (!rep.windows.empty()) res.checks["window"] = rep.window_ok;
  return res;
}

// ---------------------------------------------------------------------------
// verify

inline CommandResult cmd_verify(const RunOptions& o) {
  CommandResult res;
  res.seed = effective_seed(o);
  const int count = static_cast<int>(integer_or(o.config, "count", 100, "config"));
  if (count < 1) throw ConfigError("config.count: must be >= 1");
  const Stream master(res.seed);
  CsvWriter csv({"suite", "check", "instances", "failures", "worst_slack"});

  const LemmaReport lemmas = verify_lemma_suite(res.seed, count);
  for (const auto& r : lemmas.results) {
    csv.row({"lemma", r.name, std::to_string(r.instances), std::to_string(r.failures), fmt(r.worst_excess)});
    res.checks["lemma:" + r.name] = r.ok();
  }

  // Renewal inequality and its closing bound on small random instances.
  {
    int fails = 0;
    int close_fails = 0;
    double worst = -std::numeric_limits<double>::infinity();
    const auto phis = phi_grid();
    for (int k = 0; k < count; ++k) {
      Stream s = master.child(0x7e11e3ULL).child(static_cast<std::uint64_t>(k));
      RandomChainOptions opt;
      opt.states = 2 + static_cast<int>(s.below(3));
      opt.horizon = 1 + static_cast<int>(s.below(5));
      opt.min_mix = 0.0;
      const FiniteMarkovModel model = random_chain(opt, s);
      const int m = 1 + static_cast<int>(s.below(2));
      const ObservableSequence obs = random_observables(opt.states, opt.horizon, m, 1.0, s);
      const double sv = s.uniform(0.0, 0.1);
      const double phi = phis[static_cast<std::size_t>(s.below(phis.size()))];
      const RenewalReport r = verify_renewal(model, obs, sv, phi, opt.horizon);
      fails += r.ok ? 0 : 1;
      close_fails += r.close_ok ? 0 : 1;
      for (const auto& c : r.checks) worst = std::max(worst, c.lhs - c.rhs);
    }
    csv.row({"renewal", "renewal_ineq", std::to_string(count), std::to_string(fails), fmt(worst)});
    csv.row({"renewal", "close", std::to_string(count), std::to_string(close_fails), ""});
    res.checks["renewal"] = fails == 0;
    res.checks["renewal_close"] = close_fails == 0;
  }

  // Two-atom dyadic curvature.
  {
    int fails = 0;
    double worst = 0.0;
    Stream s = master.child(0xd7ad1cULL);
    for (int k = 0; k < count; ++k) {
      const double D = 1024.0;
      double x = s.uniform(0.0, D);
      double y = s.uniform(0.0, D);
      if (x == y) y = std::fmod(x + 1.0, D);
      const double err = std::abs(dyadic_pair_curvature(x, y, D) - 0.5);
      worst = std::max(worst, err);
      fails += err > 1e-12;
    }
    csv.row({"dyadic", "pair_curvature", std::to_string(count), std::to_string(fails), fmt(worst)});
    res.checks["dyadic_curvature"] = fails == 0;
  }

  // Projection constraints and idempotence.
  {
    int fails = 0;
    double worst = 0.0;
    Stream s = master.child(0x9a0fULL);
    for (int k = 0; k < count; ++k) {
      const int n = 2 + static_cast<int>(s.below(5));
      const double M = s.uniform(0.5, 3.0);
      RealVector y(n);
      for (int i = 0; i < n; ++i) y(i) = s.uniform(-3.0 * M, 3.0 * M);
      const RealVector x = project_zero_sum_box(y, M);
      const double err = std::max({std::abs(x.sum()), x.cwiseAbs().maxCoeff() - M,
                                   (project_zero_sum_box(x, M) - x).cwiseAbs().maxCoeff()});
      worst = std::max(worst, err);
      fails += err > 1e-10;
    }
    csv.row({"elo", "projection", std::to_string(count), std::to_string(fails), fmt(worst)});
    res.checks["projection"] = fails == 0;
  }
  res.outputs.add("verify.csv", csv.str());
  res.summary = {{"count", count}};
  return res;
}

// ---------------------------------------------------------------------------
// Dispatch.

inline CommandResult run_command(const std::string& name, const RunOptions& o) {
  if (name == "curvature") return cmd_curvature(o);
  if (name == "bounds") return cmd_bounds(o);
  if (name == "simulate") return cmd_simulate(o);
  if (name == "elo") return cmd_elo(o);
  if (name == "verify") return cmd_verify(o);
  throw ConfigError("unknown command '" + name + "'");
}

inline Json load_config(const std::filesystem::path& file, std::string* text) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError(file.string() + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  *text = ss.str();
  try {
    return Json::parse(*text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

// Runs a command end to end: outputs, summary.json and manifest.json. All
// outputs except the manifest depend only on (config, seed).
inline int execute(const std::string& name, RunOptions o, std::ostream& log = std::cerr) {
  const auto start = std::chrono::steady_clock::now();
  CommandResult res;
  try {
    res = run_command(name, o);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Json::exception& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const MissingParameter& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    log << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::out_of_range& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json summary = res.summary;
  summary["command"] = name;
  summary["seed"] = std::to_string(res.seed);
  Json checks = Json::object();
  bool all = true;
  for (const auto& [k, v] : res.checks) {
    checks[k] = v;
    all = all && v;
  }
  summary["checks"] = checks;
  res.outputs.add("summary.json", summary.dump(2) + "\n");
  Json manifest = {{"command", name},
                   {"version", kVersion},
                   {"config_sha256", sha256_hex(o.config_text)},
                   {"seed", std::to_string(res.seed)},
                   {"threads", o.threads},
                   {"wall_time_s", wall},
                   {"checks", checks},
                   {"passed", all}};
  try {
    res.outputs.write(o.out_dir, manifest);
  } catch (const std::exception& e) {
    log << "output error: " << e.what() << '\n';
    return kConfigError;
  }
  for (const auto& [k, v] : res.checks) log << (v ? "PASS " : "FAIL ") << k << '\n';
  return all ? kOk : kVerificationFailure;
}

}  // namespace mcb::cli

#endif  // MCB_CLI_HPP_
