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

// Exact Wasserstein-1 distances between discrete measures, solved as a
// balanced transportation problem with the primal transportation simplex
// (northwest-corner start, MODI potentials, stepping-stone cycles).

#ifndef MCB_TRANSPORT_HPP_
#define MCB_TRANSPORT_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcb/linalg.hpp"

namespace mcb {

struct TransportPlan {
  RealMatrix coupling;
  double cost = 0.0;
};

// Atoms of a discrete measure: state indices with strictly positive mass.
struct Atoms {
  std::vector<int> index;
  std::vector<double> mass;

  std::size_t size() const { return index.size(); }
};

inline Atoms atoms_of(const RealVector& mu) {
  Atoms a;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu(i) > 0.0) {
      a.index.push_back(static_cast<int>(i));
      a.mass.push_back(mu(i));
    }
  }
  return a;
}

struct FlowCell {
  int i;
  int j;
  double flow;
};

namespace detail {

// Transportation simplex on supplies a (rows), demands b (cols) and cost c.
// Requires sum a == sum b up to round-off; the last northwest-corner cell
// absorbs the residual. Returns the optimal cost; basic cells go to *flows.
inline double transport_simplex(std::vector<double> a, std::vector<double> b, const RealMatrix& c,
                                std::vector<FlowCell>* flows) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  struct Cell {
    int i;
    int j;
  };
  RealMatrix x = RealMatrix::Zero(m, n);
  std::vector<Cell> basis;
  basis.reserve(static_cast<std::size_t>(m + n - 1));
  {
    int i = 0;
    int j = 0;
    while (true) {
      const double f = std::max(0.0, std::min(a[i], b[j]));
      x(i, j) = f;
      basis.push_back({i, j});
      a[i] -= f;
      b[j] -= f;
      if (i == m - 1 && j == n - 1) break;
      if (i == m - 1) {
        ++j;
      } else if (j == n - 1) {
        ++i;
      } else if (a[i] <= b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }
  if (m == 1 || n == 1) {
    // The northwest corner is the only feasible plan.
  } else {
    const double tol = 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff());
    const int nodes = m + n;
    std::vector<double> pot(static_cast<std::size_t>(nodes));
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(nodes));  // basis cell ids
    std::vector<int> parent_cell(static_cast<std::size_t>(nodes));
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(nodes));
    std::vector<char> seen(static_cast<std::size_t>(nodes));
    const long max_iter = 100L * (m + n) * (m + n) + 1000;
    int degenerate_run = 0;

    auto other = [&](int cell, int node) {
      const Cell& bc = basis[static_cast<std::size_t>(cell)];
      return node < m ? m + bc.j : bc.i;
    };
    // BFS over the basis tree from `root`, filling parent_cell.
    auto traverse = [&](int root) {
      std::fill(seen.begin(), seen.end(), 0);
      order.clear();
      order.push_back(root);
      seen[static_cast<std::size_t>(root)] = 1;
      parent_cell[static_cast<std::size_t>(root)] = -1;
      for (std::size_t k = 0; k < order.size(); ++k) {
        const int node = order[k];
        for (int cell : adj[static_cast<std::size_t>(node)]) {
          const int next = other(cell, node);
          if (seen[static_cast<std::size_t>(next)]) continue;
          seen[static_cast<std::size_t>(next)] = 1;
          parent_cell[static_cast<std::size_t>(next)] = cell;
          order.push_back(next);
        }
      }
      if (static_cast<int>(order.size()) != nodes) throw NumericalError("transport: basis is not a spanning tree");
    };

    for (long iter = 0;; ++iter) {
      if (iter > max_iter) throw NumericalError("transport: simplex iteration cap exceeded");
      for (auto& v : adj) v.clear();
      for (std::size_t k = 0; k < basis.size(); ++k) {
        adj[static_cast<std::size_t>(basis[k].i)].push_back(static_cast<int>(k));
        adj[static_cast<std::size_t>(m + basis[k].j)].push_back(static_cast<int>(k));
      }
      // Potentials u_i + v_j = c_ij on basic cells, u_0 = 0.
      traverse(0);
      pot[0] = 0.0;
      for (std::size_t k = 1; k < order.size(); ++k) {
        const int node = order[k];
        const Cell& bc = basis[static_cast<std::size_t>(parent_cell[static_cast<std::size_t>(node)])];
        const double cij = c(bc.i, bc.j);
        pot[static_cast<std::size_t>(node)] =
            node < m ? cij - pot[static_cast<std::size_t>(m + bc.j)] : cij - pot[static_cast<std::size_t>(bc.i)];
      }
      // Entering cell: Dantzig, or Bland (first improving cell) during long
      // degenerate stretches.
      const bool bland = degenerate_run > 50;
      int ei = -1;
      int ej = -1;
      double best = -tol;
      for (int i = 0; i < m && !(bland && ei >= 0); ++i) {
        for (int j = 0; j < n; ++j) {
          const double r = c(i, j) - pot[static_cast<std::size_t>(i)] - pot[static_cast<std::size_t>(m + j)];
          if (r < best) {
            best = r;
            ei = i;
            ej = j;
            if (bland) break;
          }
        }
      }
      if (ei < 0) break;

      // Tree path from row ei to column ej; with the entering cell it closes
      // the cycle. Path edges alternate -, +, -, ... starting at ei.
      traverse(ei);
      std::vector<int> path;
      for (int node = m + ej; node != ei;) {
        const int cell = parent_cell[static_cast<std::size_t>(node)];
        path.push_back(cell);
        node = other(cell, node);
      }
      std::reverse(path.begin(), path.end());
      double theta = std::numeric_limits<double>::infinity();
      int leave = -1;
      for (std::size_t k = 0; k < path.size(); k += 2) {
        const Cell& bc = basis[static_cast<std::size_t>(path[k])];
        const double f = x(bc.i, bc.j);
        if (f < theta || (f == theta && path[k] < leave)) {
          theta = f;
          leave = path[k];
        }
      }
      for (std::size_t k = 0; k < path.size(); ++k) {
        const Cell& bc = basis[static_cast<std::size_t>(path[k])];
        x(bc.i, bc.j) += (k % 2 == 0) ? -theta : theta;
      }
      x(ei, ej) += theta;
      const Cell& lc = basis[static_cast<std::size_t>(leave)];
      x(lc.i, lc.j) = 0.0;
      basis[static_cast<std::size_t>(leave)] = {ei, ej};
      degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    }
  }
  double cost = 0.0;
  if (flows) flows->clear();
  for (const Cell& bc : basis) {
    const double f = std::max(0.0, x(bc.i, bc.j));
    cost += f * c(bc.i, bc.j);
    if (flows && f > 0.0) flows->push_back({bc.i, bc.j, f});
  }
  return cost;
}

inline void check_balance(double sa, double sb) {
  if (std::abs(sa - sb) > 1e-8) {
    throw std::invalid_argument("wasserstein1: marginal masses differ (" + std::to_string(sa) + " vs " +
                                std::to_string(sb) + ")");
  }
}

}  // namespace detail

// W1 between two measures given by their atoms; dist is indexed by state.
inline double wasserstein1_atoms(const Atoms& mu, const Atoms& nu, const RealMatrix& dist,
                                 std::vector<FlowCell>* flows = nullptr) {
  if (mu.size() == 0 || nu.size() == 0) throw std::invalid_argument("wasserstein1: empty measure");
  double sa = 0.0;
  double sb = 0.0;
  for (double v : mu.mass) sa += v;
  for (double v : nu.mass) sb += v;
  detail::check_balance(sa, sb);
  RealMatrix c(static_cast<Eigen::Index>(mu.size()), static_cast<Eigen::Index>(nu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) c(i, j) = dist(mu.index[i], nu.index[j]);
  return detail::transport_simplex(mu.mass, nu.mass, c, flows);
}

inline TransportPlan wasserstein1(const RealVector& mu, const RealVector& nu, const RealMatrix& dist) {
  if (mu.size() != nu.size() || dist.rows() != mu.size() || dist.cols() != mu.size()) {
    throw std::invalid_argument("wasserstein1: dimension mismatch (mu " + std::to_string(mu.size()) + ", nu " +
                                std::to_string(nu.size()) + ", dist " + std::to_string(dist.rows()) + "x" +
                                std::to_string(dist.cols()) + ")");
  }
  if ((mu.array() < 0.0).any() || (nu.array() < 0.0).any()) {
    throw std::invalid_argument("wasserstein1: negative mass");
  }
  detail::check_balance(mu.sum(), nu.sum());
  const Atoms a = atoms_of(mu);
  const Atoms b = atoms_of(nu);
  std::vector<FlowCell> flows;
  TransportPlan plan;
  plan.cost = wasserstein1_atoms(a, b, dist, &flows);
  plan.coupling = RealMatrix::Zero(mu.size(), mu.size());
  for (const auto& f : flows) plan.coupling(a.index[f.i], b.index[f.j]) += f.flow;
  return plan;
}

}  // namespace mcb

#endif  // MCB_TRANSPORT_HPP_
