// Copyright 2026 The hpc-sentinel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Independent reference implementations used as test oracles. None of
// these call into the library code they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hpcs/asm.hpp"

namespace oracle {

// Category -> feature letter, written out by hand.
inline char letter(hpcs::Category c) {
  switch (c) {
    case hpcs::Category::kArithmetic: return 'a';
    case hpcs::Category::kBoolean: return 'n';
    case hpcs::Category::kStore: return 's';
    case hpcs::Category::kLoad: return 'l';
    case hpcs::Category::kBranch: return 'b';
    default: return 0;
  }
}

// Chunk-and-scan counter: feature name -> count, one map per chunk.
inline std::vector<std::map<std::string, int>> window_counts(const std::vector<hpcs::Category>& s,
                                                             std::size_t w) {
  std::vector<std::map<std::string, int>> out;
  for (std::size_t start = 0; start < s.size(); start += w) {
    std::map<std::string, int> m;
    const std::size_t end = std::min(s.size(), start + w);
    for (std::size_t i = start; i < end; ++i) {
      if (char c = letter(s[i])) m[std::string(1, c)]++;
      if (i + 1 < end) {
        const char x = letter(s[i]);
        const char y = letter(s[i + 1]);
        if (x && y) m[std::string{x, y}]++;
      }
    }
    out.push_back(m);
  }
  return out;
}

// Cyclic Jacobi rotations; returns eigenvalues sorted descending.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double scale = 0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off <= 1e-30 * std::max(1.0, scale * scale)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

// Greedy CART reference that tries every integer threshold of every
// feature and compares weighted Gini by exact cross-multiplication.
struct RefTree {
  struct Node {
    int feature = -1;
    int threshold = 0;
    int left = -1, right = -1;
    int benign = 0, malicious = 0;
  };
  std::vector<Node> nodes;

  int predict(const std::vector<int>& x) const {
    int i = 0;
    while (nodes[i].feature >= 0) {
      i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    }
    return nodes[i].malicious > nodes[i].benign ? 1 : 0;
  }
};

inline int build_ref(RefTree& t, const std::vector<std::vector<int>>& x, const std::vector<int>& y,
                     const std::vector<int>& rows) {
  RefTree::Node node;
  for (int r : rows) (y[r] ? node.malicious : node.benign)++;
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.push_back(node);
  if (node.benign == 0 || node.malicious == 0 || rows.size() < 2) return id;

  // Maximize sum over children of (c0^2 + c1^2) / n_child, kept as a fraction.
  long long best_num = -1, best_den = 1;
  int best_f = -1, best_t = 0;
  const int features = static_cast<int>(x[0].size());
  for (int f = 0; f < features; ++f) {
    for (int thr = 0; thr <= 2; ++thr) {
      long long l0 = 0, l1 = 0, r0 = 0, r1 = 0;
      for (int r : rows) {
        const bool left = x[r][f] <= thr;
        (left ? (y[r] ? l1 : l0) : (y[r] ? r1 : r0))++;
      }
      const long long nl = l0 + l1, nr = r0 + r1;
      if (nl == 0 || nr == 0) continue;
      const long long num = (l0 * l0 + l1 * l1) * nr + (r0 * r0 + r1 * r1) * nl;
      const long long den = nl * nr;
      if (best_f < 0 || num * best_den > best_num * den) {
        best_num = num;
        best_den = den;
        best_f = f;
        best_t = thr;
      }
    }
  }
  if (best_f < 0) return id;
  std::vector<int> lrows, rrows;
  for (int r : rows) (x[r][best_f] <= best_t ? lrows : rrows).push_back(r);
  t.nodes[id].feature = best_f;
  t.nodes[id].threshold = best_t;
  const int l = build_ref(t, x, y, lrows);
  t.nodes[id].left = l;
  const int r = build_ref(t, x, y, rrows);
  t.nodes[id].right = r;
  return id;
}

// Brute-force maximum of V * I(V) on a uniform grid.
template <class Curve>
double grid_sweep_max_power(Curve&& current, double v_oc, int points = 10000) {
  double best = 0;
  for (int i = 0; i <= points; ++i) {
    const double v = v_oc * i / points;
    best = std::max(best, v * current(v));
  }
  return best;
}

}  // namespace oracle
