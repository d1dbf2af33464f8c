#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "fgl/graph.hpp"
#include "fgl/rng.hpp"

namespace fgl::testing {

inline Graph complete_graph(int n) {
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) g.set_edge(i, j, true);
  }
  return g;
}

inline Graph path3() {
  Graph g(3);
  g.set_edge(0, 1, true);
  g.set_edge(1, 2, true);
  return g;
}

/// Star with center 0 and n-1 leaves.
inline Graph star_graph(int n) {
  Graph g(n);
  for (int i = 1; i < n; ++i) g.set_edge(0, i, true);
  return g;
}

inline Graph random_graph(int n, double p, Rng& rng) {
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.next_double() < p) g.set_edge(i, j, true);
    }
  }
  return g;
}

inline WeightedMatrix random_symmetric(int n, Rng& rng, double lo = -1.0,
                                       double hi = 1.0) {
  WeightedMatrix m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = rng.next_uniform(lo, hi);
      m.at(i, j) = v;
      m.at(j, i) = v;
    }
  }
  return m;
}

inline WeightedMatrix constant_offdiag(int n, double value) {
  WeightedMatrix m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) m.at(i, j) = value;
    }
  }
  return m;
}

/// Union-find connected-component count, independent of the BFS path.
inline int component_count(const Graph& g) {
  std::vector<int> parent(g.n());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int i = 0; i < g.n(); ++i) {
    for (int j = i + 1; j < g.n(); ++j) {
      if (g.edge(i, j)) parent[find(i)] = find(j);
    }
  }
  int roots = 0;
  for (int i = 0; i < g.n(); ++i) {
    if (find(i) == i) ++roots;
  }
  return roots;
}

inline Graph permute_graph(const Graph& g, const std::vector<int>& perm) {
  Graph out(g.n());
  for (int i = 0; i < g.n(); ++i) {
    for (int j = i + 1; j < g.n(); ++j) {
      if (g.edge(i, j)) out.set_edge(perm[i], perm[j], true);
    }
  }
  return out;
}

inline std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.next_below(static_cast<uint64_t>(i))]);
  }
  return perm;
}

}  // namespace fgl::testing
