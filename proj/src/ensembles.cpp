#include "fgl/ensembles.hpp"

#include <cmath>
#include <numeric>

namespace fgl {
namespace {

// Marsaglia-Tsang (2000) for shape >= 1; the alpha < 1 case is boosted via
// Gamma(a) = Gamma(a+1) * U^(1/a). Scale is irrelevant for Beta ratios.
double sample_gamma(double shape, Rng& rng) {
  if (shape < 1.0) {
    const double u = rng.next_double();
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

}  // namespace

int SbmParams::n() const {
  return std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
}

void SbmParams::validate() const {
  if (block_sizes.empty()) {
    throw std::invalid_argument("sbm: no blocks");
  }
  for (int b : block_sizes) {
    if (b <= 0) throw std::invalid_argument("sbm: nonpositive block size");
  }
  if (!(0.0 <= q && q <= p && p <= 1.0)) {
    throw std::invalid_argument("sbm: need 0 <= q <= p <= 1");
  }
}

void PaParams::validate() const {
  if (l < 1 || l > n - 1) {
    throw std::invalid_argument("pa: need 1 <= l <= n-1");
  }
  if (n <= l + 1) {
    throw std::invalid_argument("pa: need n > l+1");
  }
}

double sample_beta(double a, double b, Rng& rng) {
  if (a <= 0.0 || b <= 0.0) {
    throw std::invalid_argument("beta: shape parameters must be positive");
  }
  const double x = sample_gamma(a, rng);
  const double y = sample_gamma(b, rng);
  return x / (x + y);
}

IerParams sample_beta_P(double a, double b, int n, Rng& rng) {
  if (a <= 0.0 || b <= 0.0) {
    throw std::invalid_argument("beta: shape parameters must be positive");
  }
  IerParams params;
  params.n = n;
  params.P = WeightedMatrix(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = sample_beta(a, b, rng);
      params.P.at(i, j) = p;
      params.P.at(j, i) = p;
    }
  }
  return params;
}

Graph sample_ier(const IerParams& params, Rng& rng) {
  Graph g(params.n);
  for (int i = 0; i < params.n; ++i) {
    for (int j = i + 1; j < params.n; ++j) {
      if (rng.next_double() < params.P.at(i, j)) {
        g.set_edge(i, j, true);
      }
    }
  }
  return g;
}

Graph sample_sbm(const SbmParams& params, Rng& rng, int max_attempts) {
  params.validate();
  if (max_attempts < 1) {
    throw std::invalid_argument("sbm: max_attempts must be >= 1");
  }
  const int n = params.n();
  std::vector<int> community(n);
  {
    int v = 0;
    for (size_t b = 0; b < params.block_sizes.size(); ++b) {
      for (int k = 0; k < params.block_sizes[b]; ++k) {
        community[v++] = static_cast<int>(b);
      }
    }
  }
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Graph g(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double prob = community[i] == community[j] ? params.p : params.q;
        if (rng.next_double() < prob) g.set_edge(i, j, true);
      }
    }
    if (is_connected(g)) return g;
  }
  throw ConnectivityTimeout(max_attempts);
}

Graph sample_pa(const PaParams& params, Rng& rng) {
  params.validate();
  const int l = params.l;
  const int n = params.n;
  Graph g(n);
  std::vector<int> degree(n, 0);
  // Star: leaves 0..l-1, center l.
  for (int i = 0; i < l; ++i) {
    g.set_edge(i, l, true);
    degree[i] = 1;
  }
  degree[l] = l;

  std::vector<uint8_t> chosen(n, 0);
  for (int v = l + 1; v < n; ++v) {
    // Frozen degree weights over the v existing vertices.
    long total = 0;
    for (int u = 0; u < v; ++u) {
      total += degree[u];
      chosen[u] = 0;
    }
    for (int t = 0; t < l; ++t) {
      long r = static_cast<long>(rng.next_below(static_cast<uint64_t>(total)));
      int target = -1;
      for (int u = 0; u < v; ++u) {
        if (chosen[u]) continue;
        if (r < degree[u]) {
          target = u;
          break;
        }
        r -= degree[u];
      }
      chosen[target] = 1;
      total -= degree[target];
      g.set_edge(v, target, true);
    }
    for (int u = 0; u < v; ++u) {
      if (chosen[u]) ++degree[u];
    }
    degree[v] = l;
  }
  return g;
}

bool is_connected(const Graph& g) {
  const int n = g.n();
  if (n <= 1) return true;
  std::vector<uint8_t> seen(n, 0);
  std::vector<int> queue;
  queue.reserve(n);
  queue.push_back(0);
  seen[0] = 1;
  int reached = 1;
  for (size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (int v = 0; v < n; ++v) {
      if (!seen[v] && g.edge(u, v)) {
        seen[v] = 1;
        ++reached;
        queue.push_back(v);
      }
    }
  }
  return reached == n;
}

}  // namespace fgl
