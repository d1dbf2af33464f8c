#include "fgl/graph.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fgl {

void Graph::set_edge(int i, int j, bool present) {
  if (i == j) {
    throw std::invalid_argument("self-loops are not representable");
  }
  adj_[idx(i, j)] = present ? 1 : 0;
  adj_[idx(j, i)] = present ? 1 : 0;
}

std::string Graph::to_bitstring() const {
  std::string bits;
  bits.reserve(static_cast<size_t>(n_) * (n_ - 1) / 2);
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      bits.push_back(edge(i, j) ? '1' : '0');
    }
  }
  return bits;
}

Graph Graph::from_bitstring(int n, const std::string& bits) {
  const size_t expect = static_cast<size_t>(n) * (n - 1) / 2;
  if (bits.size() != expect) {
    throw std::invalid_argument("bitstring length does not match n");
  }
  Graph g(n);
  size_t p = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++p) {
      if (bits[p] != '0' && bits[p] != '1') {
        throw std::invalid_argument("bitstring contains non-binary character");
      }
      if (bits[p] == '1') g.set_edge(i, j, true);
    }
  }
  return g;
}

void Graph::validate() const {
  for (int i = 0; i < n_; ++i) {
    if (adj_[idx(i, i)] != 0) {
      throw std::invalid_argument("nonzero diagonal entry");
    }
    for (int j = 0; j < n_; ++j) {
      const uint8_t a = adj_[idx(i, j)];
      if (a != 0 && a != 1) {
        throw std::invalid_argument("non-binary adjacency entry");
      }
      if (a != adj_[idx(j, i)]) {
        throw std::invalid_argument("asymmetric adjacency matrix");
      }
    }
  }
}

std::vector<int> degrees(const Graph& g) {
  std::vector<int> d(g.n(), 0);
  for (int i = 0; i < g.n(); ++i) {
    int s = 0;
    for (int j = 0; j < g.n(); ++j) {
      s += g.edge(i, j) ? 1 : 0;
    }
    d[i] = s;
  }
  return d;
}

int edge_count(const Graph& g) {
  int m = 0;
  for (int i = 0; i < g.n(); ++i) {
    for (int j = i + 1; j < g.n(); ++j) {
      m += g.edge(i, j) ? 1 : 0;
    }
  }
  return m;
}

WeightedMatrix laplacian(const Graph& g) {
  const int n = g.n();
  WeightedMatrix lap(n);
  const std::vector<int> deg = degrees(g);
  for (int i = 0; i < n; ++i) {
    lap.at(i, i) = static_cast<double>(deg[i]);
    for (int j = 0; j < n; ++j) {
      if (j != i && g.edge(i, j)) lap.at(i, j) = -1.0;
    }
  }
  return lap;
}

WeightedMatrix sample_mean(std::span<const Graph> sample) {
  if (sample.empty()) {
    throw std::invalid_argument("sample_mean: empty sample");
  }
  const int n = sample[0].n();
  WeightedMatrix mean(n);
  for (const Graph& g : sample) {
    if (g.n() != n) {
      throw std::invalid_argument("sample_mean: graph size mismatch");
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (g.edge(i, j)) mean.at(i, j) += 1.0;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(sample.size());
  for (double& x : mean.w) x *= inv;
  return mean;
}

Graph threshold_half(const WeightedMatrix& m) {
  Graph g(m.n);
  for (int i = 0; i < m.n; ++i) {
    for (int j = i + 1; j < m.n; ++j) {
      if (m.at(i, j) > 0.5) g.set_edge(i, j, true);
    }
  }
  return g;
}

DegreeHistogram degree_histogram(const Graph& g) {
  const int n = g.n();
  DegreeHistogram h;
  h.n = n;
  h.f.assign(static_cast<size_t>(n) + 1, 0.0);
  for (int d : degrees(g)) {
    h.f[d] += 1.0;
  }
  for (double& x : h.f) x /= static_cast<double>(n);
  return h;
}

double kl_divergence(const DegreeHistogram& f, const DegreeHistogram& g,
                     double eps) {
  if (f.n != g.n) {
    throw std::invalid_argument("kl_divergence: histogram size mismatch");
  }
  double d = 0.0;
  for (size_t k = 0; k < f.f.size(); ++k) {
    if (f.f[k] > 0.0) {
      const double denom = std::max(g.f[k], eps);
      d += f.f[k] * std::log(f.f[k] / denom);
    }
  }
  return d;
}

void write_graph_file(const std::filesystem::path& path,
                      std::span<const Graph> graphs, int n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << "n=" << n << " count=" << graphs.size() << "\n";
  for (const Graph& g : graphs) {
    if (g.n() != n) {
      throw std::invalid_argument("write_graph_file: graph size mismatch");
    }
    out << g.to_bitstring() << "\n";
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

std::vector<Graph> read_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  std::string header;
  std::getline(in, header);
  int n = -1;
  long count = -1;
  if (std::sscanf(header.c_str(), "n=%d count=%ld", &n, &count) != 2 ||
      n < 0 || count < 0) {
    throw std::runtime_error("bad graph file header: " + path.string());
  }
  std::vector<Graph> graphs;
  graphs.reserve(static_cast<size_t>(count));
  std::string line;
  for (long r = 0; r < count; ++r) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("graph file truncated: " + path.string());
    }
    graphs.push_back(Graph::from_bitstring(n, line));
  }
  return graphs;
}

}  // namespace fgl
