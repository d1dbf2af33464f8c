#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fgl {

/// Simple undirected unweighted labeled graph on n vertices, stored as a
/// dense binary symmetric adjacency matrix with zero diagonal.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n) : n_(n), adj_(static_cast<size_t>(n) * n, 0) {}

  int n() const { return n_; }

  bool edge(int i, int j) const { return adj_[idx(i, j)] != 0; }

  void set_edge(int i, int j, bool present);

  /// Raw 0/1 matrix, row-major n*n.
  const std::vector<uint8_t>& adjacency() const { return adj_; }

  /// Strict upper triangle in row-major order as a '0'/'1' string,
  /// n(n-1)/2 characters: (0,1), (0,2), ..., (0,n-1), (1,2), ...
  std::string to_bitstring() const;

  static Graph from_bitstring(int n, const std::string& bits);

  /// Throws std::invalid_argument if symmetry, binary entries, or the zero
  /// diagonal are violated. Construction through set_edge cannot violate
  /// them; this guards deserialized or hand-built matrices.
  void validate() const;

  bool operator==(const Graph& other) const {
    return n_ == other.n_ && adj_ == other.adj_;
  }

 private:
  size_t idx(int i, int j) const { return static_cast<size_t>(i) * n_ + j; }

  int n_ = 0;
  std::vector<uint8_t> adj_;
};

/// Real-valued symmetric n x n matrix: sample mean adjacency matrices,
/// edge-probability matrices, Laplacians, network outputs.
struct WeightedMatrix {
  int n = 0;
  std::vector<double> w;  // row-major n*n

  WeightedMatrix() = default;
  explicit WeightedMatrix(int n_) : n(n_), w(static_cast<size_t>(n_) * n_, 0.0) {}

  double& at(int i, int j) { return w[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return w[static_cast<size_t>(i) * n + j]; }
};

/// Degree frequency vector f[k] = n_k / n for k = 0..n inclusive.
struct DegreeHistogram {
  int n = 0;
  std::vector<double> f;  // n+1 entries
};

/// Per-vertex degrees (row sums of the adjacency matrix).
std::vector<int> degrees(const Graph& g);

int edge_count(const Graph& g);

/// Combinatorial Laplacian D - A.
WeightedMatrix laplacian(const Graph& g);

/// Entrywise mean of the sample's adjacency matrices.
/// Throws on an empty sample or mismatched sizes.
WeightedMatrix sample_mean(std::span<const Graph> sample);

/// Entry 1 exactly where m(i,j) > 1/2 (strict); diagonal forced to 0.
Graph threshold_half(const WeightedMatrix& m);

DegreeHistogram degree_histogram(const Graph& g);

constexpr double kKlEpsilon = 1e-6;

/// KL divergence sum_k f[k] log(f[k] / max(g[k], eps)) over bins with
/// f[k] > 0, natural log. Exactly 0 when f = g bin-for-bin.
double kl_divergence(const DegreeHistogram& f, const DegreeHistogram& g,
                     double eps = kKlEpsilon);

/// Graph file format: one header line "n=<n> count=<rows>" followed by one
/// upper-triangle bitstring line per graph.
void write_graph_file(const std::filesystem::path& path,
                      std::span<const Graph> graphs, int n);
std::vector<Graph> read_graph_file(const std::filesystem::path& path);

}  // namespace fgl
