#pragma once

#include <stdexcept>
#include <vector>

#include "fgl/graph.hpp"
#include "fgl/rng.hpp"

namespace fgl {

/// Inhomogeneous Erdos-Renyi parameters: per-pair edge probabilities.
struct IerParams {
  int n = 0;
  WeightedMatrix P;  // symmetric, zero diagonal, entries in [0,1]
};

/// Stochastic block model parameters. Within-community probability p,
/// across-community probability q, 0 <= q <= p <= 1.
struct SbmParams {
  std::vector<int> block_sizes;
  double p = 0.0;
  double q = 0.0;

  int n() const;
  void validate() const;
};

/// Preferential attachment parameters: l edges per new vertex, final size n.
struct PaParams {
  int l = 0;
  int n = 0;

  void validate() const;
};

/// Thrown when rejection sampling cannot produce a connected SBM graph
/// within the attempt budget.
struct ConnectivityTimeout : std::runtime_error {
  explicit ConnectivityTimeout(int attempts)
      : std::runtime_error("no connected graph after " +
                           std::to_string(attempts) + " attempts") {}
};

/// One Beta(a,b) draw; Marsaglia-Tsang gamma sampling, valid for all a,b > 0.
double sample_beta(double a, double b, Rng& rng);

/// Edge-probability matrix with i.i.d. Beta(a,b) upper-triangle entries.
IerParams sample_beta_P(double a, double b, int n, Rng& rng);

Graph sample_ier(const IerParams& params, Rng& rng);

/// IER with blockwise constant probabilities, rejection-resampled until
/// connected. Throws ConnectivityTimeout after max_attempts rejections.
Graph sample_sbm(const SbmParams& params, Rng& rng, int max_attempts = 1000);

/// Star on l+1 vertices (center = vertex index l), then each new vertex
/// attaches to l distinct existing vertices with degree-proportional
/// weights, degrees frozen during its draws. Edge count is exactly l(n-l).
Graph sample_pa(const PaParams& params, Rng& rng);

/// True iff breadth-first search from vertex 0 reaches every vertex.
bool is_connected(const Graph& g);

}  // namespace fgl
