#pragma once

#include <vector>

#include "fgl/graph.hpp"

namespace fgl {

enum class SpectrumConvention { AdjacencyDescending, LaplacianAscending };

/// Ordered eigenvalue vector with its declared sort convention.
struct SpectrumVector {
  std::vector<double> vals;
  SpectrumConvention convention = SpectrumConvention::AdjacencyDescending;
};

/// All n eigenvalues of a symmetric matrix, in no particular order.
/// Householder tridiagonalization followed by implicit-shift QL iteration.
/// Asymmetry up to 1e-12 is tolerated and symmetrized away; anything larger
/// throws. Throws on dimension 0.
std::vector<double> sym_eigenvalues(const WeightedMatrix& m);

/// Adjacency eigenvalues sorted descending.
SpectrumVector adjacency_spectrum(const Graph& g);

/// Combinatorial Laplacian eigenvalues sorted ascending.
SpectrumVector laplacian_spectrum(const Graph& g);

/// l2 norm between descending adjacency spectra. Pseudometric: zero for
/// cospectral pairs, not only for equal graphs.
double d_adjacency(const Graph& g1, const Graph& g2);

/// l2 norm between ascending Laplacian spectra.
double d_laplacian(const Graph& g1, const Graph& g2);

/// Number of differing strict-upper-triangle entries.
double d_hamming(const Graph& g1, const Graph& g2);

}  // namespace fgl
