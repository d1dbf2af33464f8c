#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fgl/spectra.hpp"
#include "support/jacobi.hpp"
#include "support/testutil.hpp"

using namespace fgl;
using namespace fgl::testing;

namespace {

double spectral_norm_bound(const std::vector<double>& eig) {
  double m = 0.0;
  for (double x : eig) m = std::max(m, std::fabs(x));
  return std::max(1.0, m);
}

}  // namespace

TEST_CASE("sym_eigenvalues on small hand cases") {
  SUBCASE("2x2 swap matrix") {
    WeightedMatrix m(2);
    m.at(0, 1) = 1.0;
    m.at(1, 0) = 1.0;
    auto eig = sym_eigenvalues(m);
    std::sort(eig.begin(), eig.end());
    CHECK(eig[0] == doctest::Approx(-1.0));
    CHECK(eig[1] == doctest::Approx(1.0));
  }
  SUBCASE("complete graph adjacency") {
    const auto spec = adjacency_spectrum(complete_graph(3)).vals;
    CHECK(spec[0] == doctest::Approx(2.0));
    CHECK(spec[1] == doctest::Approx(-1.0));
    CHECK(spec[2] == doctest::Approx(-1.0));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(sym_eigenvalues(WeightedMatrix{}), std::invalid_argument);
    WeightedMatrix skew(2);
    skew.at(0, 1) = 1.0;
    skew.at(1, 0) = 0.5;
    CHECK_THROWS_AS(sym_eigenvalues(skew), std::invalid_argument);
  }
  SUBCASE("tiny asymmetry is symmetrized away") {
    WeightedMatrix m(2);
    m.at(0, 1) = 1.0;
    m.at(1, 0) = 1.0 + 0.5e-12;
    CHECK_NOTHROW(sym_eigenvalues(m));
  }
}

TEST_CASE("sym_eigenvalues agrees with the Jacobi oracle") {
  Rng rng(21, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const WeightedMatrix m = random_symmetric(28, rng);
    std::vector<double> ours = sym_eigenvalues(m);
    std::vector<double> oracle = jacobi_eigenvalues(m);
    std::sort(ours.begin(), ours.end());
    std::sort(oracle.begin(), oracle.end());
    const double scale = spectral_norm_bound(oracle);
    for (int i = 0; i < 28; ++i) {
      CHECK(std::fabs(ours[i] - oracle[i]) < 1e-8 * scale);
    }
  }
}

TEST_CASE("trace and Frobenius identities on random graphs") {
  Rng rng(22, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const Graph g = random_graph(20, 0.4, rng);
    const auto spec = adjacency_spectrum(g).vals;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double x : spec) {
      sum += x;
      sum_sq += x * x;
    }
    CHECK(std::fabs(sum) < 1e-8);
    CHECK(std::fabs(sum_sq - 2.0 * edge_count(g)) < 1e-6);
  }
}

TEST_CASE("spectrum conventions") {
  const Graph k3 = complete_graph(3);
  const Graph empty3(3);

  SUBCASE("adjacency descending") {
    CHECK(adjacency_spectrum(k3).convention ==
          SpectrumConvention::AdjacencyDescending);
    const auto p = adjacency_spectrum(path3()).vals;
    CHECK(p[0] == doctest::Approx(std::sqrt(2.0)));
    CHECK(std::fabs(p[1]) < 1e-8);
    CHECK(p[2] == doctest::Approx(-std::sqrt(2.0)));
    for (double x : adjacency_spectrum(empty3).vals) CHECK(x == 0.0);
  }
  SUBCASE("laplacian ascending, first entry zero") {
    CHECK(laplacian_spectrum(k3).convention ==
          SpectrumConvention::LaplacianAscending);
    const auto k2 = laplacian_spectrum(complete_graph(2)).vals;
    CHECK(std::fabs(k2[0]) < 1e-8);
    CHECK(k2[1] == doctest::Approx(2.0));
    for (double x : laplacian_spectrum(empty3).vals) CHECK(x == 0.0);
  }
}

TEST_CASE("distance hand values") {
  const Graph k2 = complete_graph(2);
  const Graph k3 = complete_graph(3);
  const Graph empty2(2);
  const Graph empty3(3);

  CHECK(d_adjacency(k3, k3) == 0.0);
  CHECK(d_adjacency(k2, empty2) == doctest::Approx(std::sqrt(2.0)));
  CHECK(d_adjacency(k3, empty3) == doctest::Approx(std::sqrt(6.0)));

  CHECK(d_laplacian(k3, k3) == 0.0);
  CHECK(d_laplacian(k2, empty2) == doctest::Approx(2.0));
  CHECK(d_laplacian(k3, empty3) == doctest::Approx(3.0 * std::sqrt(2.0)));

  CHECK(d_hamming(k3, k3) == 0.0);
  CHECK(d_hamming(k3, empty3) == 3.0);
  Graph k3_minus = k3;
  k3_minus.set_edge(0, 1, false);
  CHECK(d_hamming(k3, k3_minus) == 1.0);

  CHECK_THROWS_AS(d_adjacency(k2, k3), std::invalid_argument);
  CHECK_THROWS_AS(d_laplacian(k2, k3), std::invalid_argument);
  CHECK_THROWS_AS(d_hamming(k2, k3), std::invalid_argument);
}

TEST_CASE("pseudometric axioms on random triples") {
  Rng rng(23, 0);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 8 + static_cast<int>(rng.next_below(6));
    const Graph a = random_graph(n, 0.3, rng);
    const Graph b = random_graph(n, 0.5, rng);
    const Graph c = random_graph(n, 0.7, rng);
    for (auto d : {d_hamming, d_adjacency, d_laplacian}) {
      CHECK(d(a, b) == d(b, a));
      CHECK(d(a, a) == 0.0);
      CHECK(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
      CHECK(d(a, b) >= 0.0);
    }
  }
}

TEST_CASE("permutation invariance of spectral distances") {
  Rng rng(24, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 10;
    const Graph a = random_graph(n, 0.4, rng);
    const Graph b = random_graph(n, 0.6, rng);
    const std::vector<int> perm = random_permutation(n, rng);
    const Graph pa = permute_graph(a, perm);
    const Graph pb = permute_graph(b, perm);

    // Relabeling both graphs by the same permutation: all three unchanged.
    CHECK(d_hamming(pa, pb) == d_hamming(a, b));
    CHECK(d_adjacency(pa, pb) == doctest::Approx(d_adjacency(a, b)).epsilon(1e-8));
    CHECK(d_laplacian(pa, pb) == doctest::Approx(d_laplacian(a, b)).epsilon(1e-8));

    // Relabeling only one graph: spectra are permutation-invariant.
    CHECK(d_adjacency(pa, b) == doctest::Approx(d_adjacency(a, b)).epsilon(1e-8));
    CHECK(d_laplacian(pa, b) == doctest::Approx(d_laplacian(a, b)).epsilon(1e-8));
  }
}
