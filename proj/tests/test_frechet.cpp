#include <cmath>

#include "doctest.h"
#include "fgl/ensembles.hpp"
#include "fgl/frechet.hpp"
#include "support/testutil.hpp"

using namespace fgl;
using namespace fgl::testing;

TEST_CASE("closed_form_ier_mean") {
  CHECK(closed_form_ier_mean(constant_offdiag(4, 0.7)) == complete_graph(4));
  CHECK(closed_form_ier_mean(constant_offdiag(4, 0.5)) == Graph(4));

  // Block structure: 0.9 inside the first half, 0.1 elsewhere.
  WeightedMatrix p(6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (i == j) continue;
      p.at(i, j) = (i < 3 && j < 3) ? 0.9 : 0.1;
    }
  }
  Graph expect(6);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) expect.set_edge(i, j, true);
  }
  CHECK(closed_form_ier_mean(p) == expect);
}

TEST_CASE("sample_medoid") {
  const Graph k3 = complete_graph(3);
  const Graph empty3(3);

  SUBCASE("identical sample") {
    const std::vector<Graph> s = {k3, k3, k3};
    const FrechetResult r = sample_medoid(s, Metric::Hamming);
    CHECK(r.mean == k3);
    CHECK(r.objective == 0.0);
    CHECK(r.method == MeanMethod::SampleMedoid);
  }
  SUBCASE("hand-computed objective") {
    const std::vector<Graph> s = {k3, k3, empty3};
    const FrechetResult r = sample_medoid(s, Metric::Hamming);
    CHECK(r.mean == k3);
    CHECK(r.objective == doctest::Approx(3.0));  // (0 + 0 + 9) / 3
  }
  SUBCASE("matches a brute-force recomputation on SBM samples") {
    Rng rng(41, 0);
    const SbmParams params{{5, 5}, 0.9, 0.2};
    std::vector<Graph> sample;
    for (int k = 0; k < 10; ++k) sample.push_back(sample_sbm(params, rng));

    const FrechetResult r = sample_medoid(sample, Metric::AdjacencySpectral);

    // Independent double loop over the sample.
    double best = 0.0;
    size_t best_idx = 0;
    for (size_t i = 0; i < sample.size(); ++i) {
      double obj = 0.0;
      for (const Graph& g : sample) {
        const double d = d_adjacency(sample[i], g);
        obj += d * d;
      }
      obj /= static_cast<double>(sample.size());
      if (i == 0 || obj < best) {
        best = obj;
        best_idx = i;
      }
    }
    CHECK(r.mean == sample[best_idx]);
    CHECK(r.objective == doctest::Approx(best).epsilon(1e-12));
    CHECK(std::fabs(frechet_objective(r.mean, sample,
                                      Metric::AdjacencySpectral) -
                    r.objective) < 1e-9);
  }
  SUBCASE("empty sample throws") {
    CHECK_THROWS_AS(sample_medoid({}, Metric::Hamming), std::invalid_argument);
  }
}

TEST_CASE("exhaustive_frechet_mean") {
  const Graph k3 = complete_graph(3);
  const Graph empty3(3);

  SUBCASE("identical sample") {
    const std::vector<Graph> s = {k3, k3};
    const FrechetResult r = exhaustive_frechet_mean(s, Metric::Hamming);
    CHECK(r.mean == k3);
    CHECK(r.objective == 0.0);
  }
  SUBCASE("the {K3, K3, empty} counterexample") {
    const std::vector<Graph> s = {k3, k3, empty3};
    const FrechetResult exh = exhaustive_frechet_mean(s, Metric::Hamming);
    const FrechetResult naive = naive_frechet_mean(s, Metric::Hamming);
    CHECK(exh.objective == doctest::Approx(2.0));  // (1 + 1 + 4) / 3
    CHECK(edge_count(exh.mean) == 2);
    CHECK(naive.mean == k3);
    CHECK(naive.objective == doctest::Approx(3.0));
    CHECK(exh.objective < naive.objective);
    // All three two-edge graphs tie; lexicographic tie-break picks "011".
    CHECK(exh.mean.to_bitstring() == "011");
  }
  SUBCASE("agrees with the threshold rule on dense IER samples") {
    int agree = 0;
    for (int trial = 0; trial < 100; ++trial) {
      Rng rng(242, static_cast<uint64_t>(trial));
      const IerParams params{4, constant_offdiag(4, 0.9)};
      std::vector<Graph> sample;
      for (int k = 0; k < 5; ++k) sample.push_back(sample_ier(params, rng));
      const FrechetResult exh = exhaustive_frechet_mean(sample, Metric::Hamming);
      if (exh.mean == threshold_half(sample_mean(sample))) ++agree;
    }
    CHECK(agree >= 90);
  }
  SUBCASE("objective ordering: exhaustive <= medoid <= every member") {
    for (int trial = 0; trial < 50; ++trial) {
      Rng rng(43, static_cast<uint64_t>(trial));
      std::vector<Graph> sample;
      for (int k = 0; k < 6; ++k) sample.push_back(random_graph(4, 0.5, rng));
      const FrechetResult exh = exhaustive_frechet_mean(sample, Metric::Hamming);
      const FrechetResult med = sample_medoid(sample, Metric::Hamming);
      CHECK(exh.objective <= med.objective);
      for (const Graph& g : sample) {
        CHECK(med.objective <=
              frechet_objective(g, sample, Metric::Hamming));
      }
      CHECK(exh.objective <=
            naive_frechet_mean(sample, Metric::Hamming).objective);
    }
  }
  SUBCASE("global optimality beats the threshold rule, odd N") {
    // N = 5 and p away from binomial ties: no edge frequency equals 1/2.
    for (int trial = 0; trial < 100; ++trial) {
      Rng rng(47, static_cast<uint64_t>(trial));
      const double p = rng.next_uniform(0.2, 0.8);
      std::vector<Graph> sample;
      for (int k = 0; k < 5; ++k) sample.push_back(random_graph(4, p, rng));
      CHECK(exhaustive_frechet_mean(sample, Metric::Hamming).objective <=
            naive_frechet_mean(sample, Metric::Hamming).objective);
    }
  }
  SUBCASE("order invariance for tie-free samples") {
    Rng rng(44, 0);
    const std::vector<Graph> sample = {
        random_graph(4, 0.3, rng), random_graph(4, 0.5, rng),
        random_graph(4, 0.7, rng)};
    std::vector<Graph> reversed(sample.rbegin(), sample.rend());
    CHECK(exhaustive_frechet_mean(sample, Metric::Hamming).mean ==
          exhaustive_frechet_mean(reversed, Metric::Hamming).mean);
  }
  SUBCASE("spectral metric route") {
    Rng rng(45, 0);
    std::vector<Graph> sample;
    for (int k = 0; k < 4; ++k) sample.push_back(random_graph(4, 0.5, rng));
    const FrechetResult exh =
        exhaustive_frechet_mean(sample, Metric::AdjacencySpectral);
    const FrechetResult med = sample_medoid(sample, Metric::AdjacencySpectral);
    CHECK(exh.objective <= med.objective + 1e-12);
  }
  SUBCASE("n cap") {
    const std::vector<Graph> s = {Graph(7)};
    CHECK_THROWS_AS(exhaustive_frechet_mean(s, Metric::Hamming),
                    std::invalid_argument);
  }
}

TEST_CASE("naive_frechet_mean") {
  const Graph k3 = complete_graph(3);
  const Graph empty3(3);
  {
    const std::vector<Graph> s = {k3, k3, empty3};
    CHECK(naive_frechet_mean(s).mean == k3);
  }
  {
    const std::vector<Graph> s = {k3, empty3};
    CHECK(naive_frechet_mean(s).mean == empty3);
  }
  {
    Rng rng(46, 0);
    const Graph g = random_graph(6, 0.5, rng);
    const std::vector<Graph> s = {g};
    const FrechetResult r = naive_frechet_mean(s);
    CHECK(r.mean == g);
    CHECK(r.objective == 0.0);
    CHECK(r.method == MeanMethod::NaiveThreshold);
  }
  CHECK_THROWS_AS(naive_frechet_mean({}), std::invalid_argument);
}
