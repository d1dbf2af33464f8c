#include "fgl/frechet.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fgl {
namespace {

std::vector<double> metric_spectrum(const Graph& g, Metric metric) {
  return metric == Metric::AdjacencySpectral ? adjacency_spectrum(g).vals
                                             : laplacian_spectrum(g).vals;
}

double sq_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

uint64_t upper_bits(const Graph& g) {
  uint64_t bits = 0;
  int p = 0;
  for (int i = 0; i < g.n(); ++i) {
    for (int j = i + 1; j < g.n(); ++j, ++p) {
      if (g.edge(i, j)) bits |= uint64_t{1} << p;
    }
  }
  return bits;
}

Graph graph_from_bits(int n, uint64_t bits) {
  Graph g(n);
  int p = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++p) {
      if (bits >> p & 1) g.set_edge(i, j, true);
    }
  }
  return g;
}

// Lexicographic comparison of upper-triangle bitstrings: position 0 is the
// most significant character, so compare bit-reversed prefixes directly.
bool bits_lex_less(uint64_t a, uint64_t b, int m) {
  for (int p = 0; p < m; ++p) {
    const unsigned ba = a >> p & 1;
    const unsigned bb = b >> p & 1;
    if (ba != bb) return ba < bb;
  }
  return false;
}

}  // namespace

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::Hamming: return "hamming";
    case Metric::AdjacencySpectral: return "adjacency";
    case Metric::LaplacianSpectral: return "laplacian";
  }
  return "?";
}

double graph_distance(const Graph& g1, const Graph& g2, Metric metric) {
  switch (metric) {
    case Metric::Hamming: return d_hamming(g1, g2);
    case Metric::AdjacencySpectral: return d_adjacency(g1, g2);
    case Metric::LaplacianSpectral: return d_laplacian(g1, g2);
  }
  throw std::invalid_argument("unknown metric");
}

double frechet_objective(const Graph& candidate, std::span<const Graph> sample,
                         Metric metric) {
  if (sample.empty()) {
    throw std::invalid_argument("frechet_objective: empty sample");
  }
  double s = 0.0;
  for (const Graph& g : sample) {
    const double d = graph_distance(candidate, g, metric);
    s += d * d;
  }
  return s / static_cast<double>(sample.size());
}

Graph closed_form_ier_mean(const WeightedMatrix& p_or_mean) {
  return threshold_half(p_or_mean);
}

FrechetResult sample_medoid(std::span<const Graph> sample, Metric metric) {
  if (sample.empty()) {
    throw std::invalid_argument("sample_medoid: empty sample");
  }
  const size_t count = sample.size();
  const double denom = static_cast<double>(count);

  std::vector<double> objective(count, 0.0);
  if (metric == Metric::Hamming) {
    for (size_t i = 0; i < count; ++i) {
      for (size_t k = 0; k < count; ++k) {
        const double d = d_hamming(sample[i], sample[k]);
        objective[i] += d * d;
      }
      objective[i] /= denom;
    }
  } else {
    std::vector<std::vector<double>> spectra(count);
    for (size_t i = 0; i < count; ++i) {
      spectra[i] = metric_spectrum(sample[i], metric);
    }
    for (size_t i = 0; i < count; ++i) {
      for (size_t k = 0; k < count; ++k) {
        objective[i] += sq_l2(spectra[i], spectra[k]);
      }
      objective[i] /= denom;
    }
  }

  size_t best = 0;
  for (size_t i = 1; i < count; ++i) {
    if (objective[i] < objective[best]) best = i;
  }
  return FrechetResult{sample[best], objective[best], MeanMethod::SampleMedoid,
                       metric};
}

FrechetResult exhaustive_frechet_mean(std::span<const Graph> sample,
                                      Metric metric) {
  if (sample.empty()) {
    throw std::invalid_argument("exhaustive_frechet_mean: empty sample");
  }
  const int n = sample[0].n();
  if (n > kMaxExhaustiveN) {
    throw std::invalid_argument(
        "exhaustive_frechet_mean: n > " + std::to_string(kMaxExhaustiveN) +
        " would enumerate 2^" + std::to_string(n * (n - 1) / 2) + " graphs");
  }
  const int m = n * (n - 1) / 2;
  const uint64_t candidates = uint64_t{1} << m;
  const size_t count = sample.size();
  const double denom = static_cast<double>(count);

  std::vector<uint64_t> member_bits;
  std::vector<std::vector<double>> member_spectra;
  if (metric == Metric::Hamming) {
    for (const Graph& g : sample) member_bits.push_back(upper_bits(g));
  } else {
    for (const Graph& g : sample) {
      member_spectra.push_back(metric_spectrum(g, metric));
    }
  }

  double best_obj = 0.0;
  uint64_t best_bits = 0;
  bool have_best = false;
  for (uint64_t c = 0; c < candidates; ++c) {
    double obj = 0.0;
    if (metric == Metric::Hamming) {
      for (uint64_t mb : member_bits) {
        const double d = static_cast<double>(std::popcount(c ^ mb));
        obj += d * d;
      }
    } else {
      const std::vector<double> spec =
          metric_spectrum(graph_from_bits(n, c), metric);
      for (const auto& ms : member_spectra) obj += sq_l2(spec, ms);
    }
    obj /= denom;
    if (!have_best || obj < best_obj ||
        (obj == best_obj && bits_lex_less(c, best_bits, m))) {
      best_obj = obj;
      best_bits = c;
      have_best = true;
    }
  }
  return FrechetResult{graph_from_bits(n, best_bits), best_obj,
                       MeanMethod::Exhaustive, metric};
}

FrechetResult naive_frechet_mean(std::span<const Graph> sample, Metric metric) {
  if (sample.empty()) {
    throw std::invalid_argument("naive_frechet_mean: empty sample");
  }
  Graph mean = threshold_half(sample_mean(sample));
  const double obj = frechet_objective(mean, sample, metric);
  return FrechetResult{std::move(mean), obj, MeanMethod::NaiveThreshold,
                       metric};
}

}  // namespace fgl
