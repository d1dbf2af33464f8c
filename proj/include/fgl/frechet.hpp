#pragma once

#include <span>
#include <string>

#include "fgl/graph.hpp"
#include "fgl/spectra.hpp"

namespace fgl {

enum class Metric { Hamming, AdjacencySpectral, LaplacianSpectral };

enum class MeanMethod { ClosedFormIer, NaiveThreshold, SampleMedoid, Exhaustive };

std::string metric_name(Metric m);

struct FrechetResult {
  Graph mean;
  double objective = 0.0;  // (1/N) sum_k d^2(mean, G_k)
  MeanMethod method = MeanMethod::NaiveThreshold;
  Metric metric = Metric::Hamming;
};

double graph_distance(const Graph& g1, const Graph& g2, Metric metric);

/// (1/N) sum over the sample of squared distances to the candidate.
double frechet_objective(const Graph& candidate, std::span<const Graph> sample,
                         Metric metric);

/// Entrywise threshold of an edge-probability (or sample mean) matrix at 1/2,
/// strict. The closed-form Frechet mean of an IER ensemble under Hamming.
Graph closed_form_ier_mean(const WeightedMatrix& p_or_mean);

/// Sample member minimizing the objective; ties broken by lowest index.
FrechetResult sample_medoid(std::span<const Graph> sample, Metric metric);

/// Global minimizer over all 2^(n(n-1)/2) graphs; requires n <= 6. Ties
/// broken by lexicographically smallest upper-triangle bitstring.
FrechetResult exhaustive_frechet_mean(std::span<const Graph> sample,
                                      Metric metric);

constexpr int kMaxExhaustiveN = 6;

/// threshold_half(sample_mean(sample)) with the objective evaluated under
/// the given metric.
FrechetResult naive_frechet_mean(std::span<const Graph> sample,
                                 Metric metric = Metric::Hamming);

}  // namespace fgl
