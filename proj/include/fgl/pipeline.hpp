#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgl/ensembles.hpp"
#include "fgl/frechet.hpp"
#include "fgl/graph.hpp"
#include "fgl/minicnn.hpp"

namespace fgl {

enum class Ensemble { Ier, Sbm, Pa };

std::string ensemble_name(Ensemble e);
Ensemble parse_ensemble(const std::string& name);

/// Generator parameters of one training pair; unused fields stay at their
/// defaults (the ensemble tag says which ones apply).
struct GenParams {
  double a = 0.0, b = 0.0;       // ier beta shapes
  double p = 0.0, q = 0.0;       // sbm probabilities
  std::vector<int> blocks;       // sbm block sizes
  int l = 0;                     // pa attachment count
};

struct PairMeta {
  Ensemble ensemble = Ensemble::Ier;
  uint64_t stream = 0;  // rng stream that produced the batch
  GenParams params;
};

/// One training example: the sample mean adjacency matrix of a batch and the
/// ensemble-appropriate Frechet-mean target, with the raw batch members kept
/// for provenance.
struct DatasetPair {
  WeightedMatrix input;
  Graph target;
  std::vector<Graph> members;
  PairMeta meta;
};

struct IerGenConfig {
  int n = 28;
  int param_draws = 36;
  int batches_per_param = 10;
  int sample_size = 10;
  double shape_min = 0.5;
  double shape_max = 5.0;
  // Test hook: skip the beta draw and use a constant edge probability.
  std::optional<double> fixed_edge_prob;
};

struct SbmGenConfig {
  int n = 28;
  int draws_per_blockset = 18;  // per block structure; two structures total
  int batches_per_param = 10;
  int sample_size = 10;
  double p_min = 0.5;
  double p_max = 0.9;
  double q_min = 0.01;
  double q_max = 0.5;
  int max_attempts = 1000;
  std::vector<int> blocks_two = {14, 14};
  std::vector<int> blocks_three = {10, 10, 8};
};

struct PaGenConfig {
  int n = 28;
  std::vector<int> l_values = {5, 7, 10, 12, 15, 17, 20, 22, 25};
  int batches_per_l = 40;
  int sample_size = 10;
};

/// Dataset generators. Targets: IER uses the closed-form mean of the drawn
/// P; SBM the sample medoid under the adjacency spectral distance; PA the
/// sample medoid under the Laplacian spectral distance.
std::vector<DatasetPair> generate_ier_dataset(uint64_t seed,
                                              const IerGenConfig& cfg = {},
                                              int threads = 1);
std::vector<DatasetPair> generate_sbm_dataset(uint64_t seed,
                                              const SbmGenConfig& cfg = {},
                                              int threads = 1);
std::vector<DatasetPair> generate_pa_dataset(uint64_t seed,
                                             const PaGenConfig& cfg = {},
                                             int threads = 1);

/// Dataset directory: manifest.json, inputs.f32 (raw little-endian float32
/// mean matrices, pair-major), targets.bin (upper-triangle bitstring lines),
/// batches/ (one graph file of raw members per pair).
void write_dataset(const std::filesystem::path& dir,
                   const std::vector<DatasetPair>& pairs, Ensemble ensemble,
                   uint64_t seed);

struct Dataset {
  Ensemble ensemble = Ensemble::Ier;
  int n = 0;
  int sample_size = 0;
  uint64_t seed = 0;
  std::vector<DatasetPair> pairs;
};

Dataset read_dataset(const std::filesystem::path& dir,
                     bool load_members = false);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 8;
  AdamConfig adam;
  uint64_t seed = 1;
  int threads = 1;
  int base_channels = 16;
};

struct TrainResult {
  ModelParams params;
  AdamState state;
  std::vector<double> epoch_loss;  // mean BCE per epoch
};

/// Adam/BCE training over shuffled batches. Deterministic for a fixed seed
/// and data order regardless of thread count: per-sample gradients are
/// computed in parallel but reduced in index order.
TrainResult train_variant(const std::vector<DatasetPair>& data,
                          const TrainConfig& cfg);

/// Post-processing of a raw network output: symmetrize (y + y^T)/2, zero the
/// diagonal, threshold (strict, default 1/2).
Graph output_to_graph(const Tensor3& raw, double threshold = 0.5);

Graph predict_from_mean(const ModelParams& params, const WeightedMatrix& mean,
                        double threshold = 0.5);
Graph predict_frechet(const ModelParams& params,
                      const std::vector<Graph>& sample,
                      double threshold = 0.5);

/// One evaluation trial: ground truth, the batch's mean matrix, and the
/// sample mean spectrum (mean of the members' descending adjacency spectra).
struct EvalTrial {
  Graph truth;
  WeightedMatrix mean;
  std::vector<double> mean_spectrum;
  Ensemble ensemble = Ensemble::Ier;
  uint64_t stream = 0;
};

struct EvalRecord {
  std::string model;
  Ensemble ensemble = Ensemble::Ier;
  int trial = 0;
  uint64_t stream = 0;
  std::vector<double> delta;             // |lambda_i(truth) - lambda_i(est)|
  std::vector<double> delta_rel;         // delta / max(|lambda_i(truth)|, eps)
  std::vector<double> delta_vs_mean;     // |lambda_i(est) - <lambda>_i|
  std::vector<double> delta_vs_mean_rel;
  double kl = 0.0;  // KL(truth degree histogram, estimate degree histogram)
};

constexpr double kRelEpsilon = 1e-8;

std::vector<EvalRecord> evaluate(const std::string& model,
                                 std::span<const Graph> estimates,
                                 std::span<const EvalTrial> trials,
                                 double eps_rel = kRelEpsilon,
                                 double eps_kl = kKlEpsilon);

struct EvalSummary {
  std::string model;
  Ensemble ensemble = Ensemble::Ier;
  int trials = 0;
  std::vector<double> aade;          // mean delta per eigenvalue
  std::vector<double> apade;         // mean relative delta per eigenvalue
  std::vector<double> aade_vs_mean;
  std::vector<double> apade_vs_mean;
  double kl_mean = 0.0;
  double kl_var = 0.0;  // population variance
};

/// Entrywise means over one (model, ensemble) group.
EvalSummary summarize(std::span<const EvalRecord> records);

struct BenchmarkConfig {
  std::vector<Ensemble> ensembles = {Ensemble::Ier, Ensemble::Sbm,
                                     Ensemble::Pa};
  std::vector<std::string> models = {"ier", "sbm", "pa", "gen", "naive"};
  int trials = 90;
  int sample_size = 10;
  int n = 28;
  uint64_t seed = 1;
  int threads = 1;
  int max_attempts = 1000;
  double shape_min = 0.5, shape_max = 5.0;
  double p_min = 0.5, p_max = 0.9, q_min = 0.01, q_max = 0.5;
  std::vector<int> l_values = {5, 7, 10, 12, 15, 17, 20, 22, 25};
  double eps_rel = kRelEpsilon;
  double eps_kl = kKlEpsilon;
  double bin_threshold = 0.5;
  std::filesystem::path report_dir;  // empty: no files written
};

struct BenchmarkResult {
  std::vector<EvalRecord> records;
  std::vector<EvalSummary> summaries;
};

/// Builds held-out test batches per ensemble, runs every selected model plus
/// the naive baseline, and (when report_dir is set) writes records.csv, the
/// five summary tables and the six per-eigenvalue curve files.
BenchmarkResult run_benchmark(const BenchmarkConfig& cfg,
                              const std::map<std::string, ModelParams>& models);

/// Test-batch construction, exposed for the benchmark and for tests.
std::vector<EvalTrial> make_test_trials(Ensemble e, const BenchmarkConfig& cfg);

// Report I/O (report.cpp).
void write_reports(const std::filesystem::path& dir,
                   const std::vector<EvalRecord>& records,
                   const std::vector<EvalSummary>& summaries);
std::vector<EvalRecord> read_records_csv(const std::filesystem::path& file);
std::string format_csv_double(double x);

// Stream-id scheme: one tag per purpose so parallel draws never collide.
enum class StreamTag : uint64_t {
  IerTrain = 1,
  SbmTrain = 2,
  PaTrain = 3,
  IerTest = 4,
  SbmTest = 5,
  PaTest = 6,
  ParamDraw = 7,
  Init = 8,
  Shuffle = 9,
};

constexpr uint64_t make_stream(StreamTag tag, uint64_t a = 0, uint64_t b = 0) {
  return (static_cast<uint64_t>(tag) << 48) | (a << 24) | b;
}

}  // namespace fgl
