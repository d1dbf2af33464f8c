// fgl: generation, training, evaluation and oracle tools for sample
// Frechet mean estimation on graph ensembles.
//
// Subcommands: gen, train, eval, oracle, report.
// Exit codes: 0 success, 1 usage error, 2 runtime error.
// FGL_SEED overrides the configured seed unless --seed is given explicitly.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fgl/parallel.hpp"
#include "fgl/pipeline.hpp"

namespace fs = std::filesystem;
using namespace fgl;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

uint64_t fnv1a(const std::string& text) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void print_run_header(const char* cmd, uint64_t seed,
                      const std::string& config_dump) {
  std::printf("fgl %s: seed=%" PRIu64 " config=%016" PRIx64 "\n", cmd, seed,
              fnv1a(config_dump));
}

std::vector<Ensemble> parse_ensembles(const std::vector<std::string>& names) {
  std::vector<Ensemble> out;
  for (const std::string& n : names) out.push_back(parse_ensemble(n));
  return out;
}

Metric parse_metric(const std::string& name) {
  if (name == "hamming") return Metric::Hamming;
  if (name == "adjacency") return Metric::AdjacencySpectral;
  if (name == "laplacian") return Metric::LaplacianSpectral;
  throw UsageError("--metric must be hamming, adjacency or laplacian");
}

// Shared across subcommands.
struct CommonOptions {
  uint64_t seed = 1;
  int threads = default_threads();
};

struct GenOptions {
  std::string ensemble = "ier";
  fs::path out;
  int sample_size = 10;
  // ier
  int param_draws = 36;
  int batches_per_param = 10;
  double shape_min = 0.5, shape_max = 5.0;
  // sbm
  int sbm_draws = 18;
  double p_min = 0.5, p_max = 0.9, q_min = 0.01, q_max = 0.5;
  int max_attempts = 1000;
  // pa
  std::vector<int> l_values = {5, 7, 10, 12, 15, 17, 20, 22, 25};
  int pa_batches_per_l = 40;

  std::string dump(const CommonOptions& c) const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "gen ensemble=%s out=%s seed=%" PRIu64
                  " sample_size=%d param_draws=%d batches_per_param=%d "
                  "shape=[%g,%g] sbm_draws=%d p=[%g,%g] q=[%g,%g] "
                  "max_attempts=%d pa_batches_per_l=%d l_count=%zu",
                  ensemble.c_str(), out.string().c_str(), c.seed, sample_size,
                  param_draws, batches_per_param, shape_min, shape_max,
                  sbm_draws, p_min, p_max, q_min, q_max, max_attempts,
                  pa_batches_per_l, l_values.size());
    return buf;
  }
};

struct TrainOptions {
  std::string variant = "ier";
  std::vector<fs::path> data_dirs;
  fs::path out;
  fs::path loss_log;
  int epochs = 100;
  int batch_size = 8;
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  int base_channels = 16;

  std::string dump(const CommonOptions& c) const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "train variant=%s out=%s seed=%" PRIu64
                  " epochs=%d batch_size=%d lr=%g beta1=%g beta2=%g "
                  "adam_eps=%g base_channels=%d data_count=%zu",
                  variant.c_str(), out.string().c_str(), c.seed, epochs,
                  batch_size, lr, beta1, beta2, adam_eps, base_channels,
                  data_dirs.size());
    return buf;
  }
};

struct EvalOptions {
  fs::path report;
  std::vector<std::string> models = {"ier", "sbm", "pa", "gen", "naive"};
  std::vector<std::string> ensembles = {"ier", "sbm", "pa"};
  int trials = 90;
  int sample_size = 10;
  std::map<std::string, fs::path> checkpoints;  // model id -> path
  bool train_first = false;
  fs::path work_dir;
  // generator ranges for held-out test data
  double shape_min = 0.5, shape_max = 5.0;
  double p_min = 0.5, p_max = 0.9, q_min = 0.01, q_max = 0.5;
  std::vector<int> l_values = {5, 7, 10, 12, 15, 17, 20, 22, 25};
  int max_attempts = 1000;
  // thresholds
  double eps_kl = kKlEpsilon;
  double eps_rel = kRelEpsilon;
  double bin_threshold = 0.5;
  // training knobs used with --train-first
  int epochs = 100;
  int batch_size = 8;
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  int base_channels = 16;
  int param_draws = 36;
  int batches_per_param = 10;
  int sbm_draws = 18;
  int pa_batches_per_l = 40;

  std::string dump(const CommonOptions& c) const {
    std::string models_s, ens_s;
    for (const auto& m : models) models_s += m + "+";
    for (const auto& e : ensembles) ens_s += e + "+";
    char buf[768];
    std::snprintf(buf, sizeof(buf),
                  "eval report=%s models=%s ensembles=%s seed=%" PRIu64
                  " trials=%d sample_size=%d train_first=%d epochs=%d "
                  "batch_size=%d lr=%g shape=[%g,%g] p=[%g,%g] q=[%g,%g] "
                  "eps_kl=%g eps_rel=%g bin_threshold=%g base_channels=%d",
                  report.string().c_str(), models_s.c_str(), ens_s.c_str(),
                  c.seed, trials, sample_size, train_first ? 1 : 0, epochs,
                  batch_size, lr, shape_min, shape_max, p_min, p_max, q_min,
                  q_max, eps_kl, eps_rel, bin_threshold, base_channels);
    return buf;
  }
};

struct OracleOptions {
  int n = 4;
  int trials = 100;
  int sample_size = 5;
  std::string metric = "hamming";
  double edge_prob = 0.9;
  bool demo = false;
  fs::path out;

  std::string dump(const CommonOptions& c) const {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "oracle n=%d trials=%d sample_size=%d metric=%s "
                  "edge_prob=%g demo=%d seed=%" PRIu64,
                  n, trials, sample_size, metric.c_str(), edge_prob,
                  demo ? 1 : 0, c.seed);
    return buf;
  }
};

struct ReportOptions {
  fs::path records;
  fs::path out;
};

int run_gen(const CommonOptions& common, const GenOptions& opt) {
  print_run_header("gen", common.seed, opt.dump(common));
  std::vector<DatasetPair> pairs;
  const Ensemble ensemble = parse_ensemble(opt.ensemble);
  switch (ensemble) {
    case Ensemble::Ier: {
      IerGenConfig cfg;
      cfg.param_draws = opt.param_draws;
      cfg.batches_per_param = opt.batches_per_param;
      cfg.sample_size = opt.sample_size;
      cfg.shape_min = opt.shape_min;
      cfg.shape_max = opt.shape_max;
      pairs = generate_ier_dataset(common.seed, cfg, common.threads);
      break;
    }
    case Ensemble::Sbm: {
      SbmGenConfig cfg;
      cfg.draws_per_blockset = opt.sbm_draws;
      cfg.batches_per_param = opt.batches_per_param;
      cfg.sample_size = opt.sample_size;
      cfg.p_min = opt.p_min;
      cfg.p_max = opt.p_max;
      cfg.q_min = opt.q_min;
      cfg.q_max = opt.q_max;
      cfg.max_attempts = opt.max_attempts;
      pairs = generate_sbm_dataset(common.seed, cfg, common.threads);
      break;
    }
    case Ensemble::Pa: {
      PaGenConfig cfg;
      cfg.l_values = opt.l_values;
      cfg.batches_per_l = opt.pa_batches_per_l;
      cfg.sample_size = opt.sample_size;
      pairs = generate_pa_dataset(common.seed, cfg, common.threads);
      break;
    }
  }
  write_dataset(opt.out, pairs, ensemble, common.seed);
  std::printf("wrote %zu pairs to %s\n", pairs.size(),
              opt.out.string().c_str());
  return 0;
}

std::vector<DatasetPair> load_training_data(const std::string& variant,
                                            const std::vector<fs::path>& dirs) {
  const size_t expect = variant == "gen" ? 3 : 1;
  if (dirs.size() != expect) {
    throw UsageError("--data: variant '" + variant + "' needs " +
                     std::to_string(expect) + " dataset directories, got " +
                     std::to_string(dirs.size()));
  }
  std::vector<DatasetPair> data;
  for (const fs::path& dir : dirs) {
    Dataset ds = read_dataset(dir);
    if (variant != "gen" && ensemble_name(ds.ensemble) != variant) {
      std::fprintf(stderr,
                   "warning: training variant '%s' on a '%s' dataset\n",
                   variant.c_str(), ensemble_name(ds.ensemble).c_str());
    }
    data.insert(data.end(), std::make_move_iterator(ds.pairs.begin()),
                std::make_move_iterator(ds.pairs.end()));
  }
  return data;
}

void write_loss_log(const fs::path& path, const std::vector<double>& losses) {
  std::ofstream out(path, std::ios::binary);
  out << "epoch,mean_loss\n";
  for (size_t e = 0; e < losses.size(); ++e) {
    out << e + 1 << "," << format_csv_double(losses[e]) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

int run_train(const CommonOptions& common, const TrainOptions& opt) {
  print_run_header("train", common.seed, opt.dump(common));
  const std::vector<DatasetPair> data =
      load_training_data(opt.variant, opt.data_dirs);

  TrainConfig cfg;
  cfg.epochs = opt.epochs;
  cfg.batch_size = opt.batch_size;
  cfg.adam = {opt.lr, opt.beta1, opt.beta2, opt.adam_eps};
  cfg.seed = common.seed;
  cfg.threads = common.threads;
  cfg.base_channels = opt.base_channels;

  const TrainResult result = train_variant(data, cfg);
  if (opt.out.has_parent_path()) {
    fs::create_directories(opt.out.parent_path());
  }
  save_checkpoint(result.params, result.state, opt.out);
  const fs::path log_path =
      opt.loss_log.empty() ? fs::path(opt.out.string() + ".loss.csv")
                           : opt.loss_log;
  write_loss_log(log_path, result.epoch_loss);
  std::printf("trained %s on %zu pairs for %d epochs: loss %.6f -> %.6f\n",
              opt.variant.c_str(), data.size(), opt.epochs,
              result.epoch_loss.front(), result.epoch_loss.back());
  std::printf("checkpoint: %s\nloss log: %s\n", opt.out.string().c_str(),
              log_path.string().c_str());
  return 0;
}

int run_eval(const CommonOptions& common, EvalOptions opt) {
  print_run_header("eval", common.seed, opt.dump(common));

  std::map<std::string, ModelParams> models;
  if (opt.train_first) {
    const fs::path work =
        opt.work_dir.empty() ? opt.report / "work" : opt.work_dir;
    fs::create_directories(work);

    std::map<std::string, std::vector<DatasetPair>> datasets;
    bool need_ier = false, need_sbm = false, need_pa = false;
    for (const std::string& m : opt.models) {
      need_ier |= m == "ier" || m == "gen";
      need_sbm |= m == "sbm" || m == "gen";
      need_pa |= m == "pa" || m == "gen";
    }
    if (need_ier) {
      IerGenConfig cfg;
      cfg.param_draws = opt.param_draws;
      cfg.batches_per_param = opt.batches_per_param;
      cfg.sample_size = opt.sample_size;
      cfg.shape_min = opt.shape_min;
      cfg.shape_max = opt.shape_max;
      datasets["ier"] = generate_ier_dataset(common.seed, cfg, common.threads);
      write_dataset(work / "ds_ier", datasets["ier"], Ensemble::Ier,
                    common.seed);
    }
    if (need_sbm) {
      SbmGenConfig cfg;
      cfg.draws_per_blockset = opt.sbm_draws;
      cfg.batches_per_param = opt.batches_per_param;
      cfg.sample_size = opt.sample_size;
      cfg.p_min = opt.p_min;
      cfg.p_max = opt.p_max;
      cfg.q_min = opt.q_min;
      cfg.q_max = opt.q_max;
      cfg.max_attempts = opt.max_attempts;
      datasets["sbm"] = generate_sbm_dataset(common.seed, cfg, common.threads);
      write_dataset(work / "ds_sbm", datasets["sbm"], Ensemble::Sbm,
                    common.seed);
    }
    if (need_pa) {
      PaGenConfig cfg;
      cfg.l_values = opt.l_values;
      cfg.batches_per_l = opt.pa_batches_per_l;
      cfg.sample_size = opt.sample_size;
      datasets["pa"] = generate_pa_dataset(common.seed, cfg, common.threads);
      write_dataset(work / "ds_pa", datasets["pa"], Ensemble::Pa, common.seed);
    }

    TrainConfig tc;
    tc.epochs = opt.epochs;
    tc.batch_size = opt.batch_size;
    tc.adam = {opt.lr, opt.beta1, opt.beta2, opt.adam_eps};
    tc.seed = common.seed;
    tc.threads = common.threads;
    tc.base_channels = opt.base_channels;
    for (const std::string& m : opt.models) {
      if (m == "naive") continue;
      std::vector<DatasetPair> data;
      if (m == "gen") {
        for (const char* e : {"ier", "sbm", "pa"}) {
          data.insert(data.end(), datasets[e].begin(), datasets[e].end());
        }
      } else {
        data = datasets[m];
      }
      std::printf("training %s-unet (%zu pairs, %d epochs)...\n", m.c_str(),
                  data.size(), tc.epochs);
      std::fflush(stdout);
      const TrainResult tr = train_variant(data, tc);
      const fs::path ckpt = work / ("ckpt_" + m + ".fgl");
      save_checkpoint(tr.params, tr.state, ckpt);
      write_loss_log(work / ("ckpt_" + m + ".loss.csv"), tr.epoch_loss);
      models[m] = tr.params;
      opt.checkpoints[m] = ckpt;
    }
  } else {
    for (const std::string& m : opt.models) {
      if (m == "naive") continue;
      auto it = opt.checkpoints.find(m);
      if (it == opt.checkpoints.end()) {
        throw UsageError("missing --ckpt-" + m + " (or use --train-first)");
      }
      models[m] = load_checkpoint(it->second).params;
    }
  }

  BenchmarkConfig cfg;
  cfg.ensembles = parse_ensembles(opt.ensembles);
  cfg.models = opt.models;
  cfg.trials = opt.trials;
  cfg.sample_size = opt.sample_size;
  cfg.seed = common.seed;
  cfg.threads = common.threads;
  cfg.max_attempts = opt.max_attempts;
  cfg.shape_min = opt.shape_min;
  cfg.shape_max = opt.shape_max;
  cfg.p_min = opt.p_min;
  cfg.p_max = opt.p_max;
  cfg.q_min = opt.q_min;
  cfg.q_max = opt.q_max;
  cfg.l_values = opt.l_values;
  cfg.eps_rel = opt.eps_rel;
  cfg.eps_kl = opt.eps_kl;
  cfg.bin_threshold = opt.bin_threshold;
  cfg.report_dir = opt.report;

  const BenchmarkResult result = run_benchmark(cfg, models);
  for (const EvalSummary& s : result.summaries) {
    size_t max_i = 0;
    for (size_t i = 1; i < s.aade.size(); ++i) {
      if (s.aade[i] > s.aade[max_i]) max_i = i;
    }
    std::printf(
        "%-5s on %-3s: max mean |dlambda| = %.6f at lambda_%zu, "
        "mean KL = %.4f\n",
        s.model.c_str(), ensemble_name(s.ensemble).c_str(), s.aade[max_i],
        max_i + 1, s.kl_mean);
  }
  std::printf("reports: %s\n", opt.report.string().c_str());
  return 0;
}

int run_oracle(const CommonOptions& common, const OracleOptions& opt) {
  print_run_header("oracle", common.seed, opt.dump(common));
  const Metric metric = parse_metric(opt.metric);

  if (opt.demo) {
    // The three-graph sample where thresholding is not the Frechet mean.
    Graph k3(3);
    k3.set_edge(0, 1, true);
    k3.set_edge(0, 2, true);
    k3.set_edge(1, 2, true);
    const std::vector<Graph> sample = {k3, k3, Graph(3)};
    const FrechetResult exh = exhaustive_frechet_mean(sample, Metric::Hamming);
    const FrechetResult naive = naive_frechet_mean(sample, Metric::Hamming);
    std::printf("demo {K3, K3, empty}, hamming:\n");
    std::printf("  exhaustive objective %.6f (edges %d)\n", exh.objective,
                edge_count(exh.mean));
    std::printf("  naive      objective %.6f (edges %d)\n", naive.objective,
                edge_count(naive.mean));
  }

  std::ofstream csv;
  if (!opt.out.empty()) {
    csv.open(opt.out, std::ios::binary);
    csv << "trial,exhaustive_obj,medoid_obj,naive_obj,exh_eq_naive,"
           "exh_eq_medoid\n";
  }

  int exh_eq_naive = 0;
  int exh_eq_medoid = 0;
  double gap_naive = 0.0;
  double gap_medoid = 0.0;
  for (int trial = 0; trial < opt.trials; ++trial) {
    Rng rng(common.seed, static_cast<uint64_t>(trial));
    WeightedMatrix P(opt.n);
    for (int i = 0; i < opt.n; ++i) {
      for (int j = 0; j < opt.n; ++j) {
        if (i != j) P.at(i, j) = opt.edge_prob;
      }
    }
    std::vector<Graph> sample;
    sample.reserve(opt.sample_size);
    for (int k = 0; k < opt.sample_size; ++k) {
      sample.push_back(sample_ier(IerParams{opt.n, P}, rng));
    }
    const FrechetResult exh = exhaustive_frechet_mean(sample, metric);
    const FrechetResult med = sample_medoid(sample, metric);
    const FrechetResult naive = naive_frechet_mean(sample, metric);
    if (exh.mean == naive.mean) ++exh_eq_naive;
    if (exh.mean == med.mean) ++exh_eq_medoid;
    gap_naive += naive.objective - exh.objective;
    gap_medoid += med.objective - exh.objective;
    if (csv.is_open()) {
      csv << trial << "," << format_csv_double(exh.objective) << ","
          << format_csv_double(med.objective) << ","
          << format_csv_double(naive.objective) << ","
          << (exh.mean == naive.mean ? 1 : 0) << ","
          << (exh.mean == med.mean ? 1 : 0) << "\n";
    }
  }
  if (opt.trials > 0) {
    std::printf(
        "%d trials (n=%d, N=%d, P=%.3g, %s): exhaustive==naive %d/%d, "
        "exhaustive==medoid %d/%d\n",
        opt.trials, opt.n, opt.sample_size, opt.edge_prob, opt.metric.c_str(),
        exh_eq_naive, opt.trials, exh_eq_medoid, opt.trials);
    std::printf("mean objective gap: naive-exh %.6f, medoid-exh %.6f\n",
                gap_naive / opt.trials, gap_medoid / opt.trials);
  }
  if (csv.is_open()) {
    std::printf("per-trial csv: %s\n", opt.out.string().c_str());
  }
  return 0;
}

int run_report(const ReportOptions& opt) {
  const std::vector<EvalRecord> records = read_records_csv(opt.records);
  if (records.empty()) throw std::runtime_error("no records found");

  // Group in first-seen order; records.csv is written grouped already.
  std::vector<EvalSummary> summaries;
  size_t start = 0;
  for (size_t i = 1; i <= records.size(); ++i) {
    if (i == records.size() || records[i].model != records[start].model ||
        records[i].ensemble != records[start].ensemble) {
      summaries.push_back(summarize(
          std::span<const EvalRecord>(&records[start], i - start)));
      start = i;
    }
  }
  for (const EvalSummary& s : summaries) {
    size_t max_i = 0;
    for (size_t i = 1; i < s.aade.size(); ++i) {
      if (s.aade[i] > s.aade[max_i]) max_i = i;
    }
    std::printf(
        "%-5s on %-3s: trials=%d max mean |dlambda| = %.6f at lambda_%zu, "
        "mean KL = %.4f (var %.4f)\n",
        s.model.c_str(), ensemble_name(s.ensemble).c_str(), s.trials,
        s.aade[max_i], max_i + 1, s.kl_mean, s.kl_var);
  }
  if (!opt.out.empty()) {
    write_reports(opt.out, records, summaries);
    std::printf("rewrote tables under %s\n", opt.out.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Sample Frechet mean of graph samples: dataset generation, CNN "
      "training, evaluation against exact baselines"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI config file; one [section] per subcommand, flags win");
  app.get_formatter()->column_width(34);

  CommonOptions common;
  GenOptions gen;
  TrainOptions train;
  EvalOptions eval;
  OracleOptions oracle;
  ReportOptions report;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed,
                    "Base RNG seed; FGL_SEED overrides when --seed is absent")
        ->capture_default_str();
    sub->add_option("--threads", common.threads, "Worker thread cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  // gen ----------------------------------------------------------------
  CLI::App* gen_cmd =
      app.add_subcommand("gen", "Generate a training dataset directory");
  gen_cmd->add_option("--ensemble", gen.ensemble, "ier, sbm or pa")
      ->check(CLI::IsMember({"ier", "sbm", "pa"}))
      ->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Dataset directory to create")
      ->required();
  gen_cmd->add_option("--sample-size", gen.sample_size, "Graphs per batch (N)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--param-draws", gen.param_draws,
                      "IER: number of (a,b) draws")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--batches-per-param", gen.batches_per_param,
                      "Batches per parameter draw (IER and SBM)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--shape-min", gen.shape_min, "IER: beta shape minimum")
      ->capture_default_str();
  gen_cmd->add_option("--shape-max", gen.shape_max, "IER: beta shape maximum")
      ->capture_default_str();
  gen_cmd->add_option("--sbm-draws", gen.sbm_draws,
                      "SBM: (p,q) draws per block structure")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--p-min", gen.p_min, "SBM: within-community p minimum")
      ->capture_default_str();
  gen_cmd->add_option("--p-max", gen.p_max, "SBM: within-community p maximum")
      ->capture_default_str();
  gen_cmd->add_option("--q-min", gen.q_min, "SBM: between-community q minimum")
      ->capture_default_str();
  gen_cmd->add_option("--q-max", gen.q_max, "SBM: between-community q maximum")
      ->capture_default_str();
  gen_cmd->add_option("--max-attempts", gen.max_attempts,
                      "SBM: connectivity rejection cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--l", gen.l_values, "PA: attachment counts")
      ->delimiter(',')
      ->capture_default_str();
  gen_cmd->add_option("--pa-batches-per-l", gen.pa_batches_per_l,
                      "PA: batches per l value")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(gen_cmd);

  // train --------------------------------------------------------------
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train one model variant from datasets");
  train_cmd->add_option("--variant", train.variant,
                        "ier, sbm, pa, or gen (union of all three)")
      ->check(CLI::IsMember({"ier", "sbm", "pa", "gen"}))
      ->capture_default_str();
  train_cmd
      ->add_option("--data", train.data_dirs,
                   "Dataset directories (three for --variant gen)")
      ->delimiter(',')
      ->required();
  train_cmd->add_option("--out", train.out, "Checkpoint file to write")
      ->required();
  train_cmd->add_option("--loss-log", train.loss_log,
                        "Per-epoch loss CSV (default <out>.loss.csv)");
  train_cmd->add_option("--epochs", train.epochs, "Training epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--batch-size", train.batch_size, "Pairs per step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--lr", train.lr, "Adam learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--beta1", train.beta1, "Adam beta1")
      ->capture_default_str();
  train_cmd->add_option("--beta2", train.beta2, "Adam beta2")
      ->capture_default_str();
  train_cmd->add_option("--adam-eps", train.adam_eps, "Adam epsilon")
      ->capture_default_str();
  train_cmd->add_option("--base-channels", train.base_channels,
                        "U-Net channels at full resolution")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(train_cmd);

  // eval ---------------------------------------------------------------
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Evaluate models on held-out batches and write report CSVs");
  eval_cmd->add_option("--report", eval.report, "Report directory to create")
      ->required();
  eval_cmd->add_option("--models", eval.models,
                       "Subset of ier,sbm,pa,gen,naive")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--ensembles", eval.ensembles,
                       "Test ensembles (subset of ier,sbm,pa)")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd
      ->add_option("--trials", eval.trials, "Held-out batches per ensemble")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--sample-size", eval.sample_size, "Graphs per batch")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fs::path ckpt_ier, ckpt_sbm, ckpt_pa, ckpt_gen;
  eval_cmd->add_option("--ckpt-ier", ckpt_ier, "IER-Unet checkpoint");
  eval_cmd->add_option("--ckpt-sbm", ckpt_sbm, "SBM-Unet checkpoint");
  eval_cmd->add_option("--ckpt-pa", ckpt_pa, "PA-Unet checkpoint");
  eval_cmd->add_option("--ckpt-gen", ckpt_gen, "Gen-Unet checkpoint");
  eval_cmd->add_flag("--train-first", eval.train_first,
                     "Generate datasets and train the selected models first");
  eval_cmd->add_option("--work-dir", eval.work_dir,
                       "Scratch dir for --train-first (default <report>/work)");
  eval_cmd->add_option("--shape-min", eval.shape_min, "IER beta shape minimum")
      ->capture_default_str();
  eval_cmd->add_option("--shape-max", eval.shape_max, "IER beta shape maximum")
      ->capture_default_str();
  eval_cmd->add_option("--p-min", eval.p_min, "SBM p minimum")
      ->capture_default_str();
  eval_cmd->add_option("--p-max", eval.p_max, "SBM p maximum")
      ->capture_default_str();
  eval_cmd->add_option("--q-min", eval.q_min, "SBM q minimum")
      ->capture_default_str();
  eval_cmd->add_option("--q-max", eval.q_max, "SBM q maximum")
      ->capture_default_str();
  eval_cmd->add_option("--l", eval.l_values, "PA attachment counts")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--max-attempts", eval.max_attempts,
                       "SBM connectivity rejection cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--eps-kl", eval.eps_kl, "KL denominator floor")
      ->capture_default_str();
  eval_cmd->add_option("--eps-rel", eval.eps_rel,
                       "Relative-error denominator floor")
      ->capture_default_str();
  eval_cmd->add_option("--bin-threshold", eval.bin_threshold,
                       "Binarization threshold for network output")
      ->capture_default_str();
  eval_cmd->add_option("--epochs", eval.epochs, "Epochs for --train-first")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--batch-size", eval.batch_size,
                       "Batch size for --train-first")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--lr", eval.lr, "Adam learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--beta1", eval.beta1, "Adam beta1")
      ->capture_default_str();
  eval_cmd->add_option("--beta2", eval.beta2, "Adam beta2")
      ->capture_default_str();
  eval_cmd->add_option("--adam-eps", eval.adam_eps, "Adam epsilon")
      ->capture_default_str();
  eval_cmd->add_option("--base-channels", eval.base_channels,
                       "U-Net base channels for --train-first")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--param-draws", eval.param_draws,
                       "IER (a,b) draws for --train-first")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--batches-per-param", eval.batches_per_param,
                       "Batches per draw for --train-first")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--sbm-draws", eval.sbm_draws,
                       "SBM draws per block structure for --train-first")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--pa-batches-per-l", eval.pa_batches_per_l,
                       "PA batches per l for --train-first")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(eval_cmd);

  // oracle -------------------------------------------------------------
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "Exhaustive Frechet mean vs naive and medoid on tiny graphs");
  oracle_cmd->add_option("--n", oracle.n, "Vertex count (at most 6)")
      ->check(CLI::Range(1, 6))
      ->capture_default_str();
  oracle_cmd->add_option("--trials", oracle.trials, "Seeded samples to run")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  oracle_cmd->add_option("--sample-size", oracle.sample_size,
                         "Graphs per sample")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  oracle_cmd->add_option("--metric", oracle.metric,
                         "hamming, adjacency or laplacian")
      ->check(CLI::IsMember({"hamming", "adjacency", "laplacian"}))
      ->capture_default_str();
  oracle_cmd->add_option("--edge-prob", oracle.edge_prob,
                         "Constant IER edge probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  oracle_cmd->add_flag("--demo", oracle.demo,
                       "Also print the {K3,K3,empty} counterexample");
  oracle_cmd->add_option("--out", oracle.out, "Optional per-trial CSV");
  add_common(oracle_cmd);

  // report -------------------------------------------------------------
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Summarize a records.csv and optionally rewrite tables");
  report_cmd->add_option("--records", report.records, "records.csv path")
      ->required();
  report_cmd->add_option("--out", report.out,
                         "Directory for regenerated tables");

  bool seed_on_cli = false;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]).rfind("--seed", 0) == 0) seed_on_cli = true;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (!seed_on_cli) {
    if (const char* env = std::getenv("FGL_SEED")) {
      try {
        common.seed = std::stoull(env);
      } catch (...) {
        std::fprintf(stderr, "FGL_SEED is not an integer: %s\n", env);
        return 1;
      }
    }
  }

  try {
    // Cross-field checks CLI11 cannot express.
    if (gen_cmd->parsed() || eval_cmd->parsed()) {
      const double pmin = gen_cmd->parsed() ? gen.p_min : eval.p_min;
      const double pmax = gen_cmd->parsed() ? gen.p_max : eval.p_max;
      const double qmin = gen_cmd->parsed() ? gen.q_min : eval.q_min;
      const double qmax = gen_cmd->parsed() ? gen.q_max : eval.q_max;
      if (!(0.0 <= pmin && pmin <= pmax && pmax <= 1.0)) {
        throw UsageError("--p-min/--p-max must satisfy 0 <= min <= max <= 1");
      }
      if (!(0.0 <= qmin && qmin <= qmax && qmax <= 1.0)) {
        throw UsageError("--q-min/--q-max must satisfy 0 <= min <= max <= 1");
      }
      if (qmax > pmin) {
        throw UsageError(
            "--q-max must not exceed --p-min (the model requires q <= p)");
      }
      const auto& ls = gen_cmd->parsed() ? gen.l_values : eval.l_values;
      for (int l : ls) {
        if (l < 1 || l > 26) {
          throw UsageError("--l values must lie in [1, 26] for n = 28");
        }
      }
    }
    if (eval_cmd->parsed()) {
      if (!(eval.bin_threshold > 0.0 && eval.bin_threshold < 1.0)) {
        throw UsageError("--bin-threshold must lie strictly between 0 and 1");
      }
      if (!ckpt_ier.empty()) eval.checkpoints["ier"] = ckpt_ier;
      if (!ckpt_sbm.empty()) eval.checkpoints["sbm"] = ckpt_sbm;
      if (!ckpt_pa.empty()) eval.checkpoints["pa"] = ckpt_pa;
      if (!ckpt_gen.empty()) eval.checkpoints["gen"] = ckpt_gen;
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  try {
    if (gen_cmd->parsed()) return run_gen(common, gen);
    if (train_cmd->parsed()) return run_train(common, train);
    if (eval_cmd->parsed()) return run_eval(common, eval);
    if (oracle_cmd->parsed()) return run_oracle(common, oracle);
    if (report_cmd->parsed()) return run_report(report);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
