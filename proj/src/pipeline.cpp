#include "fgl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fgl/parallel.hpp"
#include "fgl/spectra.hpp"

namespace fgl {
namespace {

Tensor3 matrix_to_tensor(const WeightedMatrix& m) {
  Tensor3 x(m.n, m.n, 1);
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) {
      x.at(i, j, 0) = static_cast<float>(m.at(i, j));
    }
  }
  return x;
}

Tensor3 graph_to_tensor(const Graph& g) {
  Tensor3 x(g.n(), g.n(), 1);
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      x.at(i, j, 0) = g.edge(i, j) ? 1.0f : 0.0f;
    }
  }
  return x;
}

std::vector<double> mean_member_spectrum(const std::vector<Graph>& members) {
  const int n = members.front().n();
  std::vector<double> mean(n, 0.0);
  for (const Graph& g : members) {
    const std::vector<double> spec = adjacency_spectrum(g).vals;
    for (int i = 0; i < n; ++i) mean[i] += spec[i];
  }
  for (double& x : mean) x /= static_cast<double>(members.size());
  return mean;
}

void fisher_yates(std::vector<int>& order, Rng& rng) {
  for (size_t i = order.size(); i > 1; --i) {
    const size_t j = rng.next_below(i);
    std::swap(order[i - 1], order[j]);
  }
}

}  // namespace

std::string ensemble_name(Ensemble e) {
  switch (e) {
    case Ensemble::Ier: return "ier";
    case Ensemble::Sbm: return "sbm";
    case Ensemble::Pa: return "pa";
  }
  return "?";
}

Ensemble parse_ensemble(const std::string& name) {
  if (name == "ier") return Ensemble::Ier;
  if (name == "sbm") return Ensemble::Sbm;
  if (name == "pa") return Ensemble::Pa;
  throw std::invalid_argument("unknown ensemble: " + name);
}

std::vector<DatasetPair> generate_ier_dataset(uint64_t seed,
                                              const IerGenConfig& cfg,
                                              int threads) {
  std::vector<double> shape_a(cfg.param_draws);
  std::vector<double> shape_b(cfg.param_draws);
  for (int i = 0; i < cfg.param_draws; ++i) {
    Rng rng(seed, make_stream(StreamTag::ParamDraw,
                              static_cast<uint64_t>(Ensemble::Ier), i));
    shape_a[i] = rng.next_uniform(cfg.shape_min, cfg.shape_max);
    shape_b[i] = rng.next_uniform(cfg.shape_min, cfg.shape_max);
  }

  const int total = cfg.param_draws * cfg.batches_per_param;
  std::vector<DatasetPair> pairs(total);
  parallel_for(0, total, threads, [&](int idx) {
    const int draw = idx / cfg.batches_per_param;
    const int batch = idx % cfg.batches_per_param;
    const uint64_t stream = make_stream(StreamTag::IerTrain, draw, batch);
    Rng rng(seed, stream);

    IerParams params;
    if (cfg.fixed_edge_prob) {
      params.n = cfg.n;
      params.P = WeightedMatrix(cfg.n);
      for (int i = 0; i < cfg.n; ++i) {
        for (int j = 0; j < cfg.n; ++j) {
          if (i != j) params.P.at(i, j) = *cfg.fixed_edge_prob;
        }
      }
    } else {
      params = sample_beta_P(shape_a[draw], shape_b[draw], cfg.n, rng);
    }

    DatasetPair& pair = pairs[idx];
    pair.members.reserve(cfg.sample_size);
    for (int k = 0; k < cfg.sample_size; ++k) {
      pair.members.push_back(sample_ier(params, rng));
    }
    pair.input = sample_mean(pair.members);
    pair.target = closed_form_ier_mean(params.P);
    pair.meta.ensemble = Ensemble::Ier;
    pair.meta.stream = stream;
    pair.meta.params.a = shape_a[draw];
    pair.meta.params.b = shape_b[draw];
  });
  return pairs;
}

std::vector<DatasetPair> generate_sbm_dataset(uint64_t seed,
                                              const SbmGenConfig& cfg,
                                              int threads) {
  const int draws = 2 * cfg.draws_per_blockset;
  std::vector<SbmParams> params(draws);
  for (int i = 0; i < draws; ++i) {
    Rng rng(seed, make_stream(StreamTag::ParamDraw,
                              static_cast<uint64_t>(Ensemble::Sbm), i));
    params[i].p = rng.next_uniform(cfg.p_min, cfg.p_max);
    params[i].q = rng.next_uniform(cfg.q_min, cfg.q_max);
    params[i].block_sizes =
        i < cfg.draws_per_blockset ? cfg.blocks_two : cfg.blocks_three;
    params[i].validate();
    if (params[i].n() != cfg.n) {
      throw std::invalid_argument("sbm blocks do not sum to n");
    }
  }

  const int total = draws * cfg.batches_per_param;
  std::vector<DatasetPair> pairs(total);
  parallel_for(0, total, threads, [&](int idx) {
    const int draw = idx / cfg.batches_per_param;
    const int batch = idx % cfg.batches_per_param;
    const uint64_t stream = make_stream(StreamTag::SbmTrain, draw, batch);
    Rng rng(seed, stream);

    DatasetPair& pair = pairs[idx];
    pair.members.reserve(cfg.sample_size);
    for (int k = 0; k < cfg.sample_size; ++k) {
      pair.members.push_back(sample_sbm(params[draw], rng, cfg.max_attempts));
    }
    pair.input = sample_mean(pair.members);
    pair.target =
        sample_medoid(pair.members, Metric::AdjacencySpectral).mean;
    pair.meta.ensemble = Ensemble::Sbm;
    pair.meta.stream = stream;
    pair.meta.params.p = params[draw].p;
    pair.meta.params.q = params[draw].q;
    pair.meta.params.blocks = params[draw].block_sizes;
  });
  return pairs;
}

std::vector<DatasetPair> generate_pa_dataset(uint64_t seed,
                                             const PaGenConfig& cfg,
                                             int threads) {
  const int total = static_cast<int>(cfg.l_values.size()) * cfg.batches_per_l;
  std::vector<DatasetPair> pairs(total);
  parallel_for(0, total, threads, [&](int idx) {
    const int li = idx / cfg.batches_per_l;
    const int batch = idx % cfg.batches_per_l;
    const uint64_t stream = make_stream(StreamTag::PaTrain, li, batch);
    Rng rng(seed, stream);

    PaParams params{cfg.l_values[li], cfg.n};
    DatasetPair& pair = pairs[idx];
    pair.members.reserve(cfg.sample_size);
    for (int k = 0; k < cfg.sample_size; ++k) {
      pair.members.push_back(sample_pa(params, rng));
    }
    pair.input = sample_mean(pair.members);
    pair.target =
        sample_medoid(pair.members, Metric::LaplacianSpectral).mean;
    pair.meta.ensemble = Ensemble::Pa;
    pair.meta.stream = stream;
    pair.meta.params.l = params.l;
  });
  return pairs;
}

TrainResult train_variant(const std::vector<DatasetPair>& data,
                          const TrainConfig& cfg) {
  if (data.empty()) {
    throw std::invalid_argument("train_variant: empty dataset");
  }
  if (cfg.epochs < 1 || cfg.batch_size < 1) {
    throw std::invalid_argument("train_variant: epochs and batch size must be >= 1");
  }
  const int count = static_cast<int>(data.size());

  std::vector<Tensor3> inputs(count);
  std::vector<Tensor3> targets(count);
  for (int i = 0; i < count; ++i) {
    inputs[i] = matrix_to_tensor(data[i].input);
    targets[i] = graph_to_tensor(data[i].target);
  }

  TrainResult result;
  result.params = init_params<float>(make_unet_arch(cfg.base_channels),
                                     {cfg.seed, make_stream(StreamTag::Init)});
  result.state = make_adam_state(result.params, cfg.adam);

  Rng shuffle_rng(cfg.seed, make_stream(StreamTag::Shuffle));
  std::vector<int> order(count);
  std::vector<Gradients> slot_grads(cfg.batch_size);
  std::vector<double> slot_loss(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = 0; i < count; ++i) order[i] = i;
    fisher_yates(order, shuffle_rng);

    double epoch_loss = 0.0;
    for (int start = 0; start < count; start += cfg.batch_size) {
      const int batch = std::min(cfg.batch_size, count - start);
      parallel_for(0, batch, cfg.threads, [&](int s) {
        const int sample = order[start + s];
        ForwardCache cache;
        const Tensor3 pred = forward(result.params, inputs[sample], &cache);
        auto [loss, grad] = bce_loss(pred, targets[sample]);
        slot_loss[s] = loss;
        slot_grads[s] = backward(result.params, cache, grad);
      });

      // Average per-sample gradients in slot order so the result does not
      // depend on the number of worker threads.
      Gradients total = std::move(slot_grads[0]);
      for (int s = 1; s < batch; ++s) {
        for (size_t f = 0; f < total.convs.size(); ++f) {
          auto& tw = total.convs[f];
          const auto& sw = slot_grads[s].convs[f];
          for (size_t p = 0; p < tw.w.size(); ++p) tw.w[p] += sw.w[p];
          for (size_t p = 0; p < tw.b.size(); ++p) tw.b[p] += sw.b[p];
        }
      }
      const float inv = 1.0f / static_cast<float>(batch);
      for (auto& f : total.convs) {
        for (float& w : f.w) w *= inv;
        for (float& b : f.b) b *= inv;
      }
      adam_step(&result.params, total, &result.state);
      for (int s = 0; s < batch; ++s) epoch_loss += slot_loss[s];
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(count));
  }
  return result;
}

Graph output_to_graph(const Tensor3& raw, double threshold) {
  if (raw.h != raw.w || raw.c != 1) {
    throw std::invalid_argument("output_to_graph: expected square h x w x 1");
  }
  const int n = raw.h;
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (static_cast<double>(raw.at(i, j, 0)) +
                              static_cast<double>(raw.at(j, i, 0)));
      if (v > threshold) g.set_edge(i, j, true);
    }
  }
  return g;
}

Graph predict_from_mean(const ModelParams& params, const WeightedMatrix& mean,
                        double threshold) {
  return output_to_graph(forward(params, matrix_to_tensor(mean)), threshold);
}

Graph predict_frechet(const ModelParams& params,
                      const std::vector<Graph>& sample, double threshold) {
  return predict_from_mean(params, sample_mean(sample), threshold);
}

std::vector<EvalRecord> evaluate(const std::string& model,
                                 std::span<const Graph> estimates,
                                 std::span<const EvalTrial> trials,
                                 double eps_rel, double eps_kl) {
  if (estimates.size() != trials.size()) {
    throw std::invalid_argument("evaluate: misaligned estimate/trial lists");
  }
  std::vector<EvalRecord> records;
  records.reserve(trials.size());
  for (size_t t = 0; t < trials.size(); ++t) {
    const EvalTrial& trial = trials[t];
    const Graph& truth = trial.truth;
    const Graph& est = estimates[t];
    if (est.n() != truth.n()) {
      throw std::invalid_argument("evaluate: estimate size mismatch");
    }
    const int n = truth.n();
    const std::vector<double> lam_truth = adjacency_spectrum(truth).vals;
    const std::vector<double> lam_est = adjacency_spectrum(est).vals;

    EvalRecord rec;
    rec.model = model;
    rec.ensemble = trial.ensemble;
    rec.trial = static_cast<int>(t);
    rec.stream = trial.stream;
    rec.delta.resize(n);
    rec.delta_rel.resize(n);
    rec.delta_vs_mean.resize(n);
    rec.delta_vs_mean_rel.resize(n);
    for (int i = 0; i < n; ++i) {
      rec.delta[i] = std::fabs(lam_truth[i] - lam_est[i]);
      rec.delta_rel[i] =
          rec.delta[i] / std::max(std::fabs(lam_truth[i]), eps_rel);
      const double mref = trial.mean_spectrum[i];
      rec.delta_vs_mean[i] = std::fabs(lam_est[i] - mref);
      rec.delta_vs_mean_rel[i] =
          rec.delta_vs_mean[i] / std::max(std::fabs(mref), eps_rel);
    }
    rec.kl =
        kl_divergence(degree_histogram(truth), degree_histogram(est), eps_kl);
    records.push_back(std::move(rec));
  }
  return records;
}

EvalSummary summarize(std::span<const EvalRecord> records) {
  if (records.empty()) {
    throw std::invalid_argument("summarize: empty record group");
  }
  const size_t n = records[0].delta.size();
  EvalSummary s;
  s.model = records[0].model;
  s.ensemble = records[0].ensemble;
  s.trials = static_cast<int>(records.size());
  s.aade.assign(n, 0.0);
  s.apade.assign(n, 0.0);
  s.aade_vs_mean.assign(n, 0.0);
  s.apade_vs_mean.assign(n, 0.0);
  for (const EvalRecord& r : records) {
    if (r.model != s.model || r.ensemble != s.ensemble ||
        r.delta.size() != n) {
      throw std::invalid_argument("summarize: mixed record group");
    }
    for (size_t i = 0; i < n; ++i) {
      s.aade[i] += r.delta[i];
      s.apade[i] += r.delta_rel[i];
      s.aade_vs_mean[i] += r.delta_vs_mean[i];
      s.apade_vs_mean[i] += r.delta_vs_mean_rel[i];
    }
    s.kl_mean += r.kl;
  }
  const double inv = 1.0 / static_cast<double>(records.size());
  for (size_t i = 0; i < n; ++i) {
    s.aade[i] *= inv;
    s.apade[i] *= inv;
    s.aade_vs_mean[i] *= inv;
    s.apade_vs_mean[i] *= inv;
  }
  s.kl_mean *= inv;
  for (const EvalRecord& r : records) {
    const double d = r.kl - s.kl_mean;
    s.kl_var += d * d;
  }
  s.kl_var *= inv;
  return s;
}

std::vector<EvalTrial> make_test_trials(Ensemble e,
                                        const BenchmarkConfig& cfg) {
  std::vector<EvalTrial> trials(cfg.trials);
  const StreamTag tag = e == Ensemble::Ier   ? StreamTag::IerTest
                        : e == Ensemble::Sbm ? StreamTag::SbmTest
                                             : StreamTag::PaTest;
  parallel_for(0, cfg.trials, cfg.threads, [&](int t) {
    const uint64_t stream = make_stream(tag, 0, static_cast<uint64_t>(t));
    Rng rng(cfg.seed, stream);
    std::vector<Graph> members;
    members.reserve(cfg.sample_size);
    Graph truth;
    switch (e) {
      case Ensemble::Ier: {
        const double a = rng.next_uniform(cfg.shape_min, cfg.shape_max);
        const double b = rng.next_uniform(cfg.shape_min, cfg.shape_max);
        const IerParams params = sample_beta_P(a, b, cfg.n, rng);
        for (int k = 0; k < cfg.sample_size; ++k) {
          members.push_back(sample_ier(params, rng));
        }
        truth = closed_form_ier_mean(params.P);
        break;
      }
      case Ensemble::Sbm: {
        SbmParams params;
        params.p = rng.next_uniform(cfg.p_min, cfg.p_max);
        params.q = rng.next_uniform(cfg.q_min, cfg.q_max);
        params.block_sizes = t % 2 == 0 ? std::vector<int>{14, 14}
                                        : std::vector<int>{10, 10, 8};
        for (int k = 0; k < cfg.sample_size; ++k) {
          members.push_back(sample_sbm(params, rng, cfg.max_attempts));
        }
        truth = sample_medoid(members, Metric::AdjacencySpectral).mean;
        break;
      }
      case Ensemble::Pa: {
        const int l = cfg.l_values[t % cfg.l_values.size()];
        const PaParams params{l, cfg.n};
        for (int k = 0; k < cfg.sample_size; ++k) {
          members.push_back(sample_pa(params, rng));
        }
        truth = sample_medoid(members, Metric::LaplacianSpectral).mean;
        break;
      }
    }
    EvalTrial& trial = trials[t];
    trial.truth = std::move(truth);
    trial.mean = sample_mean(members);
    trial.mean_spectrum = mean_member_spectrum(members);
    trial.ensemble = e;
    trial.stream = stream;
  });
  return trials;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg,
                              const std::map<std::string, ModelParams>& models) {
  static const std::vector<std::string> kModelOrder = {"ier", "sbm", "pa",
                                                       "gen", "naive"};
  for (const std::string& m : cfg.models) {
    if (std::find(kModelOrder.begin(), kModelOrder.end(), m) ==
        kModelOrder.end()) {
      throw std::invalid_argument("unknown model id: " + m);
    }
    if (m != "naive" && !models.count(m)) {
      throw std::invalid_argument("missing checkpoint for model: " + m);
    }
  }

  BenchmarkResult result;
  for (Ensemble e : cfg.ensembles) {
    const std::vector<EvalTrial> trials = make_test_trials(e, cfg);
    for (const std::string& name : kModelOrder) {
      if (std::find(cfg.models.begin(), cfg.models.end(), name) ==
          cfg.models.end()) {
        continue;
      }
      std::vector<Graph> estimates(trials.size());
      if (name == "naive") {
        for (size_t t = 0; t < trials.size(); ++t) {
          estimates[t] = threshold_half(trials[t].mean);
        }
      } else {
        const ModelParams& params = models.at(name);
        parallel_for(0, static_cast<int>(trials.size()), cfg.threads,
                     [&](int t) {
                       estimates[t] = predict_from_mean(params, trials[t].mean,
                                                        cfg.bin_threshold);
                     });
      }
      std::vector<EvalRecord> records =
          evaluate(name, estimates, trials, cfg.eps_rel, cfg.eps_kl);
      result.summaries.push_back(summarize(records));
      result.records.insert(result.records.end(),
                            std::make_move_iterator(records.begin()),
                            std::make_move_iterator(records.end()));
    }
  }

  if (!cfg.report_dir.empty()) {
    write_reports(cfg.report_dir, result.records, result.summaries);
  }
  return result;
}

}  // namespace fgl
