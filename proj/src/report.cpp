#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fgl/pipeline.hpp"

namespace fgl {
namespace {

// Fixed formatting keeps report bytes identical across runs.
void append_csv(std::string& out, double x) { out += format_csv_double(x); }

const EvalSummary* find_summary(const std::vector<EvalSummary>& summaries,
                                const std::string& model, Ensemble e) {
  for (const EvalSummary& s : summaries) {
    if (s.model == model && s.ensemble == e) return &s;
  }
  return nullptr;
}

std::vector<std::string> models_present(
    const std::vector<EvalSummary>& summaries, Ensemble e) {
  static const std::vector<std::string> kOrder = {"ier", "sbm", "pa", "gen",
                                                  "naive"};
  std::vector<std::string> out;
  for (const std::string& m : kOrder) {
    if (find_summary(summaries, m, e)) out.push_back(m);
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Max/min entry of a vector restricted to the first `limit` entries;
// returns {value, 1-based index}.
std::pair<double, int> vec_max(const std::vector<double>& v, size_t limit) {
  size_t best = 0;
  for (size_t i = 1; i < std::min(v.size(), limit); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return {v[best], static_cast<int>(best) + 1};
}

std::pair<double, int> vec_min(const std::vector<double>& v, size_t limit) {
  size_t best = 0;
  for (size_t i = 1; i < std::min(v.size(), limit); ++i) {
    if (v[i] < v[best]) best = i;
  }
  return {v[best], static_cast<int>(best) + 1};
}

// Max/min rows of the per-eigenvalue error means (summary_table1/2).
std::string stats_table(const std::vector<EvalSummary>& summaries, Ensemble e,
                        bool relative, size_t limit) {
  std::string text = "model,metric,value,eig_index\n";
  for (const std::string& m : models_present(summaries, e)) {
    const EvalSummary* s = find_summary(summaries, m, e);
    const std::vector<double>& v = relative ? s->apade : s->aade;
    const char* tag = relative ? "apade" : "aade";
    const auto [maxval, maxidx] = vec_max(v, limit);
    const auto [minval, minidx] = vec_min(v, limit);
    text += m;
    text += ",max_";
    text += tag;
    text += ",";
    append_csv(text, maxval);
    text += "," + std::to_string(maxidx) + "\n";
    text += m;
    text += ",min_";
    text += tag;
    text += ",";
    append_csv(text, minval);
    text += "," + std::to_string(minidx) + "\n";
  }
  return text;
}

std::string kl_table(const std::vector<EvalSummary>& summaries, Ensemble e) {
  std::string text = "model,metric,value,eig_index\n";
  for (const std::string& m : models_present(summaries, e)) {
    const EvalSummary* s = find_summary(summaries, m, e);
    text += m + ",kl_mean,";
    append_csv(text, s->kl_mean);
    text += ",\n";
    text += m + ",kl_var,";
    append_csv(text, s->kl_var);
    text += ",\n";
  }
  return text;
}

// Truth-vs-estimate curves (curves_fig5/7/9): absolute error for the first
// 25 eigenvalues, relative error for the first 5.
std::string error_curves(const std::vector<EvalSummary>& summaries,
                         Ensemble e) {
  std::string text = "model,eig_index,mean_abs,mean_rel\n";
  for (const std::string& m : models_present(summaries, e)) {
    const EvalSummary* s = find_summary(summaries, m, e);
    const size_t abs_count = std::min<size_t>(25, s->aade.size());
    for (size_t i = 0; i < abs_count; ++i) {
      text += m + "," + std::to_string(i + 1) + ",";
      append_csv(text, s->aade[i]);
      text += ",";
      if (i < 5) append_csv(text, s->apade[i]);
      text += "\n";
    }
  }
  return text;
}

// Estimate-vs-sample-mean-spectrum curves (curves_fig6/8/10): first 5.
std::string mean_spectrum_curves(const std::vector<EvalSummary>& summaries,
                                 Ensemble e) {
  std::string text = "model,eig_index,mean_abs,mean_rel\n";
  for (const std::string& m : models_present(summaries, e)) {
    const EvalSummary* s = find_summary(summaries, m, e);
    const size_t count = std::min<size_t>(5, s->aade_vs_mean.size());
    for (size_t i = 0; i < count; ++i) {
      text += m + "," + std::to_string(i + 1) + ",";
      append_csv(text, s->aade_vs_mean[i]);
      text += ",";
      append_csv(text, s->apade_vs_mean[i]);
      text += "\n";
    }
  }
  return text;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::string format_csv_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

namespace {

// Full round-trip precision: `fgl report` must rebuild every table from
// records.csv bit-for-bit.
void append_csv_exact(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

}  // namespace

void write_reports(const std::filesystem::path& dir,
                   const std::vector<EvalRecord>& records,
                   const std::vector<EvalSummary>& summaries) {
  std::filesystem::create_directories(dir);

  // Raw per-trial records; `fgl report` can rebuild every table from these.
  {
    std::string text;
    const size_t n = records.empty() ? 0 : records[0].delta.size();
    text = "model,ensemble,trial,stream,kl";
    for (size_t i = 1; i <= n; ++i) text += ",d" + std::to_string(i);
    for (size_t i = 1; i <= n; ++i) text += ",dr" + std::to_string(i);
    for (size_t i = 1; i <= n; ++i) text += ",dm" + std::to_string(i);
    for (size_t i = 1; i <= n; ++i) text += ",dmr" + std::to_string(i);
    text += "\n";
    for (const EvalRecord& r : records) {
      text += r.model + "," + ensemble_name(r.ensemble) + "," +
              std::to_string(r.trial) + "," + std::to_string(r.stream) + ",";
      append_csv_exact(text, r.kl);
      for (const auto* vec :
           {&r.delta, &r.delta_rel, &r.delta_vs_mean, &r.delta_vs_mean_rel}) {
        for (double x : *vec) {
          text += ",";
          append_csv_exact(text, x);
        }
      }
      text += "\n";
    }
    write_file(dir / "records.csv", text);
  }

  auto has_ensemble = [&](Ensemble e) {
    return !models_present(summaries, e).empty();
  };

  if (has_ensemble(Ensemble::Ier)) {
    write_file(dir / "summary_table1.csv",
               stats_table(summaries, Ensemble::Ier, false, 28));
    write_file(dir / "summary_table2.csv",
               stats_table(summaries, Ensemble::Ier, true, 10));
    write_file(dir / "summary_table3.csv", kl_table(summaries, Ensemble::Ier));
    write_file(dir / "curves_fig5.csv", error_curves(summaries, Ensemble::Ier));
    write_file(dir / "curves_fig6.csv",
               mean_spectrum_curves(summaries, Ensemble::Ier));
  }
  if (has_ensemble(Ensemble::Sbm)) {
    write_file(dir / "summary_table4.csv", kl_table(summaries, Ensemble::Sbm));
    write_file(dir / "curves_fig7.csv", error_curves(summaries, Ensemble::Sbm));
    write_file(dir / "curves_fig8.csv",
               mean_spectrum_curves(summaries, Ensemble::Sbm));
  }
  if (has_ensemble(Ensemble::Pa)) {
    write_file(dir / "summary_table5.csv", kl_table(summaries, Ensemble::Pa));
    write_file(dir / "curves_fig9.csv", error_curves(summaries, Ensemble::Pa));
    write_file(dir / "curves_fig10.csv",
               mean_spectrum_curves(summaries, Ensemble::Pa));
  }
}

std::vector<EvalRecord> read_records_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("cannot open records file: " + file.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty records file: " + file.string());
  }
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "model") {
    throw std::runtime_error("bad records header: " + file.string());
  }
  const size_t n = (header.size() - 5) / 4;
  if (5 + 4 * n != header.size()) {
    throw std::runtime_error("bad records header: " + file.string());
  }

  std::vector<EvalRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw std::runtime_error("bad records row: " + file.string());
    }
    EvalRecord r;
    r.model = f[0];
    r.ensemble = parse_ensemble(f[1]);
    r.trial = std::stoi(f[2]);
    r.stream = std::stoull(f[3]);
    r.kl = std::stod(f[4]);
    auto read_block = [&](size_t base, std::vector<double>& out) {
      out.resize(n);
      for (size_t i = 0; i < n; ++i) out[i] = std::stod(f[base + i]);
    };
    read_block(5, r.delta);
    read_block(5 + n, r.delta_rel);
    read_block(5 + 2 * n, r.delta_vs_mean);
    read_block(5 + 3 * n, r.delta_vs_mean_rel);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace fgl
