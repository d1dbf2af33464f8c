#include <cstdio>
#include <fstream>

#include "fgl/pipeline.hpp"
#include "json.hpp"

namespace fgl {
namespace {

constexpr int kManifestSchema = 1;

std::string batch_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "batch_%06d.txt", index);
  return buf;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir,
                   const std::vector<DatasetPair>& pairs, Ensemble ensemble,
                   uint64_t seed) {
  if (pairs.empty()) {
    throw std::invalid_argument("write_dataset: no pairs");
  }
  const int n = pairs[0].input.n;
  std::filesystem::create_directories(dir / "batches");

  nlohmann::json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["ensemble"] = ensemble_name(ensemble);
  manifest["n"] = n;
  manifest["sample_size"] = static_cast<int>(pairs[0].members.size());
  manifest["pair_count"] = pairs.size();
  manifest["seed"] = seed;
  nlohmann::json meta_list = nlohmann::json::array();

  std::ofstream inputs(dir / "inputs.f32", std::ios::binary);
  std::vector<Graph> targets;
  targets.reserve(pairs.size());

  for (size_t idx = 0; idx < pairs.size(); ++idx) {
    const DatasetPair& pair = pairs[idx];
    std::vector<float> row(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        row[static_cast<size_t>(i) * n + j] =
            static_cast<float>(pair.input.at(i, j));
      }
    }
    inputs.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(row.size() * sizeof(float)));
    targets.push_back(pair.target);

    nlohmann::json meta;
    meta["index"] = idx;
    meta["stream"] = pair.meta.stream;
    switch (ensemble) {
      case Ensemble::Ier:
        meta["a"] = pair.meta.params.a;
        meta["b"] = pair.meta.params.b;
        break;
      case Ensemble::Sbm:
        meta["p"] = pair.meta.params.p;
        meta["q"] = pair.meta.params.q;
        meta["blocks"] = pair.meta.params.blocks;
        break;
      case Ensemble::Pa:
        meta["l"] = pair.meta.params.l;
        break;
    }
    meta_list.push_back(std::move(meta));

    write_graph_file(dir / "batches" / batch_file_name(static_cast<int>(idx)),
                     pair.members, n);
  }
  if (!inputs) {
    throw std::runtime_error("write failed: " + (dir / "inputs.f32").string());
  }
  manifest["pairs"] = std::move(meta_list);
  write_graph_file(dir / "targets.bin", targets, n);

  std::ofstream mf(dir / "manifest.json");
  mf << manifest.dump(2) << "\n";
  if (!mf) {
    throw std::runtime_error("write failed: " +
                             (dir / "manifest.json").string());
  }
}

Dataset read_dataset(const std::filesystem::path& dir, bool load_members) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) {
    throw std::runtime_error("missing dataset manifest: " +
                             (dir / "manifest.json").string());
  }
  nlohmann::json manifest = nlohmann::json::parse(mf);
  if (manifest.at("schema").get<int>() != kManifestSchema) {
    throw std::runtime_error("unsupported dataset schema version");
  }

  Dataset ds;
  ds.ensemble = parse_ensemble(manifest.at("ensemble").get<std::string>());
  ds.n = manifest.at("n").get<int>();
  ds.sample_size = manifest.at("sample_size").get<int>();
  ds.seed = manifest.at("seed").get<uint64_t>();
  const size_t count = manifest.at("pair_count").get<size_t>();

  std::vector<Graph> targets = read_graph_file(dir / "targets.bin");
  if (targets.size() != count) {
    throw std::runtime_error("dataset targets/manifest count mismatch");
  }

  std::ifstream inputs(dir / "inputs.f32", std::ios::binary);
  if (!inputs) {
    throw std::runtime_error("missing dataset inputs: " +
                             (dir / "inputs.f32").string());
  }

  ds.pairs.resize(count);
  const auto& meta_list = manifest.at("pairs");
  std::vector<float> row(static_cast<size_t>(ds.n) * ds.n);
  for (size_t idx = 0; idx < count; ++idx) {
    inputs.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!inputs) {
      throw std::runtime_error("dataset inputs truncated");
    }
    DatasetPair& pair = ds.pairs[idx];
    pair.input = WeightedMatrix(ds.n);
    for (size_t p = 0; p < row.size(); ++p) {
      pair.input.w[p] = static_cast<double>(row[p]);
    }
    pair.target = std::move(targets[idx]);
    pair.meta.ensemble = ds.ensemble;
    const auto& meta = meta_list.at(idx);
    pair.meta.stream = meta.at("stream").get<uint64_t>();
    switch (ds.ensemble) {
      case Ensemble::Ier:
        pair.meta.params.a = meta.at("a").get<double>();
        pair.meta.params.b = meta.at("b").get<double>();
        break;
      case Ensemble::Sbm:
        pair.meta.params.p = meta.at("p").get<double>();
        pair.meta.params.q = meta.at("q").get<double>();
        pair.meta.params.blocks = meta.at("blocks").get<std::vector<int>>();
        break;
      case Ensemble::Pa:
        pair.meta.params.l = meta.at("l").get<int>();
        break;
    }
    if (load_members) {
      pair.members = read_graph_file(
          dir / "batches" / batch_file_name(static_cast<int>(idx)));
    }
  }
  return ds;
}

}  // namespace fgl
