#include "fgl/minicnn.hpp"

#include <bit>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

namespace fgl {
namespace {

constexpr char kMagic[4] = {'F', 'G', 'L', '1'};

void put_conv_relu(std::vector<LayerDesc>& arch, int c_in, int c_out) {
  arch.push_back({LayerKind::Conv3x3Relu, 3, 3, c_in, c_out});
}

template <typename V>
void write_raw(std::ofstream& out, const V& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename V>
void write_vec(std::ofstream& out, const std::vector<V>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(V)));
}

template <typename V>
V read_raw(std::ifstream& in) {
  V value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) throw std::runtime_error("truncated checkpoint");
  return value;
}

template <typename V>
void read_vec(std::ifstream& in, std::vector<V>& values, size_t count) {
  values.resize(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(V)));
  if (!in) throw std::runtime_error("truncated checkpoint");
}

}  // namespace

std::vector<LayerDesc> make_unet_arch(int base_channels) {
  const int c1 = base_channels;
  const int c2 = 2 * base_channels;
  const int c3 = 4 * base_channels;
  std::vector<LayerDesc> arch;
  put_conv_relu(arch, 1, c1);
  put_conv_relu(arch, c1, c1);
  arch.push_back({LayerKind::MaxPool2x2, 0, 0, c1, c1});
  put_conv_relu(arch, c1, c2);
  put_conv_relu(arch, c2, c2);
  arch.push_back({LayerKind::MaxPool2x2, 0, 0, c2, c2});
  put_conv_relu(arch, c2, c3);
  put_conv_relu(arch, c3, c3);
  arch.push_back({LayerKind::Upsample2x, 0, 0, c3, c3});
  arch.push_back({LayerKind::ConcatSkip, 0, 0, c3, c3 + c2});
  put_conv_relu(arch, c3 + c2, c2);
  put_conv_relu(arch, c2, c2);
  arch.push_back({LayerKind::Upsample2x, 0, 0, c2, c2});
  arch.push_back({LayerKind::ConcatSkip, 0, 0, c2, c2 + c1});
  put_conv_relu(arch, c2 + c1, c1);
  put_conv_relu(arch, c1, c1);
  arch.push_back({LayerKind::Conv1x1Sigmoid, 1, 1, c1, 1});
  return arch;
}

void validate_arch(const std::vector<LayerDesc>& arch) {
  if (arch.empty()) throw std::runtime_error("empty architecture descriptor");
  int channels = arch.front().c_in;
  std::vector<int> skip_channels;
  for (const LayerDesc& l : arch) {
    if (l.c_in != channels) {
      throw std::runtime_error("architecture shape-chain violation");
    }
    switch (l.kind) {
      case LayerKind::Conv3x3Relu:
        if (l.kh != 3 || l.kw != 3 || l.c_out <= 0) {
          throw std::runtime_error("architecture shape-chain violation");
        }
        break;
      case LayerKind::Conv1x1Sigmoid:
        if (l.kh != 1 || l.kw != 1 || l.c_out <= 0) {
          throw std::runtime_error("architecture shape-chain violation");
        }
        break;
      case LayerKind::MaxPool2x2:
        if (l.c_out != l.c_in) {
          throw std::runtime_error("architecture shape-chain violation");
        }
        skip_channels.push_back(l.c_in);
        break;
      case LayerKind::Upsample2x:
        if (l.c_out != l.c_in) {
          throw std::runtime_error("architecture shape-chain violation");
        }
        break;
      case LayerKind::ConcatSkip: {
        if (skip_channels.empty()) {
          throw std::runtime_error("architecture shape-chain violation");
        }
        const int skip = skip_channels.back();
        skip_channels.pop_back();
        if (l.c_out != l.c_in + skip) {
          throw std::runtime_error("architecture shape-chain violation");
        }
        break;
      }
      default:
        throw std::runtime_error("unknown layer kind in descriptor");
    }
    channels = l.c_out;
  }
  if (!skip_channels.empty()) {
    throw std::runtime_error("architecture shape-chain violation");
  }
}

void save_checkpoint(const ModelParams& params, const AdamState& state,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open checkpoint for writing: " +
                             path.string());
  }
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, static_cast<uint32_t>(params.arch.size()));
  for (const LayerDesc& l : params.arch) {
    write_raw(out, static_cast<uint8_t>(l.kind));
    write_raw(out, static_cast<int32_t>(l.kh));
    write_raw(out, static_cast<int32_t>(l.kw));
    write_raw(out, static_cast<int32_t>(l.c_in));
    write_raw(out, static_cast<int32_t>(l.c_out));
  }
  for (const auto& f : params.convs) {
    write_vec(out, f.w);
    write_vec(out, f.b);
  }
  write_raw(out, static_cast<int64_t>(state.t));
  write_vec(out, state.m);
  write_vec(out, state.v);
  write_raw(out, state.hp.lr);
  write_raw(out, state.hp.beta1);
  write_raw(out, state.hp.beta2);
  write_raw(out, state.hp.eps);
  if (!out) {
    throw std::runtime_error("checkpoint write failed: " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint: " + path.string());
  }
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint version mismatch: " + path.string());
  }

  Checkpoint ck;
  const auto layer_count = read_raw<uint32_t>(in);
  ck.params.arch.reserve(layer_count);
  for (uint32_t i = 0; i < layer_count; ++i) {
    LayerDesc l;
    l.kind = static_cast<LayerKind>(read_raw<uint8_t>(in));
    l.kh = read_raw<int32_t>(in);
    l.kw = read_raw<int32_t>(in);
    l.c_in = read_raw<int32_t>(in);
    l.c_out = read_raw<int32_t>(in);
    ck.params.arch.push_back(l);
  }
  validate_arch(ck.params.arch);

  for (const LayerDesc& l : ck.params.arch) {
    if (l.kind != LayerKind::Conv3x3Relu && l.kind != LayerKind::Conv1x1Sigmoid) {
      continue;
    }
    ConvFilter<float> f;
    f.kh = l.kh;
    f.kw = l.kw;
    f.c_in = l.c_in;
    f.c_out = l.c_out;
    read_vec(in, f.w, static_cast<size_t>(l.kh) * l.kw * l.c_in * l.c_out);
    read_vec(in, f.b, static_cast<size_t>(l.c_out));
    ck.params.convs.push_back(std::move(f));
  }

  ck.state.t = read_raw<int64_t>(in);
  const size_t total = ck.params.param_count();
  read_vec(in, ck.state.m, total);
  read_vec(in, ck.state.v, total);
  ck.state.hp.lr = read_raw<double>(in);
  ck.state.hp.beta1 = read_raw<double>(in);
  ck.state.hp.beta2 = read_raw<double>(in);
  ck.state.hp.eps = read_raw<double>(in);

  in.peek();
  if (!in.eof()) {
    throw std::runtime_error("trailing data in checkpoint: " + path.string());
  }
  return ck;
}

}  // namespace fgl
