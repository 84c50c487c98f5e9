// Copyright 2026 The embed-adapt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "embed_adapt/model_file.h"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "embed_adapt/error.h"

namespace embed_adapt {
namespace {

constexpr std::array<char, 8> kLinearMagic = {'E', 'A', 'L', 'I', 'N', 'M', 'A', 'P'};
constexpr std::array<char, 8> kEnsembleMagic = {'E', 'A', 'M', 'L', 'P', 'E', 'N', 'S'};
// Upper bound on any single dimension read from disk.
constexpr std::uint64_t kMaxDim = 1u << 20;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void Bytes(const char* data, std::size_t n) {
    out_.write(data, static_cast<std::streamsize>(n));
  }
  template <typename T>
  void Int(T value) {
    static_assert(std::is_unsigned_v<T>);
    char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    }
    Bytes(bytes, sizeof(T));
  }
  void U64(std::size_t v) { Int<std::uint64_t>(v); }
  void F64(double v) { Int(std::bit_cast<std::uint64_t>(v)); }
  template <typename Derived>
  void Matrix(const Eigen::DenseBase<Derived>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) F64(m(r, c));
    }
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void Bytes(char* data, std::size_t n) {
    in_.read(data, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw DataError("model file is truncated");
    }
  }
  template <typename T>
  T Int() {
    unsigned char bytes[sizeof(T)];
    Bytes(reinterpret_cast<char*>(bytes), sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(bytes[i]) << (8 * i);
    }
    return value;
  }
  std::size_t Dim(const char* what) {
    const auto v = Int<std::uint64_t>();
    if (v == 0 || v > kMaxDim) {
      throw DataError(std::string("model file has invalid ") + what + " " +
                      std::to_string(v));
    }
    return static_cast<std::size_t>(v);
  }
  std::uint64_t U64() { return Int<std::uint64_t>(); }
  double F64() { return std::bit_cast<double>(Int<std::uint64_t>()); }
  Eigen::MatrixXd Matrix(std::size_t rows, std::size_t cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = F64();
    }
    return m;
  }
  Eigen::VectorXd Vector(std::size_t n) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = F64();
    return v;
  }
  void ExpectEnd() {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw DataError("trailing bytes after model data");
    }
  }

 private:
  std::istream& in_;
};

void ReadHeader(Reader& r, const std::array<char, 8>& magic, const char* kind) {
  std::array<char, 8> found{};
  r.Bytes(found.data(), found.size());
  if (found != magic) throw DataError(std::string("not a ") + kind + " file");
  const auto version = r.Int<std::uint32_t>();
  if (version != kModelFileVersion) {
    throw DataError(std::string("unsupported ") + kind + " version " +
                    std::to_string(version));
  }
}

template <typename Fn>
void WriteFile(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open '" + path.string() + "' for writing");
  fn(f);
  f.flush();
  if (!f) throw DataError("write to '" + path.string() + "' failed");
}

template <typename Fn>
auto ReadFile(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path.string() + "' for reading");
  try {
    return fn(f);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace

void WriteLinearMap(const LinearMap& map, std::ostream& out) {
  Writer w(out);
  w.Bytes(kLinearMagic.data(), kLinearMagic.size());
  w.Int<std::uint32_t>(kModelFileVersion);
  w.Int<std::uint8_t>(map.mode == MapMode::kLeastSquares ? 0 : 1);
  const bool centered = map.preprocess.mean_center;
  w.Int<std::uint8_t>((map.preprocess.unit_normalize ? 1 : 0) | (centered ? 2 : 0));
  w.Int<std::uint16_t>(0);
  w.U64(map.source_dim());
  w.U64(map.target_dim());
  w.Matrix(map.weights);
  if (centered) {
    if (!map.source_mean || !map.target_mean) {
      throw UsageError("centered linear map is missing its means");
    }
    w.Matrix(map.source_mean->transpose());
    w.Matrix(map.target_mean->transpose());
  }
}

LinearMap ReadLinearMap(std::istream& in) {
  Reader r(in);
  ReadHeader(r, kLinearMagic, "linear map");
  LinearMap map;
  const auto mode = r.Int<std::uint8_t>();
  if (mode > 1) throw DataError("linear map has unknown mode " + std::to_string(mode));
  map.mode = mode == 0 ? MapMode::kLeastSquares : MapMode::kOrthogonal;
  const auto flags = r.Int<std::uint8_t>();
  if (flags > 3) throw DataError("linear map has unknown flags");
  map.preprocess.unit_normalize = flags & 1;
  map.preprocess.mean_center = flags & 2;
  r.Int<std::uint16_t>();
  const std::size_t d_src = r.Dim("source dimension");
  const std::size_t d_tgt = r.Dim("target dimension");
  map.weights = r.Matrix(d_src, d_tgt);
  if (map.preprocess.mean_center) {
    map.source_mean = r.Vector(d_src);
    map.target_mean = r.Vector(d_tgt);
  }
  r.ExpectEnd();
  if (!map.weights.allFinite()) throw DataError("linear map has non-finite weights");
  return map;
}

void SaveLinearMap(const LinearMap& map, const std::filesystem::path& path) {
  WriteFile(path, [&](std::ostream& out) { WriteLinearMap(map, out); });
}

LinearMap LoadLinearMap(const std::filesystem::path& path) {
  return ReadFile(path,
                  [&](std::istream& in) { return ReadLinearMap(in); });
}

void WriteEnsemble(const MlpEnsemble& ensemble, std::ostream& out) {
  ensemble.Validate();
  Writer w(out);
  w.Bytes(kEnsembleMagic.data(), kEnsembleMagic.size());
  w.Int<std::uint32_t>(kModelFileVersion);
  w.Int<std::uint8_t>(ensemble.arch.activation == Activation::kTanh ? 0 : 1);
  w.Int<std::uint8_t>(0);
  w.Int<std::uint16_t>(0);
  w.U64(ensemble.arch.n_hidden);
  w.U64(ensemble.arch.hidden_dim);
  const TrainConfig& c = ensemble.config;
  w.U64(c.folds);
  w.U64(c.minibatch);
  w.F64(c.adam.step);
  w.F64(c.adam.beta1);
  w.F64(c.adam.beta2);
  w.F64(c.adam.epsilon);
  w.U64(c.patience);
  w.U64(c.max_epochs);
  w.F64(c.min_delta);
  w.Int<std::uint64_t>(c.seed);
  w.U64(ensemble.networks.size());
  for (const auto& net : ensemble.networks) {
    w.U64(net.layers().size());
    for (const auto& layer : net.layers()) {
      w.U64(static_cast<std::size_t>(layer.weights.rows()));
      w.U64(static_cast<std::size_t>(layer.weights.cols()));
      w.Matrix(layer.weights);
      w.Matrix(layer.bias.transpose());
    }
  }
}

MlpEnsemble ReadEnsemble(std::istream& in) {
  Reader r(in);
  ReadHeader(r, kEnsembleMagic, "MLP ensemble");
  MlpEnsemble ens;
  const auto act = r.Int<std::uint8_t>();
  if (act > 1) throw DataError("ensemble has unknown activation " + std::to_string(act));
  ens.arch.activation = act == 0 ? Activation::kTanh : Activation::kRelu;
  r.Int<std::uint8_t>();
  r.Int<std::uint16_t>();
  ens.arch.n_hidden = r.Dim("hidden layer count");
  ens.arch.hidden_dim = static_cast<std::size_t>(r.U64());
  TrainConfig& c = ens.config;
  c.folds = static_cast<std::size_t>(r.U64());
  c.minibatch = static_cast<std::size_t>(r.U64());
  c.adam.step = r.F64();
  c.adam.beta1 = r.F64();
  c.adam.beta2 = r.F64();
  c.adam.epsilon = r.F64();
  c.patience = static_cast<std::size_t>(r.U64());
  c.max_epochs = static_cast<std::size_t>(r.U64());
  c.min_delta = r.F64();
  c.seed = r.U64();
  const std::size_t k = r.Dim("network count");
  for (std::size_t n = 0; n < k; ++n) {
    const std::size_t depth = r.Dim("layer count");
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l < depth; ++l) {
      const std::size_t rows = r.Dim("layer rows");
      const std::size_t cols = r.Dim("layer columns");
      DenseLayer layer;
      layer.weights = r.Matrix(rows, cols);
      layer.bias = r.Vector(cols);
      layers.push_back(std::move(layer));
    }
    ens.networks.emplace_back(std::move(layers), ens.arch.activation);
  }
  r.ExpectEnd();
  ens.Validate();
  return ens;
}

void SaveEnsemble(const MlpEnsemble& ensemble, const std::filesystem::path& path) {
  WriteFile(path,
           [&](std::ostream& out) { WriteEnsemble(ensemble, out); });
}

MlpEnsemble LoadEnsemble(const std::filesystem::path& path) {
  return ReadFile(path,
                  [&](std::istream& in) { return ReadEnsemble(in); });
}

ModelKind DetectModelKind(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() == 8 && magic == kLinearMagic) return ModelKind::kLinearMap;
  if (in.gcount() == 8 && magic == kEnsembleMagic) return ModelKind::kEnsemble;
  throw DataError("'" + path.string() + "' is neither a linear map nor an MLP ensemble");
}

}  // namespace embed_adapt
