#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "cadoc/nnet.hpp"

namespace cadoc::nnet {

namespace {

constexpr char kMagic[8] = {'C', 'A', 'D', 'O', 'C', 'A', 'U', 'X'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
  }
  template <typename T>
  void put(T value) {
    value = to_little(value);
    out_.write(reinterpret_cast<const char*>(&value), sizeof value);
  }
  void bytes(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("error writing " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw std::runtime_error("cannot open " + path.string());
  }
  template <typename T>
  T get() {
    T value;
    in_.read(reinterpret_cast<char*>(&value), sizeof value);
    if (!in_) throw std::runtime_error(path_.string() + ": truncated model file");
    return to_little(value);
  }
  void bytes(char* data, std::size_t n) {
    in_.read(data, static_cast<std::streamsize>(n));
    if (!in_) throw std::runtime_error(path_.string() + ": truncated model file");
  }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

}  // namespace

void save_model(const AuxModel& model, const std::filesystem::path& path) {
  const AuxModelConfig cfg = model.config();
  Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(cfg.arch == Architecture::kCnn ? 0 : 1);
  w.put<std::uint64_t>(cfg.timesteps);
  w.put<std::uint64_t>(cfg.input_dim);
  w.put<std::uint64_t>(cfg.output_dim);
  w.put<std::uint64_t>(cfg.cnn_widths.size());
  for (auto width : cfg.cnn_widths) w.put<std::uint64_t>(width);
  w.put<std::uint64_t>(cfg.cnn_kernels);
  w.put<std::uint64_t>(cfg.gru_hidden);
  w.put<double>(cfg.dropout);
  const auto& params = model.parameters();
  w.put<std::uint64_t>(params.size());
  for (const auto& p : params) {
    w.put<std::uint64_t>(static_cast<std::uint64_t>(p.rows()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(p.cols()));
    for (Eigen::Index i = 0; i < p.size(); ++i) w.put<double>(p.data()[i]);
  }
  w.finish();
}

std::unique_ptr<AuxModel> load_model(const std::filesystem::path& path) {
  Reader r(path);
  char magic[sizeof kMagic];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error(path.string() + ": not an aux model file");
  }
  if (const auto version = r.get<std::uint32_t>(); version != kVersion) {
    throw std::runtime_error(path.string() + ": unsupported model format version " + std::to_string(version));
  }
  AuxModelConfig cfg;
  const auto tag = r.get<std::uint32_t>();
  if (tag > 1) throw std::runtime_error(path.string() + ": unknown architecture tag");
  cfg.arch = tag == 0 ? Architecture::kCnn : Architecture::kGru;
  cfg.timesteps = r.get<std::uint64_t>();
  cfg.input_dim = r.get<std::uint64_t>();
  cfg.output_dim = r.get<std::uint64_t>();
  cfg.cnn_widths.resize(r.get<std::uint64_t>());
  for (auto& width : cfg.cnn_widths) width = r.get<std::uint64_t>();
  cfg.cnn_kernels = r.get<std::uint64_t>();
  cfg.gru_hidden = r.get<std::uint64_t>();
  cfg.dropout = r.get<double>();

  std::unique_ptr<AuxModel> model;
  if (cfg.arch == Architecture::kCnn) {
    model = std::make_unique<CnnModel>(cfg.timesteps, cfg.input_dim, cfg.output_dim, cfg.cnn_widths, cfg.cnn_kernels);
  } else {
    model = std::make_unique<GruModel>(cfg.timesteps, cfg.input_dim, cfg.output_dim, cfg.gru_hidden, cfg.dropout);
  }
  auto& params = model->parameters();
  if (r.get<std::uint64_t>() != params.size()) throw std::runtime_error(path.string() + ": parameter count mismatch");
  for (auto& p : params) {
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (rows != static_cast<std::uint64_t>(p.rows()) || cols != static_cast<std::uint64_t>(p.cols())) {
      throw std::runtime_error(path.string() + ": parameter shape mismatch");
    }
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = r.get<double>();
  }
  return model;
}

}  // namespace cadoc::nnet
