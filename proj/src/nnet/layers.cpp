#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cadoc/nnet.hpp"
#include "detail.hpp"

namespace cadoc::nnet {

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::kCnn:
      return "cnn";
    case Architecture::kGru:
      return "gru";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "cnn") return Architecture::kCnn;
  if (name == "gru") return Architecture::kGru;
  throw std::invalid_argument("unknown architecture '" + std::string(name) + "' (expected cnn or gru)");
}

Sequence make_sequence(std::span<const WordId> ids, const EmbeddingTable& word_vectors,
                       std::size_t timesteps) {
  const std::size_t dim = word_vectors.dimension();
  Sequence seq = Sequence::Zero(static_cast<Eigen::Index>(timesteps), static_cast<Eigen::Index>(dim));
  std::vector<WordId> kept;
  kept.reserve(std::min(ids.size(), timesteps));
  for (WordId id : ids) {
    if (kept.size() == timesteps) break;
    if (id != kNoWord) kept.push_back(id);
  }
  const std::size_t offset = timesteps - kept.size();
  for (std::size_t t = 0; t < kept.size(); ++t) {
    const auto row = word_vectors.row(static_cast<std::size_t>(kept[t]));
    std::ranges::copy(row, seq.data() + (offset + t) * dim);
  }
  return seq;
}

double cosine_distance_loss(const Vector& pred, const Vector& target) {
  Vector unused;
  return cosine_distance_loss(pred, target, unused);
}

double cosine_distance_loss(const Vector& pred, const Vector& target, Vector& grad) {
  if (pred.size() != target.size()) throw std::invalid_argument("cosine loss: dimension mismatch");
  const double np = pred.norm();
  const double nt = target.norm();
  if (nt == 0.0) throw std::invalid_argument("cosine loss: zero-norm target");
  // A zero prediction (all units dropped or clipped) carries no direction.
  if (np == 0.0) {
    grad = Vector::Zero(pred.size());
    return 1.0;
  }
  const double cos = pred.dot(target) / (np * nt);
  // d cos / d pred = target / (|p||t|) - cos * pred / |p|^2
  grad = -(target / (np * nt) - cos * pred / (np * np));
  return 1.0 - cos;
}

Matrix conv1d_forward(const Sequence& seq, std::size_t width, const Eigen::Ref<const Matrix>& weights,
                      const Eigen::Ref<const Vector>& bias) {
  const auto steps = static_cast<std::size_t>(seq.rows());
  const auto dim = static_cast<std::size_t>(seq.cols());
  if (width == 0) throw std::invalid_argument("conv1d: zero kernel width");
  if (steps < width) {
    throw std::invalid_argument("conv1d: sequence of " + std::to_string(steps) +
                                " timesteps is shorter than kernel width " + std::to_string(width));
  }
  if (static_cast<std::size_t>(weights.cols()) != width * dim || weights.rows() != bias.size()) {
    throw std::invalid_argument("conv1d: kernel shape does not match input");
  }
  const auto positions = static_cast<Eigen::Index>(steps - width + 1);
  // Row p views timesteps p..p+width-1 as one contiguous slice; rows overlap.
  using Windows = Eigen::Map<const Sequence, Eigen::Unaligned, Eigen::OuterStride<>>;
  const Windows windows(seq.data(), positions, static_cast<Eigen::Index>(width * dim),
                        Eigen::OuterStride<>(static_cast<Eigen::Index>(dim)));
  Matrix out = windows * weights.transpose();
  out.rowwise() += bias.transpose();
  return out.cwiseMax(0.0);
}

Matrix conv1d_forward(const Sequence& seq, const ConvBank& bank) {
  return conv1d_forward(seq, bank.width, bank.weights, bank.bias);
}

PoolResult global_max_pool(std::span<const double> map) {
  if (map.empty()) throw std::invalid_argument("global_max_pool: empty feature map");
  PoolResult best{map[0], 0};
  for (std::size_t i = 1; i < map.size(); ++i) {
    if (map[i] > best.value) best = {map[i], i};
  }
  return best;
}

std::size_t AuxModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.size());
  return n;
}

ParameterList AuxModel::zero_gradients() const {
  ParameterList grads;
  grads.reserve(params_.size());
  for (const auto& p : params_) grads.push_back(Matrix::Zero(p.rows(), p.cols()));
  return grads;
}

void AuxModel::check_input(const Sequence& seq) const {
  if (static_cast<std::size_t>(seq.rows()) != timesteps_ ||
      static_cast<std::size_t>(seq.cols()) != input_dim_) {
    throw std::invalid_argument("aux model expects a " + std::to_string(timesteps_) + "x" +
                                std::to_string(input_dim_) + " sequence, got " +
                                std::to_string(seq.rows()) + "x" + std::to_string(seq.cols()));
  }
}

Vector AuxModel::predict(const Sequence& seq) const {
  check_input(seq);
  return forward(seq);
}

double AuxModel::accumulate_gradient(const Sequence& seq, const Vector& target, ParameterList& grads,
                                     Rng* dropout_rng) const {
  check_input(seq);
  if (static_cast<std::size_t>(target.size()) != output_dim_) {
    throw std::invalid_argument("aux model: target dimension mismatch");
  }
  if (grads.size() != params_.size()) throw std::invalid_argument("aux model: gradient layout mismatch");
  return backward(seq, target, grads, dropout_rng);
}

std::unique_ptr<AuxModel> make_aux_model(const AuxModelConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  switch (cfg.arch) {
    case Architecture::kCnn: {
      auto model = std::make_unique<CnnModel>(cfg.timesteps, cfg.input_dim, cfg.output_dim, cfg.cnn_widths,
                                              cfg.cnn_kernels);
      model->initialize(rng);
      return model;
    }
    case Architecture::kGru: {
      auto model = std::make_unique<GruModel>(cfg.timesteps, cfg.input_dim, cfg.output_dim, cfg.gru_hidden,
                                              cfg.dropout);
      model->initialize(rng);
      return model;
    }
  }
  throw std::invalid_argument("make_aux_model: unknown architecture");
}

namespace detail {

void glorot_uniform(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
}

void orthogonal(Matrix& m, Rng& rng) {
  Matrix gaussian(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < gaussian.size(); ++i) gaussian.data()[i] = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  // Sign fix so the result is uniformly distributed over orthogonal matrices.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < std::min(q.cols(), r.rows()); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  m = q;
}

}  // namespace detail

}  // namespace cadoc::nnet
