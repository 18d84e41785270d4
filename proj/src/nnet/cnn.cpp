#include <algorithm>
#include <stdexcept>

#include "cadoc/nnet.hpp"
#include "detail.hpp"

namespace cadoc::nnet {

CnnModel::CnnModel(std::size_t timesteps, std::size_t input_dim, std::size_t output_dim,
                   std::vector<std::size_t> widths, std::size_t kernels)
    : AuxModel(timesteps, input_dim, output_dim), widths_(std::move(widths)), kernels_(kernels) {
  if (widths_.empty() || kernels_ == 0) throw std::invalid_argument("cnn: needs at least one kernel");
  for (std::size_t w : widths_) {
    if (w == 0 || w > timesteps) {
      throw std::invalid_argument("cnn: kernel width " + std::to_string(w) + " does not fit " +
                                  std::to_string(timesteps) + " timesteps");
    }
  }
  const auto k = static_cast<Eigen::Index>(kernels_);
  for (std::size_t w : widths_) {
    params_.push_back(Matrix::Zero(k, static_cast<Eigen::Index>(w * input_dim)));
    params_.push_back(Matrix::Zero(k, 1));
  }
  params_.push_back(Matrix::Zero(static_cast<Eigen::Index>(output_dim), static_cast<Eigen::Index>(pooled_size())));
  params_.push_back(Matrix::Zero(static_cast<Eigen::Index>(output_dim), 1));
}

AuxModelConfig CnnModel::config() const {
  AuxModelConfig cfg;
  cfg.arch = Architecture::kCnn;
  cfg.timesteps = timesteps_;
  cfg.input_dim = input_dim_;
  cfg.output_dim = output_dim_;
  cfg.cnn_widths = widths_;
  cfg.cnn_kernels = kernels_;
  return cfg;
}

void CnnModel::initialize(Rng& rng) {
  for (std::size_t b = 0; b < widths_.size(); ++b) {
    detail::glorot_uniform(bank_weights(b), widths_[b] * input_dim_, widths_[b] * kernels_, rng);
    bank_bias(b).setZero();
  }
  detail::glorot_uniform(dense_weights(), pooled_size(), output_dim_, rng);
  dense_bias().setZero();
}

CnnModel::Pooled CnnModel::pool(const Sequence& seq) const {
  check_input(seq);
  Pooled pooled;
  pooled.values.resize(static_cast<Eigen::Index>(pooled_size()));
  pooled.argmax.resize(pooled_size());
  for (std::size_t b = 0; b < widths_.size(); ++b) {
    const Matrix maps = conv1d_forward(seq, widths_[b], bank_weights(b), bank_bias(b).col(0));
    for (std::size_t k = 0; k < kernels_; ++k) {
      const auto col = maps.col(static_cast<Eigen::Index>(k));
      const PoolResult best =
          global_max_pool(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
      const std::size_t f = b * kernels_ + k;
      pooled.values(static_cast<Eigen::Index>(f)) = best.value;
      pooled.argmax[f] = best.index;
    }
  }
  return pooled;
}

Vector CnnModel::forward(const Sequence& seq) const {
  const Pooled pooled = pool(seq);
  return dense_weights() * pooled.values + dense_bias().col(0);
}

double CnnModel::backward(const Sequence& seq, const Vector& target, ParameterList& grads,
                          Rng* /*dropout_rng*/) const {
  const Pooled pooled = pool(seq);
  const Vector pred = dense_weights() * pooled.values + dense_bias().col(0);
  Vector grad_pred;
  const double loss = cosine_distance_loss(pred, target, grad_pred);

  const std::size_t dense = 2 * widths_.size();
  grads[dense].noalias() += grad_pred * pooled.values.transpose();
  grads[dense + 1].col(0) += grad_pred;
  const Vector grad_pooled = dense_weights().transpose() * grad_pred;

  const auto dim = static_cast<Eigen::Index>(input_dim_);
  for (std::size_t b = 0; b < widths_.size(); ++b) {
    const auto span_len = static_cast<Eigen::Index>(widths_[b]) * dim;
    for (std::size_t k = 0; k < kernels_; ++k) {
      const std::size_t f = b * kernels_ + k;
      // ReLU is inactive at the winning position when the pooled value is 0.
      if (pooled.values(static_cast<Eigen::Index>(f)) <= 0.0) continue;
      const double g = grad_pooled(static_cast<Eigen::Index>(f));
      const Eigen::Map<const Eigen::RowVectorXd> window(
          seq.data() + static_cast<Eigen::Index>(pooled.argmax[f]) * dim, span_len);
      grads[2 * b].row(static_cast<Eigen::Index>(k)) += g * window;
      grads[2 * b + 1](static_cast<Eigen::Index>(k), 0) += g;
    }
  }
  return loss;
}

}  // namespace cadoc::nnet
