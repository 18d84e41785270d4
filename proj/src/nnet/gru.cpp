#include <cmath>
#include <stdexcept>

#include "cadoc/nnet.hpp"
#include "detail.hpp"

namespace cadoc::nnet {

GruModel::GruModel(std::size_t timesteps, std::size_t input_dim, std::size_t output_dim, std::size_t hidden,
                   double dropout)
    : AuxModel(timesteps, input_dim, output_dim), hidden_(hidden), dropout_(dropout) {
  if (hidden == 0) throw std::invalid_argument("gru: hidden size must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("gru: dropout must be in [0, 1)");
  const auto h = static_cast<Eigen::Index>(hidden);
  const auto d = static_cast<Eigen::Index>(input_dim);
  params_.resize(kCount);
  for (Param w : {kWz, kWr, kW}) params_[w] = Matrix::Zero(h, d);
  for (Param u : {kUz, kUr, kU}) params_[u] = Matrix::Zero(h, h);
  for (Param b : {kBz, kBr, kB}) params_[b] = Matrix::Zero(h, 1);
  params_[kDense] = Matrix::Zero(static_cast<Eigen::Index>(output_dim), h);
  params_[kDenseBias] = Matrix::Zero(static_cast<Eigen::Index>(output_dim), 1);
}

AuxModelConfig GruModel::config() const {
  AuxModelConfig cfg;
  cfg.arch = Architecture::kGru;
  cfg.timesteps = timesteps_;
  cfg.input_dim = input_dim_;
  cfg.output_dim = output_dim_;
  cfg.gru_hidden = hidden_;
  cfg.dropout = dropout_;
  return cfg;
}

void GruModel::initialize(Rng& rng) {
  for (Param w : {kWz, kWr, kW}) detail::glorot_uniform(params_[w], input_dim_, hidden_, rng);
  for (Param u : {kUz, kUr, kU}) detail::orthogonal(params_[u], rng);
  for (Param b : {kBz, kBr, kB}) params_[b].setZero();
  detail::glorot_uniform(params_[kDense], hidden_, output_dim_, rng);
  params_[kDenseBias].setZero();
}

GruTrace gru_forward(const Sequence& seq, const GruModel& model) {
  if (static_cast<std::size_t>(seq.cols()) != model.input_dim()) {
    throw std::invalid_argument("gru_forward: input dimension mismatch");
  }
  using P = GruModel::Param;
  const auto steps = static_cast<std::size_t>(seq.rows());
  GruTrace trace;
  trace.h.reserve(steps + 1);
  trace.z.reserve(steps);
  trace.r.reserve(steps);
  trace.candidate.reserve(steps);
  trace.h.push_back(Vector::Zero(static_cast<Eigen::Index>(model.hidden())));

  for (std::size_t t = 0; t < steps; ++t) {
    const Vector x = seq.row(static_cast<Eigen::Index>(t)).transpose();
    const Vector& prev = trace.h.back();
    Vector z = detail::logistic(model.param(P::kWz) * x + model.param(P::kUz) * prev + model.param(P::kBz).col(0));
    Vector r = detail::logistic(model.param(P::kWr) * x + model.param(P::kUr) * prev + model.param(P::kBr).col(0));
    const Vector gated = r.cwiseProduct(prev);
    Vector cand = (model.param(P::kW) * x + model.param(P::kU) * gated + model.param(P::kB).col(0))
                      .array()
                      .tanh()
                      .matrix();
    Vector h = z.cwiseProduct(prev) + (Vector::Ones(z.size()) - z).cwiseProduct(cand);
    trace.z.push_back(std::move(z));
    trace.r.push_back(std::move(r));
    trace.candidate.push_back(std::move(cand));
    trace.h.push_back(std::move(h));
  }
  return trace;
}

Vector GruModel::forward(const Sequence& seq) const {
  const GruTrace trace = gru_forward(seq, *this);
  return params_[kDense] * trace.h.back() + params_[kDenseBias].col(0);
}

double GruModel::backward(const Sequence& seq, const Vector& target, ParameterList& grads,
                          Rng* dropout_rng) const {
  const GruTrace trace = gru_forward(seq, *this);
  const auto h = static_cast<Eigen::Index>(hidden_);

  // Inverted dropout on the dense-layer input.
  Vector mask = Vector::Ones(h);
  if (dropout_rng != nullptr && dropout_ > 0.0) {
    const double scale = 1.0 / (1.0 - dropout_);
    for (Eigen::Index i = 0; i < h; ++i) mask(i) = dropout_rng->uniform() < dropout_ ? 0.0 : scale;
  }
  const Vector last = trace.h.back().cwiseProduct(mask);
  const Vector pred = params_[kDense] * last + params_[kDenseBias].col(0);
  Vector grad_pred;
  const double loss = cosine_distance_loss(pred, target, grad_pred);

  grads[kDense].noalias() += grad_pred * last.transpose();
  grads[kDenseBias].col(0) += grad_pred;
  Vector dh = (params_[kDense].transpose() * grad_pred).cwiseProduct(mask);

  for (std::size_t t = seq.rows(); t-- > 0;) {
    const Vector x = seq.row(static_cast<Eigen::Index>(t)).transpose();
    const Vector& prev = trace.h[t];
    const Vector& z = trace.z[t];
    const Vector& r = trace.r[t];
    const Vector& cand = trace.candidate[t];

    const Vector d_cand_pre = dh.cwiseProduct(Vector::Ones(h) - z).cwiseProduct(
        Vector::Ones(h) - cand.cwiseProduct(cand));
    const Vector d_z_pre = dh.cwiseProduct(prev - cand).cwiseProduct(z.cwiseProduct(Vector::Ones(h) - z));
    const Vector gated = r.cwiseProduct(prev);
    const Vector d_gated = params_[kU].transpose() * d_cand_pre;
    const Vector d_r_pre = d_gated.cwiseProduct(prev).cwiseProduct(r.cwiseProduct(Vector::Ones(h) - r));

    grads[kW].noalias() += d_cand_pre * x.transpose();
    grads[kU].noalias() += d_cand_pre * gated.transpose();
    grads[kB].col(0) += d_cand_pre;
    grads[kWz].noalias() += d_z_pre * x.transpose();
    grads[kUz].noalias() += d_z_pre * prev.transpose();
    grads[kBz].col(0) += d_z_pre;
    grads[kWr].noalias() += d_r_pre * x.transpose();
    grads[kUr].noalias() += d_r_pre * prev.transpose();
    grads[kBr].col(0) += d_r_pre;

    Vector d_prev = dh.cwiseProduct(z) + d_gated.cwiseProduct(r);
    d_prev.noalias() += params_[kUz].transpose() * d_z_pre;
    d_prev.noalias() += params_[kUr].transpose() * d_r_pre;
    dh = std::move(d_prev);
  }
  return loss;
}

}  // namespace cadoc::nnet
