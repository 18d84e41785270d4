#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cadoc/nnet.hpp"

namespace cadoc::nnet {

AdamState::AdamState(const ParameterList& shapes) {
  first_moment.reserve(shapes.size());
  second_moment.reserve(shapes.size());
  for (const auto& p : shapes) {
    first_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
    second_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void adam_step(ParameterList& params, const ParameterList& grads, AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw std::invalid_argument("adam: parameter, gradient and moment lists differ in length");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows() != grads[i].rows() || params[i].cols() != grads[i].cols() ||
        params[i].rows() != state.first_moment[i].rows() || params[i].cols() != state.first_moment[i].cols()) {
      throw std::invalid_argument("adam: shape mismatch at parameter " + std::to_string(i));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto& g = grads[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    params[i].array() -= cfg.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
  }
}

TrainingHistory train_aux(AuxModel& model, std::span<const TrainingExample> examples,
                          const AuxTrainConfig& cfg) {
  if (examples.empty()) throw std::invalid_argument("train_aux: empty dataset");
  if (cfg.batch_size == 0) throw std::invalid_argument("train_aux: batch size must be positive");
  if (!(cfg.adam.lr > 0.0)) throw std::invalid_argument("train_aux: learning rate must be positive");

  TrainingHistory history;
  AdamState state(model.parameters());
  ParameterList grads = model.zero_gradients();
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (auto& g : grads) g.setZero();
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = examples[order[i]];
        total += model.accumulate_gradient(ex.input, ex.target, grads, &rng);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto& g : grads) g *= scale;
      adam_step(model.parameters(), grads, state, cfg.adam);
    }
    history.epoch_loss.push_back(total / static_cast<double>(examples.size()));
  }
  return history;
}

std::unique_ptr<AuxModel> train_aux(std::span<const TrainingExample> examples, const AuxModelConfig& model_cfg,
                                    const AuxTrainConfig& cfg, TrainingHistory* history) {
  if (examples.empty()) throw std::invalid_argument("train_aux: empty dataset");
  auto model = make_aux_model(model_cfg, derive_seed(cfg.seed, 0));
  auto h = train_aux(*model, examples, cfg);
  if (history != nullptr) *history = std::move(h);
  return model;
}

double mean_loss(const AuxModel& model, std::span<const TrainingExample> examples) {
  if (examples.empty()) throw std::invalid_argument("mean_loss: empty dataset");
  double total = 0.0;
  for (const auto& ex : examples) total += cosine_distance_loss(model.predict(ex.input), ex.target);
  return total / static_cast<double>(examples.size());
}

double gradient_check(AuxModel& model, const Sequence& seq, const Vector& target, double epsilon) {
  ParameterList analytic = model.zero_gradients();
  model.accumulate_gradient(seq, target, analytic, nullptr);

  double worst = 0.0;
  auto& params = model.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (Eigen::Index i = 0; i < params[p].size(); ++i) {
      double& value = params[p].data()[i];
      const double saved = value;
      value = saved + epsilon;
      const double plus = cosine_distance_loss(model.predict(seq), target);
      value = saved - epsilon;
      const double minus = cosine_distance_loss(model.predict(seq), target);
      value = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double a = analytic[p].data()[i];
      const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-6);
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

double gradient_check(Architecture arch, double epsilon, std::uint64_t seed) {
  AuxModelConfig cfg;
  cfg.arch = arch;
  cfg.timesteps = 5;
  cfg.input_dim = 6;
  cfg.output_dim = 6;
  cfg.cnn_widths = {2, 3};
  cfg.cnn_kernels = 4;
  cfg.gru_hidden = 8;
  auto model = make_aux_model(cfg, seed);
  // Randomize biases as well, so every parameter has a generic gradient.
  Rng rng(derive_seed(seed, 1));
  for (auto& p : model->parameters()) {
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = 0.5 * rng.normal();
  }
  Sequence seq(5, 6);
  for (Eigen::Index i = 0; i < seq.size(); ++i) seq.data()[i] = rng.normal();
  Vector target(6);
  for (Eigen::Index i = 0; i < target.size(); ++i) target(i) = rng.normal();
  return gradient_check(*model, seq, target, epsilon);
}

}  // namespace cadoc::nnet
