#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "cadoc/corpus.hpp"
#include "cadoc/embedding.hpp"
#include "cadoc/random.hpp"

namespace cadoc::nnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// One timestep per row.
using Sequence = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ParameterList = std::vector<Matrix>;

enum class Architecture { kCnn, kGru };

std::string_view to_string(Architecture arch);
Architecture parse_architecture(std::string_view name);

// Word-vector sequence for a token id list: pre-padded with zero rows up to
// `timesteps`, truncated at the tail when longer. Ids equal to kNoWord are
// skipped.
Sequence make_sequence(std::span<const WordId> ids, const EmbeddingTable& word_vectors,
                       std::size_t timesteps);
// Row of the first real (non-padding) timestep for a document of `length`
// tokens.
inline std::size_t first_real_timestep(std::size_t length, std::size_t timesteps) {
  return length >= timesteps ? 0 : timesteps - length;
}

// 1 - cos(pred, target). Throws on a zero target; a zero prediction scores 1
// with a zero gradient.
double cosine_distance_loss(const Vector& pred, const Vector& target);
// Loss and its gradient with respect to pred.
double cosine_distance_loss(const Vector& pred, const Vector& target, Vector& grad);

// ---------------------------------------------------------------------------
// Convolution

// A bank of same-width kernels. Row k of `weights` is kernel k flattened
// timestep-major (width * input_dim values).
struct ConvBank {
  std::size_t width = 0;
  Matrix weights;
  Vector bias;
};

// Valid convolution followed by ReLU: one row per output position
// (T - width + 1), one column per kernel.
Matrix conv1d_forward(const Sequence& seq, const ConvBank& bank);
Matrix conv1d_forward(const Sequence& seq, std::size_t width, const Eigen::Ref<const Matrix>& weights,
                      const Eigen::Ref<const Vector>& bias);

struct PoolResult {
  double value = 0.0;
  std::size_t index = 0;
};
// Maximum and its first attaining index.
PoolResult global_max_pool(std::span<const double> map);

// ---------------------------------------------------------------------------
// Models

struct AuxModelConfig {
  Architecture arch = Architecture::kCnn;
  std::size_t timesteps = 93;
  std::size_t input_dim = 300;
  std::size_t output_dim = 300;
  std::vector<std::size_t> cnn_widths{3, 4, 5, 6, 7, 8};
  std::size_t cnn_kernels = 128;
  std::size_t gru_hidden = 512;
  double dropout = 0.5;  // GRU dense-layer input only
};

// Sequence-to-vector regressor. Parameters live in a flat list whose layout
// each architecture defines; gradients use the same layout.
class AuxModel {
 public:
  virtual ~AuxModel() = default;

  virtual Architecture architecture() const = 0;
  virtual std::unique_ptr<AuxModel> clone() const = 0;

  std::size_t timesteps() const { return timesteps_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }

  ParameterList& parameters() { return params_; }
  const ParameterList& parameters() const { return params_; }
  std::size_t parameter_count() const;
  ParameterList zero_gradients() const;

  // Inference forward pass; dropout is never applied.
  Vector predict(const Sequence& seq) const;

  // Adds d(loss)/d(params) for one example into grads and returns the loss.
  // Dropout is applied when dropout_rng is given.
  double accumulate_gradient(const Sequence& seq, const Vector& target, ParameterList& grads,
                             Rng* dropout_rng = nullptr) const;

  // Architecture hyperparameters needed to rebuild the model.
  virtual AuxModelConfig config() const = 0;

 protected:
  AuxModel(std::size_t timesteps, std::size_t input_dim, std::size_t output_dim)
      : timesteps_(timesteps), input_dim_(input_dim), output_dim_(output_dim) {}

  void check_input(const Sequence& seq) const;
  virtual Vector forward(const Sequence& seq) const = 0;
  virtual double backward(const Sequence& seq, const Vector& target, ParameterList& grads,
                          Rng* dropout_rng) const = 0;

  std::size_t timesteps_;
  std::size_t input_dim_;
  std::size_t output_dim_;
  ParameterList params_;
};

// Parameter layout: [bank0 weights, bank0 bias, bank1 weights, ..., dense
// weights (output x features), dense bias].
class CnnModel final : public AuxModel {
 public:
  CnnModel(std::size_t timesteps, std::size_t input_dim, std::size_t output_dim,
           std::vector<std::size_t> widths, std::size_t kernels);

  Architecture architecture() const override { return Architecture::kCnn; }
  std::unique_ptr<AuxModel> clone() const override { return std::make_unique<CnnModel>(*this); }
  AuxModelConfig config() const override;

  void initialize(Rng& rng);

  std::span<const std::size_t> widths() const { return widths_; }
  std::size_t kernels() const { return kernels_; }
  std::size_t pooled_size() const { return widths_.size() * kernels_; }

  Matrix& bank_weights(std::size_t b) { return params_[2 * b]; }
  const Matrix& bank_weights(std::size_t b) const { return params_[2 * b]; }
  Matrix& bank_bias(std::size_t b) { return params_[2 * b + 1]; }
  const Matrix& bank_bias(std::size_t b) const { return params_[2 * b + 1]; }
  Matrix& dense_weights() { return params_[2 * widths_.size()]; }
  const Matrix& dense_weights() const { return params_[2 * widths_.size()]; }
  Matrix& dense_bias() { return params_[2 * widths_.size() + 1]; }
  const Matrix& dense_bias() const { return params_[2 * widths_.size() + 1]; }

  struct Pooled {
    Vector values;                      // concatenated over banks
    std::vector<std::size_t> argmax;    // winning position per feature
  };
  Pooled pool(const Sequence& seq) const;

 protected:
  Vector forward(const Sequence& seq) const override;
  double backward(const Sequence& seq, const Vector& target, ParameterList& grads,
                  Rng* dropout_rng) const override;

 private:
  std::vector<std::size_t> widths_;
  std::size_t kernels_;
};

struct GruTrace {
  std::vector<Vector> h;        // h[0] = 0, h[t] after timestep t
  std::vector<Vector> z;        // update gates, index t-1 for timestep t
  std::vector<Vector> r;        // reset gates
  std::vector<Vector> candidate;
};

// Parameter layout: [Wz, Uz, bz, Wr, Ur, br, W, U, b, dense weights, dense
// bias]. Input matrices are hidden x input, recurrent ones hidden x hidden.
class GruModel final : public AuxModel {
 public:
  enum Param : std::size_t { kWz, kUz, kBz, kWr, kUr, kBr, kW, kU, kB, kDense, kDenseBias, kCount };

  GruModel(std::size_t timesteps, std::size_t input_dim, std::size_t output_dim, std::size_t hidden,
           double dropout);

  Architecture architecture() const override { return Architecture::kGru; }
  std::unique_ptr<AuxModel> clone() const override { return std::make_unique<GruModel>(*this); }
  AuxModelConfig config() const override;

  void initialize(Rng& rng);

  std::size_t hidden() const { return hidden_; }
  double dropout() const { return dropout_; }
  Matrix& param(Param p) { return params_[p]; }
  const Matrix& param(Param p) const { return params_[p]; }

 protected:
  Vector forward(const Sequence& seq) const override;
  double backward(const Sequence& seq, const Vector& target, ParameterList& grads,
                  Rng* dropout_rng) const override;

 private:
  std::size_t hidden_;
  double dropout_;
};

// z_t = s(Wz x + Uz h + bz), r_t = s(Wr x + Ur h + br),
// h~_t = tanh(W x + U (r_t * h) + b), h_t = z_t * h + (1 - z_t) * h~_t.
GruTrace gru_forward(const Sequence& seq, const GruModel& model);

std::unique_ptr<AuxModel> make_aux_model(const AuxModelConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Optimization

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamState() = default;
  explicit AdamState(const ParameterList& shapes);

  ParameterList first_moment;
  ParameterList second_moment;
  std::uint64_t step = 0;
};

void adam_step(ParameterList& params, const ParameterList& grads, AdamState& state, const AdamConfig& cfg);

struct TrainingExample {
  Sequence input;
  Vector target;
};

struct AuxTrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  AdamConfig adam;
  std::uint64_t seed = 1;
};

struct TrainingHistory {
  // Mean per-example loss seen during each epoch (dropout active).
  std::vector<double> epoch_loss;
};

// Minimizes mean cosine distance over shuffled minibatches.
TrainingHistory train_aux(AuxModel& model, std::span<const TrainingExample> examples,
                          const AuxTrainConfig& cfg);

std::unique_ptr<AuxModel> train_aux(std::span<const TrainingExample> examples,
                                    const AuxModelConfig& model_cfg, const AuxTrainConfig& cfg,
                                    TrainingHistory* history = nullptr);

double mean_loss(const AuxModel& model, std::span<const TrainingExample> examples);

// ---------------------------------------------------------------------------
// Gradient checking

// Largest |analytic - numeric| / max(|analytic| + |numeric|, 1e-6) over
// every parameter, with central differences of step epsilon. Dropout is off.
double gradient_check(AuxModel& model, const Sequence& seq, const Vector& target, double epsilon);

// Same check on a small random model of the given architecture: CNN widths
// {2,3} with 4 kernels each, or a GRU with 8 units; T = 5, D = 6.
double gradient_check(Architecture arch, double epsilon, std::uint64_t seed = 7);

// ---------------------------------------------------------------------------
// Persistence: magic, format version, architecture tag, shape fields, then
// every parameter as (rows, cols, little-endian float64 values).

void save_model(const AuxModel& model, const std::filesystem::path& path);
std::unique_ptr<AuxModel> load_model(const std::filesystem::path& path);

}  // namespace cadoc::nnet
