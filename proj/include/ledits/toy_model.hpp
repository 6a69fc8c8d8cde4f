#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ledits/predictor.hpp"
#include "ledits/schedule.hpp"
#include "ledits/vec.hpp"

namespace ledits {

// Layer widths of the denoiser: [x | time features | condition embedding] -> hidden ->
// hidden -> x. Condition ids 0..conditions-1 are labels; id `conditions` is unconditional.
struct MlpShape {
  int data_dim = 2;
  int hidden = 128;
  int time_dim = 16;
  int cond_dim = 8;
  int conditions = 1;
  int steps = 100;  // T, used to normalize the time feature t / T

  int input_width() const { return data_dim + time_dim + cond_dim; }
  bool operator==(const MlpShape&) const = default;
};

// Sinusoidal features of t / T: sin and cos at time_dim / 2 log-spaced frequencies.
Vec time_features(int t, int T, int width);

class MlpDenoiser {
 public:
  // All parameters zero.
  MlpDenoiser(MlpShape shape, std::uint64_t schedule_fingerprint);
  // Scaled-normal init of weights, zero biases, N(0, 1) condition table.
  static MlpDenoiser initialized(MlpShape shape, std::uint64_t schedule_fingerprint,
                                 std::uint64_t seed);

  const MlpShape& shape() const { return shape_; }
  std::uint64_t schedule_fingerprint() const { return fingerprint_; }
  int unconditional_id() const { return shape_.conditions; }

  // Flat parameter vector: condition table (row-major), then per dense layer
  // W (row-major, out x in) followed by b.
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  // Throws ParameterError on an unknown condition id or wrong input size.
  Vec forward(std::span<const double> x, int t, int cond_id) const;

  void check_cond_id(int cond_id) const;

 private:
  MlpShape shape_;
  std::uint64_t fingerprint_;
  std::vector<double> params_;
};

// One term of the epsilon-matching objective: the model sees
// sqrt(abar_t) x0 + sqrt(1 - abar_t) eps and should output eps.
struct TrainingExample {
  Vec x0;
  int t = 1;
  Vec eps;
  int cond_id = 0;
};

struct LossAndGrads {
  double loss = 0.0;
  std::vector<double> grads;  // same layout as MlpDenoiser::parameters()
};

// Mean over the batch and coordinates of squared error, with gradients by backprop.
LossAndGrads loss_and_grads(const MlpDenoiser& model, const NoiseSchedule& schedule,
                            std::span<const TrainingExample> batch);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(AdamConfig config, std::size_t n) : config_(config), m_(n, 0.0), v_(n, 0.0) {}
  void step(std::span<double> params, std::span<const double> grads, double learning_rate);
  void step(std::span<double> params, std::span<const double> grads) {
    step(params, grads, config_.learning_rate);
  }
  long steps_taken() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 128;
  AdamConfig adam;
  // Learning rate decays linearly to learning_rate * final_lr_fraction over training.
  double final_lr_fraction = 1.0;
  std::uint64_t seed = 0;
  double condition_dropout = 0.1;
  int hidden = 128;

  void validate() const;
};

struct LabeledDataset {
  std::vector<Vec> points;
  std::vector<int> labels;
  int conditions = 1;  // labels lie in [0, conditions)
};

struct TrainResult {
  MlpDenoiser model;
  std::vector<double> epoch_losses;  // index i is epoch i + 1
};

using EpochCallback = std::function<void(int epoch, double loss)>;

// Deterministic in (dataset, schedule, config). Throws DivergenceError on a non-finite loss.
TrainResult train(const LabeledDataset& data, const NoiseSchedule& schedule,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

void save_checkpoint(const std::filesystem::path& path, const MlpDenoiser& model);
MlpDenoiser load_checkpoint(const std::filesystem::path& path);

// NoisePredictor over a trained denoiser. Subset conditions must be singletons {k}
// with k a trained label.
class MlpPredictor final : public NoisePredictor {
 public:
  explicit MlpPredictor(std::shared_ptr<const MlpDenoiser> model) : model_(std::move(model)) {}

  Vec predict(std::span<const double> x, int t, const Condition& c) const override;
  std::size_t dimension() const override { return model_->shape().data_dim; }
  void check_condition(const Condition& c) const override;
  std::uint64_t schedule_fingerprint() const override { return model_->schedule_fingerprint(); }

  int cond_id(const Condition& c) const;
  const MlpDenoiser& model() const { return *model_; }

 private:
  std::shared_ptr<const MlpDenoiser> model_;
};

}  // namespace ledits
