#include "ledits/toy_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "ledits/binary_io.hpp"
#include "ledits/rng.hpp"

namespace ledits {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXd;
using ConstMatMap = Eigen::Map<const RowMat>;
using MatMap = Eigen::Map<RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

constexpr Magic kCheckpointMagic = {'L', 'E', 'D', 'M', 'L', 'P', '\0', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

struct Offsets {
  std::size_t table = 0;
  std::size_t w[3] = {};
  std::size_t b[3] = {};
  int rows[3] = {};
  int cols[3] = {};
  std::size_t total = 0;
};

Offsets offsets_for(const MlpShape& s) {
  Offsets o;
  o.rows[0] = s.hidden;
  o.cols[0] = s.input_width();
  o.rows[1] = s.hidden;
  o.cols[1] = s.hidden;
  o.rows[2] = s.data_dim;
  o.cols[2] = s.hidden;
  std::size_t at = static_cast<std::size_t>(s.conditions + 1) * s.cond_dim;
  for (int l = 0; l < 3; ++l) {
    o.w[l] = at;
    at += static_cast<std::size_t>(o.rows[l]) * o.cols[l];
    o.b[l] = at;
    at += o.rows[l];
  }
  o.total = at;
  return o;
}

void validate_shape(const MlpShape& s) {
  if (s.data_dim < 1 || s.hidden < 1 || s.cond_dim < 0 || s.conditions < 0 || s.steps < 1 ||
      s.time_dim < 2 || s.time_dim % 2 != 0) {
    throw ParameterError("mlp: invalid layer widths");
  }
}

double sigmoid(double h) { return 1.0 / (1.0 + std::exp(-h)); }

// Column j of the returned matrix is the network input for example j.
template <typename GetX>
ColMat assemble_inputs(const MlpShape& s, std::span<const double> params, std::size_t batch,
                       GetX&& get) {
  ColMat in(s.input_width(), static_cast<Eigen::Index>(batch));
  for (std::size_t j = 0; j < batch; ++j) {
    const auto [x, t, cond] = get(j);
    const Vec tf = time_features(t, s.steps, s.time_dim);
    const auto col = static_cast<Eigen::Index>(j);
    for (int i = 0; i < s.data_dim; ++i) in(i, col) = x[i];
    for (int i = 0; i < s.time_dim; ++i) in(s.data_dim + i, col) = tf[i];
    const double* row = params.data() + static_cast<std::size_t>(cond) * s.cond_dim;
    for (int i = 0; i < s.cond_dim; ++i) in(s.data_dim + s.time_dim + i, col) = row[i];
  }
  return in;
}

struct Activations {
  ColMat input;
  ColMat pre[2];
  ColMat act[2];
  ColMat out;
};

Activations run_forward(const MlpShape& s, std::span<const double> params, ColMat input) {
  const Offsets o = offsets_for(s);
  Activations a;
  a.input = std::move(input);
  const ColMat* prev = &a.input;
  for (int l = 0; l < 2; ++l) {
    ConstMatMap w(params.data() + o.w[l], o.rows[l], o.cols[l]);
    ConstVecMap b(params.data() + o.b[l], o.rows[l]);
    a.pre[l] = (w * *prev).colwise() + b;
    a.act[l] = a.pre[l].unaryExpr([](double h) { return h * sigmoid(h); });
    prev = &a.act[l];
  }
  ConstMatMap w(params.data() + o.w[2], o.rows[2], o.cols[2]);
  ConstVecMap b(params.data() + o.b[2], o.rows[2]);
  a.out = (w * a.act[1]).colwise() + b;
  return a;
}

}  // namespace

Vec time_features(int t, int T, int width) {
  const int half = width / 2;
  const double s = static_cast<double>(t) / T;
  Vec f(width);
  for (int k = 0; k < half; ++k) {
    const double freq = half > 1 ? std::pow(100.0, static_cast<double>(k) / (half - 1)) : 1.0;
    f[2 * k] = std::sin(freq * s);
    f[2 * k + 1] = std::cos(freq * s);
  }
  return f;
}

MlpDenoiser::MlpDenoiser(MlpShape shape, std::uint64_t schedule_fingerprint)
    : shape_(shape), fingerprint_(schedule_fingerprint) {
  validate_shape(shape_);
  params_.assign(offsets_for(shape_).total, 0.0);
}

MlpDenoiser MlpDenoiser::initialized(MlpShape shape, std::uint64_t schedule_fingerprint,
                                     std::uint64_t seed) {
  MlpDenoiser m(shape, schedule_fingerprint);
  const Offsets o = offsets_for(shape);
  Rng rng(seed);
  for (std::size_t i = 0; i < o.w[0]; ++i) m.params_[i] = rng.normal();
  for (int l = 0; l < 3; ++l) {
    const double scale = std::sqrt(1.0 / o.cols[l]);
    const std::size_t n = static_cast<std::size_t>(o.rows[l]) * o.cols[l];
    for (std::size_t i = 0; i < n; ++i) m.params_[o.w[l] + i] = scale * rng.normal();
  }
  return m;
}

void MlpDenoiser::check_cond_id(int cond_id) const {
  if (cond_id < 0 || cond_id > shape_.conditions) {
    throw ParameterError("mlp: unknown condition id " + std::to_string(cond_id));
  }
}

Vec MlpDenoiser::forward(std::span<const double> x, int t, int cond_id) const {
  require_same_size(x.size(), static_cast<std::size_t>(shape_.data_dim), "mlp forward");
  check_cond_id(cond_id);
  ColMat in = assemble_inputs(shape_, params_, 1, [&](std::size_t) {
    return std::tuple<std::span<const double>, int, int>{x, t, cond_id};
  });
  const Activations a = run_forward(shape_, params_, std::move(in));
  return Vec(a.out.data(), a.out.data() + shape_.data_dim);
}

LossAndGrads loss_and_grads(const MlpDenoiser& model, const NoiseSchedule& schedule,
                            std::span<const TrainingExample> batch) {
  if (batch.empty()) throw ParameterError("loss_and_grads: empty batch");
  const MlpShape& s = model.shape();
  const auto params = model.parameters();
  const Offsets o = offsets_for(s);
  const auto B = static_cast<Eigen::Index>(batch.size());

  std::vector<Vec> noisy(batch.size());
  ColMat target(s.data_dim, B);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& ex = batch[j];
    require_same_size(ex.x0.size(), static_cast<std::size_t>(s.data_dim), "training example x0");
    require_same_size(ex.eps.size(), static_cast<std::size_t>(s.data_dim), "training example eps");
    model.check_cond_id(ex.cond_id);
    const double abar = schedule.alpha_bar(ex.t);
    noisy[j] = axpby(std::sqrt(abar), ex.x0, std::sqrt(1.0 - abar), ex.eps);
    for (int i = 0; i < s.data_dim; ++i) target(i, static_cast<Eigen::Index>(j)) = ex.eps[i];
  }
  ColMat in = assemble_inputs(s, params, batch.size(), [&](std::size_t j) {
    return std::tuple<std::span<const double>, int, int>{noisy[j], batch[j].t, batch[j].cond_id};
  });
  const Activations a = run_forward(s, params, std::move(in));

  const double norm = 1.0 / (static_cast<double>(B) * s.data_dim);
  const ColMat resid = a.out - target;
  LossAndGrads r;
  r.loss = resid.squaredNorm() * norm;
  r.grads.assign(params.size(), 0.0);

  ColMat delta = 2.0 * norm * resid;
  for (int l = 2; l >= 0; --l) {
    const ColMat& below = l == 0 ? a.input : a.act[l - 1];
    MatMap gw(r.grads.data() + o.w[l], o.rows[l], o.cols[l]);
    VecMap gb(r.grads.data() + o.b[l], o.rows[l]);
    gw = delta * below.transpose();
    gb = delta.rowwise().sum();
    ConstMatMap w(params.data() + o.w[l], o.rows[l], o.cols[l]);
    ColMat back = w.transpose() * delta;
    if (l > 0) {
      const ColMat& pre = a.pre[l - 1];
      delta = back.cwiseProduct(pre.unaryExpr([](double h) {
        const double sg = sigmoid(h);
        return sg * (1.0 + h * (1.0 - sg));
      }));
    } else {
      // Scatter the embedding part of the input gradient into the condition table.
      for (Eigen::Index j = 0; j < B; ++j) {
        double* row = r.grads.data() + static_cast<std::size_t>(batch[j].cond_id) * s.cond_dim;
        for (int i = 0; i < s.cond_dim; ++i) row[i] += back(s.data_dim + s.time_dim + i, j);
      }
    }
  }
  return r;
}

void Adam::step(std::span<double> params, std::span<const double> grads, double learning_rate) {
  require_same_size(params.size(), m_.size(), "adam params");
  require_same_size(grads.size(), m_.size(), "adam grads");
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i] * grads[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= learning_rate * mhat / (std::sqrt(vhat) + config_.eps);
  }
}

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || hidden < 1) {
    throw ParameterError("train: epochs, batch_size and hidden must be >= 1");
  }
  if (!(adam.learning_rate > 0.0) || !(adam.eps > 0.0)) {
    throw ParameterError("train: learning rate and adam eps must be positive");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ParameterError("train: adam betas must lie in [0, 1)");
  }
  if (!(condition_dropout >= 0.0 && condition_dropout <= 1.0)) {
    throw ParameterError("train: condition dropout must lie in [0, 1]");
  }
  if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0)) {
    throw ParameterError("train: final_lr_fraction must lie in (0, 1]");
  }
}

TrainResult train(const LabeledDataset& data, const NoiseSchedule& schedule,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (data.points.empty() || data.points.size() != data.labels.size()) {
    throw ParameterError("train: dataset empty or labels missing");
  }
  MlpShape shape;
  shape.data_dim = static_cast<int>(data.points.front().size());
  shape.hidden = config.hidden;
  shape.conditions = data.conditions;
  shape.steps = schedule.steps();

  TrainResult result{MlpDenoiser::initialized(shape, schedule.beta_fingerprint(),
                                              mix_seed(config.seed, 0)),
                     {}};
  MlpDenoiser& model = result.model;
  Adam adam(config.adam, model.parameters().size());
  Rng rng(mix_seed(config.seed, 1));

  const std::size_t n = data.points.size();
  const std::size_t batches_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const double total_steps = static_cast<double>(batches_per_epoch) * config.epochs;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainingExample> batch;
  long step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t idx = order[i];
        TrainingExample ex;
        ex.x0 = data.points[idx];
        ex.t = rng.uniform_int(1, schedule.steps());
        ex.eps = rng.normal_vec(ex.x0.size());
        ex.cond_id = rng.uniform() < config.condition_dropout ? model.unconditional_id()
                                                               : data.labels[idx];
        batch.push_back(std::move(ex));
      }
      LossAndGrads lg = loss_and_grads(model, schedule, batch);
      if (!std::isfinite(lg.loss)) {
        throw DivergenceError("train: loss became non-finite at epoch " + std::to_string(epoch) +
                              ", step " + std::to_string(step) + "; lower the learning rate");
      }
      const double progress = static_cast<double>(step) / total_steps;
      const double lr =
          config.adam.learning_rate * (1.0 - (1.0 - config.final_lr_fraction) * progress);
      adam.step(model.parameters(), lg.grads, lr);
      loss_sum += lg.loss * static_cast<double>(end - start);
      ++step;
    }
    const double epoch_loss = loss_sum / static_cast<double>(n);
    result.epoch_losses.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  for (double p : model.parameters()) {
    if (!std::isfinite(p)) throw DivergenceError("train: parameters became non-finite");
  }
  return result;
}

void save_checkpoint(const std::filesystem::path& path, const MlpDenoiser& model) {
  const MlpShape& s = model.shape();
  BinaryWriter w(path);
  w.magic(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(s.time_dim));
  w.u32(static_cast<std::uint32_t>(s.cond_dim));
  w.u32(static_cast<std::uint32_t>(s.conditions));
  w.u32(static_cast<std::uint32_t>(s.steps));
  w.u64(model.schedule_fingerprint());
  // Dense layer widths: input, hidden, hidden, output.
  w.u32(4);
  w.u32(static_cast<std::uint32_t>(s.input_width()));
  w.u32(static_cast<std::uint32_t>(s.hidden));
  w.u32(static_cast<std::uint32_t>(s.hidden));
  w.u32(static_cast<std::uint32_t>(s.data_dim));
  w.f64s(model.parameters());
  w.finish();
}

MlpDenoiser load_checkpoint(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic(kCheckpointMagic, "model checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CompatibilityError("unsupported checkpoint version " + std::to_string(version));
  }
  MlpShape s;
  s.time_dim = static_cast<int>(r.u32());
  s.cond_dim = static_cast<int>(r.u32());
  s.conditions = static_cast<int>(r.u32());
  s.steps = static_cast<int>(r.u32());
  const std::uint64_t fingerprint = r.u64();
  if (r.u32() != 4) throw CompatibilityError("checkpoint: expected 4 layer widths");
  const auto in_width = static_cast<int>(r.u32());
  s.hidden = static_cast<int>(r.u32());
  if (static_cast<int>(r.u32()) != s.hidden) {
    throw CompatibilityError("checkpoint: hidden layers must share a width");
  }
  s.data_dim = static_cast<int>(r.u32());
  if (in_width != s.input_width()) throw IoError("checkpoint: inconsistent input width");
  MlpDenoiser m(s, fingerprint);
  const std::vector<double> params = r.f64s(m.parameters().size());
  std::copy(params.begin(), params.end(), m.parameters().begin());
  r.expect_end();
  return m;
}

int MlpPredictor::cond_id(const Condition& c) const {
  if (c.is_unconditional()) return model_->unconditional_id();
  if (c.indices().size() != 1 || c.indices().front() >= model_->shape().conditions) {
    throw ParameterError("condition " + c.to_string() + " is unknown to the trained model (" +
                         std::to_string(model_->shape().conditions) + " labels)");
  }
  return c.indices().front();
}

void MlpPredictor::check_condition(const Condition& c) const { (void)cond_id(c); }

Vec MlpPredictor::predict(std::span<const double> x, int t, const Condition& c) const {
  return model_->forward(x, t, cond_id(c));
}

}  // namespace ledits
