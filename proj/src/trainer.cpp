#include "monoguard/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>

#include "monoguard/csv.hpp"
#include "monoguard/errors.hpp"
#include "monoguard/parallel.hpp"
#include "monoguard/random.hpp"

namespace monoguard {

namespace {

constexpr double kDivergedLoss = 1e12;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using VectorMap = Eigen::Map<Vector>;

// Views of one layer inside a flat parameter (or gradient) buffer.
struct LayerView {
  MatrixMap w;
  VectorMap b;
  bool relu;
};

std::vector<LayerView> Views(const Network& net, double* base) {
  std::vector<LayerView> views;
  for (const Layer& layer : net.layers()) {
    const auto rows = layer.out_dim();
    const auto cols = layer.in_dim();
    MatrixMap w(base, rows, cols);
    base += rows * cols;
    VectorMap b(base, rows);
    base += rows;
    views.push_back({w, b, layer.activation == Activation::kRelu});
  }
  return views;
}

double PointLoss(double f, double y, Loss loss) {
  if (loss == Loss::kMse) return (f - y) * (f - y);
  // softplus(f) - y f, written to avoid overflow.
  return std::max(f, 0.0) - f * y + std::log1p(std::exp(-std::abs(f)));
}

double PointLossDerivative(double f, double y, Loss loss) {
  if (loss == Loss::kMse) return 2.0 * (f - y);
  return 1.0 / (1.0 + std::exp(-f)) - y;
}

Matrix InputMatrix(const LabeledDataset& data, const std::vector<std::size_t>& idx) {
  const auto d = static_cast<Eigen::Index>(data.inputs.front().size());
  Matrix x(d, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    x.col(static_cast<Eigen::Index>(c)) =
        Eigen::Map<const Vector>(data.inputs[idx[c]].data(), d);
  }
  return x;
}

std::vector<std::size_t> AllIndices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

// Batch forward and backward pass. Accumulates the gradient of
// sum_i c_i * l(f_i, y_i) into `grad` (which must be zeroed by the caller)
// where c_i = w_i / norm, and returns the same weighted sum of losses.
class Backprop {
 public:
  double Run(const std::vector<LayerView>& params, const Matrix& x,
             const LabeledDataset& data, const std::vector<std::size_t>& idx,
             double norm, Loss loss, std::vector<LayerView>* grads) {
    const std::size_t n_layers = params.size();
    acts_.resize(n_layers + 1);
    pre_.resize(n_layers);
    acts_[0] = x;
    for (std::size_t l = 0; l < n_layers; ++l) {
      pre_[l] = (params[l].w * acts_[l]).colwise() + params[l].b;
      acts_[l + 1] = params[l].relu ? Matrix(pre_[l].cwiseMax(0.0)) : pre_[l];
    }
    const Matrix& out = acts_[n_layers];
    Matrix delta(1, out.cols());
    double total = 0.0;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      const std::size_t i = idx[static_cast<std::size_t>(c)];
      const double weight = data.weight(i) / norm;
      total += weight * PointLoss(out(0, c), data.targets[i], loss);
      delta(0, c) = weight * PointLossDerivative(out(0, c), data.targets[i], loss);
    }
    if (!grads) return total;
    for (std::size_t l = n_layers; l-- > 0;) {
      if (params[l].relu) {
        delta = delta.cwiseProduct(
            (pre_[l].array() > 0.0).cast<double>().matrix());
      }
      (*grads)[l].w.noalias() += delta * acts_[l].transpose();
      (*grads)[l].b += delta.rowwise().sum();
      if (l > 0) delta = params[l].w.transpose() * delta;
    }
    return total;
  }

 private:
  std::vector<Matrix> acts_;
  std::vector<Matrix> pre_;
};

double WeightSum(const LabeledDataset& data, const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (std::size_t i : idx) s += data.weight(i);
  return s;
}

void CheckCompatible(const Network& net, const LabeledDataset& data, Loss loss) {
  if (data.empty()) throw InvalidInputError("training data is empty");
  data.Validate(net.input_dim());
  const bool logit = net.output_kind() == OutputKind::kBinaryLogit;
  if (logit != (loss == Loss::kBinaryCrossEntropy)) {
    throw InvalidInputError("loss " + ToString(loss) + " does not fit a " +
                            ToString(net.output_kind()) + " network");
  }
}

double FullLoss(const Network& net, std::vector<double>& params,
                const LabeledDataset& data, Loss loss) {
  const auto idx = AllIndices(data.size());
  const double norm = WeightSum(data, idx);
  if (norm <= 0.0) return 0.0;
  Backprop bp;
  return bp.Run(Views(net, params.data()), InputMatrix(data, idx), data, idx,
                norm, loss, nullptr);
}

}  // namespace

void TrainConfig::Validate() const {
  if (batch_size < 1) throw InvalidInputError("batch_size must be at least 1");
  if (epochs < 0) throw InvalidInputError("epochs must be non-negative");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidInputError("learning_rate must be positive");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw InvalidInputError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw InvalidInputError("adam_eps must be positive");
}

Network InitializeNetwork(const Architecture& arch, const InputBox& box,
                          OutputKind kind, std::uint64_t seed) {
  if (arch.hidden_layers < 0 || (arch.hidden_layers > 0 && arch.width < 1)) {
    throw InvalidInputError("architecture needs a non-negative layer count and positive width");
  }
  box.Validate();
  Rng rng(seed);
  std::vector<Layer> layers;
  Eigen::Index in = static_cast<Eigen::Index>(box.dim());
  for (int l = 0; l <= arch.hidden_layers; ++l) {
    const bool last = l == arch.hidden_layers;
    const Eigen::Index out = last ? 1 : arch.width;
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    Layer layer;
    layer.weights = Matrix::Zero(out, in);
    if (!last || arch.hidden_layers == 0) {
      for (Eigen::Index r = 0; r < out; ++r) {
        for (Eigen::Index c = 0; c < in; ++c) {
          layer.weights(r, c) = UniformReal(rng, -limit, limit);
        }
      }
    }
    layer.biases = Vector::Zero(out);
    if (l == 0 && !last) {
      const Vector center = 0.5 * (Eigen::Map<const Vector>(box.lower.data(), in) +
                                   Eigen::Map<const Vector>(box.upper.data(), in));
      layer.biases = -layer.weights * center;
    }
    layer.activation = last ? Activation::kLinear : Activation::kRelu;
    layers.push_back(std::move(layer));
    in = out;
  }
  return Network(std::move(layers), box, kind);
}

std::vector<double> FlattenParameters(const Network& net) {
  std::vector<double> p;
  p.reserve(net.parameter_count());
  for (const Layer& layer : net.layers()) {
    p.insert(p.end(), layer.weights.data(),
             layer.weights.data() + layer.weights.size());
    p.insert(p.end(), layer.biases.data(),
             layer.biases.data() + layer.biases.size());
  }
  return p;
}

Network WithParameters(const Network& net, std::span<const double> params) {
  if (params.size() != net.parameter_count()) {
    throw InvalidInputError("expected " + std::to_string(net.parameter_count()) +
                            " parameters, got " + std::to_string(params.size()));
  }
  std::vector<Layer> layers = net.layers();
  const double* p = params.data();
  for (Layer& layer : layers) {
    std::copy(p, p + layer.weights.size(), layer.weights.data());
    p += layer.weights.size();
    std::copy(p, p + layer.biases.size(), layer.biases.data());
    p += layer.biases.size();
  }
  return Network(std::move(layers), net.input_box(), net.output_kind());
}

double DatasetLoss(const Network& net, const LabeledDataset& data, Loss loss) {
  CheckCompatible(net, data, loss);
  std::vector<double> params = FlattenParameters(net);
  return FullLoss(net, params, data, loss);
}

std::vector<double> LossGradient(const Network& net, const LabeledDataset& data,
                                 Loss loss) {
  CheckCompatible(net, data, loss);
  std::vector<double> params = FlattenParameters(net);
  std::vector<double> grad(params.size(), 0.0);
  const auto idx = AllIndices(data.size());
  const double norm = WeightSum(data, idx);
  if (norm <= 0.0) return grad;
  std::vector<LayerView> gv = Views(net, grad.data());
  Backprop bp;
  bp.Run(Views(net, params.data()), InputMatrix(data, idx), data, idx, norm,
         loss, &gv);
  return grad;
}

Adam::Adam(std::size_t size, const TrainConfig& cfg)
    : lr_(cfg.learning_rate),
      beta1_(cfg.adam_beta1),
      beta2_(cfg.adam_beta2),
      eps_(cfg.adam_eps),
      m_(size, 0.0),
      v_(size, 0.0) {}

void Adam::Step(std::span<double> params, std::span<const double> grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

TrainResult Train(const Network& net, const LabeledDataset& data,
                  const TrainConfig& cfg) {
  cfg.Validate();
  CheckCompatible(net, data, cfg.loss);
  TrainResult result{net, {}};
  if (cfg.epochs == 0) return result;

  const auto start = std::chrono::steady_clock::now();
  std::vector<double> params = FlattenParameters(net);
  std::vector<double> grad(params.size());
  const std::vector<LayerView> pv = Views(net, params.data());
  std::vector<LayerView> gv = Views(net, grad.data());
  Adam adam(params.size(), cfg);
  Rng rng(cfg.seed);
  Backprop bp;
  std::vector<std::size_t> order = AllIndices(data.size());
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Shuffle(order, rng);
    for (std::size_t s = 0; s < order.size(); s += batch) {
      const std::vector<std::size_t> idx(
          order.begin() + static_cast<long>(s),
          order.begin() + static_cast<long>(std::min(order.size(), s + batch)));
      const double norm = WeightSum(data, idx);
      if (norm <= 0.0) continue;
      std::fill(grad.begin(), grad.end(), 0.0);
      bp.Run(pv, InputMatrix(data, idx), data, idx, norm, cfg.loss, &gv);
      adam.Step(params, grad);
    }
    const double loss = FullLoss(net, params, data, cfg.loss);
    const double elapsed = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    result.log.push_back({epoch, loss, elapsed});
    if (!std::isfinite(loss) || loss > kDivergedLoss) {
      throw TrainingDivergedError("training diverged at epoch " +
                                  std::to_string(epoch) + " (loss " +
                                  FormatNumber(loss) + ")");
    }
  }
  result.net = WithParameters(net, params);
  return result;
}

double Evaluate(const Network& net, const LabeledDataset& data, Metric metric,
                const TargetTransform& transform) {
  if (data.empty()) throw InvalidInputError("evaluation data is empty");
  data.Validate(net.input_dim());
  const bool logit = net.output_kind() == OutputKind::kBinaryLogit;
  if (logit != (metric == Metric::kAccuracy)) {
    throw InvalidInputError(
        std::string(metric == Metric::kMse ? "mse" : "accuracy") +
        " does not fit a " + ToString(net.output_kind()) + " network");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = net.EvaluateUnchecked(data.inputs[i]);
    if (metric == Metric::kMse) {
      const double e = transform.Denormalize(f) - transform.Denormalize(data.targets[i]);
      total += e * e;
    } else {
      total += (f >= 0.0) == (data.targets[i] == 1.0) ? 1.0 : 0.0;
    }
  }
  return total / static_cast<double>(data.size());
}

GridResult GridSearch(const GridSpec& grid, const LabeledDataset& data,
                      const std::vector<Fold>& folds, const GridContext& context,
                      unsigned threads) {
  if (grid.size() == 0) throw InvalidInputError("grid is empty");
  if (folds.empty()) throw InvalidInputError("grid search needs at least one fold");
  for (const TrainConfig& cfg : grid.configs) cfg.Validate();
  const bool logit = context.output_kind == OutputKind::kBinaryLogit;

  const std::size_t n_folds = folds.size();
  const std::size_t runs = grid.size() * n_folds;
  std::vector<double> errors(runs);
  std::vector<std::optional<Network>> models(runs);
  ParallelFor(
      runs,
      [&](std::size_t r) {
        const std::size_t entry = r / n_folds;
        const std::size_t f = r % n_folds;
        const Architecture& arch = grid.architectures[entry / grid.configs.size()];
        TrainConfig cfg = grid.configs[entry % grid.configs.size()];
        cfg.seed += f;
        const LabeledDataset train = data.Subset(folds[f].train);
        const Network init =
            InitializeNetwork(arch, context.box, context.output_kind, cfg.seed);
        try {
          Network net = Train(init, train, cfg).net;
          errors[r] = logit ? 1.0 - Evaluate(net, train, Metric::kAccuracy)
                            : Evaluate(net, train, Metric::kMse, context.transform);
          if (!std::isfinite(errors[r])) {
            errors[r] = std::numeric_limits<double>::infinity();
          }
          models[r] = std::move(net);
        } catch (const TrainingDivergedError&) {
          errors[r] = std::numeric_limits<double>::infinity();
        } catch (const NumericError&) {
          errors[r] = std::numeric_limits<double>::infinity();
        }
      },
      threads);

  GridResult result;
  for (std::size_t e = 0; e < grid.size(); ++e) {
    GridEntry entry;
    entry.arch = grid.architectures[e / grid.configs.size()];
    entry.cfg = grid.configs[e % grid.configs.size()];
    double sum = 0.0;
    for (std::size_t f = 0; f < n_folds; ++f) {
      entry.fold_errors.push_back(errors[e * n_folds + f]);
      sum += errors[e * n_folds + f];
    }
    entry.mean_error = sum / static_cast<double>(n_folds);
    if (e > 0 && entry.mean_error < result.entries[result.best].mean_error) {
      result.best = e;
    }
    result.entries.push_back(std::move(entry));
  }
  if (!std::isfinite(result.entries[result.best].mean_error)) {
    throw TrainingDivergedError("every grid configuration diverged");
  }
  for (std::size_t f = 0; f < n_folds; ++f) {
    result.models.push_back(*models[result.best * n_folds + f]);
  }
  return result;
}

GradientCheckResult GradientCheck(const Network& net, const LabeledDataset& data,
                                  const TrainConfig& cfg) {
  CheckCompatible(net, data, cfg.loss);
  constexpr double h = 1e-5;
  const std::vector<double> analytic = LossGradient(net, data, cfg.loss);
  std::vector<double> params = FlattenParameters(net);

  auto pattern = [&](const std::vector<double>& p) {
    const Network n = WithParameters(net, p);
    std::vector<bool> bits;
    for (const FeatureVector& x : data.inputs) {
      for (double z : Trace(n, x).preactivations) bits.push_back(z > 0.0);
    }
    return bits;
  };
  const std::vector<bool> base = pattern(params);

  GradientCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const bool flip_up = pattern(params) != base;
    const double up = FullLoss(net, params, data, cfg.loss);
    params[i] = saved - h;
    const bool flip_down = pattern(params) != base;
    const double down = FullLoss(net, params, data, cfg.loss);
    params[i] = saved;
    if (flip_up || flip_down) {
      ++result.skipped;
      continue;
    }
    const double numeric = (up - down) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-3});
    result.max_relative =
        std::max(result.max_relative, std::abs(analytic[i] - numeric) / denom);
    ++result.checked;
  }
  return result;
}

void WriteTrainingLog(std::ostream& out, const std::vector<EpochRecord>& log) {
  CsvWriter w(out);
  w.Row({"epoch", "train_loss", "wall_time"});
  for (const EpochRecord& r : log) {
    w.Row({std::to_string(r.epoch), FormatNumber(r.train_loss),
           FormatNumber(r.wall_time)});
  }
}

std::string ToString(Loss loss) {
  return loss == Loss::kMse ? "mse" : "binary-cross-entropy";
}

Loss ParseLoss(const std::string& text) {
  if (text == "mse") return Loss::kMse;
  if (text == "binary-cross-entropy" || text == "bce") {
    return Loss::kBinaryCrossEntropy;
  }
  throw InvalidInputError("unknown loss '" + text + "'");
}

}  // namespace monoguard
