#include "swarmrecon/mlp.h"

#include <cmath>

#include "swarmrecon/error.h"

namespace swarmrecon {

std::string_view HeadName(Head head) {
  switch (head) {
    case Head::kLinear:
      return "linear";
    case Head::kSoftmax:
      return "softmax";
    case Head::kSigmoid:
      return "sigmoid";
  }
  return "unknown";
}

std::optional<Head> ParseHead(std::string_view name) {
  if (name == "linear") return Head::kLinear;
  if (name == "softmax") return Head::kSoftmax;
  if (name == "sigmoid") return Head::kSigmoid;
  return std::nullopt;
}

Mlp::Mlp(std::vector<int> layer_sizes, Head head)
    : layer_sizes_(std::move(layer_sizes)), head_(head) {
  if (layer_sizes_.size() < 2) {
    throw PreconditionError("an MLP needs at least input and output sizes");
  }
  for (int s : layer_sizes_) {
    if (s <= 0) throw PreconditionError("layer sizes must be positive");
  }
  ComputeOffsets();
}

void Mlp::ComputeOffsets() {
  offsets_.clear();
  Eigen::Index total = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(layer_sizes_[l + 1]) * layer_sizes_[l] +
             layer_sizes_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(total);
}

Mlp Mlp::Create(std::vector<int> layer_sizes, Head head, Rng& rng) {
  Mlp mlp(std::move(layer_sizes), head);
  for (int l = 0; l < mlp.num_layers(); ++l) {
    auto w = mlp.weight(l);
    const double fan_in = static_cast<double>(w.cols());
    if (l + 1 < mlp.num_layers()) {
      const double scale = std::sqrt(2.0 / fan_in);
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i)
          w(i, j) = scale * StandardNormal(rng);
    } else {
      const double bound = 0.01;
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i)
          w(i, j) = bound * (2.0 * Uniform01(rng) - 1.0);
    }
  }
  return mlp;
}

void Mlp::set_params(const Eigen::VectorXd& params) {
  if (params.size() != params_.size()) {
    throw PreconditionError("parameter vector has " +
                            std::to_string(params.size()) + " entries, expected " +
                            std::to_string(params_.size()));
  }
  params_ = params;
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
  return {params_.data() + offsets_[layer], layer_sizes_[layer + 1],
          layer_sizes_[layer]};
}
Eigen::Map<Eigen::MatrixXd> Mlp::weight(int layer) {
  return {params_.data() + offsets_[layer], layer_sizes_[layer + 1],
          layer_sizes_[layer]};
}
Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + offsets_[layer] +
              static_cast<Eigen::Index>(layer_sizes_[layer + 1]) * layer_sizes_[layer],
          layer_sizes_[layer + 1]};
}
Eigen::Map<Eigen::VectorXd> Mlp::bias(int layer) {
  return {params_.data() + offsets_[layer] +
              static_cast<Eigen::Index>(layer_sizes_[layer + 1]) * layer_sizes_[layer],
          layer_sizes_[layer + 1]};
}

void Mlp::CheckInput(Eigen::Index rows) const {
  if (layer_sizes_.empty()) throw PreconditionError("uninitialised MLP");
  if (rows != input_size()) {
    throw PreconditionError("input has " + std::to_string(rows) +
                            " components, network expects " +
                            std::to_string(input_size()));
  }
}

Eigen::MatrixXd LogSoftmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index k = 0; k < logits.cols(); ++k) {
    const double m = logits.col(k).maxCoeff();
    const double lse = m + std::log((logits.col(k).array() - m).exp().sum());
    out.col(k) = logits.col(k).array() - lse;
  }
  return out;
}

Eigen::MatrixXd ApplyHead(Head head, const Eigen::MatrixXd& logits) {
  switch (head) {
    case Head::kLinear:
      return logits;
    case Head::kSoftmax:
      return LogSoftmax(logits).array().exp();
    case Head::kSigmoid:
      return logits.unaryExpr([](double z) { return Sigmoid(z); });
  }
  return logits;
}

ForwardCache Mlp::ForwardBatch(const Eigen::MatrixXd& inputs) const {
  CheckInput(inputs.rows());
  ForwardCache cache;
  cache.activations.reserve(num_layers());
  cache.activations.push_back(inputs);
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z = weight(l) * cache.activations.back();
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) {
      cache.activations.push_back(z.cwiseMax(0.0));
    } else {
      cache.logits = std::move(z);
    }
  }
  cache.output = ApplyHead(head_, cache.logits);
  return cache;
}

Eigen::VectorXd Mlp::Forward(const Eigen::VectorXd& input) const {
  return ForwardBatch(input).output.col(0);
}

Eigen::VectorXd Mlp::Backward(const ForwardCache& cache,
                              const Eigen::MatrixXd& output_grad) const {
  if (output_grad.rows() != output_size() ||
      output_grad.cols() != cache.output.cols()) {
    throw PreconditionError("output gradient shape does not match the forward pass");
  }
  Eigen::MatrixXd logit_grad;
  switch (head_) {
    case Head::kLinear:
      logit_grad = output_grad;
      break;
    case Head::kSoftmax: {
      // J^T g = p * (g - <p, g>)
      const Eigen::RowVectorXd dots =
          (cache.output.array() * output_grad.array()).colwise().sum();
      logit_grad = cache.output.array() *
                   (output_grad.rowwise() - dots).array();
      break;
    }
    case Head::kSigmoid:
      logit_grad = output_grad.array() * cache.output.array() *
                   (1.0 - cache.output.array());
      break;
  }
  return BackwardLogits(cache, logit_grad);
}

Eigen::VectorXd Mlp::Backward(const Eigen::VectorXd& input,
                              const Eigen::VectorXd& output_grad) const {
  return Backward(ForwardBatch(input), output_grad);
}

Eigen::VectorXd Mlp::BackwardLogits(const ForwardCache& cache,
                                    const Eigen::MatrixXd& logit_grad) const {
  if (logit_grad.rows() != output_size() ||
      logit_grad.cols() != cache.logits.cols() ||
      static_cast<int>(cache.activations.size()) != num_layers()) {
    throw PreconditionError("logit gradient shape does not match the forward pass");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  Eigen::MatrixXd delta = logit_grad;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Eigen::MatrixXd& a = cache.activations[l];
    const Eigen::Index rows = layer_sizes_[l + 1];
    const Eigen::Index cols = layer_sizes_[l];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], rows, cols);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + rows * cols, rows);
    gw.noalias() = delta * a.transpose();
    gb = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd upstream = weight(l).transpose() * delta;
      // ReLU subgradient is 0 at 0.
      delta = (a.array() > 0.0).select(upstream, 0.0);
    }
  }
  return grad;
}

AdamState MakeAdam(const Mlp& mlp, double learning_rate) {
  AdamState s;
  s.first_moment = Eigen::VectorXd::Zero(mlp.num_params());
  s.second_moment = Eigen::VectorXd::Zero(mlp.num_params());
  s.learning_rate = learning_rate;
  return s;
}

void AdamStep(Mlp& mlp, const Eigen::VectorXd& grad, AdamState& state) {
  if (grad.size() != mlp.num_params() ||
      state.first_moment.size() != mlp.num_params()) {
    throw PreconditionError("gradient/optimizer shape does not match parameters");
  }
  if (!grad.allFinite()) {
    throw DivergenceError("non-finite gradient rejected by Adam");
  }
  state.step_count += 1;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad;
  state.second_moment = state.beta2 * state.second_moment +
                        (1.0 - state.beta2) * grad.cwiseAbs2();
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  mlp.params().array() -=
      state.learning_rate * (state.first_moment.array() / bc1) /
      ((state.second_moment.array() / bc2).sqrt() + state.epsilon);
}

double ClipGradNorm(Eigen::VectorXd& grad, double max_norm) {
  const double norm = grad.norm();
  if (max_norm > 0.0 && norm > max_norm) grad *= max_norm / norm;
  return norm;
}

}  // namespace swarmrecon
