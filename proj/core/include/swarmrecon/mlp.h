#ifndef SWARMRECON_MLP_H_
#define SWARMRECON_MLP_H_

#include <Eigen/Dense>

#include <optional>
#include <string_view>
#include <vector>

#include "swarmrecon/rng.h"

namespace swarmrecon {

enum class Head { kLinear, kSoftmax, kSigmoid };

std::string_view HeadName(Head head);
std::optional<Head> ParseHead(std::string_view name);

// Activations of a batched forward pass; columns are samples.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // [0] is the input batch
  Eigen::MatrixXd logits;                    // last affine output
  Eigen::MatrixXd output;                    // head(logits)
};

// Feed-forward network: affine layers with ReLU between them and a head on
// the last layer. All parameters live in one flat vector; per layer the
// weight matrix (out x in, column-major) is followed by the bias.
class Mlp {
 public:
  Mlp() = default;
  // Zero-initialised parameters.
  Mlp(std::vector<int> layer_sizes, Head head);

  // He-scaled normal weights on ReLU layers, small uniform weights on the
  // head layer, zero biases.
  static Mlp Create(std::vector<int> layer_sizes, Head head, Rng& rng);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  Head head() const { return head_; }
  int input_size() const { return layer_sizes_.front(); }
  int output_size() const { return layer_sizes_.back(); }
  int num_layers() const { return static_cast<int>(layer_sizes_.size()) - 1; }
  Eigen::Index num_params() const { return params_.size(); }

  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }
  // Replaces all parameters. Throws PreconditionError on size mismatch.
  void set_params(const Eigen::VectorXd& params);

  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);

  Eigen::VectorXd Forward(const Eigen::VectorXd& input) const;
  ForwardCache ForwardBatch(const Eigen::MatrixXd& inputs) const;

  // Gradient of sum_k <output_grad_k, head(logits_k)> w.r.t. all parameters.
  Eigen::VectorXd Backward(const ForwardCache& cache,
                           const Eigen::MatrixXd& output_grad) const;
  Eigen::VectorXd Backward(const Eigen::VectorXd& input,
                           const Eigen::VectorXd& output_grad) const;
  // Same, with the gradient given w.r.t. the pre-head logits.
  Eigen::VectorXd BackwardLogits(const ForwardCache& cache,
                                 const Eigen::MatrixXd& logit_grad) const;

  bool AllFinite() const { return params_.allFinite(); }

 private:
  void ComputeOffsets();
  void CheckInput(Eigen::Index rows) const;

  std::vector<int> layer_sizes_;
  Head head_ = Head::kLinear;
  Eigen::VectorXd params_;
  std::vector<Eigen::Index> offsets_;  // start of each layer's weights
};

Eigen::MatrixXd ApplyHead(Head head, const Eigen::MatrixXd& logits);

// Column-wise log-softmax.
Eigen::MatrixXd LogSoftmax(const Eigen::MatrixXd& logits);

inline double Sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState MakeAdam(const Mlp& mlp, double learning_rate);

// Bias-corrected Adam update. A gradient containing NaN or Inf is rejected
// with DivergenceError and neither the parameters nor the state change.
void AdamStep(Mlp& mlp, const Eigen::VectorXd& grad, AdamState& state);

// Rescales `grad` in place so that its L2 norm is at most `max_norm`.
// Returns the norm before clipping.
double ClipGradNorm(Eigen::VectorXd& grad, double max_norm);

}  // namespace swarmrecon

#endif  // SWARMRECON_MLP_H_
