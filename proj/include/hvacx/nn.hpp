#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hvacx/types.hpp"

namespace hvacx::nn {

// Fully-connected net with ReLU hidden activations and a linear output layer.
// Batches are row-major: one sample per row.
struct Mlp {
  std::vector<int> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;      // [in x out] per layer
  std::vector<Eigen::RowVectorXd> biases;

  int n_layers() const { return static_cast<int>(weights.size()); }
  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t n_params() const;
  bool all_finite() const;
};

// He-normal initialization: W ~ N(0, 2/fan_in), biases zero.
Mlp he_init(const std::vector<int>& layer_sizes, std::uint64_t seed);

// Post-activation values per layer; acts[0] is the input batch, acts[L] the
// linear output. Required for backward().
struct ForwardCache {
  std::vector<Eigen::MatrixXd> acts;
};

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input,
                        ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::RowVectorXd> db;
};

// Exact gradients of the batch-mean loss given d(loss)/d(output). The cache
// must come from a forward() call on this net.
Gradients backward(const Mlp& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_grad);

struct AdamState {
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::RowVectorXd> m_b, v_b;
};

AdamState make_adam_state(const Mlp& net);

// Standard Adam with bias correction. Fails fast on non-finite gradients.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state, double lr);

// Mean squared error over all elements; returns (loss, d loss/d pred).
std::pair<double, Eigen::MatrixXd> mse_loss(const Eigen::MatrixXd& pred,
                                            const Eigen::MatrixXd& target);

// Mean over groups (and samples) of softmax cross-entropy within each logit
// group. labels[sample][group] is the in-group class index, or kIgnoreGroup
// to leave that group out of the loss and gradient.
inline constexpr int kIgnoreGroup = -1;
std::pair<double, Eigen::MatrixXd> grouped_cross_entropy(
    const Eigen::MatrixXd& logits, const std::vector<int>& group_sizes,
    const std::vector<std::vector<int>>& labels);

// Versioned JSON checkpoint: layer sizes, flat parameter arrays, and an
// arbitrary metadata object.
nlohmann::json to_checkpoint(const Mlp& net, const nlohmann::json& meta);
Mlp from_checkpoint(const nlohmann::json& ckpt, nlohmann::json* meta = nullptr);
void save_checkpoint(const std::string& path, const Mlp& net,
                     const nlohmann::json& meta);
Mlp load_checkpoint(const std::string& path, nlohmann::json* meta = nullptr);

}  // namespace hvacx::nn
