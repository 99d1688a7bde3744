#include "hvacx/nn.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace hvacx::nn {

std::size_t Mlp::n_params() const {
  std::size_t n = 0;
  for (int l = 0; l < n_layers(); ++l) {
    n += static_cast<std::size_t>(weights[l].size()) + biases[l].size();
  }
  return n;
}

bool Mlp::all_finite() const {
  for (int l = 0; l < n_layers(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

Mlp he_init(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw ShapeError("he_init: need at least an input and an output layer");
  }
  for (int s : layer_sizes) {
    if (s < 1) throw ShapeError("he_init: layer size must be >= 1");
  }
  Mlp net;
  net.layer_sizes = layer_sizes;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double std_dev = std::sqrt(2.0 / fan_in);
    Eigen::MatrixXd w(fan_in, fan_out);
    for (int i = 0; i < fan_in; ++i) {
      for (int j = 0; j < fan_out; ++j) {
        w(i, j) = std_dev * normal(rng);
      }
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::RowVectorXd::Zero(fan_out));
  }
  return net;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input,
                        ForwardCache* cache) {
  if (input.cols() != net.input_size()) {
    throw ShapeError("forward: input width " + std::to_string(input.cols()) +
                     " != layer size " + std::to_string(net.input_size()));
  }
  if (cache) {
    cache->acts.clear();
    cache->acts.reserve(net.n_layers() + 1);
    cache->acts.push_back(input);
  }
  Eigen::MatrixXd a = input;
  for (int l = 0; l < net.n_layers(); ++l) {
    Eigen::MatrixXd z = a * net.weights[l];
    z.rowwise() += net.biases[l];
    if (l + 1 < net.n_layers()) {
      a = z.cwiseMax(0.0);  // ReLU
    } else {
      a = std::move(z);  // linear output
    }
    if (cache) cache->acts.push_back(a);
  }
  return a;
}

Gradients backward(const Mlp& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_grad) {
  const int L = net.n_layers();
  if (static_cast<int>(cache.acts.size()) != L + 1) {
    throw ShapeError("backward: cache does not match this net");
  }
  if (output_grad.rows() != cache.acts[0].rows() ||
      output_grad.cols() != net.output_size()) {
    throw ShapeError("backward: output_grad shape mismatch");
  }
  Gradients g;
  g.dw.resize(L);
  g.db.resize(L);
  Eigen::MatrixXd delta = output_grad;
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) {
      // ReLU derivative on the post-activation of layer l.
      delta = delta.cwiseProduct(
          (cache.acts[l + 1].array() > 0.0).cast<double>().matrix());
    }
    g.dw[l].noalias() = cache.acts[l].transpose() * delta;
    g.db[l] = delta.colwise().sum();
    if (l > 0) {
      delta = delta * net.weights[l].transpose();
    }
  }
  return g;
}

AdamState make_adam_state(const Mlp& net) {
  AdamState s;
  for (int l = 0; l < net.n_layers(); ++l) {
    s.m_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(),
                                          net.weights[l].cols()));
    s.v_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(),
                                          net.weights[l].cols()));
    s.m_b.push_back(Eigen::RowVectorXd::Zero(net.biases[l].size()));
    s.v_b.push_back(Eigen::RowVectorXd::Zero(net.biases[l].size()));
  }
  return s;
}

namespace {

template <typename Param, typename Grad>
void adam_update(Param& p, const Grad& g, Param& m, Param& v, double lr,
                 double b1, double b2, double eps, double bc1, double bc2) {
  m = b1 * m + (1.0 - b1) * g;
  v = b2 * v.array().matrix() + (1.0 - b2) * g.cwiseProduct(g);
  const auto m_hat = m.array() / bc1;
  const auto v_hat = v.array() / bc2;
  p.array() -= lr * m_hat / (v_hat.sqrt() + eps);
}

}  // namespace

void adam_step(Mlp& net, const Gradients& grads, AdamState& state, double lr) {
  const int L = net.n_layers();
  if (static_cast<int>(grads.dw.size()) != L) {
    throw ShapeError("adam_step: gradient layer count mismatch");
  }
  for (int l = 0; l < L; ++l) {
    if (!grads.dw[l].allFinite() || !grads.db[l].allFinite()) {
      throw NumericError("adam_step: non-finite gradient in layer " +
                         std::to_string(l));
    }
  }
  state.step_count++;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
  for (int l = 0; l < L; ++l) {
    adam_update(net.weights[l], grads.dw[l], state.m_w[l], state.v_w[l], lr,
                state.beta1, state.beta2, state.eps, bc1, bc2);
    adam_update(net.biases[l], grads.db[l], state.m_b[l], state.v_b[l], lr,
                state.beta1, state.beta2, state.eps, bc1, bc2);
  }
}

std::pair<double, Eigen::MatrixXd> mse_loss(const Eigen::MatrixXd& pred,
                                            const Eigen::MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw ShapeError("mse_loss: shape mismatch");
  }
  const double n = static_cast<double>(pred.size());
  Eigen::MatrixXd diff = pred - target;
  const double loss = diff.squaredNorm() / n;
  return {loss, (2.0 / n) * diff};
}

std::pair<double, Eigen::MatrixXd> grouped_cross_entropy(
    const Eigen::MatrixXd& logits, const std::vector<int>& group_sizes,
    const std::vector<std::vector<int>>& labels) {
  int total = 0;
  for (int g : group_sizes) {
    if (g < 1) throw ShapeError("grouped_cross_entropy: empty group");
    total += g;
  }
  if (total != logits.cols()) {
    throw ShapeError("grouped_cross_entropy: group sizes sum to " +
                     std::to_string(total) + ", logits width is " +
                     std::to_string(logits.cols()));
  }
  const int n_samples = static_cast<int>(logits.rows());
  const int n_groups = static_cast<int>(group_sizes.size());
  if (static_cast<int>(labels.size()) != n_samples) {
    throw ShapeError("grouped_cross_entropy: one label row per sample");
  }

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  double loss = 0.0;
  const double scale = 1.0 / (static_cast<double>(n_samples) * n_groups);
  for (int s = 0; s < n_samples; ++s) {
    if (static_cast<int>(labels[s].size()) != n_groups) {
      throw ShapeError("grouped_cross_entropy: one label per group");
    }
    int offset = 0;
    for (int g = 0; g < n_groups; ++g) {
      const int k = group_sizes[g];
      const int label = labels[s][g];
      if (label == kIgnoreGroup) {
        offset += k;
        continue;
      }
      if (label < 0 || label >= k) {
        throw ShapeError("grouped_cross_entropy: label out of range");
      }
      const auto row = logits.row(s).segment(offset, k);
      const double max_logit = row.maxCoeff();
      const Eigen::RowVectorXd exps = (row.array() - max_logit).exp();
      const double denom = exps.sum();
      loss -= scale * ((row(label) - max_logit) - std::log(denom));
      grad.row(s).segment(offset, k) = scale * (exps / denom);
      grad(s, offset + label) -= scale;
      offset += k;
    }
  }
  return {loss, std::move(grad)};
}

nlohmann::json to_checkpoint(const Mlp& net, const nlohmann::json& meta) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["layer_sizes"] = net.layer_sizes;
  j["meta"] = meta;
  std::vector<std::vector<double>> ws, bs;
  for (int l = 0; l < net.n_layers(); ++l) {
    ws.emplace_back(net.weights[l].data(),
                    net.weights[l].data() + net.weights[l].size());
    bs.emplace_back(net.biases[l].data(),
                    net.biases[l].data() + net.biases[l].size());
  }
  j["weights"] = std::move(ws);
  j["biases"] = std::move(bs);
  return j;
}

Mlp from_checkpoint(const nlohmann::json& ckpt, nlohmann::json* meta) {
  if (!ckpt.contains("format_version") || ckpt["format_version"] != 1) {
    throw ParseError("checkpoint: unsupported format version");
  }
  Mlp net;
  net.layer_sizes = ckpt.at("layer_sizes").get<std::vector<int>>();
  const auto& ws = ckpt.at("weights");
  const auto& bs = ckpt.at("biases");
  if (ws.size() + 1 != net.layer_sizes.size() || bs.size() != ws.size()) {
    throw ParseError("checkpoint: layer count mismatch");
  }
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const int rows = net.layer_sizes[l];
    const int cols = net.layer_sizes[l + 1];
    const auto wf = ws[l].get<std::vector<double>>();
    const auto bf = bs[l].get<std::vector<double>>();
    if (static_cast<int>(wf.size()) != rows * cols ||
        static_cast<int>(bf.size()) != cols) {
      throw ParseError("checkpoint: parameter array size mismatch in layer " +
                       std::to_string(l));
    }
    net.weights.push_back(
        Eigen::Map<const Eigen::MatrixXd>(wf.data(), rows, cols));
    net.biases.push_back(
        Eigen::Map<const Eigen::RowVectorXd>(bf.data(), cols));
  }
  if (meta) *meta = ckpt.value("meta", nlohmann::json::object());
  return net;
}

void save_checkpoint(const std::string& path, const Mlp& net,
                     const nlohmann::json& meta) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write checkpoint '" + path + "'");
  out << to_checkpoint(net, meta);
}

Mlp load_checkpoint(const std::string& path, nlohmann::json* meta) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  in >> j;
  return from_checkpoint(j, meta);
}

}  // namespace hvacx::nn
