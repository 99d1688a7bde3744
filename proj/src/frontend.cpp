#include "hvacx/frontend.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "hvacx/inverse.hpp"

namespace hvacx {

namespace {
const std::vector<int> kFrontendLayers = {10, 128, 256, 256, 256, 400, 22};
}

int encode_delta_bin(double dt, double b, int h) {
  if (!std::isfinite(dt)) {
    throw NumericError("encode_delta_bin: non-finite temperature change");
  }
  if (b <= 0 || h < 1) {
    throw ValidationError("encode_delta_bin: need b > 0 and h >= 1");
  }
  if (dt <= -b) return 0;
  if (dt >= b) return h + 1;
  const double bin_width = 2.0 * b / h;
  const int idx = static_cast<int>(std::floor((dt + b) / bin_width)) + 1;
  return std::clamp(idx, 1, h);
}

Eigen::RowVectorXd bin_to_onehot(int index, int h) {
  if (index < 0 || index > h + 1) {
    throw ShapeError("bin_to_onehot: index " + std::to_string(index) +
                     " outside [0, " + std::to_string(h + 1) + "]");
  }
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(h + 2);
  v(index) = 1.0;
  return v;
}

Eigen::RowVectorXd zone_features(const SystemState& state, int zone,
                                 const FeatureScaling& scaling) {
  if (zone < 0 || zone >= state.n_zones()) {
    throw ShapeError("zone_features: zone index out of range");
  }
  Eigen::RowVectorXd f(10);
  f(0) = scaling.temp(state.s_in[zone]);
  f(1) = scaling.clock(state.t);
  for (int d = 0; d < 4; ++d) {
    f(2 + d) = scaling.temp(state.s_out.t_out[d]);
    f(6 + d) = scaling.irradiance(state.s_out.sun_out[d]);
  }
  return f;
}

FrontEndNet make_frontend(std::uint64_t seed, BinParams bins) {
  FrontEndNet net;
  net.subnet = nn::he_init(kFrontendLayers, seed);
  net.bins = bins;
  return net;
}

Eigen::MatrixXd q_forward(const FrontEndNet& net, const SystemState& state) {
  const int n = state.n_zones();
  // One forward pass per zone rather than a single batched GEMM: identical
  // inputs then give bit-identical rows regardless of zone position, so the
  // output is exactly permutation-equivariant.
  Eigen::MatrixXd out(n, net.subnet.output_size());
  for (int i = 0; i < n; ++i) {
    out.row(i) = nn::forward(net.subnet, zone_features(state, i, net.scaling));
  }
  return out;
}

std::vector<int> select_planned_delta(const Eigen::MatrixXd& qvals, double eps,
                                      std::mt19937_64& rng) {
  if (eps < 0.0 || eps > 1.0) {
    throw ValidationError("select_planned_delta: eps outside [0, 1]");
  }
  const int n = static_cast<int>(qvals.rows());
  const int bins = static_cast<int>(qvals.cols());
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> uniform_bin(0, bins - 1);
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) {
    if (eps > 0.0 && coin(rng) < eps) {
      out[i] = uniform_bin(rng);
    } else {
      int best = 0;
      for (int k = 1; k < bins; ++k) {
        if (qvals(i, k) > qvals(i, best)) best = k;
      }
      out[i] = best;
    }
  }
  return out;
}

double compute_reward(const SystemState& state, double prev_step_cost,
                      const TrainConfig& cfg) {
  if (prev_step_cost < 0) {
    throw ValidationError("compute_reward: negative cost");
  }
  double violation = 0.0;
  for (double t : state.s_in) {
    violation += std::max(t - cfg.t_upper, 0.0) + std::max(cfg.t_lower - t, 0.0);
  }
  return cfg.w_cost * (-prev_step_cost) + cfg.w_vio * (-violation);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw ValidationError("replay buffer capacity must be > 0");
  }
  ring_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::add(Experience e) {
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(e));
  } else {
    ring_[next_] = std::move(e);
    next_ = (next_ + 1) % capacity_;
  }
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t count,
                                                    std::mt19937_64& rng) const {
  if (count > ring_.size()) {
    throw ValidationError("replay sample larger than buffer");
  }
  // Partial Fisher-Yates over an index vector: uniform without replacement.
  std::vector<std::size_t> idx(ring_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<const Experience*> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    out.push_back(&ring_[idx[i]]);
  }
  return out;
}

Eigen::MatrixXd dqn_target_rows(const Eigen::MatrixXd& q_pred,
                                const Eigen::MatrixXd& next_q,
                                const std::vector<int>& chosen_bins,
                                const std::vector<double>& rewards, int n_zones,
                                const TrainConfig& cfg) {
  if (q_pred.rows() != next_q.rows() ||
      q_pred.rows() != static_cast<Eigen::Index>(chosen_bins.size())) {
    throw ShapeError("dqn_target_rows: row count mismatch");
  }
  Eigen::MatrixXd target = q_pred;
  for (Eigen::Index r = 0; r < target.rows(); ++r) {
    const double reward = cfg.reward_scale * rewards[r / n_zones];
    double v = reward + cfg.gamma * next_q.row(r).maxCoeff();
    if (cfg.clamp_targets) v = std::max(v, cfg.target_clamp);
    target(r, chosen_bins[r]) = v;
  }
  return target;
}

std::vector<Eigen::MatrixXd> dqn_target(
    const std::vector<const Experience*>& batch, const FrontEndNet& q_net,
    const FrontEndNet& target_net, double gamma, const TrainConfig& cfg) {
  if (batch.empty()) {
    throw ValidationError("dqn_target: empty batch");
  }
  TrainConfig local = cfg;
  local.gamma = gamma;
  std::vector<Eigen::MatrixXd> out;
  out.reserve(batch.size());
  for (const Experience* e : batch) {
    const int n = e->s_pre.n_zones();
    Eigen::MatrixXd q_pred = q_forward(q_net, e->s_pre);
    Eigen::MatrixXd next_q = q_forward(target_net, e->s_cur);
    std::vector<double> rewards(1, e->reward);
    // Rows of one sample: treat as a (n x bins) block with n_zones = n.
    Eigen::MatrixXd t = q_pred;
    for (int i = 0; i < n; ++i) {
      double v = local.reward_scale * e->reward +
                 local.gamma * next_q.row(i).maxCoeff();
      if (local.clamp_targets) v = std::max(v, local.target_clamp);
      t(i, e->delta_bins[i]) = v;
    }
    out.push_back(std::move(t));
  }
  return out;
}

WeatherSource profile_weather_source(const WeatherProfile& profile, int days,
                                     std::uint64_t base_seed,
                                     bool vary_per_epoch) {
  return [profile, days, base_seed, vary_per_epoch](int epoch) {
    const std::uint64_t seed =
        vary_per_epoch ? base_seed * 0x9e3779b97f4a7c15ULL + epoch : base_seed;
    return WeatherSeries::synth(profile, days, seed);
  };
}

FrontendTrainResult train_frontend(const BuildingModel& model,
                                   const WeatherSource& weather,
                                   InverseNet& inverse,
                                   const FrontendTrainOptions& options,
                                   std::uint64_t seed) {
  model.validate();
  const int n = model.n_zones();
  if (inverse.n_zones != n || inverse.m_levels != model.equipment.levels()) {
    throw ShapeError("train_frontend: inverse net does not match (n, m)");
  }

  TrainConfig cfg = options.cfg;
  int epochs = options.epochs >= 0 ? options.epochs : cfg.ep;
  double eps = cfg.eps0;
  if (options.finetune) {
    eps = 0.0;
    cfg.eps_low = 0.0;
    cfg.d_eps = 0.0;
    cfg.l_max = 3;
  }

  FrontendTrainResult result;
  result.net = options.init ? *options.init : make_frontend(seed, BinParams{});
  FrontEndNet target_net = result.net;  // Q' starts as a copy of Q
  const BinParams bins = result.net.bins;
  const int n_bins = bins.n_bins();

  nn::AdamState q_opt = nn::make_adam_state(result.net.subnet);
  nn::AdamState f_opt = nn::make_adam_state(inverse.net);
  ReplayBuffer buffer(cfg.buffer_capacity);
  std::mt19937_64 rng(seed ^ 0xabcdef1234567890ULL);

  const int steps_per_epoch = cfg.steps_per_epoch();
  result.log.reserve(static_cast<std::size_t>(epochs) * steps_per_epoch);

  const std::vector<int> f_groups(n, inverse.m_levels);

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    WeatherSeries series = weather(epoch);
    if (!series.covers(static_cast<double>(steps_per_epoch) *
                       kControlPeriodMin)) {
      throw HorizonError("train_frontend: weather does not cover an epoch");
    }
    SystemState state = make_initial_state(model, series, options.initial_temp);
    if (!options.finetune) {
      // Out-of-band states become rare once the policy improves, leaving Q
      // unlearned exactly where recovery actions matter. Scattering the
      // epoch's start temperatures (a little beyond the comfort band) keeps
      // those states, and desynchronized zones, in the replay distribution.
      std::uniform_real_distribution<double> init_temp(cfg.t_lower - 3.0,
                                                       cfg.t_upper + 3.0);
      for (double& t : state.s_in) t = init_temp(rng);
    }
    SystemState s_pre = state;
    std::vector<int> delta_prev(n, encode_delta_bin(0.0, bins));
    ActionVector action_prev(n, 0);
    double prev_cost = 0.0;

    for (int step = 0; step < steps_per_epoch; ++step) {
      const SystemState& s_cur = state;
      const double reward = compute_reward(s_cur, prev_cost, cfg);
      if (epoch > 1 || step > 0) {
        buffer.add(Experience{s_pre, s_cur, delta_prev, action_prev, reward});
      }

      double loss_q = 0.0, loss_f = 0.0;
      if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        for (int it = 0; it < cfg.l_max; ++it) {
          const auto batch =
              buffer.sample(static_cast<std::size_t>(cfg.batch_size), rng);
          const int bsz = static_cast<int>(batch.size());

          // Supervised inverse-net update from actual temperature changes.
          std::vector<InverseSample> f_batch;
          f_batch.reserve(bsz);
          for (const Experience* e : batch) {
            InverseSample s;
            s.delta_bins.resize(n);
            for (int i = 0; i < n; ++i) {
              s.delta_bins[i] =
                  encode_delta_bin(e->s_cur.s_in[i] - e->s_pre.s_in[i], bins);
            }
            s.s_pre = e->s_pre;
            s.action = e->action;
            s.augmented = false;
            f_batch.push_back(std::move(s));
          }
          loss_f = online_update(inverse, f_opt, f_batch, cfg.lr2, &rng);

          // Q update against the target network.
          Eigen::MatrixXd z_prime(bsz * n, 10), z_next(bsz * n, 10);
          std::vector<int> chosen(bsz * n);
          std::vector<double> rewards(bsz);
          for (int s = 0; s < bsz; ++s) {
            const Experience* e = batch[s];
            rewards[s] = e->reward;
            for (int i = 0; i < n; ++i) {
              z_prime.row(s * n + i) =
                  zone_features(e->s_pre, i, result.net.scaling);
              z_next.row(s * n + i) =
                  zone_features(e->s_cur, i, result.net.scaling);
              chosen[s * n + i] = e->delta_bins[i];
            }
          }
          const Eigen::MatrixXd next_q = nn::forward(target_net.subnet, z_next);
          nn::ForwardCache cache;
          const Eigen::MatrixXd q_pred =
              nn::forward(result.net.subnet, z_prime, &cache);
          const Eigen::MatrixXd targets =
              dqn_target_rows(q_pred, next_q, chosen, rewards, n, cfg);
          auto [mse, grad] = nn::mse_loss(q_pred, targets);
          loss_q = mse;
          nn::adam_step(result.net.subnet,
                        nn::backward(result.net.subnet, cache, grad), q_opt,
                        cfg.lr1);
        }
      }

      if (step % cfg.target_update_steps == 0) {
        target_net.subnet = result.net.subnet;
      }

      const Eigen::MatrixXd qvals = q_forward(result.net, s_cur);
      eps = std::max(cfg.eps_low, eps - cfg.d_eps);
      const std::vector<int> delta = select_planned_delta(qvals, eps, rng);
      const ActionVector action = infer_action(inverse, delta, s_cur);
      const double cost = energy_cost(model, action, s_cur.t);

      if (options.record_trajectory) {
        result.trajectory.steps.push_back({s_cur, action, cost, reward});
      }
      result.log.push_back({epoch, step, eps, reward, loss_q, loss_f});

      s_pre = s_cur;
      delta_prev = delta;
      action_prev = action;
      prev_cost = cost;
      state = hvacx::step(model, s_cur, action, series);
    }

    if (!result.net.subnet.all_finite() || !inverse.net.all_finite()) {
      throw NumericError("train_frontend: non-finite parameters after epoch " +
                         std::to_string(epoch));
    }
  }
  return result;
}

void save_frontend(const std::string& path, const FrontEndNet& net) {
  nlohmann::json meta;
  meta["kind"] = "frontend";
  meta["b"] = net.bins.b;
  meta["h"] = net.bins.h;
  meta["temp_offset"] = net.scaling.temp_offset;
  meta["temp_scale"] = net.scaling.temp_scale;
  meta["irradiance_scale"] = net.scaling.irradiance_scale;
  nn::save_checkpoint(path, net.subnet, meta);
}

FrontEndNet load_frontend(const std::string& path) {
  nlohmann::json meta;
  FrontEndNet net;
  net.subnet = nn::load_checkpoint(path, &meta);
  if (meta.value("kind", "") != "frontend") {
    throw ParseError("checkpoint '" + path + "' is not a frontend checkpoint");
  }
  net.bins.b = meta.at("b").get<double>();
  net.bins.h = meta.at("h").get<int>();
  net.scaling.temp_offset = meta.at("temp_offset").get<double>();
  net.scaling.temp_scale = meta.at("temp_scale").get<double>();
  net.scaling.irradiance_scale = meta.at("irradiance_scale").get<double>();
  if (net.subnet.output_size() != net.bins.n_bins()) {
    throw ShapeError("frontend checkpoint: output width != h+2");
  }
  return net;
}

}  // namespace hvacx
