#include "hvacx/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hvacx/control.hpp"

namespace hvacx {

namespace {

std::vector<int> inverse_layers(int n, int m, const BinParams& bins) {
  const int d_state = n + 1 + 8;
  return {bins.n_bins() * n + d_state, 128, 256, 256, 128, m * n};
}

}  // namespace

InverseNet make_inverse(int n_zones, int m_levels, std::uint64_t seed,
                        BinParams bins) {
  if (n_zones < 1 || m_levels < 2) {
    throw ShapeError("make_inverse: need n >= 1 and m >= 2");
  }
  InverseNet net;
  net.net = nn::he_init(inverse_layers(n_zones, m_levels, bins), seed);
  net.n_zones = n_zones;
  net.m_levels = m_levels;
  net.bins = bins;
  return net;
}

Eigen::RowVectorXd state_features(const SystemState& state,
                                  const FeatureScaling& scaling) {
  const int n = state.n_zones();
  Eigen::RowVectorXd f(n + 9);
  for (int i = 0; i < n; ++i) f(i) = scaling.temp(state.s_in[i]);
  f(n) = scaling.clock(state.t);
  for (int d = 0; d < 4; ++d) {
    f(n + 1 + d) = scaling.temp(state.s_out.t_out[d]);
    f(n + 5 + d) = scaling.irradiance(state.s_out.sun_out[d]);
  }
  return f;
}

Eigen::RowVectorXd inverse_features(const std::vector<int>& delta_bins,
                                    const SystemState& state,
                                    const BinParams& bins,
                                    const FeatureScaling& scaling) {
  const int n = state.n_zones();
  if (static_cast<int>(delta_bins.size()) != n) {
    throw ShapeError("inverse_features: delta bin count != zone count");
  }
  const int k = bins.n_bins();
  Eigen::RowVectorXd f = Eigen::RowVectorXd::Zero(k * n + n + 9);
  for (int i = 0; i < n; ++i) {
    const int bin = delta_bins[i];
    if (bin < 0 || bin >= k) {
      throw ShapeError("inverse_features: bin index out of range");
    }
    f(i * k + bin) = 1.0;
  }
  f.segment(k * n, n + 9) = state_features(state, scaling);
  return f;
}

std::vector<OnOffRecord> collect_onoff_data(const BuildingModel& model,
                                            const WeatherSeries& weather,
                                            OnOffController& controller,
                                            double duration_min,
                                            double initial_temp) {
  if (duration_min < kControlPeriodMin) {
    throw ValidationError("collect_onoff_data: duration below one period");
  }
  if (!weather.covers(duration_min)) {
    throw HorizonError("collect_onoff_data: weather horizon too short");
  }
  const int steps = static_cast<int>(duration_min / kControlPeriodMin);
  std::vector<OnOffRecord> log;
  log.reserve(steps);
  controller.reset();
  SystemState state = make_initial_state(model, weather, initial_temp);
  for (int s = 0; s < steps; ++s) {
    const ActionVector action = controller.act(state);
    SystemState next = step(model, state, action, weather);
    log.push_back({state, next, action});
    state = std::move(next);
  }
  return log;
}

InverseDataset build_dataset(const std::vector<OnOffRecord>& log,
                             int max_level, const BinParams& bins) {
  if (log.empty()) {
    throw ValidationError("build_dataset: empty warm-up log");
  }
  InverseDataset ds;
  ds.samples.reserve(log.size() * 2);
  const int n = log.front().s_pre.n_zones();
  for (const OnOffRecord& r : log) {
    InverseSample s;
    s.delta_bins.resize(n);
    for (int i = 0; i < n; ++i) {
      s.delta_bins[i] = encode_delta_bin(r.s_cur.s_in[i] - r.s_pre.s_in[i], bins);
    }
    s.s_pre = r.s_pre;
    s.action = r.action;
    s.augmented = false;
    ds.samples.push_back(std::move(s));
  }
  ds.collected = ds.samples.size();
  // Boundary augmentation: one copy per record, all bins at the <= -b
  // sentinel and all labels at the maximum level.
  for (std::size_t r = 0; r < ds.collected; ++r) {
    InverseSample s = ds.samples[r];
    std::fill(s.delta_bins.begin(), s.delta_bins.end(), 0);
    std::fill(s.action.begin(), s.action.end(), max_level);
    s.augmented = true;
    ds.samples.push_back(std::move(s));
  }
  ds.augmented = ds.samples.size() - ds.collected;
  return ds;
}

namespace {

Eigen::MatrixXd batch_features(const InverseNet& net,
                               const std::vector<const InverseSample*>& batch) {
  const int dim = net.net.input_size();
  Eigen::MatrixXd x(batch.size(), dim);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    x.row(s) = inverse_features(batch[s]->delta_bins, batch[s]->s_pre, net.bins,
                                net.scaling);
  }
  return x;
}

std::vector<std::vector<int>> batch_labels(
    const std::vector<const InverseSample*>& batch) {
  std::vector<std::vector<int>> labels;
  labels.reserve(batch.size());
  for (const InverseSample* s : batch) {
    labels.emplace_back(s->action.begin(), s->action.end());
  }
  return labels;
}

// Bin one-hots are orthogonal, so the net cannot interpolate to bins a zone
// never realized in the warm-up log — and the thermostat keeps each zone on
// a handful of bins, all moving nearly in phase across zones. A net that
// keys on that joint pattern reaches zero training loss without reading the
// queried bin at all, then answers at chance once one zone's request moves
// off the pattern. Cooling-only equipment breaks the tie: a strongly
// negative target delta always wants the highest stage and a clearly
// positive one always wants the unit off, whatever the state. Rewriting a
// random subset of zones to such synthetic extremes puts conflicting
// (bin, level) pairs on the same state, which forces the network to read
// each zone's own request; the untouched records anchor the state-dependent
// boundary in between.
constexpr double kBinRewriteProb = 0.5;
constexpr int kCoolExtremeMax = 8;   // bins 0..8: delta <= -0.6 C
constexpr int kWarmExtremeMin = 13;  // bins 13..21: delta >= +0.4 C

void slide_bins(std::vector<InverseSample>& batch, int max_level, int k_bins,
                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (InverseSample& s : batch) {
    for (std::size_t z = 0; z < s.delta_bins.size(); ++z) {
      if (coin(rng) >= kBinRewriteProb) continue;
      int& bin = s.delta_bins[z];
      int& label = s.action[z];
      if (coin(rng) < 0.5) {
        bin = std::uniform_int_distribution<int>(0, kCoolExtremeMax)(rng);
        label = max_level;
      } else {
        bin = std::uniform_int_distribution<int>(kWarmExtremeMin,
                                                 k_bins - 1)(rng);
        label = 0;
      }
    }
  }
}

// The warm-up thermostat confines zone temperatures to its own band, yet the
// deployed policy visits temperatures outside it. The requested-bin ->
// discrete-level mapping is insensitive to moderate temperature shifts, so
// jittering the zone-temperature features widens state coverage without
// invalidating the labels.
constexpr double kTempJitterStd = 1.5;  // degrees C

void jitter_state(Eigen::MatrixXd& x, int n_zones, int k_bins,
                  const FeatureScaling& scaling, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(
      0.0, kTempJitterStd * (scaling.temp(1.0) - scaling.temp(0.0)));
  const int base = n_zones * k_bins;
  for (Eigen::Index s = 0; s < x.rows(); ++s) {
    for (int z = 0; z < n_zones; ++z) x(s, base + z) += noise(rng);
  }
}

}  // namespace

InverseTrainResult train_inverse(const InverseDataset& ds, int n_zones,
                                 int m_levels, int ep_f, double lr2,
                                 int batch_size, std::uint64_t seed,
                                 BinParams bins) {
  if (ds.samples.empty()) {
    throw ValidationError("train_inverse: empty dataset");
  }
  for (const auto& s : ds.samples) {
    if (s.s_pre.n_zones() != n_zones ||
        static_cast<int>(s.action.size()) != n_zones) {
      throw ShapeError("train_inverse: sample shape mismatch");
    }
    for (int a : s.action) {
      if (a < 0 || a >= m_levels) {
        throw ShapeError("train_inverse: label out of range");
      }
    }
  }
  InverseTrainResult result;
  result.net = make_inverse(n_zones, m_levels, seed, bins);
  nn::AdamState opt = nn::make_adam_state(result.net.net);
  std::mt19937_64 rng(seed ^ 0x5ca1ab1e5ca1ab1eULL);
  const std::vector<int> groups(n_zones, m_levels);

  std::vector<const InverseSample*> order;
  order.reserve(ds.samples.size());
  for (const auto& s : ds.samples) order.push_back(&s);

  for (int epoch = 0; epoch < ep_f; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int n_batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(batch_size));
      std::vector<InverseSample> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(*order[i]);
      slide_bins(batch, m_levels - 1, bins.n_bins(), rng);
      std::vector<const InverseSample*> ptrs;
      ptrs.reserve(batch.size());
      for (const auto& s : batch) ptrs.push_back(&s);
      Eigen::MatrixXd x = batch_features(result.net, ptrs);
      auto labels = batch_labels(ptrs);
      jitter_state(x, n_zones, bins.n_bins(), result.net.scaling, rng);
      nn::ForwardCache cache;
      const Eigen::MatrixXd logits = nn::forward(result.net.net, x, &cache);
      auto [loss, grad] = nn::grouped_cross_entropy(logits, groups, labels);
      nn::adam_step(result.net.net, nn::backward(result.net.net, cache, grad),
                    opt, lr2);
      epoch_loss += loss;
      ++n_batches;
    }
    result.epoch_losses.push_back(epoch_loss / std::max(1, n_batches));
  }

  // Final per-group training accuracy.
  result.group_accuracy.assign(n_zones, 0.0);
  for (const auto& s : ds.samples) {
    const ActionVector pred = infer_action(result.net, s.delta_bins, s.s_pre);
    for (int i = 0; i < n_zones; ++i) {
      if (pred[i] == s.action[i]) result.group_accuracy[i] += 1.0;
    }
  }
  for (double& a : result.group_accuracy) a /= static_cast<double>(ds.samples.size());
  return result;
}

ActionVector infer_action(const InverseNet& net,
                          const std::vector<int>& delta_bins,
                          const SystemState& state) {
  if (state.n_zones() != net.n_zones) {
    throw ShapeError("infer_action: state zone count != net zone count");
  }
  const Eigen::RowVectorXd x =
      inverse_features(delta_bins, state, net.bins, net.scaling);
  const Eigen::MatrixXd logits = nn::forward(net.net, x);
  ActionVector action(net.n_zones);
  for (int g = 0; g < net.n_zones; ++g) {
    const int offset = g * net.m_levels;
    int best = 0;
    for (int k = 1; k < net.m_levels; ++k) {
      if (logits(0, offset + k) > logits(0, offset + best)) best = k;
    }
    action[g] = best;
  }
  return action;
}

double online_update(InverseNet& net, nn::AdamState& opt,
                     const std::vector<InverseSample>& batch, double lr2,
                     std::mt19937_64* rng) {
  if (batch.empty()) {
    throw ValidationError("online_update: empty batch");
  }
  std::vector<InverseSample> local;
  if (rng != nullptr) {
    local = batch;
    slide_bins(local, net.m_levels - 1, net.bins.n_bins(), *rng);
  }
  const std::vector<InverseSample>& use = rng != nullptr ? local : batch;
  std::vector<const InverseSample*> ptrs;
  ptrs.reserve(use.size());
  for (const auto& s : use) ptrs.push_back(&s);
  Eigen::MatrixXd x = batch_features(net, ptrs);
  auto labels = batch_labels(ptrs);
  if (rng != nullptr) {
    jitter_state(x, net.n_zones, net.bins.n_bins(), net.scaling, *rng);
  }
  nn::ForwardCache cache;
  const Eigen::MatrixXd logits = nn::forward(net.net, x, &cache);
  const std::vector<int> groups(net.n_zones, net.m_levels);
  auto [loss, grad] = nn::grouped_cross_entropy(logits, groups, labels);
  nn::adam_step(net.net, nn::backward(net.net, cache, grad), opt, lr2);
  return loss;
}

void save_inverse(const std::string& path, const InverseNet& net) {
  nlohmann::json meta;
  meta["kind"] = "inverse";
  meta["n_zones"] = net.n_zones;
  meta["m_levels"] = net.m_levels;
  meta["b"] = net.bins.b;
  meta["h"] = net.bins.h;
  meta["temp_offset"] = net.scaling.temp_offset;
  meta["temp_scale"] = net.scaling.temp_scale;
  meta["irradiance_scale"] = net.scaling.irradiance_scale;
  nn::save_checkpoint(path, net.net, meta);
}

InverseNet load_inverse(const std::string& path) {
  nlohmann::json meta;
  InverseNet net;
  net.net = nn::load_checkpoint(path, &meta);
  if (meta.value("kind", "") != "inverse") {
    throw ParseError("checkpoint '" + path + "' is not an inverse checkpoint");
  }
  net.n_zones = meta.at("n_zones").get<int>();
  net.m_levels = meta.at("m_levels").get<int>();
  net.bins.b = meta.at("b").get<double>();
  net.bins.h = meta.at("h").get<int>();
  net.scaling.temp_offset = meta.at("temp_offset").get<double>();
  net.scaling.temp_scale = meta.at("temp_scale").get<double>();
  net.scaling.irradiance_scale = meta.at("irradiance_scale").get<double>();
  if (net.net.output_size() != net.n_zones * net.m_levels) {
    throw ShapeError("inverse checkpoint: output width != n*m");
  }
  return net;
}

}  // namespace hvacx
