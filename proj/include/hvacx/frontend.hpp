#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "hvacx/building.hpp"
#include "hvacx/nn.hpp"
#include "hvacx/types.hpp"
#include "hvacx/weather.hpp"

namespace hvacx {

struct InverseNet;  // backend, see inverse.hpp

// Discretization of the planned temperature change: h equal bins tile
// (-b, b), plus two sentinel bins for <= -b and >= b. h+2 bins total.
struct BinParams {
  double b = 2.0;
  int h = 20;

  int n_bins() const { return h + 2; }
};

// Bin index for a temperature change: 0 when dt <= -b, h+1 when dt >= b,
// otherwise floor((dt + b) / (2b/h)) + 1 clamped to [1, h].
int encode_delta_bin(double dt, double b, int h);
inline int encode_delta_bin(double dt, const BinParams& p) {
  return encode_delta_bin(dt, p.b, p.h);
}

// One-hot vector of length h+2.
Eigen::RowVectorXd bin_to_onehot(int index, int h);

// Fixed affine normalization shared by both networks (and baked into
// checkpoints so transfer is meaningful across buildings).
struct FeatureScaling {
  double temp_offset = 20.0;
  double temp_scale = 10.0;
  double irradiance_scale = 1000.0;

  double temp(double celsius) const { return (celsius - temp_offset) / temp_scale; }
  double irradiance(double wm2) const { return wm2 / irradiance_scale; }
  double clock(double t_min) const { return hour_of_day(t_min) / 24.0; }
};

// Per-zone input I_i = <T_i, clock, S_out>: 10 features.
Eigen::RowVectorXd zone_features(const SystemState& state, int zone,
                                 const FeatureScaling& scaling = {});

// Building-agnostic front-end: one weight-shared subnet applied per zone.
struct FrontEndNet {
  nn::Mlp subnet;  // [10,128,256,256,256,400,22]
  BinParams bins;
  FeatureScaling scaling;
};

FrontEndNet make_frontend(std::uint64_t seed, BinParams bins = {});

// Q-values per zone: n x (h+2). The shared subnet is applied to each zone's
// features independently, so the result is permutation-equivariant in zones.
Eigen::MatrixXd q_forward(const FrontEndNet& net, const SystemState& state);

// Epsilon-greedy per-zone bin selection. Ties break to the lowest index.
std::vector<int> select_planned_delta(const Eigen::MatrixXd& qvals, double eps,
                                      std::mt19937_64& rng);

// Table-1 hyper-parameters plus artifact knobs left unstated by the source
// method (discount, batch size, exploration decay, replay capacity).
struct TrainConfig {
  int ep = 150;                    // training epochs (months)
  double lr1 = 3e-4;               // Q learning rate
  double lr2 = 1e-4;               // inverse-net learning rate
  int l_max = 1;                   // inner learning iterations per step
  int target_update_steps = 240;   // control steps between target refreshes
  double eps0 = 1.0;
  double eps_low = 0.1;
  double d_eps = 1e-5;             // epsilon decay per control step
  double gamma = 0.9;
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  double w_cost = 1.0 / 1000.0;
  double w_vio = 1.0 / 1600.0;
  double t_lower = 19.0;
  double t_upper = 24.0;
  int epoch_days = 31;             // t_MAX: one simulated month
  bool clamp_targets = true;
  double target_clamp = -5.0;
  // TD targets use reward_scale * R. A positive scale leaves the greedy
  // policy invariant but lifts the gap between actions above the regression
  // noise floor, which the raw ~1e-4 per-step rewards sit well below.
  double reward_scale = 1.0;

  int steps_per_epoch() const { return epoch_days * kStepsPerDay; }
};

// R = w_cost * (-prev_step_cost) + w_vio * (-sum of band violations).
double compute_reward(const SystemState& state, double prev_step_cost,
                      const TrainConfig& cfg);

// Replay tuple (S_pre, S_cur, planned delta bins, action, reward).
struct Experience {
  SystemState s_pre;
  SystemState s_cur;
  std::vector<int> delta_bins;
  ActionVector action;
  double reward;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(Experience e);
  std::size_t size() const { return ring_.size(); }

  // Uniform sample of `count` distinct experiences (count <= size).
  std::vector<const Experience*> sample(std::size_t count,
                                        std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Experience> ring_;
};

// Per-sample DQN target rows: starts from the current Q prediction, then
// replaces each zone's chosen-bin entry with r + gamma * max Q'(S_next),
// optionally clamped below. `q_pred` and `next_q` are (samples*n) x (h+2),
// sample-major.
Eigen::MatrixXd dqn_target_rows(const Eigen::MatrixXd& q_pred,
                                const Eigen::MatrixXd& next_q,
                                const std::vector<int>& chosen_bins,
                                const std::vector<double>& rewards, int n_zones,
                                const TrainConfig& cfg);

// Convenience form matching the per-batch contract: target matrices (one
// n x (h+2) block per experience) computed from the live and target nets.
std::vector<Eigen::MatrixXd> dqn_target(
    const std::vector<const Experience*>& batch, const FrontEndNet& q_net,
    const FrontEndNet& target_net, double gamma, const TrainConfig& cfg);

struct TrainLogEntry {
  int epoch;
  int step;
  double eps;
  double reward;
  double loss_q;
  double loss_f;
};

// Weather supplier for training; called once per epoch so epochs can vary
// their noise realization.
using WeatherSource = std::function<WeatherSeries(int epoch)>;

// Profile-based source: epoch k uses seed mixed from `base_seed` and k.
WeatherSource profile_weather_source(const WeatherProfile& profile, int days,
                                     std::uint64_t base_seed,
                                     bool vary_per_epoch = true);

struct FrontendTrainOptions {
  TrainConfig cfg;
  std::optional<FrontEndNet> init;  // transferred weights (fine-tuning)
  bool finetune = false;            // eps = 0, eps_low = 0, l_max = 3
  int epochs = -1;                  // override cfg.ep when >= 0
  double initial_temp = 22.0;
  bool record_trajectory = false;
};

struct FrontendTrainResult {
  FrontEndNet net;
  std::vector<TrainLogEntry> log;
  Trajectory trajectory;  // filled when record_trajectory is set
};

// DQN training loop for the front-end (the back-end keeps learning online
// from replayed transitions during the same loop).
FrontendTrainResult train_frontend(const BuildingModel& model,
                                   const WeatherSource& weather,
                                   InverseNet& inverse,
                                   const FrontendTrainOptions& options,
                                   std::uint64_t seed);

// Checkpoint IO; metadata records {b, h, feature normalization}.
void save_frontend(const std::string& path, const FrontEndNet& net);
FrontEndNet load_frontend(const std::string& path);

}  // namespace hvacx
