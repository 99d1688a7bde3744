#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hvacx/control.hpp"
#include "hvacx/types.hpp"

namespace hvacx {

// Violation metrics over one trajectory, measured at control instants against
// the comfort band [t_lower, t_upper].
struct Metrics {
  std::vector<double> theta;  // per-zone violation rate
  std::vector<double> mu;     // per-zone max violation magnitude, degC
  double a_theta = 0.0;
  double m_theta = 0.0;
  double a_mu = 0.0;
  double m_mu = 0.0;
  double total_cost = 0.0;
  bool pass_flag = false;  // all theta_i < 5%
};

Metrics compute_metrics(const Trajectory& traj, double t_lower = 19.0,
                        double t_upper = 24.0);

// Desk-scale training profile: Table-1 values with the artifact knobs sized
// for single-core runs (smaller batch, faster exploration anneal).
TrainConfig desk_config();

// Weather seed reserved for held-out evaluation months.
inline constexpr std::uint64_t kEvalWeatherSeed = 20200801;

// One emitted results-table row, mirroring the symbols of the source method's
// tables (theta_i, A-theta, M-theta, mu, cost).
struct ResultRow {
  std::string scenario;
  std::string method;    // ON-OFF | ours | dqn-star
  std::string building;
  std::string weather;
  int ep = 0;            // fine-tuning epochs after transfer
  double onoff_upper = 23.0;  // warm-up collection upper bound
  std::uint64_t seed = 0;
  Metrics metrics;
  std::string config_hash;
  std::string checkpoint_id;
};

std::string results_csv_header();
std::string to_csv_row(const ResultRow& row);
void write_results_csv(const std::string& path,
                       const std::vector<ResultRow>& rows);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_training_log_csv(const std::string& path,
                            const std::vector<TrainLogEntry>& log);

// Scenario description covering the transfer experiment families: building
// transfer, zone-count transfer, equipment transfer, weather transfer, ON-OFF
// boundary sweep, and fine-tune curves.
struct ScenarioSpec {
  std::string name;
  std::string source_building = "4-zone-1";
  std::string target_building = "4-zone-2";
  std::string source_weather = "riverside";
  std::string target_weather = "riverside";
  std::string source_equipment = "AC1";
  std::string target_equipment = "AC1";
  int frontend_epochs = 30;           // desk-scale default
  int finetune_epochs = 1;            // EP=1 row; 0 skips fine-tuning
  std::vector<double> onoff_upper_bounds = {23.0};  // data-collection sweep
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  bool include_onoff_row = true;
};

// Named catalog mirroring the experiment families.
ScenarioSpec preset_scenario(const std::string& name);
std::vector<std::string> scenario_names();

// Cache path for a trained source frontend under `out_dir`.
std::string frontend_checkpoint_path(const std::string& out_dir,
                                     const ScenarioSpec& spec,
                                     const TrainConfig& cfg,
                                     std::uint64_t seed);

// Trains the source-building frontend for `spec`, or loads it from the
// out_dir cache when the checkpoint already exists.
FrontEndNet obtain_frontend(const ScenarioSpec& spec, const TrainConfig& cfg,
                            const std::string& out_dir, std::uint64_t seed);

struct ScenarioArtifacts {
  std::vector<ResultRow> rows;
  std::vector<std::string> checkpoint_paths;
};

// Full scenario pipeline: train (or load cached) frontend on the source,
// collect warm-up data on the target, train the backend, deploy at EP=0,
// optionally fine-tune, evaluate one held-out month per seed.
ScenarioArtifacts run_scenario(const ScenarioSpec& spec, const TrainConfig& cfg,
                               const std::string& out_dir);

struct FineTunePoint {
  double t_min;      // end of the window
  double cost;       // window cost, $
  double m_theta;    // window max violation rate
  double a_theta;
};

// Sliding weekly metrics during fine-tuning; index 0 is the EP=0 state.
std::vector<FineTunePoint> finetune_curve(const ScenarioSpec& spec,
                                          const TrainConfig& cfg,
                                          const std::string& out_dir,
                                          int weeks = 3);

// FNV-1a hash of a config's JSON serialization, for row provenance.
std::string config_hash(const TrainConfig& cfg, const ScenarioSpec& spec);

// Optional baseline: monolithic DQN with m^n outputs over the joint action
// space. Desk-scale convenience, not part of the transfer pipeline.
struct DqnStarResult {
  nn::Mlp net;
  Metrics eval_metrics;
};
DqnStarResult train_dqn_star(const BuildingModel& model,
                             const WeatherSource& weather,
                             const TrainConfig& cfg, int epochs,
                             std::uint64_t seed);

}  // namespace hvacx
