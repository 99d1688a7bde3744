#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hvacx/building.hpp"
#include "hvacx/frontend.hpp"
#include "hvacx/inverse.hpp"
#include "hvacx/types.hpp"

namespace hvacx {

class Controller {
 public:
  virtual ~Controller() = default;
  virtual ActionVector act(const SystemState& state) = 0;
  virtual void reset() {}
};

// Hysteresis thermostat: engage at the upper bound, release at the lower
// bound, hold the latched level in between (initially off).
class OnOffController : public Controller {
 public:
  OnOffController(double upper_bound, double lower_bound, int engage_level);

  // Engage at the equipment's maximum level.
  static OnOffController for_equipment(const HvacEquipment& eq,
                                       double upper_bound = 23.0,
                                       double lower_bound = 19.0);

  ActionVector act(const SystemState& state) override;
  void reset() override { latched_.clear(); }

  double upper_bound() const { return upper_; }

 private:
  double upper_;
  double lower_;
  int engage_level_;
  std::vector<int> latched_;  // per-zone, sized lazily
};

// Transferred controller: greedy front-end bin selection composed with the
// locally trained inverse net. Purely feed-forward, no learning.
class DeployedController : public Controller {
 public:
  DeployedController(FrontEndNet frontend, InverseNet backend);

  ActionVector act(const SystemState& state) override;

  const FrontEndNet& frontend() const { return frontend_; }
  const InverseNet& backend() const { return backend_; }

 private:
  FrontEndNet frontend_;
  InverseNet backend_;
};

// Loads both checkpoints and shape-checks the backend against the building's
// (n, m). The frontend is n-independent by construction.
DeployedController load_deployed(const std::string& frontend_ckpt,
                                 const std::string& backend_ckpt,
                                 const BuildingModel& model);

// Shape-check helper shared by load_deployed and the CLI.
void check_compatibility(const FrontEndNet& frontend, const InverseNet& backend,
                         const BuildingModel& model);

// Closed-loop run for ceil(duration/control period) steps; records per-step
// state, action, cost, and reward.
Trajectory run_episode(Controller& controller, const BuildingModel& model,
                       const WeatherSeries& weather, double duration_min,
                       const TrainConfig& cfg = {}, double initial_temp = 22.0);

struct FineTuneResult {
  DeployedController controller;
  std::vector<TrainLogEntry> log;
  Trajectory trajectory;
};

// Continued Algorithm-1 style training of a transferred controller:
// Q and Q' start from the transferred weights, eps = eps_low = 0, L_MAX = 3.
FineTuneResult fine_tune(const DeployedController& deployed,
                         const BuildingModel& model,
                         const WeatherSource& weather, int epochs,
                         const TrainConfig& cfg, std::uint64_t seed,
                         int epoch_days = -1);

}  // namespace hvacx
