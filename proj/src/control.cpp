#include "hvacx/control.hpp"

#include <cmath>

namespace hvacx {

OnOffController::OnOffController(double upper_bound, double lower_bound,
                                 int engage_level)
    : upper_(upper_bound), lower_(lower_bound), engage_level_(engage_level) {
  if (lower_ >= upper_) {
    throw ValidationError("ON-OFF bounds must satisfy lower < upper");
  }
  if (engage_level_ < 1) {
    throw ValidationError("ON-OFF engage level must be >= 1");
  }
}

OnOffController OnOffController::for_equipment(const HvacEquipment& eq,
                                               double upper_bound,
                                               double lower_bound) {
  return OnOffController(upper_bound, lower_bound, eq.levels() - 1);
}

ActionVector OnOffController::act(const SystemState& state) {
  const int n = state.n_zones();
  if (static_cast<int>(latched_.size()) != n) {
    latched_.assign(n, 0);
  }
  for (int i = 0; i < n; ++i) {
    if (state.s_in[i] >= upper_) {
      latched_[i] = engage_level_;
    } else if (state.s_in[i] <= lower_) {
      latched_[i] = 0;
    }
    // in between: hold the latched level
  }
  return latched_;
}

DeployedController::DeployedController(FrontEndNet frontend, InverseNet backend)
    : frontend_(std::move(frontend)), backend_(std::move(backend)) {}

ActionVector DeployedController::act(const SystemState& state) {
  if (state.n_zones() != backend_.n_zones) {
    throw ShapeError("deployed controller: state zone count != backend n");
  }
  const Eigen::MatrixXd qvals = q_forward(frontend_, state);
  std::vector<int> delta(state.n_zones());
  for (int i = 0; i < state.n_zones(); ++i) {
    int best = 0;
    for (int k = 1; k < qvals.cols(); ++k) {
      if (qvals(i, k) > qvals(i, best)) best = k;
    }
    delta[i] = best;
  }
  return infer_action(backend_, delta, state);
}

void check_compatibility(const FrontEndNet& frontend, const InverseNet& backend,
                         const BuildingModel& model) {
  if (backend.n_zones != model.n_zones()) {
    throw ValidationError("backend trained for n=" +
                          std::to_string(backend.n_zones) +
                          " zones, building has " +
                          std::to_string(model.n_zones()));
  }
  if (backend.m_levels != model.equipment.levels()) {
    throw ValidationError("backend trained for m=" +
                          std::to_string(backend.m_levels) +
                          " levels, equipment has " +
                          std::to_string(model.equipment.levels()));
  }
  if (frontend.bins.h != backend.bins.h ||
      frontend.bins.b != backend.bins.b) {
    throw ValidationError("frontend and backend bin parameters differ");
  }
}

DeployedController load_deployed(const std::string& frontend_ckpt,
                                 const std::string& backend_ckpt,
                                 const BuildingModel& model) {
  FrontEndNet frontend = load_frontend(frontend_ckpt);
  InverseNet backend = load_inverse(backend_ckpt);
  check_compatibility(frontend, backend, model);
  return DeployedController(std::move(frontend), std::move(backend));
}

Trajectory run_episode(Controller& controller, const BuildingModel& model,
                       const WeatherSeries& weather, double duration_min,
                       const TrainConfig& cfg, double initial_temp) {
  if (!weather.covers(duration_min)) {
    throw HorizonError("run_episode: weather does not cover the episode");
  }
  const int steps =
      static_cast<int>(std::ceil(duration_min / kControlPeriodMin));
  Trajectory traj;
  traj.steps.reserve(steps);
  controller.reset();
  SystemState state = make_initial_state(model, weather, initial_temp);
  double prev_cost = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double reward = compute_reward(state, prev_cost, cfg);
    const ActionVector action = controller.act(state);
    const double cost = energy_cost(model, action, state.t);
    traj.steps.push_back({state, action, cost, reward});
    state = step(model, state, action, weather);
    prev_cost = cost;
  }
  return traj;
}

FineTuneResult fine_tune(const DeployedController& deployed,
                         const BuildingModel& model,
                         const WeatherSource& weather, int epochs,
                         const TrainConfig& cfg, std::uint64_t seed,
                         int epoch_days) {
  InverseNet inverse = deployed.backend();
  if (epochs <= 0) {
    return {DeployedController(deployed.frontend(), std::move(inverse)), {}, {}};
  }
  FrontendTrainOptions options;
  options.cfg = cfg;
  if (epoch_days > 0) options.cfg.epoch_days = epoch_days;
  options.init = deployed.frontend();
  options.finetune = true;
  options.epochs = epochs;
  options.record_trajectory = true;
  FrontendTrainResult r =
      train_frontend(model, weather, inverse, options, seed);
  return {DeployedController(std::move(r.net), std::move(inverse)),
          std::move(r.log), std::move(r.trajectory)};
}

}  // namespace hvacx
