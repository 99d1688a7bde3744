#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hvacx/building.hpp"
#include "hvacx/frontend.hpp"
#include "hvacx/types.hpp"

namespace hvacx {

class OnOffController;  // control.hpp

// Building-specific inverse network F^-1: (planned delta bins, state) -> per
// zone action logits, n groups of m.
struct InverseNet {
  nn::Mlp net;  // [(h+2)n + n+9, 128, 256, 256, 128, m*n]
  int n_zones;
  int m_levels;
  BinParams bins;
  FeatureScaling scaling;
};

InverseNet make_inverse(int n_zones, int m_levels, std::uint64_t seed,
                        BinParams bins = {});

// Normalized state portion of the inverse-net input: zone temps, clock,
// outside features (n + 9 values).
Eigen::RowVectorXd state_features(const SystemState& state,
                                  const FeatureScaling& scaling = {});

// Full inverse-net input: concatenated one-hot delta bins then state features.
Eigen::RowVectorXd inverse_features(const std::vector<int>& delta_bins,
                                    const SystemState& state,
                                    const BinParams& bins,
                                    const FeatureScaling& scaling = {});

// One record of the warm-up log.
struct OnOffRecord {
  SystemState s_pre;
  SystemState s_cur;
  ActionVector action;  // action that drove s_pre -> s_cur
};

// Runs the ON-OFF controller for `duration_min`, recording one sample per
// control period. Two weeks at 15-min cadence yields 1344 records.
std::vector<OnOffRecord> collect_onoff_data(const BuildingModel& model,
                                            const WeatherSeries& weather,
                                            OnOffController& controller,
                                            double duration_min,
                                            double initial_temp = 22.0);

struct InverseSample {
  std::vector<int> delta_bins;  // encoded actual per-zone temperature change
  SystemState s_pre;
  ActionVector action;  // label
  bool augmented;
};

struct InverseDataset {
  std::vector<InverseSample> samples;
  std::size_t collected = 0;
  std::size_t augmented = 0;
};

// Encodes actual temperature changes per record, then appends one boundary
// augmentation copy per record (all bins at the <= -b sentinel, all labels at
// the maximum level).
InverseDataset build_dataset(const std::vector<OnOffRecord>& log,
                             int max_level, const BinParams& bins = {});

struct InverseTrainResult {
  InverseNet net;
  std::vector<double> epoch_losses;      // mean loss per epoch
  std::vector<double> group_accuracy;    // final per-zone training accuracy
};

// He-init then ep_f passes of mini-batch grouped cross-entropy with Adam.
InverseTrainResult train_inverse(const InverseDataset& ds, int n_zones,
                                 int m_levels, int ep_f, double lr2,
                                 int batch_size, std::uint64_t seed,
                                 BinParams bins = {});

// Per-group argmax decode; ties break to the lowest level.
ActionVector infer_action(const InverseNet& net,
                          const std::vector<int>& delta_bins,
                          const SystemState& state);

// One grouped-cross-entropy Adam step on a batch of (delta bins, state,
// action label); returns the pre-step loss. When an rng is supplied, a random
// subset of zones gets its bin input re-drawn and excluded from the loss so
// each output group learns to key on its own bin (the batch's zones move
// nearly in phase, which otherwise invites cross-zone shortcuts).
double online_update(InverseNet& net, nn::AdamState& opt,
                     const std::vector<InverseSample>& batch, double lr2,
                     std::mt19937_64* rng = nullptr);

// Checkpoint IO; metadata records (n, m, b, h, normalization).
void save_inverse(const std::string& path, const InverseNet& net);
InverseNet load_inverse(const std::string& path);

}  // namespace hvacx
