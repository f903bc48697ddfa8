#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "driveintent/types.hpp"

namespace driveintent {

/// Configuration for the synthetic multi-lane trajectory generator. One
/// scripted vehicle per trail, each in its own time window; surrounding
/// traffic is added per density with independent lane-keep dynamics.
struct SynthConfig {
  int lanes = 3;
  double lane_width = kLaneWidthDefault;
  std::array<int, 3> trails_per_intention = {50, 50, 50};  // left, right, keep
  double speed_min = 8.0;   // m/s
  double speed_max = 16.0;  // m/s
  double change_duration = 2.5;  // s, 95% of the lateral transition
  double position_noise = 0.08;  // m, isotropic per-sample noise
  double traffic_density = 0.0;  // surrounding vehicles per lane per 100 m
  bool interacting = false;      // gap-aware traffic placement
  double pre_drift = 0.15;       // m, pre-maneuver lateral bias of changers
  double lateral_wobble = 0.12;  // m, OU stationary std of lane keepers
  double wobble_clamp = 1.0;     // m, hard bound on the wobble
  int trail_steps = kTrailStepsDefault;
  double step_seconds = kStepSecondsDefault;
  std::uint64_t seed = 1;
};

struct TruthRow {
  std::string vehicle_id;
  Intention label = Intention::Keep;
  std::optional<double> crossing_t;  // lane-change vehicles only
};

struct SynthDataset {
  std::vector<VehicleTrack> tracks;
  std::vector<LaneGeometry> lanes;
  std::vector<TruthRow> truth;
};

/// Deterministic given the seed (per-vehicle derived sub-seeds).
SynthDataset generate(const SynthConfig& cfg);

/// Writes trajectories.csv, lanes.csv and truth.csv with fixed formatting;
/// identical seeds reproduce identical bytes.
void write_dataset(const SynthDataset& dataset, const std::string& dir);

std::string trajectories_csv(const SynthDataset& dataset);
std::string lanes_csv(const SynthDataset& dataset);
std::string truth_csv(const SynthDataset& dataset);

}  // namespace driveintent
