#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driveintent/features.hpp"
#include "driveintent/model_io.hpp"
#include "driveintent/predictor.hpp"
#include "driveintent/synth.hpp"

namespace driveintent {

/// A featurized dataset plus the sidecar manifest fields models validate
/// against.
struct FeaturizedDataset {
  std::vector<FeatureTrail> trails;
  std::vector<std::string> feature_names;
  FeatureSet set = FeatureSet::Base;
  int trail_steps = kTrailStepsDefault;
  double step_seconds = kStepSecondsDefault;
  double lane_width = kLaneWidthDefault;
};

/// trajectories + lanes -> featurized trails (ingest, trail extraction and
/// feature computation in one step).
FeaturizedDataset featurize(const std::vector<VehicleTrack>& tracks,
                            const std::vector<LaneGeometry>& lanes,
                            const FeaturizeConfig& cfg, int trail_steps,
                            double lane_width);

void write_features_csv(const FeaturizedDataset& dataset,
                        const std::string& csv_path,
                        const std::string& manifest_path);
FeaturizedDataset load_features_csv(const std::string& csv_path,
                                    const std::string& manifest_path);

enum class Characterization { Discrete, Continuous };

std::string to_string(Characterization c);
Characterization characterization_from_string(const std::string& name);

struct ExperimentConfig {
  Characterization characterization = Characterization::Discrete;
  int num_clusters = 8;    // K, discrete
  int num_states = 4;      // Q
  int num_components = 2;  // M, continuous
  double train_fraction = 0.7;
  TrainMode mode = TrainMode::Pooled;
  double tol = 1e-6;
  int max_iter = 100;
  int restarts = 1;  // EM re-inits per model, best log-likelihood kept
  bool kmeans_plus_plus = false;
};

/// Seeded by-vehicle split, stratified per intention so class test counts
/// are exact. No vehicle contributes trails to both sides.
struct SplitManifest {
  std::uint64_t seed = 0;
  double train_fraction = 0.7;
  std::vector<std::string> train_vehicles;
  std::vector<std::string> test_vehicles;

  struct TrailKey {
    std::string vehicle_id;
    double t0 = 0.0;
    Intention label = Intention::Keep;
  };
  std::vector<TrailKey> test_trails;
};

void save_split(const SplitManifest& split, const std::string& path);
SplitManifest load_split(const std::string& path);

struct TrainedBank {
  ModelBank bank;
  SplitManifest split;
};

/// Splits by vehicle, fits standardization (and the codebook, discrete case)
/// on the training side only, and trains one model per intention on that
/// intention's training trails. A class with fewer than Q*5 trails is an
/// error naming the class.
TrainedBank train_models(const FeaturizedDataset& dataset,
                         const ExperimentConfig& cfg, std::uint64_t seed);

struct EvalRow {
  double prediction_time = 0.0;
  double accuracy = 0.0;
  int n_correct = 0;
  int n_total = 0;
  std::array<double, 3> per_class_accuracy{};  // left, right, keep
  std::array<int, 3> per_class_correct{};
  std::array<int, 3> per_class_total{};
};

struct EvalTable {
  std::vector<EvalRow> rows;
};

/// Accuracy over the split's test trails at every prediction time in the
/// grid. Pure function of (bank, dataset, split, grid).
EvalTable evaluate(const ModelBank& bank, const FeaturizedDataset& dataset,
                   const SplitManifest& split, const std::vector<double>& grid);

std::string eval_csv(const EvalTable& table);
void write_eval_csv(const EvalTable& table, const std::string& path);

/// Cartesian sweep over characterizations / parameters / feature sets /
/// seeds; one evaluation CSV per cell plus a cross-seed summary, all under
/// out_dir with the resolved configuration echoed.
struct SweepConfig {
  std::vector<Characterization> characterizations = {Characterization::Discrete};
  std::vector<int> cluster_counts = {8};              // K axis (discrete)
  std::vector<int> state_counts = {4};                // Q axis
  std::vector<int> component_counts = {2};            // M axis (continuous)
  std::vector<FeatureSet> feature_sets = {FeatureSet::Base};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<double> prediction_times = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  double train_fraction = 0.7;
  TrainMode mode = TrainMode::Pooled;
  int restarts = 1;
  RegionSpec regions{};
  int trail_steps = kTrailStepsDefault;
  double step_seconds = kStepSecondsDefault;
  double lane_width = kLaneWidthDefault;
};

void sweep(const std::vector<VehicleTrack>& tracks,
           const std::vector<LaneGeometry>& lanes, const SweepConfig& cfg,
           const std::string& out_dir);

}  // namespace driveintent
