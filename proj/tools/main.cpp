// driveintent: dataset generation, featurization, HMM training and
// prediction-time evaluation for lane-change intention models.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driveintent/experiment.hpp"
#include "driveintent/ingest.hpp"
#include "driveintent/model_io.hpp"
#include "driveintent/synth.hpp"

using namespace driveintent;

namespace {

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
  return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::vector<VehicleTrack> read_trajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  return parse_trajectories(in);
}

std::vector<LaneGeometry> read_lanes(const std::string& path, double width) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  return parse_lanes(in, width);
}

std::string manifest_path_for(const std::string& features_csv) {
  std::string path = features_csv;
  const std::string suffix = ".csv";
  if (path.size() >= suffix.size() &&
      path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
    path.resize(path.size() - suffix.size());
  return path + ".manifest.json";
}

void add_config(CLI::App* cmd) {
  cmd->set_config("--config", "", "Flat key=value config file; flags override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driving-intention prediction with per-intention HMMs"};
  app.require_subcommand(1);

  // ---------------------------------------------------------------- synth --
  SynthConfig synth_cfg;
  std::string synth_out = "synth_out";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
  add_config(synth_cmd);
  synth_cmd->add_option("--out", synth_out, "Output directory");
  synth_cmd->add_option("--lanes", synth_cfg.lanes, "Lane count");
  synth_cmd->add_option("--lane-width", synth_cfg.lane_width, "Lane width, m");
  synth_cmd->add_option("--trails-left", synth_cfg.trails_per_intention[0],
                        "Lane-change-left vehicles");
  synth_cmd->add_option("--trails-right", synth_cfg.trails_per_intention[1],
                        "Lane-change-right vehicles");
  synth_cmd->add_option("--trails-keep", synth_cfg.trails_per_intention[2],
                        "Lane-keep vehicles");
  synth_cmd->add_option("--speed-min", synth_cfg.speed_min, "m/s");
  synth_cmd->add_option("--speed-max", synth_cfg.speed_max, "m/s");
  synth_cmd->add_option("--change-duration", synth_cfg.change_duration,
                        "Lane-change duration, s");
  synth_cmd->add_option("--position-noise", synth_cfg.position_noise,
                        "Position noise sigma, m");
  synth_cmd->add_option("--traffic-density", synth_cfg.traffic_density,
                        "Surrounding vehicles per lane per 100 m");
  synth_cmd->add_flag("--interacting", synth_cfg.interacting,
                      "Gap-aware surrounding traffic");
  synth_cmd->add_option("--pre-drift", synth_cfg.pre_drift,
                        "Pre-maneuver lateral bias, m");
  synth_cmd->add_option("--seed", synth_cfg.seed, "Master seed");

  // ------------------------------------------------------------ featurize --
  std::string feat_traj, feat_lanes, feat_out = "features.csv";
  std::string feat_set = "base";
  double feat_lane_width = kLaneWidthDefault;
  int feat_trail_steps = kTrailStepsDefault;
  RegionSpec feat_regions;
  auto* feat_cmd =
      app.add_subcommand("featurize", "Extract labeled trails and features");
  add_config(feat_cmd);
  feat_cmd->add_option("--trajectories", feat_traj, "Trajectory CSV")->required();
  feat_cmd->add_option("--lanes", feat_lanes, "Lane CSV")->required();
  feat_cmd->add_option("--lane-width", feat_lane_width, "Lane width, m");
  feat_cmd->add_option("--trail-steps", feat_trail_steps, "Steps per trail");
  feat_cmd
      ->add_option("--feature-set", feat_set,
                   "base | base+relpos | base+relpos+ratio")
      ->check(CLI::IsMember({"base", "base+relpos", "base+relpos+ratio"}));
  feat_cmd->add_option("--out", feat_out, "Output features CSV");
  feat_cmd->add_option("--region-l1", feat_regions.rear_extent, "m");
  feat_cmd->add_option("--region-l2", feat_regions.front_extent, "m");
  feat_cmd->add_option("--region-l3", feat_regions.same_lane_half_width, "m");
  feat_cmd->add_option("--region-l4", feat_regions.adjacent_band_width, "m");

  // ---------------------------------------------------------------- train --
  std::string train_features, train_bank = "bank.json", train_split = "split.json";
  std::string train_char = "discrete", train_mode = "pooled";
  ExperimentConfig train_cfg;
  std::uint64_t train_seed = 1;
  auto* train_cmd =
      app.add_subcommand("train", "Train one HMM per driving intention");
  add_config(train_cmd);
  train_cmd->add_option("--features", train_features, "Featurized CSV")->required();
  train_cmd
      ->add_option("--characterization", train_char, "discrete | continuous")
      ->check(CLI::IsMember({"discrete", "continuous"}));
  train_cmd->add_option("--clusters", train_cfg.num_clusters, "K (discrete)");
  train_cmd->add_option("--states", train_cfg.num_states, "Q");
  train_cmd->add_option("--components", train_cfg.num_components, "M (continuous)");
  train_cmd->add_option("--train-fraction", train_cfg.train_fraction,
                        "By-vehicle train fraction");
  train_cmd->add_option("--mode", train_mode, "pooled | paper")
      ->check(CLI::IsMember({"pooled", "paper"}));
  train_cmd->add_option("--max-iter", train_cfg.max_iter, "EM iteration cap");
  train_cmd->add_option("--tol", train_cfg.tol, "Relative convergence tolerance");
  train_cmd->add_option("--restarts", train_cfg.restarts,
                        "EM re-inits per model, best likelihood kept");
  train_cmd->add_flag("--kmeans-plus-plus", train_cfg.kmeans_plus_plus,
                      "k-means++ codebook seeding");
  train_cmd->add_option("--seed", train_seed, "Split/init seed");
  train_cmd->add_option("--bank", train_bank, "Output model bank");
  train_cmd->add_option("--split", train_split, "Output split manifest");

  // -------------------------------------------------------------- predict --
  std::string pred_features, pred_bank;
  double pred_time = 0.0;
  auto* pred_cmd = app.add_subcommand(
      "predict", "Score featurized trails; one line per trail: "
                 "label,logL_1,logL_2,logL_3,prefix_len,tie_flag");
  add_config(pred_cmd);
  pred_cmd->add_option("--features", pred_features, "Featurized trail CSV")
      ->required();
  pred_cmd->add_option("--bank", pred_bank, "Model bank file")->required();
  pred_cmd->add_option("--prediction-time", pred_time, "Seconds before trail end");

  // ------------------------------------------------------------- evaluate --
  std::string eval_features, eval_bank, eval_split, eval_out = "accuracy.csv";
  std::string eval_grid = "0.0,0.5,1.0,1.5,2.0,2.5,3.0";
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "Accuracy over the held-out split per prediction time");
  add_config(eval_cmd);
  eval_cmd->add_option("--features", eval_features, "Featurized CSV")->required();
  eval_cmd->add_option("--bank", eval_bank, "Model bank file")->required();
  eval_cmd->add_option("--split", eval_split, "Split manifest")->required();
  eval_cmd->add_option("--prediction-times", eval_grid, "Comma-separated grid");
  eval_cmd->add_option("--out", eval_out, "Output accuracy CSV");

  // ---------------------------------------------------------------- sweep --
  std::string sweep_traj, sweep_lanes, sweep_out = "sweep_out";
  std::string sweep_chars = "discrete", sweep_fsets = "base";
  std::string sweep_ks = "8", sweep_qs = "4", sweep_ms = "2";
  std::string sweep_seeds = "1,2,3,4,5";
  std::string sweep_grid = "0.0,0.5,1.0,1.5,2.0,2.5,3.0";
  std::string sweep_mode = "pooled";
  double sweep_fraction = 0.7, sweep_lane_width = kLaneWidthDefault;
  int sweep_restarts = 1;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Cartesian experiment grid; one accuracy CSV per cell");
  add_config(sweep_cmd);
  sweep_cmd->add_option("--trajectories", sweep_traj, "Trajectory CSV")->required();
  sweep_cmd->add_option("--lanes", sweep_lanes, "Lane CSV")->required();
  sweep_cmd->add_option("--lane-width", sweep_lane_width, "Lane width, m");
  sweep_cmd->add_option("--characterizations", sweep_chars,
                        "Comma list: discrete,continuous");
  sweep_cmd->add_option("--clusters", sweep_ks, "Comma list of K");
  sweep_cmd->add_option("--states", sweep_qs, "Comma list of Q");
  sweep_cmd->add_option("--components", sweep_ms, "Comma list of M");
  sweep_cmd->add_option("--feature-sets", sweep_fsets,
                        "Comma list of feature sets");
  sweep_cmd->add_option("--seeds", sweep_seeds, "Comma list of seeds");
  sweep_cmd->add_option("--prediction-times", sweep_grid, "Comma-separated grid");
  sweep_cmd->add_option("--train-fraction", sweep_fraction, "");
  sweep_cmd->add_option("--mode", sweep_mode, "pooled | paper")
      ->check(CLI::IsMember({"pooled", "paper"}));
  sweep_cmd->add_option("--restarts", sweep_restarts,
                        "EM re-inits per model, best likelihood kept");
  sweep_cmd->add_option("--out", sweep_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      const SynthDataset data = generate(synth_cfg);
      write_dataset(data, synth_out);
      std::printf("wrote %zu vehicles to %s\n", data.tracks.size(),
                  synth_out.c_str());
    } else if (*feat_cmd) {
      const auto tracks = read_trajectories(feat_traj);
      const auto lanes = read_lanes(feat_lanes, feat_lane_width);
      FeaturizeConfig cfg;
      cfg.set = feature_set_from_string(feat_set);
      cfg.regions = feat_regions;
      const FeaturizedDataset dataset =
          featurize(tracks, lanes, cfg, feat_trail_steps, feat_lane_width);
      write_features_csv(dataset, feat_out, manifest_path_for(feat_out));
      std::printf("wrote %zu trails (%zu features) to %s\n",
                  dataset.trails.size(), dataset.feature_names.size(),
                  feat_out.c_str());
    } else if (*train_cmd) {
      train_cfg.characterization = characterization_from_string(train_char);
      train_cfg.mode = train_mode_from_string(train_mode);
      const FeaturizedDataset dataset = load_features_csv(
          train_features, manifest_path_for(train_features));
      const TrainedBank trained = train_models(dataset, train_cfg, train_seed);
      save_model_bank(trained.bank, train_bank);
      save_split(trained.split, train_split);
      std::printf("trained %s bank on %zu vehicles; %zu test trails -> %s\n",
                  train_char.c_str(), trained.split.train_vehicles.size(),
                  trained.split.test_trails.size(), train_bank.c_str());
    } else if (*pred_cmd) {
      const ModelBank bank = load_model_bank(pred_bank);
      const FeaturizedDataset dataset =
          load_features_csv(pred_features, manifest_path_for(pred_features));
      if (dataset.feature_names != bank.feature_names)
        throw Error("feature manifest does not match the model bank");
      for (const auto& trail : dataset.trails) {
        const Prediction p = predict(bank, trail, pred_time);
        std::printf("%s,%.9g,%.9g,%.9g,%d,%d\n",
                    p.scorable() ? to_string(*p.label).c_str() : "unscorable",
                    p.log_likelihoods[0], p.log_likelihoods[1],
                    p.log_likelihoods[2], p.prefix_length, p.tie ? 1 : 0);
      }
    } else if (*eval_cmd) {
      const ModelBank bank = load_model_bank(eval_bank);
      const FeaturizedDataset dataset =
          load_features_csv(eval_features, manifest_path_for(eval_features));
      const SplitManifest split = load_split(eval_split);
      const EvalTable table =
          evaluate(bank, dataset, split, parse_double_list(eval_grid));
      write_eval_csv(table, eval_out);
      std::printf("wrote %zu rows to %s\n", table.rows.size(), eval_out.c_str());
    } else if (*sweep_cmd) {
      const auto tracks = read_trajectories(sweep_traj);
      const auto lanes = read_lanes(sweep_lanes, sweep_lane_width);
      SweepConfig cfg;
      cfg.characterizations.clear();
      for (const auto& c : parse_string_list(sweep_chars))
        cfg.characterizations.push_back(characterization_from_string(c));
      cfg.cluster_counts.clear();
      for (const auto& k : parse_string_list(sweep_ks))
        cfg.cluster_counts.push_back(std::stoi(k));
      cfg.state_counts.clear();
      for (const auto& q : parse_string_list(sweep_qs))
        cfg.state_counts.push_back(std::stoi(q));
      cfg.component_counts.clear();
      for (const auto& m : parse_string_list(sweep_ms))
        cfg.component_counts.push_back(std::stoi(m));
      cfg.feature_sets.clear();
      for (const auto& f : parse_string_list(sweep_fsets))
        cfg.feature_sets.push_back(feature_set_from_string(f));
      cfg.seeds = parse_seed_list(sweep_seeds);
      cfg.prediction_times = parse_double_list(sweep_grid);
      cfg.train_fraction = sweep_fraction;
      cfg.mode = train_mode_from_string(sweep_mode);
      cfg.restarts = sweep_restarts;
      cfg.lane_width = sweep_lane_width;
      sweep(tracks, lanes, cfg, sweep_out);
      std::printf("sweep written to %s\n", sweep_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
