#include "driveintent/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "driveintent/ingest.hpp"
#include "driveintent/rng.hpp"

namespace driveintent {

namespace {

using nlohmann::json;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

std::string to_string(Characterization c) {
  return c == Characterization::Discrete ? "discrete" : "continuous";
}

Characterization characterization_from_string(const std::string& name) {
  if (name == "discrete") return Characterization::Discrete;
  if (name == "continuous") return Characterization::Continuous;
  throw ParseError("unknown characterization '" + name + "'");
}

FeaturizedDataset featurize(const std::vector<VehicleTrack>& tracks,
                            const std::vector<LaneGeometry>& lanes,
                            const FeaturizeConfig& cfg, int trail_steps,
                            double lane_width) {
  IngestConfig ingest;
  ingest.trail_steps = trail_steps;
  ingest.step_seconds = cfg.step_seconds;
  ingest.off_road_factor = cfg.off_road_factor;

  std::vector<Trail> trails;
  for (const auto& track : tracks) {
    auto extracted = extract_trails(track, lanes, ingest);
    trails.insert(trails.end(), std::make_move_iterator(extracted.begin()),
                  std::make_move_iterator(extracted.end()));
  }

  FeaturizedDataset dataset;
  dataset.trails = compute_features(trails, tracks, lanes, cfg);
  dataset.feature_names = feature_names(cfg.set);
  dataset.set = cfg.set;
  dataset.trail_steps = trail_steps;
  dataset.step_seconds = cfg.step_seconds;
  dataset.lane_width = lane_width;
  return dataset;
}

void write_features_csv(const FeaturizedDataset& dataset,
                        const std::string& csv_path,
                        const std::string& manifest_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error("cannot write '" + csv_path + "'");
  out << "vehicle_id,label,t";
  for (const auto& name : dataset.feature_names) out << ',' << name;
  out << '\n';
  for (const auto& trail : dataset.trails) {
    for (int t = 0; t < trail.steps(); ++t) {
      out << trail.vehicle_id << ',' << to_string(trail.label) << ','
          << fmt("%.1f", trail.timestamps[t]);
      for (double v : trail.row(t)) out << ',' << fmt("%.9g", v);
      out << '\n';
    }
  }
  out.close();

  json manifest;
  manifest["feature_names"] = dataset.feature_names;
  manifest["feature_set"] = to_string(dataset.set);
  manifest["trail_steps"] = dataset.trail_steps;
  manifest["step_seconds"] = dataset.step_seconds;
  manifest["lane_width"] = dataset.lane_width;
  manifest["heading_convention"] = "relative to lane tangent";
  std::ofstream mout(manifest_path, std::ios::binary);
  if (!mout) throw Error("cannot write '" + manifest_path + "'");
  mout << manifest.dump(2) << "\n";
}

FeaturizedDataset load_features_csv(const std::string& csv_path,
                                    const std::string& manifest_path) {
  FeaturizedDataset dataset;
  {
    std::ifstream in(manifest_path);
    if (!in) throw Error("cannot read '" + manifest_path + "'");
    json manifest;
    try {
      in >> manifest;
    } catch (const json::exception& e) {
      throw ParseError("manifest '" + manifest_path + "': " + e.what());
    }
    dataset.feature_names =
        manifest.at("feature_names").get<std::vector<std::string>>();
    dataset.set =
        feature_set_from_string(manifest.at("feature_set").get<std::string>());
    dataset.trail_steps = manifest.at("trail_steps").get<int>();
    dataset.step_seconds = manifest.at("step_seconds").get<double>();
    dataset.lane_width = manifest.at("lane_width").get<double>();
  }

  std::ifstream in(csv_path);
  if (!in) throw Error("cannot read '" + csv_path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("'" + csv_path + "': empty file");

  const int arity = static_cast<int>(dataset.feature_names.size());
  const int T = dataset.trail_steps;

  FeatureTrail current;
  int line_no = 1;
  auto flush = [&] {
    if (current.timestamps.empty()) return;
    if (current.steps() != T)
      throw ParseError("'" + csv_path + "': vehicle '" + current.vehicle_id +
                       "' has a partial trail of " +
                       std::to_string(current.steps()) + " rows");
    dataset.trails.push_back(std::move(current));
    current = FeatureTrail{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (static_cast<int>(fields.size()) != 3 + arity)
      throw ParseError("'" + csv_path + "' line " + std::to_string(line_no) +
                       ": expected " + std::to_string(3 + arity) + " fields");

    const std::string& vid = fields[0];
    const Intention label = intention_from_string(fields[1]);
    if (current.steps() == T ||
        (!current.timestamps.empty() &&
         (vid != current.vehicle_id || label != current.label)))
      flush();
    if (current.timestamps.empty()) {
      current.vehicle_id = vid;
      current.label = label;
      current.arity = arity;
    }
    current.timestamps.push_back(std::stod(fields[2]));
    for (int j = 0; j < arity; ++j)
      current.values.push_back(std::stod(fields[3 + j]));
  }
  flush();
  return dataset;
}

void save_split(const SplitManifest& split, const std::string& path) {
  json j;
  j["seed"] = split.seed;
  j["train_fraction"] = split.train_fraction;
  j["train_vehicles"] = split.train_vehicles;
  j["test_vehicles"] = split.test_vehicles;
  json trails = json::array();
  for (const auto& key : split.test_trails)
    trails.push_back({{"vehicle_id", key.vehicle_id},
                      {"t0", key.t0},
                      {"label", to_string(key.label)}});
  j["test_trails"] = std::move(trails);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

SplitManifest load_split(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("split manifest '" + path + "': " + e.what());
  }
  SplitManifest split;
  split.seed = j.at("seed").get<std::uint64_t>();
  split.train_fraction = j.at("train_fraction").get<double>();
  split.train_vehicles = j.at("train_vehicles").get<std::vector<std::string>>();
  split.test_vehicles = j.at("test_vehicles").get<std::vector<std::string>>();
  for (const auto& t : j.at("test_trails"))
    split.test_trails.push_back(
        {t.at("vehicle_id").get<std::string>(), t.at("t0").get<double>(),
         intention_from_string(t.at("label").get<std::string>())});
  return split;
}

namespace {

// Stratified by-vehicle split: a vehicle's class is its first trail's label.
SplitManifest make_split(const FeaturizedDataset& dataset, double fraction,
                         std::uint64_t seed) {
  std::map<std::string, Intention> vehicle_class;
  for (const auto& trail : dataset.trails)
    vehicle_class.try_emplace(trail.vehicle_id, trail.label);

  SplitManifest split;
  split.seed = seed;
  split.train_fraction = fraction;

  std::set<std::string> train_set, test_set;
  for (int c = 0; c < 3; ++c) {
    std::vector<std::string> vehicles;
    for (const auto& [vid, label] : vehicle_class)
      if (label == kIntentions[c]) vehicles.push_back(vid);
    std::sort(vehicles.begin(), vehicles.end());

    auto rng = make_rng(mix_seed(seed, 0x73706c6974ULL + c));
    for (std::size_t i = 0; i + 1 < vehicles.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, vehicles.size() - 1);
      std::swap(vehicles[i], vehicles[pick(rng)]);
    }
    const auto n_train = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(vehicles.size())));
    for (std::size_t i = 0; i < vehicles.size(); ++i)
      (i < n_train ? train_set : test_set).insert(vehicles[i]);
  }

  split.train_vehicles.assign(train_set.begin(), train_set.end());
  split.test_vehicles.assign(test_set.begin(), test_set.end());
  for (const auto& trail : dataset.trails)
    if (test_set.count(trail.vehicle_id))
      split.test_trails.push_back(
          {trail.vehicle_id, trail.timestamps.front(), trail.label});
  return split;
}

}  // namespace

TrainedBank train_models(const FeaturizedDataset& dataset,
                         const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
    throw Error("train fraction must be in (0, 1)");

  // Guard against vacuous fits before doing any work.
  std::array<int, 3> class_counts{};
  for (const auto& trail : dataset.trails)
    ++class_counts[intention_index(trail.label)];
  for (int c = 0; c < 3; ++c)
    if (class_counts[c] < cfg.num_states * 5)
      throw Error("class '" + to_string(kIntentions[c]) + "' has only " +
                  std::to_string(class_counts[c]) + " trails, need at least " +
                  std::to_string(cfg.num_states * 5));

  TrainedBank trained;
  trained.split = make_split(dataset, cfg.train_fraction, seed);
  const std::set<std::string> train_set(trained.split.train_vehicles.begin(),
                                        trained.split.train_vehicles.end());

  std::vector<FeatureTrail> train_trails;
  for (const auto& trail : dataset.trails)
    if (train_set.count(trail.vehicle_id)) train_trails.push_back(trail);
  for (int c = 0; c < 3; ++c) {
    const int n = static_cast<int>(
        std::count_if(train_trails.begin(), train_trails.end(),
                      [&](const auto& t) { return t.label == kIntentions[c]; }));
    if (n == 0)
      throw Error("class '" + to_string(kIntentions[c]) +
                  "' has no training trails after the split");
  }

  ModelBank& bank = trained.bank;
  bank.kind = cfg.characterization == Characterization::Discrete
                  ? ModelKind::Discrete
                  : ModelKind::Continuous;
  bank.trail_steps = dataset.trail_steps;
  bank.step_seconds = dataset.step_seconds;
  bank.feature_names = dataset.feature_names;

  // Standardization statistics come from the training side only.
  FeatureMatrix train_matrix = build_matrix(train_trails, dataset.feature_names);
  bank.standardizer.fit(train_matrix);
  bank.standardizer.apply(train_matrix);

  TrainOptions opts;
  opts.mode = cfg.mode;
  opts.tol = cfg.tol;
  opts.max_iter = cfg.max_iter;
  opts.restarts = cfg.restarts;

  const int T = dataset.trail_steps;
  const int N = static_cast<int>(dataset.feature_names.size());

  if (bank.kind == ModelKind::Discrete) {
    KmeansOptions km_opts;
    km_opts.plus_plus = cfg.kmeans_plus_plus;
    const KmeansResult km = kmeans_fit(
        train_matrix, cfg.num_clusters, mix_seed(seed, 0x636f6465ULL), km_opts);
    bank.codebook = km.codebook;

    for (int c = 0; c < 3; ++c) {
      std::vector<std::vector<int>> sequences;
      for (int l = 0; l < train_matrix.num_trails; ++l) {
        if (train_matrix.trails[l].label != kIntentions[c]) continue;
        sequences.push_back(assign_sequence(
            bank.codebook,
            std::span<const double>(
                train_matrix.data.data() + static_cast<std::size_t>(l) * T * N,
                static_cast<std::size_t>(T) * N),
            T));
      }
      opts.seed = mix_seed(seed, 0x747261696eULL + c);
      const DiscreteTrainResult result =
          train_discrete(sequences, cfg.num_states, cfg.num_clusters, opts);
      bank.discrete[c] = result.model;
      bank.meta[c] = {opts.seed, to_string(cfg.mode), result.iterations,
                      result.log_likelihood_history.empty()
                          ? 0.0
                          : result.log_likelihood_history.back()};
    }
  } else {
    for (int c = 0; c < 3; ++c) {
      std::vector<std::vector<double>> class_trails;
      for (int l = 0; l < train_matrix.num_trails; ++l) {
        if (train_matrix.trails[l].label != kIntentions[c]) continue;
        const double* base =
            train_matrix.data.data() + static_cast<std::size_t>(l) * T * N;
        class_trails.emplace_back(base, base + static_cast<std::size_t>(T) * N);
      }
      opts.seed = mix_seed(seed, 0x747261696eULL + c);
      const ContinuousTrainResult result = train_continuous(
          class_trails, N, cfg.num_states, cfg.num_components, opts);
      bank.continuous[c] = result.model;
      bank.meta[c] = {opts.seed, to_string(cfg.mode), result.iterations,
                      result.log_likelihood_history.empty()
                          ? 0.0
                          : result.log_likelihood_history.back()};
    }
  }
  return trained;
}

EvalTable evaluate(const ModelBank& bank, const FeaturizedDataset& dataset,
                   const SplitManifest& split,
                   const std::vector<double>& grid) {
  if (bank.feature_names != dataset.feature_names)
    throw Error("dataset feature manifest does not match the model bank");

  // Look up the split's test trails in the dataset.
  std::map<std::pair<std::string, long long>, const FeatureTrail*> by_key;
  for (const auto& trail : dataset.trails)
    by_key[{trail.vehicle_id,
            std::llround(trail.timestamps.front() * 1000.0)}] = &trail;

  std::vector<const FeatureTrail*> test_trails;
  for (const auto& key : split.test_trails) {
    auto it = by_key.find({key.vehicle_id, std::llround(key.t0 * 1000.0)});
    if (it == by_key.end())
      throw Error("test trail of vehicle '" + key.vehicle_id +
                  "' not present in the dataset");
    test_trails.push_back(it->second);
  }
  if (test_trails.empty()) throw Error("evaluate: empty test set");

  EvalTable table;
  for (double tau : grid) {
    EvalRow row;
    row.prediction_time = tau;
    for (const FeatureTrail* trail : test_trails) {
      const Prediction pred = predict(bank, *trail, tau);
      const int c = intention_index(trail->label);
      ++row.per_class_total[c];
      ++row.n_total;
      if (pred.scorable() && *pred.label == trail->label) {
        ++row.per_class_correct[c];
        ++row.n_correct;
      }
    }
    row.accuracy = static_cast<double>(row.n_correct) / row.n_total;
    for (int c = 0; c < 3; ++c)
      row.per_class_accuracy[c] =
          row.per_class_total[c] > 0
              ? static_cast<double>(row.per_class_correct[c]) /
                    row.per_class_total[c]
              : 0.0;
    table.rows.push_back(row);
  }
  return table;
}

std::string eval_csv(const EvalTable& table) {
  std::string out =
      "prediction_time,accuracy,n_correct,n_total,"
      "acc_change_left,acc_change_right,acc_keep\n";
  for (const auto& row : table.rows) {
    out += fmt("%.1f", row.prediction_time);
    out += ',' + fmt("%.6f", row.accuracy);
    out += ',' + std::to_string(row.n_correct);
    out += ',' + std::to_string(row.n_total);
    for (int c = 0; c < 3; ++c) out += ',' + fmt("%.6f", row.per_class_accuracy[c]);
    out += '\n';
  }
  return out;
}

void write_eval_csv(const EvalTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << eval_csv(table);
}

namespace {

std::string cell_tag(Characterization kind, int k, int q, int m,
                     FeatureSet set) {
  std::string fs = to_string(set);
  for (auto& ch : fs)
    if (ch == '+') ch = '-';
  if (kind == Characterization::Discrete)
    return "discrete_k" + std::to_string(k) + "_q" + std::to_string(q) + "_" + fs;
  return "continuous_q" + std::to_string(q) + "_m" + std::to_string(m) + "_" + fs;
}

}  // namespace

void sweep(const std::vector<VehicleTrack>& tracks,
           const std::vector<LaneGeometry>& lanes, const SweepConfig& cfg,
           const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  // Echo the resolved configuration for provenance.
  {
    std::ofstream out(out_dir + "/config_resolved.txt", std::ios::binary);
    out << "characterizations =";
    for (auto c : cfg.characterizations) out << ' ' << to_string(c);
    out << "\ncluster_counts =";
    for (int k : cfg.cluster_counts) out << ' ' << k;
    out << "\nstate_counts =";
    for (int q : cfg.state_counts) out << ' ' << q;
    out << "\ncomponent_counts =";
    for (int m : cfg.component_counts) out << ' ' << m;
    out << "\nfeature_sets =";
    for (auto s : cfg.feature_sets) out << ' ' << to_string(s);
    out << "\nseeds =";
    for (auto s : cfg.seeds) out << ' ' << s;
    out << "\nprediction_times =";
    for (double t : cfg.prediction_times) out << ' ' << fmt("%.1f", t);
    out << "\ntrain_fraction = " << fmt("%.3f", cfg.train_fraction);
    out << "\nmode = " << to_string(cfg.mode);
    out << "\nrestarts = " << cfg.restarts;
    out << "\ntrail_steps = " << cfg.trail_steps;
    out << "\nstep_seconds = " << fmt("%.2f", cfg.step_seconds);
    out << "\nlane_width = " << fmt("%.2f", cfg.lane_width);
    out << "\n";
  }

  std::string summary =
      "cell,feature_set,prediction_time,mean_accuracy,std_accuracy,n_seeds\n";

  for (FeatureSet set : cfg.feature_sets) {
    FeaturizeConfig fcfg;
    fcfg.set = set;
    fcfg.regions = cfg.regions;
    fcfg.step_seconds = cfg.step_seconds;
    const FeaturizedDataset dataset =
        featurize(tracks, lanes, fcfg, cfg.trail_steps, cfg.lane_width);
    std::string fs_tag = to_string(set);
    for (auto& ch : fs_tag)
      if (ch == '+') ch = '-';
    write_features_csv(dataset, out_dir + "/features_" + fs_tag + ".csv",
                       out_dir + "/features_" + fs_tag + ".manifest.json");

    auto run_cell = [&](ExperimentConfig ecfg) {
      ecfg.restarts = cfg.restarts;
      const std::string tag =
          cell_tag(ecfg.characterization, ecfg.num_clusters, ecfg.num_states,
                   ecfg.num_components, set);
      std::vector<EvalTable> tables;
      for (std::uint64_t seed : cfg.seeds) {
        const TrainedBank trained = train_models(dataset, ecfg, seed);
        const EvalTable table =
            evaluate(trained.bank, dataset, trained.split, cfg.prediction_times);
        write_eval_csv(table, out_dir + "/eval_" + tag + "_s" +
                                  std::to_string(seed) + ".csv");
        save_model_bank(trained.bank, out_dir + "/bank_" + tag + "_s" +
                                          std::to_string(seed) + ".json");
        save_split(trained.split, out_dir + "/split_" + tag + "_s" +
                                      std::to_string(seed) + ".json");
        tables.push_back(table);
      }
      for (std::size_t i = 0; i < cfg.prediction_times.size(); ++i) {
        double mean = 0.0;
        for (const auto& t : tables) mean += t.rows[i].accuracy;
        mean /= static_cast<double>(tables.size());
        double var = 0.0;
        for (const auto& t : tables) {
          const double d = t.rows[i].accuracy - mean;
          var += d * d;
        }
        const double stddev =
            std::sqrt(var / static_cast<double>(tables.size()));
        summary += tag + ',' + to_string(set) + ',' +
                   fmt("%.1f", cfg.prediction_times[i]) + ',' +
                   fmt("%.6f", mean) + ',' + fmt("%.6f", stddev) + ',' +
                   std::to_string(tables.size()) + '\n';
      }
    };

    for (Characterization kind : cfg.characterizations) {
      for (int q : cfg.state_counts) {
        if (kind == Characterization::Discrete) {
          for (int k : cfg.cluster_counts) {
            ExperimentConfig ecfg;
            ecfg.characterization = kind;
            ecfg.num_clusters = k;
            ecfg.num_states = q;
            ecfg.train_fraction = cfg.train_fraction;
            ecfg.mode = cfg.mode;
            run_cell(ecfg);
          }
        } else {
          for (int m : cfg.component_counts) {
            ExperimentConfig ecfg;
            ecfg.characterization = kind;
            ecfg.num_states = q;
            ecfg.num_components = m;
            ecfg.train_fraction = cfg.train_fraction;
            ecfg.mode = cfg.mode;
            run_cell(ecfg);
          }
        }
      }
    }
  }

  std::ofstream out(out_dir + "/summary.csv", std::ios::binary);
  if (!out) throw Error("cannot write sweep summary");
  out << summary;
}

}  // namespace driveintent
