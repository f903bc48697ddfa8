#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "driveintent/experiment.hpp"
#include "helpers.hpp"

using namespace driveintent;

namespace {

FeaturizedDataset synth_dataset(std::array<int, 3> per_class, std::uint64_t seed,
                                FeatureSet set = FeatureSet::Base,
                                bool interacting = false,
                                double density = 0.0) {
  SynthConfig cfg;
  cfg.trails_per_intention = per_class;
  cfg.seed = seed;
  cfg.interacting = interacting;
  cfg.traffic_density = density;
  const SynthDataset data = generate(cfg);
  FeaturizeConfig fcfg;
  fcfg.set = set;
  return featurize(data.tracks, data.lanes, fcfg, cfg.trail_steps, cfg.lane_width);
}

}  // namespace

TEST_CASE("train_models: split manifest matches the 0.7 fraction per class") {
  const auto dataset = synth_dataset({200, 200, 200}, 11);
  REQUIRE(dataset.trails.size() == 600);

  ExperimentConfig cfg;
  cfg.characterization = Characterization::Discrete;
  cfg.num_clusters = 8;
  cfg.num_states = 4;
  const TrainedBank trained = train_models(dataset, cfg, 1);

  CHECK(trained.bank.kind == ModelKind::Discrete);
  CHECK(trained.bank.codebook.k() == 8);
  std::array<int, 3> test_counts{};
  for (const auto& key : trained.split.test_trails)
    ++test_counts[intention_index(key.label)];
  CHECK(test_counts[0] == 60);
  CHECK(test_counts[1] == 60);
  CHECK(test_counts[2] == 60);

  // No vehicle on both sides.
  std::set<std::string> train(trained.split.train_vehicles.begin(),
                              trained.split.train_vehicles.end());
  for (const auto& v : trained.split.test_vehicles) CHECK_FALSE(train.count(v));
}

TEST_CASE("train_models: continuous Q=1 M=1 is a per-class Gaussian baseline") {
  const auto dataset = synth_dataset({30, 30, 30}, 13);
  ExperimentConfig cfg;
  cfg.characterization = Characterization::Continuous;
  cfg.num_states = 1;
  cfg.num_components = 1;
  const TrainedBank trained = train_models(dataset, cfg, 2);

  const std::set<std::string> train_set(trained.split.train_vehicles.begin(),
                                        trained.split.train_vehicles.end());
  // Expected: per-feature sample statistics of each class's standardized
  // training rows.
  for (int c = 0; c < 3; ++c) {
    const GmmHmm& model = trained.bank.continuous[c];
    CHECK(model.transition[0] == doctest::Approx(1.0));
    CHECK(model.initial[0] == doctest::Approx(1.0));

    std::vector<double> sum(4, 0.0), sum2(4, 0.0);
    int rows = 0;
    for (const auto& trail : dataset.trails) {
      if (trail.label != kIntentions[c] || !train_set.count(trail.vehicle_id))
        continue;
      for (int t = 0; t < trail.steps(); ++t) {
        std::vector<double> row(trail.row(t).begin(), trail.row(t).end());
        trained.bank.standardizer.apply_row(row);
        for (int j = 0; j < 4; ++j) {
          sum[j] += row[j];
          sum2[j] += row[j] * row[j];
        }
        ++rows;
      }
    }
    for (int j = 0; j < 4; ++j) {
      const double mean = sum[j] / rows;
      const double sd =
          std::max(std::sqrt(sum2[j] / rows - mean * mean), kSigmaFloorDefault);
      CHECK(model.emissions.mu(j, 0, 0) == doctest::Approx(mean).epsilon(1e-6));
      CHECK(model.emissions.sigma(j, 0, 0) == doctest::Approx(sd).epsilon(1e-6));
    }
  }
}

TEST_CASE("train_models: a class below the Q*5 guard is an error") {
  const auto dataset = synth_dataset({0, 30, 30}, 17);
  ExperimentConfig cfg;
  cfg.num_states = 4;
  CHECK_THROWS_WITH_AS(train_models(dataset, cfg, 1),
                       doctest::Contains("change_left"), Error);
}

TEST_CASE("evaluate: constant Keep-bank scores one third on a balanced set") {
  const auto dataset = synth_dataset({20, 20, 20}, 19);

  // Every row maps to symbol 0; the Keep model emits it with near-certainty,
  // the change models with near-zero probability, so Keep always wins.
  ModelBank bank;
  bank.kind = ModelKind::Discrete;
  bank.trail_steps = 9;
  bank.step_seconds = 0.5;
  bank.feature_names = dataset.feature_names;
  bank.standardizer.mean.assign(4, 0.0);
  bank.standardizer.stddev.assign(4, 1.0);
  bank.codebook.arity = 4;
  bank.codebook.centroids.assign(4, 0.0);  // single centroid
  for (int i = 0; i < 3; ++i) {
    DiscreteHmm m;
    m.num_states = 1;
    m.num_symbols = 2;
    m.transition = {1.0};
    m.initial = {1.0};
    m.emission = i == intention_index(Intention::Keep)
                     ? std::vector<double>{1.0 - 1e-6, 1e-6}
                     : std::vector<double>{1e-6, 1.0 - 1e-6};
    bank.discrete[i] = m;
  }

  SplitManifest split;
  split.train_fraction = 0.0;
  for (const auto& trail : dataset.trails) {
    split.test_vehicles.push_back(trail.vehicle_id);
    split.test_trails.push_back(
        {trail.vehicle_id, trail.timestamps.front(), trail.label});
  }

  const EvalTable table =
      evaluate(bank, dataset, split, {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0});
  for (const auto& row : table.rows) {
    CHECK(row.n_total == 60);
    CHECK(row.accuracy == doctest::Approx(1.0 / 3.0));
    CHECK(row.per_class_accuracy[2] == doctest::Approx(1.0));
    CHECK(row.per_class_accuracy[0] == doctest::Approx(0.0));
    CHECK(row.n_correct <= row.n_total);
  }
}

TEST_CASE("evaluate: full prefix beats a 3-second-early prediction") {
  const auto dataset = synth_dataset({60, 60, 60}, 23);
  ExperimentConfig cfg;
  cfg.characterization = Characterization::Continuous;
  cfg.num_states = 4;
  cfg.num_components = 2;
  const TrainedBank trained = train_models(dataset, cfg, 3);
  const EvalTable table =
      evaluate(trained.bank, dataset, trained.split, {0.0, 3.0});
  CHECK(table.rows[0].accuracy > table.rows[1].accuracy);
}

TEST_CASE("evaluate: determinism and error paths") {
  const auto dataset = synth_dataset({25, 25, 25}, 29);
  ExperimentConfig cfg;
  cfg.characterization = Characterization::Discrete;
  cfg.num_clusters = 6;
  cfg.num_states = 2;
  const TrainedBank a = train_models(dataset, cfg, 5);
  const TrainedBank b = train_models(dataset, cfg, 5);
  CHECK(a.bank.codebook.centroids == b.bank.codebook.centroids);
  for (int i = 0; i < 3; ++i) {
    CHECK(a.bank.discrete[i].emission == b.bank.discrete[i].emission);
    CHECK(a.bank.discrete[i].transition == b.bank.discrete[i].transition);
  }

  const std::vector<double> grid = {0.0, 1.0, 2.0};
  const EvalTable t1 = evaluate(a.bank, dataset, a.split, grid);
  const EvalTable t2 = evaluate(a.bank, dataset, a.split, grid);
  CHECK(eval_csv(t1) == eval_csv(t2));

  SplitManifest empty = a.split;
  empty.test_trails.clear();
  CHECK_THROWS_AS(evaluate(a.bank, dataset, empty, grid), Error);

  CHECK_THROWS_AS(evaluate(a.bank, dataset, a.split, {0.7}), Error);
}

TEST_CASE("features CSV and split manifest round-trip") {
  namespace fs = std::filesystem;
  const auto dataset =
      synth_dataset({8, 8, 8}, 31, FeatureSet::BaseRelposRatio, false, 1.0);
  const auto dir = fs::temp_directory_path() / "driveintent_test_io";
  fs::create_directories(dir);
  const std::string csv = (dir / "features.csv").string();
  const std::string manifest = (dir / "features.manifest.json").string();
  write_features_csv(dataset, csv, manifest);
  const FeaturizedDataset loaded = load_features_csv(csv, manifest);

  CHECK(loaded.feature_names == dataset.feature_names);
  CHECK(loaded.set == dataset.set);
  REQUIRE(loaded.trails.size() == dataset.trails.size());
  for (std::size_t i = 0; i < loaded.trails.size(); ++i) {
    CHECK(loaded.trails[i].vehicle_id == dataset.trails[i].vehicle_id);
    CHECK(loaded.trails[i].label == dataset.trails[i].label);
    REQUIRE(loaded.trails[i].values.size() == dataset.trails[i].values.size());
    for (std::size_t j = 0; j < loaded.trails[i].values.size(); ++j)
      CHECK(loaded.trails[i].values[j] ==
            doctest::Approx(dataset.trails[i].values[j]).epsilon(1e-8));
  }

  ExperimentConfig cfg;
  cfg.num_states = 1;
  cfg.num_clusters = 4;
  const TrainedBank trained = train_models(dataset, cfg, 7);
  const std::string split_path = (dir / "split.json").string();
  save_split(trained.split, split_path);
  const SplitManifest loaded_split = load_split(split_path);
  CHECK(loaded_split.train_vehicles == trained.split.train_vehicles);
  CHECK(loaded_split.test_vehicles == trained.split.test_vehicles);
  CHECK(loaded_split.test_trails.size() == trained.split.test_trails.size());
  fs::remove_all(dir);
}

TEST_CASE("sweep: reproducible accuracy CSV bytes") {
  namespace fs = std::filesystem;
  SynthConfig scfg;
  scfg.trails_per_intention = {15, 15, 15};
  scfg.seed = 37;
  const SynthDataset data = generate(scfg);

  SweepConfig cfg;
  cfg.characterizations = {Characterization::Discrete};
  cfg.cluster_counts = {4};
  cfg.state_counts = {2};
  cfg.feature_sets = {FeatureSet::Base};
  cfg.seeds = {1, 2};
  cfg.prediction_times = {0.0, 1.0};

  const auto dir1 = fs::temp_directory_path() / "driveintent_sweep1";
  const auto dir2 = fs::temp_directory_path() / "driveintent_sweep2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  sweep(data.tracks, data.lanes, cfg, dir1.string());
  sweep(data.tracks, data.lanes, cfg, dir2.string());

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir1)) {
    if (entry.path().extension() != ".csv") continue;
    std::ifstream f1(entry.path());
    std::ifstream f2(dir2 / entry.path().filename());
    REQUIRE(f2.good());
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
    ++compared;
  }
  CHECK(compared >= 3);  // two eval cells + summary + features
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}
