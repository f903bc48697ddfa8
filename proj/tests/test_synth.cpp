#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "driveintent/ingest.hpp"
#include "driveintent/synth.hpp"

using namespace driveintent;

namespace {

// Labels every generated vehicle with extract_trails and counts agreement
// with the generator's intent.
std::pair<int, int> label_agreement(const SynthDataset& data) {
  std::map<std::string, Intention> intended;
  for (const auto& row : data.truth) intended[row.vehicle_id] = row.label;

  int agree = 0, total = 0;
  for (const auto& track : data.tracks) {
    ++total;
    const auto trails = extract_trails(track, data.lanes);
    const Intention want = intended.at(track.vehicle_id);
    if (want == Intention::Keep) {
      bool ok = !trails.empty();
      for (const auto& t : trails) ok = ok && t.label == Intention::Keep;
      agree += ok ? 1 : 0;
    } else {
      agree += trails.size() == 1 && trails[0].label == want ? 1 : 0;
    }
  }
  return {agree, total};
}

}  // namespace

TEST_CASE("generate: keep-only config round-trips through ingest") {
  SynthConfig cfg;
  cfg.trails_per_intention = {0, 0, 5};
  cfg.seed = 3;
  const SynthDataset data = generate(cfg);
  REQUIRE(data.tracks.size() == 5);

  int keep_trails = 0;
  for (const auto& track : data.tracks)
    for (const auto& trail : extract_trails(track, data.lanes)) {
      CHECK(trail.label == Intention::Keep);
      ++keep_trails;
    }
  CHECK(keep_trails == 5);
}

TEST_CASE("generate: noise-free change crosses exactly at the last step") {
  SynthConfig cfg;
  cfg.trails_per_intention = {1, 0, 0};
  cfg.position_noise = 0.0;
  cfg.lateral_wobble = 0.0;
  cfg.seed = 9;
  const SynthDataset data = generate(cfg);
  REQUIRE(data.tracks.size() == 1);
  REQUIRE(data.truth[0].crossing_t.has_value());

  const auto trails = extract_trails(data.tracks[0], data.lanes);
  REQUIRE(trails.size() == 1);
  const Trail& t = trails[0];
  CHECK(t.label == Intention::ChangeLeft);
  CHECK(t.steps[8].match.lane != t.steps[7].match.lane);
  for (int i = 1; i < 8; ++i) CHECK(t.steps[i].match.lane == t.steps[0].match.lane);
  // The generator's crossing time sits between the last two samples.
  CHECK(*data.truth[0].crossing_t > t.steps[7].point.t);
  CHECK(*data.truth[0].crossing_t < t.steps[8].point.t);
}

TEST_CASE("generate: identical seeds give identical bytes") {
  SynthConfig cfg;
  cfg.trails_per_intention = {5, 5, 5};
  cfg.traffic_density = 1.0;
  cfg.seed = 77;
  const SynthDataset a = generate(cfg);
  const SynthDataset b = generate(cfg);
  CHECK(trajectories_csv(a) == trajectories_csv(b));
  CHECK(lanes_csv(a) == lanes_csv(b));
  CHECK(truth_csv(a) == truth_csv(b));

  cfg.seed = 78;
  const SynthDataset c = generate(cfg);
  CHECK(trajectories_csv(a) != trajectories_csv(c));
}

TEST_CASE("generate: label fidelity on a mixed dataset") {
  SynthConfig cfg;
  cfg.trails_per_intention = {70, 70, 70};
  cfg.seed = 5;
  const auto [agree, total] = label_agreement(generate(cfg));
  CHECK(total == 210);
  CHECK(static_cast<double>(agree) / total >= 0.99);
}

TEST_CASE("generate: speeds stay within the configured range") {
  SynthConfig cfg;
  cfg.trails_per_intention = {10, 10, 10};
  cfg.interacting = true;
  cfg.traffic_density = 1.0;
  cfg.seed = 21;
  const SynthDataset data = generate(cfg);
  // Bound on finite-difference speed jitter: lateral maneuver + wobble
  // contribute up to ~1 m/s in quadrature, position noise the rest.
  const double slack = 1.0 + 8.0 * cfg.position_noise / cfg.step_seconds;
  for (const auto& track : data.tracks)
    for (std::size_t i = 1; i < track.points.size(); ++i) {
      const double dx = track.points[i].x - track.points[i - 1].x;
      const double dy = track.points[i].y - track.points[i - 1].y;
      const double v = std::hypot(dx, dy) / cfg.step_seconds;
      CHECK(v >= cfg.speed_min - slack);
      CHECK(v <= cfg.speed_max + slack);
    }
}

TEST_CASE("generate: invalid configurations are rejected") {
  SynthConfig cfg;
  cfg.change_duration = 5.0;  // >= 4.5 s window
  CHECK_THROWS_AS(generate(cfg), Error);

  SynthConfig one_lane;
  one_lane.lanes = 1;
  one_lane.trails_per_intention = {1, 0, 0};
  CHECK_THROWS_AS(generate(one_lane), Error);

  SynthConfig bad_drift;
  bad_drift.pre_drift = 2.0;  // past the lane line
  CHECK_THROWS_AS(generate(bad_drift), Error);

  SynthConfig bad_speed;
  bad_speed.speed_max = bad_speed.speed_min - 1.0;
  CHECK_THROWS_AS(generate(bad_speed), Error);
}

TEST_CASE("generate: interacting mode keeps the destination gap open") {
  SynthConfig cfg;
  cfg.trails_per_intention = {15, 15, 0};
  cfg.interacting = true;
  cfg.traffic_density = 1.5;
  cfg.seed = 12;
  const SynthDataset data = generate(cfg);
  const auto [agree, total] = label_agreement(data);
  CHECK(static_cast<double>(agree) / total >= 0.99);
}
