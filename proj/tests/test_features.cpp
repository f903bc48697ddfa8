#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "driveintent/features.hpp"
#include "helpers.hpp"

using namespace driveintent;
using testutil::make_trail;
using testutil::straight_lanes;

TEST_CASE("kinematics: speed and lane-relative heading") {
  const auto lanes = straight_lanes(1, 3.5);
  std::vector<TrajectoryPoint> pts;
  for (int i = 0; i < 9; ++i)
    pts.push_back({0.5 * i, 3.0 * i, i == 0 ? 0.0 : 4.0 * 0.0});
  // First displacement (0,0) -> (3,4): v = 10, theta = atan2(4,3).
  pts[1] = {0.5, 3.0, 4.0 * 1.0};
  // keep remaining points simple along x from there
  for (int i = 2; i < 9; ++i) pts[i] = {0.5 * i, 3.0 * i, 4.0};

  const auto kin = kinematics(make_trail(pts, lanes), 0.5);
  CHECK(kin[1].speed == doctest::Approx(10.0));
  CHECK(kin[1].heading == doctest::Approx(std::atan2(4.0, 3.0)));
  CHECK(kin[0].speed == doctest::Approx(10.0));  // forward difference
}

TEST_CASE("kinematics: stationary vehicle") {
  const auto lanes = straight_lanes(1, 3.5);
  std::vector<TrajectoryPoint> pts;
  for (int i = 0; i < 9; ++i) pts.push_back({0.5 * i, 12.0, 0.4});
  const auto kin = kinematics(make_trail(pts, lanes), 0.5);
  for (const auto& k : kin) {
    CHECK(k.speed == 0.0);
    CHECK(k.heading == 0.0);
  }
}

TEST_CASE("kinematics: motion along the tangent has zero heading") {
  const auto lanes = straight_lanes(1, 3.5);
  std::vector<TrajectoryPoint> pts;
  for (int i = 0; i < 9; ++i) pts.push_back({0.5 * i, 6.0 * i, 0.8});
  const auto kin = kinematics(make_trail(pts, lanes), 0.5);
  for (const auto& k : kin) {
    CHECK(k.speed == doctest::Approx(12.0));
    CHECK(k.heading == doctest::Approx(0.0));
  }
}

TEST_CASE("lane_offsets: d1 + d2 = width") {
  const auto lanes = straight_lanes(1, 3.5);
  auto check_offsets = [&](double y, double d1, double d2) {
    std::vector<TrajectoryPoint> pts;
    for (int i = 0; i < 9; ++i) pts.push_back({0.5 * i, 5.0 * i, y});
    const auto offs = lane_offsets(make_trail(pts, lanes), lanes);
    for (const auto& [a, b] : offs) {
      CHECK(a == doctest::Approx(d1));
      CHECK(b == doctest::Approx(d2));
      CHECK(a + b == doctest::Approx(3.5).epsilon(1e-9));
    }
  };
  check_offsets(0.0, 1.75, 1.75);
  check_offsets(1.0, 0.75, 2.75);
  check_offsets(1.75, 0.0, 3.5);  // on the left lane line
}

TEST_CASE("classify_region: spec geometry") {
  const RegionSpec spec{};
  CHECK(classify_region(5.0, 0.0, spec) == Region::FrontCenter);
  CHECK_FALSE(classify_region(7.0, 0.0, spec).has_value());  // beyond l2
  CHECK(classify_region(5.0, 2.0, spec) == Region::FrontLeft);
  CHECK(classify_region(-3.0, -2.0, spec) == Region::RearRight);
  CHECK(classify_region(0.5, 3.0, spec) == Region::SideLeft);
  CHECK_FALSE(classify_region(0.0, 0.0, spec).has_value());  // center cell
  CHECK_FALSE(classify_region(0.0, 5.0, spec).has_value());  // beyond bands
}

TEST_CASE("select_surrounding keeps the nearest per region") {
  const RegionSpec spec{};
  std::vector<RelativeState> cands = {{4.0, 0.0}, {3.0, 0.0}, {5.5, 0.0}};
  const auto chosen = select_surrounding(cands, spec);
  CHECK(chosen[static_cast<int>(Region::FrontCenter)] == 1);
  int picked = 0;
  for (int c : chosen) picked += c >= 0 ? 1 : 0;
  CHECK(picked == 1);
}

TEST_CASE("select_surrounding property: regions partition the candidates") {
  const RegionSpec spec{};
  auto rng = make_rng(11);
  std::uniform_real_distribution<double> s(-8.0, 8.0), e(-6.0, 6.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<RelativeState> cands;
    for (int i = 0; i < 12; ++i) cands.push_back({s(rng), e(rng)});
    // No candidate may be claimed by two regions.
    const auto chosen = select_surrounding(cands, spec);
    std::set<int> seen;
    for (int c : chosen) {
      if (c < 0) continue;
      CHECK_FALSE(seen.count(c));
      seen.insert(c);
    }
    // And each candidate belongs to at most one region by construction.
    for (const auto& cand : cands) {
      int memberships = 0;
      if (classify_region(cand.rel_s, cand.rel_e, spec)) ++memberships;
      CHECK(memberships <= 1);
    }
  }
}

namespace {

std::vector<VehicleTrack> constant_speed_track(const std::string& id,
                                               double speed, double y,
                                               double x0 = 0.0) {
  VehicleTrack track;
  track.vehicle_id = id;
  for (int i = 0; i < 9; ++i)
    track.points.push_back({0.5 * i, x0 + speed * 0.5 * i, y});
  return {track};
}

}  // namespace

TEST_CASE("augment: empty traffic gives sentinels and unit ratios") {
  const auto lanes = straight_lanes(3, 3.5);
  auto tracks = constant_speed_track("t", 10.0, 3.5);  // middle lane
  const auto trails = extract_trails(tracks[0], lanes);
  REQUIRE(trails.size() == 1);

  FeaturizeConfig cfg;
  cfg.set = FeatureSet::BaseRelposRatio;
  const auto feats = compute_features(trails, tracks, lanes, cfg);
  REQUIRE(feats.size() == 1);
  const auto names = feature_names(cfg.set);
  REQUIRE(feats[0].arity == 22);

  const RegionSpec spec{};
  for (int t = 0; t < 9; ++t) {
    const auto row = feats[0].row(t);
    for (int r = 0; r < kRegionCount; ++r) {
      const Vec2 sentinel = region_sentinel(static_cast<Region>(r), spec);
      CHECK(row[4 + 2 * r] == doctest::Approx(sentinel.x));
      CHECK(row[4 + 2 * r + 1] == doctest::Approx(sentinel.y));
    }
    CHECK(row[20] == doctest::Approx(1.0));  // vratio_left
    CHECK(row[21] == doctest::Approx(1.0));  // vratio_right
  }
}

TEST_CASE("augment: velocity ratio and relative position pass-through") {
  const auto lanes = straight_lanes(3, 3.5);
  std::vector<VehicleTrack> tracks = constant_speed_track("t", 10.0, 3.5, 0.0);
  // Left-adjacent lane (y = 7) vehicle at 12 m/s staying 3 m ahead.
  tracks.push_back(constant_speed_track("n_left", 12.0, 7.0, 3.0)[0]);
  // Same-lane vehicle 5 m ahead at the same speed.
  tracks.push_back(constant_speed_track("n_front", 10.0, 3.5, 5.0)[0]);

  const auto trails = extract_trails(tracks[0], lanes);
  REQUIRE(trails.size() == 1);
  FeaturizeConfig cfg;
  cfg.set = FeatureSet::BaseRelposRatio;
  const auto feats = compute_features(trails, tracks, lanes, cfg);
  REQUIRE(feats.size() == 1);

  // Step 2: the left vehicle sits at rel_s = 5 m, still inside the l2 band.
  const auto row = feats[0].row(2);
  const int fc = 4 + 2 * static_cast<int>(Region::FrontCenter);
  CHECK(row[fc] == doctest::Approx(5.0));
  CHECK(row[fc + 1] == doctest::Approx(0.0));
  const int fl = 4 + 2 * static_cast<int>(Region::FrontLeft);
  CHECK(row[fl] == doctest::Approx(5.0));
  CHECK(row[fl + 1] == doctest::Approx(3.5));
  // current lane mean = (10 + 10) / 2, left lane mean = 12.
  CHECK(row[20] == doctest::Approx(12.0 / 10.0));
  CHECK(row[21] == doctest::Approx(1.0));  // right lane empty
}

TEST_CASE("build_matrix shapes and provenance") {
  FeatureTrail a, b;
  a.vehicle_id = "a";
  b.vehicle_id = "b";
  a.label = b.label = Intention::Keep;
  a.arity = b.arity = 4;
  for (int t = 0; t < 9; ++t) {
    a.timestamps.push_back(0.5 * t);
    b.timestamps.push_back(0.5 * t);
    for (int j = 0; j < 4; ++j) {
      a.values.push_back(t + 0.1 * j);
      b.values.push_back(100 + t + 0.1 * j);
    }
  }
  const auto m = build_matrix({a, b}, feature_names(FeatureSet::Base));
  CHECK(m.rows() == 18);
  CHECK(m.arity == 4);
  // Row (l-1)T + t holds vehicle l's step-t vector.
  CHECK(m.row(9 + 3)[0] == doctest::Approx(103.0));
  CHECK(m.trails[1].vehicle_id == "b");

  const auto single = build_matrix({a}, feature_names(FeatureSet::Base));
  CHECK(single.rows() == 9);
  CHECK(std::equal(single.data.begin(), single.data.end(), a.values.begin()));

  FeatureTrail c = a;
  c.vehicle_id = "c";
  c.arity = 6;
  c.values.clear();
  for (int t = 0; t < 9; ++t)
    for (int j = 0; j < 6; ++j) c.values.push_back(0.0);
  CHECK_THROWS_WITH_AS(build_matrix({a, c}, feature_names(FeatureSet::Base)),
                       doctest::Contains("c"), Error);
}

TEST_CASE("base features are rigid-motion invariant") {
  const double phi = 0.7;
  const Vec2 shift{13.0, -5.0};
  auto rot = [&](Vec2 p) {
    return Vec2{p.x * std::cos(phi) - p.y * std::sin(phi) + shift.x,
                p.x * std::sin(phi) + p.y * std::cos(phi) + shift.y};
  };

  const auto lanes = straight_lanes(2, 3.5);
  auto lanes_rot = lanes;
  for (auto& lane : lanes_rot)
    for (auto& p : lane.centerline) p = rot(p);

  auto rng = make_rng(3);
  std::uniform_real_distribution<double> jitter(-0.4, 0.4);
  VehicleTrack track, track_rot;
  track.vehicle_id = track_rot.vehicle_id = "v";
  for (int i = 0; i < 9; ++i) {
    TrajectoryPoint p{0.5 * i, 4.0 * i + jitter(rng), 0.3 + jitter(rng) * 0.5};
    track.points.push_back(p);
    const Vec2 q = rot({p.x, p.y});
    track_rot.points.push_back({p.t, q.x, q.y});
  }

  FeaturizeConfig cfg;
  const auto f1 = compute_features(extract_trails(track, lanes), {track}, lanes, cfg);
  const auto f2 = compute_features(extract_trails(track_rot, lanes_rot),
                                   {track_rot}, lanes_rot, cfg);
  REQUIRE(f1.size() == 1);
  REQUIRE(f2.size() == 1);
  for (std::size_t i = 0; i < f1[0].values.size(); ++i)
    CHECK(f1[0].values[i] == doctest::Approx(f2[0].values[i]).epsilon(1e-9));
}

TEST_CASE("standardizer: zero mean unit variance, constant columns safe") {
  FeatureTrail a;
  a.vehicle_id = "a";
  a.arity = 2;
  for (int t = 0; t < 9; ++t) {
    a.timestamps.push_back(0.5 * t);
    a.values.push_back(static_cast<double>(t));
    a.values.push_back(7.0);  // constant column
  }
  auto m = build_matrix({a}, {"x", "c"});
  Standardizer st;
  st.fit(m);
  st.apply(m);
  double mean0 = 0.0;
  for (int d = 0; d < m.rows(); ++d) mean0 += m.row(d)[0];
  CHECK(mean0 == doctest::Approx(0.0));
  for (int d = 0; d < m.rows(); ++d) CHECK(m.row(d)[1] == doctest::Approx(0.0));
}
