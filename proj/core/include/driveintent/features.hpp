#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driveintent/ingest.hpp"
#include "driveintent/types.hpp"

namespace driveintent {

/// Which feature columns a dataset carries.
enum class FeatureSet {
  Base,             // v, theta, d1, d2
  BaseRelpos,       // + per-region relative positions (8 x 2)
  BaseRelposRatio,  // + adjacent/current lane velocity ratios (2)
};

std::string to_string(FeatureSet set);
FeatureSet feature_set_from_string(const std::string& name);

/// Geometry of the eight surrounding-vehicle regions (a 3x3 grid around the
/// targeted vehicle minus the center cell, in its lane frame).
struct RegionSpec {
  double rear_extent = 4.0;          // l1, m
  double front_extent = 6.0;         // l2, m
  double same_lane_half_width = 1.0; // l3, m
  double adjacent_band_width = 1.5;  // l4, m
  double align_tolerance = 2.0;      // |ds| below this counts as side-by-side
};

enum class Region : int {
  FrontLeft = 0,
  FrontCenter,
  FrontRight,
  SideLeft,
  SideRight,
  RearLeft,
  RearCenter,
  RearRight,
};

inline constexpr int kRegionCount = 8;

const char* region_name(Region r);

/// Classifies a relative position (ds longitudinal, de lateral, both in the
/// target's lane frame) into one of the eight regions. The aligned band takes
/// precedence over rear/front so the grid partitions the plane; same-lane
/// aligned is the excluded center cell.
std::optional<Region> classify_region(double rel_s, double rel_e,
                                      const RegionSpec& spec);

/// Outer-corner coordinates of a region, used as the empty-region sentinel
/// ("a vehicle at maximal non-influencing distance").
Vec2 region_sentinel(Region r, const RegionSpec& spec);

struct RelativeState {
  double rel_s = 0.0;
  double rel_e = 0.0;
};

/// Keeps, per region, the candidate minimizing Euclidean distance. Returns
/// indices into `candidates` (-1 for an empty region).
std::array<int, kRegionCount> select_surrounding(
    std::span<const RelativeState> candidates, const RegionSpec& spec);

struct Kinematics {
  double speed = 0.0;    // m/s
  double heading = 0.0;  // radians, relative to the lane tangent, (-pi, pi]
};

/// Per-step speed and lane-relative moving direction. The first step uses the
/// forward difference; zero displacement keeps the previous heading.
std::vector<Kinematics> kinematics(const Trail& trail, double step_seconds);

/// Per-step distances to the left (d1) and right (d2) lane lines of the
/// step's matched lane; d1 + d2 equals the lane width.
std::vector<std::pair<double, double>> lane_offsets(
    const Trail& trail, const std::vector<LaneGeometry>& lanes);

/// One featurized trail: trail_steps rows of `arity` named features.
struct FeatureTrail {
  std::string vehicle_id;
  Intention label = Intention::Keep;
  std::vector<double> timestamps;  // trail_steps entries
  std::vector<double> values;      // row-major, trail_steps x arity
  int arity = 0;

  std::span<const double> row(int t) const {
    return {values.data() + static_cast<std::size_t>(t) * arity,
            static_cast<std::size_t>(arity)};
  }
  int steps() const { return static_cast<int>(timestamps.size()); }
};

/// Stacked mobility features of L vehicles: row (l * T + t) is vehicle l's
/// step-t vector.
struct FeatureMatrix {
  int steps_per_trail = 0;  // T
  int num_trails = 0;       // L
  int arity = 0;            // N
  std::vector<double> data; // row-major, (T*L) x N
  std::vector<std::string> names;

  struct TrailRef {
    std::string vehicle_id;
    Intention label;
    double t0;
  };
  std::vector<TrailRef> trails;

  int rows() const { return steps_per_trail * num_trails; }
  std::span<const double> row(int d) const {
    return {data.data() + static_cast<std::size_t>(d) * arity,
            static_cast<std::size_t>(arity)};
  }
  std::span<double> mutable_row(int d) {
    return {data.data() + static_cast<std::size_t>(d) * arity,
            static_cast<std::size_t>(arity)};
  }
};

/// Stacks trails vehicle-major. All trails must share arity and step count;
/// a mismatch raises Error naming the vehicle.
FeatureMatrix build_matrix(const std::vector<FeatureTrail>& trails,
                           const std::vector<std::string>& names);

/// Ordered column names for a feature set.
std::vector<std::string> feature_names(FeatureSet set);

struct FeaturizeConfig {
  FeatureSet set = FeatureSet::Base;
  RegionSpec regions{};
  double step_seconds = kStepSecondsDefault;
  double off_road_factor = 3.0;
};

/// Full featurization: base kinematics/offsets per trail, plus (depending on
/// the feature set) surrounding-vehicle relative positions with empty-region
/// sentinels and adjacent/current lane velocity ratios. `tracks` must contain
/// every vehicle that may appear as surrounding traffic.
std::vector<FeatureTrail> compute_features(
    const std::vector<Trail>& trails, const std::vector<VehicleTrack>& tracks,
    const std::vector<LaneGeometry>& lanes, const FeaturizeConfig& cfg);

/// Per-feature z-scoring; statistics always come from the training set.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;  // constant columns get stddev 1

  void fit(const FeatureMatrix& m);
  void apply(FeatureMatrix& m) const;
  void apply_row(std::span<double> row) const;
  int arity() const { return static_cast<int>(mean.size()); }
};

}  // namespace driveintent
