#include "driveintent/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace driveintent {

std::string to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::Base:
      return "base";
    case FeatureSet::BaseRelpos:
      return "base+relpos";
    case FeatureSet::BaseRelposRatio:
      return "base+relpos+ratio";
  }
  throw Error("invalid feature set");
}

FeatureSet feature_set_from_string(const std::string& name) {
  if (name == "base") return FeatureSet::Base;
  if (name == "base+relpos") return FeatureSet::BaseRelpos;
  if (name == "base+relpos+ratio") return FeatureSet::BaseRelposRatio;
  throw ParseError("unknown feature set '" + name + "'");
}

const char* region_name(Region r) {
  switch (r) {
    case Region::FrontLeft:
      return "front_left";
    case Region::FrontCenter:
      return "front_center";
    case Region::FrontRight:
      return "front_right";
    case Region::SideLeft:
      return "side_left";
    case Region::SideRight:
      return "side_right";
    case Region::RearLeft:
      return "rear_left";
    case Region::RearCenter:
      return "rear_center";
    case Region::RearRight:
      return "rear_right";
  }
  throw Error("invalid region");
}

std::optional<Region> classify_region(double rel_s, double rel_e,
                                      const RegionSpec& spec) {
  const double outer = spec.same_lane_half_width + 2.0 * spec.adjacent_band_width;

  enum class Lat { Left, Same, Right };
  Lat lat;
  if (rel_e > spec.same_lane_half_width && rel_e <= outer)
    lat = Lat::Left;
  else if (rel_e >= -spec.same_lane_half_width && rel_e <= spec.same_lane_half_width)
    lat = Lat::Same;
  else if (rel_e < -spec.same_lane_half_width && rel_e >= -outer)
    lat = Lat::Right;
  else
    return std::nullopt;

  enum class Lon { Front, Aligned, Rear };
  Lon lon;
  if (std::abs(rel_s) <= spec.align_tolerance)
    lon = Lon::Aligned;
  else if (rel_s < 0.0 && rel_s >= -spec.rear_extent)
    lon = Lon::Rear;
  else if (rel_s > 0.0 && rel_s <= spec.front_extent)
    lon = Lon::Front;
  else
    return std::nullopt;

  if (lon == Lon::Aligned) {
    if (lat == Lat::Same) return std::nullopt;  // the target's own cell
    return lat == Lat::Left ? Region::SideLeft : Region::SideRight;
  }
  if (lon == Lon::Front) {
    if (lat == Lat::Left) return Region::FrontLeft;
    if (lat == Lat::Same) return Region::FrontCenter;
    return Region::FrontRight;
  }
  if (lat == Lat::Left) return Region::RearLeft;
  if (lat == Lat::Same) return Region::RearCenter;
  return Region::RearRight;
}

Vec2 region_sentinel(Region r, const RegionSpec& spec) {
  const double outer = spec.same_lane_half_width + 2.0 * spec.adjacent_band_width;
  switch (r) {
    case Region::FrontLeft:
      return {spec.front_extent, outer};
    case Region::FrontCenter:
      return {spec.front_extent, 0.0};
    case Region::FrontRight:
      return {spec.front_extent, -outer};
    case Region::SideLeft:
      return {0.0, outer};
    case Region::SideRight:
      return {0.0, -outer};
    case Region::RearLeft:
      return {-spec.rear_extent, outer};
    case Region::RearCenter:
      return {-spec.rear_extent, 0.0};
    case Region::RearRight:
      return {-spec.rear_extent, -outer};
  }
  throw Error("invalid region");
}

std::array<int, kRegionCount> select_surrounding(
    std::span<const RelativeState> candidates, const RegionSpec& spec) {
  std::array<int, kRegionCount> chosen;
  chosen.fill(-1);
  std::array<double, kRegionCount> best_d2;
  best_d2.fill(0.0);

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto region = classify_region(candidates[i].rel_s, candidates[i].rel_e, spec);
    if (!region) continue;
    const int r = static_cast<int>(*region);
    const double d2 = candidates[i].rel_s * candidates[i].rel_s +
                      candidates[i].rel_e * candidates[i].rel_e;
    if (chosen[r] < 0 || d2 < best_d2[r]) {
      chosen[r] = static_cast<int>(i);
      best_d2[r] = d2;
    }
  }
  return chosen;
}

std::vector<Kinematics> kinematics(const Trail& trail, double step_seconds) {
  const int T = static_cast<int>(trail.steps.size());
  if (T < 2) throw Error("kinematics needs at least two steps");

  std::vector<Kinematics> out(T);
  for (int t = 0; t < T; ++t) {
    // First step: forward difference; later steps: backward difference.
    const int hi = t == 0 ? 1 : t;
    const Vec2 a{trail.steps[hi - 1].point.x, trail.steps[hi - 1].point.y};
    const Vec2 b{trail.steps[hi].point.x, trail.steps[hi].point.y};
    const Vec2 disp = b - a;
    const double dist = norm(disp);
    if (dist < 1e-12) {
      out[t].speed = 0.0;
      out[t].heading = t == 0 ? 0.0 : out[t - 1].heading;
      continue;
    }
    out[t].speed = dist / step_seconds;
    out[t].heading =
        wrap_angle(std::atan2(disp.y, disp.x) - trail.steps[t].match.tangent);
  }
  return out;
}

std::vector<std::pair<double, double>> lane_offsets(
    const Trail& trail, const std::vector<LaneGeometry>& lanes) {
  std::vector<std::pair<double, double>> out;
  out.reserve(trail.steps.size());
  for (const TrailStep& step : trail.steps) {
    const double half = lanes[step.match.lane].width / 2.0;
    out.emplace_back(half - step.match.lateral, half + step.match.lateral);
  }
  return out;
}

std::vector<std::string> feature_names(FeatureSet set) {
  std::vector<std::string> names = {"v", "theta", "d1", "d2"};
  if (set == FeatureSet::Base) return names;
  for (int r = 0; r < kRegionCount; ++r) {
    const std::string region = region_name(static_cast<Region>(r));
    names.push_back("rel_ds_" + region);
    names.push_back("rel_de_" + region);
  }
  if (set == FeatureSet::BaseRelposRatio) {
    names.push_back("vratio_left");
    names.push_back("vratio_right");
  }
  return names;
}

FeatureMatrix build_matrix(const std::vector<FeatureTrail>& trails,
                           const std::vector<std::string>& names) {
  FeatureMatrix m;
  if (trails.empty()) return m;
  m.steps_per_trail = trails.front().steps();
  m.num_trails = static_cast<int>(trails.size());
  m.arity = trails.front().arity;
  m.names = names;
  m.data.reserve(static_cast<std::size_t>(m.rows()) * m.arity);
  for (const FeatureTrail& trail : trails) {
    if (trail.arity != m.arity)
      throw Error("vehicle '" + trail.vehicle_id + "': feature arity " +
                  std::to_string(trail.arity) + " does not match " +
                  std::to_string(m.arity));
    if (trail.steps() != m.steps_per_trail)
      throw Error("vehicle '" + trail.vehicle_id + "': trail length " +
                  std::to_string(trail.steps()) + " does not match " +
                  std::to_string(m.steps_per_trail));
    m.data.insert(m.data.end(), trail.values.begin(), trail.values.end());
    m.trails.push_back({trail.vehicle_id, trail.label, trail.timestamps.front()});
  }
  return m;
}

namespace {

// Index of every track sample, keyed by grid tick.
struct TimeIndex {
  std::unordered_map<long long, std::vector<std::pair<int, int>>> at_tick;

  static long long tick_of(double t, double dt) {
    return std::llround(t / dt);
  }
};

TimeIndex build_time_index(const std::vector<VehicleTrack>& tracks, double dt) {
  TimeIndex index;
  for (int v = 0; v < static_cast<int>(tracks.size()); ++v)
    for (int i = 0; i < static_cast<int>(tracks[v].points.size()); ++i)
      index.at_tick[TimeIndex::tick_of(tracks[v].points[i].t, dt)].emplace_back(v, i);
  return index;
}

// Backward-difference speed of every sample (forward at run starts);
// isolated samples get no speed.
std::vector<std::vector<double>> track_speeds(
    const std::vector<VehicleTrack>& tracks, double dt) {
  std::vector<std::vector<double>> speeds(tracks.size());
  for (std::size_t v = 0; v < tracks.size(); ++v) {
    const auto& pts = tracks[v].points;
    auto& out = speeds[v];
    out.assign(pts.size(), -1.0);
    auto adjacent = [&](int a, int b) {
      return std::abs((pts[b].t - pts[a].t) - dt) < 1e-6;
    };
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      int lo = -1, hi = -1;
      if (i > 0 && adjacent(i - 1, i)) {
        lo = i - 1;
        hi = i;
      } else if (i + 1 < static_cast<int>(pts.size()) && adjacent(i, i + 1)) {
        lo = i;
        hi = i + 1;
      }
      if (lo < 0) continue;
      const Vec2 d{pts[hi].x - pts[lo].x, pts[hi].y - pts[lo].y};
      out[i] = norm(d) / dt;
    }
  }
  return speeds;
}

struct NeighborInfo {
  RelativeState rel;
  double speed = -1.0;   // < 0 when unknown
  int own_lane = -1;     // matched lane of the neighbor itself
};

}  // namespace

std::vector<FeatureTrail> compute_features(
    const std::vector<Trail>& trails, const std::vector<VehicleTrack>& tracks,
    const std::vector<LaneGeometry>& lanes, const FeaturizeConfig& cfg) {
  const bool want_relpos = cfg.set != FeatureSet::Base;
  const bool want_ratio = cfg.set == FeatureSet::BaseRelposRatio;
  const auto names = feature_names(cfg.set);
  const int arity = static_cast<int>(names.size());

  TimeIndex index;
  std::vector<std::vector<double>> speeds;
  std::unordered_map<std::string, int> track_of;
  if (want_relpos) {
    index = build_time_index(tracks, cfg.step_seconds);
    speeds = track_speeds(tracks, cfg.step_seconds);
    for (int v = 0; v < static_cast<int>(tracks.size()); ++v)
      track_of[tracks[v].vehicle_id] = v;
  }

  std::vector<FeatureTrail> out;
  out.reserve(trails.size());

  for (const Trail& trail : trails) {
    const int T = static_cast<int>(trail.steps.size());
    FeatureTrail ft;
    ft.vehicle_id = trail.vehicle_id;
    ft.label = trail.label;
    ft.arity = arity;
    ft.timestamps.reserve(T);
    ft.values.reserve(static_cast<std::size_t>(T) * arity);

    const auto kin = kinematics(trail, cfg.step_seconds);
    const auto offsets = lane_offsets(trail, lanes);

    for (int t = 0; t < T; ++t) {
      const TrailStep& step = trail.steps[t];
      ft.timestamps.push_back(step.point.t);
      ft.values.push_back(kin[t].speed);
      ft.values.push_back(kin[t].heading);
      ft.values.push_back(offsets[t].first);
      ft.values.push_back(offsets[t].second);
      if (!want_relpos) continue;

      const auto& target_lane = lanes[step.match.lane];
      const long long tick = TimeIndex::tick_of(step.point.t, cfg.step_seconds);

      std::vector<NeighborInfo> neighbors;
      if (auto it = index.at_tick.find(tick); it != index.at_tick.end()) {
        for (const auto& [v, i] : it->second) {
          if (tracks[v].vehicle_id == trail.vehicle_id) continue;
          const TrajectoryPoint& p = tracks[v].points[i];
          const auto proj = project_to_polyline(target_lane.centerline, {p.x, p.y});
          NeighborInfo info;
          info.rel.rel_s = proj.station - step.match.station;
          info.rel.rel_e = proj.lateral - step.match.lateral;
          info.speed = speeds[v][i];
          if (auto m = try_map_match({p.x, p.y}, lanes, cfg.off_road_factor))
            info.own_lane = m->lane;
          neighbors.push_back(info);
        }
      }

      std::vector<RelativeState> rel;
      rel.reserve(neighbors.size());
      for (const auto& n : neighbors) rel.push_back(n.rel);
      const auto chosen = select_surrounding(rel, cfg.regions);
      for (int r = 0; r < kRegionCount; ++r) {
        if (chosen[r] >= 0) {
          ft.values.push_back(rel[chosen[r]].rel_s);
          ft.values.push_back(rel[chosen[r]].rel_e);
        } else {
          const Vec2 sentinel = region_sentinel(static_cast<Region>(r), cfg.regions);
          ft.values.push_back(sentinel.x);
          ft.values.push_back(sentinel.y);
        }
      }

      if (!want_ratio) continue;

      // Geometric adjacency: the nearest centerline on each side of the
      // target. e_j < 0 means lane j lies to the target's left.
      const Vec2 pos{step.point.x, step.point.y};
      int left_lane = -1, right_lane = -1;
      double left_e = -std::numeric_limits<double>::infinity();
      double right_e = std::numeric_limits<double>::infinity();
      for (int j = 0; j < static_cast<int>(lanes.size()); ++j) {
        if (j == step.match.lane) continue;
        const double e_j = project_to_polyline(lanes[j].centerline, pos).lateral;
        if (e_j < 0.0 && e_j > left_e) {
          left_e = e_j;
          left_lane = j;
        } else if (e_j > 0.0 && e_j < right_e) {
          right_e = e_j;
          right_lane = j;
        }
      }

      // Mean speeds within +-front_extent longitudinally, target included.
      auto lane_mean = [&](int lane_idx, bool include_target) {
        double sum = include_target ? kin[t].speed : 0.0;
        int count = include_target ? 1 : 0;
        for (const auto& n : neighbors) {
          if (n.own_lane != lane_idx || n.speed < 0.0) continue;
          if (std::abs(n.rel.rel_s) > cfg.regions.front_extent) continue;
          sum += n.speed;
          ++count;
        }
        return std::pair<double, int>{count > 0 ? sum / count : 0.0, count};
      };

      const auto [cur_mean, cur_n] = lane_mean(step.match.lane, true);
      auto ratio_for = [&](int lane_idx) {
        if (lane_idx < 0) return 1.0;
        const auto [mean, n] = lane_mean(lane_idx, false);
        if (n == 0 || cur_mean < 1e-9) return 1.0;
        return mean / cur_mean;
      };
      ft.values.push_back(ratio_for(left_lane));
      ft.values.push_back(ratio_for(right_lane));
    }
    out.push_back(std::move(ft));
  }
  return out;
}

void Standardizer::fit(const FeatureMatrix& m) {
  const int n = m.arity;
  const int rows = m.rows();
  if (rows == 0) throw Error("cannot fit standardizer on an empty matrix");
  mean.assign(n, 0.0);
  stddev.assign(n, 0.0);
  for (int d = 0; d < rows; ++d) {
    const auto row = m.row(d);
    for (int j = 0; j < n; ++j) mean[j] += row[j];
  }
  for (int j = 0; j < n; ++j) mean[j] /= rows;
  for (int d = 0; d < rows; ++d) {
    const auto row = m.row(d);
    for (int j = 0; j < n; ++j) {
      const double dev = row[j] - mean[j];
      stddev[j] += dev * dev;
    }
  }
  for (int j = 0; j < n; ++j) {
    stddev[j] = std::sqrt(stddev[j] / rows);
    if (stddev[j] < 1e-12) stddev[j] = 1.0;
  }
}

void Standardizer::apply(FeatureMatrix& m) const {
  if (m.arity != arity()) throw Error("standardizer arity mismatch");
  for (int d = 0; d < m.rows(); ++d) apply_row(m.mutable_row(d));
}

void Standardizer::apply_row(std::span<double> row) const {
  if (static_cast<int>(row.size()) != arity())
    throw Error("standardizer arity mismatch");
  for (std::size_t j = 0; j < row.size(); ++j)
    row[j] = (row[j] - mean[j]) / stddev[j];
}

}  // namespace driveintent
