#include "driveintent/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <unordered_map>

namespace driveintent {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(strip(line.substr(start)));
      break;
    }
    out.push_back(strip(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& field, int line_no, const char* what) {
  if (field.empty())
    throw ParseError("line " + std::to_string(line_no) + ": empty " +
                     std::string(what) + " field");
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &consumed);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " +
                     std::string(what) + " value '" + field + "'");
  }
  if (consumed != field.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad " +
                     std::string(what) + " value '" + field + "'");
  if (!std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ": non-finite " +
                     std::string(what) + " value");
  return v;
}

void expect_header(std::istream& in, const std::string& expected,
                   const char* what) {
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(std::string(what) + ": empty input, header required");
  if (strip(line) != expected)
    throw ParseError(std::string(what) + ": expected header '" + expected +
                     "', got '" + strip(line) + "'");
}

}  // namespace

std::vector<VehicleTrack> parse_trajectories(std::istream& in) {
  expect_header(in, "vehicle_id,t,x,y", "trajectory CSV");

  std::vector<VehicleTrack> tracks;
  std::unordered_map<std::string, std::size_t> index;

  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 4)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    if (fields[0].empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty vehicle_id");

    TrajectoryPoint p;
    p.t = parse_number(fields[1], line_no, "t");
    p.x = parse_number(fields[2], line_no, "x");
    p.y = parse_number(fields[3], line_no, "y");

    auto [it, inserted] = index.try_emplace(fields[0], tracks.size());
    if (inserted) tracks.push_back(VehicleTrack{fields[0], {}});
    VehicleTrack& track = tracks[it->second];
    if (!track.points.empty() && p.t <= track.points.back().t)
      throw ParseError("vehicle '" + fields[0] +
                       "': non-monotone timestamp at line " +
                       std::to_string(line_no));
    track.points.push_back(p);
  }
  return tracks;
}

std::vector<LaneGeometry> parse_lanes(std::istream& in, double lane_width) {
  expect_header(in, "lane_id,seq,x,y", "lane CSV");
  if (lane_width <= 0.0) throw Error("lane width must be positive");

  struct RawLane {
    int lane_id;
    std::vector<std::pair<double, Vec2>> points;  // (seq, position)
  };
  std::vector<RawLane> raw;
  std::unordered_map<int, std::size_t> index;

  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 4)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    const double lane_id_raw = parse_number(fields[0], line_no, "lane_id");
    const int lane_id = static_cast<int>(lane_id_raw);
    if (lane_id != lane_id_raw)
      throw ParseError("line " + std::to_string(line_no) +
                       ": lane_id must be an integer");
    const double seq = parse_number(fields[1], line_no, "seq");
    Vec2 p{parse_number(fields[2], line_no, "x"),
           parse_number(fields[3], line_no, "y")};

    auto [it, inserted] = index.try_emplace(lane_id, raw.size());
    if (inserted) raw.push_back(RawLane{lane_id, {}});
    raw[it->second].points.emplace_back(seq, p);
  }

  std::vector<LaneGeometry> lanes;
  lanes.reserve(raw.size());
  for (auto& r : raw) {
    std::stable_sort(r.points.begin(), r.points.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i + 1 < r.points.size(); ++i)
      if (r.points[i].first == r.points[i + 1].first)
        throw ParseError("lane " + std::to_string(r.lane_id) +
                         ": duplicate seq " + std::to_string(r.points[i].first));
    LaneGeometry lane;
    lane.lane_id = r.lane_id;
    lane.width = lane_width;
    lane.centerline.reserve(r.points.size());
    for (const auto& [seq, p] : r.points) lane.centerline.push_back(p);
    if (lane.centerline.size() < 2)
      throw ParseError("lane " + std::to_string(r.lane_id) +
                       ": centerline needs at least 2 points");
    for (std::size_t i = 0; i + 1 < lane.centerline.size(); ++i)
      if (norm(lane.centerline[i + 1] - lane.centerline[i]) < 1e-9)
        throw ParseError("lane " + std::to_string(r.lane_id) +
                         ": consecutive centerline points coincide");
    lanes.push_back(std::move(lane));
  }
  return lanes;
}

std::optional<MatchResult> try_map_match(Vec2 p,
                                         const std::vector<LaneGeometry>& lanes,
                                         double off_road_factor) {
  if (lanes.empty()) throw Error("map matching requires at least one lane");

  MatchResult best;
  double best_abs_lateral = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const PolylineProjection proj = project_to_polyline(lanes[i].centerline, p);
    if (std::abs(proj.lateral) < best_abs_lateral) {
      best_abs_lateral = std::abs(proj.lateral);
      best.lane = static_cast<int>(i);
      best.station = proj.station;
      best.lateral = proj.lateral;
      best.tangent = proj.tangent;
      best.distance = proj.distance;
    }
  }
  if (best.distance > off_road_factor * lanes[best.lane].width)
    return std::nullopt;
  return best;
}

MatchResult map_match(Vec2 p, const std::vector<LaneGeometry>& lanes,
                      double off_road_factor) {
  auto m = try_map_match(p, lanes, off_road_factor);
  if (!m)
    throw OffRoadError("point (" + std::to_string(p.x) + ", " +
                       std::to_string(p.y) + ") is off-road");
  return *m;
}

namespace {

// A maximal run of grid-spaced, on-road steps.
struct MatchedRun {
  std::vector<TrailStep> steps;
};

std::vector<MatchedRun> matched_runs(const VehicleTrack& track,
                                     const std::vector<LaneGeometry>& lanes,
                                     const IngestConfig& cfg) {
  std::vector<MatchedRun> runs;
  MatchedRun current;
  double prev_t = 0.0;

  auto flush = [&] {
    if (!current.steps.empty()) runs.push_back(std::move(current));
    current = MatchedRun{};
  };

  for (const TrajectoryPoint& p : track.points) {
    const bool contiguous =
        !current.steps.empty() &&
        std::abs((p.t - prev_t) - cfg.step_seconds) < 1e-6;
    if (!current.steps.empty() && !contiguous) flush();

    auto m = try_map_match({p.x, p.y}, lanes, cfg.off_road_factor);
    if (!m) {
      flush();  // off-road samples break the run
    } else {
      current.steps.push_back(TrailStep{p, *m});
    }
    prev_t = p.t;
  }
  flush();
  return runs;
}

}  // namespace

std::vector<Trail> extract_trails(const VehicleTrack& track,
                                  const std::vector<LaneGeometry>& lanes,
                                  const IngestConfig& cfg) {
  if (cfg.trail_steps < 2) throw Error("trail_steps must be at least 2");
  const int T = cfg.trail_steps;

  std::vector<Trail> trails;
  for (const MatchedRun& run : matched_runs(track, lanes, cfg)) {
    const int n = static_cast<int>(run.steps.size());
    if (n < T) continue;

    std::vector<int> lane(n);
    for (int i = 0; i < n; ++i) lane[i] = run.steps[i].match.lane;

    // Lane-change windows: T steps ending at the first differing-lane step.
    std::vector<bool> is_change(n, false);
    for (int i = 1; i < n; ++i) is_change[i] = lane[i] != lane[i - 1];

    for (int j = 1; j < n; ++j) {
      if (!is_change[j]) continue;
      if (j < T - 1) continue;
      bool clean = true;
      for (int i = j - T + 2; i < j; ++i)
        if (is_change[i]) clean = false;
      if (!clean) continue;  // more than one lane change in the window

      Trail trail;
      trail.vehicle_id = track.vehicle_id;
      trail.steps.assign(run.steps.begin() + (j - T + 1),
                         run.steps.begin() + (j + 1));
      // Direction from the crossing point's offset in the *old* lane frame.
      const Vec2 p{run.steps[j].point.x, run.steps[j].point.y};
      const double e_old =
          project_to_polyline(lanes[lane[j - 1]].centerline, p).lateral;
      trail.label = e_old > 0.0 ? Intention::ChangeLeft : Intention::ChangeRight;
      trails.push_back(std::move(trail));
    }

    // Keep windows: non-overlapping constant-lane windows. A segment that
    // ends in a lane change donates its last T-1 steps to the change window.
    int seg_start = 0;
    for (int i = 1; i <= n; ++i) {
      if (i < n && lane[i] == lane[i - 1]) continue;
      const int seg_end = i - 1;  // inclusive
      const bool ends_in_change = i < n;
      const int usable_end = ends_in_change ? seg_end - (T - 1) : seg_end;
      for (int s = seg_start; s + T - 1 <= usable_end; s += T) {
        Trail trail;
        trail.vehicle_id = track.vehicle_id;
        trail.label = Intention::Keep;
        trail.steps.assign(run.steps.begin() + s, run.steps.begin() + s + T);
        trails.push_back(std::move(trail));
      }
      seg_start = i;
    }
  }
  std::sort(trails.begin(), trails.end(), [](const Trail& a, const Trail& b) {
    return a.steps.front().point.t < b.steps.front().point.t;
  });
  return trails;
}

}  // namespace driveintent
