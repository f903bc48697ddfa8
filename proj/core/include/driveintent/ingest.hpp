#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "driveintent/types.hpp"

namespace driveintent {

/// Result of matching one point against a lane map.
struct MatchResult {
  int lane = -1;          // index into the lane list
  double station = 0.0;   // arclength of the perpendicular foot, m
  double lateral = 0.0;   // signed offset e, > 0 left of the centerline
  double tangent = 0.0;   // lane direction at the foot, radians
  double distance = 0.0;  // point-to-centerline distance, m
};

struct TrailStep {
  TrajectoryPoint point;
  MatchResult match;
};

/// A fixed-length labeled window of one vehicle's motion. For lane-change
/// labels the matched lane changes exactly once, between the last two steps;
/// for Keep it never changes.
struct Trail {
  std::string vehicle_id;
  Intention label = Intention::Keep;
  std::vector<TrailStep> steps;
};

struct IngestConfig {
  int trail_steps = kTrailStepsDefault;
  double step_seconds = kStepSecondsDefault;
  double off_road_factor = 3.0;  // threshold = factor * lane width
};

/// Parses `vehicle_id,t,x,y` CSV (header required). Points are grouped per
/// vehicle in order of first appearance; within a vehicle, timestamps must be
/// strictly increasing. Throws ParseError with the offending line number.
std::vector<VehicleTrack> parse_trajectories(std::istream& in);

/// Parses `lane_id,seq,x,y` CSV into centerlines ordered by seq. All lanes
/// get the supplied width. Throws ParseError on malformed rows, duplicate
/// seq, or degenerate polylines.
std::vector<LaneGeometry> parse_lanes(std::istream& in, double lane_width);

/// Matches a point to the lane with the smallest |lateral offset|. Returns
/// nothing when the point is farther than off_road_factor * width from the
/// best centerline.
std::optional<MatchResult> try_map_match(Vec2 p,
                                         const std::vector<LaneGeometry>& lanes,
                                         double off_road_factor = 3.0);

/// Throwing variant of try_map_match (OffRoadError).
MatchResult map_match(Vec2 p, const std::vector<LaneGeometry>& lanes,
                      double off_road_factor = 3.0);

/// Cuts labeled fixed-length trails out of one vehicle's track.
///
/// Lane-change trails are the window of trail_steps samples ending at the
/// first step whose matched lane differs from the previous step's lane;
/// windows containing a second lane change are discarded. Lane-keep trails
/// are non-overlapping constant-lane windows; the last trail_steps-1 samples
/// of a segment that ends in a lane change are reserved for the change
/// window and never reused as Keep data.
std::vector<Trail> extract_trails(const VehicleTrack& track,
                                  const std::vector<LaneGeometry>& lanes,
                                  const IngestConfig& cfg = {});

}  // namespace driveintent
