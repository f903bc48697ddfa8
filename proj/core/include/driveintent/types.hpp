#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "driveintent/geometry.hpp"

namespace driveintent {

inline constexpr int kTrailStepsDefault = 9;
inline constexpr double kStepSecondsDefault = 0.5;
inline constexpr double kLaneWidthDefault = 3.5;

/// The three driving intentions; integer codes are fixed (1..3) and are the
/// tie-break order used by the predictor.
enum class Intention : int {
  ChangeLeft = 1,
  ChangeRight = 2,
  Keep = 3,
};

inline constexpr std::array<Intention, 3> kIntentions = {
    Intention::ChangeLeft, Intention::ChangeRight, Intention::Keep};

inline constexpr int intention_index(Intention i) {
  return static_cast<int>(i) - 1;
}

std::string to_string(Intention intention);
Intention intention_from_string(const std::string& name);

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input files / CSV rows that cannot be interpreted.
struct ParseError : Error {
  using Error::Error;
};

/// A point farther from every lane centerline than the matching threshold.
struct OffRoadError : Error {
  using Error::Error;
};

struct TrajectoryPoint {
  double t = 0.0;  // seconds, on the sampling grid
  double x = 0.0;  // meters
  double y = 0.0;  // meters
};

struct VehicleTrack {
  std::string vehicle_id;
  std::vector<TrajectoryPoint> points;  // strictly increasing t
};

struct LaneGeometry {
  int lane_id = 0;
  std::vector<Vec2> centerline;  // ordered along travel direction, >= 2 points
  double width = kLaneWidthDefault;
};

}  // namespace driveintent
