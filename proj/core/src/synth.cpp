#include "driveintent/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "driveintent/rng.hpp"

namespace driveintent {

namespace {

struct Fmt {
  char buf[64];
  const char* operator()(const char* fmt, double v) {
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
  }
};

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// 95% of the lateral transition happens inside `duration`.
double logistic_tau(double duration) { return duration / (2.0 * std::log(39.0)); }

struct VehiclePlan {
  std::string id;
  Intention label = Intention::Keep;
  bool scripted = false;
  double t0 = 0.0;
  double x0 = 0.0;
  int lane = 0;
  double speed = 0.0;
  double accel = 0.0;
  // Lane-change profile (scripted changers only).
  int dir = 0;             // +1 left, -1 right
  double crossing_t = 0.0; // time the lane line is crossed
  double sigmoid_tc = 0.0; // logistic midpoint
  bool wobble = true;
};

class Generator {
 public:
  explicit Generator(const SynthConfig& cfg) : cfg_(cfg) {
    if (cfg.lanes < 1) throw Error("synth: need at least one lane");
    if (cfg.lanes < 2 &&
        (cfg.trails_per_intention[0] > 0 || cfg.trails_per_intention[1] > 0))
      throw Error("synth: lane changes require at least two lanes");
    if (cfg.lane_width <= 0 || cfg.speed_min <= 0 ||
        cfg.speed_max < cfg.speed_min || cfg.position_noise < 0)
      throw Error("synth: invalid configuration");
    const double window = cfg.trail_steps * cfg.step_seconds;
    if (cfg.change_duration <= 0 || cfg.change_duration >= window)
      throw Error("synth: lane-change duration must be positive and below " +
                  std::to_string(window) + " s");
    if (cfg.pre_drift < 0 || cfg.pre_drift >= cfg.lane_width / 2)
      throw Error("synth: pre_drift must be in [0, lane_width/2)");
  }

  SynthDataset run() {
    SynthDataset data;
    data.lanes = make_lanes();

    std::vector<Intention> schedule;
    for (int i = 0; i < 3; ++i)
      schedule.insert(schedule.end(), cfg_.trails_per_intention[i], kIntentions[i]);

    for (std::size_t e = 0; e < schedule.size(); ++e) episode(data, e, schedule[e]);
    return data;
  }

 private:
  std::vector<LaneGeometry> make_lanes() const {
    const double window = (cfg_.trail_steps - 1) * cfg_.step_seconds;
    const double x_max = 10.0 + cfg_.speed_max * window + 80.0;
    std::vector<LaneGeometry> lanes(cfg_.lanes);
    for (int i = 0; i < cfg_.lanes; ++i) {
      lanes[i].lane_id = i;
      lanes[i].width = cfg_.lane_width;
      for (double x = -80.0; x <= x_max + 20.0; x += 20.0)
        lanes[i].centerline.push_back({x, i * cfg_.lane_width});
    }
    return lanes;
  }

  std::string next_id() {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "v%05d", ++vehicle_counter_);
    return buf;
  }

  // Emits the sampled track of one planned vehicle.
  void emit(SynthDataset& data, const VehiclePlan& plan) {
    auto rng = make_rng(mix_seed(cfg_.seed, 0x747261636bULL + vehicle_counter_));
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int T = cfg_.trail_steps;
    const double dt = cfg_.step_seconds;
    const double lane_y = plan.lane * cfg_.lane_width;
    const double rho = std::exp(-1.2 * dt);
    const double wobble_innov = cfg_.lateral_wobble * std::sqrt(1.0 - rho * rho);

    double wobble = plan.wobble ? cfg_.lateral_wobble * gauss(rng) : 0.0;

    VehicleTrack track;
    track.vehicle_id = plan.id;
    track.points.reserve(T);
    for (int k = 0; k < T; ++k) {
      const double tau = k * dt;
      const double t = plan.t0 + tau;
      double x = plan.x0 + plan.speed * tau + 0.5 * plan.accel * tau * tau;
      double y = lane_y;
      if (plan.dir != 0) {
        const double tau_s = logistic_tau(cfg_.change_duration);
        const double s = logistic((t - plan.sigmoid_tc) / tau_s);
        y += plan.dir *
             (cfg_.pre_drift + (cfg_.lane_width - cfg_.pre_drift) * s);
      }
      if (plan.wobble) {
        wobble = std::clamp(wobble, -cfg_.wobble_clamp, cfg_.wobble_clamp);
        y += wobble;
        wobble = rho * wobble + wobble_innov * gauss(rng);
      }
      x += cfg_.position_noise * gauss(rng);
      y += cfg_.position_noise * gauss(rng);
      track.points.push_back({t, x, y});
    }
    data.tracks.push_back(std::move(track));

    TruthRow truth;
    truth.vehicle_id = plan.id;
    truth.label = plan.label;
    if (plan.dir != 0) truth.crossing_t = plan.crossing_t;
    data.truth.push_back(truth);
  }

  void episode(SynthDataset& data, std::size_t index, Intention intent) {
    auto rng = make_rng(mix_seed(cfg_.seed, 0x657069736f6465ULL + index));
    auto uniform = [&](double lo, double hi) {
      return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    const int T = cfg_.trail_steps;
    const double dt = cfg_.step_seconds;
    const double window = (T - 1) * dt;
    const double t0 = static_cast<double>(index) * (T + 4) * dt;
    const bool changes = intent != Intention::Keep;
    const int dir = intent == Intention::ChangeLeft    ? 1
                    : intent == Intention::ChangeRight ? -1
                                                       : 0;

    VehiclePlan target;
    target.id = next_id();
    target.label = intent;
    target.scripted = true;
    target.t0 = t0;
    target.x0 = uniform(0.0, 10.0);
    target.speed = uniform(cfg_.speed_min, cfg_.speed_max);
    target.dir = dir;

    const bool blocked_keep =
        cfg_.interacting && !changes && uniform(0.0, 1.0) < 0.5;
    if (cfg_.interacting && (changes || blocked_keep)) {
      target.accel = -0.45;
      const double floor = cfg_.speed_min - target.accel * window;
      target.speed = uniform(std::min(floor, cfg_.speed_max), cfg_.speed_max);
    }

    // Start lane must leave room for the maneuver.
    if (intent == Intention::ChangeLeft)
      target.lane = static_cast<int>(uniform(0.0, cfg_.lanes - 1.0));
    else if (intent == Intention::ChangeRight)
      target.lane = 1 + static_cast<int>(uniform(0.0, cfg_.lanes - 1.0));
    else
      target.lane = static_cast<int>(uniform(0.0, static_cast<double>(cfg_.lanes)));
    target.lane = std::clamp(target.lane, 0, cfg_.lanes - 1);
    if (intent == Intention::ChangeLeft)
      target.lane = std::min(target.lane, cfg_.lanes - 2);
    if (intent == Intention::ChangeRight)
      target.lane = std::max(target.lane, 1);

    if (changes) {
      // Aim the lane-line crossing half a step before the final sample so
      // the matched lane flips exactly at the last step.
      target.crossing_t = t0 + window - dt / 2.0;
      const double tau_s = logistic_tau(cfg_.change_duration);
      const double s_star = (cfg_.lane_width / 2.0 - cfg_.pre_drift) /
                            (cfg_.lane_width - cfg_.pre_drift);
      const double u_star = std::log(s_star / (1.0 - s_star));
      target.sigmoid_tc = target.crossing_t - u_star * tau_s;
    }
    emit(data, target);

    if (cfg_.interacting) {
      place_interacting_traffic(data, rng, target, dir);
    } else if (cfg_.traffic_density > 0.0) {
      for (int lane = 0; lane < cfg_.lanes; ++lane)
        place_density_traffic(data, rng, target, lane, {});
    }
  }

  struct Exclusion {
    double lo, hi;
  };

  // Background lane keeper at an initial longitudinal offset from the target.
  void place_background(SynthDataset& data, const VehiclePlan& target, int lane,
                        double ds0, double speed) {
    VehiclePlan bg;
    bg.id = next_id();
    bg.label = Intention::Keep;
    bg.t0 = target.t0;
    bg.x0 = target.x0 + ds0;
    bg.lane = lane;
    bg.speed = std::clamp(speed, cfg_.speed_min, cfg_.speed_max);
    emit(data, bg);
  }

  void place_density_traffic(SynthDataset& data, std::mt19937_64& rng,
                             const VehiclePlan& target, int lane,
                             const std::vector<Exclusion>& exclusions) {
    const double window = (cfg_.trail_steps - 1) * cfg_.step_seconds;
    const double lo = -45.0;
    const double hi = target.speed * window + 45.0;
    const double expected = cfg_.traffic_density * (hi - lo) / 100.0;
    std::poisson_distribution<int> count_dist(expected);
    const int count = count_dist(rng);

    std::vector<double> placed;
    if (lane == target.lane) placed.push_back(0.0);  // the target itself
    for (int i = 0; i < count; ++i) {
      const double ds0 = std::uniform_real_distribution<double>(lo, hi)(rng);
      const double speed =
          std::uniform_real_distribution<double>(cfg_.speed_min, cfg_.speed_max)(rng);
      bool ok = true;
      for (const auto& ex : exclusions)
        if (ds0 > ex.lo && ds0 < ex.hi) ok = false;
      for (double p : placed)
        if (std::abs(ds0 - p) < 8.0) ok = false;
      if (!ok) continue;
      placed.push_back(ds0);
      place_background(data, target, lane, ds0, speed);
    }
  }

  // Gap-aware placement: lane changes happen only when the destination gap
  // is open; keeps are sometimes boxed in so traffic context carries signal.
  void place_interacting_traffic(SynthDataset& data, std::mt19937_64& rng,
                                 const VehiclePlan& target, int dir) {
    auto uniform = [&](double lo, double hi) {
      return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    const bool changes = dir != 0;
    const bool blocked_keep = !changes && target.accel < 0.0;

    std::vector<std::vector<Exclusion>> exclusions(cfg_.lanes);
    exclusions[target.lane].push_back({-8.0, 8.0});

    if (changes) {
      const int dest = target.lane + dir;
      // Slow leader ahead motivates the change.
      place_background(data, target, target.lane,
                       uniform(9.0, 14.0), target.speed - uniform(2.5, 3.5));
      exclusions[target.lane].push_back({4.0, 20.0});
      // Faster pace car ahead in the destination lane; the merge slot and
      // everything that could drift into it stays clear.
      place_background(data, target, dest, uniform(4.5, 6.0),
                       std::min(target.speed * uniform(1.15, 1.25), cfg_.speed_max));
      exclusions[dest].push_back({-30.0, 12.0});
      if (uniform(0.0, 1.0) < 0.5)
        place_background(data, target, dest, uniform(-35.0, -25.0),
                         target.speed * uniform(0.9, 1.0));
      if (uniform(0.0, 1.0) < 0.5)
        place_background(data, target, target.lane, uniform(-18.0, -10.0),
                         target.speed * uniform(0.95, 1.05));
      exclusions[target.lane].push_back({-20.0, 8.0});
    } else if (blocked_keep) {
      place_background(data, target, target.lane,
                       uniform(9.0, 14.0), target.speed - uniform(2.5, 3.5));
      exclusions[target.lane].push_back({4.0, 20.0});
      for (int adj : {target.lane - 1, target.lane + 1}) {
        if (adj < 0 || adj >= cfg_.lanes) continue;
        place_background(data, target, adj, uniform(-2.5, 2.5),
                         target.speed - uniform(0.5, 1.5));
        exclusions[adj].push_back({-10.0, 10.0});
      }
    }

    for (int lane = 0; lane < cfg_.lanes; ++lane)
      place_density_traffic(data, rng, target, lane, exclusions[lane]);
  }

  const SynthConfig& cfg_;
  int vehicle_counter_ = 0;
};

}  // namespace

SynthDataset generate(const SynthConfig& cfg) { return Generator(cfg).run(); }

std::string trajectories_csv(const SynthDataset& dataset) {
  std::string out = "vehicle_id,t,x,y\n";
  Fmt fmt;
  for (const auto& track : dataset.tracks)
    for (const auto& p : track.points) {
      out += track.vehicle_id;
      out += ',';
      out += fmt("%.1f", p.t);
      out += ',';
      out += fmt("%.4f", p.x);
      out += ',';
      out += fmt("%.4f", p.y);
      out += '\n';
    }
  return out;
}

std::string lanes_csv(const SynthDataset& dataset) {
  std::string out = "lane_id,seq,x,y\n";
  Fmt fmt;
  for (const auto& lane : dataset.lanes) {
    int seq = 0;
    for (const auto& p : lane.centerline) {
      out += std::to_string(lane.lane_id);
      out += ',';
      out += std::to_string(seq++);
      out += ',';
      out += fmt("%.2f", p.x);
      out += ',';
      out += fmt("%.2f", p.y);
      out += '\n';
    }
  }
  return out;
}

std::string truth_csv(const SynthDataset& dataset) {
  std::string out = "vehicle_id,intended_label,crossing_t\n";
  Fmt fmt;
  for (const auto& row : dataset.truth) {
    out += row.vehicle_id;
    out += ',';
    out += to_string(row.label);
    out += ',';
    if (row.crossing_t) out += fmt("%.2f", *row.crossing_t);
    out += '\n';
  }
  return out;
}

void write_dataset(const SynthDataset& dataset, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    const std::string path = dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
  };
  write("trajectories.csv", trajectories_csv(dataset));
  write("lanes.csv", lanes_csv(dataset));
  write("truth.csv", truth_csv(dataset));
}

}  // namespace driveintent
