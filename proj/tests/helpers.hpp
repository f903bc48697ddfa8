#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "driveintent/hmm.hpp"
#include "driveintent/ingest.hpp"
#include "driveintent/rng.hpp"

namespace testutil {

using namespace driveintent;

inline std::vector<double> random_stochastic_row(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> row(n);
  double sum = 0.0;
  for (double& v : row) {
    v = u(rng);
    sum += v;
  }
  for (double& v : row) v /= sum;
  return row;
}

inline DiscreteHmm random_discrete_hmm(int q, int k, std::mt19937_64& rng) {
  DiscreteHmm m;
  m.num_states = q;
  m.num_symbols = k;
  m.transition.resize(q * q);
  m.emission.resize(q * k);
  m.initial = random_stochastic_row(q, rng);
  for (int i = 0; i < q; ++i) {
    auto a = random_stochastic_row(q, rng);
    std::copy(a.begin(), a.end(), m.transition.begin() + i * q);
    auto b = random_stochastic_row(k, rng);
    std::copy(b.begin(), b.end(), m.emission.begin() + i * k);
  }
  return m;
}

inline std::vector<int> random_sequence(int length, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::vector<int> seq(length);
  for (int& o : seq) o = pick(rng);
  return seq;
}

inline int sample_index(const double* probs, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng);
  for (int i = 0; i < n; ++i) {
    r -= probs[i];
    if (r <= 0.0) return i;
  }
  return n - 1;
}

/// Draws one observation sequence from a discrete HMM.
inline std::vector<int> sample_discrete(const DiscreteHmm& m, int length,
                                        std::mt19937_64& rng) {
  std::vector<int> seq(length);
  int state = sample_index(m.initial.data(), m.num_states, rng);
  for (int t = 0; t < length; ++t) {
    seq[t] = sample_index(m.emission.data() + state * m.num_symbols,
                          m.num_symbols, rng);
    if (t + 1 < length)
      state = sample_index(m.transition.data() + state * m.num_states,
                           m.num_states, rng);
  }
  return seq;
}

/// Exhaustive path-sum oracle: sums pi * prod(a) * prod(b) over all Q^T
/// state paths. Independent of the forward recursion it checks.
inline double brute_force_log_likelihood(const DiscreteHmm& m,
                                         const std::vector<int>& seq) {
  const int q = m.num_states;
  const int t_len = static_cast<int>(seq.size());
  long long paths = 1;
  for (int t = 0; t < t_len; ++t) paths *= q;

  double total = 0.0;
  std::vector<int> path(t_len);
  for (long long code = 0; code < paths; ++code) {
    long long c = code;
    for (int t = 0; t < t_len; ++t) {
      path[t] = static_cast<int>(c % q);
      c /= q;
    }
    double p = m.initial[path[0]] * m.b(path[0], seq[0]);
    for (int t = 1; t < t_len; ++t)
      p *= m.a(path[t - 1], path[t]) * m.b(path[t], seq[t]);
    total += p;
  }
  return std::log(total);
}

/// Unscaled log-domain forward, an independent route to the likelihood.
inline double log_forward_unscaled(const DiscreteHmm& m,
                                   const std::vector<int>& seq) {
  const int q = m.num_states;
  auto logsafe = [](double v) {
    return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  };
  std::vector<double> cur(q), next(q);
  for (int i = 0; i < q; ++i)
    cur[i] = logsafe(m.initial[i]) + logsafe(m.b(i, seq[0]));
  for (std::size_t t = 1; t < seq.size(); ++t) {
    for (int p = 0; p < q; ++p) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < q; ++i) mx = std::max(mx, cur[i] + logsafe(m.a(i, p)));
      double s = 0.0;
      if (mx > -std::numeric_limits<double>::infinity())
        for (int i = 0; i < q; ++i)
          s += std::exp(cur[i] + logsafe(m.a(i, p)) - mx);
      next[p] = (s > 0.0 ? mx + std::log(s)
                         : -std::numeric_limits<double>::infinity()) +
                logsafe(m.b(p, seq[t]));
    }
    cur = next;
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : cur) mx = std::max(mx, v);
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  double s = 0.0;
  for (double v : cur) s += std::exp(v - mx);
  return mx + std::log(s);
}

/// Parallel straight lanes along +x, lane i centered at y = i * width.
inline std::vector<LaneGeometry> straight_lanes(int n, double width,
                                                double length = 200.0) {
  std::vector<LaneGeometry> lanes(n);
  for (int i = 0; i < n; ++i) {
    lanes[i].lane_id = i;
    lanes[i].width = width;
    for (double x = -50.0; x <= length; x += 25.0)
      lanes[i].centerline.push_back({x, i * width});
  }
  return lanes;
}

/// Builds a matched trail from raw points (no labeling logic).
inline Trail make_trail(const std::vector<TrajectoryPoint>& points,
                        const std::vector<LaneGeometry>& lanes,
                        Intention label = Intention::Keep) {
  Trail trail;
  trail.vehicle_id = "test";
  trail.label = label;
  for (const auto& p : points)
    trail.steps.push_back({p, map_match({p.x, p.y}, lanes)});
  return trail;
}

}  // namespace testutil
