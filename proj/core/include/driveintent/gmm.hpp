#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "driveintent/types.hpp"

namespace driveintent {

inline constexpr double kSigmaFloorDefault = 1e-3;
inline constexpr double kResponsibilityEpsilon = 1e-8;

/// Per-feature, per-state, per-component Gaussian mixture parameters: for
/// each feature type n, state p and component m a weight, mean and standard
/// deviation. Weights over m sum to one for every (n, p); sigmas never fall
/// below the floor.
struct GmmParams {
  int num_features = 0;    // N
  int num_states = 0;      // Q
  int num_components = 0;  // M
  std::vector<double> weight;
  std::vector<double> mean;
  std::vector<double> stddev;

  static GmmParams zeros(int n, int q, int m);

  std::size_t idx(int n, int p, int m) const {
    return (static_cast<std::size_t>(n) * num_states + p) * num_components + m;
  }
  double& w(int n, int p, int m) { return weight[idx(n, p, m)]; }
  double& mu(int n, int p, int m) { return mean[idx(n, p, m)]; }
  double& sigma(int n, int p, int m) { return stddev[idx(n, p, m)]; }
  double w(int n, int p, int m) const { return weight[idx(n, p, m)]; }
  double mu(int n, int p, int m) const { return mean[idx(n, p, m)]; }
  double sigma(int n, int p, int m) const { return stddev[idx(n, p, m)]; }
};

/// Univariate normal density; sigma below the floor is clamped, never zero.
double gauss_pdf(double value, double mu, double sigma,
                 double sigma_floor = kSigmaFloorDefault);
double log_gauss_pdf(double value, double mu, double sigma,
                     double sigma_floor = kSigmaFloorDefault);

/// log of the state emission density: the product over feature types of the
/// per-feature M-component mixture, evaluated at one feature vector.
double state_log_emission(const GmmParams& params, int state,
                          std::span<const double> feature_row);

inline double state_emission_density(const GmmParams& params, int state,
                                     std::span<const double> feature_row) {
  return std::exp(state_log_emission(params, state, feature_row));
}

/// Component responsibilities for one feature type: gamma[(p*M + m)*T + t] =
/// eta_t(p) * within-state component posterior. Sums to one over (p, m) at
/// every t. Steps where every component underflows fall back to uniform
/// within-state responsibilities; the count of such steps is returned.
struct FeatureResponsibilities {
  int num_states = 0;
  int num_components = 0;
  int length = 0;
  std::vector<double> gamma;
  int underflow_steps = 0;

  double at(int p, int m, int t) const {
    return gamma[(static_cast<std::size_t>(p) * num_components + m) * length + t];
  }
};

FeatureResponsibilities responsibilities(const GmmParams& params, int feature,
                                         std::span<const double> state_posteriors,
                                         std::span<const double> column);

/// M-step for one feature type: responsibility-weighted means and variances,
/// weights renormalized to one per state. Components with vanishing total
/// responsibility are re-seeded at a random data point with sigma = column
/// std. Returns the number of re-seeded components.
int update_params(GmmParams& params, int feature,
                  const FeatureResponsibilities& resp,
                  std::span<const double> column, std::mt19937_64& rng,
                  double sigma_floor = kSigmaFloorDefault);

}  // namespace driveintent
