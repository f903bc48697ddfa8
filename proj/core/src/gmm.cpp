#include "driveintent/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace driveintent {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double logsumexp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

GmmParams GmmParams::zeros(int n, int q, int m) {
  GmmParams p;
  p.num_features = n;
  p.num_states = q;
  p.num_components = m;
  const std::size_t size = static_cast<std::size_t>(n) * q * m;
  p.weight.assign(size, 0.0);
  p.mean.assign(size, 0.0);
  p.stddev.assign(size, 0.0);
  return p;
}

double log_gauss_pdf(double value, double mu, double sigma, double sigma_floor) {
  if (sigma < sigma_floor) sigma = sigma_floor;
  const double z = (value - mu) / sigma;
  return -kLogSqrt2Pi - std::log(sigma) - 0.5 * z * z;
}

double gauss_pdf(double value, double mu, double sigma, double sigma_floor) {
  return std::exp(log_gauss_pdf(value, mu, sigma, sigma_floor));
}

double state_log_emission(const GmmParams& params, int state,
                          std::span<const double> feature_row) {
  if (static_cast<int>(feature_row.size()) != params.num_features)
    throw Error("state_log_emission: feature arity mismatch");

  constexpr int kStackComponents = 32;
  double buf[kStackComponents];
  std::vector<double> heap;
  double* lp = buf;
  if (params.num_components > kStackComponents) {
    heap.resize(params.num_components);
    lp = heap.data();
  }

  double total = 0.0;
  for (int n = 0; n < params.num_features; ++n) {
    const std::size_t base = params.idx(n, state, 0);
    for (int m = 0; m < params.num_components; ++m) {
      const double w = params.weight[base + m];
      lp[m] = w > 0.0 ? std::log(w) + log_gauss_pdf(feature_row[n],
                                                    params.mean[base + m],
                                                    params.stddev[base + m])
                      : kNegInf;
    }
    const double lse = logsumexp({lp, static_cast<std::size_t>(params.num_components)});
    if (lse == kNegInf) return kNegInf;
    total += lse;
  }
  return total;
}

FeatureResponsibilities responsibilities(const GmmParams& params, int feature,
                                         std::span<const double> state_posteriors,
                                         std::span<const double> column) {
  const int Q = params.num_states;
  const int M = params.num_components;
  const int T = static_cast<int>(column.size());
  if (static_cast<int>(state_posteriors.size()) != T * Q)
    throw Error("responsibilities: posterior shape mismatch");

  FeatureResponsibilities out;
  out.num_states = Q;
  out.num_components = M;
  out.length = T;
  out.gamma.assign(static_cast<std::size_t>(Q) * M * T, 0.0);

  std::vector<double> lp(M);
  for (int t = 0; t < T; ++t) {
    for (int p = 0; p < Q; ++p) {
      const double eta = state_posteriors[t * Q + p];
      for (int m = 0; m < M; ++m) {
        const double w = params.w(feature, p, m);
        lp[m] = w > 0.0 ? std::log(w) + log_gauss_pdf(column[t],
                                                      params.mu(feature, p, m),
                                                      params.sigma(feature, p, m))
                        : kNegInf;
      }
      const double lse = logsumexp(lp);
      if (lse == kNegInf) {
        // Every component underflowed: spread the state mass uniformly.
        ++out.underflow_steps;
        for (int m = 0; m < M; ++m)
          out.gamma[(static_cast<std::size_t>(p) * M + m) * T + t] = eta / M;
        continue;
      }
      for (int m = 0; m < M; ++m)
        out.gamma[(static_cast<std::size_t>(p) * M + m) * T + t] =
            eta * std::exp(lp[m] - lse);
    }
  }
  return out;
}

int update_params(GmmParams& params, int feature,
                  const FeatureResponsibilities& resp,
                  std::span<const double> column, std::mt19937_64& rng,
                  double sigma_floor) {
  const int Q = params.num_states;
  const int M = params.num_components;
  const int T = static_cast<int>(column.size());
  if (resp.num_states != Q || resp.num_components != M || resp.length != T)
    throw Error("update_params: responsibility shape mismatch");

  double col_mean = 0.0;
  for (double v : column) col_mean += v;
  col_mean /= T;
  double col_var = 0.0;
  for (double v : column) col_var += (v - col_mean) * (v - col_mean);
  const double col_std = std::max(std::sqrt(col_var / T), sigma_floor);

  int reinits = 0;
  for (int p = 0; p < Q; ++p) {
    std::vector<double> mass(M, 0.0);
    for (int m = 0; m < M; ++m) {
      double s0 = 0.0, s1 = 0.0;
      for (int t = 0; t < T; ++t) {
        const double g = resp.at(p, m, t);
        s0 += g;
        s1 += g * column[t];
      }
      mass[m] = s0;
      if (s0 < kResponsibilityEpsilon) {
        // Dead component: re-seed it at a random data point.
        std::uniform_int_distribution<int> pick(0, T - 1);
        params.mu(feature, p, m) = column[pick(rng)];
        params.sigma(feature, p, m) = col_std;
        ++reinits;
        continue;
      }
      const double mu = s1 / s0;
      double s2 = 0.0;
      for (int t = 0; t < T; ++t) {
        const double d = column[t] - mu;
        s2 += resp.at(p, m, t) * d * d;
      }
      params.mu(feature, p, m) = mu;
      params.sigma(feature, p, m) = std::max(std::sqrt(s2 / s0), sigma_floor);
    }

    // Weight update (the EM step the source formulas leave implicit),
    // re-seeded components get an even share.
    double total = 0.0;
    for (int m = 0; m < M; ++m) {
      if (mass[m] < kResponsibilityEpsilon) mass[m] = 0.0;
      total += mass[m];
    }
    for (int m = 0; m < M; ++m)
      params.w(feature, p, m) =
          total > 0.0 && mass[m] > 0.0 ? mass[m] / total : 1.0 / M;
    double wsum = 0.0;
    for (int m = 0; m < M; ++m) wsum += params.w(feature, p, m);
    for (int m = 0; m < M; ++m) params.w(feature, p, m) /= wsum;
  }
  return reinits;
}

}  // namespace driveintent
