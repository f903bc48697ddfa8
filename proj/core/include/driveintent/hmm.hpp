#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "driveintent/gmm.hpp"

namespace driveintent {

/// Discrete-emission HMM {A, B, pi} with Q states and K symbols. All rows
/// are stochastic; after training every entry is at least the probability
/// floor.
struct DiscreteHmm {
  int num_states = 0;   // Q
  int num_symbols = 0;  // K
  std::vector<double> transition;  // Q x Q, row-major
  std::vector<double> emission;    // Q x K, row-major
  std::vector<double> initial;     // Q

  double a(int q, int p) const { return transition[q * num_states + p]; }
  double b(int q, int j) const { return emission[q * num_symbols + j]; }
};

/// Continuous-emission HMM {A, Theta, pi} with per-feature Gaussian-mixture
/// state emissions.
struct GmmHmm {
  int num_states = 0;
  std::vector<double> transition;
  std::vector<double> initial;
  GmmParams emissions;

  double a(int q, int p) const { return transition[q * num_states + p]; }
};

/// Scaled forward/backward tables and the posteriors derived from them.
/// When `impossible` is set the sequence has zero probability under the
/// model; log_likelihood is -inf and the tables are not meaningful.
struct Posteriors {
  int length = 0;      // T
  int num_states = 0;  // Q
  std::vector<double> state;      // eta, T x Q
  std::vector<double> pair;       // xi, (T-1) x Q x Q
  std::vector<double> alpha;      // scaled, T x Q
  std::vector<double> beta;       // scaled, T x Q
  std::vector<double> log_scale;  // per-step log scaling constants
  double log_likelihood = 0.0;
  bool impossible = false;

  double eta(int t, int q) const { return state[t * num_states + q]; }
  double xi(int t, int q, int p) const {
    return pair[(static_cast<std::size_t>(t) * num_states + q) * num_states + p];
  }
};

Posteriors forward_backward(const DiscreteHmm& model, std::span<const int> sequence);
Posteriors forward_backward(const GmmHmm& model, std::span<const double> features,
                            int arity);

double log_likelihood(const DiscreteHmm& model, std::span<const int> sequence);
double log_likelihood(const GmmHmm& model, std::span<const double> features,
                      int arity);

/// How multiple observation sequences drive re-estimation: Pooled sums
/// posterior statistics over all sequences per EM iteration (standard
/// multi-sequence Baum-Welch); Paper is the single-pass running-average
/// procedure, one sequence at a time.
enum class TrainMode { Pooled, Paper };

std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& name);

struct TrainOptions {
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::Pooled;
  double tol = 1e-6;        // relative log-likelihood (or parameter) change
  int max_iter = 100;
  double prob_floor = 1e-6;
  double sigma_floor = kSigmaFloorDefault;  // continuous only
  // EM restarts with derived init seeds, best final log-likelihood kept.
  // Applies to pooled and continuous training; the single-pass paper mode
  // always runs exactly once.
  int restarts = 1;
};

struct DiscreteTrainResult {
  DiscreteHmm model;
  std::vector<double> log_likelihood_history;  // one entry per iteration
  int iterations = 0;
  bool converged = false;
};

/// The seeded initial guess used by train_discrete: A and pi from symmetric
/// Dirichlet draws, B from training symbol frequencies perturbed +-10%.
DiscreteHmm initial_discrete_guess(const std::vector<std::vector<int>>& sequences,
                                   int num_states, int num_symbols,
                                   const TrainOptions& opts = {});

/// Trains one discrete-emission model on the observation sequences of a
/// class. Sequences may have different lengths; symbols must be < K.
DiscreteTrainResult train_discrete(const std::vector<std::vector<int>>& sequences,
                                   int num_states, int num_symbols,
                                   const TrainOptions& opts = {});

struct ContinuousTrainResult {
  GmmHmm model;
  std::vector<double> log_likelihood_history;
  int iterations = 0;
  bool converged = false;
  int component_reinits = 0;
  int underflow_steps = 0;
};

/// Trains one continuous-emission model on the feature trails of a class
/// (each trail row-major steps x arity). E-step: scaled forward/backward
/// with GMM emissions plus per-feature component responsibilities; M-step:
/// pooled A/pi re-estimation and the per-(feature, state) mixture updates.
ContinuousTrainResult train_continuous(const std::vector<std::vector<double>>& trails,
                                       int arity, int num_states, int num_components,
                                       const TrainOptions& opts = {});

}  // namespace driveintent
