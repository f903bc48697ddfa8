#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "driveintent/features.hpp"
#include "driveintent/hmm.hpp"
#include "driveintent/kmeans.hpp"

namespace driveintent {

enum class ModelKind { Discrete, Continuous };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::string mode;
  int iterations = 0;
  double final_log_likelihood = 0.0;
};

/// The three per-intention models plus the shared characterization
/// artifacts. Exactly one model per intention, all of the same kind.
struct ModelBank {
  ModelKind kind = ModelKind::Discrete;
  int trail_steps = kTrailStepsDefault;
  double step_seconds = kStepSecondsDefault;
  std::vector<std::string> feature_names;
  Standardizer standardizer;
  Codebook codebook;  // discrete only

  std::array<DiscreteHmm, 3> discrete;    // indexed by intention_index
  std::array<GmmHmm, 3> continuous;       // indexed by intention_index
  std::array<TrainingMeta, 3> meta;
};

struct Prediction {
  std::optional<Intention> label;  // empty when every score is -inf
  std::array<double, 3> log_likelihoods{};
  int prefix_length = 0;
  double prediction_time = 0.0;
  bool tie = false;

  bool scorable() const { return label.has_value(); }
};

/// Number of steps observed when predicting prediction_time seconds before
/// the trail ends. The time must sit on the step grid and leave at least one
/// step.
int prefix_length(int trail_steps, double step_seconds, double prediction_time);

/// The observed portion of a trail: its first T - prediction_time/dt steps.
FeatureTrail prefix(const FeatureTrail& trail, double step_seconds,
                    double prediction_time);

/// Deterministic argmax over per-intention scores; ties go to the lowest
/// intention code and are flagged.
std::pair<std::optional<Intention>, bool> argmax_intention(
    const std::array<double, 3>& log_likelihoods);

/// Scores the first prefix_length steps of a raw (unstandardized) feature
/// trail under all three models and returns the argmax intention.
Prediction predict(const ModelBank& bank, const FeatureTrail& trail,
                   double prediction_time);

}  // namespace driveintent
