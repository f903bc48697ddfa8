#include "driveintent/predictor.hpp"

#include <cmath>
#include <limits>

namespace driveintent {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::Discrete ? "discrete" : "continuous";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "discrete") return ModelKind::Discrete;
  if (name == "continuous") return ModelKind::Continuous;
  throw ParseError("unknown model kind '" + name + "'");
}

int prefix_length(int trail_steps, double step_seconds, double prediction_time) {
  if (prediction_time < 0.0)
    throw Error("prediction_time must be non-negative");
  const double steps_back = prediction_time / step_seconds;
  const double rounded = std::round(steps_back);
  if (std::abs(steps_back - rounded) > 1e-6)
    throw Error("prediction_time " + std::to_string(prediction_time) +
                " is not on the " + std::to_string(step_seconds) + " s grid");
  const int n = trail_steps - static_cast<int>(rounded);
  if (n < 1)
    throw Error("prediction_time " + std::to_string(prediction_time) +
                " leaves no observed steps");
  return n;
}

FeatureTrail prefix(const FeatureTrail& trail, double step_seconds,
                    double prediction_time) {
  const int n = prefix_length(trail.steps(), step_seconds, prediction_time);
  FeatureTrail out;
  out.vehicle_id = trail.vehicle_id;
  out.label = trail.label;
  out.arity = trail.arity;
  out.timestamps.assign(trail.timestamps.begin(), trail.timestamps.begin() + n);
  out.values.assign(trail.values.begin(),
                    trail.values.begin() + static_cast<std::size_t>(n) * trail.arity);
  return out;
}

std::pair<std::optional<Intention>, bool> argmax_intention(
    const std::array<double, 3>& log_likelihoods) {
  const double ninf = -std::numeric_limits<double>::infinity();
  int best = -1;
  for (int i = 0; i < 3; ++i) {
    if (log_likelihoods[i] == ninf || std::isnan(log_likelihoods[i])) continue;
    if (best < 0 || log_likelihoods[i] > log_likelihoods[best]) best = i;
  }
  if (best < 0) return {std::nullopt, false};
  bool tie = false;
  for (int i = 0; i < 3; ++i)
    if (i != best && log_likelihoods[i] == log_likelihoods[best]) tie = true;
  return {kIntentions[best], tie};
}

Prediction predict(const ModelBank& bank, const FeatureTrail& trail,
                   double prediction_time) {
  if (trail.steps() != bank.trail_steps)
    throw Error("trail has " + std::to_string(trail.steps()) +
                " steps, the bank expects " + std::to_string(bank.trail_steps));
  if (trail.arity != static_cast<int>(bank.feature_names.size()))
    throw Error("trail arity " + std::to_string(trail.arity) +
                " does not match the bank's feature manifest (" +
                std::to_string(bank.feature_names.size()) + ")");

  Prediction pred;
  pred.prediction_time = prediction_time;
  pred.prefix_length =
      prefix_length(bank.trail_steps, bank.step_seconds, prediction_time);

  // Standardize the observed prefix with the bank's training statistics.
  std::vector<double> rows(trail.values.begin(),
                           trail.values.begin() +
                               static_cast<std::size_t>(pred.prefix_length) *
                                   trail.arity);
  for (int t = 0; t < pred.prefix_length; ++t)
    bank.standardizer.apply_row(
        {rows.data() + static_cast<std::size_t>(t) * trail.arity,
         static_cast<std::size_t>(trail.arity)});

  if (bank.kind == ModelKind::Discrete) {
    const std::vector<int> symbols =
        assign_sequence(bank.codebook, rows, pred.prefix_length);
    for (int i = 0; i < 3; ++i)
      pred.log_likelihoods[i] = log_likelihood(bank.discrete[i], symbols);
  } else {
    for (int i = 0; i < 3; ++i)
      pred.log_likelihoods[i] =
          log_likelihood(bank.continuous[i], rows, trail.arity);
  }

  auto [label, tie] = argmax_intention(pred.log_likelihoods);
  pred.label = label;
  pred.tie = tie;
  return pred;
}

}  // namespace driveintent
