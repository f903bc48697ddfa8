#include "driveintent/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace driveintent {

namespace {

using nlohmann::json;

json matrix_json(const std::vector<double>& data, int rows, int cols) {
  json out = json::array();
  for (int r = 0; r < rows; ++r) {
    json row = json::array();
    for (int c = 0; c < cols; ++c) row.push_back(data[r * cols + c]);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> matrix_from_json(const json& j, int rows, int cols,
                                     const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw ParseError(std::string("model file: bad ") + what + " shape");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (const auto& row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw ParseError(std::string("model file: bad ") + what + " row");
    for (const auto& v : row) out.push_back(v.get<double>());
  }
  return out;
}

json gmm_json(const GmmParams& p) {
  json features = json::array();
  for (int n = 0; n < p.num_features; ++n) {
    json states = json::array();
    for (int q = 0; q < p.num_states; ++q) {
      json comps = json::array();
      for (int m = 0; m < p.num_components; ++m)
        comps.push_back({{"w", p.w(n, q, m)},
                         {"mu", p.mu(n, q, m)},
                         {"sigma", p.sigma(n, q, m)}});
      states.push_back(std::move(comps));
    }
    features.push_back(std::move(states));
  }
  return features;
}

GmmParams gmm_from_json(const json& j, int n, int q, int m) {
  GmmParams p = GmmParams::zeros(n, q, m);
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < q; ++s)
      for (int c = 0; c < m; ++c) {
        const json& comp = j.at(i).at(s).at(c);
        p.w(i, s, c) = comp.at("w").get<double>();
        p.mu(i, s, c) = comp.at("mu").get<double>();
        p.sigma(i, s, c) = comp.at("sigma").get<double>();
      }
  return p;
}

}  // namespace

void save_model_bank(const ModelBank& bank, const std::string& path) {
  json j;
  j["format"] = "driveintent-model-bank";
  j["version"] = 1;
  j["kind"] = to_string(bank.kind);
  j["trail_steps"] = bank.trail_steps;
  j["step_seconds"] = bank.step_seconds;
  j["feature_names"] = bank.feature_names;
  j["standardizer"] = {{"mean", bank.standardizer.mean},
                       {"stddev", bank.standardizer.stddev}};
  if (bank.kind == ModelKind::Discrete) {
    j["codebook"] = {
        {"arity", bank.codebook.arity},
        {"centroids", matrix_json(bank.codebook.centroids, bank.codebook.k(),
                                  bank.codebook.arity)}};
  }

  json models = json::array();
  for (int i = 0; i < 3; ++i) {
    json m;
    m["intention"] = to_string(kIntentions[i]);
    if (bank.kind == ModelKind::Discrete) {
      const DiscreteHmm& d = bank.discrete[i];
      m["q"] = d.num_states;
      m["k"] = d.num_symbols;
      m["transition"] = matrix_json(d.transition, d.num_states, d.num_states);
      m["emission"] = matrix_json(d.emission, d.num_states, d.num_symbols);
      m["initial"] = d.initial;
    } else {
      const GmmHmm& c = bank.continuous[i];
      m["q"] = c.num_states;
      m["m"] = c.emissions.num_components;
      m["transition"] = matrix_json(c.transition, c.num_states, c.num_states);
      m["initial"] = c.initial;
      m["gmm"] = gmm_json(c.emissions);
    }
    m["meta"] = {{"seed", bank.meta[i].seed},
                 {"mode", bank.meta[i].mode},
                 {"iterations", bank.meta[i].iterations},
                 {"final_log_likelihood", bank.meta[i].final_log_likelihood}};
    models.push_back(std::move(m));
  }
  j["models"] = std::move(models);

  std::ofstream out(path);
  if (!out) throw Error("cannot write model file '" + path + "'");
  out << j.dump(2) << "\n";
}

ModelBank load_model_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("model file '" + path + "': " + e.what());
  }

  if (j.value("format", "") != "driveintent-model-bank")
    throw ParseError("model file '" + path + "': unrecognized format");

  ModelBank bank;
  bank.kind = model_kind_from_string(j.at("kind").get<std::string>());
  bank.trail_steps = j.at("trail_steps").get<int>();
  bank.step_seconds = j.at("step_seconds").get<double>();
  bank.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  bank.standardizer.mean =
      j.at("standardizer").at("mean").get<std::vector<double>>();
  bank.standardizer.stddev =
      j.at("standardizer").at("stddev").get<std::vector<double>>();

  if (bank.kind == ModelKind::Discrete) {
    const json& cb = j.at("codebook");
    bank.codebook.arity = cb.at("arity").get<int>();
    const json& cents = cb.at("centroids");
    bank.codebook.centroids = matrix_from_json(
        cents, static_cast<int>(cents.size()), bank.codebook.arity, "codebook");
  }

  const json& models = j.at("models");
  if (!models.is_array() || models.size() != 3)
    throw ParseError("model file '" + path + "': expected exactly 3 models");
  std::array<bool, 3> seen{false, false, false};
  for (const json& m : models) {
    const Intention intention =
        intention_from_string(m.at("intention").get<std::string>());
    const int i = intention_index(intention);
    if (seen[i])
      throw ParseError("model file '" + path + "': duplicate intention");
    seen[i] = true;
    const int q = m.at("q").get<int>();
    if (bank.kind == ModelKind::Discrete) {
      DiscreteHmm d;
      d.num_states = q;
      d.num_symbols = m.at("k").get<int>();
      d.transition = matrix_from_json(m.at("transition"), q, q, "transition");
      d.emission = matrix_from_json(m.at("emission"), q, d.num_symbols, "emission");
      d.initial = m.at("initial").get<std::vector<double>>();
      bank.discrete[i] = std::move(d);
    } else {
      GmmHmm c;
      c.num_states = q;
      c.transition = matrix_from_json(m.at("transition"), q, q, "transition");
      c.initial = m.at("initial").get<std::vector<double>>();
      c.emissions = gmm_from_json(m.at("gmm"),
                                  static_cast<int>(bank.feature_names.size()),
                                  q, m.at("m").get<int>());
      bank.continuous[i] = std::move(c);
    }
    TrainingMeta meta;
    meta.seed = m.at("meta").at("seed").get<std::uint64_t>();
    meta.mode = m.at("meta").at("mode").get<std::string>();
    meta.iterations = m.at("meta").at("iterations").get<int>();
    meta.final_log_likelihood =
        m.at("meta").at("final_log_likelihood").get<double>();
    bank.meta[i] = meta;
  }
  for (bool s : seen)
    if (!s) throw ParseError("model file '" + path + "': missing intention");
  return bank;
}

}  // namespace driveintent
