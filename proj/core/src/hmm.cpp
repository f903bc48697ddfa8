#include "driveintent/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "driveintent/rng.hpp"

namespace driveintent {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Posteriors impossible_result(int length, int num_states) {
  Posteriors p;
  p.length = length;
  p.num_states = num_states;
  p.log_likelihood = kNegInf;
  p.impossible = true;
  return p;
}

// Scaled forward/backward over per-step log emission scores. Each step's
// emissions are shifted by their maximum before exponentiation, so the
// recursion never under- or overflows; the shifts fold into the scaling
// constants and cancel out of every posterior.
Posteriors scaled_forward_backward(std::span<const double> transition,
                                   std::span<const double> initial,
                                   int num_states,
                                   const std::vector<double>& log_emission) {
  const int Q = num_states;
  const int T = static_cast<int>(log_emission.size()) / Q;

  Posteriors post;
  post.length = T;
  post.num_states = Q;

  std::vector<double> emis(static_cast<std::size_t>(T) * Q);
  std::vector<double> shift(T);
  for (int t = 0; t < T; ++t) {
    double mx = kNegInf;
    for (int q = 0; q < Q; ++q) mx = std::max(mx, log_emission[t * Q + q]);
    if (mx == kNegInf) return impossible_result(T, Q);
    shift[t] = mx;
    for (int q = 0; q < Q; ++q)
      emis[t * Q + q] = std::exp(log_emission[t * Q + q] - mx);
  }

  post.alpha.assign(static_cast<std::size_t>(T) * Q, 0.0);
  post.beta.assign(static_cast<std::size_t>(T) * Q, 0.0);
  post.log_scale.assign(T, 0.0);
  std::vector<double> scale(T, 0.0);

  for (int q = 0; q < Q; ++q) post.alpha[q] = initial[q] * emis[q];
  double s = 0.0;
  for (int q = 0; q < Q; ++q) s += post.alpha[q];
  if (s <= 0.0) return impossible_result(T, Q);
  for (int q = 0; q < Q; ++q) post.alpha[q] /= s;
  scale[0] = s;

  for (int t = 1; t < T; ++t) {
    double st = 0.0;
    for (int p = 0; p < Q; ++p) {
      double acc = 0.0;
      for (int q = 0; q < Q; ++q)
        acc += post.alpha[(t - 1) * Q + q] * transition[q * Q + p];
      const double a = acc * emis[t * Q + p];
      post.alpha[t * Q + p] = a;
      st += a;
    }
    if (st <= 0.0) return impossible_result(T, Q);
    for (int p = 0; p < Q; ++p) post.alpha[t * Q + p] /= st;
    scale[t] = st;
  }

  for (int t = 0; t < T; ++t) post.log_scale[t] = std::log(scale[t]) + shift[t];
  post.log_likelihood = 0.0;
  for (double ls : post.log_scale) post.log_likelihood += ls;

  for (int q = 0; q < Q; ++q) post.beta[(T - 1) * Q + q] = 1.0;
  for (int t = T - 2; t >= 0; --t) {
    for (int q = 0; q < Q; ++q) {
      double acc = 0.0;
      for (int p = 0; p < Q; ++p)
        acc += transition[q * Q + p] * emis[(t + 1) * Q + p] *
               post.beta[(t + 1) * Q + p];
      post.beta[t * Q + q] = acc / scale[t + 1];
    }
  }

  post.state.assign(static_cast<std::size_t>(T) * Q, 0.0);
  for (int t = 0; t < T; ++t)
    for (int q = 0; q < Q; ++q)
      post.state[t * Q + q] = post.alpha[t * Q + q] * post.beta[t * Q + q];

  if (T > 1) {
    post.pair.assign(static_cast<std::size_t>(T - 1) * Q * Q, 0.0);
    for (int t = 0; t + 1 < T; ++t)
      for (int q = 0; q < Q; ++q)
        for (int p = 0; p < Q; ++p)
          post.pair[(static_cast<std::size_t>(t) * Q + q) * Q + p] =
              post.alpha[t * Q + q] * transition[q * Q + p] *
              emis[(t + 1) * Q + p] * post.beta[(t + 1) * Q + p] / scale[t + 1];
  }
  return post;
}

std::vector<double> discrete_log_emissions(const DiscreteHmm& model,
                                           std::span<const int> sequence) {
  const int Q = model.num_states;
  std::vector<double> le(sequence.size() * Q);
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    const int o = sequence[t];
    if (o < 0 || o >= model.num_symbols)
      throw Error("observation symbol " + std::to_string(o) +
                  " outside the model's alphabet of " +
                  std::to_string(model.num_symbols));
    for (int q = 0; q < Q; ++q) {
      const double b = model.b(q, o);
      le[t * Q + q] = b > 0.0 ? std::log(b) : kNegInf;
    }
  }
  return le;
}

std::vector<double> gmm_log_emissions(const GmmHmm& model,
                                      std::span<const double> features,
                                      int arity) {
  const int Q = model.num_states;
  if (arity != model.emissions.num_features)
    throw Error("feature arity " + std::to_string(arity) +
                " does not match the model's " +
                std::to_string(model.emissions.num_features));
  const int T = static_cast<int>(features.size()) / arity;
  std::vector<double> le(static_cast<std::size_t>(T) * Q);
  for (int t = 0; t < T; ++t) {
    const auto row = features.subspan(static_cast<std::size_t>(t) * arity, arity);
    for (int q = 0; q < Q; ++q)
      le[t * Q + q] = state_log_emission(model.emissions, q, row);
  }
  return le;
}

// Renormalizes a row to sum one with every entry at least `floor`: entries
// below the floor are pinned to it exactly and the rest rescaled, repeated
// until stable.
void floor_and_normalize(std::span<double> row, double floor) {
  const int n = static_cast<int>(row.size());
  double sum = 0.0;
  for (double v : row) sum += v;
  if (sum <= 0.0 || floor * n >= 1.0) {
    const double u = 1.0 / n;
    for (double& v : row) v = u;
    return;
  }
  for (double& v : row) v /= sum;

  std::vector<bool> pinned(n, false);
  for (int pass = 0; pass < n; ++pass) {
    int n_pinned = 0;
    double free_mass = 0.0;
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      if (!pinned[i] && row[i] < floor) {
        pinned[i] = true;
        changed = true;
      }
      if (pinned[i])
        ++n_pinned;
      else
        free_mass += row[i];
    }
    if (!changed && pass > 0) break;
    if (n_pinned == 0) break;
    const double scale = (1.0 - floor * n_pinned) / free_mass;
    for (int i = 0; i < n; ++i) row[i] = pinned[i] ? floor : row[i] * scale;
  }
}

void floor_model(DiscreteHmm& model, double floor) {
  for (int q = 0; q < model.num_states; ++q) {
    floor_and_normalize({model.transition.data() + q * model.num_states,
                         static_cast<std::size_t>(model.num_states)},
                        floor);
    floor_and_normalize({model.emission.data() + q * model.num_symbols,
                         static_cast<std::size_t>(model.num_symbols)},
                        floor);
  }
  floor_and_normalize({model.initial.data(), model.initial.size()}, floor);
}

std::vector<double> dirichlet_row(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> row(n);
  double sum = 0.0;
  for (double& v : row) {
    v = exp1(rng);
    sum += v;
  }
  for (double& v : row) v /= sum;
  return row;
}

DiscreteHmm init_discrete(const std::vector<std::vector<int>>& sequences,
                          int num_states, int num_symbols,
                          std::mt19937_64& rng, double floor) {
  DiscreteHmm model;
  model.num_states = num_states;
  model.num_symbols = num_symbols;
  model.transition.resize(static_cast<std::size_t>(num_states) * num_states);
  model.emission.resize(static_cast<std::size_t>(num_states) * num_symbols);
  model.initial.resize(num_states);

  for (int q = 0; q < num_states; ++q) {
    auto row = dirichlet_row(num_states, rng);
    std::copy(row.begin(), row.end(), model.transition.begin() + q * num_states);
  }
  auto pi = dirichlet_row(num_states, rng);
  std::copy(pi.begin(), pi.end(), model.initial.begin());

  // Emissions: training-set symbol frequencies, perturbed +-10% per state.
  std::vector<double> freq(num_symbols, 0.0);
  double total = 0.0;
  for (const auto& seq : sequences)
    for (int o : seq) {
      freq[o] += 1.0;
      total += 1.0;
    }
  for (double& f : freq) f /= total;
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (int q = 0; q < num_states; ++q) {
    for (int j = 0; j < num_symbols; ++j)
      model.emission[q * num_symbols + j] = freq[j] * (1.0 + jitter(rng));
    floor_and_normalize({model.emission.data() + q * num_symbols,
                         static_cast<std::size_t>(num_symbols)},
                        floor);
  }
  floor_model(model, floor);
  return model;
}

struct SequenceEstimates {
  std::vector<double> a;   // Q x Q
  std::vector<double> b;   // Q x K
  std::vector<double> pi;  // Q
};

// Per-sequence re-estimates from one sequence's posteriors (Step 1 of the
// single-pass procedure).
SequenceEstimates sequence_estimates(const Posteriors& post,
                                     std::span<const int> sequence,
                                     int num_symbols) {
  const int Q = post.num_states;
  const int T = post.length;
  SequenceEstimates est;
  est.a.assign(static_cast<std::size_t>(Q) * Q, 0.0);
  est.b.assign(static_cast<std::size_t>(Q) * num_symbols, 0.0);
  est.pi.assign(Q, 0.0);

  for (int q = 0; q < Q; ++q) {
    double den = 0.0;
    for (int t = 0; t + 1 < T; ++t) den += post.eta(t, q);
    for (int p = 0; p < Q; ++p) {
      double num = 0.0;
      for (int t = 0; t + 1 < T; ++t) num += post.xi(t, q, p);
      est.a[q * Q + p] = den > 0.0 ? num / den : 1.0 / Q;
    }
  }
  for (int p = 0; p < Q; ++p) {
    double den = 0.0;
    for (int t = 0; t < T; ++t) den += post.eta(t, p);
    for (int t = 0; t < T; ++t)
      est.b[p * num_symbols + sequence[t]] += post.eta(t, p);
    for (int j = 0; j < num_symbols; ++j)
      est.b[p * num_symbols + j] =
          den > 0.0 ? est.b[p * num_symbols + j] / den : 1.0 / num_symbols;
  }
  for (int q = 0; q < Q; ++q) est.pi[q] = post.eta(0, q);
  return est;
}

DiscreteTrainResult train_discrete_pooled(
    const std::vector<std::vector<int>>& sequences, int num_states,
    int num_symbols, const TrainOptions& opts, DiscreteHmm model) {
  const int Q = num_states;
  const int K = num_symbols;
  const double L = static_cast<double>(sequences.size());

  DiscreteTrainResult result;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    std::vector<double> num_a(static_cast<std::size_t>(Q) * Q, 0.0);
    std::vector<double> den_a(Q, 0.0);
    std::vector<double> num_b(static_cast<std::size_t>(Q) * K, 0.0);
    std::vector<double> den_b(Q, 0.0);
    std::vector<double> num_pi(Q, 0.0);
    double total_ll = 0.0;

    for (const auto& seq : sequences) {
      const Posteriors post = forward_backward(model, seq);
      if (post.impossible)
        throw Error("training sequence has zero probability under the model");
      total_ll += post.log_likelihood;
      const int T = post.length;
      for (int t = 0; t < T; ++t)
        for (int q = 0; q < Q; ++q) {
          const double eta = post.eta(t, q);
          if (t + 1 < T) {
            den_a[q] += eta;
            for (int p = 0; p < Q; ++p) num_a[q * Q + p] += post.xi(t, q, p);
          }
          num_b[q * K + seq[t]] += eta;
          den_b[q] += eta;
        }
      for (int q = 0; q < Q; ++q) num_pi[q] += post.eta(0, q);
    }

    result.log_likelihood_history.push_back(total_ll);
    result.iterations = iter + 1;

    for (int q = 0; q < Q; ++q) {
      for (int p = 0; p < Q; ++p)
        model.transition[q * Q + p] =
            den_a[q] > 0.0 ? num_a[q * Q + p] / den_a[q] : 1.0 / Q;
      for (int j = 0; j < K; ++j)
        model.emission[q * K + j] =
            den_b[q] > 0.0 ? num_b[q * K + j] / den_b[q] : 1.0 / K;
      model.initial[q] = num_pi[q] / L;
    }
    floor_model(model, opts.prob_floor);

    const auto& h = result.log_likelihood_history;
    if (h.size() >= 2) {
      const double prev = h[h.size() - 2];
      if (std::abs(h.back() - prev) / std::max(1.0, std::abs(prev)) < opts.tol) {
        result.converged = true;
        break;
      }
    }
  }
  result.model = std::move(model);
  return result;
}

DiscreteTrainResult train_discrete_paper(
    const std::vector<std::vector<int>>& sequences, int num_states,
    int num_symbols, const TrainOptions& opts, DiscreteHmm model) {
  const int Q = num_states;
  const int K = num_symbols;

  DiscreteTrainResult result;
  std::vector<double> acc_a(static_cast<std::size_t>(Q) * Q, 0.0);
  std::vector<double> acc_b(static_cast<std::size_t>(Q) * K, 0.0);
  std::vector<double> acc_pi(Q, 0.0);

  for (std::size_t l = 0; l < sequences.size(); ++l) {
    const Posteriors post = forward_backward(model, sequences[l]);
    if (post.impossible)
      throw Error("training sequence has zero probability under the model");
    result.log_likelihood_history.push_back(post.log_likelihood);

    const SequenceEstimates est = sequence_estimates(post, sequences[l], K);
    for (std::size_t i = 0; i < acc_a.size(); ++i) acc_a[i] += est.a[i];
    for (std::size_t i = 0; i < acc_b.size(); ++i) acc_b[i] += est.b[i];
    for (std::size_t i = 0; i < acc_pi.size(); ++i) acc_pi[i] += est.pi[i];

    DiscreteHmm next = model;
    const double inv = 1.0 / static_cast<double>(l + 1);
    for (std::size_t i = 0; i < acc_a.size(); ++i) next.transition[i] = acc_a[i] * inv;
    for (std::size_t i = 0; i < acc_b.size(); ++i) next.emission[i] = acc_b[i] * inv;
    for (std::size_t i = 0; i < acc_pi.size(); ++i) next.initial[i] = acc_pi[i] * inv;
    floor_model(next, opts.prob_floor);

    double delta = 0.0;
    for (std::size_t i = 0; i < next.transition.size(); ++i)
      delta = std::max(delta, std::abs(next.transition[i] - model.transition[i]));
    for (std::size_t i = 0; i < next.emission.size(); ++i)
      delta = std::max(delta, std::abs(next.emission[i] - model.emission[i]));
    for (std::size_t i = 0; i < next.initial.size(); ++i)
      delta = std::max(delta, std::abs(next.initial[i] - model.initial[i]));

    model = std::move(next);
    result.iterations = static_cast<int>(l + 1);
    if (l > 0 && delta < opts.tol) {
      result.converged = true;
      break;
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace

std::string to_string(TrainMode mode) {
  return mode == TrainMode::Pooled ? "pooled" : "paper";
}

TrainMode train_mode_from_string(const std::string& name) {
  if (name == "pooled") return TrainMode::Pooled;
  if (name == "paper") return TrainMode::Paper;
  throw ParseError("unknown train mode '" + name + "'");
}

Posteriors forward_backward(const DiscreteHmm& model,
                            std::span<const int> sequence) {
  if (sequence.empty()) throw Error("forward_backward: empty sequence");
  return scaled_forward_backward(model.transition, model.initial,
                                 model.num_states,
                                 discrete_log_emissions(model, sequence));
}

Posteriors forward_backward(const GmmHmm& model,
                            std::span<const double> features, int arity) {
  if (features.empty() || arity <= 0 || features.size() % arity != 0)
    throw Error("forward_backward: bad feature buffer");
  return scaled_forward_backward(model.transition, model.initial,
                                 model.num_states,
                                 gmm_log_emissions(model, features, arity));
}

double log_likelihood(const DiscreteHmm& model, std::span<const int> sequence) {
  return forward_backward(model, sequence).log_likelihood;
}

double log_likelihood(const GmmHmm& model, std::span<const double> features,
                      int arity) {
  return forward_backward(model, features, arity).log_likelihood;
}

namespace {

void validate_training_input(const std::vector<std::vector<int>>& sequences,
                             int num_states, int num_symbols) {
  if (sequences.empty()) throw Error("train_discrete: no sequences");
  if (num_states < 1 || num_symbols < 1)
    throw Error("train_discrete: Q and K must be positive");
  for (const auto& seq : sequences) {
    if (seq.empty()) throw Error("train_discrete: empty sequence");
    for (int o : seq)
      if (o < 0 || o >= num_symbols)
        throw Error("train_discrete: symbol " + std::to_string(o) +
                    " outside alphabet of " + std::to_string(num_symbols));
  }
}

}  // namespace

DiscreteHmm initial_discrete_guess(const std::vector<std::vector<int>>& sequences,
                                   int num_states, int num_symbols,
                                   const TrainOptions& opts) {
  validate_training_input(sequences, num_states, num_symbols);
  auto rng = make_rng(mix_seed(opts.seed, 0x686d6dULL));
  return init_discrete(sequences, num_states, num_symbols, rng, opts.prob_floor);
}

DiscreteTrainResult train_discrete(const std::vector<std::vector<int>>& sequences,
                                   int num_states, int num_symbols,
                                   const TrainOptions& opts) {
  if (opts.mode == TrainMode::Paper) {
    DiscreteHmm init =
        initial_discrete_guess(sequences, num_states, num_symbols, opts);
    return train_discrete_paper(sequences, num_states, num_symbols, opts,
                                std::move(init));
  }

  DiscreteTrainResult best;
  const int restarts = std::max(opts.restarts, 1);
  for (int r = 0; r < restarts; ++r) {
    TrainOptions run = opts;
    if (restarts > 1) run.seed = mix_seed(opts.seed, 0x72657374ULL + r);
    DiscreteHmm init =
        initial_discrete_guess(sequences, num_states, num_symbols, run);
    DiscreteTrainResult result = train_discrete_pooled(
        sequences, num_states, num_symbols, run, std::move(init));
    if (r == 0 || result.log_likelihood_history.back() >
                      best.log_likelihood_history.back())
      best = std::move(result);
  }
  return best;
}

namespace {

// Initial mixture guess: state p sees the p-th contiguous time block of
// every trail; component means at within-block quantiles with a small
// seeded jitter, sigma = block std.
GmmParams init_gmm(const std::vector<std::vector<double>>& trails, int arity,
                   int num_states, int num_components, std::mt19937_64& rng,
                   double sigma_floor) {
  GmmParams params = GmmParams::zeros(arity, num_states, num_components);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);

  for (int n = 0; n < arity; ++n) {
    for (int p = 0; p < num_states; ++p) {
      std::vector<double> block;
      for (const auto& trail : trails) {
        const int T = static_cast<int>(trail.size()) / arity;
        int lo = p * T / num_states;
        int hi = (p + 1) * T / num_states;
        if (lo >= hi) {  // more states than steps: fall back to everything
          lo = 0;
          hi = T;
        }
        for (int t = lo; t < hi; ++t) block.push_back(trail[t * arity + n]);
      }
      std::sort(block.begin(), block.end());

      double mean = 0.0;
      for (double v : block) mean += v;
      mean /= static_cast<double>(block.size());
      double var = 0.0;
      for (double v : block) var += (v - mean) * (v - mean);
      const double sd = std::max(std::sqrt(var / block.size()), sigma_floor);

      for (int m = 0; m < num_components; ++m) {
        const double qpos = (m + 0.5) / num_components;
        const std::size_t at = std::min(
            block.size() - 1,
            static_cast<std::size_t>(qpos * static_cast<double>(block.size())));
        params.w(n, p, m) = 1.0 / num_components;
        params.mu(n, p, m) = block[at] + jitter(rng) * sd;
        params.sigma(n, p, m) = sd;
      }
    }
  }
  return params;
}

}  // namespace

namespace {

ContinuousTrainResult train_continuous_once(
    const std::vector<std::vector<double>>& trails, int arity, int num_states,
    int num_components, const TrainOptions& opts) {
  const int Q = num_states;
  auto rng = make_rng(mix_seed(opts.seed, 0x676d6dULL));

  GmmHmm model;
  model.num_states = Q;
  model.transition.resize(static_cast<std::size_t>(Q) * Q);
  model.initial.resize(Q);
  for (int q = 0; q < Q; ++q) {
    auto row = dirichlet_row(Q, rng);
    std::copy(row.begin(), row.end(), model.transition.begin() + q * Q);
  }
  auto pi = dirichlet_row(Q, rng);
  std::copy(pi.begin(), pi.end(), model.initial.begin());
  for (int q = 0; q < Q; ++q)
    floor_and_normalize({model.transition.data() + q * Q,
                         static_cast<std::size_t>(Q)},
                        opts.prob_floor);
  floor_and_normalize({model.initial.data(), model.initial.size()},
                      opts.prob_floor);
  model.emissions = init_gmm(trails, arity, Q, num_components, rng,
                             opts.sigma_floor);

  int total_rows = 0;
  for (const auto& trail : trails)
    total_rows += static_cast<int>(trail.size()) / arity;

  ContinuousTrainResult result;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    std::vector<double> num_a(static_cast<std::size_t>(Q) * Q, 0.0);
    std::vector<double> den_a(Q, 0.0);
    std::vector<double> num_pi(Q, 0.0);
    std::vector<double> eta_all(static_cast<std::size_t>(total_rows) * Q);
    double total_ll = 0.0;

    int row0 = 0;
    for (const auto& trail : trails) {
      const Posteriors post = forward_backward(model, trail, arity);
      if (post.impossible)
        throw Error("training trail has zero probability under the model");
      total_ll += post.log_likelihood;
      const int T = post.length;
      for (int t = 0; t < T; ++t)
        for (int q = 0; q < Q; ++q) {
          eta_all[(row0 + t) * Q + q] = post.eta(t, q);
          if (t + 1 < T) {
            den_a[q] += post.eta(t, q);
            for (int p = 0; p < Q; ++p) num_a[q * Q + p] += post.xi(t, q, p);
          }
        }
      for (int q = 0; q < Q; ++q) num_pi[q] += post.eta(0, q);
      row0 += T;
    }

    result.log_likelihood_history.push_back(total_ll);
    result.iterations = iter + 1;

    for (int q = 0; q < Q; ++q) {
      for (int p = 0; p < Q; ++p)
        model.transition[q * Q + p] =
            den_a[q] > 0.0 ? num_a[q * Q + p] / den_a[q] : 1.0 / Q;
      model.initial[q] = num_pi[q] / static_cast<double>(trails.size());
    }
    for (int q = 0; q < Q; ++q)
      floor_and_normalize({model.transition.data() + q * Q,
                           static_cast<std::size_t>(Q)},
                          opts.prob_floor);
    floor_and_normalize({model.initial.data(), model.initial.size()},
                        opts.prob_floor);

    std::vector<double> column(total_rows);
    for (int n = 0; n < arity; ++n) {
      int r = 0;
      for (const auto& trail : trails) {
        const int T = static_cast<int>(trail.size()) / arity;
        for (int t = 0; t < T; ++t) column[r++] = trail[t * arity + n];
      }
      const FeatureResponsibilities resp =
          responsibilities(model.emissions, n, eta_all, column);
      result.underflow_steps += resp.underflow_steps;
      result.component_reinits += update_params(model.emissions, n, resp,
                                                column, rng, opts.sigma_floor);
    }

    const auto& h = result.log_likelihood_history;
    if (h.size() >= 2) {
      const double prev = h[h.size() - 2];
      if (std::abs(h.back() - prev) / std::max(1.0, std::abs(prev)) < opts.tol) {
        result.converged = true;
        break;
      }
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace

ContinuousTrainResult train_continuous(
    const std::vector<std::vector<double>>& trails, int arity, int num_states,
    int num_components, const TrainOptions& opts) {
  if (trails.empty()) throw Error("train_continuous: no trails");
  if (arity < 1 || num_states < 1 || num_components < 1)
    throw Error("train_continuous: N, Q and M must be positive");
  for (const auto& trail : trails)
    if (trail.empty() || trail.size() % arity != 0)
      throw Error("train_continuous: trail size not a multiple of the arity");

  ContinuousTrainResult best;
  const int restarts = std::max(opts.restarts, 1);
  for (int r = 0; r < restarts; ++r) {
    TrainOptions run = opts;
    if (restarts > 1) run.seed = mix_seed(opts.seed, 0x72657374ULL + r);
    ContinuousTrainResult result =
        train_continuous_once(trails, arity, num_states, num_components, run);
    if (r == 0 || result.log_likelihood_history.back() >
                      best.log_likelihood_history.back())
      best = std::move(result);
  }
  return best;
}

}  // namespace driveintent
