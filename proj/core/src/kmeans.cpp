#include "driveintent/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "driveintent/rng.hpp"

namespace driveintent {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

int assign(const Codebook& codebook, std::span<const double> row) {
  if (static_cast<int>(row.size()) != codebook.arity)
    throw Error("assign: row arity " + std::to_string(row.size()) +
                " does not match codebook arity " +
                std::to_string(codebook.arity));
  int best = 0;
  double best_d = sq_dist(row, codebook.centroid(0));
  for (int k = 1; k < codebook.k(); ++k) {
    const double d = sq_dist(row, codebook.centroid(k));
    if (d < best_d) {  // strict: ties stay at the lowest index
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::vector<int> assign_sequence(const Codebook& codebook,
                                 std::span<const double> data, int rows) {
  std::vector<int> out(rows);
  for (int d = 0; d < rows; ++d)
    out[d] = assign(codebook, data.subspan(
                                  static_cast<std::size_t>(d) * codebook.arity,
                                  codebook.arity));
  return out;
}

KmeansResult kmeans_fit(std::span<const double> data, int rows, int arity,
                        int k, std::uint64_t seed, const KmeansOptions& opts) {
  if (k < 1) throw Error("kmeans: K must be at least 1");
  if (rows < 1) throw Error("kmeans: no data rows");

  auto row = [&](int d) {
    return data.subspan(static_cast<std::size_t>(d) * arity, arity);
  };

  // Distinct rows (exact equality) are the candidate initial centroids.
  std::vector<int> distinct;
  for (int d = 0; d < rows; ++d) {
    bool dup = false;
    for (int e : distinct) {
      if (std::equal(row(d).begin(), row(d).end(), row(e).begin())) {
        dup = true;
        break;
      }
    }
    if (!dup) distinct.push_back(d);
  }
  if (k > static_cast<int>(distinct.size()))
    throw Error("kmeans: K=" + std::to_string(k) + " exceeds the " +
                std::to_string(distinct.size()) + " distinct rows");

  auto rng = make_rng(mix_seed(seed, 0x6b6d65616e73ULL));

  KmeansResult result;
  result.codebook.arity = arity;
  result.codebook.centroids.resize(static_cast<std::size_t>(k) * arity);
  auto set_centroid = [&](int c, int d) {
    std::copy(row(d).begin(), row(d).end(),
              result.codebook.centroids.begin() + static_cast<std::size_t>(c) * arity);
  };

  if (opts.plus_plus) {
    // k-means++: next centroid drawn with probability proportional to the
    // squared distance to the nearest chosen one.
    std::uniform_int_distribution<std::size_t> first(0, distinct.size() - 1);
    set_centroid(0, distinct[first(rng)]);
    std::vector<double> d2(distinct.size());
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < distinct.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < c; ++j)
          best = std::min(best, sq_dist(row(distinct[i]),
                                        result.codebook.centroid(j)));
        d2[i] = best;
        total += best;
      }
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      std::size_t chosen = distinct.size() - 1;
      for (std::size_t i = 0; i < distinct.size(); ++i) {
        r -= d2[i];
        if (r <= 0.0) {
          chosen = i;
          break;
        }
      }
      set_centroid(c, distinct[chosen]);
    }
  } else {
    // Seeded Fisher-Yates over the distinct rows; the first K become
    // centroids.
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, distinct.size() - 1);
      std::swap(distinct[i], distinct[pick(rng)]);
    }
    for (int c = 0; c < k; ++c) set_centroid(c, distinct[c]);
  }

  std::vector<int> labels(rows, -1);
  std::vector<double> sums(static_cast<std::size_t>(k) * arity);
  std::vector<int> counts(k);

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // Assignment step.
    bool changed = false;
    for (int d = 0; d < rows; ++d) {
      const int c = assign(result.codebook, row(d));
      if (c != labels[d]) changed = true;
      labels[d] = c;
    }
    counts.assign(k, 0);
    for (int d = 0; d < rows; ++d) ++counts[labels[d]];

    // Re-seed empty clusters at the row farthest from its centroid.
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      int far_row = -1;
      double far_d = -1.0;
      for (int d = 0; d < rows; ++d) {
        if (counts[labels[d]] <= 1) continue;  // do not empty another cluster
        const double dist = sq_dist(row(d), result.codebook.centroid(labels[d]));
        if (dist > far_d) {
          far_d = dist;
          far_row = d;
        }
      }
      if (far_row < 0) throw Error("kmeans: unable to repair empty cluster");
      std::copy(row(far_row).begin(), row(far_row).end(),
                result.codebook.centroids.begin() + static_cast<std::size_t>(c) * arity);
      --counts[labels[far_row]];
      labels[far_row] = c;
      ++counts[c];
      changed = true;
    }

    // Update step: centroid = mean of its members.
    sums.assign(sums.size(), 0.0);
    for (int d = 0; d < rows; ++d) {
      const auto r = row(d);
      double* s = sums.data() + static_cast<std::size_t>(labels[d]) * arity;
      for (int j = 0; j < arity; ++j) s[j] += r[j];
    }
    for (int c = 0; c < k; ++c)
      for (int j = 0; j < arity; ++j)
        result.codebook.centroids[static_cast<std::size_t>(c) * arity + j] =
            sums[static_cast<std::size_t>(c) * arity + j] / counts[c];

    double objective = 0.0;
    for (int d = 0; d < rows; ++d)
      objective += sq_dist(row(d), result.codebook.centroid(labels[d]));
    result.objective_history.push_back(objective);
    result.iterations = iter + 1;

    if (!changed) {
      result.converged = true;
      break;
    }
  }

  result.assignments = std::move(labels);
  return result;
}

}  // namespace driveintent
