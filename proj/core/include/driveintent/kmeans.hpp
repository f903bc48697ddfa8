#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "driveintent/features.hpp"

namespace driveintent {

/// K centroids in standardized feature space.
struct Codebook {
  int arity = 0;
  std::vector<double> centroids;  // row-major, K x arity

  int k() const {
    return arity == 0 ? 0 : static_cast<int>(centroids.size()) / arity;
  }
  std::span<const double> centroid(int i) const {
    return {centroids.data() + static_cast<std::size_t>(i) * arity,
            static_cast<std::size_t>(arity)};
  }
};

struct KmeansOptions {
  int max_iter = 300;
  // Seeding: uniform sample of K distinct rows by default, or k-means++
  // (squared-distance-weighted) when set.
  bool plus_plus = false;
};

struct KmeansResult {
  Codebook codebook;
  std::vector<int> assignments;           // final cluster of every input row
  std::vector<double> objective_history;  // sum of squared distances, per iteration
  int iterations = 0;
  bool converged = false;
};

/// Lloyd iterations from a seeded sample of K distinct rows; runs until the
/// assignments stabilize or max_iter. Empty clusters are re-seeded at the row
/// farthest from its current centroid. K must not exceed the number of
/// distinct rows.
KmeansResult kmeans_fit(std::span<const double> data, int rows, int arity,
                        int k, std::uint64_t seed, const KmeansOptions& opts = {});

inline KmeansResult kmeans_fit(const FeatureMatrix& m, int k,
                               std::uint64_t seed,
                               const KmeansOptions& opts = {}) {
  return kmeans_fit(m.data, m.rows(), m.arity, k, seed, opts);
}

/// Nearest centroid by Euclidean distance; ties go to the lowest index.
int assign(const Codebook& codebook, std::span<const double> row);

/// Maps consecutive rows to an observation sequence of cluster indices.
std::vector<int> assign_sequence(const Codebook& codebook,
                                 std::span<const double> data, int rows);

}  // namespace driveintent
