#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "driveintent/kmeans.hpp"
#include "driveintent/rng.hpp"

using namespace driveintent;

namespace {

// Enumeration oracle: best 2-cluster objective over all assignments of the
// rows, centroids at member means. Independent of Lloyd's algorithm.
double best_two_cluster_objective(const std::vector<double>& rows) {
  const int n = static_cast<int>(rows.size());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << n) - 1; ++mask) {
    double sum[2] = {0, 0};
    int cnt[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
      const int c = (mask >> i) & 1;
      sum[c] += rows[i];
      ++cnt[c];
    }
    if (cnt[0] == 0 || cnt[1] == 0) continue;
    const double mu[2] = {sum[0] / cnt[0], sum[1] / cnt[1]};
    double j = 0.0;
    for (int i = 0; i < n; ++i) {
      const int c = (mask >> i) & 1;
      j += (rows[i] - mu[c]) * (rows[i] - mu[c]);
    }
    best = std::min(best, j);
  }
  return best;
}

}  // namespace

TEST_CASE("kmeans: separable 1-D data") {
  const std::vector<double> data = {0.0, 0.0, 10.0, 10.0};
  const auto result = kmeans_fit(data, 4, 1, 2, 1);
  CHECK(result.converged);
  std::vector<double> centroids = result.codebook.centroids;
  std::sort(centroids.begin(), centroids.end());
  CHECK(centroids[0] == 0.0);
  CHECK(centroids[1] == 10.0);
  CHECK(result.objective_history.back() == 0.0);
}

TEST_CASE("kmeans: 4-point instance converges to the enumerated optimum") {
  const std::vector<double> data = {1.0, 2.0, 9.0, 10.0};
  const double oracle = best_two_cluster_objective(data);
  for (std::uint64_t seed : {1, 2, 3, 4, 5, 6, 7, 8}) {
    const auto result = kmeans_fit(data, 4, 1, 2, seed);
    CHECK(result.converged);
    std::vector<double> centroids = result.codebook.centroids;
    std::sort(centroids.begin(), centroids.end());
    CHECK(centroids[0] == 1.5);  // exact binary means
    CHECK(centroids[1] == 9.5);
    CHECK(result.objective_history.back() == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("kmeans: K=1 yields the column mean") {
  const std::vector<double> data = {1.0, 0.0, 3.0, 2.0, 5.0, 4.0};  // 3 rows x 2
  const auto result = kmeans_fit(data, 3, 2, 1, 9);
  CHECK(result.codebook.centroid(0)[0] == doctest::Approx(3.0));
  CHECK(result.codebook.centroid(0)[1] == doctest::Approx(2.0));
}

TEST_CASE("assign: exact, tie and shape rules") {
  Codebook cb;
  cb.arity = 1;
  cb.centroids = {0.0, 4.0, 8.0};
  CHECK(assign(cb, std::vector<double>{8.0}) == 2);
  CHECK(assign(cb, std::vector<double>{2.0}) == 0);  // tie 0 vs 1 -> lowest
  const std::vector<double> rows = {0.1, 3.9, 7.7, 0.2, 4.4};
  CHECK(assign_sequence(cb, rows, 5).size() == 5);

  CHECK_THROWS_AS(assign(cb, std::vector<double>{1.0, 2.0}), Error);
}

TEST_CASE("kmeans property: objective non-increasing, fixed point is Eq-style") {
  auto rng = make_rng(123);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int rep = 0; rep < 10; ++rep) {
    const int rows = 60, arity = 3, k = 4;
    std::vector<double> data(rows * arity);
    for (double& v : data) v = u(rng);

    const auto result = kmeans_fit(data, rows, arity, k, rep);
    for (std::size_t i = 1; i < result.objective_history.size(); ++i)
      CHECK(result.objective_history[i] <= result.objective_history[i - 1] + 1e-12);
    CHECK(result.converged);

    // Fixed point: every centroid is the mean of its members.
    std::vector<double> sums(static_cast<std::size_t>(k) * arity, 0.0);
    std::vector<int> counts(k, 0);
    for (int d = 0; d < rows; ++d) {
      ++counts[result.assignments[d]];
      for (int j = 0; j < arity; ++j)
        sums[result.assignments[d] * arity + j] += data[d * arity + j];
    }
    for (int c = 0; c < k; ++c) {
      REQUIRE(counts[c] > 0);
      for (int j = 0; j < arity; ++j)
        CHECK(result.codebook.centroids[c * arity + j] ==
              doctest::Approx(sums[c * arity + j] / counts[c]).epsilon(1e-9));
    }

    // Reassignment is stable at convergence.
    const auto again = assign_sequence(result.codebook, data, rows);
    CHECK(again == result.assignments);
  }
}

TEST_CASE("kmeans: K equal to distinct rows gives zero objective") {
  const std::vector<double> data = {1.0, 2.0, 3.0, 1.0, 2.0};
  const auto result = kmeans_fit(data, 5, 1, 3, 4);
  CHECK(result.objective_history.back() == 0.0);
}

TEST_CASE("kmeans: K above distinct rows is an error") {
  const std::vector<double> data = {1.0, 1.0, 2.0};
  CHECK_THROWS_AS(kmeans_fit(data, 3, 1, 3, 1), Error);
}

TEST_CASE("kmeans: plus-plus seeding converges on the same small instances") {
  KmeansOptions opts;
  opts.plus_plus = true;
  const std::vector<double> data = {1.0, 2.0, 9.0, 10.0};
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    const auto result = kmeans_fit(data, 4, 1, 2, seed, opts);
    std::vector<double> centroids = result.codebook.centroids;
    std::sort(centroids.begin(), centroids.end());
    CHECK(centroids[0] == 1.5);
    CHECK(centroids[1] == 9.5);
    for (std::size_t i = 1; i < result.objective_history.size(); ++i)
      CHECK(result.objective_history[i] <= result.objective_history[i - 1] + 1e-12);
  }
  const auto a = kmeans_fit(data, 4, 1, 2, 9, opts);
  const auto b = kmeans_fit(data, 4, 1, 2, 9, opts);
  CHECK(a.codebook.centroids == b.codebook.centroids);
}

TEST_CASE("kmeans: deterministic given seed") {
  auto rng = make_rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> data(200);
  for (double& v : data) v = u(rng);
  const auto a = kmeans_fit(data, 100, 2, 5, 77);
  const auto b = kmeans_fit(data, 100, 2, 5, 77);
  CHECK(a.codebook.centroids == b.codebook.centroids);
  CHECK(a.assignments == b.assignments);
}
