#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "lmebm/distribution.hpp"
#include "lmebm/selection.hpp"
#include "oracle.hpp"

using namespace lmebm;

namespace {

double total_probability(const ExactDistribution& dist) {
  double sum = 0.0;
  for (std::uint32_t s = 0; s < dist.spec().state_count(); ++s) {
    sum += dist.prob(s);
  }
  return sum;
}

}  // namespace

TEST_CASE("zero weights give the uniform joint") {
  const MachineSpec spec(2, 1);
  const ExactDistribution dist(spec, WeightMatrix(3));
  CHECK(dist.log_partition() == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-14));
  for (std::uint32_t s = 0; s < 8; ++s) {
    CHECK(dist.prob(s) == doctest::Approx(0.125).epsilon(1e-14));
  }
}

TEST_CASE("two-node machine with one coupling, by hand") {
  const MachineSpec spec(2, 0);
  WeightMatrix w(2);
  w.set_entry(0, 1, std::log(2.0));
  const ExactDistribution dist(spec, w);
  // Z = 3 + 2 = 5
  CHECK(dist.prob(0b11) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(dist.prob(0b00) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(dist.prob(0b01) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(dist.prob(0b10) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("enumeration matches the brute-force oracle") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const MachineSpec spec(5, 3);
    const WeightMatrix w = random_weights(8, 2.0, seed);
    const ExactDistribution dist(spec, w);
    const auto p = oracle::probabilities(spec, w);
    for (std::uint32_t s = 0; s < spec.state_count(); ++s) {
      CHECK(dist.prob(s) ==
            doctest::Approx(static_cast<double>(p[s])).epsilon(1e-12));
    }
    CHECK(total_probability(dist) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("log-domain enumeration survives clamped weights") {
  const MachineSpec spec(5, 3);
  WeightMatrix w(8);
  for (int i = 0; i < w.value_count(); ++i) {
    w.set_value(i, i % 2 == 0 ? kWeightClamp : -kWeightClamp);
  }
  const ExactDistribution dist(spec, w);
  CHECK(std::isfinite(dist.log_partition()));
  CHECK(total_probability(dist) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("enumeration cap is enforced by name") {
  CHECK_THROWS_WITH_AS(MachineSpec(15, 10),
                       doctest::Contains("enumeration cap of 20"),
                       CapacityError);
  CHECK_NOTHROW(MachineSpec(15, 10, 25));
}

TEST_CASE("observed marginal") {
  SUBCASE("uniform joint marginalizes to uniform") {
    const MachineSpec spec(4, 2);
    const ExactDistribution dist(spec, WeightMatrix(6));
    double total = 0.0;
    for (std::uint32_t y = 0; y < 16; ++y) {
      CHECK(dist.observed_marginal(y) == doctest::Approx(1.0 / 16).epsilon(1e-13));
      total += dist.observed_marginal(y);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("no hidden nodes: marginal equals the joint") {
    const MachineSpec spec(3, 0);
    const WeightMatrix w = random_weights(3, 1.5, 7);
    const ExactDistribution dist(spec, w);
    for (std::uint32_t y = 0; y < 8; ++y) {
      CHECK(dist.observed_marginal(y) == doctest::Approx(dist.prob(y)).epsilon(1e-14));
    }
  }
  SUBCASE("matches the oracle on a random machine") {
    const MachineSpec spec(5, 3);
    const WeightMatrix w = random_weights(8, 2.0, 11);
    const ExactDistribution dist(spec, w);
    double total = 0.0;
    for (std::uint32_t y = 0; y < 32; ++y) {
      const double expected =
          static_cast<double>(oracle::observed_marginal(spec, w, y));
      CHECK(dist.observed_marginal(y) == doctest::Approx(expected).epsilon(1e-12));
      total += dist.observed_marginal(y);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("input shape is checked") {
    const MachineSpec spec(3, 1);
    const ExactDistribution dist(spec, WeightMatrix(4));
    CHECK_THROWS_AS(dist.observed_marginal(std::vector<int>{0, 1}), ShapeError);
    CHECK_THROWS_AS(dist.observed_marginal(std::vector<int>{0, 1, 2}),
                    ShapeError);
  }
}

TEST_CASE("hidden conditional") {
  SUBCASE("uniform over completions at zero weights") {
    const MachineSpec spec(3, 2);
    const ExactDistribution dist(spec, WeightMatrix(5));
    const auto cond = dist.hidden_conditional(0b101u);
    for (double c : cond) CHECK(c == doctest::Approx(0.25).epsilon(1e-13));
  }
  SUBCASE("decoupled hidden block ignores the observation") {
    const MachineSpec spec(3, 2);
    WeightMatrix w(5);
    // couple only the visible block
    w.set_entry(0, 1, 1.3);
    w.set_entry(1, 2, -0.7);
    const ExactDistribution dist(spec, w);
    const auto base = dist.hidden_conditional(0u);
    for (std::uint32_t y = 1; y < 8; ++y) {
      const auto cond = dist.hidden_conditional(y);
      for (std::uint32_t z = 0; z < 4; ++z) {
        CHECK(cond[z] == doctest::Approx(base[z]).epsilon(1e-13));
        CHECK(cond[z] == doctest::Approx(0.25).epsilon(1e-13));
      }
    }
  }
  SUBCASE("Bayes table matches the oracle and sums to one") {
    const MachineSpec spec(5, 3);
    const WeightMatrix w = random_weights(8, 2.0, 13);
    const ExactDistribution dist(spec, w);
    for (std::uint32_t y = 0; y < 32; ++y) {
      const auto cond = dist.hidden_conditional(y);
      const auto expected = oracle::hidden_conditional(spec, w, y);
      double total = 0.0;
      for (std::uint32_t z = 0; z < 8; ++z) {
        CHECK(cond[z] ==
              doctest::Approx(static_cast<double>(expected[z])).epsilon(1e-12));
        total += cond[z];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("entropy") {
  SUBCASE("uniform reaches the maximum") {
    const MachineSpec spec(5, 3);
    const ExactDistribution dist(spec, WeightMatrix(8));
    CHECK(dist.entropy() == doctest::Approx(8 * std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("a clamped weight pulls entropy strictly below the maximum") {
    const MachineSpec spec(2, 0);
    WeightMatrix w(2);
    w.set_entry(0, 1, kWeightClamp);
    const ExactDistribution dist(spec, w);
    CHECK(dist.entropy() < 2 * std::log(2.0));
    CHECK(dist.entropy() >= 0.0);
  }
  SUBCASE("matches the oracle on random machines") {
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
      const MachineSpec spec(4, 4);
      const WeightMatrix w = random_weights(8, 2.5, seed);
      const ExactDistribution dist(spec, w);
      CHECK(dist.entropy() ==
            doctest::Approx(static_cast<double>(oracle::entropy(spec, w)))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("log likelihood") {
  SUBCASE("uniform model scores -J ln 2") {
    const MachineSpec spec(5, 2);
    const ExactDistribution dist(spec, WeightMatrix(7));
    const Dataset data = testutil::random_dataset(5, 40, 3);
    CHECK(dist.log_likelihood(data) ==
          doctest::Approx(-5 * std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("model concentrated on a repeated vector approaches zero") {
    const MachineSpec spec(2, 0);
    WeightMatrix w(2);
    w.set_entry(0, 1, kWeightClamp);
    const ExactDistribution dist(spec, w);
    const Dataset data(2, std::vector<std::uint32_t>(10, 0b11u));
    CHECK(dist.log_likelihood(data) < 0.0);
    CHECK(dist.log_likelihood(data) > -1e-6);
  }
  SUBCASE("matches the term-by-term oracle") {
    const MachineSpec spec(5, 3);
    const WeightMatrix w = random_weights(8, 2.0, 31);
    const ExactDistribution dist(spec, w);
    const Dataset data = testutil::random_dataset(5, 60, 5);
    CHECK(dist.log_likelihood(data) ==
          doctest::Approx(
              static_cast<double>(oracle::log_likelihood(spec, w, data)))
              .epsilon(1e-10));
  }
  SUBCASE("width mismatch is rejected") {
    const MachineSpec spec(5, 3);
    const ExactDistribution dist(spec, WeightMatrix(8));
    const Dataset narrow = testutil::random_dataset(4, 10, 9);
    CHECK_THROWS_AS(dist.log_likelihood(narrow), ShapeError);
  }
}

TEST_CASE("feature expectation") {
  SUBCASE("independent fair bits give 1/4") {
    const MachineSpec spec(3, 2);
    const ExactDistribution dist(spec, WeightMatrix(5));
    for (int i = 0; i < spec.feature_count(); ++i) {
      CHECK(dist.feature_expectation(i) == doctest::Approx(0.25).epsilon(1e-13));
    }
  }
  SUBCASE("a strongly negative coupling suppresses co-activation") {
    const MachineSpec spec(4, 0);
    WeightMatrix w(4);
    w.set_entry(1, 2, -kWeightClamp);
    const ExactDistribution dist(spec, w);
    CHECK(dist.feature_expectation(spec.feature_index(1, 2)) < 1e-6);
  }
  SUBCASE("matches the oracle, both single and batch") {
    const MachineSpec spec(5, 3);
    const WeightMatrix w = random_weights(8, 2.0, 37);
    const ExactDistribution dist(spec, w);
    const auto batch = dist.feature_expectations();
    for (int i = 0; i < spec.feature_count(); ++i) {
      const double expected =
          static_cast<double>(oracle::feature_expectation(spec, w, i));
      CHECK(dist.feature_expectation(i) == doctest::Approx(expected).epsilon(1e-12));
      CHECK(batch[static_cast<size_t>(i)] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("index out of range") {
    const MachineSpec spec(3, 0);
    const ExactDistribution dist(spec, WeightMatrix(3));
    CHECK_THROWS_AS(dist.feature_expectation(3), ShapeError);
    CHECK_THROWS_AS(dist.feature_expectation(-1), ShapeError);
  }
}

TEST_CASE("sampling the observed marginal") {
  SUBCASE("uniform model: per-bit means near one half") {
    const MachineSpec spec(4, 2);
    const ExactDistribution dist(spec, WeightMatrix(6));
    const Dataset sample = dist.sample_observed(100000, 12345);
    for (int k = 0; k < 4; ++k) {
      CHECK(sample.component_mean(k) > 0.49);
      CHECK(sample.component_mean(k) < 0.51);
    }
  }
  SUBCASE("single draw has positive probability") {
    const MachineSpec spec(5, 3);
    const WeightMatrix w = random_weights(8, 2.0, 41);
    const ExactDistribution dist(spec, w);
    const Dataset sample = dist.sample_observed(1, 7);
    CHECK(sample.size() == 1);
    CHECK(dist.observed_marginal(sample.row(0)) > 0.0);
  }
  SUBCASE("pair frequencies within 3 sigma of the exact marginal") {
    const MachineSpec spec(5, 3);
    const WeightMatrix w = random_weights(8, 2.0, 43);
    const ExactDistribution dist(spec, w);
    const std::size_t n = 100000;
    const Dataset sample = dist.sample_observed(n, 99);
    for (int a = 0; a < 5; ++a) {
      for (int b = a + 1; b < 5; ++b) {
        long double exact = 0.0L;
        for (std::uint32_t y = 0; y < 32; ++y) {
          if (((y >> a) & 1u) && ((y >> b) & 1u)) {
            exact += oracle::observed_marginal(spec, w, y);
          }
        }
        double freq = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          const std::uint32_t r = sample.row(t);
          if (((r >> a) & 1u) && ((r >> b) & 1u)) freq += 1.0;
        }
        freq /= static_cast<double>(n);
        const double p = static_cast<double>(exact);
        const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
        CHECK(std::abs(freq - p) <= 3.0 * sigma + 1e-12);
      }
    }
  }
  SUBCASE("identical seeds give bit-identical datasets") {
    const MachineSpec spec(5, 3);
    const WeightMatrix w = random_weights(8, 2.0, 47);
    const ExactDistribution dist(spec, w);
    const Dataset a = dist.sample_observed(1000, 2024);
    const Dataset b = dist.sample_observed(1000, 2024);
    CHECK(a.rows() == b.rows());
  }
}

TEST_CASE("hidden relabeling leaves observables unchanged") {
  const MachineSpec spec(4, 3);
  const WeightMatrix w = random_weights(7, 2.0, 53);
  const WeightMatrix permuted =
      testutil::permute_hidden(spec, w, {2, 0, 1});
  const ExactDistribution dist(spec, w);
  const ExactDistribution dist_p(spec, permuted);
  const Dataset data = testutil::random_dataset(4, 30, 17);
  CHECK(dist.entropy() == doctest::Approx(dist_p.entropy()).epsilon(1e-12));
  CHECK(dist.log_likelihood(data) ==
        doctest::Approx(dist_p.log_likelihood(data)).epsilon(1e-12));
  for (std::uint32_t y = 0; y < 16; ++y) {
    CHECK(dist.observed_marginal(y) ==
          doctest::Approx(dist_p.observed_marginal(y)).epsilon(1e-12));
  }
}

TEST_CASE("dataset invariants") {
  SUBCASE("uniform weights sum to one") {
    const Dataset data = testutil::random_dataset(6, 1000, 1);
    double sum = 0.0;
    for (std::size_t t = 0; t < data.size(); ++t) sum += data.weight(t);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("explicit weights are validated") {
    CHECK_THROWS_AS(Dataset(2, {0b01u, 0b10u}, {0.6, 0.6}), ShapeError);
    CHECK_THROWS_AS(Dataset(2, {0b01u, 0b10u}, {-0.2, 1.2}), ShapeError);
    CHECK_NOTHROW(Dataset(2, {0b01u, 0b10u}, {0.25, 0.75}));
  }
  SUBCASE("rows must fit the width") {
    CHECK_THROWS_AS(Dataset(2, {0b100u}), ShapeError);
    CHECK_THROWS_AS(Dataset::from_rows(2, {{0, 1, 1}}), ShapeError);
    CHECK_THROWS_AS(Dataset::from_rows(2, {{0, 2}}), ShapeError);
  }
  SUBCASE("empirical grouping accumulates weights") {
    const Dataset data(2, {0b01u, 0b01u, 0b11u, 0b01u});
    REQUIRE(data.empirical().size() == 2);
    CHECK(data.empirical()[0].first == 0b01u);
    CHECK(data.empirical()[0].second == doctest::Approx(0.75));
    CHECK(data.empirical()[1].second == doctest::Approx(0.25));
  }
}

TEST_CASE("weight matrix shape rules") {
  WeightMatrix w(4);
  CHECK_THROWS_AS(w.set_entry(1, 1, 0.5), ShapeError);
  CHECK_THROWS_AS(w.set_entry(0, 4, 0.5), ShapeError);
  CHECK_THROWS_AS(w.set_entry(0, 1, std::nan("")), ShapeError);
  w.set_entry(2, 0, 1.5);
  CHECK(w.entry(0, 2) == 1.5);
  CHECK(w.entry(2, 0) == 1.5);
  CHECK(w.entry(3, 3) == 0.0);
  WeightMatrix big(3);
  big.set_entry(0, 1, 31.0);
  CHECK_THROWS_AS(validate_weights(big), ShapeError);
}

TEST_CASE("feature catalog covers the strict upper triangle in order") {
  const MachineSpec spec(3, 2);
  REQUIRE(spec.feature_count() == 10);
  CHECK(spec.feature_pair(0) == std::pair<int, int>{0, 1});
  CHECK(spec.feature_pair(4) == std::pair<int, int>{1, 2});
  CHECK(spec.feature_pair(9) == std::pair<int, int>{3, 4});
  CHECK(spec.feature_index(4, 3) == 9);
  CHECK(spec.feature_kind(0) == FeatureKind::VisibleVisible);
  CHECK(spec.feature_kind(2) == FeatureKind::VisibleHidden);
  CHECK(spec.feature_kind(9) == FeatureKind::HiddenHidden);
  int seen = 0;
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b) {
      CHECK(spec.feature_pair(spec.feature_index(a, b)) ==
            std::pair<int, int>{a, b});
      ++seen;
    }
  }
  CHECK(seen == spec.feature_count());
}
