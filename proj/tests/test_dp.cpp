#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tap/dp.hpp"
#include "tap/errors.hpp"

using namespace tap;
using namespace tap::dp;

TEST_CASE("uniform density gives the flat pmf") {
  NoiseDistribution dist = make_bounded_noise(2, uniform_density(2));
  REQUIRE(dist.pmf.size() == 5);
  for (int64_t z = -2; z <= 2; ++z) CHECK(dist.prob(z) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(dist.prob(3) == 0.0);
  // Normalization identity: 1/5 + 2 * (2/5) = 1.
  CHECK(dist.g[2] + 2 * dist.G(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("b = 0 forces the zero noise distribution") {
  NoiseDistribution dist = make_bounded_noise(0, {1.0});
  CHECK(dist.prob(0) == doctest::Approx(1.0));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) CHECK(dist.sample(rng) == 0);
}

TEST_CASE("bad densities are rejected") {
  CHECK_THROWS_AS(make_bounded_noise(2, {0.1, 0.1, 0.1}), Error);
  CHECK_THROWS_AS(make_bounded_noise(2, {0.5, -0.1, 0.6}), Error);
  CHECK_THROWS_AS(make_bounded_noise(2, {1.0}), Error);  // wrong atom count
}

TEST_CASE("symmetry of constructed distributions") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    int64_t b = 1 + static_cast<int64_t>(rng() % 6);
    NoiseDistribution dist = rng() % 2 == 0
                                 ? make_bounded_noise(b, uniform_density(b))
                                 : make_bounded_noise(b, geometric_density(b, 0.3 + 0.05 * (rng() % 10)));
    double total = 0;
    for (int64_t z = -b; z <= b; ++z) {
      CHECK(dist.prob(z) == doctest::Approx(dist.prob(-z)).epsilon(1e-12));
      total += dist.prob(z);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("sensitivity of count and bounded sums") {
  CHECK(sensitivity(QueryKind::count, std::nullopt) == 1);
  CHECK(sensitivity(QueryKind::sum, 40) == 40);
  CHECK_THROWS_AS(sensitivity(QueryKind::sum, std::nullopt), Error);
}

TEST_CASE("uniform b=2 sensitivity 1 gives epsilon 0, delta 1/5") {
  NoiseDistribution dist = make_bounded_noise(2, uniform_density(2));
  DpParameters params = epsilon_delta(dist, 1, 1, 0);
  CHECK(params.epsilon == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(params.delta == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(dp_oracle_check(dist, 1, params.epsilon, params.delta));
  // Delta is tight here: halving it breaks the inequality.
  CHECK_FALSE(dp_oracle_check(dist, 1, params.epsilon, params.delta / 2));
  // Vacuous parameters always pass.
  CHECK(dp_oracle_check(dist, 1, 50.0, 1.0));
}

TEST_CASE("identical datasets need no privacy slack") {
  NoiseDistribution dist = make_bounded_noise(3, geometric_density(3, 0.5));
  DpParameters params = epsilon_delta(dist, 0, 5, 5);
  CHECK(params.epsilon == doctest::Approx(0.0));
  CHECK(params.delta == doctest::Approx(0.0));
  CHECK(dp_oracle_check(dist, 0, params.epsilon, params.delta));
}

TEST_CASE("bound below sensitivity is rejected") {
  NoiseDistribution dist = make_bounded_noise(2, uniform_density(2));
  CHECK_THROWS_AS(epsilon_delta(dist, 3, 2, 0), Error);
}

TEST_CASE("geometric b=4 sensitivity 1 matches the oracle") {
  NoiseDistribution dist = make_bounded_noise(4, geometric_density(4, 0.5));
  DpParameters params = epsilon_delta(dist, 1, 7, 6);
  CHECK(dp_oracle_check(dist, 1, params.epsilon, params.delta));
  // epsilon is log(1/rho) for the geometric interior.
  CHECK(params.epsilon == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(params.delta == doctest::Approx(dist.G(0)).epsilon(1e-12));
}

TEST_CASE("theorem output passes the oracle over randomized shapes") {
  // Noise mass must peak at zero (g non-decreasing); only then does the
  // worst-case likelihood ratio sit at the full sensitivity gap.
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    int64_t b = 1 + static_cast<int64_t>(rng() % 7);
    uint64_t sens = 1 + rng() % static_cast<uint64_t>(b);
    std::vector<double> g(b + 1);
    double floor = 0.01;
    for (auto& x : g) x = floor + std::generate_canonical<double, 32>(rng);
    std::sort(g.begin(), g.end());
    // Normalize so the pmf mass g(b) + 2 G(b-1) is exactly 1.
    double total = g[b];
    for (int64_t x = 0; x < b; ++x) total += 2 * g[x];
    for (auto& x : g) x /= total;
    NoiseDistribution dist = make_bounded_noise(b, g);
    DpParameters params = epsilon_delta(dist, sens, static_cast<int64_t>(sens), 0);
    CHECK(dp_oracle_check(dist, sens, params.epsilon, params.delta));
  }
}

TEST_CASE("delta shrinks as the bound grows for a fixed shape") {
  double prev = 1.0;
  for (int64_t b = 2; b <= 9; ++b) {
    NoiseDistribution dist = make_bounded_noise(b, geometric_density(b, 0.5));
    double delta = dist.G(1);  // sensitivity 2
    CHECK(delta <= prev + 1e-12);
    prev = delta;
  }
}

TEST_CASE("sampler matches the analytic pmf") {
  NoiseDistribution dist = make_bounded_noise(3, geometric_density(3, 0.6));
  std::mt19937_64 rng(13);
  const int kSamples = 1000000;
  std::vector<int> counts(7, 0);
  for (int i = 0; i < kSamples; ++i) counts[dist.sample(rng) + 3]++;
  for (int64_t z = -3; z <= 3; ++z) {
    double p = dist.prob(z);
    double se = std::sqrt(p * (1 - p) / kSamples);
    double observed = static_cast<double>(counts[z + 3]) / kSamples;
    CHECK(std::abs(observed - p) <= 3 * se + 1e-9);
  }
}

TEST_CASE("laplace baseline epsilon and empirical scale") {
  LaplaceBaseline unit = laplace_baseline(5, 5.0);
  CHECK(unit.epsilon_prime == doctest::Approx(1.0));
  CHECK(laplace_baseline(5, 10.0).epsilon_prime == doctest::Approx(0.5));

  std::mt19937_64 rng(17);
  LaplaceBaseline lap = laplace_baseline(1, 2.5);
  const int kSamples = 1000000;
  double abs_sum = 0;
  for (int i = 0; i < kSamples; ++i) abs_sum += std::abs(lap.sample(rng));
  double mean_abs = abs_sum / kSamples;
  CHECK(std::abs(mean_abs - lap.scale) / lap.scale < 0.02);
}

TEST_CASE("noise bound proofs over the worked total") {
  Scalar r = Scalar::random();
  Commitment c_true = commit_u64(182, r);

  RangeProof p = prove_noise_bound(184, 182, r, 5);
  CHECK(verify_noise_bound(184, c_true, 5, p));
  CHECK_FALSE(verify_noise_bound(185, c_true, 5, p));

  // Zero noise with b = 0 degenerates to an equality proof.
  RangeProof zero = prove_noise_bound(182, 182, r, 0);
  CHECK(verify_noise_bound(182, c_true, 0, zero));

  CHECK_THROWS_AS(prove_noise_bound(190, 182, r, 5), Error);
}

TEST_CASE("distribution serialization round-trip") {
  NoiseDistribution dist = make_bounded_noise(2, uniform_density(2));
  std::string text = serialize_distribution(dist);
  NoiseDistribution back = parse_distribution(text);
  CHECK(back.b == 2);
  for (int64_t z = -2; z <= 2; ++z) {
    CHECK(back.prob(z) == doctest::Approx(dist.prob(z)).epsilon(1e-15));
  }
}
