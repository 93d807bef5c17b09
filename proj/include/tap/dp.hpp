#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tap/crypto.hpp"

namespace tap::dp {

// Discrete bounded noise on {-b,..,b}. The density g on [0,b] defines the
// CDF; the mass at z is g(b - |z|), so the distribution is symmetric and the
// lower tail P(Z <= d - b) equals the prefix sum G(d).
struct NoiseDistribution {
  int64_t b = 0;
  std::vector<double> g;    // density on [0, b]
  std::vector<double> pmf;  // index z + b

  double G(int64_t z) const;        // inclusive prefix sum of g, G(-1) = 0
  double prob(int64_t z) const;     // P(Z = z)
  double cdf(int64_t z) const;      // P(Z <= z), per the two-branch form
  int64_t sample(std::mt19937_64& rng) const;
};

// Built-in densities.
std::vector<double> uniform_density(int64_t b);
// Discrete-Laplace shape: mass at z proportional to rho^|z|.
std::vector<double> geometric_density(int64_t b, double rho);

// Validates g >= 0 and total pmf mass 1 within 1e-12, then derives the pmf
// from CDF differences. Throws normalization-violation.
NoiseDistribution make_bounded_noise(int64_t b, std::vector<double> g);

enum class QueryKind : uint8_t { sum = 0, count = 1 };

// Removal-neighbor sensitivity; sum queries require the per-value bound.
uint64_t sensitivity(QueryKind kind, std::optional<uint64_t> gamma);

struct DpParameters {
  double epsilon = 0;
  double delta = 0;
};

// Exact privacy parameters of the bounded mechanism: for b >= sensitivity,
// epsilon is the max log-ratio over the overlap region
// [max(R,R')-b, min(R,R')+b] and delta is the tail mass G(sensitivity - 1).
DpParameters epsilon_delta(const NoiseDistribution& dist, uint64_t sensitivity, int64_t result_d,
                           int64_t result_d_prime);

// Independent check of the differential-privacy inequality over every
// neighbor placement with |R*(D) - R*(D')| <= sensitivity: the tight excess
// mass sum_a max(P(R(D)=a) - e^eps P(R(D')=a), 0) must be <= delta + 1e-12.
bool dp_oracle_check(const NoiseDistribution& dist, uint64_t sensitivity, double epsilon,
                     double delta);

// Unbounded Laplace baseline; transparency-breaking (results can be
// arbitrarily distorted), kept for comparison.
struct LaplaceBaseline {
  double scale = 0;
  double epsilon_prime = 0;

  double sample(std::mt19937_64& rng) const;
};

LaplaceBaseline laplace_baseline(uint64_t sensitivity, double scale);

// Proof that |noisy - true| <= b over the homomorphic commitment of the true
// result: (noisy - true + b) in [0, 2b].
RangeProof prove_noise_bound(int64_t noisy_result, uint64_t true_result, const Scalar& true_seed,
                             int64_t bound);
bool verify_noise_bound(int64_t noisy_result, const Commitment& true_commitment, int64_t bound,
                        const RangeProof& proof);

// Serialization: "(b, pmf list of decimal rationals)".
std::string serialize_distribution(const NoiseDistribution& dist);
NoiseDistribution parse_distribution(const std::string& text);

}  // namespace tap::dp
