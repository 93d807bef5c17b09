#include "tap/dp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "tap/errors.hpp"

namespace tap::dp {

double NoiseDistribution::G(int64_t z) const {
  if (z < 0) return 0.0;
  double acc = 0;
  for (int64_t x = 0; x <= z && x <= b; ++x) acc += g[x];
  return acc;
}

double NoiseDistribution::prob(int64_t z) const {
  if (z < -b || z > b) return 0.0;
  return pmf[z + b];
}

double NoiseDistribution::cdf(int64_t z) const {
  if (z < -b) return 0.0;
  if (z >= b) return 1.0;
  if (z <= 0) return G(z + b);
  return 1.0 - G(b - z - 1);
}

int64_t NoiseDistribution::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  double acc = 0;
  for (int64_t z = -b; z <= b; ++z) {
    acc += prob(z);
    if (u <= acc) return z;
  }
  return b;
}

std::vector<double> uniform_density(int64_t b) {
  return std::vector<double>(b + 1, 1.0 / static_cast<double>(2 * b + 1));
}

std::vector<double> geometric_density(int64_t b, double rho) {
  if (rho <= 0.0 || rho >= 1.0) throw Error(ErrorCode::malformed, "rho must be in (0,1)");
  // Noise mass at z is alpha * rho^|z|, so g(x) = alpha * rho^(b-x).
  double total = 1.0;
  double p = 1.0;
  for (int64_t z = 1; z <= b; ++z) {
    p *= rho;
    total += 2.0 * p;
  }
  double alpha = 1.0 / total;
  std::vector<double> g(b + 1);
  for (int64_t x = 0; x <= b; ++x) g[x] = alpha * std::pow(rho, static_cast<double>(b - x));
  return g;
}

NoiseDistribution make_bounded_noise(int64_t b, std::vector<double> g) {
  if (b < 0) throw Error(ErrorCode::malformed, "bound must be nonnegative");
  if (g.size() != static_cast<size_t>(b + 1)) {
    throw Error(ErrorCode::normalization_violation, "density must have b+1 atoms");
  }
  for (double x : g) {
    if (!(x >= 0.0)) throw Error(ErrorCode::normalization_violation, "density must be nonnegative");
  }
  NoiseDistribution dist;
  dist.b = b;
  dist.g = std::move(g);
  // Total mass of the two-branch CDF: g(b) + 2 G(b-1). (The uniform and b=0
  // cases coincide with the g(0) + 2 G(b-1) spelling.)
  double total = dist.g[b] + 2.0 * dist.G(b - 1);
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::normalization_violation,
                "g(b) + 2G(b-1) = " + std::to_string(total));
  }
  dist.pmf.assign(2 * b + 1, 0.0);
  for (int64_t z = -b; z <= b; ++z) {
    double lo = z == -b ? 0.0 : dist.cdf(z - 1);
    dist.pmf[z + b] = dist.cdf(z) - lo;
  }
  return dist;
}

uint64_t sensitivity(QueryKind kind, std::optional<uint64_t> gamma) {
  switch (kind) {
    case QueryKind::count:
      return 1;
    case QueryKind::sum:
      if (!gamma) {
        throw Error(ErrorCode::unbounded_sensitivity, "sum sensitivity needs a value bound");
      }
      return *gamma;
  }
  throw Error(ErrorCode::malformed, "unknown query kind");
}

DpParameters epsilon_delta(const NoiseDistribution& dist, uint64_t sensitivity, int64_t result_d,
                           int64_t result_d_prime) {
  if (static_cast<uint64_t>(dist.b) < sensitivity) {
    throw Error(ErrorCode::bound_too_small, "b < sensitivity");
  }
  uint64_t gap = result_d >= result_d_prime ? static_cast<uint64_t>(result_d - result_d_prime)
                                            : static_cast<uint64_t>(result_d_prime - result_d);
  if (gap > sensitivity) {
    throw Error(ErrorCode::malformed, "|R*(D) - R*(D')| exceeds the sensitivity");
  }
  DpParameters out;
  out.delta = dist.G(static_cast<int64_t>(sensitivity) - 1);

  int64_t hi = std::max(result_d, result_d_prime);
  int64_t lo = std::min(result_d, result_d_prime);
  double max_ratio = 1.0;
  for (int64_t a = hi - dist.b; a <= lo + dist.b; ++a) {
    double p_hi = dist.prob(a - hi);
    double p_lo = dist.prob(a - lo);
    if (p_hi == 0.0 && p_lo == 0.0) continue;
    if (p_hi == 0.0 || p_lo == 0.0) {
      out.epsilon = std::numeric_limits<double>::infinity();
      return out;
    }
    max_ratio = std::max({max_ratio, p_hi / p_lo, p_lo / p_hi});
  }
  out.epsilon = std::log(max_ratio);
  return out;
}

bool dp_oracle_check(const NoiseDistribution& dist, uint64_t sensitivity, double epsilon,
                     double delta) {
  double e_eps = std::exp(epsilon);
  int64_t s = static_cast<int64_t>(sensitivity);
  for (int64_t k = -s; k <= s; ++k) {
    // R*(D) = k, R*(D') = 0; the mechanism is shift-invariant.
    double excess = 0;
    for (int64_t a = std::min<int64_t>(k, 0) - dist.b; a <= std::max<int64_t>(k, 0) + dist.b;
         ++a) {
      double p_d = dist.prob(a - k);
      double p_dp = dist.prob(a);
      // Avoid inf * 0 when epsilon is infinite.
      excess += p_dp == 0.0 ? p_d : std::max(0.0, p_d - e_eps * p_dp);
    }
    if (excess > delta + 1e-12) return false;
  }
  return true;
}

double LaplaceBaseline::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  double u = unit(rng);
  return -scale * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
}

LaplaceBaseline laplace_baseline(uint64_t sensitivity, double scale) {
  if (scale <= 0) throw Error(ErrorCode::malformed, "scale must be positive");
  LaplaceBaseline out;
  out.scale = scale;
  out.epsilon_prime = static_cast<double>(sensitivity) / scale;
  return out;
}

RangeProof prove_noise_bound(int64_t noisy_result, uint64_t true_result, const Scalar& true_seed,
                             int64_t bound) {
  if (bound < 0) throw Error(ErrorCode::malformed, "negative bound");
  int64_t diff = noisy_result - static_cast<int64_t>(true_result);
  if (diff < -bound || diff > bound) {
    throw Error(ErrorCode::noise_exceeds_bound, "noise outside [-b, b]");
  }
  // Statement: (noisy + b - true) in [0, 2b] over C(noisy + b, 0) - C(true, r).
  uint64_t shifted = static_cast<uint64_t>(diff + bound);
  return prove_range(shifted, true_seed.negated(), 0, static_cast<uint64_t>(2 * bound) + 1);
}

bool verify_noise_bound(int64_t noisy_result, const Commitment& true_commitment, int64_t bound,
                        const RangeProof& proof) {
  if (bound < 0) return false;
  try {
    int64_t base = noisy_result + bound;
    if (base < 0) return false;
    Commitment shifted = sub_commitments(
        commit_u64(static_cast<uint64_t>(base), Scalar::zero()), true_commitment);
    return verify_range(shifted, 0, static_cast<uint64_t>(2 * bound) + 1, proof);
  } catch (const Error&) {
    return false;
  }
}

std::string serialize_distribution(const NoiseDistribution& dist) {
  std::ostringstream out;
  out << "(" << dist.b;
  out.precision(17);
  for (double p : dist.pmf) out << ", " << p;
  out << ")";
  return out.str();
}

NoiseDistribution parse_distribution(const std::string& text) {
  std::string body = text;
  if (body.size() < 2 || body.front() != '(' || body.back() != ')') {
    throw Error(ErrorCode::malformed, "distribution must be (b, p...)");
  }
  body = body.substr(1, body.size() - 2);
  std::istringstream in(body);
  std::string token;
  std::vector<double> values;
  int64_t b = 0;
  bool first = true;
  while (std::getline(in, token, ',')) {
    if (first) {
      b = std::stoll(token);
      first = false;
    } else {
      values.push_back(std::stod(token));
    }
  }
  if (first || values.size() != static_cast<size_t>(2 * b + 1)) {
    throw Error(ErrorCode::malformed, "distribution needs 2b+1 atoms");
  }
  NoiseDistribution dist;
  dist.b = b;
  dist.pmf = values;
  // Recover g from the negative branch, g(x) = P(Z = x - b).
  dist.g.assign(b + 1, 0.0);
  for (int64_t x = 0; x <= b; ++x) dist.g[x] = values[x];
  return dist;
}

}  // namespace tap::dp
