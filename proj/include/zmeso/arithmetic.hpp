#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "zmeso/testfn.hpp"

namespace zmeso {

// Von Mangoldt data up to `limit`, stored sparsely as the ascending list of
// prime powers with their base primes.
class SieveTable {
 public:
  std::uint64_t limit() const { return limit_; }
  std::span<const std::uint32_t> prime_powers() const { return powers_; }
  std::span<const std::uint32_t> bases() const { return bases_; }
  std::span<const std::uint32_t> primes() const { return primes_; }

  // Lambda(n) for 1 <= n <= limit.
  double lambda(std::uint64_t n) const;
  // psi(x) = sum_{n <= x} Lambda(n), x <= limit.
  double psi(double x) const;
  bool has_psi_prefix() const { return !psi_prefix_.empty(); }

 private:
  friend SieveTable build_sieve(std::uint64_t limit, bool with_psi, std::size_t memory_budget);
  std::uint64_t limit_ = 0;
  std::vector<std::uint32_t> powers_;
  std::vector<std::uint32_t> bases_;
  std::vector<std::uint32_t> primes_;
  std::vector<double> psi_prefix_;
};

constexpr std::size_t kDefaultSieveBudget = std::size_t{256} << 20;

// Segmented Eratosthenes. Throws ResourceExceeded when the table would not
// fit in `memory_budget` bytes or the limit exceeds 32-bit storage.
SieveTable build_sieve(std::uint64_t limit, bool with_psi = false,
                       std::size_t memory_budget = kDefaultSieveBudget);

struct PntSums {
  double lhs = 0.0;
  double rhs = 0.0;
};
// lhs = H^-2 sum_p (log^2 p / p) f(log p / H), rhs = integral_0^inf x f(x) dx.
PntSums pnt_weighted_sum(const TestFunction& f, double H, const SieveTable& sieve);

// (-1/H)^k times the sum over (n, eps) with n_1^eps_1 ... n_k^eps_k = 1 of
// prod Lambda(n_l)/sqrt(n_l) u_l(eps_l log n_l / H). All u_l need compact
// support; prime powers up to exp(H delta_l) are used. k <= 4.
std::complex<double> diagonal_moment_sum(std::span<const SpectralEvaluator> u, double H,
                                         const SieveTable& sieve);
// Same sum restricted to tuples with at least one proper prime power.
std::complex<double> diagonal_moment_sum_higher_powers(std::span<const SpectralEvaluator> u, double H,
                                                       const SieveTable& sieve);
// The sum at height T for statistics at scale log T / 2 pi: H = log T and
// u_l = transform of eta_l. Requires sum delta_l < 2.
double diagonal_moment_sum(std::span<const TestFunction> etas, double T, const SieveTable& sieve, int k);

// Perfect matchings of a set of `m` labels.
std::vector<std::vector<std::pair<int, int>>> perfect_matchings(std::span<const int> labels);
inline std::size_t pairing_count(std::size_t m) { return m % 2 ? 0 : (m == 0 ? 1 : (m - 1) * pairing_count(m - 2)); }

struct PairingPrediction {
  std::complex<double> value = 0.0;
  std::size_t pairings = 0;
};
// S_J = sum over perfect matchings of J of prod integral |x| u_i(x) u_j(-x) dx.
// R bounds the integrals for transforms without compact support.
PairingPrediction pairing_sum(std::span<const SpectralEvaluator> u, std::span<const int> J, double R = kInf);
double pairing_sum(std::span<const TestFunction> etas, std::span<const int> J, double R = kInf);

struct PredictedMoment {
  double value = 0.0;          // S_[k] of the rescaled transforms
  double diagonal = 0.0;       // exact prime-side sum at this T
  double envelope = 0.0;       // unit-constant error shape, relative to |value| (absolute when value = 0)
  double envelope_abs = 0.0;
  bool smoothed = false;       // transforms multiplied by K(x / n)
};

// Moment of prod_l integral eta_l((log T / 2 pi n)(xi - t)) dS(xi) predicted
// with H = log T / n. Transforms are used as is when compactly supported with
// sum delta_l < 2n; otherwise they are cut off by K(x/n) with rho = 1/(k+1).
PredictedMoment predicted_moment(std::span<const TestFunction> etas, double T, double n_of_T,
                                 const SieveTable& sieve);

// The transforms predicted_moment uses (u_l above).
std::vector<SpectralEvaluator> rescaled_transforms(std::span<const TestFunction> etas, double n_of_T,
                                                   bool* smoothed = nullptr);

}  // namespace zmeso
