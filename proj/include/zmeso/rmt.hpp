#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "zmeso/meso_stats.hpp"
#include "zmeso/testfn.hpp"

namespace zmeso {

// Eigenangles theta in [-1/2, 1/2) (eigenvalues e(theta)) of Haar unitaries,
// each batch sorted ascending.
struct EnsembleSample {
  int matrix_size = 0;
  std::uint64_t seed = 0;
  std::vector<double> angles;  // batches * matrix_size

  std::size_t batches() const {
    return matrix_size > 0 ? angles.size() / static_cast<std::size_t>(matrix_size) : 0;
  }
  std::span<const double> batch(std::size_t b) const {
    const auto n = static_cast<std::size_t>(matrix_size);
    return std::span<const double>(angles).subspan(b * n, n);
  }
};

// Dense: Gaussian matrix, QR with the phases of diag(R) divided out, dense
// eigenvalues. Verblunsky: Haar-distributed Verblunsky coefficients and the
// eigenvalues as roots of the associated phase function. Auto picks Dense
// for n <= 64.
enum class SamplerRoute { Auto, Dense, Verblunsky };

// Batch b draws from RNG stream b of `seed`. When `cache_dir` (or
// $ZMESO_CACHE_DIR) is set, samples are cached there.
EnsembleSample sample_haar(int n, std::size_t batches, std::uint64_t seed, SamplerRoute route = SamplerRoute::Auto,
                           const std::filesystem::path& cache_dir = {});

// Eigenangles of one Haar unitary.
std::vector<double> haar_angles_dense(int n, std::mt19937_64& g);
std::vector<double> haar_angles_verblunsky(int n, std::mt19937_64& g);

// "ZRM1", u32 n, u64 batch count, f64 angles; little-endian.
void write_ensemble_cache(const std::filesystem::path& path, const EnsembleSample& s);
EnsembleSample read_ensemble_cache(const std::filesystem::path& path);

// Tr(g^j) = sum_i e(j theta_i).
std::complex<double> trace_power(std::span<const double> angles, int j);
// Tr(g^j) for j = 1 .. j_max at once.
std::vector<std::complex<double>> trace_powers(std::span<const double> angles, int j_max);

struct TraceMoments {
  int j = 0;
  std::complex<double> mean = 0.0;
  double mean_stderr = 0.0;  // sqrt(E|X - mean|^2 / batches)
  double mean_abs2 = 0.0;    // E |Tr(g^j)|^2
  double abs2_stderr = 0.0;
  std::vector<std::complex<double>> per_batch;
};
TraceMoments trace_power(const EnsembleSample& sample, int j);

struct ComplexEstimate {
  std::complex<double> value = 0.0;
  double stderr_ = 0.0;
};
// E prod_j Tr(g^j)^{a_j} conj(Tr(g^j))^{b_j}; a[j-1], b[j-1] are the exponents of j.
ComplexEstimate mixed_moment(const EnsembleSample& sample, std::span<const int> a, std::span<const int> b);
// delta_ab prod_j j^{a_j} a_j!, exact when sum j a_j and sum j b_j are at most n.
double haar_moment_prediction(std::span<const int> a, std::span<const int> b);

struct CountingResult {
  double mean = 0.0;
  double mean_stderr = 0.0;
  double variance = 0.0;
  double variance_stderr = 0.0;
  std::vector<double> counts;
};
// Number of scaled points n theta in [0, L) per batch.
CountingResult scaled_counting_clt(const EnsembleSample& sample, double L);
CountingResult scaled_counting_clt(int n, double L, std::size_t batches, std::uint64_t seed);

// sum_i sum_k eta((n theta_i + n k - centre) / L): the test function
// periodized with period n on the scaled points n theta_i.
double rmt_linear_statistic(std::span<const double> angles, int n, const TestFunction& eta, double L,
                            double centre = 0.0);
// The same statistic minus its Haar mean L integral eta, through the trace
// expansion sum_{j != 0} (L/n) eta^(L j / n) Tr(g^j); needs a compact transform.
double rmt_centered_statistic_trace(std::span<const double> angles, int n, const TestFunction& eta, double L);

// Moments of Delta_eta over the ensemble; rows carry the empirical central
// moments in rmt_prediction. Direct route for compactly supported eta (needs
// L * support_radius <= n/2), trace route otherwise.
MomentReport smoothed_statistic_clt(const EnsembleSample& sample, const TestFunction& eta, double L, int k_max = 4);
MomentReport smoothed_statistic_clt(int n, const TestFunction& eta, double L, std::size_t batches,
                                    std::uint64_t seed, int k_max = 4);

struct PairingCheck {
  double value = 0.0;
  double stderr_ = 0.0;
  double prediction = 0.0;  // S_[k]
};
// E prod (Delta_l - E Delta_l) on the scaled process n theta (L = 1).
PairingCheck pairing_moment_check(std::span<const TestFunction> etas, const EnsembleSample& sample);
PairingCheck pairing_moment_check(std::span<const TestFunction> etas, int n, std::size_t batches,
                                  std::uint64_t seed);

struct OscillatoryEntry {
  std::vector<double> alphas;
  std::complex<double> value = 0.0;
  double stderr_ = 0.0;
  std::complex<double> prediction = 0.0;  // S_[k] of the modulated transforms
};
// Centered product moments of D_alpha = sum_i r(n theta_i / n_meso) e(alpha n theta_i).
std::vector<OscillatoryEntry> oscillatory_rmt_statistic(const TestFunction& r,
                                                        std::span<const std::vector<double>> tuples,
                                                        double n_meso, const EnsembleSample& sample);

// Transform of xi -> r(xi / m) e(alpha xi): x -> m r^(m (x - alpha)).
SpectralEvaluator modulated_transform(const TestFunction& r, double m, double alpha);

}  // namespace zmeso
