#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace zmeso {

// Adaptive Gauss-Kronrod over [a,b], split at the given interior breakpoints.
// The tolerance is relative to the L1 norm of the integrand over [a,b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, std::span<const double> breaks = {});

// Uniform panels of width at most `panel` (for oscillatory integrands).
double integrate_panels(const std::function<double(double)>& f, double a, double b, double panel,
                        double rel_tol = 1e-10);

// Independent generator for stream `stream` of a run seeded with `seed`.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x);

// Leave-one-block-out jackknife over contiguous blocks. `stat` maps the list
// of kept sample indices to an estimate; the estimate reported is the
// full-sample value.
struct JackknifeResult {
  double estimate = 0.0;
  double stderr_ = 0.0;
};
JackknifeResult jackknife(std::size_t n_samples, std::size_t blocks,
                          const std::function<double(std::span<const std::size_t>)>& stat);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};
// Weighted least squares y ~ a + b x with per-point standard errors (unit if empty).
LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> sigma = {});

// Runs body(i) for i in [0, n) on a fixed worker pool. Work is assigned in
// contiguous chunks; results must be written per index for determinism.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);
unsigned worker_count();

}  // namespace zmeso
