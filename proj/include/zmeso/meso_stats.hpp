#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "zmeso/arithmetic.hpp"
#include "zmeso/testfn.hpp"
#include "zmeso/zero_corpus.hpp"

namespace zmeso {

// Law of the window centre t = u T.
struct AveragingWeight {
  enum class Kind { UniformOnT2T, SmoothCompactSpectrum };
  Kind kind = Kind::UniformOnT2T;

  // Density of u. SmoothCompactSpectrum is proportional to
  // sinc^4(16 (u - 3/2)) on [1, 2] (the squared-Fejer shape, whose
  // transform is supported in [-32, 32] before truncation).
  double density(double u) const;
  double sample(std::mt19937_64& g) const;
  std::string name() const;
};

struct WindowConfig {
  double T = 2e4;
  double n_of_T = 16.0;
  AveragingWeight weight;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;

  // log T / (2 pi n(T)).
  double scale() const;
  // Throws ConfigError on bad fields, OutOfTabulatedRange when windows
  // around [T, 2T] with dilated half-width `reach` leave the table.
  void validate(const ZeroCorpus& corpus, double reach) const;
};

// Region of u = scale (xi - t) the statistics see: the support of eta, or
// |u| <= 100 / delta for Fejer.
std::pair<double, double> statistic_range(const TestFunction& eta);

// Precomputed evaluator of the window statistics for one eta and config.
class WindowStatistic {
 public:
  WindowStatistic(const ZeroCorpus& corpus, const TestFunction& eta, const WindowConfig& cfg);

  // sum_gamma eta(scale (gamma - t)).
  double count(double t) const;
  // integral eta(scale (xi - t)) Omega(xi) / 2 pi dxi.
  double density(double t) const;
  double ds(double t) const { return count(t) - density(t); }

 private:
  const ZeroCorpus* corpus_;
  TestFunction eta_;
  double scale_;
  double lo_, hi_;
  std::vector<double> cheb_moments_;
};

double linear_statistic(const ZeroCorpus& corpus, const TestFunction& eta, double t, const WindowConfig& cfg);
double ds_integral(const ZeroCorpus& corpus, const TestFunction& eta, double t, const WindowConfig& cfg);

struct MomentRow {
  int k = 0;
  double empirical_raw = 0.0;               // mean of X^k
  double empirical_central = 0.0;           // mean of (X - mean)^k
  double central_stderr = 0.0;
  double empirical_centered_normalized = 0.0;
  double mc_stderr = 0.0;                   // of the normalized moment
  double gaussian_prediction = 0.0;         // (k-1)!! for even k, 0 for odd k
  // Predicted central moments; NaN until a caller fills them in.
  double arithmetic_prediction;
  double rmt_prediction;
};

struct MomentReport {
  std::vector<MomentRow> rows;  // k = 1 .. k_max
  double mean = 0.0;
  double mean_stderr = 0.0;
  double variance = 0.0;
  double variance_stderr = 0.0;
  std::vector<double> values;   // the sampled statistic
};

double gaussian_moment(int k);

// Moments of i.i.d. samples with 100-block jackknife errors.
MomentReport moments_from_samples(std::vector<double> values, int k_max);

enum class StatKind { Ds, Count };

// The statistic at cfg.samples centres drawn from cfg.weight; centre i uses
// RNG stream i of cfg.seed.
std::vector<double> sample_statistic(const ZeroCorpus& corpus, const TestFunction& eta, const WindowConfig& cfg,
                                     StatKind kind = StatKind::Ds);
std::vector<double> sample_centres(const WindowConfig& cfg);

MomentReport sample_moments(const ZeroCorpus& corpus, const TestFunction& eta, const WindowConfig& cfg, int k_max,
                            StatKind kind = StatKind::Ds);

// S(t) + (1/pi) sum_{p <= T^(1/k)} sin(t log p) / sqrt(p).
double selberg_residual(const ZeroCorpus& corpus, double t, int k, double T, const SieveTable& sieve);

struct SelbergDiagnostic {
  double mean_residual_sq = 0.0;
  double mean_s_sq = 0.0;
  double residual_moment_2k = 0.0;
};
SelbergDiagnostic selberg_diagnostic(const ZeroCorpus& corpus, const WindowConfig& cfg, int k,
                                     const SieveTable& sieve);

// For each alpha: sum over xi = (log T / 2 pi)(gamma - t) of r(xi / n) e(alpha xi).
std::vector<std::complex<double>> oscillatory_statistic(const ZeroCorpus& corpus, const TestFunction& r,
                                                        std::span<const double> alphas, const WindowConfig& cfg,
                                                        double t);

struct CovarianceEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};
// E |D_alpha - E D_alpha|^2 over the weight, the (alpha, -alpha) covariance.
CovarianceEstimate oscillatory_covariance(const ZeroCorpus& corpus, const TestFunction& r, double alpha,
                                          const WindowConfig& cfg);
// The sine-kernel value for the same statistic: integral |x| n^2 |r^(n(x - alpha))|^2 dx.
double oscillatory_prediction(const TestFunction& r, double alpha, double n_of_T);

struct ExplicitFormula {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};
// Gaussian g(x) = exp(-(x/a)^2), 0 <= a <= 2 (a = 0 is g = 0).
ExplicitFormula verify_explicit_formula(const ZeroCorpus& corpus, const SieveTable& sieve, double a,
                                        double zero_cutoff, std::uint64_t prime_cutoff);

// integral M_k eta(scale (xi - t)) log(|xi| + 2) dxi, with M_k the width-k
// maximal envelope.
double majorant_statistic(const StepFunction& envelope, double t, double scale);

struct MajorantCheck {
  double count_moment = 0.0;     // mean |count|^k
  double majorant_moment = 0.0;  // mean M(t)^k
};
MajorantCheck majorant_check(const ZeroCorpus& corpus, const TestFunction& eta, const WindowConfig& cfg, int k);

}  // namespace zmeso
