#include "zmeso/meso_stats.hpp"

#include "zmeso/error.hpp"
#include "zmeso/numerics.hpp"
#include "zmeso/special.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace zmeso {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFejerReach = 100.0;  // |u| <= kFejerReach / delta
constexpr int kChebDegree = 32;
constexpr std::size_t kJackknifeBlocks = 100;

double smooth_weight_shape(double u) {
  const double s = sinc(16.0 * (u - 1.5));
  return s * s * s * s;
}

struct SmoothWeightTable {
  static constexpr int kGrid = 8192;
  std::array<double, kGrid + 1> cdf{};
  double mass = 0.0;

  SmoothWeightTable() {
    std::vector<double> breaks;
    for (int j = 1; j < 32; ++j) breaks.push_back(1.0 + j / 32.0);
    mass = integrate(smooth_weight_shape, 1.0, 2.0, 1e-13, breaks);
    cdf[0] = 0.0;
    for (int i = 1; i <= kGrid; ++i) {
      const double a = 1.0 + static_cast<double>(i - 1) / kGrid, b = 1.0 + static_cast<double>(i) / kGrid;
      // Cells are narrow against the oscillation: a fixed rule is exact to rounding.
      cdf[i] = cdf[i - 1] + boost::math::quadrature::gauss<double, 20>::integrate(smooth_weight_shape, a, b) / mass;
    }
    for (auto& c : cdf) c /= cdf[kGrid];
  }
};

const SmoothWeightTable& smooth_weight_table() {
  static const SmoothWeightTable table;
  return table;
}

}  // namespace

double AveragingWeight::density(double u) const {
  if (u < 1.0 || u > 2.0) return 0.0;
  if (kind == Kind::UniformOnT2T) return 1.0;
  return smooth_weight_shape(u) / smooth_weight_table().mass;
}

double AveragingWeight::sample(std::mt19937_64& g) const {
  const double v = uniform01(g);
  if (kind == Kind::UniformOnT2T) return 1.0 + v;
  const auto& t = smooth_weight_table();
  const auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), v);
  const auto i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - t.cdf.begin(), 1, SmoothWeightTable::kGrid));
  const double c0 = t.cdf[i - 1], c1 = t.cdf[i];
  const double frac = c1 > c0 ? (v - c0) / (c1 - c0) : 0.5;
  return 1.0 + (static_cast<double>(i - 1) + frac) / SmoothWeightTable::kGrid;
}

std::string AveragingWeight::name() const {
  return kind == Kind::UniformOnT2T ? "uniform" : "smooth";
}

double WindowConfig::scale() const { return std::log(T) / (2.0 * kPi * n_of_T); }

void WindowConfig::validate(const ZeroCorpus& corpus, double reach) const {
  if (!(T > 1.0) || !std::isfinite(T)) throw ConfigError("t", "must be a finite height above 1");
  if (!(n_of_T >= 1.0) || !std::isfinite(n_of_T)) throw ConfigError("n", "must be at least 1");
  if (samples < 2) throw ConfigError("samples", "need at least 2 samples");
  const double top = 2.0 * T + reach / scale();
  if (top > corpus.max_height()) {
    throw OutOfTabulatedRange("windows reach height " + std::to_string(top) + " but the table ends at " +
                              std::to_string(corpus.max_height()));
  }
}

std::pair<double, double> statistic_range(const TestFunction& eta) {
  if (const auto* f = std::get_if<Fejer>(&eta.form())) {
    return {-kFejerReach / f->delta, kFejerReach / f->delta};
  }
  return eta.support();
}

WindowStatistic::WindowStatistic(const ZeroCorpus& corpus, const TestFunction& eta, const WindowConfig& cfg)
    : corpus_(&corpus), eta_(eta), scale_(cfg.scale()) {
  std::tie(lo_, hi_) = statistic_range(eta);
  if (eta.is_zero()) {
    lo_ = hi_ = 0.0;
    return;
  }
  // Chebyshev moments integral eta(u) T_m(x(u)) du on [lo, hi].
  std::vector<double> breaks = eta.breakpoints();
  double panel = (hi_ - lo_) / 64.0;
  if (const auto* f = std::get_if<Fejer>(&eta.form())) panel = std::min(panel, 0.5 / f->delta);
  for (double x = lo_ + panel; x < hi_; x += panel) breaks.push_back(x);
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [&](double b) { return b <= lo_ || b >= hi_; }),
               breaks.end());
  std::sort(breaks.begin(), breaks.end());
  const double mid = 0.5 * (lo_ + hi_), half = 0.5 * (hi_ - lo_);
  cheb_moments_.resize(kChebDegree + 1);
  for (int m = 0; m <= kChebDegree; ++m) {
    cheb_moments_[m] = integrate(
        [&](double u) {
          const double x = std::clamp((u - mid) / half, -1.0, 1.0);
          return eta_(u) * std::cos(m * std::acos(x));
        },
        lo_, hi_, 1e-12, breaks);
  }
}

double WindowStatistic::count(double t) const {
  if (hi_ <= lo_) return 0.0;
  const double a = t + lo_ / scale_, b = t + hi_ / scale_;
  // Slightly widened so eta itself decides membership at the edges.
  const double pad = 1e-9 * std::max(1.0, std::abs(b));
  if (b + pad > corpus_->max_height()) {
    throw OutOfTabulatedRange("window [" + std::to_string(a) + ", " + std::to_string(b) +
                              ") leaves the table at " + std::to_string(corpus_->max_height()));
  }
  double sum = 0.0;
  for (double g : zeros_in_window(*corpus_, std::max(0.0, a - pad), b + pad)) sum += eta_(scale_ * (g - t));
  return sum;
}

double WindowStatistic::density(double t) const {
  if (hi_ <= lo_) return 0.0;
  // Omega(t + u / scale) on [lo, hi] by its Chebyshev interpolant.
  constexpr int N = kChebDegree + 1;
  std::array<double, N> f{};
  const double mid = 0.5 * (lo_ + hi_), half = 0.5 * (hi_ - lo_);
  for (int j = 0; j < N; ++j) {
    const double x = std::cos(kPi * (j + 0.5) / N);
    f[j] = omega(t + (mid + half * x) / scale_);
  }
  double sum = 0.0;
  for (int m = 0; m < N; ++m) {
    double c = 0.0;
    for (int j = 0; j < N; ++j) c += f[j] * std::cos(m * kPi * (j + 0.5) / N);
    c *= 2.0 / N;
    if (m == 0) c *= 0.5;
    sum += c * cheb_moments_[m];
  }
  return sum / (2.0 * kPi * scale_);
}

double linear_statistic(const ZeroCorpus& corpus, const TestFunction& eta, double t, const WindowConfig& cfg) {
  return WindowStatistic(corpus, eta, cfg).count(t);
}

double ds_integral(const ZeroCorpus& corpus, const TestFunction& eta, double t, const WindowConfig& cfg) {
  return WindowStatistic(corpus, eta, cfg).ds(t);
}

double gaussian_moment(int k) {
  if (k % 2) return 0.0;
  double r = 1.0;
  for (int j = k - 1; j > 1; j -= 2) r *= j;
  return r;
}

namespace {

struct KeptMoments {
  double mean;
  double m2;
  double mk;
};

KeptMoments kept_moments(std::span<const double> v, std::span<const std::size_t> kept, int k) {
  double mean = 0.0;
  for (std::size_t i : kept) mean += v[i];
  mean /= static_cast<double>(kept.size());
  double m2 = 0.0, mk = 0.0;
  for (std::size_t i : kept) {
    const double d = v[i] - mean;
    m2 += d * d;
    mk += std::pow(d, k);
  }
  const auto n = static_cast<double>(kept.size());
  return {mean, m2 / n, mk / n};
}

}  // namespace

MomentReport moments_from_samples(std::vector<double> values, int k_max) {
  if (k_max < 1 || k_max > 8) throw ConfigError("kmax", "must be between 1 and 8");
  if (values.size() < 2) throw ConfigError("samples", "need at least 2 samples");
  MomentReport r;
  r.values = std::move(values);
  const std::span<const double> v = r.values;
  const std::size_t n = v.size();
  const std::size_t blocks = std::min(kJackknifeBlocks, n);
  const auto mean = jackknife(n, blocks, [&](std::span<const std::size_t> kept) {
    return kept_moments(v, kept, 1).mean;
  });
  const auto var = jackknife(n, blocks, [&](std::span<const std::size_t> kept) {
    return kept_moments(v, kept, 2).m2;
  });
  r.mean = mean.estimate;
  r.mean_stderr = mean.stderr_;
  r.variance = var.estimate;
  r.variance_stderr = var.stderr_;
  for (int k = 1; k <= k_max; ++k) {
    MomentRow row;
    row.k = k;
    row.arithmetic_prediction = std::numeric_limits<double>::quiet_NaN();
    row.rmt_prediction = std::numeric_limits<double>::quiet_NaN();
    row.gaussian_prediction = gaussian_moment(k);
    const auto raw = jackknife(n, blocks, [&](std::span<const std::size_t> kept) {
      double s = 0.0;
      for (std::size_t i : kept) s += std::pow(v[i], k);
      return s / static_cast<double>(kept.size());
    });
    const auto central = jackknife(n, blocks, [&](std::span<const std::size_t> kept) {
      return kept_moments(v, kept, k).mk;
    });
    const auto normalized = jackknife(n, blocks, [&](std::span<const std::size_t> kept) {
      const auto m = kept_moments(v, kept, k);
      return m.m2 > 0.0 ? m.mk / std::pow(m.m2, 0.5 * k) : 0.0;
    });
    row.empirical_raw = raw.estimate;
    row.empirical_central = central.estimate;
    row.central_stderr = central.stderr_;
    row.empirical_centered_normalized = normalized.estimate;
    row.mc_stderr = normalized.stderr_;
    r.rows.push_back(row);
  }
  return r;
}

std::vector<double> sample_centres(const WindowConfig& cfg) {
  std::vector<double> t(cfg.samples);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    auto g = make_stream(cfg.seed, i);
    t[i] = cfg.T * cfg.weight.sample(g);
  }
  return t;
}

std::vector<double> sample_statistic(const ZeroCorpus& corpus, const TestFunction& eta, const WindowConfig& cfg,
                                     StatKind kind) {
  const auto [lo, hi] = statistic_range(eta);
  cfg.validate(corpus, std::max(std::abs(lo), std::abs(hi)));
  const WindowStatistic stat(corpus, eta, cfg);
  const std::vector<double> t = sample_centres(cfg);
  std::vector<double> out(t.size());
  parallel_for(t.size(), [&](std::size_t i) { out[i] = kind == StatKind::Ds ? stat.ds(t[i]) : stat.count(t[i]); });
  return out;
}

MomentReport sample_moments(const ZeroCorpus& corpus, const TestFunction& eta, const WindowConfig& cfg, int k_max,
                            StatKind kind) {
  if (k_max < 1 || k_max > 8) throw ConfigError("kmax", "must be between 1 and 8");
  return moments_from_samples(sample_statistic(corpus, eta, cfg, kind), k_max);
}

double selberg_residual(const ZeroCorpus& corpus, double t, int k, double T, const SieveTable& sieve) {
  if (k < 1) throw ConfigError("k", "must be positive");
  if (t > corpus.max_height()) throw OutOfTabulatedRange("t beyond the table");
  const double bound = std::pow(T, 1.0 / k);
  if (bound > static_cast<double>(sieve.limit()) + 0.5) {
    throw SieveTooSmall("primes to " + std::to_string(bound) + " needed, sieve limit " +
                        std::to_string(sieve.limit()));
  }
  double sum = 0.0;
  for (std::uint32_t p : sieve.primes()) {
    if (p > bound) break;
    sum += std::sin(t * std::log(static_cast<double>(p))) / std::sqrt(static_cast<double>(p));
  }
  return s_of(corpus, t) + sum / kPi;
}

SelbergDiagnostic selberg_diagnostic(const ZeroCorpus& corpus, const WindowConfig& cfg, int k,
                                     const SieveTable& sieve) {
  cfg.validate(corpus, 0.0);
  const std::vector<double> t = sample_centres(cfg);
  std::vector<double> res(t.size()), s(t.size());
  parallel_for(t.size(), [&](std::size_t i) {
    res[i] = selberg_residual(corpus, t[i], k, cfg.T, sieve);
    s[i] = s_of(corpus, t[i]);
  });
  SelbergDiagnostic d;
  for (std::size_t i = 0; i < t.size(); ++i) {
    d.mean_residual_sq += res[i] * res[i];
    d.mean_s_sq += s[i] * s[i];
    d.residual_moment_2k += std::pow(res[i], 2 * k);
  }
  const auto n = static_cast<double>(t.size());
  d.mean_residual_sq /= n;
  d.mean_s_sq /= n;
  d.residual_moment_2k /= n;
  return d;
}

std::vector<std::complex<double>> oscillatory_statistic(const ZeroCorpus& corpus, const TestFunction& r,
                                                        std::span<const double> alphas, const WindowConfig& cfg,
                                                        double t) {
  const auto [lo, hi] = statistic_range(r);
  const double scale = cfg.scale();
  const double a = t + lo / scale, b = t + hi / scale;
  if (b > corpus.max_height()) throw OutOfTabulatedRange("window leaves the table");
  const double L = std::log(cfg.T) / (2.0 * kPi);
  std::vector<std::complex<double>> out(alphas.size(), 0.0);
  for (double g : zeros_in_window(corpus, std::max(0.0, a), b)) {
    const double xi = L * (g - t);
    const double w = r(xi / cfg.n_of_T);
    if (w == 0.0) continue;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      const double ph = 2.0 * kPi * std::remainder(alphas[j] * xi, 1.0);
      out[j] += w * std::complex<double>(std::cos(ph), std::sin(ph));
    }
  }
  return out;
}

CovarianceEstimate oscillatory_covariance(const ZeroCorpus& corpus, const TestFunction& r, double alpha,
                                          const WindowConfig& cfg) {
  const auto [lo, hi] = statistic_range(r);
  cfg.validate(corpus, std::max(std::abs(lo), std::abs(hi)));
  const std::vector<double> t = sample_centres(cfg);
  std::vector<std::complex<double>> v(t.size());
  const double al[1] = {alpha};
  parallel_for(t.size(), [&](std::size_t i) { v[i] = oscillatory_statistic(corpus, r, al, cfg, t[i])[0]; });
  const auto jk = jackknife(v.size(), std::min(kJackknifeBlocks, v.size()), [&](std::span<const std::size_t> kept) {
    std::complex<double> m = 0.0;
    for (std::size_t i : kept) m += v[i];
    m /= static_cast<double>(kept.size());
    double s = 0.0;
    for (std::size_t i : kept) s += std::norm(v[i] - m);
    return s / static_cast<double>(kept.size());
  });
  return {jk.estimate, jk.stderr_};
}

double oscillatory_prediction(const TestFunction& r, double alpha, double n_of_T) {
  const SpectralEvaluator s = fourier(r);
  const double w = (s.support() ? *s.support() : 50.0) / n_of_T;
  std::vector<double> breaks{alpha};
  if (std::abs(alpha) < w) breaks.push_back(0.0);
  for (double k : s.kinks()) breaks.push_back(alpha + k / n_of_T);
  std::sort(breaks.begin(), breaks.end());
  const double n2 = n_of_T * n_of_T;
  return integrate([&](double x) { return std::abs(x) * n2 * std::norm(s(n_of_T * (x - alpha))); }, alpha - w,
                   alpha + w, 1e-11, breaks);
}

ExplicitFormula verify_explicit_formula(const ZeroCorpus& corpus, const SieveTable& sieve, double a,
                                        double zero_cutoff, std::uint64_t prime_cutoff) {
  if (a < 0.0 || a > 2.0) throw ConfigError("a", "Gaussian width must lie in [0, 2]");
  if (zero_cutoff > corpus.max_height()) throw OutOfTabulatedRange("zero cutoff beyond the table");
  if (prime_cutoff > sieve.limit()) throw SieveTooSmall("prime cutoff beyond the sieve");
  ExplicitFormula r;
  if (a == 0.0) return r;
  const double c = a * std::sqrt(kPi);
  // h(r) = g^(r / 2 pi) = a sqrt(pi) exp(-(a r / 2)^2).
  auto h = [&](double x) { return c * std::exp(-0.25 * a * a * x * x); };
  double zeros = 0.0;
  for (double g : corpus.ordinates()) {
    if (g > zero_cutoff) break;
    zeros += 2.0 * h(g);
  }
  const double reach = std::min(zero_cutoff, 60.0 / a);
  std::vector<double> breaks;
  for (double x = 1.0; x < reach; x += 1.0) breaks.push_back(x);
  const double dens = 2.0 * integrate([&](double x) { return h(x) * omega(x) / (2.0 * kPi); }, 0.0, reach, 1e-13,
                                      breaks);
  r.lhs = zeros - dens;
  double primes = 0.0;
  const auto pp = sieve.prime_powers();
  const auto bases = sieve.bases();
  for (std::size_t i = 0; i < pp.size() && pp[i] <= prime_cutoff; ++i) {
    const double ln = std::log(static_cast<double>(pp[i]));
    const double term = std::exp(-(ln / a) * (ln / a));
    if (term == 0.0) break;
    primes += std::log(static_cast<double>(bases[i])) / std::sqrt(static_cast<double>(pp[i])) * 2.0 * term;
  }
  r.rhs = 2.0 * c * std::exp(a * a / 16.0) - primes;
  r.residual = r.lhs - r.rhs;
  return r;
}

namespace {

// integral_0^x log(|y| + 2) dy, odd in x.
double log_antiderivative(double x) {
  const double ax = std::abs(x);
  const double v = (ax + 2.0) * std::log(ax + 2.0) - ax - 2.0 * std::log(2.0);
  return x < 0 ? -v : v;
}

}  // namespace

double majorant_statistic(const StepFunction& envelope, double t, double scale) {
  double sum = 0.0;
  for (std::size_t i = 0; i < envelope.heights.size(); ++i) {
    const double h = envelope.heights[i];
    if (h == 0.0) continue;
    const auto [u0, u1] = envelope.interval(envelope.first + static_cast<long>(i));
    sum += h * (log_antiderivative(t + u1 / scale) - log_antiderivative(t + u0 / scale));
  }
  return sum;
}

MajorantCheck majorant_check(const ZeroCorpus& corpus, const TestFunction& eta, const WindowConfig& cfg, int k) {
  if (k < 1) throw ConfigError("k", "must be positive");
  const StepFunction env = maximal_envelope(eta, static_cast<double>(k));
  const std::vector<double> counts = sample_statistic(corpus, eta, cfg, StatKind::Count);
  const std::vector<double> t = sample_centres(cfg);
  MajorantCheck m;
  for (std::size_t i = 0; i < t.size(); ++i) {
    m.count_moment += std::pow(std::abs(counts[i]), k);
    m.majorant_moment += std::pow(majorant_statistic(env, t[i], cfg.scale()), k);
  }
  m.count_moment /= static_cast<double>(t.size());
  m.majorant_moment /= static_cast<double>(t.size());
  return m;
}

}  // namespace zmeso
