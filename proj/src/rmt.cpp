#include "zmeso/rmt.hpp"

#include "zmeso/arithmetic.hpp"
#include "zmeso/error.hpp"
#include "zmeso/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

#include <unistd.h>

namespace zmeso {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kDenseMax = 64;

double wrap_angle(double theta) {
  // theta in radians -> [-1/2, 1/2)
  double x = theta / kTwoPi;
  x -= std::floor(x + 0.5);
  if (x >= 0.5) x -= 1.0;
  return x;
}

std::complex<double> unit(double turns) {
  const double ph = kTwoPi * std::remainder(turns, 1.0);
  return {std::cos(ph), std::sin(ph)};
}

// psi(theta) and psi'(theta) for the phase function of the paraorthogonal
// polynomial built from alpha_0 .. alpha_{K-1}; eigenvalues e^{i theta}
// solve psi(theta) = c (mod 2 pi). Evaluated for many theta in lockstep.
class PhaseFunction {
 public:
  PhaseFunction(std::vector<double> ar, std::vector<double> ai) : ar_(std::move(ar)), ai_(std::move(ai)) {}

  void operator()(std::span<const double> th, std::span<double> psi, std::span<double> dpsi) {
    const std::size_t m = th.size();
    ws_.resize(8 * m);
    double *zr = ws_.data(), *zi = zr + m, *br = zi + m, *bi = br + m, *d = bi + m, *pr = d + m, *pim = pr + m,
           *wind = pim + m;
    for (std::size_t i = 0; i < m; ++i) {
      zr[i] = std::cos(th[i]);
      zi[i] = std::sin(th[i]);
      br[i] = zr[i];
      bi[i] = zi[i];
      d[i] = 1.0;
      pr[i] = 1.0;
      pim[i] = 0.0;
      wind[i] = 0.0;
    }
    const std::size_t K = ar_.size();
    for (std::size_t k = 0; k < K; ++k) {
      const double a_r = ar_[k], a_i = ai_[k];
      for (std::size_t i = 0; i < m; ++i) {
        const double abr = a_r * br[i] - a_i * bi[i], abi = a_r * bi[i] + a_i * br[i];
        const double wr = 1.0 - abr, wi = -abi;
        const double inv = 1.0 / (wr * wr + wi * wi);
        const double ir = wr * inv, ii = -wi * inv;
        d[i] = 1.0 + d[i] * (1.0 + 2.0 * (abr * ir - abi * ii));
        const double cr = br[i] - a_r, ci = bi[i] + a_i;
        const double tr = cr * ir - ci * ii, ti = cr * ii + ci * ir;
        br[i] = zr[i] * tr - zi[i] * ti;
        bi[i] = zr[i] * ti + zi[i] * tr;
        // Running product of (1 - alpha b); count crossings of the negative
        // real axis instead of taking an argument per step.
        const double p_r = pr[i], p_i = pim[i];
        const double npr = p_r * wr - p_i * wi, npi = p_r * wi + p_i * wr;
        if (p_r < 0.0 && (p_i >= 0.0) != (npi >= 0.0)) wind[i] += (p_i >= 0.0) ? 1.0 : -1.0;
        const double s = 1.0 / (std::fabs(npr) + std::fabs(npi));
        pr[i] = npr * s;
        pim[i] = npi * s;
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      psi[i] = th[i] * static_cast<double>(K + 1) - 2.0 * (std::atan2(pim[i], pr[i]) + kTwoPi * wind[i]);
      dpsi[i] = d[i];
    }
  }

 private:
  std::vector<double> ar_, ai_;
  std::vector<double> ws_;
};

std::filesystem::path cache_root(const std::filesystem::path& dir) {
  if (!dir.empty()) return dir;
  if (const char* env = std::getenv("ZMESO_CACHE_DIR"); env && *env) return env;
  return {};
}

}  // namespace

std::vector<double> haar_angles_dense(int n, std::mt19937_64& g) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd z(n, n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) {
      const double re = normal(g);
      z(r, c) = {re, normal(g)};
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const auto& packed = qr.matrixQR();
  for (int c = 0; c < n; ++c) {
    const std::complex<double> r = packed(c, c);
    const double ar = std::abs(r);
    q.col(c) *= ar > 0.0 ? r / ar : std::complex<double>(1.0);
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(q, false);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = wrap_angle(std::arg(es.eigenvalues()(i)));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> haar_angles_verblunsky(int n, std::mt19937_64& g) {
  const int K = n - 1;
  std::vector<double> ar(static_cast<std::size_t>(K)), ai(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const double m2 = 1.0 - std::pow(uniform01(g), 1.0 / (n - k - 1));
    const double ph = kTwoPi * uniform01(g);
    ar[static_cast<std::size_t>(k)] = std::sqrt(m2) * std::cos(ph);
    ai[static_cast<std::size_t>(k)] = std::sqrt(m2) * std::sin(ph);
  }
  const double c = kTwoPi * uniform01(g);
  PhaseFunction phase(std::move(ar), std::move(ai));

  const auto N = static_cast<std::size_t>(n);
  std::vector<double> gx(N + 1), gp(N + 1), gd(N + 1);
  for (std::size_t i = 0; i <= N; ++i) gx[i] = -kPi + kTwoPi * static_cast<double>(i) / static_cast<double>(N);
  phase(gx, gp, gd);
  const double m0 = std::ceil((gp[0] - c) / kTwoPi);
  std::vector<double> x(N), lo(N), hi(N), target(N);
  std::size_t gi = 0;
  for (std::size_t m = 0; m < N; ++m) {
    target[m] = c + kTwoPi * (m0 + static_cast<double>(m));
    while (gi < N && gp[gi + 1] < target[m]) ++gi;
    lo[m] = gx[gi];
    hi[m] = gx[std::min(gi + 1, N)];
    const double flo = gp[gi] - target[m], fhi = gp[std::min(gi + 1, N)] - target[m];
    x[m] = fhi != flo ? lo[m] - flo * (hi[m] - lo[m]) / (fhi - flo) : 0.5 * (lo[m] + hi[m]);
  }
  // Bracketed Newton on all roots in lockstep.
  std::vector<std::size_t> active(N);
  std::iota(active.begin(), active.end(), 0);
  std::vector<double> ax, ap, ad;
  std::vector<std::size_t> next;
  for (int sweep = 0; !active.empty() && sweep < 200; ++sweep) {
    const std::size_t m = active.size();
    ax.resize(m);
    ap.resize(m);
    ad.resize(m);
    for (std::size_t j = 0; j < m; ++j) ax[j] = x[active[j]];
    phase(ax, ap, ad);
    next.clear();
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = active[j];
      const double f = ap[j] - target[i];
      const double step = f / ad[j];
      if (std::abs(step) < 1e-13) {
        x[i] -= step;
        continue;
      }
      if (f < 0) {
        lo[i] = x[i];
      } else {
        hi[i] = x[i];
      }
      double nx = x[i] - step;
      if (!(nx > lo[i] && nx < hi[i])) nx = 0.5 * (lo[i] + hi[i]);
      x[i] = nx;
      if (hi[i] - lo[i] < 1e-15) continue;
      next.push_back(i);
    }
    active.swap(next);
  }
  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) out[i] = wrap_angle(x[i]);
  std::sort(out.begin(), out.end());
  return out;
}

void write_ensemble_cache(const std::filesystem::path& path, const EnsembleSample& s) {
  const auto tmp = path.string() + ".tmp" + std::to_string(::getpid()) + "_" +
                   std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write ensemble cache " + tmp);
    const std::uint32_t n = static_cast<std::uint32_t>(s.matrix_size);
    const std::uint64_t b = s.batches();
    out.write("ZRM1", 4);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&b), sizeof b);
    out.write(reinterpret_cast<const char*>(s.angles.data()),
              static_cast<std::streamsize>(s.angles.size() * sizeof(double)));
    if (!out) throw Error("short write to ensemble cache " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

EnsembleSample read_ensemble_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open ensemble cache " + path.string());
  char magic[4];
  std::uint32_t n = 0;
  std::uint64_t b = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&b), sizeof b);
  if (!in || std::memcmp(magic, "ZRM1", 4) != 0) throw MalformedTable(0, "not a ZRM1 ensemble cache");
  EnsembleSample s;
  s.matrix_size = static_cast<int>(n);
  s.angles.resize(static_cast<std::size_t>(n) * b);
  in.read(reinterpret_cast<char*>(s.angles.data()), static_cast<std::streamsize>(s.angles.size() * sizeof(double)));
  if (!in) throw MalformedTable(0, "truncated ZRM1 ensemble cache");
  return s;
}

EnsembleSample sample_haar(int n, std::size_t batches, std::uint64_t seed, SamplerRoute route,
                           const std::filesystem::path& cache_dir) {
  if (n < 1) throw ConfigError("n", "matrix size must be at least 1");
  if (route == SamplerRoute::Auto) route = n <= kDenseMax ? SamplerRoute::Dense : SamplerRoute::Verblunsky;
  const std::filesystem::path root = cache_root(cache_dir);
  std::filesystem::path file;
  if (!root.empty()) {
    file = root / ("cue-n" + std::to_string(n) + "-b" + std::to_string(batches) + "-s" + std::to_string(seed) +
                   (route == SamplerRoute::Dense ? "-dense" : "-verblunsky") + ".zrm");
    if (std::filesystem::exists(file)) {
      try {
        EnsembleSample s = read_ensemble_cache(file);
        if (s.matrix_size == n && s.batches() == batches) {
          s.seed = seed;
          return s;
        }
      } catch (const Error&) {
        // Rebuild below.
      }
    }
  }
  EnsembleSample s;
  s.matrix_size = n;
  s.seed = seed;
  s.angles.resize(static_cast<std::size_t>(n) * batches);
  parallel_for(batches, [&](std::size_t b) {
    auto g = make_stream(seed, b);
    const std::vector<double> a =
        route == SamplerRoute::Dense ? haar_angles_dense(n, g) : haar_angles_verblunsky(n, g);
    std::copy(a.begin(), a.end(), s.angles.begin() + static_cast<std::ptrdiff_t>(b * static_cast<std::size_t>(n)));
  });
  if (!file.empty()) {
    std::filesystem::create_directories(root);
    write_ensemble_cache(file, s);
  }
  return s;
}

std::complex<double> trace_power(std::span<const double> angles, int j) {
  std::complex<double> s = 0.0;
  for (double t : angles) s += unit(j * t);
  return s;
}

std::vector<std::complex<double>> trace_powers(std::span<const double> angles, int j_max) {
  std::vector<std::complex<double>> out(static_cast<std::size_t>(std::max(j_max, 0)), 0.0);
  if (j_max <= 0) return out;
  std::vector<std::complex<double>> z(angles.size()), w(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) z[i] = w[i] = unit(angles[i]);
  for (int j = 1; j <= j_max; ++j) {
    // Re-anchor periodically to keep the running powers on the circle.
    if (j % 64 == 0) {
      for (std::size_t i = 0; i < angles.size(); ++i) w[i] = unit(j * angles[i]);
    }
    std::complex<double> s = 0.0;
    for (const auto& v : w) s += v;
    out[static_cast<std::size_t>(j - 1)] = s;
    for (std::size_t i = 0; i < angles.size(); ++i) w[i] *= z[i];
  }
  return out;
}

TraceMoments trace_power(const EnsembleSample& sample, int j) {
  if (j == 0) throw ConfigError("j", "trace exponent must be nonzero");
  TraceMoments t;
  t.j = j;
  const std::size_t B = sample.batches();
  t.per_batch.resize(B);
  for (std::size_t b = 0; b < B; ++b) t.per_batch[b] = trace_power(sample.batch(b), j);
  for (const auto& v : t.per_batch) {
    t.mean += v;
    t.mean_abs2 += std::norm(v);
  }
  const auto nb = static_cast<double>(B);
  t.mean /= nb;
  t.mean_abs2 /= nb;
  double s1 = 0.0, s2 = 0.0;
  for (const auto& v : t.per_batch) {
    s1 += std::norm(v - t.mean);
    s2 += (std::norm(v) - t.mean_abs2) * (std::norm(v) - t.mean_abs2);
  }
  if (B >= 2) {
    t.mean_stderr = std::sqrt(s1 / (nb - 1.0) / nb);
    t.abs2_stderr = std::sqrt(s2 / (nb - 1.0) / nb);
  }
  return t;
}

ComplexEstimate mixed_moment(const EnsembleSample& sample, std::span<const int> a, std::span<const int> b) {
  const int J = static_cast<int>(std::max(a.size(), b.size()));
  const std::size_t B = sample.batches();
  std::vector<std::complex<double>> v(B);
  for (std::size_t k = 0; k < B; ++k) {
    const auto tr = trace_powers(sample.batch(k), J);
    std::complex<double> p = 1.0;
    for (int j = 0; j < J; ++j) {
      const int aj = j < static_cast<int>(a.size()) ? a[static_cast<std::size_t>(j)] : 0;
      const int bj = j < static_cast<int>(b.size()) ? b[static_cast<std::size_t>(j)] : 0;
      for (int e = 0; e < aj; ++e) p *= tr[static_cast<std::size_t>(j)];
      for (int e = 0; e < bj; ++e) p *= std::conj(tr[static_cast<std::size_t>(j)]);
    }
    v[k] = p;
  }
  ComplexEstimate r;
  for (const auto& x : v) r.value += x;
  r.value /= static_cast<double>(B);
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x - r.value);
  if (B >= 2) r.stderr_ = std::sqrt(s / (static_cast<double>(B) - 1.0) / static_cast<double>(B));
  return r;
}

double haar_moment_prediction(std::span<const int> a, std::span<const int> b) {
  const std::size_t J = std::max(a.size(), b.size());
  double r = 1.0;
  for (std::size_t j = 0; j < J; ++j) {
    const int aj = j < a.size() ? a[j] : 0;
    const int bj = j < b.size() ? b[j] : 0;
    if (aj != bj) return 0.0;
    for (int e = 1; e <= aj; ++e) r *= static_cast<double>(j + 1) * e;
  }
  return r;
}

CountingResult scaled_counting_clt(const EnsembleSample& sample, double L) {
  const int n = sample.matrix_size;
  if (L > 0.5 * n) throw WindowExceedsTorus("L = " + std::to_string(L) + " exceeds n/2 = " + std::to_string(0.5 * n));
  CountingResult r;
  const std::size_t B = sample.batches();
  r.counts.assign(B, 0.0);
  if (L <= 0.0) return r;
  const double top = L / n;
  for (std::size_t b = 0; b < B; ++b) {
    const auto a = sample.batch(b);
    const auto lo = std::lower_bound(a.begin(), a.end(), 0.0);
    const auto hi = std::lower_bound(a.begin(), a.end(), top);
    r.counts[b] = static_cast<double>(hi - lo);
  }
  const auto m = moments_from_samples(r.counts, 2);
  r.mean = m.mean;
  r.mean_stderr = m.mean_stderr;
  r.variance = m.variance;
  r.variance_stderr = m.variance_stderr;
  return r;
}

CountingResult scaled_counting_clt(int n, double L, std::size_t batches, std::uint64_t seed) {
  if (L > 0.5 * n) throw WindowExceedsTorus("L = " + std::to_string(L) + " exceeds n/2 = " + std::to_string(0.5 * n));
  return scaled_counting_clt(sample_haar(n, batches, seed), L);
}

double rmt_linear_statistic(std::span<const double> angles, int n, const TestFunction& eta, double L,
                            double centre) {
  const auto [lo, hi] = eta.support();
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Unsupported("direct route needs compact support: " + eta.name());
  }
  const double nn = static_cast<double>(n);
  double sum = 0.0;
  for (double t : angles) {
    const double x = nn * t - centre;
    // Periodization: images x + n k with (x + n k) / L in [lo, hi].
    const long k0 = static_cast<long>(std::ceil((L * lo - x) / nn));
    const long k1 = static_cast<long>(std::floor((L * hi - x) / nn));
    for (long k = k0; k <= k1; ++k) sum += eta((x + nn * static_cast<double>(k)) / L);
  }
  return sum;
}

namespace {

// (L/n) eta^(L j / n) for j = 1 .. J with J the last nonzero coefficient.
std::vector<std::complex<double>> trace_coefficients(const TestFunction& eta, int n, double L) {
  const SpectralEvaluator s = fourier(eta);
  if (!s.support()) throw Unsupported("trace route needs a compact transform: " + eta.name());
  const double nn = static_cast<double>(n);
  const int J = static_cast<int>(std::ceil(*s.support() * nn / L));
  std::vector<std::complex<double>> c(static_cast<std::size_t>(std::max(J, 0)));
  for (int j = 1; j <= J; ++j) c[static_cast<std::size_t>(j - 1)] = L / nn * s(L * j / nn);
  return c;
}

double centered_from_traces(std::span<const std::complex<double>> coef,
                            std::span<const std::complex<double>> traces) {
  double s = 0.0;
  for (std::size_t j = 0; j < coef.size(); ++j) s += 2.0 * (coef[j] * traces[j]).real();
  return s;
}

}  // namespace

double rmt_centered_statistic_trace(std::span<const double> angles, int n, const TestFunction& eta, double L) {
  const auto coef = trace_coefficients(eta, n, L);
  const auto tr = trace_powers(angles, static_cast<int>(coef.size()));
  return centered_from_traces(coef, tr);
}

MomentReport smoothed_statistic_clt(const EnsembleSample& sample, const TestFunction& eta, double L, int k_max) {
  const int n = sample.matrix_size;
  const std::size_t B = sample.batches();
  std::vector<double> values(B);
  const auto [lo, hi] = eta.support();
  if (std::isfinite(lo) && std::isfinite(hi)) {
    if (L * eta.support_radius() > 0.5 * n) {
      throw WindowExceedsTorus("dilated support " + std::to_string(L * eta.support_radius()) + " exceeds n/2");
    }
    parallel_for(B, [&](std::size_t b) { values[b] = rmt_linear_statistic(sample.batch(b), n, eta, L); });
  } else {
    const auto coef = trace_coefficients(eta, n, L);
    const double mean = L * eta.integral();
    parallel_for(B, [&](std::size_t b) {
      const auto tr = trace_powers(sample.batch(b), static_cast<int>(coef.size()));
      values[b] = mean + centered_from_traces(coef, tr);
    });
  }
  MomentReport r = moments_from_samples(std::move(values), k_max);
  for (auto& row : r.rows) row.rmt_prediction = row.empirical_central;
  return r;
}

MomentReport smoothed_statistic_clt(int n, const TestFunction& eta, double L, std::size_t batches,
                                    std::uint64_t seed, int k_max) {
  const auto [lo, hi] = eta.support();
  if (std::isfinite(hi) && L * eta.support_radius() > 0.5 * n) {
    throw WindowExceedsTorus("dilated support " + std::to_string(L * eta.support_radius()) + " exceeds n/2");
  }
  return smoothed_statistic_clt(sample_haar(n, batches, seed), eta, L, k_max);
}

PairingCheck pairing_moment_check(std::span<const TestFunction> etas, const EnsembleSample& sample) {
  const int n = sample.matrix_size;
  double delta = 0.0;
  std::vector<std::vector<std::complex<double>>> coef;
  for (const auto& e : etas) {
    const SpectralEvaluator s = fourier(e);
    if (!s.support()) throw SupportBudgetExceeded("transform of " + e.name() + " is not compactly supported");
    delta += *s.support();
    coef.push_back(trace_coefficients(e, n, 1.0));
  }
  if (delta > 2.0 + 1e-12) throw SupportBudgetExceeded("sum of transform supports exceeds 2");
  std::size_t J = 0;
  for (const auto& c : coef) J = std::max(J, c.size());
  const std::size_t B = sample.batches();
  std::vector<double> prod(B);
  parallel_for(B, [&](std::size_t b) {
    const auto tr = trace_powers(sample.batch(b), static_cast<int>(J));
    double p = 1.0;
    for (const auto& c : coef) p *= centered_from_traces(c, tr);
    prod[b] = p;
  });
  PairingCheck r;
  for (double v : prod) r.value += v;
  r.value /= static_cast<double>(B);
  double s = 0.0;
  for (double v : prod) s += (v - r.value) * (v - r.value);
  if (B >= 2) r.stderr_ = std::sqrt(s / (static_cast<double>(B) - 1.0) / static_cast<double>(B));
  std::vector<int> all(etas.size());
  std::iota(all.begin(), all.end(), 0);
  r.prediction = pairing_sum(etas, all);
  return r;
}

PairingCheck pairing_moment_check(std::span<const TestFunction> etas, int n, std::size_t batches,
                                  std::uint64_t seed) {
  double delta = 0.0;
  for (const auto& e : etas) {
    const SpectralEvaluator s = fourier(e);
    if (!s.support()) throw SupportBudgetExceeded("transform of " + e.name() + " is not compactly supported");
    delta += *s.support();
  }
  if (delta > 2.0 + 1e-12) throw SupportBudgetExceeded("sum of transform supports exceeds 2");
  return pairing_moment_check(etas, sample_haar(n, batches, seed));
}

SpectralEvaluator modulated_transform(const TestFunction& r, double m, double alpha) {
  const SpectralEvaluator s = fourier(r);
  std::vector<double> kinks{alpha};
  for (double k : s.kinks()) kinks.push_back(alpha + k / m);
  std::optional<double> support;
  if (s.support()) support = std::abs(alpha) + *s.support() / m;
  return SpectralEvaluator([s, m, alpha](double x) { return m * s(m * (x - alpha)); }, support, s.closed_form(),
                           s.panel() / m, kinks);
}

std::vector<OscillatoryEntry> oscillatory_rmt_statistic(const TestFunction& r,
                                                        std::span<const std::vector<double>> tuples,
                                                        double n_meso, const EnsembleSample& sample) {
  const SpectralEvaluator rs = fourier(r);
  if (!rs.support()) throw SupportBudgetExceeded("transform of " + r.name() + " is not compactly supported");
  const double width = *rs.support() / n_meso;
  const int n = sample.matrix_size;
  const double nn = static_cast<double>(n);
  std::vector<double> alphas;
  for (const auto& t : tuples) {
    double A = 0.0;
    for (double a : t) A += std::abs(a);
    if (!(A < 2.0)) throw SupportBudgetExceeded("sum |alpha| must stay below 2");
    alphas.insert(alphas.end(), t.begin(), t.end());
  }
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  // Coefficients (1/n) f^(j/n) for j in [jlo, jhi], j != 0.
  struct Coef {
    int jlo;
    std::vector<std::complex<double>> c;
  };
  std::vector<Coef> coefs;
  int jmax = 0;
  for (double a : alphas) {
    const SpectralEvaluator f = modulated_transform(r, n_meso, a);
    Coef c;
    c.jlo = static_cast<int>(std::floor(nn * (a - width)));
    const int jhi = static_cast<int>(std::ceil(nn * (a + width)));
    for (int j = c.jlo; j <= jhi; ++j) c.c.push_back(j == 0 ? 0.0 : f(j / nn) / nn);
    jmax = std::max({jmax, std::abs(c.jlo), std::abs(jhi)});
    coefs.push_back(std::move(c));
  }
  const std::size_t B = sample.batches();
  std::vector<std::vector<std::complex<double>>> stat(B, std::vector<std::complex<double>>(alphas.size()));
  parallel_for(B, [&](std::size_t b) {
    const auto tr = trace_powers(sample.batch(b), jmax);
    auto trace = [&](int j) -> std::complex<double> {
      if (j == 0) return nn;
      return j > 0 ? tr[static_cast<std::size_t>(j - 1)] : std::conj(tr[static_cast<std::size_t>(-j - 1)]);
    };
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      std::complex<double> s = 0.0;
      for (std::size_t q = 0; q < coefs[i].c.size(); ++q) s += coefs[i].c[q] * trace(coefs[i].jlo + static_cast<int>(q));
      stat[b][i] = s;
    }
  });
  std::vector<OscillatoryEntry> out;
  for (const auto& t : tuples) {
    OscillatoryEntry e;
    e.alphas = t;
    std::vector<std::size_t> idx;
    for (double a : t) {
      idx.push_back(static_cast<std::size_t>(std::lower_bound(alphas.begin(), alphas.end(), a) - alphas.begin()));
    }
    std::vector<std::complex<double>> v(B);
    for (std::size_t b = 0; b < B; ++b) {
      std::complex<double> p = 1.0;
      for (std::size_t i : idx) p *= stat[b][i];
      v[b] = p;
      e.value += p;
    }
    e.value /= static_cast<double>(B);
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x - e.value);
    if (B >= 2) e.stderr_ = std::sqrt(s / (static_cast<double>(B) - 1.0) / static_cast<double>(B));
    std::vector<SpectralEvaluator> u;
    for (double a : t) u.push_back(modulated_transform(r, n_meso, a));
    std::vector<int> all(t.size());
    std::iota(all.begin(), all.end(), 0);
    e.prediction = pairing_sum(u, all).value;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace zmeso
