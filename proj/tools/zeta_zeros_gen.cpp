// zeta_zeros_gen: writes a table of the first N ordinates of nontrivial zeta
// zeros in the plain-text layout used by published zero tables (one ordinate
// per line, nine decimals).
//
// This is a data-preparation utility, separate from the zmeso library (which
// only ingests tables). Z(t) is evaluated by Euler-Maclaurin summation below
// t = 1000 and by the Riemann-Siegel formula with corrections C0..C4 above.
// Zeros are isolated block by block between "good" Gram points and every
// block is required to hold exactly as many sign changes as Gram intervals
// (Rosser's rule, which holds throughout the range this tool targets).
//
//   zeta_zeros_gen --count 100000 --out zeros.txt

#include <CLI11.hpp>

#include <boost/math/tools/roots.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace {

#include "rs_coefficients.inc"

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEulerMaclaurinLimit = 1000.0;

double chebyshev(const double* c, std::size_t n, double z) {
  // Clenshaw recurrence.
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t i = n; i-- > 1;) {
    const double b0 = 2.0 * z * b1 - b2 + c[i];
    b2 = b1;
    b1 = b0;
  }
  return z * b1 - b2 + c[0];
}

template <std::size_t N>
double chebyshev(const double (&c)[N], double z) {
  return chebyshev(c, N, z);
}

double theta(double t) {
  const double inv = 1.0 / t;
  const double inv2 = inv * inv;
  double tail = inv / 48.0;
  double p = inv * inv2;
  tail += 7.0 / 5760.0 * p;
  p *= inv2;
  tail += 31.0 / 80640.0 * p;
  p *= inv2;
  tail += 127.0 / 430080.0 * p;
  p *= inv2;
  tail += 511.0 / 1216512.0 * p;
  return 0.5 * t * std::log(t / kTwoPi) - 0.5 * t - kPi / 8.0 + tail;
}

// Bernoulli numbers B_2 .. B_40.
constexpr std::array<double, 20> kBernoulli = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
    -7709321041217.0 / 510.0,
    2577687858367.0 / 6.0,
    -26315271553053477373.0 / 1919190.0,
    2929993913841559.0 / 6.0,
    -261082718496449122051.0 / 13530.0,
};

double z_euler_maclaurin(double t) {
  using cd = std::complex<double>;
  const cd s(0.5, t);
  const int n_cut = std::max(20, static_cast<int>(std::ceil(t / kPi)) + 10);
  cd sum = 0.0;
  for (int n = 1; n < n_cut; ++n) {
    sum += std::exp(-s * std::log(static_cast<double>(n)));
  }
  const double ln = std::log(static_cast<double>(n_cut));
  const cd n_pow = std::exp(-s * ln);  // N^{-s}
  sum += n_pow * static_cast<double>(n_cut) / (s - 1.0);
  sum += 0.5 * n_pow;
  // sum_k B_2k/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}
  cd rising = s;  // s(s+1)...(s+2k-2)
  cd power = n_pow / static_cast<double>(n_cut);
  double factorial = 2.0;  // (2k)!
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    const cd term = kBernoulli[k - 1] / factorial * rising * power;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    const double a = 2.0 * k - 1.0;
    rising *= (s + a) * (s + a + 1.0);
    power /= static_cast<double>(n_cut) * static_cast<double>(n_cut);
    factorial *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
  }
  return (std::exp(cd(0.0, theta(t))) * sum).real();
}

class RiemannSiegel {
 public:
  explicit RiemannSiegel(double t_max) {
    const auto terms = static_cast<std::size_t>(std::sqrt(t_max / kTwoPi)) + 2;
    log_n_.resize(terms + 1);
    rsqrt_n_.resize(terms + 1);
    for (std::size_t n = 1; n <= terms; ++n) {
      log_n_[n] = std::log(static_cast<double>(n));
      rsqrt_n_[n] = 1.0 / std::sqrt(static_cast<double>(n));
    }
  }

  double operator()(double t) const {
    if (t < kEulerMaclaurinLimit) return z_euler_maclaurin(t);
    const double a = std::sqrt(t / kTwoPi);
    const auto n_terms = static_cast<std::size_t>(a);
    if (n_terms + 1 >= log_n_.size()) throw std::out_of_range("t beyond table");
    const double p = a - static_cast<double>(n_terms);
    const double th = theta(t);
    double sum = 0.0;
    for (std::size_t n = 1; n <= n_terms; ++n) {
      sum += rsqrt_n_[n] * std::cos(th - t * log_n_[n]);
    }
    const double z = 2.0 * p - 1.0;
    const double ia = 1.0 / a;
    const double corr =
        chebyshev(kC0Coeffs, z) +
        ia * (chebyshev(kC1Coeffs, z) +
              ia * (chebyshev(kC2Coeffs, z) +
                    ia * (chebyshev(kC3Coeffs, z) + ia * chebyshev(kC4Coeffs, z))));
    const double sign = (n_terms % 2 == 1) ? 1.0 : -1.0;  // (-1)^(N-1)
    return 2.0 * sum + sign * corr / std::sqrt(a);
  }

 private:
  std::vector<double> log_n_;
  std::vector<double> rsqrt_n_;
};

// g_n solves theta(g_n) = n*pi.
double gram_point(long n, double guess) {
  double t = guess;
  for (int it = 0; it < 50; ++it) {
    const double f = theta(t) - static_cast<double>(n) * kPi;
    const double step = f / (0.5 * std::log(t / kTwoPi));
    t -= step;
    if (std::abs(step) < 1e-13 * t) break;
  }
  return t;
}

struct Sample {
  double t;
  double z;
};

class ZeroFinder {
 public:
  explicit ZeroFinder(double t_max) : z_(t_max) {}

  // Returns the zeros in the Gram block [samples.front().t, samples.back().t],
  // which must contain `expected` zeros.
  void solve_block(std::vector<Sample> samples, long expected, std::vector<double>& out) {
    for (int depth = 0;; ++depth) {
      long changes = 0;
      for (std::size_t i = 1; i < samples.size(); ++i) {
        if (std::signbit(samples[i - 1].z) != std::signbit(samples[i].z)) ++changes;
      }
      if (changes == expected) break;
      if (changes > expected || depth > 14) {
        throw std::runtime_error("Gram block at t=" + std::to_string(samples.front().t) +
                                 " holds " + std::to_string(changes) + " sign changes, expected " +
                                 std::to_string(expected));
      }
      std::vector<Sample> refined;
      refined.reserve(samples.size() * 2);
      for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        refined.push_back(samples[i]);
        const double mid = 0.5 * (samples[i].t + samples[i + 1].t);
        refined.push_back({mid, z_(mid)});
      }
      refined.push_back(samples.back());
      samples = std::move(refined);
    }
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (std::signbit(samples[i - 1].z) == std::signbit(samples[i].z)) continue;
      out.push_back(refine(samples[i - 1], samples[i]));
    }
  }

  double z(double t) const { return z_(t); }

 private:
  double refine(Sample a, Sample b) const {
    std::uintmax_t max_iter = 200;
    // Four ulps at the bracket height.
    auto tol = [](double lo, double hi) { return std::abs(hi - lo) <= 1e-15 * std::abs(hi); };
    const auto [lo, hi] = boost::math::tools::toms748_solve(
        [this](double t) { return z_(t); }, a.t, b.t, a.z, b.z, tol, max_iter);
    return 0.5 * (lo + hi);
  }

  RiemannSiegel z_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate a table of zeta zero ordinates"};
  long count = 100000;
  std::string out_path;
  app.add_option("--count", count, "number of zeros to write")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "output file")->required();
  CLI11_PARSE(app, argc, argv);

  // Height of the count-th zero from N(T) ~ (T/2pi) log(T/2pi e), with margin.
  double t_max = 100.0;
  for (int it = 0; it < 60; ++it) {
    const double f = t_max / kTwoPi * std::log(t_max / (kTwoPi * std::numbers::e)) + 7.0 / 8.0 -
                     static_cast<double>(count);
    t_max -= f / (std::log(t_max / kTwoPi) / kTwoPi);
    t_max = std::max(t_max, 20.0);
  }
  t_max = 1.02 * t_max + 100.0;
  ZeroFinder finder(t_max);

  std::vector<double> zeros;
  zeros.reserve(static_cast<std::size_t>(count) + 64);

  // g_{-1} ~ 9.667 lies below the first zero and Z(g_{-1}) < 0, so it is a
  // good Gram point with N(g_{-1}) = 0.
  long n = -1;
  double g = gram_point(n, 9.7);
  std::vector<Sample> block{{g, finder.z(g)}};
  long block_start = n;
  while (static_cast<long>(zeros.size()) < count) {
    ++n;
    g = gram_point(n, g + kTwoPi / std::log(g / kTwoPi));
    const double zg = finder.z(g);
    block.push_back({g, zg});
    const bool good = (n % 2 == 0) ? zg > 0.0 : zg < 0.0;
    if (!good) continue;
    finder.solve_block(block, n - block_start, zeros);
    block.assign(1, block.back());
    block_start = n;
  }
  // Every zero up to the last good Gram point g_n is accounted for: N(g_n) = n + 1.
  if (static_cast<long>(zeros.size()) != n + 1) {
    std::cerr << "zero count mismatch at Gram point " << n << ": found " << zeros.size() << "\n";
    return 1;
  }

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot open " << out_path << "\n";
    return 1;
  }
  char buf[64];
  for (long i = 0; i < count; ++i) {
    std::snprintf(buf, sizeof buf, "%.9f\n", zeros[static_cast<std::size_t>(i)]);
    out << buf;
  }
  return out.good() ? 0 : 1;
}
