// Acceptance run: one PASS/FAIL line per criterion, then uncounted
// supplementary lines for desk-scale reference values. Exit status is the
// number of failed criteria (capped at 100).

#include "zmeso/arithmetic.hpp"
#include "zmeso/meso_stats.hpp"
#include "zmeso/numerics.hpp"
#include "zmeso/rmt.hpp"
#include "zmeso/testfn.hpp"
#include "zmeso/zero_corpus.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace zmeso;

namespace {

// Pinned tolerances and limits.
constexpr double kT = 2e4;
constexpr std::size_t kZetaSamples = 10000;
constexpr std::uint64_t kSeed = 1;
constexpr double kFujiiTol = 0.25;
constexpr double kFujiiSeconds = 60.0;
constexpr double kOddFloor = 0.2;
constexpr double kFourthFloor = 0.5;
constexpr double kSmoothVarTol = 0.25;
constexpr double kExplicitResidual = 1e-2;
constexpr double kExplicitSlack = 1e-3;
constexpr double kExplicitSeconds = 30.0;
constexpr double kPntRatio = (8.0 / 12.0) * (8.0 / 12.0) * 4.0;
constexpr double kPntSeconds = 10.0;
constexpr double kDiag6Lo = 0.8, kDiag6Hi = 1.2, kDiag8Lo = 0.9, kDiag8Hi = 1.1;
constexpr double kBruteRel = 1e-12;
constexpr double kSigmas = 3.0;
constexpr double kDsSeconds = 120.0;
constexpr double kSlopeTol = 0.25;
constexpr double kCrossTol = 0.25;
constexpr int kWickDraws = 1000000;
constexpr double kSuiteSeconds = 600.0;

constexpr double kInvPi2 = 1.0 / (std::numbers::pi * std::numbers::pi);

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string f(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << name << ": " << detail << std::endl;
}

void supplementary(const std::string& name, bool holds, const std::string& detail) {
  std::cout << "INFO  (uncounted) " << name << " [" << (holds ? "holds" : "does not hold") << "]: " << detail
            << std::endl;
}

// Runs `body`, turning an exception into a failed criterion.
void criterion(int id, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("error: ") + e.what());
  }
}

WindowConfig window(double n) {
  WindowConfig w;
  w.T = kT;
  w.n_of_T = n;
  w.samples = kZetaSamples;
  w.seed = kSeed;
  return w;
}

const ZeroCorpus& corpus() {
  static const ZeroCorpus c = load_zero_table(ZMESO_ZEROS_PATH);
  return c;
}

bool within_sigmas(double value, double target, double stderr_) {
  return std::abs(value - target) <= kSigmas * stderr_;
}

}  // namespace

int main() {
  const auto t_start = Clock::now();
  std::cout << "acceptance: zero table " << ZMESO_ZEROS_PATH << std::endl;

  // 1 and 2 share the count samples.
  std::vector<MomentReport> fujii(3);
  const double fujii_n[] = {8.0, 16.0, 32.0};
  const TestFunction ind(Indicator{0.5});
  criterion(1, "Fujii variance", [&] {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 3; ++i) {
      fujii[static_cast<std::size_t>(i)] = sample_moments(corpus(), ind, window(fujii_n[i]), 4, StatKind::Count);
      const double vf = variance_functional(ind, fujii_n[i]);
      const double ratio = fujii[static_cast<std::size_t>(i)].variance / vf;
      ok = ok && std::abs(ratio - 1.0) <= kFujiiTol;
      detail += "n=" + f(fujii_n[i]) + " var " + f(fujii[static_cast<std::size_t>(i)].variance) + " / VF " + f(vf) +
                " = " + f(ratio, 3) + "; ";
    }
    const double s = seconds_since(t0);
    ok = ok && s < kFujiiSeconds;
    report(1, "Fujii variance", ok, detail + "tolerance " + f(kFujiiTol) + ", " + f(s, 3) + " s (limit 60 s)");
  });

  criterion(2, "Gaussian moments", [&] {
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 3; ++i) {
      const auto& r = fujii[static_cast<std::size_t>(i)];
      if (r.rows.size() < 4) throw std::runtime_error("count samples unavailable");
      const auto& k3 = r.rows[2];
      const auto& k4 = r.rows[3];
      const bool ok3 = std::abs(k3.empirical_centered_normalized) <= std::max(kSigmas * k3.mc_stderr, kOddFloor);
      const bool ok4 = std::abs(k4.empirical_centered_normalized - 3.0) <= std::max(kSigmas * k4.mc_stderr, kFourthFloor);
      ok = ok && ok3 && ok4;
      detail += "n=" + f(fujii_n[i]) + " m3 " + f(k3.empirical_centered_normalized, 3) + "+-" + f(k3.mc_stderr, 2) +
                " m4 " + f(k4.empirical_centered_normalized, 3) + "+-" + f(k4.mc_stderr, 2) + "; ";
    }
    report(2, "Gaussian moments", ok, detail + "floors 0.2 / 0.5");
  });

  criterion(3, "smooth test function CLT", [&] {
    const TestFunction bump(SmoothBump{1.0});
    const double n = 16.0;
    const MomentReport r = sample_moments(corpus(), bump, window(n), 4, StatKind::Count);
    const double vf = variance_functional(bump, n);
    const double ratio = r.variance / vf;
    const auto& k4 = r.rows[3];
    const bool ok = std::abs(ratio - 1.0) <= kSmoothVarTol &&
                    std::abs(k4.empirical_centered_normalized - 3.0) <= std::max(kSigmas * k4.mc_stderr, kFourthFloor);
    const double ds = sample_moments(corpus(), bump, window(n), 2).variance;
    report(3, "smooth test function CLT", ok,
           "SmoothBump(1), n=16: var " + f(r.variance) + " / VF " + f(vf) + " = " + f(ratio, 3) + "; m4 " +
               f(k4.empirical_centered_normalized, 3) + "+-" + f(k4.mc_stderr, 2) + "; density-subtracted var " +
               f(ds, 3));
  });

  criterion(4, "explicit formula", [&] {
    const auto t0 = Clock::now();
    const SieveTable sieve = build_sieve(1000000);
    const double top = corpus().max_height();
    double prev = kInf;
    bool monotone = true;
    std::string detail;
    ExplicitFormula last;
    for (double frac : {0.25, 0.5, 1.0}) {
      last = verify_explicit_formula(corpus(), sieve, 1.0, frac * top, 1000000);
      const double r = std::abs(last.residual);
      monotone = monotone && r <= prev + kExplicitSlack;
      prev = r;
      detail += "Z=" + f(frac * top, 6) + " |res| " + f(r, 3) + "; ";
    }
    const double s = seconds_since(t0);
    const bool ok = std::abs(last.residual) < kExplicitResidual && monotone && s < kExplicitSeconds;
    report(4, "explicit formula", ok,
           "a=1, lhs " + f(last.lhs, 12) + " rhs " + f(last.rhs, 12) + "; " + detail + f(s, 3) + " s (limit 30 s)");
  });

  criterion(5, "prime asymptotic", [&] {
    const auto t0 = Clock::now();
    const SieveTable sieve = build_sieve(1000000);
    const TestFunction bump(SmoothBump{1.0});
    const auto e8 = pnt_weighted_sum(bump, 8.0, sieve);
    const auto e12 = pnt_weighted_sum(bump, 12.0, sieve);
    const double r = std::abs(e12.lhs - e12.rhs) / std::abs(e8.lhs - e8.rhs);
    const double s = seconds_since(t0);
    report(5, "prime asymptotic", r < kPntRatio && s < kPntSeconds,
           "E12/E8 = " + f(r, 4) + " < " + f(kPntRatio, 4) + ", " + f(s, 3) + " s (limit 10 s)");
  });

  criterion(6, "diagonal sum vs pairing", [&] {
    const SieveTable sieve = build_sieve(20000000);
    const std::vector<TestFunction> etas(2, TestFunction(Fejer{0.9}));
    const std::vector<int> both{0, 1};
    const double pair = pairing_sum(etas, both);
    const double r6 = diagonal_moment_sum(etas, 1e6, sieve, 2) / pair;
    const double r8 = diagonal_moment_sum(etas, 1e8, sieve, 2) / pair;
    // Independent double loop over prime powers n1, n2 <= T^delta = 1e4
    // (Fejer(1/2) at T = 1e8), with signs, keeping n1^e1 n2^e2 = 1.
    const std::vector<TestFunction> half(2, TestFunction(Fejer{0.5}));
    const SpectralEvaluator u = fourier(half[0]);
    const double H = std::log(1e8);
    std::vector<std::uint64_t> ns;
    std::vector<double> lam;
    for (std::uint64_t n = 2; n <= 10000; ++n) {
      std::uint64_t m = n, p = 2;
      while (p * p <= m && m % p) ++p;
      if (p * p > m) p = m;
      while (m % p == 0) m /= p;
      if (m == 1) {
        ns.push_back(n);
        lam.push_back(std::log(static_cast<double>(p)));
      }
    }
    double brute = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      for (std::size_t j = 0; j < ns.size(); ++j) {
        if (ns[i] != ns[j]) continue;
        for (int e1 : {-1, 1}) {
          const int e2 = -e1;
          const double li = std::log(static_cast<double>(ns[i])), lj = std::log(static_cast<double>(ns[j]));
          brute += lam[i] / std::sqrt(static_cast<double>(ns[i])) * lam[j] / std::sqrt(static_cast<double>(ns[j])) *
                   u(e1 * li / H).real() * u(e2 * lj / H).real();
        }
      }
    }
    brute /= H * H;
    const double fast = diagonal_moment_sum(half, 1e8, sieve, 2);
    const double rel = std::abs(fast - brute) / std::abs(brute);
    const bool ok = r6 >= kDiag6Lo && r6 <= kDiag6Hi && r8 >= kDiag8Lo && r8 <= kDiag8Hi && rel <= kBruteRel;
    report(6, "diagonal sum vs pairing", ok,
           "Fejer(0.9): ratio " + f(r6, 4) + " at T=1e6, " + f(r8, 4) + " at T=1e8; brute force rel diff " +
               f(rel, 2));
  });

  criterion(7, "Diaconis-Shahshahani", [&] {
    const auto t0 = Clock::now();
    const EnsembleSample s = sample_haar(8, 10000, kSeed);
    bool ok = true;
    std::string detail = "E|Tr g^j|^2:";
    for (int j = 1; j <= 8; ++j) {
      const TraceMoments t = trace_power(s, j);
      ok = ok && within_sigmas(t.mean_abs2, j, t.abs2_stderr);
      detail += " " + f(t.mean_abs2, 3);
    }
    const std::vector<std::pair<std::vector<int>, std::vector<int>>> mixed{
        {{1}, {0, 1}}, {{2}, {0, 0, 1}}, {{1, 1}, {0, 0, 0, 1}}, {{0, 1}, {}}, {{3}, {0, 1}}};
    detail += "; mixed |m|/se:";
    for (const auto& [a, b] : mixed) {
      const ComplexEstimate m = mixed_moment(s, a, b);
      ok = ok && std::abs(m.value) <= kSigmas * m.stderr_;
      detail += " " + f(std::abs(m.value) / m.stderr_, 2);
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < kDsSeconds;
    report(7, "Diaconis-Shahshahani", ok, detail + "; " + f(secs, 3) + " s (limit 120 s)");
  });

  criterion(8, "Costin-Lebowitz", [&] {
    const EnsembleSample s = sample_haar(512, 1000, 2);
    std::vector<double> x, y, sg;
    bool means = true;
    std::string detail;
    for (double L : {8.0, 16.0, 32.0, 64.0}) {
      const CountingResult c = scaled_counting_clt(s, L);
      means = means && within_sigmas(c.mean, L, c.mean_stderr);
      x.push_back(std::log(L));
      y.push_back(c.variance);
      sg.push_back(c.variance_stderr);
      detail += "L=" + f(L) + " mean " + f(c.mean) + " var " + f(c.variance, 3) + "; ";
    }
    const LinearFit fit = linear_fit(x, y, sg);
    const bool slope_ok = std::abs(fit.slope / kInvPi2 - 1.0) <= kSlopeTol;
    report(8, "Costin-Lebowitz", means && slope_ok,
           detail + "slope " + f(fit.slope, 4) + "+-" + f(fit.slope_stderr, 2) + " vs 1/pi^2 = " + f(kInvPi2, 4));
  });

  criterion(9, "cross-route agreement", [&] {
    const TestFunction hat(Hat{1.0});
    const double n = 16.0;
    const double zeta = sample_moments(corpus(), hat, window(n), 2, StatKind::Count).variance;
    const double ds = sample_moments(corpus(), hat, window(n), 2).variance;
    const SieveTable sieve = build_sieve(1000000);
    const std::vector<TestFunction> pair(2, hat);
    const double arith = predicted_moment(pair, kT, n, sieve).value;
    const double rmt = smoothed_statistic_clt(sample_haar(256, 10000, 1), hat, n, 2).variance;
    const double v[3] = {zeta, arith, rmt};
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) ok = ok && std::abs(v[i] - v[j]) <= kCrossTol * std::min(v[i], v[j]);
    }
    report(9, "cross-route agreement", ok,
           "Hat(1), n=16: zeta " + f(zeta) + ", arithmetic S_2 " + f(arith) + ", CUE(256) " + f(rmt) +
               "; pairwise relative to the smaller, tolerance 0.25; density-subtracted zeta var " + f(ds, 3));
  });

  criterion(10, "Wick oracle", [&] {
    const TestFunction eta(Fejer{1.0});
    const std::vector<TestFunction> four(4, eta);
    const std::vector<int> all{0, 1, 2, 3};
    const double predicted = pairing_sum(four, all);
    const double var = variance_functional(eta, kInf);
    std::mt19937_64 g(kSeed);
    std::normal_distribution<double> nd(0.0, std::sqrt(var));
    double sum = 0.0, sum2 = 0.0;
    for (int d = 0; d < kWickDraws; ++d) {
      const double xg = nd(g);
      const double p = xg * xg * xg * xg;
      sum += p;
      sum2 += p * p;
    }
    const double mean = sum / kWickDraws;
    const double se = std::sqrt((sum2 / kWickDraws - mean * mean) / kWickDraws);
    bool counts = true;
    for (int m = 0; m <= 8; ++m) {
      std::vector<int> labels(static_cast<std::size_t>(m));
      std::iota(labels.begin(), labels.end(), 0);
      std::size_t dfact = m % 2 ? 0 : 1;
      for (int q = m - 1; q > 1 && m % 2 == 0; q -= 2) dfact *= static_cast<std::size_t>(q);
      counts = counts && perfect_matchings(labels).size() == dfact && pairing_count(static_cast<std::size_t>(m)) == dfact;
    }
    report(10, "Wick oracle", within_sigmas(mean, predicted, se) && counts,
           "S_4 " + f(predicted, 6) + " vs Monte Carlo " + f(mean, 6) + "+-" + f(se, 2) +
               "; matchings (k-1)!! for k <= 8: " + (counts ? "exact" : "mismatch"));
  });

  criterion(11, "property suites", [&] {
    bool ok = true;
    std::string detail;
    std::istringstream list(ZMESO_UNIT_TESTS);
    std::string exe;
    while (std::getline(list, exe, '|')) {
      if (exe.empty()) continue;
      const int status = std::system((exe + " > /dev/null 2>&1").c_str());
      const bool pass = status == 0;
      ok = ok && pass;
      detail += exe.substr(exe.find_last_of('/') + 1) + (pass ? " ok; " : " FAILED; ");
    }
    // Unit binaries plus everything this program has run so far.
    const double suite = seconds_since(t_start);
    ok = ok && suite < kSuiteSeconds;
    report(11, "property suites", ok, detail + "units plus acceptance " + f(suite, 4) + " s (limit 600 s)");
  });

  // Desk-scale reference values; not counted.
  try {
    const double n_list[] = {8.0, 16.0, 32.0};
    std::string detail;
    bool holds = true;
    for (double n : n_list) {
      const MomentReport r = sample_moments(corpus(), ind, window(n), 2, StatKind::Ds);
      const double ratio = r.variance / variance_functional(ind, n);
      holds = holds && ratio >= 0.75 && ratio <= 1.25;
      detail += "n=" + f(n) + " " + f(ratio, 3) + "; ";
    }
    const double l_max = std::log(kT / (2.0 * std::numbers::pi)) / std::log(2.0);
    supplementary("ds-statistic variance / VF in [0.75, 1.25]", holds,
                  detail + "the shortest prime, log 2, caps the resolved frequencies near n = " + f(l_max, 3));
  } catch (const std::exception& e) {
    supplementary("ds-statistic variance / VF", false, e.what());
  }
  try {
    std::string detail;
    double prev = kInf;
    bool shrinks = true;
    for (double n : {8.0, 16.0, 32.0}) {
      const WindowConfig w = window(n);
      const double gap = std::abs(sample_moments(corpus(), ind, w, 2).variance -
                                  sample_moments(corpus(), smooth_truncate(ind, n), w, 2).variance);
      shrinks = shrinks && gap < prev;
      prev = gap;
      detail += "n=" + f(n) + " " + f(gap, 3) + "; ";
    }
    supplementary("Indicator(1/2) smoothed-vs-raw variance gap shrinks", shrinks,
                  detail + "a 1/x transform leaves an n-independent gap");
  } catch (const std::exception& e) {
    supplementary("smoothed-vs-raw gap", false, e.what());
  }

  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << " ("
            << f(seconds_since(t_start), 4) << " s)" << std::endl;
  return std::min(failures, 100);
}
