#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "zmeso/error.hpp"
#include "zmeso/numerics.hpp"
#include "zmeso/testfn.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>

using namespace zmeso;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<TestFunction> closed_forms() {
  return {TestFunction(Indicator{0.5}), TestFunction(Indicator{1.5}), TestFunction(Hat{1.0}),
          TestFunction(Hat{0.4}),       TestFunction(SmoothBump{1.0}), TestFunction(SmoothBump{0.5})};
}

TestFunction odd_tent() { return TestFunction(PiecewiseLinear{{-1.0, -0.5, 0.5, 1.0}, {0.0, -1.0, 1.0, 0.0}}); }

// Brute-force sup of |eta| over [a, b) on a fine grid.
double grid_sup(const TestFunction& eta, double a, double b, int points = 10000) {
  double m = 0.0;
  for (int i = 0; i < points; ++i) m = std::max(m, std::abs(eta(a + (b - a) * i / points)));
  return m;
}

double l1_norm_numeric(const TestFunction& eta) {
  const auto [lo, hi] = eta.support();
  const auto br = eta.breakpoints();
  return integrate([&](double x) { return std::abs(eta(x)); }, lo, hi, 1e-12, br);
}

}  // namespace

TEST_CASE("transform closed forms") {
  const auto ind = fourier(TestFunction(Indicator{0.5}));
  CHECK(ind(0.0).real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(ind(1.0)) < 1e-15);
  const auto hat = fourier(TestFunction(Hat{1.0}));
  CHECK(hat(0.5).real() == doctest::Approx(4.0 / (kPi * kPi)).epsilon(1e-15));
  CHECK(std::abs(hat(0.5) - fourier_quadrature(TestFunction(Hat{1.0}), 0.5)) < 1e-8);
  // mpmath quad of (1 - x^2)^3 cos(2 pi x xi) over [-1, 1]
  const auto bump = fourier(TestFunction(SmoothBump{1.0}));
  CHECK(bump(0.0).real() == doctest::Approx(32.0 / 35.0).epsilon(1e-14));
  CHECK(bump(0.3).real() == doctest::Approx(0.747741763068683618065).epsilon(1e-12));
  CHECK(bump(2.7).real() == doctest::Approx(4.69808998082259769845e-5).epsilon(1e-9));
  CHECK(bump(10.25).real() == doctest::Approx(-5.19567488422275979166e-7).epsilon(1e-7));
  const auto fej = fourier(TestFunction(Fejer{0.5}));
  CHECK(fej.support().has_value());
  CHECK(fej(0.25).real() == doctest::Approx(0.5));
  CHECK(fej(0.6) == std::complex<double>(0.0));
}

TEST_CASE("closed forms agree with direct quadrature") {
  auto forms = closed_forms();
  forms.push_back(odd_tent());
  forms.push_back(TestFunction(PiecewiseLinear{{-0.3, 0.1, 0.2, 1.4}, {0.0, 2.0, -0.5, 0.0}}));
  for (const auto& eta : forms) {
    CAPTURE(eta.name());
    const auto f = fourier(eta);
    for (double xi : {0.0, 0.13, 0.5, 1.0, 2.37, 7.9, -3.3}) {
      CAPTURE(xi);
      CHECK(std::abs(f(xi) - fourier_quadrature(eta, xi)) < 1e-9 * std::max(1.0, eta.l1_norm()));
    }
  }
}

TEST_CASE("evaluator at 0 is the integral; conjugate symmetry") {
  auto forms = closed_forms();
  forms.push_back(odd_tent());
  for (const auto& eta : forms) {
    CAPTURE(eta.name());
    const auto f = fourier(eta);
    const double integral = integrate([&](double x) { return eta(x); }, eta.support().first, eta.support().second,
                                      1e-13, eta.breakpoints());
    CHECK(std::abs(f(0.0).real() - integral) <= 1e-9 * std::max(1.0, std::abs(integral)));
    for (double xi : {0.2, 1.7, 5.5}) CHECK(std::abs(f(-xi) - std::conj(f(xi))) < 1e-14);
  }
}

TEST_CASE("Parseval") {
  auto forms = closed_forms();
  forms.push_back(TestFunction(Fejer{0.75}));
  for (const auto& eta : forms) {
    CAPTURE(eta.name());
    const auto f = fourier(eta);
    double space = 0.0;
    if (std::holds_alternative<Fejer>(eta.form())) {
      const double d = std::get<Fejer>(eta.form()).delta;
      space = integrate_panels([&](double x) { return eta(x) * eta(x); }, -4000.0 / d, 4000.0 / d, 0.5 / d, 1e-12);
    } else {
      space = integrate([&](double x) { return eta(x) * eta(x); }, eta.support().first, eta.support().second, 1e-13,
                        eta.breakpoints());
    }
    // Spectral side on [-R, R]; the tail of |f|^2 beyond R is below 1/(pi^2 R)
    // for every form here and is bounded by its mean for the indicators.
    const double R = 4000.0;
    double spectral = integrate_panels([&](double x) { return std::norm(f(x)); }, -R, R, 0.25, 1e-12);
    if (std::holds_alternative<Indicator>(eta.form())) spectral += 1.0 / (kPi * kPi * R);
    CHECK(spectral == doctest::Approx(space).epsilon(1e-4));
  }
}

TEST_CASE("variance functional") {
  const TestFunction ind(Indicator{0.5});
  // (gamma + log(2 pi n) - Ci(2 pi n)) / pi^2, mpmath
  CHECK(variance_functional(ind, 8) == doctest::Approx(0.455431539465651177166).epsilon(1e-6));
  CHECK(variance_functional(ind, 16) == doctest::Approx(0.525632044666329712696).epsilon(1e-6));
  CHECK(variance_functional(ind, 32) == doctest::Approx(0.595855023977356011282).epsilon(1e-6));
  CHECK(variance_functional(ind, 64) == doctest::Approx(0.666083637341106304442).epsilon(1e-6));
  // Fejer(d): integral |x| (1 - |x|/d)^2 = d^2/6
  CHECK(variance_functional(TestFunction(Fejer{1.0}), kInf) == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
  CHECK(variance_functional(TestFunction(Fejer{0.5}), kInf) == doctest::Approx(1.0 / 24.0).epsilon(1e-9));
  for (const auto& eta : closed_forms()) {
    double prev = 0.0;
    for (double n : {0.5, 1.0, 2.0, 8.0, 16.0, 64.0}) {
      const double v = variance_functional(eta, n);
      CHECK(v >= prev);
      prev = v;
    }
  }
  // Odd eta with zero mass: the functional vanishes as n -> 0.
  const TestFunction odd = odd_tent();
  CHECK(std::abs(odd.integral()) < 1e-15);
  const double v1 = variance_functional(odd, 0.1), v2 = variance_functional(odd, 0.01);
  CHECK(v2 < v1);
  CHECK(v2 < 1e-6);
}

TEST_CASE("smoothing kernel") {
  for (double rho : {1.0 / 3.0, 0.2, 1.0}) {
    const SmoothingKernel K{rho};
    CHECK(K.profile(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(K.profile(rho) == 0.0);
    CHECK(K.profile(-1.01 * rho) == 0.0);
    CHECK(K.profile(0.3 * rho) == K.profile(-0.3 * rho));
    const double X = 2000.0 / rho;
    const double mass = integrate_panels([&](double x) { return K.spatial(x); }, -X, X, 1.0 / rho, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-5));
    // Spatial side is the inverse transform of the profile.
    for (double xi : {0.1 * rho, 0.5 * rho, 0.8 * rho}) {
      const double ft =
          integrate_panels([&](double x) { return K.spatial(x) * std::cos(2 * kPi * x * xi); }, -X, X, 1.0 / rho, 1e-12);
      CHECK(ft == doctest::Approx(K.profile(xi)).epsilon(1e-4));
    }
    // integral |K(x)| x^2 is finite: the tail past X is O(1/X).
    auto second = [&](double R) {
      return integrate_panels([&](double x) { return std::abs(K.spatial(x)) * x * x; }, -R, R, 1.0 / rho, 1e-10);
    };
    const double a = second(200.0 / rho), b = second(400.0 / rho), c = second(800.0 / rho);
    CHECK(b - a > c - b);
    CHECK((c - b) / c < 0.01);
  }
  CHECK(SmoothingKernel::for_order(4).rho == doctest::Approx(0.2));
}

TEST_CASE("smooth_truncate: transform identity") {
  const SmoothingKernel K;
  for (const auto& [eta, H] : std::vector<std::pair<TestFunction, double>>{
           {TestFunction(Indicator{0.5}), 32.0}, {TestFunction(Hat{1.0}), 8.0}, {TestFunction(SmoothBump{0.5}), 16.0}}) {
    CAPTURE(eta.name());
    const TestFunction st = smooth_truncate(eta, H, K);
    const auto fs = fourier(st);
    const auto f = fourier(eta);
    double worst = 0.0;
    for (int i = -400; i <= 400; ++i) {
      const double xi = K.rho * H * 1.2 * i / 400.0;
      worst = std::max(worst, std::abs(fs(xi) - K.profile(xi / H) * f(xi)));
    }
    CHECK(worst < 1e-6);
  }
  CHECK(smooth_truncate(TestFunction(), 16.0).is_zero());
}

TEST_CASE("smooth_truncate: L1 rates and variation") {
  const TestFunction ind(Indicator{0.5});
  const TestFunction bump(SmoothBump{1.0});
  std::vector<double> ind_scaled, bump_scaled;
  for (double H : {8.0, 16.0, 32.0, 64.0}) {
    const TestFunction si = smooth_truncate(ind, H);
    const TestFunction sb = smooth_truncate(bump, H);
    ind_scaled.push_back(l1_distance(ind, si) * H);
    bump_scaled.push_back(l1_distance(bump, sb) * H);
    // Nonnegative unit-mass kernel: variation cannot grow.
    CHECK(total_variation(si) <= 1.05 * total_variation(ind));
    CHECK(total_variation(sb) <= 1.05 * total_variation(bump));
  }
  CHECK(ind_scaled[2] <= 5.0 * total_variation(ind));
  for (std::size_t i = 1; i < ind_scaled.size(); ++i) {
    const double r = ind_scaled[i] / ind_scaled[i - 1];
    CHECK(r >= 0.3);
    CHECK(r <= 1.7);
    CHECK(bump_scaled[i] < bump_scaled[i - 1]);
  }
}

TEST_CASE("maximal envelope") {
  const StepFunction m = maximal_envelope(TestFunction(Indicator{0.5}), 1.0);
  CHECK(m(0.0) == 1.0);
  CHECK(m(-0.5) == 1.0);
  CHECK(m(0.49) == 1.0);
  CHECK(m(0.5) == 0.0);
  CHECK(m(-0.51) == 0.0);
  CHECK(m(3.0) == 0.0);

  const TestFunction hat(Hat{1.0});
  const StepFunction mh = maximal_envelope(hat, 1.0);
  for (long nu : {-1L, 0L, 1L}) {
    const auto [a, b] = mh.interval(nu);
    CHECK(mh(0.5 * (a + b)) == doctest::Approx(grid_sup(hat, a, b)).epsilon(1e-3));
  }
  CHECK(mh(-1.0) == doctest::Approx(0.5));
  CHECK(mh(0.0) == doctest::Approx(1.0));
  CHECK(mh(1.0) == doctest::Approx(0.5));

  auto forms = closed_forms();
  forms.push_back(odd_tent());
  for (const auto& eta : forms) {
    CAPTURE(eta.name());
    for (double w : {1.0, 0.5, 0.25, 3.0}) {
      const StepFunction env = maximal_envelope(eta, w);
      const auto [lo, hi] = eta.support();
      for (int i = 0; i <= 10000; ++i) {
        const double x = lo - 1.0 + (hi - lo + 2.0) * i / 10000.0;
        CHECK(env(x) >= std::abs(eta(x)));
      }
    }
    // Maximal-sum bound: sum eps sup_{eps-interval} |eta| <= 2 |eta|_1 + 6 eps TV + 0.01.
    for (double eps : {1.0, 0.5, 0.25}) {
      const double lhs = maximal_envelope(eta, eps).integral();
      CHECK(lhs <= 2.0 * l1_norm_numeric(eta) + 6.0 * eps * total_variation(eta) + 0.01);
    }
  }
  CHECK_THROWS_AS(maximal_envelope(TestFunction(Fejer{1.0}), 1.0), Unsupported);
}

TEST_CASE("l1_log_distance") {
  const TestFunction ind(Indicator{0.5});
  const TestFunction zero;
  CHECK(l1_log_distance(ind, ind) == 0.0);
  // 2 [(t + 2) log(t + 2) - t] from 0 to 1/2
  const double exact = 2.0 * (2.5 * std::log(2.5) - 0.5 - 2.0 * std::log(2.0));
  CHECK(l1_log_distance(ind, zero) == doctest::Approx(exact).epsilon(1e-6));
  const TestFunction hat(Hat{1.0}), bump(SmoothBump{0.7});
  CHECK(l1_log_distance(hat, bump) == doctest::Approx(l1_log_distance(bump, hat)).epsilon(1e-12));
  CHECK(l1_log_distance(hat, ind) > 0.0);
}

TEST_CASE("total variation") {
  CHECK(total_variation(TestFunction(Indicator{0.5})) == 2.0);
  CHECK(total_variation(TestFunction(Hat{1.0})) == 2.0);
  CHECK(total_variation(TestFunction(SmoothBump{0.3})) == 2.0);
  CHECK(total_variation(odd_tent()) == doctest::Approx(4.0));
  CHECK(total_variation(TestFunction(PiecewiseLinear{{0, 1, 2, 3}, {0, 2, 1, 0}})) == doctest::Approx(4.0));
}

TEST_CASE("support invariants") {
  auto forms = closed_forms();
  forms.push_back(odd_tent());
  for (const auto& eta : forms) {
    const double r = eta.support_radius();
    CHECK(eta(r * 1.0001) == 0.0);
    CHECK(eta(-r * 1.0001) == 0.0);
    CHECK(eta(r + 5.0) == 0.0);
  }
  CHECK(TestFunction(Indicator{0.5})(-0.5) == 1.0);
  CHECK(TestFunction(Indicator{0.5})(0.5) == 0.0);
}

TEST_CASE("knot validation and parsing") {
  CHECK_THROWS_AS(TestFunction(PiecewiseLinear{{0, 1, 1}, {0, 1, 0}}), ConfigError);
  CHECK_THROWS_AS(TestFunction(PiecewiseLinear{{0, 1, 2}, {0, 1, 1}}), ConfigError);
  CHECK_THROWS_AS(TestFunction(Indicator{-1.0}), ConfigError);
  CHECK(std::holds_alternative<Indicator>(parse_test_function("indicator:0.5").form()));
  CHECK(std::get<Hat>(parse_test_function("hat:2").form()).half_width == 2.0);
  CHECK(std::get<SmoothBump>(parse_test_function("bump:0.25").form()).half_width == 0.25);
  CHECK(std::get<Fejer>(parse_test_function("fejer:0.9").form()).delta == 0.9);
  CHECK_THROWS_AS(parse_test_function("triangle:1"), ConfigError);
  CHECK_THROWS_AS(parse_test_function("hat:x"), ConfigError);

  const auto path = std::filesystem::temp_directory_path() / "zmeso-knots.csv";
  {
    std::ofstream out(path);
    out << "x,y\n-1,0\n0,1\n1,0\n";
  }
  const TestFunction pl = parse_test_function(path.string());
  CHECK(pl(0.0) == 1.0);
  CHECK(pl(0.5) == doctest::Approx(0.5));
  std::filesystem::remove(path);
}
