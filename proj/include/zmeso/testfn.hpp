#pragma once

#include <complex>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace zmeso {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1 on [-h, h), 0 elsewhere.
struct Indicator {
  double half_width = 0.5;
};
// (1 - |x|/h)_+
struct Hat {
  double half_width = 1.0;
};
// (1 - (x/h)^2)^3 on [-h, h]; C^2 with bounded third derivative.
struct SmoothBump {
  double half_width = 1.0;
};
// delta * sinc^2(delta x): transform (1 - |xi|/delta)_+, compactly supported.
struct Fejer {
  double delta = 1.0;
};
// Linear interpolation of the knots, zero outside [x.front(), x.back()].
struct PiecewiseLinear {
  std::vector<double> x;
  std::vector<double> y;
};

class TestFunction {
 public:
  using Form = std::variant<Indicator, Hat, SmoothBump, Fejer, PiecewiseLinear>;

  TestFunction() : TestFunction(PiecewiseLinear{}) {}
  TestFunction(Form form);

  double operator()(double x) const;
  const Form& form() const { return form_; }
  std::string name() const;

  // [lo, hi] outside of which eta vanishes (infinite for Fejer).
  std::pair<double, double> support() const;
  double support_radius() const;
  double total_variation() const;
  double integral() const;
  double l1_norm() const;
  double sup_norm() const;
  bool is_zero() const;
  // Points where eta or a low derivative is discontinuous.
  std::vector<double> breakpoints() const;

 private:
  Form form_;
};

// "indicator:0.5", "hat:1", "bump:0.5", "fejer:1", or a path to an x,y knot CSV.
TestFunction parse_test_function(const std::string& spec);
TestFunction load_knot_file(const std::filesystem::path& path);

// Fourier transform xi -> integral e(-x xi) eta(x) dx, with e(x) = exp(2 pi i x).
class SpectralEvaluator {
 public:
  using Fn = std::function<std::complex<double>(double)>;

  SpectralEvaluator(Fn fn, std::optional<double> support, bool closed_form, double panel,
                    std::vector<double> kinks = {})
      : fn_(std::move(fn)), support_(support), closed_form_(closed_form), panel_(panel),
        kinks_(std::move(kinks)) {}

  std::complex<double> operator()(double xi) const {
    if (support_ && std::abs(xi) >= *support_) return 0.0;
    return fn_(xi);
  }
  // delta with the transform vanishing outside [-delta, delta], if finite.
  std::optional<double> support() const { return support_; }
  bool closed_form() const { return closed_form_; }
  // Length scale of oscillation, used to panel quadratures.
  double panel() const { return panel_; }
  std::span<const double> kinks() const { return kinks_; }

 private:
  Fn fn_;
  std::optional<double> support_;
  bool closed_form_;
  double panel_;
  std::vector<double> kinks_;
};

SpectralEvaluator fourier(const TestFunction& eta);
// Direct quadrature of the transform at one point (relative 1e-9); the
// fallback route and the oracle for the closed forms.
std::complex<double> fourier_quadrature(const TestFunction& eta, double xi);

// integral_{-R}^{R} |x| u(x) v(-x) dx; R defaults to the smaller compact support.
std::complex<double> pair_integral(const SpectralEvaluator& u, const SpectralEvaluator& v,
                                   double R = kInf);

// integral_{-n}^{n} |x| |eta^(x)|^2 dx.
double variance_functional(const TestFunction& eta, double n);

// K = (tri * tri)(2 xi / rho) / (2/3): K(0) = 1, supported in [-rho, rho];
// spatial side (3 rho / 4) sinc^4(rho x / 2) >= 0 with unit mass.
struct SmoothingKernel {
  double rho = 1.0 / 3.0;

  static SmoothingKernel for_order(int k) { return {1.0 / (k + 1.0)}; }
  double profile(double xi) const;
  double spatial(double x) const;
  // Spatial side of K(./H): H * spatial(H x).
  double spatial_scaled(double x, double H) const { return H * spatial(H * x); }
};

// Kcheck_H * eta sampled as a PiecewiseLinear with L1 error below 1e-6; its
// transform is K(xi/H) eta^(xi) up to that error.
TestFunction smooth_truncate(const TestFunction& eta, double H, const SmoothingKernel& kernel = {});

// Piecewise constant on [w nu - w/2, w nu + w/2), nu = first .. first + size - 1.
struct StepFunction {
  double width = 1.0;
  long first = 0;
  std::vector<double> heights;

  double operator()(double x) const;
  double integral() const;
  std::pair<double, double> interval(long nu) const {
    return {width * static_cast<double>(nu) - 0.5 * width, width * static_cast<double>(nu) + 0.5 * width};
  }
};

// M_w eta: sup |eta| over each interval of width w centred at multiples of w.
StepFunction maximal_envelope(const TestFunction& eta, double width);

double l1_distance(const TestFunction& f, const TestFunction& g);
// integral |f - g|(t) log(|t| + 2) dt
double l1_log_distance(const TestFunction& f, const TestFunction& g);
double total_variation(const TestFunction& eta);

}  // namespace zmeso
