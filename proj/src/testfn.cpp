#include "zmeso/testfn.hpp"

#include "zmeso/error.hpp"
#include "zmeso/numerics.hpp"
#include "zmeso/special.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

namespace zmeso {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double pl_value(const PiecewiseLinear& p, double x) {
  if (p.x.empty() || x <= p.x.front() || x >= p.x.back()) return 0.0;
  const auto it = std::upper_bound(p.x.begin(), p.x.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - p.x.begin());
  const double t = (x - p.x[j - 1]) / (p.x[j] - p.x[j - 1]);
  return p.y[j - 1] + t * (p.y[j] - p.y[j - 1]);
}

// 96 j_3(w) / w^3, the transform profile of (1 - u^2)^3 on [-1, 1].
double bump_profile(double w) {
  w = std::abs(w);
  if (w < 1.0) {
    // j_3(w) / w^3 = sum_k (-w^2/2)^k / (k! (2k+7)!!)
    double term = 1.0 / 105.0;
    double sum = term;
    const double q = -0.5 * w * w;
    for (int k = 1; k < 30; ++k) {
      term *= q / (k * (2.0 * k + 7.0));
      sum += term;
      if (std::abs(term) < 1e-18) break;
    }
    return 96.0 * sum;
  }
  if (w < 20.0) return 96.0 * std::sph_bessel(3u, w) / (w * w * w);
  // libstdc++ rejects large arguments; the elementary form is stable here.
  const double j3 = ((15.0 / (w * w * w) - 6.0 / w) * std::sin(w) - (15.0 / (w * w) - 1.0) * std::cos(w)) / w;
  return 96.0 * j3 / (w * w * w);
}

// Total variation of sinc^2 on the real line: 2 + 4 sum of the side maxima.
double sinc2_variation() {
  static const double tv = [] {
    double sum = 0.0;
    constexpr int kTerms = 20000;
    for (int k = 1; k <= kTerms; ++k) {
      // Maximum of sinc^2 in (k, k + 1/2): root of tan(pi x) = pi x.
      double x = k + 0.5 - 1.0 / (kPi * kPi * (k + 0.5));
      for (int it = 0; it < 30; ++it) {
        const double f = std::tan(kPi * x) - kPi * x;
        const double c = std::cos(kPi * x);
        const double df = kPi / (c * c) - kPi;
        const double step = f / df;
        x -= step;
        if (std::abs(step) < 1e-15 * x) break;
      }
      const double s = sinc(x);
      sum += s * s;
    }
    // Tail: maxima ~ 1 / (pi x)^2 with x ~ k + 1/2.
    sum += 1.0 / (kPi * kPi * (kTerms + 1.0));
    return 2.0 + 4.0 * sum;
  }();
  return tv;
}

struct PlSpectrum {
  std::vector<double> x;   // knot positions relative to the centre
  std::vector<double> ds;  // slope jumps
  std::vector<double> moments;  // M_m = sum ds x^m / m!, m = 0..
  double centre = 0.0;
  double radius = 0.0;

  cd operator()(double xi) const {
    if (x.empty()) return 0.0;
    const cd phase = std::polar(1.0, -2.0 * kPi * centre * xi);
    if (std::abs(2.0 * kPi * xi * radius) < 1.0) {
      // sum_{m >= 2} (-2 pi i xi)^(m-2) M_m / m!
      const cd z(0.0, -2.0 * kPi * xi);
      cd acc = 0.0;
      for (std::size_t m = moments.size(); m-- > 2;) acc = acc * z + moments[m];
      return phase * acc;
    }
    double re = 0.0, im = 0.0;
    const double w = -2.0 * kPi * xi;
    for (std::size_t j = 0; j < x.size(); ++j) {
      re += ds[j] * std::cos(w * x[j]);
      im += ds[j] * std::sin(w * x[j]);
    }
    return -phase * cd(re, im) / (4.0 * kPi * kPi * xi * xi);
  }
};

std::shared_ptr<const PlSpectrum> make_pl_spectrum(const PiecewiseLinear& p) {
  auto s = std::make_shared<PlSpectrum>();
  if (p.x.empty()) return s;
  const std::size_t n = p.x.size();
  s->centre = 0.5 * (p.x.front() + p.x.back());
  s->radius = 0.5 * (p.x.back() - p.x.front());
  double prev = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double slope = (j + 1 < n) ? (p.y[j + 1] - p.y[j]) / (p.x[j + 1] - p.x[j]) : 0.0;
    const double jump = slope - prev;
    prev = slope;
    if (jump == 0.0) continue;
    s->x.push_back(p.x[j] - s->centre);
    s->ds.push_back(jump);
  }
  constexpr std::size_t kMoments = 40;
  s->moments.assign(kMoments, 0.0);
  for (std::size_t j = 0; j < s->x.size(); ++j) {
    double t = s->ds[j];
    for (std::size_t m = 0; m < kMoments; ++m) {
      s->moments[m] += t;
      t *= s->x[j] / static_cast<double>(m + 1);
    }
  }
  return s;
}

// Radius around the centre holding all but a 1e-6 fraction of the L1 mass.
double pl_effective_radius(const PiecewiseLinear& p) {
  if (p.x.size() < 2) return 0.0;
  const double c = 0.5 * (p.x.front() + p.x.back());
  std::vector<std::pair<double, double>> seg;
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < p.x.size(); ++j) {
    const double m = 0.5 * (std::abs(p.y[j]) + std::abs(p.y[j + 1])) * (p.x[j + 1] - p.x[j]);
    seg.push_back({std::max(std::abs(p.x[j] - c), std::abs(p.x[j + 1] - c)), m});
    total += m;
  }
  std::sort(seg.begin(), seg.end(), [](auto& a, auto& b) { return a.first > b.first; });
  double outside = 0.0;
  for (auto& [r, m] : seg) {
    outside += m;
    if (outside > 1e-6 * total) return r;
  }
  return 0.5 * (p.x.back() - p.x.front());
}

void validate(const TestFunction::Form& form) {
  std::visit(overloaded{
                 [](const Indicator& f) {
                   if (!(f.half_width > 0)) throw ConfigError("eta", "half-width must be positive");
                 },
                 [](const Hat& f) {
                   if (!(f.half_width > 0)) throw ConfigError("eta", "half-width must be positive");
                 },
                 [](const SmoothBump& f) {
                   if (!(f.half_width > 0)) throw ConfigError("eta", "half-width must be positive");
                 },
                 [](const Fejer& f) {
                   if (!(f.delta > 0)) throw ConfigError("eta", "delta must be positive");
                 },
                 [](const PiecewiseLinear& p) {
                   if (p.x.size() != p.y.size()) throw ConfigError("eta", "knot arrays differ in length");
                   if (p.x.empty()) return;
                   if (p.x.size() < 2) throw ConfigError("eta", "need at least two knots");
                   for (std::size_t i = 1; i < p.x.size(); ++i) {
                     if (!(p.x[i] > p.x[i - 1])) throw ConfigError("eta", "knots must be strictly ascending");
                   }
                   if (p.y.front() != 0.0 || p.y.back() != 0.0) {
                     throw ConfigError("eta", "boundary knot values must be zero");
                   }
                 },
             },
             form);
}

}  // namespace

TestFunction::TestFunction(Form form) : form_(std::move(form)) { validate(form_); }

double TestFunction::operator()(double x) const {
  return std::visit(overloaded{
                        [x](const Indicator& f) { return (x >= -f.half_width && x < f.half_width) ? 1.0 : 0.0; },
                        [x](const Hat& f) { return std::max(0.0, 1.0 - std::abs(x) / f.half_width); },
                        [x](const SmoothBump& f) {
                          const double u = x / f.half_width;
                          if (std::abs(u) >= 1.0) return 0.0;
                          const double v = 1.0 - u * u;
                          return v * v * v;
                        },
                        [x](const Fejer& f) {
                          const double s = sinc(f.delta * x);
                          return f.delta * s * s;
                        },
                        [x](const PiecewiseLinear& p) { return pl_value(p, x); },
                    },
                    form_);
}

std::string TestFunction::name() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Indicator& f) { os << "Indicator(" << f.half_width << ")"; },
                 [&](const Hat& f) { os << "Hat(" << f.half_width << ")"; },
                 [&](const SmoothBump& f) { os << "SmoothBump(" << f.half_width << ")"; },
                 [&](const Fejer& f) { os << "Fejer(" << f.delta << ")"; },
                 [&](const PiecewiseLinear& p) { os << "PiecewiseLinear(" << p.x.size() << " knots)"; },
             },
             form_);
  return os.str();
}

std::pair<double, double> TestFunction::support() const {
  return std::visit(overloaded{
                        [](const Indicator& f) { return std::pair{-f.half_width, f.half_width}; },
                        [](const Hat& f) { return std::pair{-f.half_width, f.half_width}; },
                        [](const SmoothBump& f) { return std::pair{-f.half_width, f.half_width}; },
                        [](const Fejer&) { return std::pair{-kInf, kInf}; },
                        [](const PiecewiseLinear& p) {
                          return p.x.empty() ? std::pair{0.0, 0.0} : std::pair{p.x.front(), p.x.back()};
                        },
                    },
                    form_);
}

double TestFunction::support_radius() const {
  const auto [lo, hi] = support();
  return std::max(std::abs(lo), std::abs(hi));
}

double TestFunction::total_variation() const {
  return std::visit(overloaded{
                        [](const Indicator&) { return 2.0; },
                        [](const Hat&) { return 2.0; },
                        [](const SmoothBump&) { return 2.0; },
                        [](const Fejer& f) { return f.delta * sinc2_variation(); },
                        [](const PiecewiseLinear& p) {
                          double tv = 0.0;
                          for (std::size_t i = 1; i < p.y.size(); ++i) tv += std::abs(p.y[i] - p.y[i - 1]);
                          return tv;
                        },
                    },
                    form_);
}

double TestFunction::integral() const {
  return std::visit(overloaded{
                        [](const Indicator& f) { return 2.0 * f.half_width; },
                        [](const Hat& f) { return f.half_width; },
                        [](const SmoothBump& f) { return 32.0 / 35.0 * f.half_width; },
                        [](const Fejer&) { return 1.0; },
                        [](const PiecewiseLinear& p) {
                          double s = 0.0;
                          for (std::size_t i = 1; i < p.x.size(); ++i) {
                            s += 0.5 * (p.y[i] + p.y[i - 1]) * (p.x[i] - p.x[i - 1]);
                          }
                          return s;
                        },
                    },
                    form_);
}

double TestFunction::l1_norm() const {
  if (const auto* p = std::get_if<PiecewiseLinear>(&form_)) {
    double s = 0.0;
    for (std::size_t i = 1; i < p->x.size(); ++i) {
      const double a = p->y[i - 1], b = p->y[i], h = p->x[i] - p->x[i - 1];
      if (a * b >= 0.0) {
        s += 0.5 * std::abs(a + b) * h;
      } else {
        s += 0.5 * (a * a + b * b) / std::abs(b - a) * h;
      }
    }
    return s;
  }
  return integral();
}

double TestFunction::sup_norm() const {
  return std::visit(overloaded{
                        [](const Fejer& f) { return f.delta; },
                        [](const PiecewiseLinear& p) {
                          double m = 0.0;
                          for (double v : p.y) m = std::max(m, std::abs(v));
                          return m;
                        },
                        [](const auto&) { return 1.0; },
                    },
                    form_);
}

bool TestFunction::is_zero() const {
  if (const auto* p = std::get_if<PiecewiseLinear>(&form_)) {
    return std::all_of(p->y.begin(), p->y.end(), [](double v) { return v == 0.0; });
  }
  return false;
}

std::vector<double> TestFunction::breakpoints() const {
  return std::visit(overloaded{
                        [](const Indicator& f) { return std::vector<double>{-f.half_width, f.half_width}; },
                        [](const Hat& f) { return std::vector<double>{-f.half_width, 0.0, f.half_width}; },
                        [](const SmoothBump& f) { return std::vector<double>{-f.half_width, f.half_width}; },
                        [](const Fejer&) { return std::vector<double>{}; },
                        [](const PiecewiseLinear& p) { return p.x; },
                    },
                    form_);
}

TestFunction load_knot_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("eta", "cannot open knot file " + path.string());
  PiecewiseLinear p;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x = 0, y = 0;
    if (!(ls >> x >> y)) {
      if (p.x.empty()) continue;  // header row
      throw ConfigError("eta", "bad knot row '" + line + "' in " + path.string());
    }
    p.x.push_back(x);
    p.y.push_back(y);
  }
  return TestFunction(std::move(p));
}

TestFunction parse_test_function(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    std::string kind = spec.substr(0, colon);
    std::transform(kind.begin(), kind.end(), kind.begin(), [](unsigned char c) { return std::tolower(c); });
    double v = 0.0;
    try {
      v = std::stod(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("eta", "bad parameter in '" + spec + "'");
    }
    if (kind == "indicator") return TestFunction(Indicator{v});
    if (kind == "hat") return TestFunction(Hat{v});
    if (kind == "bump" || kind == "smoothbump") return TestFunction(SmoothBump{v});
    if (kind == "fejer") return TestFunction(Fejer{v});
  }
  if (std::filesystem::exists(spec)) return load_knot_file(spec);
  throw ConfigError("eta", "unknown test function '" + spec + "'");
}

SpectralEvaluator fourier(const TestFunction& eta) {
  return std::visit(
      overloaded{
          [](const Indicator& f) {
            const double h = f.half_width;
            return SpectralEvaluator([h](double xi) -> cd { return 2.0 * h * sinc(2.0 * h * xi); },
                                     std::nullopt, true, 0.5 / h);
          },
          [](const Hat& f) {
            const double h = f.half_width;
            return SpectralEvaluator(
                [h](double xi) -> cd {
                  const double s = sinc(h * xi);
                  return h * s * s;
                },
                std::nullopt, true, 1.0 / h);
          },
          [](const SmoothBump& f) {
            const double h = f.half_width;
            return SpectralEvaluator([h](double xi) -> cd { return h * bump_profile(2.0 * kPi * h * xi); },
                                     std::nullopt, true, 0.5 / h);
          },
          [](const Fejer& f) {
            const double d = f.delta;
            return SpectralEvaluator([d](double xi) -> cd { return std::max(0.0, 1.0 - std::abs(xi) / d); },
                                     d, true, d, {-d, 0.0, d});
          },
          [](const PiecewiseLinear& p) {
            auto s = make_pl_spectrum(p);
            const double r = std::max(pl_effective_radius(p), 1e-9);
            return SpectralEvaluator([s](double xi) { return (*s)(xi); }, std::nullopt, true, 0.5 / r);
          },
      },
      eta.form());
}

std::complex<double> fourier_quadrature(const TestFunction& eta, double xi) {
  const auto [lo, hi] = eta.support();
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Unsupported("quadrature transform needs compact support: " + eta.name());
  }
  const auto br = eta.breakpoints();
  std::vector<double> breaks(br.begin(), br.end());
  if (xi != 0.0) {
    const double step = 0.25 / std::abs(xi);
    for (double x = lo + step; x < hi; x += step) breaks.push_back(x);
  }
  const double w = -2.0 * kPi * xi;
  const double re = integrate([&](double x) { return eta(x) * std::cos(w * x); }, lo, hi, 1e-12, breaks);
  const double im = integrate([&](double x) { return eta(x) * std::sin(w * x); }, lo, hi, 1e-12, breaks);
  return {re, im};
}

std::complex<double> pair_integral(const SpectralEvaluator& u, const SpectralEvaluator& v, double R) {
  if (u.support()) R = std::min(R, *u.support());
  if (v.support()) R = std::min(R, *v.support());
  if (!std::isfinite(R)) throw Unsupported("pair integral over the whole line needs a compact transform");
  if (R <= 0.0) return 0.0;
  std::vector<double> breaks;
  for (double k : u.kinks()) breaks.push_back(std::abs(k));
  for (double k : v.kinks()) breaks.push_back(std::abs(k));
  const double panel = std::min(u.panel(), v.panel());
  for (double x = panel; x < R; x += panel) breaks.push_back(x);
  auto sym = [&](double x) { return x * (u(x) * v(-x) + u(-x) * v(x)); };
  const double re = integrate([&](double x) { return sym(x).real(); }, 0.0, R, 1e-11, breaks);
  const double im = integrate([&](double x) { return sym(x).imag(); }, 0.0, R, 1e-11, breaks);
  return {re, im};
}

double variance_functional(const TestFunction& eta, double n) {
  if (n <= 0.0) return 0.0;
  const SpectralEvaluator s = fourier(eta);
  return pair_integral(s, SpectralEvaluator([&s](double x) { return std::conj(s(-x)); }, s.support(),
                                            true, s.panel(), std::vector<double>(s.kinks().begin(), s.kinks().end())),
                       n)
      .real();
}

double SmoothingKernel::profile(double xi) const {
  const double u = std::abs(2.0 * xi / rho);
  if (u >= 2.0) return 0.0;
  if (u <= 1.0) return 1.5 * (2.0 / 3.0 - u * u + 0.5 * u * u * u);
  const double w = 2.0 - u;
  return 1.5 * w * w * w / 6.0;
}

double SmoothingKernel::spatial(double x) const {
  const double s = sinc(0.5 * rho * x);
  const double s2 = s * s;
  return 0.75 * rho * s2 * s2;
}

TestFunction smooth_truncate(const TestFunction& eta, double H, const SmoothingKernel& kernel) {
  if (!(H > 0)) throw ConfigError("H", "must be positive");
  if (eta.is_zero()) return TestFunction();
  const auto [lo, hi] = eta.support();
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Unsupported("smooth_truncate needs compact support: " + eta.name());
  }
  const double rho = kernel.rho;
  const double w = 1.0 / (rho * H);  // kernel length scale; zeros every 2w
  const std::vector<double> kinks = eta.breakpoints();

  auto conv = [&](double x) {
    std::vector<double> breaks = kinks;
    const double k_lo = std::ceil((lo - x) / (2.0 * w));
    const double k_hi = std::floor((hi - x) / (2.0 * w));
    for (double k = k_lo; k <= k_hi; k += 1.0) breaks.push_back(x + 2.0 * w * k);
    return integrate([&](double y) { return eta(y) * kernel.spatial_scaled(x - y, H); }, lo, hi, 1e-13,
                     breaks);
  };

  // Both tails together carry at most 8 |eta|_1 / (pi^4 rho^3 H^3 d^3) of L1 mass.
  constexpr double kTailBudget = 2e-7;
  constexpr double kInterpBudget = 5e-7;
  const double l1 = eta.l1_norm();
  const double d = std::cbrt(8.0 * l1 / (std::pow(kPi, 4) * rho * rho * rho * H * H * H * kTailBudget));
  const double a = lo - d, b = hi + d;
  const double dev_tol = 1.5 * kInterpBudget / (b - a);

  std::vector<double> seeds;
  const double step = 0.5 * w;
  for (double x = a; x < b; x += step) seeds.push_back(x);
  seeds.push_back(b);
  for (double k : kinks) seeds.push_back(k);
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  std::vector<double> fs(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { fs[i] = conv(seeds[i]); });

  PiecewiseLinear out;
  std::function<void(double, double, double, double, int)> refine = [&](double xa, double fa, double xb,
                                                                        double fb, int depth) {
    const double xm = 0.5 * (xa + xb);
    const double fm = conv(xm);
    if (depth >= 40 || std::abs(fm - 0.5 * (fa + fb)) <= dev_tol) {
      out.x.push_back(xm);
      out.y.push_back(fm);
      out.x.push_back(xb);
      out.y.push_back(fb);
      return;
    }
    refine(xa, fa, xm, fm, depth + 1);
    refine(xm, fm, xb, fb, depth + 1);
  };
  out.x.push_back(seeds.front());
  out.y.push_back(0.0);
  for (std::size_t i = 0; i + 1 < seeds.size(); ++i) {
    refine(seeds[i], i == 0 ? 0.0 : fs[i], seeds[i + 1], (i + 2 == seeds.size()) ? 0.0 : fs[i + 1], 0);
  }
  out.y.back() = 0.0;
  return TestFunction(std::move(out));
}

double StepFunction::operator()(double x) const {
  const long nu = static_cast<long>(std::floor(x / width + 0.5));
  const long i = nu - first;
  if (i < 0 || i >= static_cast<long>(heights.size())) return 0.0;
  return heights[static_cast<std::size_t>(i)];
}

double StepFunction::integral() const {
  double s = 0.0;
  for (double h : heights) s += h * width;
  return s;
}

StepFunction maximal_envelope(const TestFunction& eta, double width) {
  if (!(width > 0)) throw ConfigError("k", "envelope width must be positive");
  const auto [lo, hi] = eta.support();
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Unsupported("maximal envelope needs compact support: " + eta.name());
  }
  StepFunction m;
  m.width = width;
  m.first = static_cast<long>(std::floor(lo / width + 0.5)) - 1;
  const long last = static_cast<long>(std::floor(hi / width + 0.5)) + 1;
  for (long nu = m.first; nu <= last; ++nu) {
    const auto [a, b] = m.interval(nu);  // [a, b)
    const double sup = std::visit(
        overloaded{
            [&](const Indicator& f) { return (std::max(a, -f.half_width) < std::min(b, f.half_width)) ? 1.0 : 0.0; },
            [&](const PiecewiseLinear& p) {
              double s = std::max(std::abs(pl_value(p, a)), std::abs(pl_value(p, b)));
              auto it = std::lower_bound(p.x.begin(), p.x.end(), a);
              for (; it != p.x.end() && *it < b; ++it) {
                s = std::max(s, std::abs(p.y[static_cast<std::size_t>(it - p.x.begin())]));
              }
              return s;
            },
            [&](const auto&) {
              // Even and nonincreasing in |x|: the sup sits at the point nearest 0.
              const double dist = (a <= 0.0 && b >= 0.0) ? 0.0 : std::min(std::abs(a), std::abs(b));
              return std::abs(eta(dist));
            },
        },
        eta.form());
    m.heights.push_back(sup);
  }
  return m;
}

namespace {

double weighted_l1(const TestFunction& f, const TestFunction& g, const std::function<double(double)>& w) {
  const auto [fl, fh] = f.support();
  const auto [gl, gh] = g.support();
  const double lo = std::min(fl, gl), hi = std::max(fh, gh);
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw Unsupported("L1 distance needs compact supports");
  if (!(lo < hi)) return 0.0;
  std::vector<double> breaks = f.breakpoints();
  const auto gb = g.breakpoints();
  breaks.insert(breaks.end(), gb.begin(), gb.end());
  breaks.push_back(0.0);
  return integrate([&](double t) { return std::abs(f(t) - g(t)) * w(t); }, lo, hi, 1e-11, breaks);
}

}  // namespace

double l1_distance(const TestFunction& f, const TestFunction& g) {
  return weighted_l1(f, g, [](double) { return 1.0; });
}

double l1_log_distance(const TestFunction& f, const TestFunction& g) {
  return weighted_l1(f, g, [](double t) { return std::log(std::abs(t) + 2.0); });
}

double total_variation(const TestFunction& eta) { return eta.total_variation(); }

}  // namespace zmeso
