#include "zmeso/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace zmeso {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

struct Panel {
  double value, error, l1;
};

Panel gk_panel(const std::function<double(double)>& f, double a, double b) {
  Panel p{};
  p.value = GK::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
  // The depth-0 error estimate comes back in the [-1, 1] variable.
  p.error *= 0.5 * (b - a);
  return p;
}

// Bisection against a fixed absolute tolerance. Boost's adaptive driver
// compares that unscaled estimate with a scaled tolerance, so short
// intervals descend to the depth limit.
double adapt(const std::function<double(double)>& f, double a, double b, const Panel& p, double abs_tol,
             int depth) {
  if (depth == 0 || p.error <= abs_tol || !(std::isfinite(p.error))) return p.value;
  const double m = 0.5 * (a + b);
  if (!(m > a && m < b)) return p.value;
  const Panel left = gk_panel(f, a, m);
  const Panel right = gk_panel(f, m, b);
  if (std::abs(left.value + right.value - p.value) <= 0.5 * abs_tol && left.error + right.error <= abs_tol)
    return left.value + right.value;
  return adapt(f, a, m, left, 0.5 * abs_tol, depth - 1) + adapt(f, m, b, right, 0.5 * abs_tol, depth - 1);
}

// Common absolute target rel_tol * (total L1) over all pieces, so negligible
// pieces are not refined to their own relative precision.
double integrate_pieces(const std::function<double(double)>& f, std::span<const double> pts, double rel_tol) {
  const std::size_t m = pts.size() - 1;
  std::vector<Panel> panels(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    panels[i] = gk_panel(f, pts[i], pts[i + 1]);
    total += panels[i].l1;
  }
  const double abs_tol = std::max(rel_tol * total, std::numeric_limits<double>::min());
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double share = abs_tol * std::max(panels[i].l1 / total, 1.0 / static_cast<double>(m));
    sum += adapt(f, pts[i], pts[i + 1], panels[i], total > 0.0 ? share : abs_tol, 30);
  }
  return sum;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 std::span<const double> breaks) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, rel_tol, breaks);
  std::vector<double> pts{a};
  for (double x : breaks) {
    if (x > a && x < b) pts.push_back(x);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return integrate_pieces(f, pts, rel_tol);
}

double integrate_panels(const std::function<double(double)>& f, double a, double b, double panel,
                        double rel_tol) {
  if (a == b) return 0.0;
  if (a > b) return -integrate_panels(f, b, a, panel, rel_tol);
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / panel));
  const double h = (b - a) / static_cast<double>(n);
  std::vector<double> pts(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i] = a + h * static_cast<double>(i);
  pts[n] = b;
  return integrate_pieces(f, pts, rel_tol);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

JackknifeResult jackknife(std::size_t n_samples, std::size_t blocks,
                          const std::function<double(std::span<const std::size_t>)>& stat) {
  std::vector<std::size_t> all(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) all[i] = i;
  JackknifeResult r;
  r.estimate = stat(all);
  blocks = std::min(blocks, n_samples);
  if (blocks < 2) return r;
  std::vector<double> loo(blocks);
  std::vector<std::size_t> kept;
  kept.reserve(n_samples);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = b * n_samples / blocks;
    const std::size_t hi = (b + 1) * n_samples / blocks;
    kept.clear();
    for (std::size_t i = 0; i < n_samples; ++i) {
      if (i < lo || i >= hi) kept.push_back(i);
    }
    loo[b] = stat(kept);
  }
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= static_cast<double>(blocks);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  const double nb = static_cast<double>(blocks);
  r.stderr_ = std::sqrt((nb - 1.0) / nb * ss);
  return r;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> sigma) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  LinearFit fit;
  fit.slope = (sw * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  if (!sigma.empty()) {
    fit.slope_stderr = std::sqrt(sw / det);
  } else if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / static_cast<double>(x.size() - 2) * sw / det);
  }
  return fit;
}

unsigned worker_count() {
  if (const char* env = std::getenv("ZMESO_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::size_t chunk = std::max<std::size_t>(1, n / (16 * workers));
  auto run = [&] {
    for (;;) {
      const std::size_t lo = next.fetch_add(chunk);
      if (lo >= n) return;
      const std::size_t hi = std::min(n, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace zmeso
