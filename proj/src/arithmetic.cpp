#include "zmeso/arithmetic.hpp"

#include "zmeso/error.hpp"
#include "zmeso/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace zmeso {

namespace {

using cd = std::complex<double>;

std::vector<std::uint32_t> small_primes(std::uint32_t n) {
  std::vector<char> comp(n + 1, 0);
  std::vector<std::uint32_t> out;
  for (std::uint64_t i = 2; i <= n; ++i) {
    if (comp[i]) continue;
    out.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= n; j += i) comp[j] = 1;
  }
  return out;
}

}  // namespace

SieveTable build_sieve(std::uint64_t limit, bool with_psi, std::size_t memory_budget) {
  if (limit < 2) throw ConfigError("sieve-limit", "must be at least 2");
  if (limit > std::numeric_limits<std::uint32_t>::max()) {
    throw ResourceExceeded("sieve limit " + std::to_string(limit) + " exceeds 32-bit storage");
  }
  // pi(x) < 1.26 x / log x; three u32 arrays plus an optional f64 prefix.
  const double lx = std::log(static_cast<double>(limit));
  const double count = 1.26 * static_cast<double>(limit) / std::max(1.0, lx) + 64.0;
  const double bytes = count * (12.0 + (with_psi ? 8.0 : 0.0)) + (1u << 18);
  if (bytes > static_cast<double>(memory_budget)) {
    throw ResourceExceeded("sieve to " + std::to_string(limit) + " needs ~" +
                           std::to_string(static_cast<long long>(bytes / (1 << 20))) + " MiB, budget " +
                           std::to_string(memory_budget >> 20) + " MiB");
  }

  SieveTable s;
  s.limit_ = limit;
  const auto root = static_cast<std::uint32_t>(std::sqrt(static_cast<double>(limit))) + 1;
  const std::vector<std::uint32_t> base = small_primes(root);

  constexpr std::uint64_t kSegment = 1u << 18;
  std::vector<char> seg(kSegment);
  s.primes_.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t lo = 2; lo <= limit; lo += kSegment) {
    const std::uint64_t hi = std::min(limit + 1, lo + kSegment);
    std::fill(seg.begin(), seg.begin() + static_cast<std::ptrdiff_t>(hi - lo), 0);
    for (std::uint32_t p : base) {
      const std::uint64_t pp = std::uint64_t{p} * p;
      if (pp >= hi) break;
      std::uint64_t start = std::max(pp, (lo + p - 1) / p * p);
      for (std::uint64_t j = start; j < hi; j += p) seg[j - lo] = 1;
    }
    for (std::uint64_t n = lo; n < hi; ++n) {
      if (!seg[n - lo]) s.primes_.push_back(static_cast<std::uint32_t>(n));
    }
  }

  // Prime powers p^m, m >= 2, all with p <= sqrt(limit).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> higher;
  for (std::uint32_t p : base) {
    std::uint64_t q = std::uint64_t{p} * p;
    while (q <= limit) {
      higher.push_back({static_cast<std::uint32_t>(q), p});
      q *= p;
    }
  }
  std::sort(higher.begin(), higher.end());
  s.powers_.reserve(s.primes_.size() + higher.size());
  s.bases_.reserve(s.primes_.size() + higher.size());
  std::size_t i = 0, j = 0;
  while (i < s.primes_.size() || j < higher.size()) {
    if (j == higher.size() || (i < s.primes_.size() && s.primes_[i] < higher[j].first)) {
      s.powers_.push_back(s.primes_[i]);
      s.bases_.push_back(s.primes_[i]);
      ++i;
    } else {
      s.powers_.push_back(higher[j].first);
      s.bases_.push_back(higher[j].second);
      ++j;
    }
  }
  if (with_psi) {
    s.psi_prefix_.resize(s.powers_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < s.powers_.size(); ++k) {
      acc += std::log(static_cast<double>(s.bases_[k]));
      s.psi_prefix_[k] = acc;
    }
  }
  return s;
}

double SieveTable::lambda(std::uint64_t n) const {
  if (n > limit_) throw SieveTooSmall("Lambda(" + std::to_string(n) + ") beyond sieve limit");
  const auto it = std::lower_bound(powers_.begin(), powers_.end(), n);
  if (it == powers_.end() || *it != n) return 0.0;
  return std::log(static_cast<double>(bases_[static_cast<std::size_t>(it - powers_.begin())]));
}

double SieveTable::psi(double x) const {
  if (x > static_cast<double>(limit_)) throw SieveTooSmall("psi beyond sieve limit");
  if (x < 2.0) return 0.0;
  const auto end = std::upper_bound(powers_.begin(), powers_.end(), static_cast<std::uint64_t>(x),
                                    [](std::uint64_t v, std::uint32_t e) { return v < e; });
  const auto n = static_cast<std::size_t>(end - powers_.begin());
  if (n == 0) return 0.0;
  if (!psi_prefix_.empty()) return psi_prefix_[n - 1];
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += std::log(static_cast<double>(bases_[k]));
  return acc;
}

PntSums pnt_weighted_sum(const TestFunction& f, double H, const SieveTable& sieve) {
  const auto [lo, hi] = f.support();
  if (!std::isfinite(hi)) throw Unsupported("prime sum needs compact support: " + f.name());
  PntSums r;
  if (f.is_zero() || hi <= 0.0) return r;
  const double x_max = std::exp(H * hi);
  if (x_max > static_cast<double>(sieve.limit()) + 0.5) {
    throw SieveTooSmall("primes to e^(H R) = " + std::to_string(x_max) + " needed, sieve limit " +
                        std::to_string(sieve.limit()));
  }
  double acc = 0.0;
  for (std::uint32_t p : sieve.primes()) {
    if (p > x_max) break;
    const double lp = std::log(static_cast<double>(p));
    acc += lp * lp / p * f(lp / H);
  }
  r.lhs = acc / (H * H);
  std::vector<double> breaks = f.breakpoints();
  r.rhs = integrate([&](double x) { return x * f(x); }, std::max(0.0, lo), hi, 1e-13, breaks);
  return r;
}

namespace {

// Partitions of {0..k-1} into blocks of size >= 2.
std::vector<std::vector<std::vector<int>>> block_partitions(int k) {
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::vector<int>> cur;
  std::function<void(int)> rec = [&](int i) {
    if (i == k) {
      for (auto& b : cur) {
        if (b.size() < 2) return;
      }
      out.push_back(cur);
      return;
    }
    // Index access: the recursion below may reallocate `cur`.
    for (std::size_t b = 0; b < cur.size(); ++b) {
      cur[b].push_back(i);
      rec(i + 1);
      cur[b].pop_back();
    }
    cur.push_back({i});
    rec(i + 1);
    cur.pop_back();
  };
  rec(0);
  return out;
}

struct BlockEval {
  std::span<const SpectralEvaluator> u;
  std::vector<double> log_x;  // log of the prime-power bound per coordinate
  double H;
  bool ones_only;

  // F_B(p): sum over exponents a_l >= 1 and signs with sum eps_l a_l = 0.
  cd operator()(const std::vector<int>& block, double lp) const {
    const std::size_t m = block.size();
    std::vector<std::vector<cd>> plus(m), minus(m);
    for (std::size_t i = 0; i < m; ++i) {
      const int l = block[i];
      int amax = static_cast<int>(std::floor(log_x[l] / lp + 1e-12));
      if (ones_only) amax = std::min(amax, 1);
      if (amax < 1) return 0.0;
      for (int a = 1; a <= amax; ++a) {
        const double w = lp * std::exp(-0.5 * a * lp);
        plus[i].push_back(w * u[l](a * lp / H));
        minus[i].push_back(w * u[l](-a * lp / H));
      }
    }
    cd total = 0.0;
    std::function<void(std::size_t, int, cd)> rec = [&](std::size_t i, int balance, cd prod) {
      if (i == m) {
        if (balance == 0) total += prod;
        return;
      }
      for (std::size_t a = 1; a <= plus[i].size(); ++a) {
        const int ai = static_cast<int>(a);
        rec(i + 1, balance + ai, prod * plus[i][a - 1]);
        rec(i + 1, balance - ai, prod * minus[i][a - 1]);
      }
    };
    rec(0, 0, 1.0);
    return total;
  }
};

cd diagonal_sum_impl(std::span<const SpectralEvaluator> u, double H, const SieveTable& sieve, bool ones_only) {
  const int k = static_cast<int>(u.size());
  if (k > 4) throw Unsupported("exact diagonal enumeration is limited to k <= 4");
  if (k == 0) return 1.0;
  BlockEval eval{u, {}, H, ones_only};
  double log_x_max = 0.0;
  for (const auto& s : u) {
    if (!s.support()) throw Unsupported("diagonal sum needs compactly supported transforms");
    eval.log_x.push_back(H * *s.support());
    log_x_max = std::max(log_x_max, eval.log_x.back());
  }
  if (std::exp(log_x_max) > static_cast<double>(sieve.limit()) + 0.5) {
    throw SieveTooSmall("prime powers to " + std::to_string(std::exp(log_x_max)) + " needed, sieve limit " +
                        std::to_string(sieve.limit()));
  }
  const auto primes = sieve.primes();
  const std::size_t np = static_cast<std::size_t>(
      std::upper_bound(primes.begin(), primes.end(), std::exp(log_x_max),
                       [](double v, std::uint32_t p) { return v < static_cast<double>(p); }) -
      primes.begin());

  const auto partitions = block_partitions(k);
  // Collect distinct blocks; per block keep sum_p F and, for multi-block
  // partitions, sum_p F_A F_B over coinciding primes.
  std::map<std::vector<int>, std::size_t> index;
  std::vector<std::vector<int>> blocks;
  for (const auto& part : partitions) {
    for (const auto& b : part) {
      if (!index.count(b)) {
        index[b] = blocks.size();
        blocks.push_back(b);
      }
    }
  }
  const std::size_t nb = blocks.size();
  const std::size_t np_pairs = nb * nb;
  constexpr std::size_t kChunks = 64;
  std::vector<std::vector<cd>> single(kChunks, std::vector<cd>(nb, 0.0));
  std::vector<std::vector<cd>> cross(kChunks, std::vector<cd>(np_pairs, 0.0));
  parallel_for(kChunks, [&](std::size_t c) {
    const std::size_t lo = c * np / kChunks, hi = (c + 1) * np / kChunks;
    std::vector<cd> f(nb);
    for (std::size_t i = lo; i < hi; ++i) {
      const double lp = std::log(static_cast<double>(primes[i]));
      for (std::size_t b = 0; b < nb; ++b) {
        f[b] = eval(blocks[b], lp);
        single[c][b] += f[b];
      }
      for (std::size_t a = 0; a < nb; ++a) {
        for (std::size_t b = 0; b < nb; ++b) cross[c][a * nb + b] += f[a] * f[b];
      }
    }
  });
  std::vector<cd> s1(nb, 0.0), s2(np_pairs, 0.0);
  for (std::size_t c = 0; c < kChunks; ++c) {
    for (std::size_t b = 0; b < nb; ++b) s1[b] += single[c][b];
    for (std::size_t b = 0; b < np_pairs; ++b) s2[b] += cross[c][b];
  }
  cd total = 0.0;
  for (const auto& part : partitions) {
    if (part.size() == 1) {
      total += s1[index[part[0]]];
    } else if (part.size() == 2) {
      const std::size_t a = index[part[0]], b = index[part[1]];
      total += s1[a] * s1[b] - s2[a * nb + b];
    } else {
      throw Unsupported("more than two prime blocks");
    }
  }
  return std::pow(-1.0 / H, k) * total;
}

}  // namespace

std::complex<double> diagonal_moment_sum(std::span<const SpectralEvaluator> u, double H, const SieveTable& sieve) {
  return diagonal_sum_impl(u, H, sieve, false);
}

std::complex<double> diagonal_moment_sum_higher_powers(std::span<const SpectralEvaluator> u, double H,
                                                       const SieveTable& sieve) {
  return diagonal_sum_impl(u, H, sieve, false) - diagonal_sum_impl(u, H, sieve, true);
}

double diagonal_moment_sum(std::span<const TestFunction> etas, double T, const SieveTable& sieve, int k) {
  if (static_cast<int>(etas.size()) != k) throw ConfigError("k", "need one test function per factor");
  if (k > 4) throw Unsupported("exact diagonal enumeration is limited to k <= 4");
  std::vector<SpectralEvaluator> u;
  double delta = 0.0;
  for (const auto& e : etas) {
    u.push_back(fourier(e));
    if (!u.back().support()) throw Unsupported("diagonal sum needs compactly supported transforms: " + e.name());
    delta += *u.back().support();
  }
  if (!(delta < 2.0)) throw SupportBudgetExceeded("sum of transform supports must be below 2");
  return diagonal_moment_sum(u, std::log(T), sieve).real();
}

std::vector<std::vector<std::pair<int, int>>> perfect_matchings(std::span<const int> labels) {
  std::vector<std::vector<std::pair<int, int>>> out;
  if (labels.size() % 2) return out;
  std::vector<std::pair<int, int>> cur;
  std::vector<int> rest(labels.begin(), labels.end());
  std::function<void(std::vector<int>&)> rec = [&](std::vector<int>& r) {
    if (r.empty()) {
      out.push_back(cur);
      return;
    }
    const int first = r[0];
    for (std::size_t j = 1; j < r.size(); ++j) {
      const int partner = r[j];
      std::vector<int> next;
      for (std::size_t i = 1; i < r.size(); ++i) {
        if (i != j) next.push_back(r[i]);
      }
      cur.push_back({first, partner});
      rec(next);
      cur.pop_back();
    }
  };
  rec(rest);
  return out;
}

PairingPrediction pairing_sum(std::span<const SpectralEvaluator> u, std::span<const int> J, double R) {
  PairingPrediction r;
  const auto matchings = perfect_matchings(J);
  r.pairings = matchings.size();
  if (J.empty()) {
    r.value = 1.0;
    r.pairings = 1;
    return r;
  }
  std::map<std::pair<int, int>, cd> cache;
  for (const auto& m : matchings) {
    cd prod = 1.0;
    for (auto [i, j] : m) {
      const auto key = std::minmax(i, j);
      auto it = cache.find(key);
      if (it == cache.end()) {
        it = cache.emplace(key, pair_integral(u[static_cast<std::size_t>(key.first)],
                                              u[static_cast<std::size_t>(key.second)], R))
                 .first;
      }
      prod *= it->second;
    }
    r.value += prod;
  }
  return r;
}

double pairing_sum(std::span<const TestFunction> etas, std::span<const int> J, double R) {
  std::vector<SpectralEvaluator> u;
  for (const auto& e : etas) u.push_back(fourier(e));
  return pairing_sum(u, J, R).value.real();
}

std::vector<SpectralEvaluator> rescaled_transforms(std::span<const TestFunction> etas, double n_of_T,
                                                   bool* smoothed) {
  const int k = static_cast<int>(etas.size());
  std::vector<SpectralEvaluator> u;
  double delta = 0.0;
  bool compact = true;
  for (const auto& e : etas) {
    u.push_back(fourier(e));
    if (u.back().support()) {
      delta += *u.back().support();
    } else {
      compact = false;
    }
  }
  const bool smooth = !compact || !(delta < 2.0 * n_of_T);
  if (smoothed) *smoothed = smooth;
  if (!smooth) return u;
  const SmoothingKernel K = SmoothingKernel::for_order(k);
  const double cut = K.rho * n_of_T;
  std::vector<SpectralEvaluator> out;
  for (const auto& s : u) {
    std::vector<double> kinks(s.kinks().begin(), s.kinks().end());
    for (double f : {-2.0, -1.0, 0.0, 1.0, 2.0}) kinks.push_back(0.5 * f * cut);
    const double support = s.support() ? std::min(*s.support(), cut) : cut;
    out.emplace_back([s, K, n_of_T](double x) { return K.profile(x / n_of_T) * s(x); }, support, s.closed_form(),
                     s.panel(), kinks);
  }
  return out;
}

namespace {

// sup |u| + sup |u'| + sup |u''| on the support, by differences on a grid
// whose stencils avoid the kinks.
double c2_norm(const SpectralEvaluator& u) {
  const double R = *u.support();
  constexpr int kGrid = 4000;
  const double h = 2.0 * R / kGrid;
  std::vector<double> v(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) v[i] = std::abs(u(-R + h * i));
  double s0 = 0, s1 = 0, s2 = 0;
  auto near_kink = [&](double x) {
    for (double k : u.kinks()) {
      if (std::abs(x - k) <= 1.01 * h) return true;
    }
    return std::abs(std::abs(x) - R) <= 1.01 * h;
  };
  for (int i = 1; i < kGrid; ++i) {
    const double x = -R + h * i;
    s0 = std::max(s0, v[i]);
    if (near_kink(x)) continue;
    const cd a = u(x - h), b = u(x), c = u(x + h);
    s1 = std::max(s1, std::abs(c - a) / (2 * h));
    s2 = std::max(s2, std::abs(c - 2.0 * b + a) / (h * h));
  }
  return s0 + s1 + s2;
}

}  // namespace

PredictedMoment predicted_moment(std::span<const TestFunction> etas, double T, double n_of_T,
                                 const SieveTable& sieve) {
  const int k = static_cast<int>(etas.size());
  PredictedMoment pm;
  const std::vector<SpectralEvaluator> u = rescaled_transforms(etas, n_of_T, &pm.smoothed);
  const double H = std::log(T) / n_of_T;
  std::vector<int> all(static_cast<std::size_t>(k));
  std::iota(all.begin(), all.end(), 0);
  pm.value = pairing_sum(u, all).value.real();
  pm.diagonal = k <= 4 ? diagonal_moment_sum(u, H, sieve).real() : std::numeric_limits<double>::quiet_NaN();

  std::vector<double> norms, sups;
  double delta = 0.0;
  for (const auto& s : u) {
    norms.push_back(c2_norm(s));
    double m = 0.0;
    for (int i = 0; i <= 2000; ++i) m = std::max(m, std::abs(s(-*s.support() + *s.support() * i / 1000.0)));
    sups.push_back(m);
    delta += *s.support() / n_of_T;
  }
  double env = std::pow(T, delta / 2.0 - 1.0);
  for (double s : sups) env *= s / H;
  for (unsigned mask = 0; mask + 1 < (1u << k); ++mask) {
    std::vector<int> J;
    double factor = 1.0;
    for (int l = 0; l < k; ++l) {
      if (mask & (1u << l)) {
        J.push_back(l);
      } else {
        factor *= norms[static_cast<std::size_t>(l)] / H;
      }
    }
    if (J.size() % 2) continue;
    env += std::abs(pairing_sum(u, J).value) * factor;
  }
  pm.envelope_abs = env;
  pm.envelope = pm.value != 0.0 ? env / std::abs(pm.value) : env;
  return pm;
}

}  // namespace zmeso
