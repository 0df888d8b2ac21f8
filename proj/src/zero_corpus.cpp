#include "zmeso/zero_corpus.hpp"

#include "zmeso/error.hpp"
#include "zmeso/special.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <thread>

#include <unistd.h>

namespace zmeso {

namespace {

constexpr std::array<char, 4> kMagic = {'Z', 'M', 'C', '1'};

static_assert(std::endian::native == std::endian::little, "cache format assumes little-endian host");

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\f\v");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\f\v");
  return s.substr(b, e - b + 1);
}

void check_entry(std::size_t line, double v, const double* prev) {
  if (!std::isfinite(v) || v <= 0.0) throw MalformedTable(line, "ordinate must be positive and finite");
  if (prev && !(v > *prev)) throw MalformedTable(line, "ordinates must be strictly ascending");
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

ZeroCorpus::ZeroCorpus(std::vector<double> ordinates, std::string source)
    : ordinates_(std::move(ordinates)), source_(std::move(source)) {
  for (std::size_t i = 0; i < ordinates_.size(); ++i) {
    check_entry(i + 1, ordinates_[i], i ? &ordinates_[i - 1] : nullptr);
  }
}

ZeroCorpus parse_zero_table(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw MalformedTable(line_no, "cannot parse '" + std::string(s) + "'");
    }
    check_entry(line_no, v, values.empty() ? nullptr : &values.back());
    values.push_back(v);
  }
  return ZeroCorpus(std::move(values), source);
}

void write_zero_table(std::ostream& out, const ZeroCorpus& corpus) {
  char buf[32];
  for (double v : corpus.ordinates()) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
    out.put('\n');
  }
}

void write_corpus_cache(const std::filesystem::path& path, const ZeroCorpus& corpus) {
  // Write then rename so concurrent readers never see a partial file.
  const auto tmp = path.string() + ".tmp" + std::to_string(::getpid()) + "-" +
                   std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write cache " + tmp);
    const std::uint64_t n = corpus.count();
    out.write(kMagic.data(), kMagic.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(corpus.ordinates().data()),
              static_cast<std::streamsize>(n * sizeof(double)));
    if (!out) throw Error("cannot write cache " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

ZeroCorpus read_corpus_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open cache " + path.string());
  std::array<char, 4> magic{};
  std::uint64_t n = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || magic != kMagic) throw MalformedTable(0, "bad cache header in " + path.string());
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw MalformedTable(0, "truncated cache " + path.string());
  return ZeroCorpus(std::move(v), path.string());
}

ZeroCorpus load_zero_table(const std::filesystem::path& path, const std::filesystem::path& cache_dir) {
  std::filesystem::path dir = cache_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("ZMESO_CACHE_DIR")) dir = env;
  }
  std::filesystem::path cache;
  if (!dir.empty()) {
    const auto abs = std::filesystem::absolute(path).string();
    const auto size = std::filesystem::file_size(path);
    const auto mtime = std::filesystem::last_write_time(path).time_since_epoch().count();
    const std::uint64_t key =
        fnv1a(std::to_string(size) + ":" + std::to_string(mtime), fnv1a(abs));
    char name[64];
    std::snprintf(name, sizeof name, "zeros-%016llx.zmc", static_cast<unsigned long long>(key));
    cache = dir / name;
    if (std::filesystem::exists(cache)) {
      ZeroCorpus c = read_corpus_cache(cache);
      return ZeroCorpus(std::vector<double>(c.ordinates().begin(), c.ordinates().end()),
                        path.string());
    }
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot open zero table " + path.string());
  ZeroCorpus c = parse_zero_table(in, path.string());
  if (!cache.empty()) {
    std::filesystem::create_directories(dir);
    write_corpus_cache(cache, c);
  }
  return c;
}

std::size_t count_upto(const ZeroCorpus& corpus, double T) {
  if (T > corpus.max_height()) {
    throw OutOfTabulatedRange("height " + std::to_string(T) + " beyond tabulated " +
                              std::to_string(corpus.max_height()));
  }
  const auto z = corpus.ordinates();
  return static_cast<std::size_t>(std::upper_bound(z.begin(), z.end(), T) - z.begin());
}

std::span<const double> zeros_in_window(const ZeroCorpus& corpus, double a, double b) {
  if (b > corpus.max_height()) {
    throw OutOfTabulatedRange("window end " + std::to_string(b) + " beyond tabulated " +
                              std::to_string(corpus.max_height()));
  }
  if (!(a < b)) return {};
  const auto z = corpus.ordinates();
  const auto lo = std::lower_bound(z.begin(), z.end(), a);
  const auto hi = std::lower_bound(lo, z.end(), b);
  return z.subspan(static_cast<std::size_t>(lo - z.begin()), static_cast<std::size_t>(hi - lo));
}

double main_term(double T) {
  const double arg = log_gamma({0.25, 0.5 * T}).imag();
  return arg / std::numbers::pi - T / (2.0 * std::numbers::pi) * std::log(std::numbers::pi) + 1.0;
}

double s_of(const ZeroCorpus& corpus, double t) {
  return static_cast<double>(count_upto(corpus, t)) - main_term(t);
}

double omega(double xi) {
  return digamma({0.25, 0.5 * std::abs(xi)}).real() - std::log(std::numbers::pi);
}

}  // namespace zmeso
