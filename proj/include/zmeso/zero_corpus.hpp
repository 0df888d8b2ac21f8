#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace zmeso {

// Immutable ascending table of zero ordinates gamma (zeros 1/2 + i gamma).
class ZeroCorpus {
 public:
  ZeroCorpus() = default;
  // Validates: strictly ascending, positive, finite. Throws MalformedTable
  // with the 1-based index of the first offending entry.
  ZeroCorpus(std::vector<double> ordinates, std::string source);

  std::span<const double> ordinates() const { return ordinates_; }
  std::size_t count() const { return ordinates_.size(); }
  double max_height() const { return ordinates_.empty() ? 0.0 : ordinates_.back(); }
  const std::string& source() const { return source_; }

  friend bool operator==(const ZeroCorpus& a, const ZeroCorpus& b) {
    return a.ordinates_ == b.ordinates_;
  }

 private:
  std::vector<double> ordinates_;
  std::string source_;
};

// One ordinate per line; blank lines and '#' comments are skipped. Line
// numbers in errors count every physical line.
ZeroCorpus parse_zero_table(std::istream& in, const std::string& source = "stream");
// Shortest round-trip decimal form, one ordinate per line.
void write_zero_table(std::ostream& out, const ZeroCorpus& corpus);

// Binary cache: "ZMC1", little-endian u64 count, f64 ordinates.
void write_corpus_cache(const std::filesystem::path& path, const ZeroCorpus& corpus);
ZeroCorpus read_corpus_cache(const std::filesystem::path& path);

// Loads a text table, going through a binary cache in `cache_dir` (or
// $ZMESO_CACHE_DIR when empty; no caching when neither is set).
ZeroCorpus load_zero_table(const std::filesystem::path& path,
                           const std::filesystem::path& cache_dir = {});

// N(T): number of ordinates in (0, T].
std::size_t count_upto(const ZeroCorpus& corpus, double T);
// Ordinates in [a, b).
std::span<const double> zeros_in_window(const ZeroCorpus& corpus, double a, double b);

// (1/pi) arg Gamma(1/4 + iT/2) - (T/2pi) log pi + 1, the smooth part of N(T).
double main_term(double T);
// S(t) = N(t) - main_term(t).
double s_of(const ZeroCorpus& corpus, double t);
// Omega(xi) = Re psi(1/4 + i xi/2) - log pi; Omega/2pi is the mean density of zeros.
double omega(double xi);

}  // namespace zmeso
