#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "zmeso/arithmetic.hpp"
#include "zmeso/zero_corpus.hpp"

namespace zmeso::test {

inline std::filesystem::path zeros_path() { return ZMESO_ZEROS_PATH; }

// The 10^5-zero table, loaded once per test binary.
inline const ZeroCorpus& corpus() {
  static const ZeroCorpus c = load_zero_table(zeros_path());
  return c;
}

inline const SieveTable& sieve_1e6() {
  static const SieveTable s = build_sieve(1000000);
  return s;
}

inline bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

inline double rel_err(double value, double target) { return std::abs(value - target) / std::abs(target); }

}  // namespace zmeso::test
