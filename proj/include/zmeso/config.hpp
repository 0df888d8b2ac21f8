#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace zmeso {

struct ExperimentConfig {
  std::filesystem::path zeros_path;
  std::uint64_t sieve_limit = 1000000;
  double T = 2e4;
  std::vector<double> n_values{8, 16, 32};
  std::string eta_spec = "indicator:0.5";
  int k_max = 4;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "zmeso-out";
  std::string weight = "uniform";
};

// Flat "key = value" lines; '#' starts a comment. Keys: zeros, sieve-limit,
// t, n (comma separated), eta, kmax, samples, seed, out, weight.
std::map<std::string, std::string> parse_key_values(std::istream& in);
// Applies key/value pairs over `cfg`; throws ConfigError naming the key.
void apply_key_values(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);
// Checks paths, k_max <= 8, samples >= 100; throws ConfigError with the field.
void validate(const ExperimentConfig& cfg, bool needs_zeros = true);

std::map<std::string, std::string> to_key_values(const ExperimentConfig& cfg);

}  // namespace zmeso
