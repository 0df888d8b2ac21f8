#include "zmeso/config.hpp"

#include "zmeso/error.hpp"

#include <charconv>
#include <istream>
#include <sstream>

namespace zmeso {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& field, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError(field, "cannot parse '" + text + "'");
  return v;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void apply_key_values(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "zeros") {
      cfg.zeros_path = v;
    } else if (k == "sieve-limit") {
      cfg.sieve_limit = static_cast<std::uint64_t>(parse_number<double>(k, v));
    } else if (k == "t") {
      cfg.T = parse_number<double>(k, v);
    } else if (k == "n") {
      cfg.n_values.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) cfg.n_values.push_back(parse_number<double>(k, trim(item)));
    } else if (k == "eta") {
      cfg.eta_spec = v;
    } else if (k == "kmax") {
      cfg.k_max = parse_number<int>(k, v);
    } else if (k == "samples") {
      cfg.samples = parse_number<std::size_t>(k, v);
    } else if (k == "seed") {
      cfg.seed = parse_number<std::uint64_t>(k, v);
    } else if (k == "out") {
      cfg.output_dir = v;
    } else if (k == "weight") {
      cfg.weight = v;
    } else {
      throw ConfigError(k, "unknown key");
    }
  }
}

void validate(const ExperimentConfig& cfg, bool needs_zeros) {
  if (needs_zeros) {
    if (cfg.zeros_path.empty()) throw ConfigError("zeros", "a zero table is required (--zeros)");
    if (!std::filesystem::exists(cfg.zeros_path)) {
      throw ConfigError("zeros", "file not found: " + cfg.zeros_path.string());
    }
  }
  if (cfg.k_max < 1 || cfg.k_max > 8) throw ConfigError("kmax", "must be between 1 and 8");
  if (cfg.samples < 100) throw ConfigError("samples", "must be at least 100");
  if (cfg.sieve_limit < 2) throw ConfigError("sieve-limit", "must be at least 2");
  if (!(cfg.T > 1.0)) throw ConfigError("t", "must exceed 1");
  if (cfg.n_values.empty()) throw ConfigError("n", "need at least one window size");
  for (double n : cfg.n_values) {
    if (!(n >= 1.0)) throw ConfigError("n", "window sizes must be at least 1");
  }
  if (cfg.weight != "uniform" && cfg.weight != "smooth") throw ConfigError("weight", "uniform or smooth");
  if (cfg.eta_spec.find(':') == std::string::npos && !std::filesystem::exists(cfg.eta_spec)) {
    throw ConfigError("eta", "not a closed form and no such knot file: " + cfg.eta_spec);
  }
}

std::map<std::string, std::string> to_key_values(const ExperimentConfig& cfg) {
  std::string n;
  for (double v : cfg.n_values) n += (n.empty() ? "" : ",") + format_double(v);
  return {{"zeros", cfg.zeros_path.string()},
          {"sieve-limit", std::to_string(cfg.sieve_limit)},
          {"t", format_double(cfg.T)},
          {"n", n},
          {"eta", cfg.eta_spec},
          {"kmax", std::to_string(cfg.k_max)},
          {"samples", std::to_string(cfg.samples)},
          {"seed", std::to_string(cfg.seed)},
          {"out", cfg.output_dir.string()},
          {"weight", cfg.weight}};
}

}  // namespace zmeso
