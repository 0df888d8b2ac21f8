// zmeso: batch driver for the zero-statistics experiments.
//
//   zmeso fujii --zeros zeros.txt --n 8 --n 16 --samples 10000 --out run1
//   zmeso meso-clt --config run.cfg --eta bump:0.5
//   zmeso report --out run1

#include <CLI11.hpp>

#include "zmeso/commands.hpp"
#include "zmeso/config.hpp"
#include "zmeso/error.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

int main(int argc, char** argv) {
  CLI::App app{"Mesoscopic statistics of zeta zeros against prime-side and random-matrix predictions"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> zeros, eta, out, weight;
  std::optional<double> sieve_limit, t;
  std::vector<double> n_values;
  std::optional<int> kmax;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;

  const std::map<std::string, std::string> blurbs{
      {"ingest", "load and check the zero table, build the sieve"},
      {"fujii", "counting-function variance against log n / pi^2"},
      {"meso-clt", "moments of a smoothed statistic with all three predictions"},
      {"explicit-formula", "zero side against prime side for Gaussian test functions"},
      {"pnt-check", "smoothed prime sums against the prime number theorem"},
      {"rmt-compare", "CUE trace moments, counting variance and smoothed statistics"},
      {"oscillatory", "covariances of statistics shifted by alpha"},
      {"selberg", "truncated Dirichlet polynomial against S(t)"},
      {"report", "SVG summary of the meso-clt runs in --out"}};
  for (const auto& name : zmeso::subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--zeros", zeros, "zero table (one ordinate per line)");
    sub->add_option("--sieve-limit", sieve_limit, "largest integer sieved");
    sub->add_option("--t", t, "base height T");
    sub->add_option("--n", n_values, "window sizes n(T); repeat for several");
    sub->add_option("--eta", eta, "indicator:h, hat:h, bump:h, fejer:delta or a knot CSV path");
    sub->add_option("--kmax", kmax, "highest moment order (<= 8)");
    sub->add_option("--samples", samples, "window centres or matrices per experiment");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--weight", weight, "uniform or smooth centre distribution");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    zmeso::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw zmeso::ConfigError("config", "cannot open " + config_path);
      zmeso::apply_key_values(cfg, zmeso::parse_key_values(in));
    }
    std::map<std::string, std::string> flags;
    auto put = [&](const char* key, const auto& v) {
      if (v) {
        std::ostringstream os;
        os.precision(17);
        os << *v;
        flags[key] = os.str();
      }
    };
    put("zeros", zeros);
    put("eta", eta);
    put("out", out);
    put("weight", weight);
    put("sieve-limit", sieve_limit);
    put("t", t);
    put("kmax", kmax);
    put("samples", samples);
    put("seed", seed);
    if (!n_values.empty()) {
      std::string s;
      for (double v : n_values) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        s += (s.empty() ? "" : ",") + os.str();
      }
      flags["n"] = s;
    }
    zmeso::apply_key_values(cfg, flags);
    zmeso::run_subcommand(name, cfg, std::cout);
  } catch (const zmeso::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (const std::string hint = zmeso::remediation_hint(e); !hint.empty()) std::cerr << "hint: " << hint << "\n";
    return 1;
  }
  return 0;
}
