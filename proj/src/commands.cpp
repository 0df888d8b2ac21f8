#include "zmeso/commands.hpp"

#include "zmeso/arithmetic.hpp"
#include "zmeso/error.hpp"
#include "zmeso/meso_stats.hpp"
#include "zmeso/numerics.hpp"
#include "zmeso/report.hpp"
#include "zmeso/rmt.hpp"
#include "zmeso/testfn.hpp"
#include "zmeso/zero_corpus.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace zmeso {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kInvPi2 = 1.0 / (std::numbers::pi * std::numbers::pi);

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string n_label(double n) {
  std::ostringstream os;
  os << n;
  return os.str();
}

WindowConfig window(const ExperimentConfig& cfg, double n) {
  WindowConfig w;
  w.T = cfg.T;
  w.n_of_T = n;
  w.samples = cfg.samples;
  w.seed = cfg.seed;
  w.weight.kind = cfg.weight == "smooth" ? AveragingWeight::Kind::SmoothCompactSpectrum
                                         : AveragingWeight::Kind::UniformOnT2T;
  return w;
}

ZeroCorpus load(const ExperimentConfig& cfg) {
  fs::path cache;
  if (!std::getenv("ZMESO_CACHE_DIR")) cache = cfg.output_dir / "cache";
  return load_zero_table(cfg.zeros_path, cache);
}

void finish(const std::string& name, const ExperimentConfig& cfg, const json& result, std::ostream& log) {
  write_text(cfg.output_dir / (name + ".json"), result.dump(2) + "\n");
  write_text(cfg.output_dir / ("manifest-" + name + ".json"), make_manifest(name, cfg).dump(2) + "\n");
  log << "wrote " << (cfg.output_dir / (name + ".json")).string() << "\n";
}

void cmd_ingest(const ExperimentConfig& cfg, std::ostream& log) {
  const ZeroCorpus c = load(cfg);
  const SieveTable s = build_sieve(cfg.sieve_limit, true);
  log << "zeros: " << c.count() << " up to height " << fmt(c.max_height()) << "\n"
      << "sieve: " << s.prime_powers().size() << " prime powers up to " << s.limit() << "\n";
  finish("ingest", cfg,
         {{"zeros", c.count()},
          {"max_height", c.max_height()},
          {"source", c.source()},
          {"sieve_limit", s.limit()},
          {"prime_powers", s.prime_powers().size()},
          {"psi_at_limit", s.psi(static_cast<double>(s.limit()))}},
         log);
}

void cmd_fujii(const ExperimentConfig& cfg, std::ostream& log) {
  const ZeroCorpus c = load(cfg);
  const TestFunction ind(Indicator{0.5});
  std::ostringstream csv;
  csv << "n,variance,stderr,ds_variance,ds_stderr,variance_functional,log_n_over_pi2\n";
  json rows = json::array();
  for (double n : cfg.n_values) {
    const WindowConfig w = window(cfg, n);
    const MomentReport count = sample_moments(c, ind, w, 2, StatKind::Count);
    const MomentReport ds = sample_moments(c, ind, w, 2, StatKind::Ds);
    const double vf = variance_functional(ind, n);
    csv << fmt(n) << ',' << fmt(count.variance) << ',' << fmt(count.variance_stderr) << ',' << fmt(ds.variance) << ','
        << fmt(ds.variance_stderr) << ',' << fmt(vf) << ',' << fmt(kInvPi2 * std::log(n)) << '\n';
    rows.push_back({{"n", n},
                    {"variance", count.variance},
                    {"stderr", count.variance_stderr},
                    {"ds_variance", ds.variance},
                    {"ds_stderr", ds.variance_stderr},
                    {"variance_functional", vf},
                    {"log_n_over_pi2", kInvPi2 * std::log(n)}});
    log << "n=" << n << " variance " << count.variance << " (variance functional " << vf << ")\n";
  }
  write_text(cfg.output_dir / "fujii.csv", csv.str());
  finish("fujii", cfg, {{"rows", rows}}, log);
}

// RMT comparison size for a zeta window of n zeros: the scaled window must
// fit in half the circle.
int rmt_size(const TestFunction& eta, double n) {
  const double reach = std::isfinite(eta.support_radius()) ? eta.support_radius() : 1.0;
  int N = 64;
  while (N < 4.0 * n * reach) N *= 2;
  return N;
}

void cmd_meso_clt(const ExperimentConfig& cfg, std::ostream& log) {
  const ZeroCorpus c = load(cfg);
  const TestFunction eta = parse_test_function(cfg.eta_spec);
  const SieveTable sieve = build_sieve(cfg.sieve_limit);
  json runs = json::array();
  for (double n : cfg.n_values) {
    const WindowConfig w = window(cfg, n);
    MomentReport r = sample_moments(c, eta, w, cfg.k_max);
    const int N = rmt_size(eta, n);
    const MomentReport rmt =
        smoothed_statistic_clt(N, eta, n, std::min<std::size_t>(cfg.samples, 2000), cfg.seed, cfg.k_max);
    for (auto& row : r.rows) {
      const std::vector<TestFunction> etas(static_cast<std::size_t>(row.k), eta);
      try {
        row.arithmetic_prediction = predicted_moment(etas, cfg.T, n, sieve).value;
      } catch (const SieveTooSmall&) {
        row.arithmetic_prediction = pairing_sum(rescaled_transforms(etas, n), [&] {
          std::vector<int> all(etas.size());
          std::iota(all.begin(), all.end(), 0);
          return all;
        }()).value.real();
      }
      row.rmt_prediction = rmt.rows[static_cast<std::size_t>(row.k - 1)].empirical_central;
    }
    const double vf = variance_functional(eta, n);
    std::ostringstream csv;
    write_moment_csv(csv, r, vf);
    const std::string tag = "meso_clt_n" + n_label(n);
    write_text(cfg.output_dir / (tag + ".csv"), csv.str());
    json j = moment_json(r, vf);
    j["n"] = n;
    j["eta"] = eta.name();
    j["rmt_matrix_size"] = N;
    write_text(cfg.output_dir / (tag + ".json"), j.dump(1) + "\n");
    runs.push_back(tag);
    log << "n=" << n << " variance " << r.variance << " (gaussian " << vf << ")\n";
  }
  finish("meso-clt", cfg, {{"runs", runs}}, log);
}

void cmd_explicit_formula(const ExperimentConfig& cfg, std::ostream& log) {
  const ZeroCorpus c = load(cfg);
  const SieveTable sieve = build_sieve(cfg.sieve_limit);
  std::ostringstream csv;
  csv << "a,zero_cutoff,prime_cutoff,lhs,rhs,residual\n";
  json rows = json::array();
  for (double a : {0.5, 1.0, 2.0}) {
    for (double f : {0.25, 0.5, 1.0}) {
      const double z = f * c.max_height();
      const auto r = verify_explicit_formula(c, sieve, a, z, cfg.sieve_limit);
      csv << fmt(a) << ',' << fmt(z) << ',' << cfg.sieve_limit << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ','
          << fmt(r.residual) << '\n';
      rows.push_back({{"a", a}, {"zero_cutoff", z}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"residual", r.residual}});
    }
  }
  write_text(cfg.output_dir / "explicit_formula.csv", csv.str());
  finish("explicit-formula", cfg, {{"rows", rows}}, log);
}

void cmd_pnt_check(const ExperimentConfig& cfg, std::ostream& log) {
  const SieveTable sieve = build_sieve(cfg.sieve_limit);
  const TestFunction f(SmoothBump{1.0});
  std::ostringstream csv;
  csv << "H,lhs,rhs,error,error_times_H2\n";
  json rows = json::array();
  for (double H = 4.0; std::exp(H) <= static_cast<double>(sieve.limit()); H += 2.0) {
    const auto r = pnt_weighted_sum(f, H, sieve);
    const double e = std::abs(r.lhs - r.rhs);
    csv << fmt(H) << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ',' << fmt(e) << ',' << fmt(e * H * H) << '\n';
    rows.push_back({{"H", H}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"error", e}});
  }
  write_text(cfg.output_dir / "pnt_check.csv", csv.str());
  finish("pnt-check", cfg, {{"rows", rows}}, log);
}

void cmd_rmt_compare(const ExperimentConfig& cfg, std::ostream& log) {
  const TestFunction eta = parse_test_function(cfg.eta_spec);
  json out;
  // Trace identities at n = 8.
  const EnsembleSample s8 = sample_haar(8, cfg.samples, cfg.seed);
  json ds = json::array();
  for (int j = 1; j <= 8; ++j) {
    const auto t = trace_power(s8, j);
    ds.push_back({{"j", j}, {"mean_abs2", t.mean_abs2}, {"stderr", t.abs2_stderr}, {"prediction", j}});
  }
  out["diaconis_shahshahani"] = ds;
  // Counting and smoothed statistics at n = 512.
  const std::size_t batches = std::min<std::size_t>(cfg.samples, 1000);
  const EnsembleSample s512 = sample_haar(512, batches, cfg.seed);
  json cl = json::array();
  std::vector<double> x, y, sg;
  for (double L : {8.0, 16.0, 32.0, 64.0}) {
    const auto r = scaled_counting_clt(s512, L);
    cl.push_back({{"L", L}, {"mean", r.mean}, {"mean_stderr", r.mean_stderr}, {"variance", r.variance},
                  {"variance_stderr", r.variance_stderr}});
    x.push_back(std::log(L));
    y.push_back(r.variance);
    sg.push_back(r.variance_stderr);
  }
  const LinearFit fit = linear_fit(x, y, sg);
  out["costin_lebowitz"] = {{"rows", cl}, {"slope", fit.slope}, {"slope_stderr", fit.slope_stderr},
                            {"prediction", kInvPi2}};
  if (!std::isfinite(eta.support_radius()) || 32.0 * eta.support_radius() <= 256.0) {
    const MomentReport sm = smoothed_statistic_clt(s512, eta, 32.0, cfg.k_max);
    out["smoothed"] = moment_json(sm, variance_functional(eta, 32.0));
  }
  // Pairing moments on the scaled process.
  const TestFunction f1(Fejer{1.0}), f5(Fejer{0.5});
  const EnsembleSample s256 = sample_haar(256, cfg.samples, cfg.seed + 1);
  json pc = json::array();
  for (const auto& etas : {std::vector<TestFunction>{f1, f1}, std::vector<TestFunction>{f5, f5, f5},
                           std::vector<TestFunction>{f5, f5, f5, f5}}) {
    const auto r = pairing_moment_check(etas, s256);
    pc.push_back({{"k", etas.size()}, {"eta", etas[0].name()}, {"value", r.value}, {"stderr", r.stderr_},
                  {"prediction", r.prediction}});
  }
  out["pairing"] = pc;
  log << "Costin-Lebowitz slope " << fit.slope << " (1/pi^2 = " << kInvPi2 << ")\n";
  finish("rmt-compare", cfg, out, log);
}

void cmd_oscillatory(const ExperimentConfig& cfg, std::ostream& log) {
  const ZeroCorpus c = load(cfg);
  const TestFunction r(Fejer{1.0});
  const std::vector<double> alphas{0.25, 0.5, 0.75};
  std::ostringstream csv;
  csv << "n,alpha,zeta_cov,zeta_stderr,rmt_cov,rmt_stderr,prediction\n";
  json rows = json::array();
  const EnsembleSample s = sample_haar(512, std::min<std::size_t>(cfg.samples, 1000), cfg.seed);
  for (double n : cfg.n_values) {
    const WindowConfig w = window(cfg, n);
    std::vector<std::vector<double>> tuples;
    for (double a : alphas) tuples.push_back({a, -a});
    const auto rm = oscillatory_rmt_statistic(r, tuples, n, s);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const auto z = oscillatory_covariance(c, r, alphas[i], w);
      const double pred = oscillatory_prediction(r, alphas[i], n);
      csv << fmt(n) << ',' << fmt(alphas[i]) << ',' << fmt(z.value) << ',' << fmt(z.stderr_) << ','
          << fmt(rm[i].value.real()) << ',' << fmt(rm[i].stderr_) << ',' << fmt(pred) << '\n';
      rows.push_back({{"n", n}, {"alpha", alphas[i]}, {"zeta_cov", z.value}, {"zeta_stderr", z.stderr_},
                      {"rmt_cov", rm[i].value.real()}, {"rmt_stderr", rm[i].stderr_}, {"prediction", pred}});
    }
  }
  write_text(cfg.output_dir / "oscillatory.csv", csv.str());
  finish("oscillatory", cfg, {{"rows", rows}}, log);
}

void cmd_selberg(const ExperimentConfig& cfg, std::ostream& log) {
  const ZeroCorpus c = load(cfg);
  const SieveTable sieve = build_sieve(std::max<std::uint64_t>(cfg.sieve_limit, static_cast<std::uint64_t>(cfg.T) + 1));
  const WindowConfig w = window(cfg, cfg.n_values.front());
  std::ostringstream csv;
  csv << "k,mean_residual_sq,mean_s_sq,residual_moment_2k\n";
  json rows = json::array();
  for (int k = 1; k <= 3; ++k) {
    const auto d = selberg_diagnostic(c, w, k, sieve);
    csv << k << ',' << fmt(d.mean_residual_sq) << ',' << fmt(d.mean_s_sq) << ',' << fmt(d.residual_moment_2k) << '\n';
    rows.push_back({{"k", k}, {"mean_residual_sq", d.mean_residual_sq}, {"mean_s_sq", d.mean_s_sq},
                    {"residual_moment_2k", d.residual_moment_2k}});
  }
  write_text(cfg.output_dir / "selberg.csv", csv.str());
  finish("selberg", cfg, {{"rows", rows}}, log);
}

void cmd_report(const ExperimentConfig& cfg, std::ostream& log) {
  json index = json::array();
  if (!fs::exists(cfg.output_dir)) throw ConfigError("out", "no such directory: " + cfg.output_dir.string());
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(cfg.output_dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("meso_clt_n", 0) == 0 && e.path().extension() == ".json") inputs.push_back(e.path());
  }
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) throw ConfigError("out", "no meso-clt results in " + cfg.output_dir.string() + "; run meso-clt first");
  for (const auto& p : inputs) {
    std::ifstream in(p);
    const json j = json::parse(in);
    const std::vector<double> values = j.at("values").get<std::vector<double>>();
    const std::string stem = p.stem().string();
    const std::string title = j.value("eta", std::string()) + ", n = " + fmt(j.value("n", 0.0));
    std::ostringstream h, q;
    write_histogram_svg(h, values, 30, title);
    write_qq_svg(q, values, title);
    write_text(cfg.output_dir / (stem + "_hist.svg"), h.str());
    write_text(cfg.output_dir / (stem + "_qq.svg"), q.str());
    index.push_back({{"input", p.filename().string()}, {"histogram", stem + "_hist.svg"}, {"qq", stem + "_qq.svg"},
                     {"variance", j.at("variance")}, {"gaussian_variance", j.at("gaussian_variance")}});
  }
  finish("report", cfg, {{"plots", index}}, log);
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"ingest",      "fujii",       "meso-clt", "explicit-formula",
                                              "pnt-check",   "rmt-compare", "oscillatory", "selberg",
                                              "report"};
  return names;
}

void run_subcommand(const std::string& name, const ExperimentConfig& cfg, std::ostream& log) {
  const bool needs_zeros = name != "pnt-check" && name != "rmt-compare" && name != "report";
  validate(cfg, needs_zeros);
  fs::create_directories(cfg.output_dir);
  if (name == "ingest") return cmd_ingest(cfg, log);
  if (name == "fujii") return cmd_fujii(cfg, log);
  if (name == "meso-clt") return cmd_meso_clt(cfg, log);
  if (name == "explicit-formula") return cmd_explicit_formula(cfg, log);
  if (name == "pnt-check") return cmd_pnt_check(cfg, log);
  if (name == "rmt-compare") return cmd_rmt_compare(cfg, log);
  if (name == "oscillatory") return cmd_oscillatory(cfg, log);
  if (name == "selberg") return cmd_selberg(cfg, log);
  if (name == "report") return cmd_report(cfg, log);
  throw ConfigError("subcommand", "unknown subcommand " + name);
}

std::string remediation_hint(const std::exception& e) {
  if (dynamic_cast<const OutOfTabulatedRange*>(&e)) {
    return "lower --t or --n, or supply a longer zero table with --zeros";
  }
  if (dynamic_cast<const SieveTooSmall*>(&e)) return "raise --sieve-limit";
  if (dynamic_cast<const ResourceExceeded*>(&e)) return "lower --sieve-limit";
  if (dynamic_cast<const SupportBudgetExceeded*>(&e)) return "use test functions with narrower transforms";
  if (dynamic_cast<const WindowExceedsTorus*>(&e)) return "use a smaller window or a larger matrix size";
  if (dynamic_cast<const MalformedTable*>(&e)) return "check the zero table format: one ascending ordinate per line";
  if (dynamic_cast<const Unsupported*>(&e)) return "choose a compactly supported test function";
  return "";
}

}  // namespace zmeso
