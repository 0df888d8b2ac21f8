#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "zmeso/arithmetic.hpp"
#include "zmeso/commands.hpp"
#include "zmeso/config.hpp"
#include "zmeso/error.hpp"
#include "zmeso/report.hpp"
#include "zmeso/testfn.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

using namespace zmeso;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("zmeso-test-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error_field(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field;
  }
  return "<none>";
}

ExperimentConfig base_config(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.zeros_path = test::zeros_path();
  cfg.output_dir = out;
  return cfg;
}

int run_binary(const std::string& args, const fs::path& err_file) {
  const std::string cmd = std::string(ZMESO_BIN) + " " + args + " > /dev/null 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Minimal XML well-formedness: one root, balanced and matching tags, quoted
// attributes, known entities only.
bool well_formed_xml(const std::string& s) {
  std::size_t i = 0;
  std::vector<std::string> stack;
  int roots = 0;
  auto is_name = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.'; };
  auto entity_ok = [&](std::size_t amp) {
    static const std::regex ent("^&(amp|lt|gt|quot|apos|#[0-9]+|#x[0-9a-fA-F]+);");
    return std::regex_search(s.begin() + static_cast<std::ptrdiff_t>(amp), s.end(), ent);
  };
  if (s.rfind("<?xml", 0) == 0) {
    i = s.find("?>");
    if (i == std::string::npos) return false;
    i += 2;
  }
  while (i < s.size()) {
    if (s[i] != '<') {
      if (s[i] == '&' && !entity_ok(i)) return false;
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(s[i]))) return false;
      ++i;
      continue;
    }
    if (s.compare(i, 4, "<!--") == 0) {
      const auto e = s.find("-->", i);
      if (e == std::string::npos) return false;
      i = e + 3;
      continue;
    }
    const bool closing = i + 1 < s.size() && s[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    const std::size_t name_start = j;
    while (j < s.size() && is_name(s[j])) ++j;
    const std::string name = s.substr(name_start, j - name_start);
    if (name.empty()) return false;
    if (closing) {
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j >= s.size() || s[j] != '>' || stack.empty() || stack.back() != name) return false;
      stack.pop_back();
      i = j + 1;
      continue;
    }
    // Attributes.
    for (;;) {
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j >= s.size()) return false;
      if (s[j] == '>' || s.compare(j, 2, "/>") == 0) break;
      const std::size_t a = j;
      while (j < s.size() && is_name(s[j])) ++j;
      if (j == a || j >= s.size() || s[j] != '=') return false;
      ++j;
      if (j >= s.size() || (s[j] != '"' && s[j] != '\'')) return false;
      const char q = s[j];
      const auto end = s.find(q, j + 1);
      if (end == std::string::npos) return false;
      for (std::size_t k = j + 1; k < end; ++k) {
        if (s[k] == '<') return false;
        if (s[k] == '&' && !entity_ok(k)) return false;
      }
      j = end + 1;
    }
    if (stack.empty()) ++roots;
    if (s[j] == '/') {
      i = j + 2;
    } else {
      stack.push_back(name);
      i = j + 1;
    }
  }
  return stack.empty() && roots == 1;
}

}  // namespace

TEST_CASE("xml checker sanity") {
  CHECK(well_formed_xml("<?xml version=\"1.0\"?>\n<a x=\"1\"><b/>t &amp; u</a>\n"));
  CHECK_FALSE(well_formed_xml("<a><b></a></b>"));
  CHECK_FALSE(well_formed_xml("<a x=1></a>"));
  CHECK_FALSE(well_formed_xml("<a>&nbsp;</a>"));
  CHECK_FALSE(well_formed_xml("<a></a><b></b>"));
  CHECK_FALSE(well_formed_xml("<a>"));
}

TEST_CASE("key-value parsing") {
  std::istringstream in("# run\n  t = 30000 \n\nn = 8, 16,32  # windows\neta=hat:1\n");
  const auto kv = parse_key_values(in);
  CHECK(kv.size() == 3);
  CHECK(kv.at("t") == "30000");
  CHECK(kv.at("n") == "8, 16,32");
  ExperimentConfig cfg;
  apply_key_values(cfg, kv);
  CHECK(cfg.T == 30000.0);
  CHECK(cfg.n_values == std::vector<double>{8, 16, 32});
  CHECK(cfg.eta_spec == "hat:1");
  std::istringstream bad("t 3\n");
  CHECK(config_error_field([&] { parse_key_values(bad); }) == "t 3");
}

TEST_CASE("config errors name the field") {
  ExperimentConfig cfg;
  CHECK(config_error_field([&] { apply_key_values(cfg, {{"colour", "red"}}); }) == "colour");
  CHECK(config_error_field([&] { apply_key_values(cfg, {{"samples", "many"}}); }) == "samples");
  CHECK(config_error_field([&] { apply_key_values(cfg, {{"n", "8,x"}}); }) == "n");
  CHECK(config_error_field([&] { apply_key_values(cfg, {{"kmax", "3.5"}}); }) == "kmax");

  const fs::path out = scratch("validate");
  auto check = [&](const std::map<std::string, std::string>& kv, const std::string& field) {
    ExperimentConfig c = base_config(out);
    apply_key_values(c, kv);
    CAPTURE(field);
    CHECK(config_error_field([&] { validate(c); }) == field);
  };
  check({{"kmax", "9"}}, "kmax");
  check({{"kmax", "0"}}, "kmax");
  check({{"samples", "99"}}, "samples");
  check({{"zeros", (out / "missing.txt").string()}}, "zeros");
  check({{"eta", (out / "knots.csv").string()}}, "eta");
  check({{"weight", "gaussian"}}, "weight");
  check({{"t", "1"}}, "t");
  check({{"n", "0.5"}}, "n");
  ExperimentConfig ok = base_config(out);
  ok.k_max = 8;
  ok.samples = 100;
  CHECK_NOTHROW(validate(ok));
  ExperimentConfig no_zeros;
  CHECK_NOTHROW(validate(no_zeros, false));
  CHECK(config_error_field([&] { validate(no_zeros); }) == "zeros");
  fs::remove_all(out);
}

TEST_CASE("config echo round trip") {
  ExperimentConfig cfg;
  apply_key_values(cfg, {{"t", "12345.678"}, {"n", "3,7.5"}, {"seed", "18446744073709551615"}, {"weight", "smooth"}});
  ExperimentConfig back;
  apply_key_values(back, to_key_values(cfg));
  CHECK(to_key_values(back) == to_key_values(cfg));
  CHECK(back.T == cfg.T);
  CHECK(back.seed == 18446744073709551615ULL);
  CHECK(back.n_values == cfg.n_values);
}

TEST_CASE("git blob hashes") {
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  const fs::path out = scratch("hash");
  write_text(out / "h.txt", "hello\n");
  CHECK(git_blob_hash_file(out / "h.txt") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK_THROWS_AS(git_blob_hash_file(out / "none.txt"), Error);
  fs::remove_all(out);
}

TEST_CASE("fujii is reproducible and writes a manifest") {
  std::ostringstream log;
  std::string csv[2];
  for (int r = 0; r < 2; ++r) {
    const fs::path out = scratch("fujii" + std::to_string(r));
    ExperimentConfig cfg = base_config(out);
    cfg.n_values = {16};
    cfg.samples = 10000;
    cfg.seed = 2024;
    run_subcommand("fujii", cfg, log);
    csv[r] = slurp(out / "fujii.csv");
    const auto m = nlohmann::json::parse(slurp(out / "manifest-fujii.json"));
    CHECK(m.at("subcommand") == "fujii");
    CHECK(m.at("seed") == 2024);
    CHECK(m.at("config").get<std::map<std::string, std::string>>() == to_key_values(cfg));
    CHECK(m.at("inputs").at("zeros").at("blob") == git_blob_hash_file(test::zeros_path()));
    // The manifest alone rebuilds the configuration.
    ExperimentConfig again;
    apply_key_values(again, m.at("config").get<std::map<std::string, std::string>>());
    CHECK(to_key_values(again) == to_key_values(cfg));
    CHECK(make_manifest("fujii", again).at("content_hash") == m.at("content_hash"));
    fs::remove_all(out);
  }
  CHECK(csv[0] == csv[1]);
  std::istringstream rows(csv[0]);
  std::string header, row;
  std::getline(rows, header);
  std::getline(rows, row);
  CHECK(header.rfind("n,variance,", 0) == 0);
  CHECK(row.rfind("16,", 0) == 0);
}

TEST_CASE("meso-clt columns are the module outputs; report draws them") {
  const fs::path out = scratch("meso");
  ExperimentConfig cfg = base_config(out);
  cfg.n_values = {8};
  cfg.samples = 2000;
  cfg.k_max = 4;
  std::ostringstream log;
  run_subcommand("meso-clt", cfg, log);
  const auto j = nlohmann::json::parse(slurp(out / "meso_clt_n8.json"));
  const TestFunction eta = parse_test_function(cfg.eta_spec);
  const auto& row2 = j.at("rows").at(1);
  REQUIRE(row2.at("k") == 2);
  CHECK(row2.at("gaussian").get<double>() == variance_functional(eta, 8.0));
  const std::vector<TestFunction> pair(2, eta);
  const SieveTable sieve = build_sieve(cfg.sieve_limit);
  CHECK(row2.at("arithmetic").get<double>() == predicted_moment(pair, cfg.T, 8.0, sieve).value);
  CHECK(j.at("values").size() == 2000);
  CHECK(fs::exists(out / "meso_clt_n8.csv"));
  CHECK(fs::exists(out / "manifest-meso-clt.json"));

  run_subcommand("report", cfg, log);
  const std::string svg = slurp(out / "meso_clt_n8_hist.svg");
  CHECK(well_formed_xml(svg));
  const auto group = svg.find("<g fill=\"#9ecae1\"");
  REQUIRE(group != std::string::npos);
  const auto group_end = svg.find("</g>", group);
  std::size_t bars = 0;
  for (auto p = svg.find("<rect", group); p < group_end; p = svg.find("<rect", p + 1)) ++bars;
  CHECK(bars >= 20);
  CHECK(svg.find("<polyline", group_end) != std::string::npos);
  CHECK(well_formed_xml(slurp(out / "meso_clt_n8_qq.svg")));
  const auto idx = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(idx.at("plots").size() == 1);
  fs::remove_all(out);
}

TEST_CASE("report escapes titles") {
  std::ostringstream os;
  const std::vector<double> v{1.0, 2.0, 3.0, 2.5};
  write_histogram_svg(os, v, 5, "a < b & \"c\"");
  CHECK(well_formed_xml(os.str()));
  std::ostringstream empty;
  write_qq_svg(empty, {}, "");
  CHECK(well_formed_xml(empty.str()));
}

TEST_CASE("binary: exit codes and flag precedence") {
  const fs::path out = scratch("bin");
  const fs::path err = out / "stderr.txt";
  const std::string zeros = "--zeros " + test::zeros_path().string();
  CHECK(run_binary("fujii " + zeros + " --kmax 12 --out " + (out / "a").string(), err) == 64);
  CHECK(slurp(err).find("kmax") != std::string::npos);
  CHECK(run_binary("fujii --out " + (out / "a").string(), err) == 64);
  CHECK(slurp(err).find("zeros") != std::string::npos);
  write_text(out / "bad.cfg", "colour = red\n");
  CHECK(run_binary("pnt-check --config " + (out / "bad.cfg").string(), err) == 64);
  // Module errors exit 1 with a remediation hint.
  CHECK(run_binary("fujii " + zeros + " --t 1e6 --n 8 --samples 100 --out " + (out / "b").string(), err) == 1);
  CHECK(slurp(err).find("hint:") != std::string::npos);
  // flag > file > default
  write_text(out / "run.cfg", "seed = 5\nsieve-limit = 20000\nsamples = 300\n");
  REQUIRE(run_binary("pnt-check --config " + (out / "run.cfg").string() + " --seed 9 --out " + (out / "c").string(),
                     err) == 0);
  const auto m = nlohmann::json::parse(slurp(out / "c" / "manifest-pnt-check.json"));
  CHECK(m.at("seed") == 9);
  CHECK(m.at("config").at("sieve-limit") == "20000");
  CHECK(m.at("config").at("samples") == "300");
  CHECK(m.at("config").at("kmax") == "4");
  CHECK(fs::exists(out / "c" / "pnt_check.csv"));
  fs::remove_all(out);
}
