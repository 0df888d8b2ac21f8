#include "zmeso/report.hpp"

#include "zmeso/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

namespace zmeso {

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

nlohmann::json json_num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::vector<double> standardized(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(v.size()));
  std::vector<double> z(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) z[i] = sd > 0 ? (v[i] - mean) / sd : 0.0;
  return z;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

constexpr double kW = 640, kH = 420, kMargin = 48;

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kW - 2 * kMargin); }
  double py(double y) const { return kH - kMargin - (y - y0) / (y1 - y0) * (kH - 2 * kMargin); }
};

void svg_open(std::ostream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
      << kW << ' ' << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        << escape(title) << "</text>\n";
  }
}

void svg_axes(std::ostream& out, const Frame& f, const std::string& xl, const std::string& yl) {
  out << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << kH - kMargin << "\" x2=\"" << kW - kMargin << "\" y2=\""
      << kH - kMargin << "\"/>\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\"" << kH - kMargin
      << "\"/>\n</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
    out << "<text x=\"" << f.px(x) << "\" y=\"" << kH - kMargin + 16 << "\" text-anchor=\"middle\">"
        << std::setprecision(3) << x << "</text>\n";
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    out << "<text x=\"" << kMargin - 6 << "\" y=\"" << f.py(y) + 4 << "\" text-anchor=\"end\">" << std::setprecision(3)
        << y << "</text>\n";
  }
  out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 8 << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n"
      << "<text x=\"14\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << kH / 2
      << ")\">" << escape(yl) << "</text>\n</g>\n";
}

}  // namespace

void write_moment_csv(std::ostream& out, const MomentReport& r, double gaussian_variance) {
  out << "k,empirical,stderr,gaussian,arithmetic,rmt\n";
  for (const auto& row : r.rows) {
    const double gauss = row.gaussian_prediction * std::pow(gaussian_variance, 0.5 * row.k);
    out << row.k << ',' << num(row.empirical_central) << ',' << num(row.central_stderr) << ',' << num(gauss) << ','
        << num(row.arithmetic_prediction) << ',' << num(row.rmt_prediction) << '\n';
  }
}

nlohmann::json moment_json(const MomentReport& r, double gaussian_variance) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"k", row.k},
                    {"empirical", json_num(row.empirical_central)},
                    {"stderr", json_num(row.central_stderr)},
                    {"gaussian", json_num(row.gaussian_prediction * std::pow(gaussian_variance, 0.5 * row.k))},
                    {"arithmetic", json_num(row.arithmetic_prediction)},
                    {"rmt", json_num(row.rmt_prediction)},
                    {"raw", json_num(row.empirical_raw)},
                    {"normalized", json_num(row.empirical_centered_normalized)},
                    {"normalized_stderr", json_num(row.mc_stderr)},
                    {"c_k", row.gaussian_prediction}});
  }
  return {{"rows", rows},
          {"mean", r.mean},
          {"mean_stderr", r.mean_stderr},
          {"variance", r.variance},
          {"variance_stderr", r.variance_stderr},
          {"gaussian_variance", gaussian_variance},
          {"values", r.values}};
}

void write_histogram_svg(std::ostream& out, std::span<const double> values, int bins, const std::string& title) {
  bins = std::max(bins, 20);
  const std::vector<double> z = values.empty() ? std::vector<double>{} : standardized(values);
  const double lo = -4.0, hi = 4.0, w = (hi - lo) / bins;
  std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
  for (double x : z) {
    const int b = static_cast<int>(std::floor((x - lo) / w));
    if (b >= 0 && b < bins) h[static_cast<std::size_t>(b)] += 1.0;
  }
  for (auto& v : h) v /= std::max<double>(1.0, static_cast<double>(z.size())) * w;
  const double top = std::max(0.45, *std::max_element(h.begin(), h.end()) * 1.1);
  const Frame f{lo, hi, 0.0, top};
  svg_open(out, title);
  svg_axes(out, f, "standardized statistic", "density");
  out << "<g fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"0.5\">\n";
  for (int b = 0; b < bins; ++b) {
    const double x = lo + b * w;
    const double v = h[static_cast<std::size_t>(b)];
    out << "<rect x=\"" << f.px(x) << "\" y=\"" << f.py(v) << "\" width=\"" << f.px(x + w) - f.px(x)
        << "\" height=\"" << f.py(0.0) - f.py(v) << "\"/>\n";
  }
  out << "</g>\n<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" points=\"";
  for (int i = 0; i <= 200; ++i) {
    const double x = lo + (hi - lo) * i / 200.0;
    const double y = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    out << f.px(x) << ',' << f.py(y) << ' ';
  }
  out << "\"/>\n</svg>\n";
}

void write_qq_svg(std::ostream& out, std::span<const double> values, const std::string& title) {
  std::vector<double> z = values.empty() ? std::vector<double>{} : standardized(values);
  std::sort(z.begin(), z.end());
  const boost::math::normal_distribution<double> nd;
  const Frame f{-4.0, 4.0, -4.0, 4.0};
  svg_open(out, title);
  svg_axes(out, f, "normal quantile", "sample quantile");
  out << "<line x1=\"" << f.px(-4) << "\" y1=\"" << f.py(-4) << "\" x2=\"" << f.px(4) << "\" y2=\"" << f.py(4)
      << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n<g fill=\"#3182bd\">\n";
  const std::size_t n = z.size();
  const std::size_t stride = std::max<std::size_t>(1, n / 2000);
  for (std::size_t i = 0; i < n; i += stride) {
    const double q = boost::math::quantile(nd, (static_cast<double>(i) + 0.5) / static_cast<double>(n));
    const double y = std::clamp(z[i], -4.0, 4.0);
    out << "<circle cx=\"" << f.px(std::clamp(q, -4.0, 4.0)) << "\" cy=\"" << f.py(y) << "\" r=\"1.5\"/>\n";
  }
  out << "</g>\n</svg>\n";
}

std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("cannot allocate digest context");
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string git_blob_hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return git_blob_hash(ss.str());
}

nlohmann::json make_manifest(const std::string& subcommand, const ExperimentConfig& cfg) {
  nlohmann::json m;
  m["subcommand"] = subcommand;
  m["config"] = to_key_values(cfg);
  m["seed"] = cfg.seed;
  nlohmann::json inputs = nlohmann::json::object();
  if (!cfg.zeros_path.empty() && std::filesystem::exists(cfg.zeros_path)) {
    inputs["zeros"] = {{"path", cfg.zeros_path.string()}, {"blob", git_blob_hash_file(cfg.zeros_path)}};
  }
  if (cfg.eta_spec.find(':') == std::string::npos && std::filesystem::exists(cfg.eta_spec)) {
    inputs["eta"] = {{"path", cfg.eta_spec}, {"blob", git_blob_hash_file(cfg.eta_spec)}};
  }
  m["inputs"] = inputs;
  m["content_hash"] = git_blob_hash(m["config"].dump() + inputs.dump());
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace zmeso
