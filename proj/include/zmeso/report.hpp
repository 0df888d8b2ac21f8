#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "zmeso/config.hpp"
#include "zmeso/meso_stats.hpp"

namespace zmeso {

// Rows `k,empirical,stderr,gaussian,arithmetic,rmt` of central moments:
// gaussian = c_k variance^(k/2) for the given Gaussian variance.
void write_moment_csv(std::ostream& out, const MomentReport& r, double gaussian_variance);
nlohmann::json moment_json(const MomentReport& r, double gaussian_variance);

// Histogram (at least 20 bins) of the standardized values with the standard
// normal density overlaid.
void write_histogram_svg(std::ostream& out, std::span<const double> values, int bins = 30,
                         const std::string& title = "");
// Standardized order statistics against normal quantiles.
void write_qq_svg(std::ostream& out, std::span<const double> values, const std::string& title = "");

// Git blob id: sha1("blob <size>\0" + content).
std::string git_blob_hash(const std::string& content);
std::string git_blob_hash_file(const std::filesystem::path& path);

// Config echo, seed, command line and content hashes of the input files.
nlohmann::json make_manifest(const std::string& subcommand, const ExperimentConfig& cfg);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace zmeso
