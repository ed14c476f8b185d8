#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsm/bifurcation.hpp"
#include "rsm/manifold.hpp"

namespace rsm::cli {

/// Invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Everything a run needs. Parsed from one JSON document; keys not listed in
/// `to_json` are rejected.
struct RunConfig
{
    SystemParams params;
    std::vector<double> a_values{0.6, 0.01, 0.001, 0.0, -0.0003, -0.001, -0.006};
    DetectionConfig detection;
    std::uint64_t seed = 1;
    std::string out = "out";
    std::size_t thin = 1;
    unsigned threads = 1;
    bool write_path = false;

    std::vector<double> xi_grid{-2.0, -1.0, 0.0, 1.0, 2.0};
    std::vector<double> eps_values{0.04, 0.02, 0.01};
    LPOracleConfig lp;

    int order = 1;
    double perturbation = 0.3;
    double lift_duration = 2.5;

    void validate() const;
};

nlohmann::json to_json(RunConfig const& cfg);

/// Builds a config from defaults overlaid with `doc`. Throws ConfigError on
/// unknown keys, wrong types or failed validation.
RunConfig parse_config(nlohmann::json const& doc);

nlohmann::json load_config_file(std::filesystem::path const& path);

/// Applies `key=value` to `doc`; the value is read as JSON when it parses,
/// otherwise as a string.
void apply_override(nlohmann::json& doc, std::string const& assignment);

}  // namespace rsm::cli
