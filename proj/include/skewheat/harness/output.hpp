#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "skewheat/harness/config.hpp"
#include "skewheat/harness/experiments.hpp"
#include "skewheat/harness/report.hpp"
#include "skewheat/noise.hpp"

namespace skewheat::harness {

inline std::string hex_hash(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline nlohmann::ordered_json run_summary(const ExperimentConfig& c, const RunResult& result, const RunOptions& opt) {
    nlohmann::ordered_json j;
    j["format_version"] = format_version;
    j["tool"] = "skewheat";
    j["tool_version"] = tool_version;
    j["experiment"] = c.kind;
    j["backend"] = c.backend ? to_string(*c.backend) : "none";
    j["config_hash"] = hex_hash(config_hash(c));
    j["seed"] = c.seed;
    j["rng"] = rng::generator_name;
    j["gaussian_transform"] = rng::gaussian_transform;
    j["config"] = write_config(c);
    j["rows"] = result.rows.size();
    auto checks = nlohmann::ordered_json::array();
    for (const auto& ch : result.checks) {
        nlohmann::ordered_json e;
        e["name"] = ch.name;
        e["value"] = csv_number(ch.value);
        e["threshold"] = csv_number(ch.threshold);
        e["passed"] = ch.passed;
        e["diagnostic"] = ch.diagnostic;
        checks.push_back(e);
    }
    j["checks"] = checks;
    j["status"] = result.passed() ? "pass" : "fail";
    if (opt.record_timing) j["seconds"] = result.seconds;
    return j;
}

/// Writes <dir>/<kind>.csv, <dir>/<kind>_summary.json and, for simulate,
/// <dir>/<kind>_paths_<k>.csv with columns replicate,i,t,u.
inline void write_outputs(const ExperimentConfig& c, const RunResult& result, const RunOptions& opt) {
    const std::filesystem::path dir(c.out_dir);
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / (c.kind + ".csv"));
        write_csv(csv, c, result.rows);
    }
    {
        std::ofstream js(dir / (c.kind + "_summary.json"));
        js << run_summary(c, result, opt).dump(2) << "\n";
    }
    for (std::size_t k = 0; k < result.paths.size(); ++k) {
        const auto& table = result.paths[k];
        std::ofstream csv(dir / (c.kind + "_paths_" + std::to_string(k) + ".csv"));
        csv << provenance_line(c) << " x=" << csv_number(table.x) << " location=" << csv_number(table.location)
            << "\n";
        csv << "replicate,i,t,u\n";
        for (std::size_t r = 0; r < table.replicates.size(); ++r) {
            const auto& values = table.replicates[r];
            const std::size_t n = values.size() - 1;
            for (std::size_t i = 0; i <= n; ++i) {
                const double t = i == n ? c.T : static_cast<double>(i) * c.T / static_cast<double>(n);
                csv << r << ',' << i << ',' << csv_number(t) << ',' << csv_number(values[i]) << "\n";
            }
        }
    }
}

}  // namespace skewheat::harness
