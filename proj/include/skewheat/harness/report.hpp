#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "skewheat/harness/config.hpp"

namespace skewheat::harness {

inline constexpr double not_available = std::numeric_limits<double>::quiet_NaN();

/// One line of an experiment table.
struct ResultRow {
    std::string experiment;
    std::string backend;
    std::size_t n = 0;
    std::size_t m = 0;  ///< averaged-point count for v_nm rows, spatial cells otherwise (0 for exact-linear)
    double x = not_available;
    std::size_t replicates = 0;
    std::string statistic;
    double value = not_available;
    double std_error = not_available;
    double target = not_available;
    double rel_error = not_available;
    double seconds = 0.0;
};

inline const char* csv_header = "experiment,backend,n,m,x,R,statistic,value,std_error,target,rel_error,seconds";

inline double relative_error(double value, double target) {
    if (!std::isfinite(value) || !std::isfinite(target) || target == 0.0) return not_available;
    return std::abs(value - target) / std::abs(target);
}

/// Numbers with 17 significant digits; NaN as "nan".
inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// Metadata comment line that precedes the header in every CSV.
inline std::string provenance_line(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "# tool=skewheat version=" << tool_version << " format=" << format_version << " config_hash=" << std::hex
       << std::setw(16) << std::setfill('0') << config_hash(c) << std::dec << " seed=" << c.seed;
    return os.str();
}

inline void write_csv(std::ostream& out, const ExperimentConfig& c, const std::vector<ResultRow>& rows) {
    out << provenance_line(c) << "\n" << csv_header << "\n";
    for (const auto& r : rows) {
        out << r.experiment << ',' << r.backend << ',' << r.n << ',' << r.m << ',' << csv_number(r.x) << ','
            << r.replicates << ',' << r.statistic << ',' << csv_number(r.value) << ',' << csv_number(r.std_error)
            << ',' << csv_number(r.target) << ',' << csv_number(r.rel_error) << ',' << csv_number(r.seconds) << "\n";
    }
}

}  // namespace skewheat::harness
