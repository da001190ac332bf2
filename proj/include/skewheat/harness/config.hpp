#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "skewheat/medium.hpp"
#include "skewheat/noise.hpp"
#include "skewheat/solver.hpp"

namespace skewheat::harness {

inline constexpr const char* tool_version = "0.1.0";
inline constexpr int format_version = 1;

/// Invalid or unreadable configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Backend { convolution, exact_linear };

inline std::string to_string(Backend b) { return b == Backend::convolution ? "convolution" : "exact-linear"; }

inline Backend parse_backend(const std::string& s) {
    if (s == "convolution") return Backend::convolution;
    if (s == "exact-linear") return Backend::exact_linear;
    throw ConfigError("unknown backend '" + s + "' (expected convolution or exact-linear)");
}

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = {"kernel-selftest", "simulate", "quartic", "convergence", "estimate"};
    return kinds;
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ConfigError("key '" + key + "': expected a number, got '" + raw + "'");
    }
    return v;
}

inline std::uint64_t parse_u64(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + raw + "'");
    }
    return v;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt(v[i]);
    }
    return out;
}

}  // namespace detail

/// Parses "one", "const:c", "affine:h1,h2" (h1 u + h2) or "sin1:c0,c1" (c0 + c1 sin u).
inline SigmaSpec parse_sigma(const std::string& text) {
    const std::string s = detail::trim(text);
    if (s == "one") return SigmaSpec::one();
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ConfigError("unknown sigma preset '" + s + "'");
    const std::string name = s.substr(0, colon);
    const auto args = detail::split_list(s.substr(colon + 1));
    std::vector<double> v;
    for (const auto& a : args) v.push_back(detail::parse_double(a, "model.sigma"));
    if (name == "const" && v.size() == 1) return SigmaSpec::constant_value(v[0], s);
    if (name == "affine" && v.size() == 2) return SigmaSpec::affine(v[0], v[1]);
    if (name == "sin1" && v.size() == 2) return SigmaSpec::sine(v[0], v[1]);
    throw ConfigError("malformed sigma preset '" + s + "'");
}

/// Everything a run depends on. Optional fields are filled by resolve().
struct ExperimentConfig {
    MediumParams medium;

    double T = 1.0;
    std::size_t n = 64;
    std::optional<double> L;  ///< default from the kernel tail rule
    std::size_t m = 128;
    std::size_t refine = 1;   ///< simulation steps per statistic step

    std::string sigma = "one";
    std::string lag = "variance-matched";

    std::string kind;                  ///< empty: taken from the subcommand
    std::optional<Backend> backend;    ///< default: exact-linear when valid
    std::vector<double> observe = {0.5};
    std::size_t replicates = 100;
    std::uint64_t seed = 20240601;
    std::size_t workers = 1;
    std::size_t memory_budget_mb = 2048;
    std::vector<std::size_t> n_list = {64, 256, 1024};
    std::vector<std::size_t> m_list;  ///< averaged-statistic point counts
    bool zero_noise = false;
    double variance_tolerance = 0.05;

    std::string out_dir = "results";

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Half-width that keeps the neglected Gaussian mass of the kernel below
/// about 1e-8: max(sqrt a1, sqrt a2) 6 sqrt(T) + max |x_obs|.
inline double default_half_width(const MediumParams& p, double T, const std::vector<double>& observe) {
    double reach = 0.0;
    for (double x : observe) reach = std::max(reach, std::abs(x));
    return std::max(std::sqrt(p.a1), std::sqrt(p.a2)) * 6.0 * std::sqrt(T) + reach;
}

inline KernelLag parse_lag(const std::string& s) {
    if (s == "variance-matched") return KernelLag::variance_matched;
    if (s == "midpoint") return KernelLag::midpoint;
    throw ConfigError("unknown kernel lag rule '" + s + "' (expected variance-matched or midpoint)");
}

/// Checks every field and fills defaults. Throws ConfigError.
inline ExperimentConfig resolve(ExperimentConfig c, const std::string& subcommand = {}) {
    try {
        c.medium.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!subcommand.empty()) {
        if (!c.kind.empty() && c.kind != subcommand) {
            throw ConfigError("config experiment kind '" + c.kind + "' conflicts with subcommand '" + subcommand + "'");
        }
        c.kind = subcommand;
    }
    if (!c.kind.empty()) {
        const auto& kinds = experiment_kinds();
        if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) {
            throw ConfigError("unknown experiment kind '" + c.kind + "'");
        }
    }
    if (!(c.T > 0.0)) throw ConfigError("grid.T must be positive");
    if (c.n < 1) throw ConfigError("grid.n must be at least 1");
    if (c.m < 1) throw ConfigError("grid.m must be at least 1");
    if (c.refine < 1) throw ConfigError("grid.refine must be at least 1");
    if (c.replicates < 1) throw ConfigError("experiment.replicates must be at least 1");
    if (c.workers < 1) throw ConfigError("experiment.workers must be at least 1");
    if (c.observe.empty()) throw ConfigError("experiment.observe must list at least one point");
    if (!(c.variance_tolerance > 0.0)) throw ConfigError("experiment.variance_tolerance must be positive");
    for (std::size_t v : c.n_list) {
        if (v < 1) throw ConfigError("experiment.n_list entries must be at least 1");
    }
    for (std::size_t v : c.m_list) {
        if (v < 1) throw ConfigError("experiment.m_list entries must be at least 1");
    }
    parse_lag(c.lag);
    const SigmaSpec sigma = parse_sigma(c.sigma);
    if (!c.L) c.L = default_half_width(c.medium, c.T, c.observe);
    if (!(*c.L > 0.0)) throw ConfigError("grid.L must be positive");
    for (double x : c.observe) {
        if (!(std::abs(x) < *c.L)) throw ConfigError("observation point " + format_double(x) + " lies outside [-L, L]");
    }
    if (!c.backend) {
        const bool statistical = c.kind == "quartic" || c.kind == "convergence" || c.kind == "estimate";
        c.backend = (statistical && sigma.is_unit() && c.m_list.empty()) ? Backend::exact_linear : Backend::convolution;
    }
    if (*c.backend == Backend::exact_linear) {
        if (!sigma.is_unit()) throw ConfigError("the exact-linear backend requires sigma = one");
        if (c.kind == "simulate") throw ConfigError("simulate always uses the convolution backend");
        if (!c.m_list.empty()) throw ConfigError("the averaged statistic (m_list) needs the convolution backend");
    }
    return c;
}

namespace detail {

using Section = std::map<std::string, std::string>;
using Document = std::map<std::string, Section>;

inline Document to_document(const ExperimentConfig& c) {
    auto u = [](std::size_t v) { return std::to_string(v); };
    Document d;
    d["medium"] = {{"a1", format_double(c.medium.a1)},
                   {"a2", format_double(c.medium.a2)},
                   {"rho1", format_double(c.medium.rho1)},
                   {"rho2", format_double(c.medium.rho2)}};
    d["grid"] = {{"T", format_double(c.T)}, {"n", u(c.n)}, {"m", u(c.m)}, {"refine", u(c.refine)}};
    if (c.L) d["grid"]["L"] = format_double(*c.L);
    d["model"] = {{"sigma", c.sigma}, {"lag", c.lag}};
    auto& e = d["experiment"];
    if (!c.kind.empty()) e["kind"] = c.kind;
    if (c.backend) e["backend"] = to_string(*c.backend);
    e["observe"] = join(c.observe, format_double);
    e["replicates"] = u(c.replicates);
    e["seed"] = std::to_string(c.seed);
    e["workers"] = u(c.workers);
    e["memory_budget_mb"] = u(c.memory_budget_mb);
    e["n_list"] = join(c.n_list, u);
    e["m_list"] = join(c.m_list, u);
    e["zero_noise"] = c.zero_noise ? "true" : "false";
    e["variance_tolerance"] = format_double(c.variance_tolerance);
    d["output"] = {{"dir", c.out_dir}};
    return d;
}

}  // namespace detail

/// Canonical text form: sections and keys in sorted order, numbers with 17
/// significant digits, so parse_config(write_config(c)) == c.
inline std::string write_config(const ExperimentConfig& c) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [section, keys] : detail::to_document(c)) {
        if (!first) os << "\n";
        first = false;
        os << "[" << section << "]\n";
        for (const auto& [k, v] : keys) os << k << " = " << v << "\n";
    }
    return os.str();
}

/// Parses the sectioned key = value format. Unknown sections or keys are errors.
inline ExperimentConfig parse_config(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    static const std::map<std::string, std::set<std::string>> known = {
        {"medium", {"a1", "a2", "rho1", "rho2"}},
        {"grid", {"T", "n", "L", "m", "refine"}},
        {"model", {"sigma", "lag"}},
        {"experiment",
         {"kind", "backend", "observe", "replicates", "seed", "workers", "memory_budget_mb", "n_list", "m_list",
          "zero_noise", "variance_tolerance"}},
        {"output", {"dir"}},
    };
    ExperimentConfig c;
    for (const auto& [section, body] : tree) {
        const auto sec = known.find(section);
        if (sec == known.end()) throw ConfigError("unknown config section [" + section + "]");
        if (!body.data().empty() && body.empty()) throw ConfigError("key '" + section + "' must be inside a section");
        for (const auto& [key, node] : body) {
            if (!sec->second.count(key)) throw ConfigError("unknown config key '" + section + "." + key + "'");
            const std::string full = section + "." + key;
            const std::string v = detail::trim(node.data());
            if (section == "medium") {
                const double x = detail::parse_double(v, full);
                if (key == "a1") c.medium.a1 = x;
                else if (key == "a2") c.medium.a2 = x;
                else if (key == "rho1") c.medium.rho1 = x;
                else c.medium.rho2 = x;
            } else if (section == "grid") {
                if (key == "T") c.T = detail::parse_double(v, full);
                else if (key == "L") c.L = detail::parse_double(v, full);
                else if (key == "n") c.n = detail::parse_u64(v, full);
                else if (key == "m") c.m = detail::parse_u64(v, full);
                else c.refine = detail::parse_u64(v, full);
            } else if (section == "model") {
                if (key == "sigma") c.sigma = v;
                else c.lag = v;
            } else if (section == "experiment") {
                if (key == "kind") c.kind = v;
                else if (key == "backend") c.backend = parse_backend(v);
                else if (key == "observe") {
                    c.observe.clear();
                    for (const auto& s : detail::split_list(v)) c.observe.push_back(detail::parse_double(s, full));
                } else if (key == "replicates") c.replicates = detail::parse_u64(v, full);
                else if (key == "seed") c.seed = detail::parse_u64(v, full);
                else if (key == "workers") c.workers = detail::parse_u64(v, full);
                else if (key == "memory_budget_mb") c.memory_budget_mb = detail::parse_u64(v, full);
                else if (key == "n_list" || key == "m_list") {
                    auto& list = key == "n_list" ? c.n_list : c.m_list;
                    list.clear();
                    for (const auto& s : detail::split_list(v)) list.push_back(detail::parse_u64(s, full));
                } else if (key == "zero_noise") {
                    if (v == "true") c.zero_noise = true;
                    else if (v == "false") c.zero_noise = false;
                    else throw ConfigError("key '" + full + "': expected true or false");
                } else c.variance_tolerance = detail::parse_double(v, full);
            } else {
                c.out_dir = v;
            }
        }
    }
    return c;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

/// 64-bit FNV-1a of the canonical config text. Settings that cannot change
/// results (worker count, output directory) are left out, so the provenance
/// line is identical whichever --workers or --out a run used.
inline std::uint64_t config_hash(ExperimentConfig c) {
    c.workers = 1;
    c.out_dir.clear();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char ch : write_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline GridSpec simulation_grid(const ExperimentConfig& c, std::size_t n_stat) {
    return build_grid(c.T, n_stat * c.refine, c.L.value(), c.m);
}

inline SolverOptions solver_options(const ExperimentConfig& c) {
    SolverOptions o;
    o.lag = parse_lag(c.lag);
    o.memory_budget_bytes = c.memory_budget_mb * (std::size_t{1} << 20);
    return o;
}

}  // namespace skewheat::harness
