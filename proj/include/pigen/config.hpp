// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file config.hpp
 * @brief Run configuration in a flat "key = value" text format.
 *
 * Lines hold one key and one value separated by '='; '#' starts a comment.
 * Later assignments override earlier ones, so command-line overrides are
 * applied by feeding them through the same setter after the file.
 */

#pragma once

#include "pigen/error.hpp"
#include "pigen/recovery.hpp"
#include "pigen/selector.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pigen {

enum class SampleSource { Simulate, Counts };

struct RunConfig {
    std::string fcidump;
    int n_alpha = -1;  ///< -1: take from the FCIDUMP header
    int n_beta = -1;
    double eps_int = 1e-10;
    double eps_coeff = 1e-10;
    double eps_energy = 1e-5;
    int n_max = 4;
    double x_percent = 2.0;
    JoinPolicy join_policy = JoinPolicy::AtLeastOne;
    GenerationMode generator = GenerationMode::Rbm;
    int rbm_epochs = 3;
    int rbm_k_gibbs = 20;
    double rbm_lr = 0.001;
    std::size_t rbm_target_size = 4000;
    std::size_t rbm_batch_size = 10;
    int rbm_hidden = 0;
    int gibbs_steps = 1;
    int retry_rounds = 10;
    bool warm_start = true;
    SampleSource source = SampleSource::Simulate;
    std::uint64_t shots = 100000;
    double bitflip_p = 0.01;
    std::string counts_path;
    std::uint64_t seed = 1;
    int max_macro = 100;
    std::uint64_t fci_cap = 20000;
    std::optional<double> reference_energy;
    std::string output_dir = "pigen_out";

    friend bool operator==(const RunConfig&, const RunConfig&) = default;

    /// Throws ConfigError on any violated invariant.
    void validate() const {
        auto need = [](bool ok, const std::string& msg) {
            if (!ok) throw ConfigError(msg);
        };
        need(eps_int >= 0.0 && eps_coeff >= 0.0 && eps_energy > 0.0,
             "thresholds must be nonnegative (eps_energy positive)");
        need(n_max >= 2 && n_max <= 4, "n_max must be 2, 3 or 4");
        need(x_percent > 0.0, "x_percent must be positive");
        need(rbm_epochs >= 0 && rbm_k_gibbs >= 1 && rbm_lr >= 0.0 && rbm_target_size >= 1 && rbm_batch_size >= 1,
             "RBM parameters out of range");
        need(rbm_hidden >= 0 && gibbs_steps >= 0 && retry_rounds >= 0, "generation parameters out of range");
        need(bitflip_p >= 0.0 && bitflip_p <= 1.0, "bitflip_p must lie in [0, 1]");
        need(max_macro >= 1, "max_macro must be at least 1");
        need(source != SampleSource::Counts || !counts_path.empty(), "source = counts requires counts_path");
        need(source != SampleSource::Simulate || shots >= 1, "source = simulate requires shots >= 1");
        need((n_alpha < 0) == (n_beta < 0), "set both n_alpha and n_beta or neither");
    }

    [[nodiscard]] RecoveryConfig recovery() const {
        RecoveryConfig r;
        r.eps_coeff = eps_coeff;
        r.eps_energy = eps_energy;
        r.x_percent = x_percent;
        r.max_macro = max_macro;
        r.target_size = rbm_target_size;
        r.hidden_units = rbm_hidden;
        r.warm_start = warm_start;
        r.cd = {rbm_epochs, rbm_k_gibbs, rbm_lr, rbm_batch_size};
        r.generation = {gibbs_steps, retry_rounds};
        r.mode = generator;
        r.seed = seed;
        r.reference_energy = reference_energy;
        return r;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw ConfigError("invalid value '" + v + "' for key '" + key + "'");
    return out;
}

template <>
inline double parse_number<double>(const std::string& key, const std::string& v) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    std::istringstream is(v);
    double x = 0.0;
    std::string rest;
    if (!(is >> x) || (is >> rest)) throw ConfigError("invalid value '" + v + "' for key '" + key + "'");
    return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("invalid boolean '" + v + "' for key '" + key + "'");
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field number_field(T RunConfig::*member) {
    return {[member](RunConfig& c, const std::string& v) { c.*member = parse_number<T>("", v); },
            [member](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>)
                    return format_double(c.*member);
                else
                    return std::to_string(c.*member);
            }};
}

/// Keys in serialization order.
inline const std::vector<std::pair<std::string, Field>>& config_fields() {
    static const std::vector<std::pair<std::string, Field>> fields = [] {
        std::vector<std::pair<std::string, Field>> f;
        f.emplace_back("fcidump", Field{[](RunConfig& c, const std::string& v) { c.fcidump = v; },
                                        [](const RunConfig& c) { return c.fcidump; }});
        f.emplace_back("n_alpha", number_field(&RunConfig::n_alpha));
        f.emplace_back("n_beta", number_field(&RunConfig::n_beta));
        f.emplace_back("eps_int", number_field(&RunConfig::eps_int));
        f.emplace_back("eps_coeff", number_field(&RunConfig::eps_coeff));
        f.emplace_back("eps_energy", number_field(&RunConfig::eps_energy));
        f.emplace_back("n_max", number_field(&RunConfig::n_max));
        f.emplace_back("x_percent", number_field(&RunConfig::x_percent));
        f.emplace_back("join_policy",
                       Field{[](RunConfig& c, const std::string& v) {
                                 if (v == "at_least_one") c.join_policy = JoinPolicy::AtLeastOne;
                                 else if (v == "exactly_one") c.join_policy = JoinPolicy::ExactlyOne;
                                 else throw ConfigError("join_policy must be at_least_one or exactly_one");
                             },
                             [](const RunConfig& c) {
                                 return std::string(c.join_policy == JoinPolicy::AtLeastOne ? "at_least_one"
                                                                                            : "exactly_one");
                             }});
        f.emplace_back("generator", Field{[](RunConfig& c, const std::string& v) {
                                              if (v == "rbm") c.generator = GenerationMode::Rbm;
                                              else if (v == "random") c.generator = GenerationMode::Random;
                                              else throw ConfigError("generator must be rbm or random");
                                          },
                                          [](const RunConfig& c) {
                                              return std::string(c.generator == GenerationMode::Rbm ? "rbm" : "random");
                                          }});
        f.emplace_back("rbm_epochs", number_field(&RunConfig::rbm_epochs));
        f.emplace_back("rbm_k_gibbs", number_field(&RunConfig::rbm_k_gibbs));
        f.emplace_back("rbm_lr", number_field(&RunConfig::rbm_lr));
        f.emplace_back("rbm_target_size", number_field(&RunConfig::rbm_target_size));
        f.emplace_back("rbm_batch_size", number_field(&RunConfig::rbm_batch_size));
        f.emplace_back("rbm_hidden", number_field(&RunConfig::rbm_hidden));
        f.emplace_back("gibbs_steps", number_field(&RunConfig::gibbs_steps));
        f.emplace_back("retry_rounds", number_field(&RunConfig::retry_rounds));
        f.emplace_back("warm_start",
                       Field{[](RunConfig& c, const std::string& v) { c.warm_start = parse_bool("warm_start", v); },
                             [](const RunConfig& c) { return std::string(c.warm_start ? "true" : "false"); }});
        f.emplace_back("source", Field{[](RunConfig& c, const std::string& v) {
                                           if (v == "simulate") c.source = SampleSource::Simulate;
                                           else if (v == "counts") c.source = SampleSource::Counts;
                                           else throw ConfigError("source must be simulate or counts");
                                       },
                                       [](const RunConfig& c) {
                                           return std::string(c.source == SampleSource::Simulate ? "simulate"
                                                                                                 : "counts");
                                       }});
        f.emplace_back("shots", number_field(&RunConfig::shots));
        f.emplace_back("bitflip_p", number_field(&RunConfig::bitflip_p));
        f.emplace_back("counts_path", Field{[](RunConfig& c, const std::string& v) { c.counts_path = v; },
                                            [](const RunConfig& c) { return c.counts_path; }});
        f.emplace_back("seed", number_field(&RunConfig::seed));
        f.emplace_back("max_macro", number_field(&RunConfig::max_macro));
        f.emplace_back("fci_cap", number_field(&RunConfig::fci_cap));
        f.emplace_back("reference_energy",
                       Field{[](RunConfig& c, const std::string& v) {
                                 if (v.empty() || v == "none") c.reference_energy.reset();
                                 else c.reference_energy = parse_number<double>("reference_energy", v);
                             },
                             [](const RunConfig& c) {
                                 return c.reference_energy ? format_double(*c.reference_energy) : std::string("none");
                             }});
        f.emplace_back("output_dir", Field{[](RunConfig& c, const std::string& v) { c.output_dir = v; },
                                           [](const RunConfig& c) { return c.output_dir; }});
        return f;
    }();
    return fields;
}

} // namespace detail

/// Assign one key; ConfigError for unknown keys or unparsable values.
inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& [name, field] : detail::config_fields())
        if (name == key) {
            try {
                field.set(cfg, value);
            } catch (const ConfigError& e) {
                throw ConfigError("key '" + key + "': " + e.what());
            }
            return;
        }
    throw ConfigError("unknown configuration key '" + key + "'");
}

/// Apply a "key=value" override string.
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    set_config_value(cfg, detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
}

/// Apply every assignment of a config stream on top of `cfg`.
inline void merge_config(RunConfig& cfg, std::istream& in) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (detail::trim(line).empty()) continue;
        if (line.find('=') == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + " is not key = value");
        apply_override(cfg, line);
    }
}

[[nodiscard]] inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    merge_config(cfg, in);
    return cfg;
}

[[nodiscard]] inline RunConfig read_config_file(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    merge_config(base, in);
    return base;
}

inline void serialize_config(std::ostream& os, const RunConfig& cfg) {
    for (const auto& [name, field] : detail::config_fields()) os << name << " = " << field.get(cfg) << '\n';
}

[[nodiscard]] inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    serialize_config(os, cfg);
    return os.str();
}

} // namespace pigen
