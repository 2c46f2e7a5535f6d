// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file report.hpp
 * @brief Run artifacts: report.json, cycles.csv, coeffs.csv.
 *
 * Output contains no timestamps or timings, so reruns with the same
 * configuration are byte-identical.
 */

#pragma once

#include "pigen/config.hpp"
#include "pigen/pipeline.hpp"

#include <json.hpp>

#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

namespace pigen {

namespace detail {

inline std::string sci(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15e", x);
    return buf;
}

} // namespace detail

[[nodiscard]] inline nlohmann::ordered_json report_json(const PipelineResult& r, const RunConfig& cfg) {
    using nlohmann::ordered_json;
    const auto& rep = r.report;
    ordered_json j;
    j["final_energy"] = rep.energy;
    if (rep.reference_energy) {
        j["reference_energy"] = *rep.reference_energy;
        j["error_vs_reference"] = rep.energy - *rep.reference_energy;
    }
    j["converged"] = rep.converged;
    j["stop_reason"] = std::string(to_string(rep.stop));
    j["macro_cycles"] = rep.cycles.size();
    j["n_det"] = rep.determinants.size();
    j["blacklist_size"] = rep.blacklist_size;
    j["search_space_size"] = rep.search_size;
    j["symmetry_space_dimension"] = rep.symmetry_dimension;
    j["basis"] = {{"n_spatial", r.basis.n_spatial}, {"n_alpha", r.basis.n_alpha}, {"n_beta", r.basis.n_beta}};
    j["samples"] = {{"n_shots", r.counts.n_shots()},
                    {"distinct_bitstrings", r.counts.entries.size()},
                    {"in_sector_configurations", r.hardware.size()}};
    ordered_json ranks = ordered_json::array();
    for (auto c : r.screen.rank_counts) ranks.push_back(c);
    const auto& cost = r.screen.cost;
    j["perturbative_support"] = {{"configurations", r.screen.configurations.size()},
                                 {"rank_counts", ranks},
                                 {"scatterers", cost.n_scatterers},
                                 {"doubles", cost.n_doubles},
                                 {"triples_join_ops", cost.counters.triples_join_ops},
                                 {"quadruples_join_ops", cost.counters.quadruples_join_ops},
                                 {"dense_triples_ops", cost.dense_triples_ops}};
    ordered_json conf;
    for (const auto& [name, field] : detail::config_fields()) conf[name] = field.get(cfg);
    j["config"] = conf;
    return j;
}

inline void write_report_json(std::ostream& os, const PipelineResult& r, const RunConfig& cfg) {
    os << report_json(r, cfg).dump(2) << '\n';
}

inline void write_cycles_csv(std::ostream& os, const RecoveryReport& rep) {
    os << "macro,energy,delta_energy,error_vs_reference,n_det,n_dominant,newly_blacklisted,blacklist_size,"
          "search_size,generated,survivors,shortfall,trained,davidson_iterations\n";
    for (const auto& c : rep.cycles) {
        const double err = rep.reference_energy ? c.energy - *rep.reference_energy
                                                : std::numeric_limits<double>::quiet_NaN();
        os << c.macro << ',' << detail::sci(c.energy) << ',' << detail::sci(c.delta_energy) << ','
           << detail::sci(err) << ',' << c.n_det << ',' << c.n_dominant << ',' << c.newly_blacklisted << ','
           << c.blacklist_size << ',' << c.search_size << ',' << c.generated << ',' << c.survivors << ','
           << c.shortfall << ',' << (c.trained ? 1 : 0) << ',' << c.davidson_iterations << '\n';
    }
}

/// Final CI vector, |c| ascending (ties by bitstring).
inline void write_coeffs_csv(std::ostream& os, const RecoveryReport& rep, const OrbitalBasis& basis) {
    std::vector<std::size_t> order(rep.determinants.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ca = std::abs(rep.coefficients(static_cast<Eigen::Index>(a)));
        const double cb = std::abs(rep.coefficients(static_cast<Eigen::Index>(b)));
        return ca != cb ? ca < cb : rep.determinants[a] < rep.determinants[b];
    });
    const auto ref = reference_determinant(basis);
    os << "abs_coefficient,coefficient,excitation_rank,bitstring\n";
    for (std::size_t k : order) {
        const double c = rep.coefficients(static_cast<Eigen::Index>(k));
        os << detail::sci(std::abs(c)) << ',' << detail::sci(c) << ',' << excitation_rank(rep.determinants[k], ref)
           << ',' << to_bitstring(rep.determinants[k], basis.n_spatial) << '\n';
    }
}

} // namespace pigen
