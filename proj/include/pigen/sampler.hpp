// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file sampler.hpp
 * @brief Measurement-count simulation and ingestion.
 *
 * Stands in for a quantum processor: shots are drawn from |c|^2 of a CI
 * vector, turned into blocked bitstrings and corrupted by independent bit
 * flips. Counts files hold one "bitstring count" pair per line.
 */

#pragma once

#include "pigen/detail/parallel.hpp"
#include "pigen/error.hpp"
#include "pigen/fermion.hpp"
#include "pigen/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pigen {

struct Counts {
    std::map<std::string, u64> entries;

    [[nodiscard]] u64 n_shots() const noexcept {
        u64 n = 0;
        for (const auto& [bits, c] : entries) n += c;
        return n;
    }
    [[nodiscard]] std::vector<BitstringCount> as_list() const {
        return {entries.begin(), entries.end()};
    }
    friend bool operator==(const Counts&, const Counts&) = default;
};

struct NoiseSpec {
    double bitflip_p = 0.0;
    std::uint64_t seed = 0;
};

/// Shots per independently seeded chunk; fixed so results do not depend on
/// the number of worker threads.
inline constexpr u64 kShotsPerChunk = 8192;

/// Draw `n_shots` determinants with probability |c|^2 / |c|^2_total, write
/// them as blocked bitstrings, and flip each bit with probability bitflip_p.
[[nodiscard]] inline Counts sample_from_state(const Eigen::VectorXd& coefficients, const ConfigurationSet& configs,
                                              int n_spatial, u64 n_shots, const NoiseSpec& noise) {
    if (static_cast<std::size_t>(coefficients.size()) != configs.size() || configs.empty())
        throw ConfigError("sample_from_state: CI vector and configuration set must be aligned and nonempty");
    if (!(noise.bitflip_p >= 0.0 && noise.bitflip_p <= 1.0)) throw ConfigError("bitflip_p must lie in [0, 1]");

    std::vector<double> cumulative(configs.size());
    double total = 0.0;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        const double c = coefficients(static_cast<Eigen::Index>(k));
        total += c * c;
        cumulative[k] = total;
    }
    if (!(total > 0.0)) throw NumericalError("sample_from_state: zero-norm CI vector");
    std::vector<std::string> strings;
    strings.reserve(configs.size());
    for (const auto& d : configs) strings.push_back(to_bitstring(d, n_spatial));

    const u64 n_chunks = (n_shots + kShotsPerChunk - 1) / kShotsPerChunk;
    std::vector<Counts> partial(n_chunks);
    detail::parallel_for(
        static_cast<std::size_t>(n_chunks),
        [&](std::size_t chunk) {
            Rng rng(derive_seed(noise.seed, Stream::Sampler, chunk));
            const u64 begin = chunk * kShotsPerChunk;
            const u64 end = std::min(n_shots, begin + kShotsPerChunk);
            auto& out = partial[chunk].entries;
            for (u64 shot = begin; shot < end; ++shot) {
                const double x = uniform01(rng) * total;
                auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
                if (it == cumulative.end()) --it;
                std::string bits = strings[static_cast<std::size_t>(it - cumulative.begin())];
                if (noise.bitflip_p > 0.0)
                    for (char& b : bits)
                        if (uniform01(rng) < noise.bitflip_p) b = (b == '0') ? '1' : '0';
                ++out[bits];
            }
        },
        2);
    Counts merged;
    for (const auto& p : partial)
        for (const auto& [bits, c] : p.entries) merged.entries[bits] += c;
    return merged;
}

/// Probability that independent flips with probability p keep a sector
/// bitstring inside the sector: per spin channel, equal numbers of
/// occupied->empty and empty->occupied flips.
[[nodiscard]] inline double sector_survival_probability(const OrbitalBasis& basis, double p) {
    auto channel = [&](int occupied) {
        const int virt = basis.n_spatial - occupied;
        double sum = 0.0;
        for (int a = 0; a <= std::min(occupied, virt); ++a)
            sum += static_cast<double>(binomial(occupied, a)) * static_cast<double>(binomial(virt, a)) *
                   std::pow(p, 2 * a) * std::pow(1.0 - p, basis.n_spatial - 2 * a);
        return sum;
    };
    return channel(basis.n_alpha) * channel(basis.n_beta);
}

// ---------------------------------------------------------------------------
// Counts files
// ---------------------------------------------------------------------------

/// Parse "bitstring count" lines; '#' starts a comment, blank lines are skipped.
[[nodiscard]] inline Counts load_counts(std::istream& in) {
    Counts k;
    std::string line;
    std::size_t width = 0;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string bits, count, extra;
        if (!(ls >> bits)) continue;
        const auto where = " on counts line " + std::to_string(line_no);
        if (!(ls >> count) || (ls >> extra)) throw FormatError("expected 'bitstring count'" + where);
        if (bits.find_first_not_of("01") != std::string::npos) throw FormatError("bitstring must be 0/1" + where);
        if (count.empty() || count.find_first_not_of("0123456789") != std::string::npos)
            throw FormatError("count must be a nonnegative integer" + where);
        if (width == 0) width = bits.size();
        if (bits.size() != width) throw FormatError("inconsistent bitstring length" + where);
        try {
            k.entries[bits] += std::stoull(count);
        } catch (const std::out_of_range&) {
            throw FormatError("count out of range" + where);
        }
    }
    return k;
}

inline void save_counts(std::ostream& os, const Counts& k) {
    os << "# bitstring count (blocked layout: alpha orbitals then beta orbitals)\n";
    for (const auto& [bits, c] : k.entries) os << bits << ' ' << c << '\n';
}

/// Sector filter of measured counts; provenance "hardware".
[[nodiscard]] inline ConfigurationSet counts_to_configurations(const Counts& k, const OrbitalBasis& basis) {
    for (const auto& [bits, c] : k.entries)
        if (static_cast<int>(bits.size()) != basis.n_spin_orbitals())
            throw ConfigError("counts bitstring length " + std::to_string(bits.size()) + " differs from 2 * n_spatial = " +
                              std::to_string(basis.n_spin_orbitals()));
    const auto list = k.as_list();
    return symmetry_filter(list, basis, BitLayout::Blocked, Provenance::Hardware);
}

} // namespace pigen
