// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file fermion.hpp
 * @brief Determinants as alpha/beta occupation masks, excitation algebra and
 *        particle-sector (N_alpha, N_beta) filtering.
 *
 * Spin-orbital indexing is blocked: spin orbital p < n_spatial is alpha
 * orbital p, spin orbital n_spatial + p is beta orbital p. Bitstrings are
 * ASCII '0'/'1' with the leftmost character holding spin orbital 0.
 */

#pragma once

#include "pigen/error.hpp"

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace pigen {

using u64 = std::uint64_t;

inline constexpr int kMaxSpatialOrbitals = 64;

enum class Spin : int { Alpha = 0, Beta = 1 };

struct OrbitalBasis {
    int n_spatial = 0;
    int n_alpha = 0;
    int n_beta = 0;

    [[nodiscard]] constexpr int n_spin_orbitals() const noexcept { return 2 * n_spatial; }
    [[nodiscard]] constexpr int n_occupied() const noexcept { return n_alpha + n_beta; }
    [[nodiscard]] constexpr int n_virtual() const noexcept {
        return n_spin_orbitals() - n_occupied();
    }

    void validate() const {
        if (n_spatial < 0 || n_spatial > kMaxSpatialOrbitals)
            throw ConfigError("n_spatial must lie in [0, 64], got " + std::to_string(n_spatial));
        if (n_alpha < 0 || n_alpha > n_spatial || n_beta < 0 || n_beta > n_spatial)
            throw ConfigError("electron counts must lie in [0, n_spatial]");
    }

    friend bool operator==(const OrbitalBasis&, const OrbitalBasis&) = default;
};

/// Mask with the lowest `n` bits set.
[[nodiscard]] constexpr u64 low_bits(int n) noexcept {
    return n >= 64 ? ~u64{0} : (u64{1} << n) - 1;
}

struct Determinant {
    u64 alpha = 0;
    u64 beta = 0;

    constexpr auto operator<=>(const Determinant&) const = default;

    [[nodiscard]] constexpr u64 mask(Spin s) const noexcept {
        return s == Spin::Alpha ? alpha : beta;
    }
    [[nodiscard]] constexpr int n_alpha() const noexcept { return std::popcount(alpha); }
    [[nodiscard]] constexpr int n_beta() const noexcept { return std::popcount(beta); }

    /// Occupation of a blocked spin-orbital index.
    [[nodiscard]] constexpr bool occupied(int spin_orbital, int n_spatial) const noexcept {
        return spin_orbital < n_spatial ? ((alpha >> spin_orbital) & 1u)
                                        : ((beta >> (spin_orbital - n_spatial)) & 1u);
    }
};

struct DeterminantHash {
    [[nodiscard]] std::size_t operator()(const Determinant& d) const noexcept {
        const std::size_t ha = std::hash<u64>{}(d.alpha);
        const std::size_t hb = std::hash<u64>{}(d.beta);
        return ha ^ (hb + 0x9e3779b97f4a7c15ULL + (ha << 6) + (ha >> 2));
    }
};

/// Indices of set bits in ascending order.
[[nodiscard]] inline std::vector<int> set_bits(u64 mask) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(std::popcount(mask)));
    while (mask) {
        out.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return out;
}

[[nodiscard]] inline Determinant make_determinant(std::span<const int> alpha_occupied,
                                                  std::span<const int> beta_occupied,
                                                  const OrbitalBasis& basis) {
    auto build = [&](std::span<const int> occ, const char* channel) {
        u64 m = 0;
        for (int p : occ) {
            if (p < 0 || p >= basis.n_spatial)
                throw ConfigError(std::string(channel) + " index " + std::to_string(p) +
                                  " out of range for n_spatial=" +
                                  std::to_string(basis.n_spatial));
            const u64 bit = u64{1} << p;
            if (m & bit)
                throw ConfigError(std::string("duplicate ") + channel + " index " +
                                  std::to_string(p));
            m |= bit;
        }
        return m;
    };
    return {build(alpha_occupied, "alpha"), build(beta_occupied, "beta")};
}

[[nodiscard]] inline Determinant make_determinant(std::initializer_list<int> alpha_occupied,
                                                  std::initializer_list<int> beta_occupied,
                                                  const OrbitalBasis& basis) {
    return make_determinant(std::span<const int>(alpha_occupied.begin(), alpha_occupied.size()),
                            std::span<const int>(beta_occupied.begin(), beta_occupied.size()),
                            basis);
}

/// Aufbau determinant: lowest n_alpha / n_beta orbitals filled.
[[nodiscard]] constexpr Determinant reference_determinant(const OrbitalBasis& basis) noexcept {
    return {low_bits(basis.n_alpha), low_bits(basis.n_beta)};
}

/// Number of hole-particle pairs separating `d` from `reference`.
///
/// Throws when the two determinants carry different alpha or beta particle
/// numbers: such a pair is not connected by a number-conserving excitation.
[[nodiscard]] inline int excitation_rank(const Determinant& d, const Determinant& reference) {
    if (d.n_alpha() != reference.n_alpha() || d.n_beta() != reference.n_beta())
        throw ConfigError("excitation_rank: determinants belong to different particle sectors");
    return (std::popcount(d.alpha ^ reference.alpha) + std::popcount(d.beta ^ reference.beta)) / 2;
}

/// Same quantity without the sector check; used in hot loops after filtering.
[[nodiscard]] constexpr int excitation_rank_unchecked(const Determinant& a,
                                                      const Determinant& b) noexcept {
    return (std::popcount(a.alpha ^ b.alpha) + std::popcount(a.beta ^ b.beta)) / 2;
}

// ---------------------------------------------------------------------------
// Bitstrings
// ---------------------------------------------------------------------------

/// Blocked: characters [0, n) alpha, [n, 2n) beta. Interleaved: 2p alpha, 2p+1 beta.
enum class BitLayout { Blocked, Interleaved };

[[nodiscard]] inline std::string to_bitstring(const Determinant& d, int n_spatial,
                                              BitLayout layout = BitLayout::Blocked) {
    std::string s(static_cast<std::size_t>(2 * n_spatial), '0');
    for (int p = 0; p < n_spatial; ++p) {
        const bool a = (d.alpha >> p) & 1u;
        const bool b = (d.beta >> p) & 1u;
        if (layout == BitLayout::Blocked) {
            s[static_cast<std::size_t>(p)] = a ? '1' : '0';
            s[static_cast<std::size_t>(n_spatial + p)] = b ? '1' : '0';
        } else {
            s[static_cast<std::size_t>(2 * p)] = a ? '1' : '0';
            s[static_cast<std::size_t>(2 * p + 1)] = b ? '1' : '0';
        }
    }
    return s;
}

[[nodiscard]] inline Determinant from_bitstring(std::string_view s, int n_spatial,
                                                BitLayout layout = BitLayout::Blocked) {
    if (static_cast<int>(s.size()) != 2 * n_spatial)
        throw FormatError("bitstring of length " + std::to_string(s.size()) + " where " +
                          std::to_string(2 * n_spatial) + " was expected");
    Determinant d;
    for (int i = 0; i < 2 * n_spatial; ++i) {
        const char c = s[static_cast<std::size_t>(i)];
        if (c != '0' && c != '1') throw FormatError("bitstring contains '" + std::string(1, c) + "'");
        if (c == '0') continue;
        int p = 0;
        bool beta = false;
        if (layout == BitLayout::Blocked) {
            beta = i >= n_spatial;
            p = beta ? i - n_spatial : i;
        } else {
            beta = (i % 2) == 1;
            p = i / 2;
        }
        (beta ? d.beta : d.alpha) |= u64{1} << p;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Configuration sets
// ---------------------------------------------------------------------------

enum class Provenance { Hardware, Perturbative, Generated, Reference };

[[nodiscard]] inline std::string_view to_string(Provenance p) noexcept {
    switch (p) {
    case Provenance::Hardware: return "hardware";
    case Provenance::Perturbative: return "perturbative";
    case Provenance::Generated: return "generated";
    case Provenance::Reference: return "reference";
    }
    return "unknown";
}

/// Ordered, duplicate-free determinant collection. Insertion order is kept;
/// the first provenance tag wins, frequencies of repeated inserts accumulate.
class ConfigurationSet {
public:
    ConfigurationSet() = default;

    bool insert(const Determinant& d, Provenance p, u64 frequency = 1) {
        auto [it, fresh] = index_.emplace(d, members_.size());
        if (!fresh) {
            frequency_[it->second] += frequency;
            return false;
        }
        members_.push_back(d);
        provenance_.push_back(p);
        frequency_.push_back(frequency);
        return true;
    }

    /// Ordered union: members of `other` not already present are appended.
    std::size_t merge(const ConfigurationSet& other) {
        std::size_t added = 0;
        for (std::size_t i = 0; i < other.size(); ++i)
            added += insert(other.members_[i], other.provenance_[i], other.frequency_[i]) ? 1 : 0;
        return added;
    }

    [[nodiscard]] bool contains(const Determinant& d) const { return index_.contains(d); }
    [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
    [[nodiscard]] bool empty() const noexcept { return members_.empty(); }

    [[nodiscard]] const std::vector<Determinant>& members() const noexcept { return members_; }
    [[nodiscard]] const Determinant& operator[](std::size_t i) const { return members_[i]; }
    [[nodiscard]] Provenance provenance(std::size_t i) const { return provenance_[i]; }
    [[nodiscard]] u64 frequency(std::size_t i) const { return frequency_[i]; }

    /// Position of `d`, or size() when absent.
    [[nodiscard]] std::size_t find(const Determinant& d) const {
        auto it = index_.find(d);
        return it == index_.end() ? members_.size() : it->second;
    }

    [[nodiscard]] auto begin() const noexcept { return members_.begin(); }
    [[nodiscard]] auto end() const noexcept { return members_.end(); }

    /// Reorder members lexicographically on (alpha, beta).
    void sort() {
        std::vector<std::size_t> order(members_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return members_[a] < members_[b]; });
        ConfigurationSet sorted;
        for (std::size_t i : order) sorted.insert(members_[i], provenance_[i], frequency_[i]);
        *this = std::move(sorted);
    }

private:
    std::vector<Determinant> members_;
    std::vector<Provenance> provenance_;
    std::vector<u64> frequency_;
    std::unordered_map<Determinant, std::size_t, DeterminantHash> index_;
};

/// Raw measurement outcome: a bitstring and how often it was seen.
using BitstringCount = std::pair<std::string, u64>;

/// Keep bitstrings in the (n_alpha, n_beta) sector, deduplicate, and sum
/// their frequencies. Output is in lexicographic determinant order.
[[nodiscard]] inline ConfigurationSet symmetry_filter(std::span<const BitstringCount> raw,
                                                      const OrbitalBasis& basis,
                                                      BitLayout layout = BitLayout::Blocked,
                                                      Provenance tag = Provenance::Hardware) {
    basis.validate();
    ConfigurationSet out;
    for (const auto& [bits, count] : raw) {
        const Determinant d = from_bitstring(bits, basis.n_spatial, layout);
        if (d.n_alpha() == basis.n_alpha && d.n_beta() == basis.n_beta) out.insert(d, tag, count);
    }
    out.sort();
    return out;
}

// ---------------------------------------------------------------------------
// Symmetry space Q
// ---------------------------------------------------------------------------

[[nodiscard]] inline unsigned __int128 binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    return r;
}

/// d_Q = C(n_spatial, n_alpha) * C(n_spatial, n_beta).
[[nodiscard]] inline u64 symmetry_space_dimension(const OrbitalBasis& basis) {
    basis.validate();
    const unsigned __int128 d =
        binomial(basis.n_spatial, basis.n_alpha) * binomial(basis.n_spatial, basis.n_beta);
    if (d > std::numeric_limits<u64>::max())
        throw ConfigError("symmetry-space dimension exceeds 64-bit range");
    return static_cast<u64>(d);
}

/// Next larger mask with the same popcount (Gosper's hack); 0 when exhausted.
[[nodiscard]] constexpr u64 next_combination(u64 v, int width) noexcept {
    if (v == 0) return 0;
    const u64 t = v | (v - 1);
    if (t == ~u64{0}) return 0;
    const u64 next = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
    if (width < 64 && (next >> width) != 0) return 0;
    return next;
}

/// All masks of `width` bits with `count` set bits, ascending.
[[nodiscard]] inline std::vector<u64> combinations(int width, int count) {
    std::vector<u64> out;
    if (count < 0 || count > width) return out;
    if (count == 0) return {0};
    for (u64 m = low_bits(count); m != 0; m = next_combination(m, width)) out.push_back(m);
    return out;
}

/// Calls `visit(det)` for every determinant of the sector in lexicographic
/// (alpha, beta) order. Throws when d_Q exceeds `cap`.
template <typename Visitor>
void enumerate_symmetry_space(const OrbitalBasis& basis, u64 cap, Visitor&& visit) {
    const u64 dim = symmetry_space_dimension(basis);
    if (dim > cap)
        throw ConfigError("symmetry space of dimension " + std::to_string(dim) +
                          " exceeds enumeration cap " + std::to_string(cap));
    const auto alphas = combinations(basis.n_spatial, basis.n_alpha);
    const auto betas = combinations(basis.n_spatial, basis.n_beta);
    for (u64 a : alphas)
        for (u64 b : betas) visit(Determinant{a, b});
}

[[nodiscard]] inline std::vector<Determinant> enumerate_symmetry_space(const OrbitalBasis& basis,
                                                                       u64 cap) {
    std::vector<Determinant> out;
    enumerate_symmetry_space(basis, cap, [&](const Determinant& d) { out.push_back(d); });
    return out;
}

/// Uniformly random `count`-subset of `width` bits (Floyd's algorithm).
template <typename Rng>
[[nodiscard]] u64 random_combination(int width, int count, Rng& rng) {
    u64 m = 0;
    for (int j = width - count; j < width; ++j) {
        std::uniform_int_distribution<int> pick(0, j);
        const int t = pick(rng);
        const u64 bit = u64{1} << t;
        m |= (m & bit) ? (u64{1} << j) : bit;
    }
    return m;
}

/// Uniform draw from the symmetry space.
template <typename Rng>
[[nodiscard]] Determinant random_sector_determinant(const OrbitalBasis& basis, Rng& rng) {
    const u64 a = random_combination(basis.n_spatial, basis.n_alpha, rng);
    const u64 b = random_combination(basis.n_spatial, basis.n_beta, rng);
    return {a, b};
}

} // namespace pigen

template <>
struct std::hash<pigen::Determinant> {
    std::size_t operator()(const pigen::Determinant& d) const noexcept {
        return pigen::DeterminantHash{}(d);
    }
};
