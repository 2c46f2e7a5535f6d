// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file integrals.hpp
 * @brief Molecular-orbital integrals: FCIDUMP ingestion, spin-orbital
 *        antisymmetrized integrals, canonical orbital energies and MP2.
 *
 * Spatial integrals are stored densely; spin-orbital quantities are derived
 * on demand using the blocked spin-orbital convention of fermion.hpp.
 */

#pragma once

#include "pigen/error.hpp"
#include "pigen/fermion.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <tuple>
#include <string>
#include <unordered_map>
#include <vector>

namespace pigen {

/// Storage order of the two-electron tensor.
enum class EriOrdering {
    Chemist,    ///< eri(p,q,r,s) = (pq|rs)
    Physicist,  ///< eri(p,q,r,s) = <pq|rs> = (pr|qs)
};

struct IntegralSet {
    int n_spatial = 0;
    int n_electrons = -1;  ///< NELEC from the header, -1 when absent
    int ms2 = 0;
    std::vector<int> orbsym;
    Eigen::MatrixXd h;
    std::vector<double> eri;
    EriOrdering ordering = EriOrdering::Chemist;
    double e_core = 0.0;
    Eigen::VectorXd eps;  ///< canonical orbital energies; empty for open-shell headers

    [[nodiscard]] std::size_t flat(int p, int q, int r, int s) const noexcept {
        const auto n = static_cast<std::size_t>(n_spatial);
        return ((static_cast<std::size_t>(p) * n + static_cast<std::size_t>(q)) * n +
                static_cast<std::size_t>(r)) * n + static_cast<std::size_t>(s);
    }

    /// Chemists' (pq|rs) over spatial orbitals, whatever the storage order.
    [[nodiscard]] double chem(int p, int q, int r, int s) const noexcept {
        return ordering == EriOrdering::Chemist ? eri[flat(p, q, r, s)] : eri[flat(p, r, q, s)];
    }

    /// Physicists' <pq|rs> over spatial orbitals.
    [[nodiscard]] double phys(int p, int q, int r, int s) const noexcept { return chem(p, r, q, s); }

    /// Basis implied by NELEC and MS2.
    [[nodiscard]] OrbitalBasis basis_from_header() const {
        if (n_electrons < 0) throw ConfigError("FCIDUMP header has no NELEC; pass electron counts explicitly");
        if ((n_electrons + ms2) % 2 != 0) throw ConfigError("NELEC and MS2 have inconsistent parity");
        OrbitalBasis b{n_spatial, (n_electrons + ms2) / 2, (n_electrons - ms2) / 2};
        b.validate();
        return b;
    }

    /// Zero-initialised set with `n` spatial orbitals.
    [[nodiscard]] static IntegralSet zeros(int n) {
        IntegralSet s;
        s.n_spatial = n;
        s.h = Eigen::MatrixXd::Zero(n, n);
        s.eri.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
        return s;
    }

    /// Store (pq|rs) together with its 7 real-orbital permutational images.
    void set_chem(int p, int q, int r, int s, double v) {
        const std::array<std::array<int, 4>, 8> images{{{p, q, r, s},
                                                         {q, p, r, s},
                                                         {p, q, s, r},
                                                         {q, p, s, r},
                                                         {r, s, p, q},
                                                         {s, r, p, q},
                                                         {r, s, q, p},
                                                         {s, r, q, p}}};
        for (const auto& [a, b, c, d] : images) {
            if (ordering == EriOrdering::Chemist)
                eri[flat(a, b, c, d)] = v;
            else
                eri[flat(a, c, b, d)] = v;
        }
    }
};

// ---------------------------------------------------------------------------
// Orbital energies
// ---------------------------------------------------------------------------

/// Canonical closed-shell Fock diagonal:
/// eps_p = h_pp + sum_{i < n_occ} [ 2 (pp|ii) - (pi|ip) ].
[[nodiscard]] inline Eigen::VectorXd orbital_energies(const IntegralSet& s, int n_alpha, int n_beta) {
    if (n_alpha != n_beta)
        throw ConfigError("orbital_energies: open-shell occupation is not supported");
    if (n_alpha > s.n_spatial) throw ConfigError("orbital_energies: more electrons than orbitals");
    Eigen::VectorXd eps(s.n_spatial);
    for (int p = 0; p < s.n_spatial; ++p) {
        double e = s.h(p, p);
        for (int i = 0; i < n_alpha; ++i) e += 2.0 * s.chem(p, p, i, i) - s.chem(p, i, i, p);
        eps(p) = e;
    }
    return eps;
}

// ---------------------------------------------------------------------------
// FCIDUMP
// ---------------------------------------------------------------------------

namespace detail {

inline std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

inline double parse_real(std::string tok, int line) {
    for (auto& c : tok)
        if (c == 'd' || c == 'D') c = 'E';
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != tok.size())
        throw FormatError("FCIDUMP line " + std::to_string(line) + ": non-numeric value '" + tok + "'");
    return v;
}

inline int parse_int(const std::string& tok, const std::string& what) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(tok, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != tok.size())
        throw FormatError("FCIDUMP header: " + what + " is not an integer ('" + tok + "')");
    return v;
}

} // namespace detail

/// Parse an FCIDUMP stream (chemists' notation, 1-based indices).
///
/// Lines with all four indices zero carry the core energy, (p q 0 0) the
/// one-electron integrals, and (p 0 0 0) orbital eigenvalues, which are
/// ignored in favour of the Fock diagonal.
[[nodiscard]] inline IntegralSet parse_fcidump(std::istream& in) {
    std::string header;
    std::string line;
    int line_no = 0;
    bool started = false;
    bool finished = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string up = detail::upper(line);
        if (!started) {
            const auto pos = up.find("&FCI");
            if (pos == std::string::npos) {
                if (up.find_first_not_of(" \t\r") == std::string::npos) continue;
                throw FormatError("FCIDUMP: expected '&FCI' header, found '" + line + "'");
            }
            started = true;
            header += up.substr(pos + 4) + " ";
        } else {
            header += up + " ";
        }
        const auto end = header.find("&END");
        const auto slash = header.find('/');
        if (end != std::string::npos || slash != std::string::npos) {
            header = header.substr(0, std::min(end, slash));
            finished = true;
            break;
        }
    }
    if (!finished) throw FormatError("FCIDUMP: unterminated or missing header");

    std::map<std::string, std::vector<std::string>> keys;
    {
        for (auto& c : header)
            if (c == ',') c = ' ';
        std::istringstream hs(header);
        std::string tok;
        std::string current;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq != std::string::npos) {
                current = tok.substr(0, eq);
                keys[current];
                const std::string rest = tok.substr(eq + 1);
                if (!rest.empty()) keys[current].push_back(rest);
            } else if (!current.empty()) {
                keys[current].push_back(tok);
            } else {
                throw FormatError("FCIDUMP header: stray token '" + tok + "'");
            }
        }
    }
    auto single = [&](const std::string& k) -> const std::string* {
        auto it = keys.find(k);
        if (it == keys.end()) return nullptr;
        if (it->second.size() != 1) throw FormatError("FCIDUMP header: " + k + " needs one value");
        return &it->second.front();
    };
    const std::string* norb = single("NORB");
    if (!norb) throw FormatError("FCIDUMP header: NORB missing");

    IntegralSet s = IntegralSet::zeros(detail::parse_int(*norb, "NORB"));
    if (s.n_spatial <= 0 || s.n_spatial > kMaxSpatialOrbitals)
        throw FormatError("FCIDUMP header: NORB out of range");
    if (const auto* v = single("NELEC")) s.n_electrons = detail::parse_int(*v, "NELEC");
    if (const auto* v = single("MS2")) s.ms2 = detail::parse_int(*v, "MS2");
    if (auto it = keys.find("ORBSYM"); it != keys.end())
        for (const auto& t : it->second) s.orbsym.push_back(detail::parse_int(t, "ORBSYM"));

    const int n = s.n_spatial;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> toks;
        while (ls >> tok) toks.push_back(tok);
        if (toks.empty()) continue;
        if (toks.size() != 5)
            throw FormatError("FCIDUMP line " + std::to_string(line_no) + ": expected 'value p q r s'");
        const double value = detail::parse_real(toks[0], line_no);
        std::array<int, 4> idx{};
        for (int k = 0; k < 4; ++k) {
            std::size_t used = 0;
            int v = -1;
            try {
                v = std::stoi(toks[static_cast<std::size_t>(k + 1)], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != toks[static_cast<std::size_t>(k + 1)].size())
                throw FormatError("FCIDUMP line " + std::to_string(line_no) + ": bad index");
            if (v < 0 || v > n)
                throw FormatError("FCIDUMP line " + std::to_string(line_no) + ": index " +
                                  std::to_string(v) + " exceeds NORB=" + std::to_string(n));
            idx[static_cast<std::size_t>(k)] = v;
        }
        const auto [p, q, r, t] = idx;
        if (p == 0 && q == 0 && r == 0 && t == 0) {
            s.e_core = value;
        } else if (p > 0 && q > 0 && r > 0 && t > 0) {
            s.set_chem(p - 1, q - 1, r - 1, t - 1, value);
        } else if (p > 0 && q > 0 && r == 0 && t == 0) {
            s.h(p - 1, q - 1) = value;
            s.h(q - 1, p - 1) = value;
        } else if (p > 0 && q == 0 && r == 0 && t == 0) {
            // orbital eigenvalue record
        } else {
            throw FormatError("FCIDUMP line " + std::to_string(line_no) + ": unsupported index pattern");
        }
    }

    if (s.n_electrons >= 0 && s.ms2 == 0 && s.n_electrons % 2 == 0 && s.n_electrons / 2 <= n)
        s.eps = orbital_energies(s, s.n_electrons / 2, s.n_electrons / 2);
    return s;
}

/// Parse an FCIDUMP file; IoError when it cannot be opened.
[[nodiscard]] inline IntegralSet read_fcidump(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open FCIDUMP file '" + path + "'");
    return parse_fcidump(in);
}

// ---------------------------------------------------------------------------
// Spin-orbital quantities
// ---------------------------------------------------------------------------

struct SpinOrbital {
    int spatial;
    Spin spin;
};

[[nodiscard]] constexpr SpinOrbital split_spin_orbital(int p, int n_spatial) noexcept {
    return p < n_spatial ? SpinOrbital{p, Spin::Alpha} : SpinOrbital{p - n_spatial, Spin::Beta};
}

[[nodiscard]] constexpr int spin_orbital_index(int spatial, Spin s, int n_spatial) noexcept {
    return s == Spin::Alpha ? spatial : spatial + n_spatial;
}

/// <pq||rs> = <pq|rs> - <pq|sr> over blocked spin-orbital indices; each term
/// survives only when the paired spins agree.
[[nodiscard]] inline double antisymmetrized(const IntegralSet& s, int p, int q, int r, int t) noexcept {
    const int n = s.n_spatial;
    const auto P = split_spin_orbital(p, n);
    const auto Q = split_spin_orbital(q, n);
    const auto R = split_spin_orbital(r, n);
    const auto T = split_spin_orbital(t, n);
    double v = 0.0;
    if (P.spin == R.spin && Q.spin == T.spin) v += s.chem(P.spatial, R.spatial, Q.spatial, T.spatial);
    if (P.spin == T.spin && Q.spin == R.spin) v -= s.chem(P.spatial, T.spatial, Q.spatial, R.spatial);
    return v;
}

/// Occupied and virtual spin-orbital index lists of the aufbau reference.
struct OccupationSplit {
    std::vector<int> occupied;
    std::vector<int> virtuals;
};

[[nodiscard]] inline OccupationSplit occupation_split(const OrbitalBasis& b) {
    OccupationSplit o;
    for (int p = 0; p < b.n_spatial; ++p) (p < b.n_alpha ? o.occupied : o.virtuals).push_back(p);
    for (int p = 0; p < b.n_spatial; ++p)
        (p < b.n_beta ? o.occupied : o.virtuals).push_back(p + b.n_spatial);
    return o;
}

[[nodiscard]] inline double spin_orbital_energy(const IntegralSet& s, int p) {
    return s.eps(p < s.n_spatial ? p : p - s.n_spatial);
}

// ---------------------------------------------------------------------------
// MP2
// ---------------------------------------------------------------------------

struct Amplitude {
    int i, j, a, b;  ///< spin orbitals, i < j occupied, a < b virtual
    double value;
};

/// Sparse first-order doubles amplitudes t_ij^ab = <ij||ab> / (e_i + e_j - e_a - e_b).
class AmplitudeTensor {
public:
    AmplitudeTensor() = default;
    AmplitudeTensor(std::vector<Amplitude> entries, double threshold)
        : entries_(std::move(entries)), threshold_(threshold) {
        std::sort(entries_.begin(), entries_.end(), [](const Amplitude& x, const Amplitude& y) {
            return std::tie(x.i, x.j, x.a, x.b) < std::tie(y.i, y.j, y.a, y.b);
        });
        for (std::size_t k = 0; k < entries_.size(); ++k) {
            const auto& e = entries_[k];
            lookup_.emplace(key(e.i, e.j, e.a, e.b), k);
        }
    }

    [[nodiscard]] const std::vector<Amplitude>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] double threshold() const noexcept { return threshold_; }

    /// t_ij^ab for any index order, using antisymmetry in (i,j) and (a,b).
    [[nodiscard]] double value(int i, int j, int a, int b) const {
        if (i == j || a == b) return 0.0;
        double sign = 1.0;
        if (i > j) { std::swap(i, j); sign = -sign; }
        if (a > b) { std::swap(a, b); sign = -sign; }
        auto it = lookup_.find(key(i, j, a, b));
        return it == lookup_.end() ? 0.0 : sign * entries_[it->second].value;
    }

private:
    static std::uint64_t key(int i, int j, int a, int b) noexcept {
        return (static_cast<std::uint64_t>(i) << 48) | (static_cast<std::uint64_t>(j) << 32) |
               (static_cast<std::uint64_t>(a) << 16) | static_cast<std::uint64_t>(b);
    }

    std::vector<Amplitude> entries_;
    double threshold_ = 0.0;
    std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

namespace detail {

/// Spin assignments (i, j, a, b) allowed for <ij||ab> with i<j, a<b under
/// blocked indexing: both alpha, both beta, or i,a alpha with j,b beta.
inline constexpr std::array<std::array<Spin, 4>, 3> kDoublesSpinCases{{
    {Spin::Alpha, Spin::Alpha, Spin::Alpha, Spin::Alpha},
    {Spin::Beta, Spin::Beta, Spin::Beta, Spin::Beta},
    {Spin::Alpha, Spin::Beta, Spin::Alpha, Spin::Beta},
}};

inline std::vector<int> spatial_range(int lo, int hi) {
    std::vector<int> v;
    for (int p = lo; p < hi; ++p) v.push_back(p);
    return v;
}

} // namespace detail

/// MP2 amplitudes with |t| > eps_int, enumerated per spin case.
///
/// Throws NumericalError when an entry with a non-negligible integral meets a
/// vanishing denominator (|Delta| < 1e-12).
[[nodiscard]] inline AmplitudeTensor mp2_amplitudes(const IntegralSet& s, const OrbitalBasis& basis,
                                                    double eps_int) {
    basis.validate();
    if (basis.n_spatial != s.n_spatial) throw ConfigError("mp2_amplitudes: basis/integral size mismatch");
    Eigen::VectorXd eps = s.eps;
    if (eps.size() != s.n_spatial) eps = orbital_energies(s, basis.n_alpha, basis.n_beta);
    const int n = s.n_spatial;
    auto occ = [&](Spin sp) { return detail::spatial_range(0, sp == Spin::Alpha ? basis.n_alpha : basis.n_beta); };
    auto vir = [&](Spin sp) { return detail::spatial_range(sp == Spin::Alpha ? basis.n_alpha : basis.n_beta, n); };

    std::vector<Amplitude> out;
    for (const auto& [si, sj, sa, sb] : detail::kDoublesSpinCases) {
        const bool same = si == sj;
        for (int pi : occ(si))
            for (int pj : occ(sj)) {
                if (same && pj <= pi) continue;
                for (int pa : vir(sa))
                    for (int pb : vir(sb)) {
                        if (same && pb <= pa) continue;
                        const int i = spin_orbital_index(pi, si, n), j = spin_orbital_index(pj, sj, n);
                        const int a = spin_orbital_index(pa, sa, n), b = spin_orbital_index(pb, sb, n);
                        const double v = antisymmetrized(s, i, j, a, b);
                        if (v == 0.0) continue;
                        const double delta = eps(pi) + eps(pj) - eps(pa) - eps(pb);
                        if (std::abs(delta) < 1e-12) {
                            if (std::abs(v) <= eps_int) continue;
                            throw NumericalError("degenerate MP2 denominator for (i,j,a,b) = (" +
                                                 std::to_string(i) + "," + std::to_string(j) + "," +
                                                 std::to_string(a) + "," + std::to_string(b) + ")");
                        }
                        const double t = v / delta;
                        if (std::abs(t) > eps_int) out.push_back({i, j, a, b, t});
                    }
            }
    }
    return AmplitudeTensor(std::move(out), eps_int);
}

/// E_MP2 = sum_{i<j, a<b} t_ij^ab <ij||ab>.
[[nodiscard]] inline double mp2_energy(const AmplitudeTensor& t, const IntegralSet& s) {
    double e = 0.0;
    for (const auto& x : t.entries()) e += x.value * antisymmetrized(s, x.i, x.j, x.a, x.b);
    return e;
}

} // namespace pigen
