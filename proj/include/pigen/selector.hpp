// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file selector.hpp
 * @brief Perturbative configuration screening.
 *
 * Doubles come straight from the pruned MP2 amplitudes. Triples and
 * quadruples are selected symbolically: pruned scatterer integrals
 * (hole type <ij||am>, particle type <ie||ab>) are joined with lower-rank
 * excitation signatures on their contractible index without evaluating any
 * amplitude. Integral signs never enter the selection.
 *
 * Join rule: group each side by its outer (non-contractible) indices, collect
 * the contractible values per group, and keep an outer pair when the two
 * value sets intersect in exactly one element (JoinPolicy::ExactlyOne) or in
 * at least one element (JoinPolicy::AtLeastOne).
 */

#pragma once

#include "pigen/error.hpp"
#include "pigen/fermion.hpp"
#include "pigen/integrals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace pigen {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// a^+_a a^+_m a_j a_i with i<j occupied, a virtual, m occupied.
struct HoleScatterer {
    int i, j, a, m;
    double value;
};

/// a^+_a a^+_b a_e a_i with i occupied, e virtual, a<b virtual.
struct ParticleScatterer {
    int i, e, a, b;
    double value;
};

template <std::size_t N>
using OuterKey = std::array<int, N>;

/// Outer indices -> sorted contractible values.
template <std::size_t N>
using GroupedView = std::map<OuterKey<N>, std::vector<int>>;

struct ScattererSet {
    OrbitalBasis basis;
    double threshold = 0.0;
    std::vector<HoleScatterer> hole;
    std::vector<ParticleScatterer> particle;
    GroupedView<3> hole_groups;      ///< (i, j, a) -> {m}
    GroupedView<3> particle_groups;  ///< (i, a, b) -> {e}

    [[nodiscard]] std::size_t size() const noexcept { return hole.size() + particle.size(); }
    [[nodiscard]] bool empty() const noexcept { return size() == 0; }
};

/// Excitation out of the reference: sorted holes and sorted particles
/// (blocked spin-orbital indices).
struct ExcitationSignature {
    std::vector<int> holes;
    std::vector<int> particles;

    [[nodiscard]] std::size_t rank() const noexcept { return holes.size(); }
    auto operator<=>(const ExcitationSignature&) const = default;
};

using SignatureSet = std::set<ExcitationSignature>;

enum class JoinPolicy { ExactlyOne, AtLeastOne };

/// Elementary-operation counters of the symbolic joins.
struct JoinCounters {
    std::uint64_t triples_join_ops = 0;
    std::uint64_t intermediate_join_ops = 0;
    std::uint64_t quadruples_join_ops = 0;
    std::uint64_t n_intermediates = 0;
};

// ---------------------------------------------------------------------------
// Scatterers
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<int> spin_block(const OrbitalBasis& b, Spin s, bool occupied) {
    const int n_occ = s == Spin::Alpha ? b.n_alpha : b.n_beta;
    std::vector<int> out;
    for (int p = occupied ? 0 : n_occ; p < (occupied ? n_occ : b.n_spatial); ++p)
        out.push_back(spin_orbital_index(p, s, b.n_spatial));
    return out;
}

// Spin cases (i, j, a, m) of <ij||am> with i<j under blocked indexing.
inline constexpr std::array<std::array<Spin, 4>, 4> kHoleSpinCases{{
    {Spin::Alpha, Spin::Alpha, Spin::Alpha, Spin::Alpha},
    {Spin::Beta, Spin::Beta, Spin::Beta, Spin::Beta},
    {Spin::Alpha, Spin::Beta, Spin::Alpha, Spin::Beta},
    {Spin::Alpha, Spin::Beta, Spin::Beta, Spin::Alpha},
}};

// Spin cases (i, e, a, b) of <ie||ab> with a<b under blocked indexing.
inline constexpr std::array<std::array<Spin, 4>, 4> kParticleSpinCases{{
    {Spin::Alpha, Spin::Alpha, Spin::Alpha, Spin::Alpha},
    {Spin::Beta, Spin::Beta, Spin::Beta, Spin::Beta},
    {Spin::Alpha, Spin::Beta, Spin::Alpha, Spin::Beta},
    {Spin::Beta, Spin::Alpha, Spin::Alpha, Spin::Beta},
}};

template <std::size_t N>
void add_to_group(GroupedView<N>& view, const OuterKey<N>& key, int contractible) {
    auto& v = view[key];
    auto it = std::lower_bound(v.begin(), v.end(), contractible);
    if (it == v.end() || *it != contractible) v.insert(it, contractible);
}

} // namespace detail

/// All hole- and particle-type scatterers with |<..||..>| > eps_int.
[[nodiscard]] inline ScattererSet build_scatterers(const IntegralSet& s, const OrbitalBasis& basis,
                                                   double eps_int) {
    basis.validate();
    if (basis.n_spatial != s.n_spatial) throw ConfigError("build_scatterers: basis/integral size mismatch");
    ScattererSet out;
    out.basis = basis;
    out.threshold = eps_int;
    using detail::spin_block;

    for (const auto& [si, sj, sa, sm] : detail::kHoleSpinCases) {
        const auto I = spin_block(basis, si, true), J = spin_block(basis, sj, true);
        const auto A = spin_block(basis, sa, false), M = spin_block(basis, sm, true);
        for (int i : I)
            for (int j : J) {
                if (j <= i) continue;
                for (int a : A)
                    for (int m : M) {
                        const double v = antisymmetrized(s, i, j, a, m);
                        if (std::abs(v) > eps_int) out.hole.push_back({i, j, a, m, v});
                    }
            }
    }
    for (const auto& [si, se, sa, sb] : detail::kParticleSpinCases) {
        const auto I = spin_block(basis, si, true), E = spin_block(basis, se, false);
        const auto A = spin_block(basis, sa, false), B = spin_block(basis, sb, false);
        for (int i : I)
            for (int e : E)
                for (int a : A)
                    for (int b : B) {
                        if (b <= a) continue;
                        const double v = antisymmetrized(s, i, e, a, b);
                        if (std::abs(v) > eps_int) out.particle.push_back({i, e, a, b, v});
                    }
    }
    for (const auto& x : out.hole) detail::add_to_group<3>(out.hole_groups, {x.i, x.j, x.a}, x.m);
    for (const auto& x : out.particle) detail::add_to_group<3>(out.particle_groups, {x.i, x.a, x.b}, x.e);
    return out;
}

// ---------------------------------------------------------------------------
// Symbolic join
// ---------------------------------------------------------------------------

/// Joins two grouped views on shared contractible values.
///
/// For every left group and each of its contractible values, every right
/// group carrying that value is visited once; the visit count is returned
/// and bounds the work. `emit(left_key, right_key)` fires for pairs whose
/// shared-value count satisfies `policy`.
template <std::size_t L, std::size_t R, typename Emit>
std::uint64_t symbolic_join(const GroupedView<L>& left, const GroupedView<R>& right, JoinPolicy policy,
                            Emit&& emit) {
    std::vector<const OuterKey<R>*> right_keys;
    std::map<int, std::vector<std::size_t>> by_value;
    right_keys.reserve(right.size());
    for (const auto& [key, values] : right) {
        for (int v : values) by_value[v].push_back(right_keys.size());
        right_keys.push_back(&key);
    }

    std::uint64_t ops = 0;
    std::vector<int> shared(right_keys.size(), 0);
    std::vector<std::size_t> touched;
    for (const auto& [key, values] : left) {
        touched.clear();
        for (int v : values) {
            auto it = by_value.find(v);
            if (it == by_value.end()) continue;
            for (std::size_t r : it->second) {
                ++ops;
                if (shared[r]++ == 0) touched.push_back(r);
            }
        }
        std::sort(touched.begin(), touched.end());
        for (std::size_t r : touched) {
            const bool keep = policy == JoinPolicy::AtLeastOne ? shared[r] >= 1 : shared[r] == 1;
            if (keep) emit(key, *right_keys[r]);
            shared[r] = 0;
        }
    }
    return ops;
}

namespace detail {

template <std::size_t N>
bool strictly_increasing(const std::array<int, N>& a) {
    for (std::size_t k = 1; k < N; ++k)
        if (a[k] <= a[k - 1]) return false;
    return true;
}

template <std::size_t N>
ExcitationSignature make_signature(std::array<int, N> holes, std::array<int, N> particles) {
    return {std::vector<int>(holes.begin(), holes.end()), std::vector<int>(particles.begin(), particles.end())};
}

/// Doubles viewed with one hole contractible: (outer hole, p1, p2) -> {other hole}.
inline GroupedView<3> doubles_by_hole(const SignatureSet& doubles) {
    GroupedView<3> view;
    for (const auto& d : doubles) {
        if (d.rank() != 2) continue;
        const int h1 = d.holes[0], h2 = d.holes[1], p1 = d.particles[0], p2 = d.particles[1];
        add_to_group<3>(view, {h2, p1, p2}, h1);
        add_to_group<3>(view, {h1, p1, p2}, h2);
    }
    return view;
}

/// Doubles viewed with one particle contractible: (h1, h2, outer particle) -> {other particle}.
inline GroupedView<3> doubles_by_particle(const SignatureSet& doubles) {
    GroupedView<3> view;
    for (const auto& d : doubles) {
        if (d.rank() != 2) continue;
        const int h1 = d.holes[0], h2 = d.holes[1], p1 = d.particles[0], p2 = d.particles[1];
        add_to_group<3>(view, {h1, h2, p2}, p1);
        add_to_group<3>(view, {h1, h2, p1}, p2);
    }
    return view;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Selection by rank
// ---------------------------------------------------------------------------

/// One rank-2 signature per stored amplitude.
[[nodiscard]] inline SignatureSet select_doubles(const AmplitudeTensor& t) {
    SignatureSet out;
    for (const auto& x : t.entries()) out.insert({{x.i, x.j}, {x.a, x.b}});
    return out;
}

/// Singles whose second-order measure
///   c_i^a = [ sum_{mn,e} <ie||mn> t_mn^ae + sum_{m,ef} <ef||am> t_im^ef ] / (e_i - e_a)
/// exceeds eps_int in magnitude.
[[nodiscard]] inline SignatureSet select_singles(const IntegralSet& s, const OrbitalBasis& basis,
                                                 const AmplitudeTensor& t, double eps_int) {
    SignatureSet out;
    if (t.empty()) return out;
    const auto split = occupation_split(basis);
    const int n = basis.n_spatial;
    Eigen::VectorXd eps = s.eps;
    if (eps.size() != n) eps = orbital_energies(s, basis.n_alpha, basis.n_beta);
    auto energy = [&](int p) { return eps(p < n ? p : p - n); };
    for (int i : split.occupied)
        for (int a : split.virtuals) {
            if ((i < n) != (a < n)) continue;
            double acc = 0.0;
            for (int m : split.occupied)
                for (int nn : split.occupied)
                    for (int e : split.virtuals) {
                        const double tv = t.value(m, nn, a, e);
                        if (tv != 0.0) acc += antisymmetrized(s, i, e, m, nn) * tv;
                    }
            for (int m : split.occupied)
                for (int e : split.virtuals)
                    for (int f : split.virtuals) {
                        const double tv = t.value(i, m, e, f);
                        if (tv != 0.0) acc += antisymmetrized(s, e, f, a, m) * tv;
                    }
            const double delta = energy(i) - energy(a);
            if (std::abs(delta) < 1e-12) continue;
            if (std::abs(acc / delta) > eps_int) out.insert({{i}, {a}});
        }
    return out;
}

/// Rank-3 signatures from scatterer x double joins.
///
/// Hole shape  <ij||am> t_mk^bc  -> (i,j,k; a,b,c), kept when j<k and a<b.
/// Particle shape <ie||ab> t_jk^ec -> (i,j,k; a,b,c), kept when i<j and b<c.
/// Both orderings yield k>j>i and c>b>a.
[[nodiscard]] inline SignatureSet select_triples_symbolic(const ScattererSet& sc, const SignatureSet& doubles,
                                                          JoinPolicy policy = JoinPolicy::AtLeastOne,
                                                          JoinCounters* counters = nullptr) {
    SignatureSet out;
    std::uint64_t ops = 0;
    ops += symbolic_join<3, 3>(sc.hole_groups, detail::doubles_by_hole(doubles), policy,
                               [&](const OuterKey<3>& s, const OuterKey<3>& d) {
                                   const auto [i, j, a] = s;
                                   const auto [k, b, c] = d;
                                   if (j < k && a < b)
                                       out.insert(detail::make_signature<3>({i, j, k}, {a, b, c}));
                               });
    ops += symbolic_join<3, 3>(sc.particle_groups, detail::doubles_by_particle(doubles), policy,
                               [&](const OuterKey<3>& s, const OuterKey<3>& d) {
                                   const auto [i, a, b] = s;
                                   const auto [j, k, c] = d;
                                   if (i < j && b < c)
                                       out.insert(detail::make_signature<3>({i, j, k}, {a, b, c}));
                               });
    if (counters) counters->triples_join_ops += ops;
    return out;
}

namespace detail {

/// Unordered rank-3 intermediate (scatterer x double) as sorted multisets.
struct Intermediate {
    std::array<int, 3> holes;
    std::array<int, 3> particles;
    auto operator<=>(const Intermediate&) const = default;
};

template <std::size_t N>
int coincidences(const std::array<int, N>& sorted) {
    int c = 0;
    for (std::size_t k = 1; k < N; ++k) c += sorted[k] == sorted[k - 1];
    return c;
}

/// An intermediate is viable when one later contraction can still lead to a
/// Pauli-valid rank-4 excitation: at most one repeated index overall.
inline bool viable(const Intermediate& x) {
    return coincidences(x.holes) + coincidences(x.particles) <= 1;
}

inline Intermediate make_intermediate(std::array<int, 3> h, std::array<int, 3> p) {
    std::sort(h.begin(), h.end());
    std::sort(p.begin(), p.end());
    return {h, p};
}

/// The three slots of `a` without the (first) slot equal to `v`.
inline std::array<int, 2> drop_one(const std::array<int, 3>& a, int v) {
    std::array<int, 2> r{};
    bool dropped = false;
    std::size_t k = 0;
    for (int x : a) {
        if (!dropped && x == v) {
            dropped = true;
            continue;
        }
        if (k < 2) r[k] = x;
        ++k;
    }
    return r;
}

} // namespace detail

/// Rank-4 signatures via intermediate factorization.
///
/// Stage 1 joins scatterers with doubles into unordered rank-3
/// intermediates (both shapes, no ordering constraint). Stage 2 contracts a
/// further scatterer onto one hole (hole-type scatterer) or one particle
/// (particle-type scatterer) of an intermediate. Together these realise the
/// seven scatterer-scatterer-double term shapes, including those in which
/// the double carries two contractible indices.
[[nodiscard]] inline SignatureSet select_quadruples_symbolic(const ScattererSet& sc, const SignatureSet& doubles,
                                                             JoinPolicy policy = JoinPolicy::AtLeastOne,
                                                             JoinCounters* counters = nullptr) {
    using detail::Intermediate;
    SignatureSet out;
    if (doubles.empty() || sc.empty()) return out;

    std::set<Intermediate> intermediates;
    std::uint64_t stage1 = 0;
    stage1 += symbolic_join<3, 3>(sc.hole_groups, detail::doubles_by_hole(doubles), policy,
                                  [&](const OuterKey<3>& s, const OuterKey<3>& d) {
                                      auto x = detail::make_intermediate({s[0], s[1], d[0]}, {s[2], d[1], d[2]});
                                      if (detail::viable(x)) intermediates.insert(x);
                                  });
    stage1 += symbolic_join<3, 3>(sc.particle_groups, detail::doubles_by_particle(doubles), policy,
                                  [&](const OuterKey<3>& s, const OuterKey<3>& d) {
                                      auto x = detail::make_intermediate({s[0], d[0], d[1]}, {s[1], s[2], d[2]});
                                      if (detail::viable(x)) intermediates.insert(x);
                                  });

    // Intermediates keyed for hole contraction: (two remaining holes, three particles) -> {hole}.
    GroupedView<5> by_hole, by_particle;
    for (const auto& x : intermediates) {
        for (std::size_t k = 0; k < 3; ++k) {
            if (k > 0 && x.holes[k] == x.holes[k - 1]) continue;
            const auto rest = detail::drop_one(x.holes, x.holes[k]);
            detail::add_to_group<5>(by_hole, {rest[0], rest[1], x.particles[0], x.particles[1], x.particles[2]},
                                    x.holes[k]);
        }
        for (std::size_t k = 0; k < 3; ++k) {
            if (k > 0 && x.particles[k] == x.particles[k - 1]) continue;
            const auto rest = detail::drop_one(x.particles, x.particles[k]);
            detail::add_to_group<5>(by_particle, {x.holes[0], x.holes[1], x.holes[2], rest[0], rest[1]},
                                    x.particles[k]);
        }
    }

    auto emit = [&](std::array<int, 4> h, std::array<int, 4> p) {
        std::sort(h.begin(), h.end());
        std::sort(p.begin(), p.end());
        if (detail::strictly_increasing(h) && detail::strictly_increasing(p))
            out.insert(detail::make_signature<4>(h, p));
    };
    std::uint64_t stage2 = 0;
    stage2 += symbolic_join<3, 5>(sc.hole_groups, by_hole, policy,
                                  [&](const OuterKey<3>& s, const OuterKey<5>& x) {
                                      emit({s[0], s[1], x[0], x[1]}, {s[2], x[2], x[3], x[4]});
                                  });
    stage2 += symbolic_join<3, 5>(sc.particle_groups, by_particle, policy,
                                  [&](const OuterKey<3>& s, const OuterKey<5>& x) {
                                      emit({s[0], x[0], x[1], x[2]}, {s[1], s[2], x[3], x[4]});
                                  });
    if (counters) {
        counters->intermediate_join_ops += stage1;
        counters->quadruples_join_ops += stage2;
        counters->n_intermediates += intermediates.size();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Support assembly
// ---------------------------------------------------------------------------

/// Apply an excitation signature to a reference determinant.
[[nodiscard]] inline Determinant apply_signature(const ExcitationSignature& sig, const Determinant& reference,
                                                 int n_spatial) {
    Determinant d = reference;
    auto flip = [&](int so, bool expect_occupied) {
        u64& m = so < n_spatial ? d.alpha : d.beta;
        const u64 bit = u64{1} << (so < n_spatial ? so : so - n_spatial);
        if (static_cast<bool>(m & bit) != expect_occupied)
            throw ConfigError("excitation signature incompatible with reference determinant");
        m ^= bit;
    };
    for (int h : sig.holes) flip(h, true);
    for (int p : sig.particles) flip(p, false);
    return d;
}

struct SelectionCost {
    std::uint64_t n_hole_scatterers = 0;
    std::uint64_t n_particle_scatterers = 0;
    std::uint64_t n_scatterers = 0;  ///< N_s
    std::uint64_t n_doubles = 0;     ///< N_d
    std::uint64_t n_occupied = 0;    ///< n_o (spin orbitals)
    std::uint64_t n_virtual = 0;     ///< n_v (spin orbitals)
    JoinCounters counters;
    std::uint64_t triples_bound = 0;      ///< N_s * N_d
    std::uint64_t quadruples_bound = 0;   ///< N_s^2 * N_d
    /// Multiply-adds of explicit contraction of both triples terms over full
    /// index ranges: n_o^4 n_v^3 (<ij||am> t_mk^bc) + n_o^3 n_v^4 (<ie||ab> t_jk^ec).
    double dense_triples_ops = 0.0;
    std::size_t n_triples = 0;
    std::size_t n_quadruples = 0;
};

[[nodiscard]] inline SelectionCost make_cost(const ScattererSet& sc, const SignatureSet& doubles) {
    SelectionCost c;
    c.n_hole_scatterers = sc.hole.size();
    c.n_particle_scatterers = sc.particle.size();
    c.n_scatterers = sc.size();
    c.n_doubles = doubles.size();
    c.n_occupied = static_cast<std::uint64_t>(sc.basis.n_occupied());
    c.n_virtual = static_cast<std::uint64_t>(sc.basis.n_virtual());
    c.triples_bound = c.n_scatterers * c.n_doubles;
    c.quadruples_bound = c.n_scatterers * c.n_scatterers * c.n_doubles;
    const double no = static_cast<double>(c.n_occupied), nv = static_cast<double>(c.n_virtual);
    c.dense_triples_ops = no * no * no * no * nv * nv * nv + no * no * no * nv * nv * nv * nv;
    return c;
}

/// Runs both symbolic selections with counters enabled and reports the cost.
[[nodiscard]] inline SelectionCost operation_count_report(const ScattererSet& sc, const SignatureSet& doubles,
                                                          JoinPolicy policy = JoinPolicy::AtLeastOne) {
    SelectionCost c = make_cost(sc, doubles);
    c.n_triples = select_triples_symbolic(sc, doubles, policy, &c.counters).size();
    c.n_quadruples = select_quadruples_symbolic(sc, doubles, policy, &c.counters).size();
    return c;
}

struct PerturbativeScreen {
    ConfigurationSet configurations;
    std::array<std::size_t, 5> rank_counts{};  ///< configurations per excitation rank 0..4
    SelectionCost cost;
};

/// Reference plus rank-2 (and for n_max >= 3 singles and rank-3, for
/// n_max = 4 rank-4) configurations, in that order.
[[nodiscard]] inline PerturbativeScreen perturbative_screen(const IntegralSet& s, const OrbitalBasis& basis,
                                                            double eps_int, int n_max,
                                                            JoinPolicy policy = JoinPolicy::AtLeastOne) {
    if (n_max < 2 || n_max > 4) throw ConfigError("n_max must be 2, 3 or 4");
    basis.validate();
    PerturbativeScreen screen;
    const Determinant ref = reference_determinant(basis);
    screen.configurations.insert(ref, Provenance::Reference);
    screen.rank_counts[0] = 1;

    const AmplitudeTensor t = mp2_amplitudes(s, basis, eps_int);
    const SignatureSet doubles = select_doubles(t);
    ScattererSet sc;
    if (n_max >= 3) sc = build_scatterers(s, basis, eps_int);
    screen.cost = make_cost(sc, doubles);

    auto add = [&](const SignatureSet& sigs) {
        for (const auto& sig : sigs)
            if (screen.configurations.insert(apply_signature(sig, ref, basis.n_spatial), Provenance::Perturbative))
                ++screen.rank_counts[sig.rank()];
    };
    add(doubles);
    if (n_max >= 3) {
        add(select_singles(s, basis, t, eps_int));
        const auto triples = select_triples_symbolic(sc, doubles, policy, &screen.cost.counters);
        screen.cost.n_triples = triples.size();
        add(triples);
    }
    if (n_max >= 4) {
        const auto quads = select_quadruples_symbolic(sc, doubles, policy, &screen.cost.counters);
        screen.cost.n_quadruples = quads.size();
        add(quads);
    }
    return screen;
}

[[nodiscard]] inline ConfigurationSet perturbative_support(const IntegralSet& s, const OrbitalBasis& basis,
                                                           double eps_int, int n_max,
                                                           JoinPolicy policy = JoinPolicy::AtLeastOne) {
    return perturbative_screen(s, basis, eps_int, n_max, policy).configurations;
}

} // namespace pigen
