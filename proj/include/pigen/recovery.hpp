// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file recovery.hpp
 * @brief Self-consistent configuration recovery.
 *
 * Each macro cycle diagonalizes the current subspace, moves configurations
 * with |c| <= eps_coeff to a permanent blacklist, trains the RBM on the
 * dominant configurations (micro cycle), generates new in-sector
 * configurations, screens them against the blacklist and merges the
 * survivors back. The reference determinant is never blacklisted.
 */

#pragma once

#include "pigen/error.hpp"
#include "pigen/fermion.hpp"
#include "pigen/hamiltonian.hpp"
#include "pigen/integrals.hpp"
#include "pigen/random.hpp"
#include "pigen/rbm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <unordered_set>
#include <vector>

namespace pigen {

enum class GenerationMode { Rbm, Random };

struct RecoveryConfig {
    double eps_coeff = 1e-10;
    double eps_energy = 1e-5;
    double x_percent = 2.0;
    std::size_t min_generation = 8;
    int max_macro = 100;
    std::size_t target_size = 4000;
    int hidden_units = 0;  ///< 0 selects D = J = 2 * n_spatial
    bool warm_start = true;
    CdOptions cd;
    GenerationOptions generation;
    DavidsonOptions davidson;
    GenerationMode mode = GenerationMode::Rbm;
    std::uint64_t seed = 0;
    std::optional<double> reference_energy;
};

/// One row per macro cycle.
struct CycleRecord {
    int macro = 0;
    double energy = 0.0;
    double delta_energy = std::numeric_limits<double>::infinity();  ///< vs previous cycle
    std::size_t n_det = 0;            ///< dimension diagonalized this cycle
    std::size_t n_dominant = 0;       ///< kept after the eps_coeff split
    std::size_t newly_blacklisted = 0;
    std::size_t blacklist_size = 0;
    std::size_t search_size = 0;      ///< distinct determinants ever diagonalized or blacklisted
    std::size_t generated = 0;        ///< distinct in-sector configurations produced
    std::size_t survivors = 0;        ///< new configurations merged after screening
    std::size_t shortfall = 0;
    bool trained = false;
    int davidson_iterations = 0;
};

struct RecoveryState {
    ConfigurationSet subspace;
    std::vector<Determinant> blacklist;  ///< sorted, duplicate-free
    std::optional<CIVector> ci;          ///< aligned with `diagonalized`
    std::vector<Determinant> diagonalized;  ///< subspace of the most recent diagonalization
    std::vector<CycleRecord> history;
    std::unordered_set<Determinant, DeterminantHash> searched;
    Determinant reference;
    OrbitalBasis basis;
    std::uint64_t rng_seed = 0;
    int consecutive_empty = 0;

    [[nodiscard]] bool blacklisted(const Determinant& d) const {
        return std::binary_search(blacklist.begin(), blacklist.end(), d);
    }
};

// ---------------------------------------------------------------------------
// Blacklist
// ---------------------------------------------------------------------------

/// Candidates minus the sorted blacklist, order preserved. O(N log N_B).
[[nodiscard]] inline ConfigurationSet blacklist_screen(const ConfigurationSet& candidates,
                                                       const std::vector<Determinant>& sorted_blacklist) {
    ConfigurationSet out;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (!std::binary_search(sorted_blacklist.begin(), sorted_blacklist.end(), candidates[i]))
            out.insert(candidates[i], candidates.provenance(i), candidates.frequency(i));
    return out;
}

/// Merge `extra` into the sorted blacklist, keeping it sorted and unique.
inline void extend_blacklist(std::vector<Determinant>& blacklist, std::vector<Determinant> extra) {
    std::sort(extra.begin(), extra.end());
    std::vector<Determinant> merged;
    merged.reserve(blacklist.size() + extra.size());
    std::set_union(blacklist.begin(), blacklist.end(), extra.begin(), extra.end(), std::back_inserter(merged));
    blacklist = std::move(merged);
}

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

/// Ordered union of the sampled and perturbative sets with the reference
/// determinant guaranteed present (prepended if missing).
[[nodiscard]] inline RecoveryState initialize_state(const ConfigurationSet& hardware,
                                                    const ConfigurationSet& perturbative,
                                                    const OrbitalBasis& basis, std::uint64_t seed = 0) {
    basis.validate();
    RecoveryState st;
    st.basis = basis;
    st.reference = reference_determinant(basis);
    st.rng_seed = seed;
    for (const auto* set : {&hardware, &perturbative})
        for (const auto& d : *set)
            if (d.n_alpha() != basis.n_alpha || d.n_beta() != basis.n_beta || (d.alpha >> basis.n_spatial) != 0 ||
                (d.beta >> basis.n_spatial) != 0)
                throw ConfigError("initialize_state: configuration outside the (n_alpha, n_beta) sector");
    st.subspace.insert(st.reference, Provenance::Reference);
    st.subspace.merge(hardware);
    st.subspace.merge(perturbative);
    return st;
}

[[nodiscard]] inline std::size_t generation_budget(const OrbitalBasis& basis, const RecoveryConfig& cfg) {
    const double dq = static_cast<double>(symmetry_space_dimension(basis));
    const auto n = static_cast<std::size_t>(std::ceil(cfg.x_percent * dq / 100.0));
    return std::max(cfg.min_generation, n);
}

[[nodiscard]] inline RbmModel initial_model(const OrbitalBasis& basis, const RecoveryConfig& cfg, std::uint64_t index = 0) {
    const int D = basis.n_spin_orbitals();
    return RbmModel::initialize(D, cfg.hidden_units > 0 ? cfg.hidden_units : D,
                                derive_seed(cfg.seed, Stream::RbmInit, index));
}

// ---------------------------------------------------------------------------
// Macro cycle
// ---------------------------------------------------------------------------

namespace detail {

/// Step (1): project and diagonalize, warm-starting from the previous vector.
inline DavidsonResult diagonalize_subspace(RecoveryState& st, const IntegralSet& s, const RecoveryConfig& cfg) {
    if (st.subspace.empty()) throw ConfigError("macro_cycle: empty subspace");
    const auto H = project_hamiltonian(st.subspace, s);
    std::optional<Eigen::VectorXd> guess;
    if (st.ci) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(st.subspace.size()));
        for (std::size_t k = 0; k < st.diagonalized.size(); ++k) {
            const std::size_t at = st.subspace.find(st.diagonalized[k]);
            if (at < st.subspace.size()) g(static_cast<Eigen::Index>(at)) = st.ci->coefficients(static_cast<Eigen::Index>(k));
        }
        guess = g;
    }
    auto res = davidson_ground_state(H, guess, cfg.davidson);
    st.diagonalized = st.subspace.members();
    st.ci = res.state;
    for (const auto& d : st.diagonalized) st.searched.insert(d);
    return res;
}

/// Steps (2) onward, given the configurations proposed by the generator.
inline void finish_cycle(RecoveryState& st, CycleRecord& row, const ConfigurationSet& generated) {
    row.generated = generated.size();
    ConfigurationSet screened = blacklist_screen(generated, st.blacklist);
    std::size_t added = 0;
    for (std::size_t i = 0; i < screened.size(); ++i)
        if (st.subspace.insert(screened[i], screened.provenance(i), screened.frequency(i))) {
            st.searched.insert(screened[i]);
            ++added;
        }
    st.subspace.insert(st.reference, Provenance::Reference);
    row.survivors = added;
    st.consecutive_empty = added == 0 ? st.consecutive_empty + 1 : 0;
    row.blacklist_size = st.blacklist.size();
    row.search_size = st.searched.size();
    if (!st.history.empty()) row.delta_energy = row.energy - st.history.back().energy;
    st.history.push_back(row);
}

/// Step (2): split at eps_coeff; returns the training distribution inputs.
inline void split_and_blacklist(RecoveryState& st, CycleRecord& row, const RecoveryConfig& cfg) {
    const auto& c = st.ci->coefficients;
    ConfigurationSet kept;
    std::vector<Determinant> dropped;
    for (std::size_t k = 0; k < st.subspace.size(); ++k) {
        const auto& d = st.subspace[k];
        if (std::abs(c(static_cast<Eigen::Index>(k))) > cfg.eps_coeff || d == st.reference)
            kept.insert(d, st.subspace.provenance(k), st.subspace.frequency(k));
        else
            dropped.push_back(d);
    }
    row.n_dominant = kept.size();
    row.newly_blacklisted = dropped.size();
    for (const auto& d : dropped) st.searched.insert(d);
    extend_blacklist(st.blacklist, std::move(dropped));
    st.subspace = std::move(kept);
}

} // namespace detail

/// One macro cycle with RBM-driven generation; `model` is updated in place.
inline void macro_cycle(RecoveryState& st, const IntegralSet& s, RbmModel& model, const RecoveryConfig& cfg) {
    CycleRecord row;
    row.macro = static_cast<int>(st.history.size()) + 1;
    const auto cycle = static_cast<std::uint64_t>(row.macro);
    row.n_det = st.subspace.size();
    const auto diag = detail::diagonalize_subspace(st, s, cfg);
    row.energy = diag.state.energy;
    row.davidson_iterations = diag.iterations;
    const ConfigurationSet diagonalized_set = st.subspace;
    detail::split_and_blacklist(st, row, cfg);

    // Micro cycle: train on |c| of the dominant non-reference configurations.
    bool any_dominant = false;
    for (const auto& d : st.subspace)
        if (d != st.reference) any_dominant = true;
    if (any_dominant) {
        if (!cfg.warm_start) model = initial_model(st.basis, cfg, cycle);
        Rng dist_rng(derive_seed(st.rng_seed, Stream::TrainingDistribution, cycle));
        const auto td = build_training_distribution(st.ci->coefficients, diagonalized_set, cfg.eps_coeff,
                                                    cfg.target_size, st.reference, dist_rng);
        Rng train_rng(derive_seed(st.rng_seed, Stream::Training, cycle));
        (void)cd_train(model, td.samples, st.basis.n_spatial, cfg.cd, train_rng);
        row.trained = true;
    }

    Rng gen_rng(derive_seed(st.rng_seed, Stream::Generation, cycle));
    const auto gen = symmetry_constrained_generate(model, st.basis, generation_budget(st.basis, cfg), gen_rng,
                                                   cfg.generation);
    row.shortfall = gen.shortfall;
    detail::finish_cycle(st, row, gen.configurations);
}

/// Same as macro_cycle with training and generation replaced by uniform
/// draws from the symmetry space.
inline void random_baseline_cycle(RecoveryState& st, const IntegralSet& s, const RecoveryConfig& cfg) {
    CycleRecord row;
    row.macro = static_cast<int>(st.history.size()) + 1;
    row.n_det = st.subspace.size();
    const auto diag = detail::diagonalize_subspace(st, s, cfg);
    row.energy = diag.state.energy;
    row.davidson_iterations = diag.iterations;
    detail::split_and_blacklist(st, row, cfg);

    Rng rng(derive_seed(st.rng_seed, Stream::RandomBaseline, static_cast<std::uint64_t>(row.macro)));
    ConfigurationSet drawn;
    const std::size_t n_gen = generation_budget(st.basis, cfg);
    for (std::size_t k = 0; k < n_gen; ++k) drawn.insert(random_sector_determinant(st.basis, rng), Provenance::Generated);
    detail::finish_cycle(st, row, drawn);
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

enum class StopReason { EnergyConverged, NoNewStates, MaxMacro };

[[nodiscard]] inline std::string_view to_string(StopReason r) noexcept {
    switch (r) {
    case StopReason::EnergyConverged: return "energy_converged";
    case StopReason::NoNewStates: return "no_new_states";
    case StopReason::MaxMacro: return "max_macro";
    }
    return "unknown";
}

struct RecoveryReport {
    double energy = 0.0;
    bool converged = false;
    StopReason stop = StopReason::MaxMacro;
    std::vector<CycleRecord> cycles;
    std::vector<Determinant> determinants;  ///< final diagonalization subspace
    Eigen::VectorXd coefficients;           ///< aligned with `determinants`
    std::size_t blacklist_size = 0;
    std::size_t search_size = 0;
    u64 symmetry_dimension = 0;
    std::optional<double> reference_energy;

    /// |c| values sorted ascending (coefficient-distribution data).
    [[nodiscard]] std::vector<double> sorted_magnitudes() const {
        std::vector<double> v(static_cast<std::size_t>(coefficients.size()));
        for (Eigen::Index i = 0; i < coefficients.size(); ++i) v[static_cast<std::size_t>(i)] = std::abs(coefficients(i));
        std::sort(v.begin(), v.end());
        return v;
    }
};

/// Whether the loop stops after the cycle just appended to `st.history`.
[[nodiscard]] inline std::optional<StopReason> stop_reason(const RecoveryState& st, const RecoveryConfig& cfg) {
    const auto& last = st.history.back();
    if (std::isinf(cfg.eps_energy) || std::abs(last.delta_energy) < cfg.eps_energy) return StopReason::EnergyConverged;
    if (st.consecutive_empty >= 2) return StopReason::NoNewStates;
    if (static_cast<int>(st.history.size()) >= cfg.max_macro) return StopReason::MaxMacro;
    return std::nullopt;
}

/// Called after every macro cycle with the updated state (instrumentation).
using CycleObserver = std::function<void(const RecoveryState&)>;

/// Run macro cycles from `st` until a stopping rule fires.
[[nodiscard]] inline RecoveryReport run_recovery(RecoveryState st, const IntegralSet& s, const RecoveryConfig& cfg,
                                                 const CycleObserver& observe = {}) {
    if (cfg.max_macro < 1) throw ConfigError("max_macro must be at least 1");
    if (!(cfg.eps_coeff >= 0.0) || !(cfg.eps_energy > 0.0) || !(cfg.x_percent > 0.0))
        throw ConfigError("eps_coeff >= 0, eps_energy > 0 and x_percent > 0 are required");
    RbmModel model = initial_model(st.basis, cfg);
    std::optional<StopReason> stop;
    while (!stop) {
        if (cfg.mode == GenerationMode::Rbm)
            macro_cycle(st, s, model, cfg);
        else
            random_baseline_cycle(st, s, cfg);
        if (observe) observe(st);
        stop = stop_reason(st, cfg);
    }
    RecoveryReport rep;
    rep.stop = *stop;
    rep.converged = *stop != StopReason::MaxMacro;
    rep.cycles = st.history;
    rep.energy = st.history.back().energy;
    rep.determinants = st.diagonalized;
    rep.coefficients = st.ci->coefficients;
    rep.blacklist_size = st.blacklist.size();
    rep.search_size = st.searched.size();
    rep.symmetry_dimension = symmetry_space_dimension(st.basis);
    rep.reference_energy = cfg.reference_energy;
    return rep;
}

} // namespace pigen
