// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file pipeline.hpp
 * @brief End-to-end run: samples -> sector filter -> perturbative support
 *        -> recovery loop.
 *
 * All randomness derives from RunConfig::seed: the sampler uses the
 * Sampler stream, the recovery loop its own streams (see random.hpp).
 */

#pragma once

#include "pigen/config.hpp"
#include "pigen/hamiltonian.hpp"
#include "pigen/integrals.hpp"
#include "pigen/recovery.hpp"
#include "pigen/sampler.hpp"
#include "pigen/selector.hpp"

#include <fstream>
#include <string>

namespace pigen {

struct PipelineResult {
    OrbitalBasis basis;
    Counts counts;
    ConfigurationSet hardware;
    PerturbativeScreen screen;
    RecoveryReport report;
};

[[nodiscard]] inline OrbitalBasis resolve_basis(const IntegralSet& s, const RunConfig& cfg) {
    OrbitalBasis b = cfg.n_alpha >= 0 ? OrbitalBasis{s.n_spatial, cfg.n_alpha, cfg.n_beta} : s.basis_from_header();
    b.validate();
    return b;
}

/// State the simulated device samples from: the exact ground state when the
/// symmetry space fits under `fci_cap`, else the ground state over the
/// perturbative support (a truncated CI vector).
struct SimulationState {
    ConfigurationSet configurations;
    Eigen::VectorXd coefficients;
    bool exact = false;
};

[[nodiscard]] inline SimulationState simulation_state(const IntegralSet& s, const OrbitalBasis& basis,
                                                      const RunConfig& cfg, const ConfigurationSet& support) {
    SimulationState out;
    if (symmetry_space_dimension(basis) <= cfg.fci_cap) {
        const auto fci = dense_fci_oracle(basis, s, cfg.fci_cap);
        for (const auto& d : fci.determinants) out.configurations.insert(d, Provenance::Reference);
        out.coefficients = fci.state.coefficients;
        out.exact = true;
    } else {
        out.configurations = support;
        out.coefficients = davidson_ground_state(project_hamiltonian(support, s)).state.coefficients;
    }
    return out;
}

[[nodiscard]] inline Counts simulate_counts(const IntegralSet& s, const OrbitalBasis& basis, const RunConfig& cfg,
                                            const ConfigurationSet& support) {
    const auto state = simulation_state(s, basis, cfg, support);
    return sample_from_state(state.coefficients, state.configurations, basis.n_spatial, cfg.shots,
                             {cfg.bitflip_p, derive_seed(cfg.seed, Stream::Sampler)});
}

[[nodiscard]] inline Counts read_counts_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open counts file '" + path + "'");
    return load_counts(in);
}

/// Run the whole pipeline on already parsed integrals.
[[nodiscard]] inline PipelineResult run_pipeline(const IntegralSet& s, const RunConfig& cfg,
                                                 const CycleObserver& observe = {}) {
    cfg.validate();
    PipelineResult r;
    r.basis = resolve_basis(s, cfg);
    r.screen = perturbative_screen(s, r.basis, cfg.eps_int, cfg.n_max, cfg.join_policy);
    r.counts = cfg.source == SampleSource::Simulate ? simulate_counts(s, r.basis, cfg, r.screen.configurations)
                                                    : read_counts_file(cfg.counts_path);
    r.hardware = counts_to_configurations(r.counts, r.basis);
    auto state = initialize_state(r.hardware, r.screen.configurations, r.basis, cfg.seed);
    r.report = run_recovery(std::move(state), s, cfg.recovery(), observe);
    return r;
}

[[nodiscard]] inline PipelineResult run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    return run_pipeline(read_fcidump(cfg.fcidump), cfg);
}

} // namespace pigen
