// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file acceptance.cpp
 * @brief End-to-end acceptance checks, one PASS/FAIL line per criterion.
 *
 * Usage: pigen_acceptance [criterion ...]   (default: all of 1..9)
 *
 * Every check compares production code against an independent oracle
 * (tests/support/oracles.hpp, the golden references in tests/data, or
 * closed-form statistics). Thresholds, systems and seeds are fixed here in
 * advance; the exit status is nonzero if any selected criterion fails.
 */

#include "pigen/pigen.hpp"

#include "oracles.hpp"
#include "test_data.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace pigen;
using pigen::testing::load_system;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("violated: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

/// Ground-state energy from the operator-application Hamiltonian over a
/// popcount enumeration of the sector (no production enumeration or
/// Slater-Condon code involved).
double oracle_fci_energy(const pigen::testing::System& sys) {
    const int n = sys.basis.n_spatial;
    std::vector<Determinant> dets;
    for (u64 a = 0; a < (u64{1} << n); ++a) {
        if (std::popcount(a) != sys.basis.n_alpha) continue;
        for (u64 b = 0; b < (u64{1} << n); ++b)
            if (std::popcount(b) == sys.basis.n_beta) dets.push_back(Determinant{a, b});
    }
    const Eigen::MatrixXd H = oracle::second_quantized_hamiltonian(dets, sys.integrals);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

// ---------------------------------------------------------------------------
// Shared pipeline runs (criteria 1, 6, 7)
// ---------------------------------------------------------------------------

/// Systems of the convergence criterion, all at the production thresholds.
const std::vector<std::string> kConvergenceSystems{"h2_sto3g", "h4_chain_sto3g", "h4_chain_stretched_sto3g",
                                                   "lih_sto3g", "h2o_sto3g"};

constexpr std::uint64_t kPipelineSeed = 1;
constexpr std::uint64_t kPipelineShots = 1'000'000;
constexpr double kPipelineBitflip = 0.01;
constexpr double kRuntimeLimitSeconds = 120.0;

RunConfig pipeline_config(const std::string& name) {
    RunConfig cfg;
    cfg.fcidump = pigen::testing::data_path(name + ".fcidump");
    cfg.n_max = 4;
    cfg.x_percent = 2.0;
    cfg.eps_int = 1e-10;
    cfg.eps_coeff = 1e-10;
    cfg.eps_energy = 1e-5;
    cfg.shots = kPipelineShots;
    cfg.bitflip_p = kPipelineBitflip;
    cfg.seed = kPipelineSeed;
    return cfg;
}

/// Per-cycle invariant checker attached to a recovery run.
struct InvariantMonitor {
    const IntegralSet* integrals = nullptr;
    std::set<Determinant> ever_blacklisted;
    std::vector<Determinant> last_blacklist;
    std::size_t last_search = 0;
    std::size_t cycles = 0, spot_checks = 0;
    double worst_energy_gap = 0.0;
    std::vector<std::string> violations;

    void fail(const std::string& s) {
        if (violations.size() < 5) violations.push_back("cycle " + std::to_string(cycles) + ": " + s);
    }

    void operator()(const RecoveryState& st) {
        ++cycles;
        const auto& row = st.history.back();
        if (!std::includes(st.blacklist.begin(), st.blacklist.end(), last_blacklist.begin(), last_blacklist.end()))
            fail("blacklist shrank");
        last_blacklist = st.blacklist;
        ever_blacklisted.insert(st.blacklist.begin(), st.blacklist.end());
        for (const auto& d : st.subspace)
            if (ever_blacklisted.contains(d)) fail("blacklisted configuration back in the subspace");
        if (!st.subspace.contains(st.reference)) fail("reference missing from the subspace");
        if (std::find(st.diagonalized.begin(), st.diagonalized.end(), st.reference) == st.diagonalized.end())
            fail("reference missing from the diagonalized subspace");
        if (ever_blacklisted.contains(st.reference)) fail("reference blacklisted");
        if (row.search_size < last_search) fail("search space shrank");
        last_search = row.search_size;
        if (st.diagonalized.size() <= 2000) {
            const Eigen::MatrixXd H = oracle::second_quantized_hamiltonian(st.diagonalized, *integrals);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
            const double gap = std::abs(row.energy - es.eigenvalues()(0));
            worst_energy_gap = std::max(worst_energy_gap, gap);
            if (gap > 1e-9) fail("reported energy differs from the dense minimum by " + fmt("%.2e", gap));
            ++spot_checks;
        }
    }
};

struct PipelineRun {
    PipelineResult result;
    double fci_energy = 0.0;
    double seconds = 0.0;
    std::string artifacts;  ///< report.json + cycles.csv + coeffs.csv + counts
    InvariantMonitor monitor;
};

std::string render(const PipelineResult& r, const RunConfig& cfg) {
    std::ostringstream os;
    write_report_json(os, r, cfg);
    write_cycles_csv(os, r.report);
    write_coeffs_csv(os, r.report, r.basis);
    save_counts(os, r.counts);
    return os.str();
}

const PipelineRun& pipeline_run(const std::string& name) {
    static std::map<std::string, PipelineRun> cache;
    if (auto it = cache.find(name); it != cache.end()) return it->second;
    const auto sys = load_system(name);
    PipelineRun run;
    run.fci_energy = oracle_fci_energy(sys);
    run.monitor.integrals = &sys.integrals;
    RunConfig cfg = pipeline_config(name);
    cfg.reference_energy = run.fci_energy;
    const auto t0 = std::chrono::steady_clock::now();
    run.result = run_pipeline(sys.integrals, cfg, std::ref(run.monitor));
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.monitor.integrals = nullptr;
    run.artifacts = render(run.result, cfg);
    return cache.emplace(name, std::move(run)).first->second;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

Outcome criterion_1() {
    Outcome o;
    for (const auto& name : kConvergenceSystems) {
        const auto& run = pipeline_run(name);
        const auto& rep = run.result.report;
        const double err = rep.energy - run.fci_energy;
        o.note(name + " err " + fmt("%.1e", err) + " in " + std::to_string(rep.cycles.size()) + " cycles, " +
               fmt("%.1f", run.seconds) + " s");
        o.require(rep.converged, name + " converged");
        o.require(std::abs(err) < 1e-6, name + " |E - E_FCI| < 1e-6");
        o.require(run.seconds <= kRuntimeLimitSeconds, name + " runtime <= 120 s");
    }
    return o;
}

Outcome criterion_2() {
    Outcome o;
    double worst = 0.0;
    for (const char* name : {"h2_sto3g", "h4_chain_sto3g", "h4_chain_stretched_sto3g", "lih_sto3g", "h2o_sto3g",
                             "h2o_stretched_sto3g"}) {
        const auto sys = load_system(name);
        const double e = mp2_energy(mp2_amplitudes(sys.integrals, sys.basis, 0.0), sys.integrals);
        const double diff = std::abs(e - sys.ref.e_mp2_corr);
        worst = std::max(worst, diff);
        o.require(diff < 1e-8, std::string(name) + " MP2 within 1e-8 (off by " + fmt("%.1e", diff) + ")");
    }
    o.note("6 systems, worst deviation " + fmt("%.1e", worst));
    return o;
}

Outcome criterion_3() {
    constexpr double kFloor = 1e-8, kEpsInt = 1e-10;
    Outcome o;
    for (const char* name : {"h4_chain_sto3g", "h2o_sto3g"}) {
        const auto sys = load_system(name);
        const auto sc = build_scatterers(sys.integrals, sys.basis, kEpsInt);
        const auto doubles = select_doubles(mp2_amplitudes(sys.integrals, sys.basis, kEpsInt));
        const auto triples = select_triples_symbolic(sc, doubles);
        const auto quads = select_quadruples_symbolic(sc, doubles);
        std::size_t t_need = 0, t_hit = 0, q_need = 0, q_hit = 0;
        for (const auto& [key, value] : oracle::triple_measures(sys.integrals, sys.basis)) {
            if (std::abs(value) <= kFloor) continue;
            ++t_need;
            const auto [i, j, k, a, b, c] = key;
            if (triples.contains({{i, j, k}, {a, b, c}})) ++t_hit;
        }
        for (const auto& [k, value] : oracle::quadruple_measures(sys.integrals, sys.basis)) {
            if (std::abs(value) <= kFloor) continue;
            ++q_need;
            if (quads.contains({{k[0], k[1], k[2], k[3]}, {k[4], k[5], k[6], k[7]}})) ++q_hit;
        }
        o.note(std::string(name) + " triples " + std::to_string(t_hit) + "/" + std::to_string(t_need) +
               ", quadruples " + std::to_string(q_hit) + "/" + std::to_string(q_need));
        o.require(t_hit == t_need, std::string(name) + " triples recall 100%");
        o.require(q_hit == q_need, std::string(name) + " quadruples recall 100%");
    }
    return o;
}

Eigen::VectorXd bits_of(unsigned word, int width) {
    Eigen::VectorXd v(width);
    for (int i = 0; i < width; ++i) v(i) = static_cast<double>((word >> i) & 1u);
    return v;
}

RbmModel random_model(int D, int J, double scale, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    RbmModel m = RbmModel::zeros(D, J);
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < J; ++j) m.weights(i, j) = u(gen);
    for (int i = 0; i < D; ++i) m.visible_bias(i) = u(gen);
    for (int j = 0; j < J; ++j) m.hidden_bias(j) = u(gen);
    return m;
}

/// Energy written out independently of the production function.
double oracle_energy(const Eigen::VectorXd& g, const Eigen::VectorXd& h, const RbmModel& m) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) e -= m.visible_bias(i) * g(i);
    for (Eigen::Index j = 0; j < h.size(); ++j) e -= m.hidden_bias(j) * h(j);
    for (Eigen::Index i = 0; i < g.size(); ++i)
        for (Eigen::Index j = 0; j < h.size(); ++j) e -= g(i) * m.weights(i, j) * h(j);
    return e;
}

Outcome criterion_4() {
    Outcome o;
    double worst_cond = 0.0, worst_norm = 0.0, worst_energy = 0.0;
    std::uint64_t seed = 100;
    for (int D = 1; D <= 6; ++D)
        for (int J = 1; J <= 6; ++J) {
            const auto m = random_model(D, J, 1.5, ++seed);
            const unsigned nv = 1u << D, nh = 1u << J;
            Eigen::MatrixXd joint(nv, nh);
            for (unsigned g = 0; g < nv; ++g)
                for (unsigned h = 0; h < nh; ++h) {
                    const auto gv = bits_of(g, D), hv = bits_of(h, J);
                    const double e = oracle_energy(gv, hv, m);
                    worst_energy = std::max(worst_energy, std::abs(e - rbm_energy(gv, hv, m)));
                    joint(g, h) = std::exp(-e);
                }
            const double z = joint.sum();
            // Marginal p(g) from the closed-form free energy, normalized by the enumerated Z.
            double total = 0.0;
            for (unsigned g = 0; g < nv; ++g) {
                const auto gv = bits_of(g, D);
                double log_w = m.visible_bias.dot(gv);
                const Eigen::VectorXd a = m.weights.transpose() * gv + m.hidden_bias;
                for (Eigen::Index j = 0; j < a.size(); ++j) log_w += std::log1p(std::exp(a(j)));
                total += std::exp(log_w) / z;
            }
            worst_norm = std::max(worst_norm, std::abs(total - 1.0));
            for (unsigned g = 0; g < nv; ++g) {
                const auto ph = hidden_conditional(bits_of(g, D), m);
                for (int j = 0; j < J; ++j) {
                    double num = 0.0;
                    for (unsigned h = 0; h < nh; ++h)
                        if ((h >> j) & 1u) num += joint(g, h);
                    worst_cond = std::max(worst_cond, std::abs(ph(j) - num / joint.row(g).sum()));
                }
            }
            for (unsigned h = 0; h < nh; ++h) {
                const auto pg = visible_conditional(bits_of(h, J), m);
                for (int i = 0; i < D; ++i) {
                    double num = 0.0;
                    for (unsigned g = 0; g < nv; ++g)
                        if ((g >> i) & 1u) num += joint(g, h);
                    worst_cond = std::max(worst_cond, std::abs(pg(i) - num / joint.col(h).sum()));
                }
            }
        }
    o.require(worst_energy < 1e-12, "energy matches the written-out form");
    o.require(worst_cond < 1e-12, "conditionals within 1e-12");
    o.require(worst_norm < 1e-12, "marginal normalizes within 1e-12");

    // CD direction against the exact log-likelihood gradient, D = 3, J = 2.
    const int D = 3, J = 2;
    const auto m = random_model(D, J, 0.8, 4242);
    const std::vector<unsigned> data{0b011u, 0b011u, 0b110u, 0b001u};
    Eigen::MatrixXd gw = Eigen::MatrixXd::Zero(D, J);
    Eigen::VectorXd gu = Eigen::VectorXd::Zero(D), gy = Eigen::VectorXd::Zero(J);
    auto ph_oracle = [&](const Eigen::VectorXd& g) {
        Eigen::VectorXd p(J);
        for (int j = 0; j < J; ++j) p(j) = 1.0 / (1.0 + std::exp(-(m.hidden_bias(j) + m.weights.col(j).dot(g))));
        return p;
    };
    for (unsigned w : data) {
        const auto g = bits_of(w, D);
        const auto p = ph_oracle(g);
        gw += g * p.transpose() / static_cast<double>(data.size());
        gu += g / static_cast<double>(data.size());
        gy += p / static_cast<double>(data.size());
    }
    Eigen::MatrixXd joint(1 << D, 1 << J);
    for (unsigned g = 0; g < (1u << D); ++g)
        for (unsigned h = 0; h < (1u << J); ++h) joint(g, h) = std::exp(-oracle_energy(bits_of(g, D), bits_of(h, J), m));
    joint /= joint.sum();
    for (unsigned g = 0; g < (1u << D); ++g)
        for (unsigned h = 0; h < (1u << J); ++h) {
            const auto gv = bits_of(g, D), hv = bits_of(h, J);
            gw -= joint(g, h) * gv * hv.transpose();
            gu -= joint(g, h) * gv;
            gy -= joint(g, h) * hv;
        }
    std::vector<Visible> chains;
    for (int c = 0; c < 100000; ++c) chains.push_back(bits_of(data[static_cast<std::size_t>(c) % data.size()], D));
    Rng rng(4242);
    const CdOptions defaults;
    const auto cd = cd_gradient(m, chains, defaults.k_gibbs, rng);
    const double inner = (cd.weights.array() * gw.array()).sum() + cd.visible_bias.dot(gu) + cd.hidden_bias.dot(gy);
    const double cosine = inner / std::sqrt((cd.weights.squaredNorm() + cd.visible_bias.squaredNorm() +
                                             cd.hidden_bias.squaredNorm()) *
                                            (gw.squaredNorm() + gu.squaredNorm() + gy.squaredNorm()));
    o.require(inner > 0.0, "CD inner product with the exact gradient > 0");
    o.note("D,J<=6: conditional err " + fmt("%.1e", worst_cond) + ", normalization err " + fmt("%.1e", worst_norm) +
           "; CD-" + std::to_string(defaults.k_gibbs) + " over 1e5 chains: inner " + fmt("%.3e", inner) +
           ", cosine " + fmt("%.4f", cosine));
    return o;
}

/// Search-space size at the first cycle within chemical accuracy; infinity if never.
double crossing(const RecoveryReport& rep, double e_fci) {
    for (const auto& c : rep.cycles)
        if (c.energy - e_fci < 1.6e-3) return static_cast<double>(c.search_size);
    return std::numeric_limits<double>::infinity();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome criterion_5() {
    // Fixed protocol: stretched H2O, start from the rank-2 perturbative
    // support only, energy threshold tight enough that the loop runs until
    // it stops finding new configurations or hits max_macro, nine paired
    // seeds, identical generation budgets.
    const auto sys = load_system("h2o_stretched_sto3g");
    const double e_fci = oracle_fci_energy(sys);
    const auto support = perturbative_support(sys.integrals, sys.basis, 1e-10, 2);
    std::vector<double> rbm, rnd;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 9; ++seed) {
        double x[2];
        for (int mode = 0; mode < 2; ++mode) {
            RecoveryConfig cfg;
            cfg.seed = seed;
            cfg.eps_energy = 1e-14;
            cfg.mode = mode == 0 ? GenerationMode::Rbm : GenerationMode::Random;
            x[mode] = crossing(run_recovery(initialize_state({}, support, sys.basis, seed), sys.integrals, cfg), e_fci);
        }
        rbm.push_back(x[0]);
        rnd.push_back(x[1]);
        per_seed += (seed > 1 ? " " : "") + fmt("%g", x[0]) + "/" + fmt("%g", x[1]);
    }
    const double m_rbm = median(rbm), m_rnd = median(rnd);
    Outcome o;
    o.require(m_rbm < m_rnd, "median RBM search size strictly below random");
    o.note("stretched H2O, seeds 1-9, search size at 1.6 mHa (rbm/random): " + per_seed + "; medians " +
           fmt("%g", m_rbm) + " vs " + fmt("%g", m_rnd));
    return o;
}

Outcome criterion_6() {
    const auto& run = pipeline_run("h2o_sto3g");
    const auto& rep = run.result.report;
    const double err = std::abs(rep.energy - run.fci_energy);
    const double half = 0.5 * static_cast<double>(rep.symmetry_dimension);
    Outcome o;
    o.require(rep.converged, "converged");
    o.require(static_cast<double>(rep.determinants.size()) < half, "N_det < 0.5 d_Q");
    o.require(err < 1e-6, "|E - E_FCI| < 1e-6");
    o.note("H2O N_det " + std::to_string(rep.determinants.size()) + " vs 0.5 d_Q = " + fmt("%g", half) + ", error " +
           fmt("%.1e", err));
    return o;
}

Outcome criterion_7() {
    Outcome o;
    std::size_t cycles = 0, spots = 0;
    double worst = 0.0;
    auto absorb = [&](const std::string& label, const InvariantMonitor& m) {
        cycles += m.cycles;
        spots += m.spot_checks;
        worst = std::max(worst, m.worst_energy_gap);
        for (const auto& v : m.violations) o.require(false, label + " " + v);
    };
    for (const auto& name : kConvergenceSystems) {
        const auto& first = pipeline_run(name);
        absorb(name, first.monitor);
        // Independent second run from scratch must be byte-identical.
        const auto sys = load_system(name);
        RunConfig cfg = pipeline_config(name);
        cfg.reference_energy = first.fci_energy;
        const auto again = run_pipeline(sys.integrals, cfg);
        o.require(render(again, cfg) == first.artifacts, name + " rerun byte-identical");
    }
    // The random baseline obeys the same invariants.
    const auto sys = load_system("h2o_stretched_sto3g");
    RecoveryConfig cfg;
    cfg.mode = GenerationMode::Random;
    cfg.seed = 3;
    cfg.max_macro = 8;
    cfg.eps_energy = 1e-14;
    InvariantMonitor m;
    m.integrals = &sys.integrals;
    (void)run_recovery(initialize_state({}, perturbative_support(sys.integrals, sys.basis, 1e-10, 2), sys.basis, 3),
                       sys.integrals, cfg, std::ref(m));
    absorb("random baseline", m);
    o.note(std::to_string(cycles) + " cycles monitored, " + std::to_string(spots) +
           " dense spot checks (worst gap " + fmt("%.1e", worst) + "), " + std::to_string(kConvergenceSystems.size()) +
           " reruns compared");
    return o;
}

Outcome criterion_8() {
    Outcome o;
    std::size_t inputs = 0;
    for (const char* name : {"h2_sto3g", "h4_chain_sto3g", "h4_chain_stretched_sto3g", "lih_sto3g", "h2o_sto3g",
                             "h2o_stretched_sto3g"}) {
        const auto sys = load_system(name);
        for (double eps : {0.0, 1e-10, 1e-6, 1e-3}) {
            const auto c = perturbative_screen(sys.integrals, sys.basis, eps, 4).cost;
            const std::uint64_t ns = c.n_scatterers, nd = c.n_doubles;
            ++inputs;
            const std::string tag = std::string(name) + " eps " + fmt("%g", eps);
            o.require(c.counters.triples_join_ops <= ns * nd, tag + " triples ops <= N_s N_d");
            o.require(c.counters.quadruples_join_ops + c.counters.intermediate_join_ops <= ns * ns * nd,
                      tag + " quadruples ops <= N_s^2 N_d");
        }
    }
    const auto sys = load_system("h2o_sto3g");
    const auto c = perturbative_screen(sys.integrals, sys.basis, 1e-10, 4).cost;
    const double ratio = c.dense_triples_ops / static_cast<double>(std::max<std::uint64_t>(c.counters.triples_join_ops, 1));
    o.require(ratio >= 10.0, "H2O dense / symbolic triples ops >= 10");
    o.note(std::to_string(inputs) + " inputs within bounds; H2O triples ops " +
           std::to_string(c.counters.triples_join_ops) + " vs dense " + fmt("%.0f", c.dense_triples_ops) + " (" +
           fmt("%.1f", ratio) + "x)");
    return o;
}

Outcome criterion_9() {
    Outcome o;
    // Noiseless two-configuration state.
    const OrbitalBasis b{4, 2, 2};
    const auto all = enumerate_symmetry_space(b, 100);
    ConfigurationSet two;
    two.insert(all[0], Provenance::Reference);
    two.insert(all[7], Provenance::Reference);
    Eigen::VectorXd c(2);
    c << std::sqrt(0.7), -std::sqrt(0.3);
    constexpr std::uint64_t kShots = 100000;
    const auto k = sample_from_state(c, two, b.n_spatial, kShots, {0.0, 91});
    const double n = static_cast<double>(kShots);
    o.require(k.n_shots() == kShots && k.entries.size() == 2, "noiseless counts live on the two configurations");
    for (int i = 0; i < 2; ++i) {
        const double p = i == 0 ? 0.7 : 0.3;
        const auto it = k.entries.find(to_bitstring(two[static_cast<std::size_t>(i)], b.n_spatial));
        const double got = it == k.entries.end() ? 0.0 : static_cast<double>(it->second);
        const double z = (got - n * p) / std::sqrt(n * p * (1 - p));
        o.require(std::abs(z) <= 4.0, "binomial frequency within 4 sigma");
        o.note("p=" + fmt("%.1f", p) + " z=" + fmt("%+.2f", z));
    }

    // Bitflip survival on the LiH ground state, expectation by enumerating
    // every flip pattern on every configuration.
    const auto sys = load_system("lih_sto3g");
    const auto fci = dense_fci_oracle(sys.basis, sys.integrals);
    ConfigurationSet support;
    for (const auto& d : fci.determinants) support.insert(d, Provenance::Reference);
    constexpr double kFlip = 0.05;
    const int ns = sys.basis.n_spatial, m = 2 * ns;
    double expected = 0.0;
    const double norm = fci.state.coefficients.squaredNorm();
    for (std::size_t i = 0; i < fci.determinants.size(); ++i) {
        const u64 word = oracle::to_word(fci.determinants[i], ns);
        double survive = 0.0;
        for (u64 flips = 0; flips < (u64{1} << m); ++flips) {
            const int nf = std::popcount(flips);
            const u64 out = word ^ flips;
            const u64 lo = out & ((u64{1} << ns) - 1), hi = out >> ns;
            if (std::popcount(lo) == sys.basis.n_alpha && std::popcount(hi) == sys.basis.n_beta)
                survive += std::pow(kFlip, nf) * std::pow(1 - kFlip, m - nf);
        }
        const double ci = fci.state.coefficients(static_cast<Eigen::Index>(i));
        expected += ci * ci / norm * survive;
    }
    const auto noisy = sample_from_state(fci.state.coefficients, support, ns, kShots, {kFlip, 92});
    std::uint64_t kept = 0;
    for (const auto& [bits, count] : noisy.entries) {
        int na = 0, nb = 0;
        for (int q = 0; q < m; ++q)
            if (bits[static_cast<std::size_t>(q)] == '1') (q < ns ? na : nb) += 1;
        if (na == sys.basis.n_alpha && nb == sys.basis.n_beta) kept += count;
    }
    const double frac = static_cast<double>(kept) / n;
    const double z = (frac - expected) / std::sqrt(expected * (1 - expected) / n);
    o.require(std::abs(z) <= 4.0, "surviving fraction within 4 sigma");
    o.note("LiH p=0.05 surviving " + fmt("%.5f", frac) + " vs " + fmt("%.5f", expected) + " (z=" + fmt("%+.2f", z) +
           ")");
    return o;
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle convergence", criterion_1},      {"MP2 validation", criterion_2},
        {"symbolic-screen recall", criterion_3},  {"RBM exactness", criterion_4},
        {"RBM vs random search", criterion_5},    {"dimension reduction", criterion_6},
        {"loop invariants", criterion_7},         {"cost instrumentation", criterion_8},
        {"sampler statistics", criterion_9}};
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::cerr << "usage: " << argv[0] << " [criterion 1-9 ...]\n";
            return 2;
        }
        selected.push_back(k);
    }
    if (selected.empty())
        for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);

    int failures = 0;
    for (int k : selected) {
        const auto& [name, check] = criteria[static_cast<std::size_t>(k - 1)];
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += o.pass ? 0 : 1;
        std::cout << "criterion " << k << " (" << name << "): " << (o.pass ? "PASS" : "FAIL") << " -- " << o.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
