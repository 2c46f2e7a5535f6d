// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file rbm.hpp
 * @brief Restricted Boltzmann machine over spin-orbital occupation vectors.
 *
 * Energy E(g, h) = -g^T W h - y^T h - u^T g with visible g in {0,1}^D and
 * hidden h in {0,1}^J. Visible unit i is blocked spin orbital i.
 */

#pragma once

#include "pigen/error.hpp"
#include "pigen/fermion.hpp"
#include "pigen/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace pigen {

using Visible = Eigen::VectorXd;

struct RbmModel {
    Eigen::MatrixXd weights;       ///< D x J
    Eigen::VectorXd visible_bias;  ///< u, length D
    Eigen::VectorXd hidden_bias;   ///< y, length J
    std::uint64_t rng_seed = 0;

    [[nodiscard]] int d_visible() const noexcept { return static_cast<int>(weights.rows()); }
    [[nodiscard]] int d_hidden() const noexcept { return static_cast<int>(weights.cols()); }
    [[nodiscard]] bool finite() const {
        return weights.allFinite() && visible_bias.allFinite() && hidden_bias.allFinite();
    }

    /// W ~ U(-0.01, 0.01) from `seed`, zero biases.
    [[nodiscard]] static RbmModel initialize(int d_visible, int d_hidden, std::uint64_t seed) {
        if (d_visible <= 0 || d_hidden <= 0) throw ConfigError("RBM layer sizes must be positive");
        RbmModel m;
        m.rng_seed = seed;
        Rng rng(seed);
        m.weights.resize(d_visible, d_hidden);
        for (Eigen::Index i = 0; i < m.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < m.weights.cols(); ++j) m.weights(i, j) = -0.01 + 0.02 * uniform01(rng);
        m.visible_bias = Eigen::VectorXd::Zero(d_visible);
        m.hidden_bias = Eigen::VectorXd::Zero(d_hidden);
        return m;
    }

    [[nodiscard]] static RbmModel zeros(int d_visible, int d_hidden) {
        RbmModel m;
        m.weights = Eigen::MatrixXd::Zero(d_visible, d_hidden);
        m.visible_bias = Eigen::VectorXd::Zero(d_visible);
        m.hidden_bias = Eigen::VectorXd::Zero(d_hidden);
        return m;
    }
};

// ---------------------------------------------------------------------------
// Energy and conditionals
// ---------------------------------------------------------------------------

[[nodiscard]] inline double sigmoid(double x) noexcept {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

[[nodiscard]] inline double rbm_energy(const Visible& g, const Eigen::VectorXd& h, const RbmModel& m) {
    if (g.size() != m.d_visible() || h.size() != m.d_hidden())
        throw ConfigError("rbm_energy: layer length mismatch");
    return -g.dot(m.weights * h) - m.hidden_bias.dot(h) - m.visible_bias.dot(g);
}

/// p(h_j = 1 | g) = sigma(sum_i g_i W_ij + y_j).
[[nodiscard]] inline Eigen::VectorXd hidden_conditional(const Visible& g, const RbmModel& m) {
    if (g.size() != m.d_visible()) throw ConfigError("hidden_conditional: visible length mismatch");
    return (m.weights.transpose() * g + m.hidden_bias).unaryExpr([](double x) { return sigmoid(x); });
}

/// p(g_i = 1 | h) = sigma(sum_j W_ij h_j + u_i).
[[nodiscard]] inline Visible visible_conditional(const Eigen::VectorXd& h, const RbmModel& m) {
    if (h.size() != m.d_hidden()) throw ConfigError("visible_conditional: hidden length mismatch");
    return (m.weights * h + m.visible_bias).unaryExpr([](double x) { return sigmoid(x); });
}

/// Bernoulli draw per component.
[[nodiscard]] inline Eigen::VectorXd bernoulli(const Eigen::VectorXd& p, Rng& rng) {
    Eigen::VectorXd s(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) s(i) = uniform01(rng) < p(i) ? 1.0 : 0.0;
    return s;
}

// ---------------------------------------------------------------------------
// Determinant <-> visible layer
// ---------------------------------------------------------------------------

[[nodiscard]] inline Visible to_visible(const Determinant& d, int n_spatial) {
    Visible v = Visible::Zero(2 * n_spatial);
    for (int p = 0; p < n_spatial; ++p) {
        v(p) = static_cast<double>((d.alpha >> p) & 1u);
        v(n_spatial + p) = static_cast<double>((d.beta >> p) & 1u);
    }
    return v;
}

[[nodiscard]] inline Determinant from_visible(const Visible& v, int n_spatial) {
    if (v.size() != 2 * n_spatial) throw ConfigError("from_visible: length mismatch");
    Determinant d;
    for (int p = 0; p < n_spatial; ++p) {
        if (v(p) > 0.5) d.alpha |= u64{1} << p;
        if (v(n_spatial + p) > 0.5) d.beta |= u64{1} << p;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Training distribution
// ---------------------------------------------------------------------------

struct TrainingDistribution {
    std::vector<Determinant> samples;          ///< multiset, probability proportional to |c|
    std::vector<Determinant> dominant;         ///< distinct |c| > eps_coeff, reference excluded
    std::vector<Determinant> below_threshold;  ///< |c| <= eps_coeff, reference excluded
};

/// Draw `target_size` samples with probability proportional to |c| from the
/// configurations with |c| > eps_coeff, excluding the reference.
///
/// Throws NumericalError when nothing but (at most) the reference survives.
[[nodiscard]] inline TrainingDistribution build_training_distribution(const Eigen::VectorXd& coefficients,
                                                                      const ConfigurationSet& configs,
                                                                      double eps_coeff, std::size_t target_size,
                                                                      const Determinant& reference, Rng& rng) {
    if (static_cast<std::size_t>(coefficients.size()) != configs.size())
        throw ConfigError("build_training_distribution: CI vector and configuration set differ in length");
    TrainingDistribution out;
    std::vector<double> cumulative;
    double total = 0.0;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        if (configs[k] == reference) continue;
        const double c = std::abs(coefficients(static_cast<Eigen::Index>(k)));
        if (c > eps_coeff) {
            out.dominant.push_back(configs[k]);
            total += c;
            cumulative.push_back(total);
        } else {
            out.below_threshold.push_back(configs[k]);
        }
    }
    if (out.dominant.empty())
        throw NumericalError("training distribution is empty: no non-reference configuration exceeds eps_coeff");
    out.samples.reserve(target_size);
    for (std::size_t s = 0; s < target_size; ++s) {
        const double x = uniform01(rng) * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
        if (it == cumulative.end()) --it;
        out.samples.push_back(out.dominant[static_cast<std::size_t>(it - cumulative.begin())]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Contrastive divergence
// ---------------------------------------------------------------------------

struct CdOptions {
    int epochs = 3;
    int k_gibbs = 20;
    double learning_rate = 0.001;
    std::size_t batch_size = 10;
};

struct CdGradient {
    Eigen::MatrixXd weights;
    Eigen::VectorXd visible_bias;
    Eigen::VectorXd hidden_bias;
};

struct CdStats {
    std::uint64_t updates = 0;       ///< parameter updates applied
    std::uint64_t weight_ops = 0;    ///< multiply-adds against W
};

/// CD-k estimate averaged over `batch`:
///   dW = <g p(h|g)^T>_data - <g' p(h|g')^T>_chain,
/// where g' is reached from each data vector by k alternating sampled sweeps.
[[nodiscard]] inline CdGradient cd_gradient(const RbmModel& m, std::span<const Visible> batch, int k, Rng& rng,
                                            CdStats* stats = nullptr) {
    const Eigen::Index D = m.d_visible(), J = m.d_hidden();
    CdGradient grad{Eigen::MatrixXd::Zero(D, J), Eigen::VectorXd::Zero(D), Eigen::VectorXd::Zero(J)};
    if (batch.empty()) return grad;
    std::uint64_t ops = 0;
    for (const auto& g0 : batch) {
        const Eigen::VectorXd ph0 = hidden_conditional(g0, m);
        Eigen::VectorXd h = bernoulli(ph0, rng);
        Visible g = g0;
        Eigen::VectorXd ph = ph0;
        for (int step = 0; step < k; ++step) {
            g = bernoulli(visible_conditional(h, m), rng);
            ph = hidden_conditional(g, m);
            if (step + 1 < k) h = bernoulli(ph, rng);
        }
        ops += static_cast<std::uint64_t>(2 * k + 1) * static_cast<std::uint64_t>(D * J);
        grad.weights += g0 * ph0.transpose() - g * ph.transpose();
        grad.visible_bias += g0 - g;
        grad.hidden_bias += ph0 - ph;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    grad.weights *= inv;
    grad.visible_bias *= inv;
    grad.hidden_bias *= inv;
    if (stats) stats->weight_ops += ops + static_cast<std::uint64_t>(batch.size() * D * J);
    return grad;
}

/// Mini-batch CD-k training. Each epoch visits the data in a freshly
/// shuffled order; every batch yields one parameter update.
inline CdStats cd_train(RbmModel& m, std::span<const Visible> data, const CdOptions& opt, Rng& rng) {
    if (data.empty()) throw NumericalError("cd_train: empty training data");
    if (opt.epochs < 0 || opt.k_gibbs < 1 || opt.batch_size == 0)
        throw ConfigError("cd_train: epochs >= 0, k_gibbs >= 1 and batch_size >= 1 are required");
    for (const auto& g : data)
        if (g.size() != m.d_visible()) throw ConfigError("cd_train: training vector length mismatch");
    CdStats stats;
    std::vector<std::size_t> order(data.size());
    std::vector<Visible> batch;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
            std::swap(order[i - 1], order[std::min(j, i - 1)]);
        }
        for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
            batch.clear();
            for (std::size_t q = start; q < std::min(order.size(), start + opt.batch_size); ++q)
                batch.push_back(data[order[q]]);
            const auto grad = cd_gradient(m, batch, opt.k_gibbs, rng, &stats);
            if (opt.learning_rate != 0.0) {
                m.weights += opt.learning_rate * grad.weights;
                m.visible_bias += opt.learning_rate * grad.visible_bias;
                m.hidden_bias += opt.learning_rate * grad.hidden_bias;
            }
            ++stats.updates;
        }
    }
    if (!m.finite()) throw NumericalError("cd_train: non-finite RBM parameters");
    return stats;
}

inline CdStats cd_train(RbmModel& m, const std::vector<Determinant>& data, int n_spatial, const CdOptions& opt,
                        Rng& rng) {
    std::vector<Visible> v;
    v.reserve(data.size());
    for (const auto& d : data) v.push_back(to_visible(d, n_spatial));
    return cd_train(m, v, opt, rng);
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// `steps` alternating sampled sweeps (h | g, then g | h) from each seed.
[[nodiscard]] inline std::vector<Visible> gibbs_generate(const RbmModel& m, std::span<const Visible> seeds, int steps,
                                                         Rng& rng) {
    std::vector<Visible> out(seeds.begin(), seeds.end());
    for (auto& g : out) {
        if (g.size() != m.d_visible()) throw ConfigError("gibbs_generate: seed length mismatch");
        for (int s = 0; s < steps; ++s) {
            const Eigen::VectorXd h = bernoulli(hidden_conditional(g, m), rng);
            g = bernoulli(visible_conditional(h, m), rng);
        }
    }
    return out;
}

struct GenerationOptions {
    int gibbs_steps = 1;
    int retry_rounds = 10;
};

struct GenerationResult {
    ConfigurationSet configurations;  ///< distinct, in-sector, provenance Generated
    std::size_t attempts = 0;         ///< Gibbs chains run
    std::size_t accepted = 0;         ///< in-sector outputs (before deduplication)
    std::size_t shortfall = 0;        ///< slots still rejected after the last round
};

/// Gibbs chains from uniform symmetry-space seeds; out-of-sector outputs are
/// rejected and their slots re-seeded for up to `retry_rounds` extra rounds.
[[nodiscard]] inline GenerationResult symmetry_constrained_generate(const RbmModel& m, const OrbitalBasis& basis,
                                                                    std::size_t n_gen, Rng& rng,
                                                                    const GenerationOptions& opt = {}) {
    basis.validate();
    if (m.d_visible() != basis.n_spin_orbitals())
        throw ConfigError("symmetry_constrained_generate: RBM visible size differs from 2 * n_spatial");
    GenerationResult res;
    std::size_t open = n_gen;
    std::vector<Visible> seeds;
    for (int round = 0; round <= std::max(0, opt.retry_rounds) && open > 0; ++round) {
        seeds.clear();
        for (std::size_t k = 0; k < open; ++k)
            seeds.push_back(to_visible(random_sector_determinant(basis, rng), basis.n_spatial));
        const auto outs = gibbs_generate(m, seeds, opt.gibbs_steps, rng);
        res.attempts += outs.size();
        std::size_t rejected = 0;
        for (const auto& g : outs) {
            const Determinant d = from_visible(g, basis.n_spatial);
            if (d.n_alpha() == basis.n_alpha && d.n_beta() == basis.n_beta) {
                ++res.accepted;
                res.configurations.insert(d, Provenance::Generated);
            } else {
                ++rejected;
            }
        }
        open = rejected;
    }
    res.shortfall = open;
    return res;
}

// ---------------------------------------------------------------------------
// Checkpoint
// ---------------------------------------------------------------------------

/// Text layout:
///   pigen-rbm 1
///   D J seed
///   D lines of J weights (row i = visible unit i)
///   one line of D visible biases
///   one line of J hidden biases
inline void save_checkpoint(std::ostream& os, const RbmModel& m) {
    os.precision(17);
    os << "pigen-rbm 1\n" << m.d_visible() << ' ' << m.d_hidden() << ' ' << m.rng_seed << '\n';
    for (Eigen::Index i = 0; i < m.weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.weights.cols(); ++j) os << (j ? " " : "") << m.weights(i, j);
        os << '\n';
    }
    for (Eigen::Index i = 0; i < m.visible_bias.size(); ++i) os << (i ? " " : "") << m.visible_bias(i);
    os << '\n';
    for (Eigen::Index j = 0; j < m.hidden_bias.size(); ++j) os << (j ? " " : "") << m.hidden_bias(j);
    os << '\n';
}

[[nodiscard]] inline RbmModel load_checkpoint(std::istream& in) {
    std::string magic;
    int version = 0;
    int D = 0, J = 0;
    std::uint64_t seed = 0;
    if (!(in >> magic >> version) || magic != "pigen-rbm" || version != 1)
        throw FormatError("RBM checkpoint: bad header");
    if (!(in >> D >> J >> seed) || D <= 0 || J <= 0) throw FormatError("RBM checkpoint: bad dimensions");
    RbmModel m = RbmModel::zeros(D, J);
    m.rng_seed = seed;
    auto read = [&](double& x) {
        if (!(in >> x)) throw FormatError("RBM checkpoint: truncated parameter block");
    };
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < J; ++j) read(m.weights(i, j));
    for (int i = 0; i < D; ++i) read(m.visible_bias(i));
    for (int j = 0; j < J; ++j) read(m.hidden_bias(j));
    if (!m.finite()) throw FormatError("RBM checkpoint: non-finite parameters");
    return m;
}

} // namespace pigen
