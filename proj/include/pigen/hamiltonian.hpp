// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file hamiltonian.hpp
 * @brief Projected Hamiltonian over a determinant subspace and its ground state.
 *
 * Determinant phase convention: |D> = prod_{alpha p ascending} a^+_p
 * prod_{beta p ascending} a^+_{p+n} |vac>, i.e. creation operators in
 * ascending blocked spin-orbital order.
 */

#pragma once

#include "pigen/detail/parallel.hpp"
#include "pigen/error.hpp"
#include "pigen/fermion.hpp"
#include "pigen/integrals.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

namespace pigen {

// ---------------------------------------------------------------------------
// Slater-Condon rules
// ---------------------------------------------------------------------------

namespace detail {

/// (-1)^(number of occupied orbitals strictly between p and q).
[[nodiscard]] inline double between_sign(u64 mask, int p, int q) noexcept {
    const int lo = std::min(p, q), hi = std::max(p, q);
    const u64 between = low_bits(hi) & ~low_bits(lo + 1);
    return (std::popcount(mask & between) & 1) ? -1.0 : 1.0;
}

[[nodiscard]] inline double diagonal_energy(const Determinant& d, const IntegralSet& s) {
    const auto a = set_bits(d.alpha);
    const auto b = set_bits(d.beta);
    double e = 0.0;
    for (int i : a) e += s.h(i, i);
    for (int i : b) e += s.h(i, i);
    auto same_spin = [&](const std::vector<int>& occ) {
        double x = 0.0;
        for (std::size_t u = 0; u < occ.size(); ++u)
            for (std::size_t v = u + 1; v < occ.size(); ++v) {
                const int i = occ[u], j = occ[v];
                x += s.chem(i, i, j, j) - s.chem(i, j, j, i);
            }
        return x;
    };
    e += same_spin(a) + same_spin(b);
    for (int i : a)
        for (int j : b) e += s.chem(i, i, j, j);
    return e;
}

/// Single excitation i -> p within spin channel `same` of ket `d`.
[[nodiscard]] inline double single_element(u64 same, u64 other, int i, int p, const IntegralSet& s) {
    double v = s.h(i, p);
    for (u64 m = same & ~(u64{1} << i); m; m &= m - 1) {
        const int j = std::countr_zero(m);
        v += s.chem(i, p, j, j) - s.chem(i, j, j, p);
    }
    for (u64 m = other; m; m &= m - 1) {
        const int j = std::countr_zero(m);
        v += s.chem(i, p, j, j);
    }
    return between_sign(same, i, p) * v;
}

/// Same-spin double i<j -> p<q applied to ket mask `m` as (i->p)(j->q).
[[nodiscard]] inline double same_spin_double(u64 m, int i, int j, int p, int q, const IntegralSet& s) {
    const double s1 = between_sign(m, i, p);
    const u64 m1 = m ^ (u64{1} << i) ^ (u64{1} << p);
    const double s2 = between_sign(m1, j, q);
    return s1 * s2 * (s.chem(i, p, j, q) - s.chem(i, q, j, p));
}

} // namespace detail

/// <bra|H|ket> without the core energy. Zero for excitation rank > 2.
[[nodiscard]] inline double slater_condon_element(const Determinant& bra, const Determinant& ket,
                                                  const IntegralSet& s) {
    if (bra.n_alpha() != ket.n_alpha() || bra.n_beta() != ket.n_beta())
        throw ConfigError("slater_condon_element: determinants in different particle sectors");
    const u64 xa = bra.alpha ^ ket.alpha, xb = bra.beta ^ ket.beta;
    const int na = std::popcount(xa) / 2, nb = std::popcount(xb) / 2;
    if (na + nb > 2) return 0.0;
    if (na + nb == 0) return detail::diagonal_energy(ket, s);

    const u64 ha = xa & ket.alpha, pa = xa & bra.alpha;  // holes/particles relative to ket
    const u64 hb = xb & ket.beta, pb = xb & bra.beta;
    if (na == 1 && nb == 0)
        return detail::single_element(ket.alpha, ket.beta, std::countr_zero(ha), std::countr_zero(pa), s);
    if (na == 0 && nb == 1)
        return detail::single_element(ket.beta, ket.alpha, std::countr_zero(hb), std::countr_zero(pb), s);
    if (na == 2 || nb == 2) {
        const u64 m = na == 2 ? ket.alpha : ket.beta;
        const u64 h = na == 2 ? ha : hb, p = na == 2 ? pa : pb;
        const int i = std::countr_zero(h), j = 63 - std::countl_zero(h);
        const int a = std::countr_zero(p), b = 63 - std::countl_zero(p);
        return detail::same_spin_double(m, i, j, a, b, s);
    }
    const int i = std::countr_zero(ha), a = std::countr_zero(pa);
    const int j = std::countr_zero(hb), b = std::countr_zero(pb);
    return detail::between_sign(ket.alpha, i, a) * detail::between_sign(ket.beta, j, b) * s.chem(i, a, j, b);
}

// ---------------------------------------------------------------------------
// Sparse projected Hamiltonian
// ---------------------------------------------------------------------------

struct SparseSubspaceHamiltonian {
    using Entry = std::pair<std::uint32_t, double>;

    std::size_t dimension = 0;
    std::vector<std::vector<Entry>> rows;  ///< off-diagonal entries, columns ascending
    Eigen::VectorXd diagonal;              ///< includes e_core
    std::vector<Determinant> basis_order;

    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        Eigen::VectorXd y = diagonal.cwiseProduct(x);
        detail::parallel_for(dimension, [&](std::size_t i) {
            double acc = 0.0;
            for (const auto& [j, v] : rows[i]) acc += v * x(j);
            y(static_cast<Eigen::Index>(i)) += acc;
        }, 4096);
        return y;
    }

    [[nodiscard]] std::size_t nonzeros() const {
        std::size_t n = dimension;
        for (const auto& r : rows) n += r.size();
        return n;
    }

    [[nodiscard]] Eigen::MatrixXd to_dense() const {
        const auto n = static_cast<Eigen::Index>(dimension);
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            m(i, i) = diagonal(i);
            for (const auto& [j, v] : rows[static_cast<std::size_t>(i)]) m(i, j) = v;
        }
        return m;
    }

    /// Coordinate dump, one "i j value" line per stored entry (0-based).
    void write_coordinates(std::ostream& os) const {
        os.precision(17);
        for (std::size_t i = 0; i < dimension; ++i) {
            std::vector<Entry> row = rows[i];
            row.emplace_back(static_cast<std::uint32_t>(i), diagonal(static_cast<Eigen::Index>(i)));
            std::sort(row.begin(), row.end());
            for (const auto& [j, v] : row) os << i << ' ' << j << ' ' << v << '\n';
        }
    }
};

/// Builds the symmetric projected Hamiltonian (with e_core on the diagonal).
/// Pairs are prefiltered by XOR popcount before any integral is touched.
[[nodiscard]] inline SparseSubspaceHamiltonian project_hamiltonian(std::span<const Determinant> dets,
                                                                   const IntegralSet& s) {
    if (dets.empty()) throw ConfigError("project_hamiltonian: empty configuration set");
    const Determinant& first = dets.front();
    for (const auto& d : dets)
        if (d.n_alpha() != first.n_alpha() || d.n_beta() != first.n_beta())
            throw ConfigError("project_hamiltonian: configurations span several particle sectors");

    SparseSubspaceHamiltonian H;
    H.dimension = dets.size();
    H.basis_order.assign(dets.begin(), dets.end());
    H.diagonal.resize(static_cast<Eigen::Index>(dets.size()));
    std::vector<std::vector<SparseSubspaceHamiltonian::Entry>> upper(dets.size());
    detail::parallel_for(dets.size(), [&](std::size_t i) {
        H.diagonal(static_cast<Eigen::Index>(i)) = detail::diagonal_energy(dets[i], s) + s.e_core;
        for (std::size_t j = i + 1; j < dets.size(); ++j) {
            if (std::popcount(dets[i].alpha ^ dets[j].alpha) + std::popcount(dets[i].beta ^ dets[j].beta) > 4)
                continue;
            const double v = slater_condon_element(dets[i], dets[j], s);
            if (v != 0.0) upper[i].emplace_back(static_cast<std::uint32_t>(j), v);
        }
    });
    H.rows.resize(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i)
        for (const auto& [j, v] : upper[i]) {
            H.rows[i].emplace_back(j, v);
            H.rows[j].emplace_back(static_cast<std::uint32_t>(i), v);
        }
    for (auto& r : H.rows) std::sort(r.begin(), r.end());
    return H;
}

[[nodiscard]] inline SparseSubspaceHamiltonian project_hamiltonian(const ConfigurationSet& c, const IntegralSet& s) {
    return project_hamiltonian(std::span<const Determinant>(c.members()), s);
}

// ---------------------------------------------------------------------------
// Davidson
// ---------------------------------------------------------------------------

struct CIVector {
    Eigen::VectorXd coefficients;
    double energy = 0.0;
};

struct DavidsonOptions {
    double residual_tolerance = 1e-8;
    int max_iterations = 200;
    int max_subspace = 48;
};

struct DavidsonResult {
    CIVector state;
    int iterations = 0;
    int expansions = 0;           ///< correction vectors appended
    double residual = 0.0;
    double ritz_gap = std::numeric_limits<double>::quiet_NaN();  ///< lambda_1 - lambda_0 of the last projection
};

namespace detail {

/// Flip the global sign so that the largest-magnitude coefficient is positive.
inline void fix_phase(Eigen::VectorXd& v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    if (v(k) < 0) v = -v;
}

} // namespace detail

/// Lowest eigenpair by Davidson-Liu with a diagonal (Jacobi) preconditioner.
///
/// Starts from `guess` when it matches the dimension and is non-zero, else
/// from the unit vector on the lowest diagonal entry.
[[nodiscard]] inline DavidsonResult davidson_ground_state(const SparseSubspaceHamiltonian& h,
                                                          const std::optional<Eigen::VectorXd>& guess = std::nullopt,
                                                          const DavidsonOptions& opt = {}) {
    const auto n = static_cast<Eigen::Index>(h.dimension);
    if (n == 0) throw ConfigError("davidson_ground_state: empty matrix");
    DavidsonResult res;
    if (n == 1) {
        res.state.coefficients = Eigen::VectorXd::Ones(1);
        res.state.energy = h.diagonal(0);
        return res;
    }

    Eigen::VectorXd x0;
    if (guess && guess->size() == n && guess->norm() > 1e-12) {
        x0 = guess->normalized();
    } else {
        Eigen::Index k = 0;
        h.diagonal.minCoeff(&k);
        x0 = Eigen::VectorXd::Unit(n, k);
    }

    const Eigen::Index cap = std::min<Eigen::Index>(opt.max_subspace, n);
    Eigen::MatrixXd V(n, cap), AV(n, cap);
    Eigen::Index k = 1;
    V.col(0) = x0;
    AV.col(0) = h.apply(x0);

    auto orthonormalize = [&](Eigen::VectorXd& t, Eigen::Index upto) {
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index c = 0; c < upto; ++c) t -= V.col(c).dot(t) * V.col(c);
        return t.norm();
    };

    for (int iter = 0; iter <= opt.max_iterations; ++iter) {
        Eigen::MatrixXd G = V.leftCols(k).transpose() * AV.leftCols(k);
        G = 0.5 * (G + G.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
        const double theta = es.eigenvalues()(0);
        const Eigen::VectorXd y = es.eigenvectors().col(0);
        Eigen::VectorXd x = V.leftCols(k) * y;
        const Eigen::VectorXd Ax = AV.leftCols(k) * y;
        const Eigen::VectorXd r = Ax - theta * x;
        res.residual = r.norm();
        res.iterations = iter;
        if (k > 1) res.ritz_gap = es.eigenvalues()(1) - theta;
        if (res.residual <= opt.residual_tolerance || k == n) {
            x.normalize();
            detail::fix_phase(x);
            res.state = {x, theta};
            return res;
        }
        if (iter == opt.max_iterations) break;

        Eigen::VectorXd t(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double denom = theta - h.diagonal(i);
            if (std::abs(denom) < 1e-8) denom = denom < 0 ? -1e-8 : 1e-8;
            t(i) = r(i) / denom;
        }
        if (k == cap) {
            // collapse onto the current Ritz vector
            const Eigen::VectorXd xn = x.normalized();
            V.col(0) = xn;
            AV.col(0) = Ax / x.norm();
            k = 1;
        }
        double norm = orthonormalize(t, k);
        if (norm < 1e-10) {
            t = r;
            norm = orthonormalize(t, k);
        }
        if (norm < 1e-14) break;
        V.col(k) = t / norm;
        AV.col(k) = h.apply(V.col(k));
        ++k;
        ++res.expansions;
    }
    throw ConvergenceError("Davidson did not converge within " + std::to_string(opt.max_iterations) +
                               " iterations (residual " + std::to_string(res.residual) + ")",
                           res.residual);
}

// ---------------------------------------------------------------------------
// Full-space oracle
// ---------------------------------------------------------------------------

struct FciSolution {
    double energy = 0.0;
    CIVector state;
    std::vector<Determinant> determinants;  ///< lexicographic sector order
};

/// Exact ground state over the whole symmetry space. Dense diagonalization
/// up to `dense_limit` determinants, Davidson on the full space above it.
[[nodiscard]] inline FciSolution dense_fci_oracle(const OrbitalBasis& basis, const IntegralSet& s,
                                                  u64 cap = 20000, std::size_t dense_limit = 4000) {
    FciSolution out;
    out.determinants = enumerate_symmetry_space(basis, cap);
    const auto H = project_hamiltonian(std::span<const Determinant>(out.determinants), s);
    if (out.determinants.size() <= dense_limit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.to_dense());
        Eigen::VectorXd v = es.eigenvectors().col(0);
        detail::fix_phase(v);
        out.state = {v, es.eigenvalues()(0)};
    } else {
        DavidsonOptions opt;
        opt.residual_tolerance = 1e-10;
        opt.max_iterations = 1000;
        out.state = davidson_ground_state(H, std::nullopt, opt).state;
    }
    out.energy = out.state.energy;
    return out;
}

/// Total energy of a single determinant, core energy included.
[[nodiscard]] inline double determinant_energy(const Determinant& d, const IntegralSet& s) {
    return detail::diagonal_energy(d, s) + s.e_core;
}

} // namespace pigen
