// Copyright 2026 The qds-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qds/channel_model.hpp"
#include "qds/coherent_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qds {

/// Relative threshold below which Gram eigenvalues are treated as zero when
/// forming Phi^{-1/2}.
inline constexpr double kPseudoInverseThreshold = 1e-12;

/// A measurement with one outcome per phase, in the standard basis.
struct Povm {
    std::vector<CMatrix> elements;

    int n_outcomes() const { return static_cast<int>(elements.size()); }
};

/// Diagonal of Phi^{-1/2} with eigenvalues under the relative threshold dropped.
inline RVector inverse_sqrt_spectrum(const SpectralDecomposition &spec) {
    const double cut = kPseudoInverseThreshold * spec.eigenvalues.maxCoeff();
    RVector d(spec.size());
    for (int k = 0; k < spec.size(); ++k) {
        const double l = spec.eigenvalues(k);
        d(k) = l > cut ? 1.0 / std::sqrt(l) : 0.0;
    }
    return d;
}

/// Projector onto the support of Phi = sum_i |v_i><v_i| = diag(lambda).
inline CMatrix support_projector(const SpectralDecomposition &spec) {
    const RVector d = inverse_sqrt_spectrum(spec);
    CMatrix p = CMatrix::Zero(spec.size(), spec.size());
    for (int k = 0; k < spec.size(); ++k) {
        if (d(k) > 0.0) p(k, k) = 1.0;
    }
    return p;
}

/// Pi_i = Phi^{-1/2} |v_i><v_i| Phi^{-1/2}.
inline Povm square_root_povm(const SpectralDecomposition &spec) {
    const RVector d = inverse_sqrt_spectrum(spec);
    Povm povm;
    povm.elements.reserve(static_cast<std::size_t>(spec.size()));
    for (int i = 0; i < spec.size(); ++i) {
        const CVector w = d.cwiseProduct(state_coordinates(i, spec)).eval();
        povm.elements.push_back(w * w.adjoint());
    }
    return povm;
}

namespace detail {
inline void require_dims(const Povm &povm, const CostMatrix &cost, const SpectralDecomposition &spec,
                         const char *what) {
    if (povm.n_outcomes() != cost.size() || cost.size() != spec.size()) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
    }
    for (const auto &e : povm.elements) {
        if (e.rows() != spec.size() || e.cols() != spec.size()) {
            throw std::invalid_argument(std::string(what) + ": POVM element has wrong dimension");
        }
    }
}

/// Largest singular value, from the Hermitian eigensolve of M^dagger M.
inline double spectral_norm(const CMatrix &m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}
}  // namespace detail

/// W_i = (1/N) sum_j C_{i,j} |v_j><v_j|.
inline std::vector<CMatrix> risk_operators(const CostMatrix &cost, const SpectralDecomposition &spec) {
    const int n = spec.size();
    if (cost.size() != n) {
        throw std::invalid_argument("risk_operators: dimension mismatch");
    }
    std::vector<CMatrix> projectors;
    projectors.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const CVector v = state_coordinates(j, spec);
        projectors.push_back(v * v.adjoint());
    }
    std::vector<CMatrix> w(static_cast<std::size_t>(n), CMatrix::Zero(n, n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            w[static_cast<std::size_t>(i)] += (cost(i, j) / n) * projectors[static_cast<std::size_t>(j)];
        }
    }
    return w;
}

/// Tr(Pi_phi |v_theta><v_theta|) for every outcome phi.
inline RVector outcome_distribution(const Povm &povm, int theta_index, const SpectralDecomposition &spec) {
    spec.alphabet.check_index(theta_index);
    if (povm.n_outcomes() != spec.size()) {
        throw std::invalid_argument("outcome_distribution: dimension mismatch");
    }
    const CVector v = state_coordinates(theta_index, spec);
    RVector p(povm.n_outcomes());
    for (int phi = 0; phi < povm.n_outcomes(); ++phi) {
        p(phi) = std::max(0.0, (v.adjoint() * povm.elements[static_cast<std::size_t>(phi)] * v)(0, 0).real());
    }
    return p;
}

/// (1/N) sum_{phi,theta} Tr(Pi_phi rho^theta) c_{phi,theta}.
inline double expected_cost(const Povm &povm, const CostMatrix &cost, const SpectralDecomposition &spec) {
    detail::require_dims(povm, cost, spec, "expected_cost");
    const int n = spec.size();
    double total = 0.0;
    for (int theta = 0; theta < n; ++theta) {
        const RVector p = outcome_distribution(povm, theta, spec);
        for (int phi = 0; phi < n; ++phi) {
            total += p(phi) * cost(phi, theta);
        }
    }
    return total / n;
}

struct HelstromReport {
    double criterion1_residual = 0.0;  // || sum Pi W - sum W Pi ||
    double criterion2_residual = 0.0;  // || Gamma - Gamma^dagger ||
    double criterion3_residual = 0.0;  // max_i || Pi_i (W_i - Gamma) ||, both orders
    double criterion4_min_eigenvalue = 0.0;
    double tolerance = 0.0;
    bool satisfied = false;
};

/// Checks the four optimality conditions of a minimum-cost measurement,
/// with Gamma = sum_i Pi_i W_i.
inline HelstromReport helstrom_verify(const Povm &povm, const CostMatrix &cost, const SpectralDecomposition &spec,
                                      double tol) {
    detail::require_dims(povm, cost, spec, "helstrom_verify");
    const int n = spec.size();
    const auto w = risk_operators(cost, spec);

    CMatrix gamma = CMatrix::Zero(n, n);
    CMatrix gamma_right = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        gamma += povm.elements[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
        gamma_right += w[static_cast<std::size_t>(i)] * povm.elements[static_cast<std::size_t>(i)];
    }

    HelstromReport r;
    r.tolerance = tol;
    r.criterion1_residual = detail::spectral_norm(gamma - gamma_right);
    r.criterion2_residual = detail::spectral_norm(gamma - gamma.adjoint());
    r.criterion4_min_eigenvalue = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const CMatrix diff = w[static_cast<std::size_t>(i)] - gamma;
        const CMatrix &pi = povm.elements[static_cast<std::size_t>(i)];
        r.criterion3_residual =
            std::max({r.criterion3_residual, detail::spectral_norm(pi * diff), detail::spectral_norm(diff * pi)});
        Eigen::SelfAdjointEigenSolver<CMatrix> es((diff + diff.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
        r.criterion4_min_eigenvalue = std::min(r.criterion4_min_eigenvalue, es.eigenvalues().minCoeff());
    }
    r.satisfied = r.criterion1_residual < tol && r.criterion2_residual < tol && r.criterion3_residual < tol &&
                  r.criterion4_min_eigenvalue > -tol;
    return r;
}

/// Certified lower bound on the minimum expected cost over all measurements,
/// by weak duality. With Gamma_h the Hermitian part of sum_i Pi_i W_i and m the
/// smallest eigenvalue of any W_i - Gamma_h, Y = Gamma_h + min(m, 0) I obeys
/// Y <= W_i for every i, so sum_i Tr(Q_i W_i) >= Tr(Y) for every POVM Q.
/// Equals the expected cost of `povm` when the Helstrom conditions hold.
inline double dual_lower_bound(const Povm &povm, const CostMatrix &cost, const SpectralDecomposition &spec) {
    detail::require_dims(povm, cost, spec, "dual_lower_bound");
    const int n = spec.size();
    const auto w = risk_operators(cost, spec);
    CMatrix gamma = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) gamma += povm.elements[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
    const CMatrix gamma_h = (gamma + gamma.adjoint()) / 2.0;
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
        const CMatrix diff = w[static_cast<std::size_t>(i)] - gamma_h;
        Eigen::SelfAdjointEigenSolver<CMatrix> es((diff + diff.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
        m = std::min(m, es.eigenvalues().minCoeff());
    }
    return gamma_h.trace().real() + n * m;
}

/// Which entries feed the circulant-symmetric orbit extrema.
enum class OrbitScope {
    /// Every entry; lower <= cost <= upper holds element-wise.
    kFullMatrix,
    /// Only entries with row <= column. Matches the published bounding rows
    /// but is not an element-wise bound on the lower triangle.
    kUpperTriangle,
};

inline const char *to_string(OrbitScope s) {
    return s == OrbitScope::kFullMatrix ? "full-matrix" : "upper-triangle";
}

struct BoundingMatrices {
    CostMatrix lower;
    CostMatrix upper;
};

/// Closest circulant symmetric matrices from below and above. Entry (i, j)
/// belongs to orbit min(d, N - d) with d = (j - i) mod N; each orbit takes
/// the minimum (lower) or maximum (upper) of its member entries.
inline BoundingMatrices bounding_circulant_matrices(const CostMatrix &cost,
                                                    OrbitScope scope = OrbitScope::kFullMatrix) {
    const int n = cost.size();
    const int orbits = n / 2 + 1;
    std::vector<double> lo(static_cast<std::size_t>(orbits), std::numeric_limits<double>::infinity());
    std::vector<double> hi(static_cast<std::size_t>(orbits), -std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (scope == OrbitScope::kUpperTriangle && j < i) continue;
            const int d = ((j - i) % n + n) % n;
            const auto k = static_cast<std::size_t>(std::min(d, n - d));
            lo[k] = std::min(lo[k], cost(i, j));
            hi[k] = std::max(hi[k], cost(i, j));
        }
    }
    std::vector<double> lower_row(static_cast<std::size_t>(n));
    std::vector<double> upper_row(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
        const auto k = static_cast<std::size_t>(std::min(d, n - d));
        lower_row[static_cast<std::size_t>(d)] = lo[k];
        upper_row[static_cast<std::size_t>(d)] = hi[k];
    }
    return {CostMatrix::circulant(lower_row), CostMatrix::circulant(upper_row)};
}

struct ForgingAnalysis {
    PhaseAlphabet measured_alphabet;
    bool amplified = false;
    OrbitScope scope = OrbitScope::kUpperTriangle;

    /// Largest diagonal element of the input matrix (worst case).
    double p_original = 0.0;
    double p_original_mean = 0.0;

    CostMatrix cost_matrix_lower;
    CostMatrix cost_matrix_upper;
    double p_forgery_lower = 0.0;
    double p_forgery_upper = 0.0;
    HelstromReport helstrom_lower;
    HelstromReport helstrom_upper;

    /// Square-root measurement evaluated against the raw matrix: an upper
    /// bound on the true optimum for that matrix.
    double p_square_root_raw = 0.0;
    /// Dual certificate built from the same measurement: a lower bound on the
    /// true optimum for the raw matrix.
    double p_optimum_dual_lower = 0.0;

    double gap_lower() const { return p_forgery_lower - p_original; }
    double gap_upper() const { return p_forgery_upper - p_original; }
    /// Both bounding costs are certified minima.
    bool certified() const { return helstrom_lower.satisfied && helstrom_upper.satisfied; }
};

inline constexpr double kDefaultHelstromTolerance = 1e-9;

/// Forging cost of the optimal individual measurement, bracketed by the two
/// circulant symmetric bounding matrices. The amplified variant measures at
/// sqrt(3/2) alpha (Bob also holding Charlie's forwarded half).
inline ForgingAnalysis passive_forgery_analysis(const CostMatrix &cost, const PhaseAlphabet &alphabet, bool amplified,
                                                OrbitScope scope = OrbitScope::kUpperTriangle,
                                                double helstrom_tol = kDefaultHelstromTolerance) {
    if (cost.size() != alphabet.size()) {
        throw std::invalid_argument("passive_forgery_analysis: cost matrix is " + std::to_string(cost.size()) + "x" +
                                    std::to_string(cost.size()) + " but the alphabet has " +
                                    std::to_string(alphabet.size()) + " phases");
    }
    const PhaseAlphabet measured = amplified ? alphabet.scaled(std::sqrt(1.5)) : alphabet;
    const auto spec = gram_spectrum(measured);
    const auto povm = square_root_povm(spec);
    auto bounds = bounding_circulant_matrices(cost, scope);

    ForgingAnalysis a{measured,
                      amplified,
                      scope,
                      cost.max_diagonal(),
                      cost.mean_diagonal(),
                      bounds.lower,
                      bounds.upper,
                      expected_cost(povm, bounds.lower, spec),
                      expected_cost(povm, bounds.upper, spec),
                      helstrom_verify(povm, bounds.lower, spec, helstrom_tol),
                      helstrom_verify(povm, bounds.upper, spec, helstrom_tol),
                      expected_cost(povm, cost, spec),
                      dual_lower_bound(povm, cost, spec)};
    return a;
}

/// The measured 8-phase cost matrix at |alpha|^2 = 0.16, version 1.
inline CostMatrix measured_cost_matrix() {
    RMatrix m(8, 8);
    m << 3.89, 4.40, 5.24, 5.95, 6.35, 6.00, 5.29, 4.39,  //
        4.56, 3.88, 4.43, 5.29, 6.04, 6.39, 6.02, 5.20,   //
        5.28, 4.60, 3.89, 4.42, 5.29, 6.02, 6.37, 5.95,   //
        5.68, 5.22, 4.58, 3.90, 4.40, 5.24, 5.91, 6.30,   //
        6.36, 5.68, 5.27, 4.59, 3.89, 4.43, 5.24, 6.01,   //
        5.62, 6.36, 5.66, 5.23, 4.57, 3.89, 4.41, 5.30,   //
        5.26, 5.68, 6.40, 5.70, 5.22, 4.60, 3.88, 4.40,   //
        4.61, 5.24, 5.65, 6.36, 5.68, 5.22, 4.56, 3.88;
    return CostMatrix(m * 1e-3);
}

inline constexpr double kMeasuredMeanPhotons = 0.16;

}  // namespace qds
