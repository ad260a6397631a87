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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/// Symmetric coherent-state alphabets represented exactly in the N-dimensional
/// span of the alphabet ("standard basis"), plus the beamsplitter algebra of
/// the two-receiver comparison multiport.
namespace qds {

using Complex = std::complex<double>;
/// Field amplitude of a coherent state; |a|^2 is the mean photon number.
using Amplitude = Complex;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Eigenvalues in [-kClampTolerance, 0) are rounding noise and are clamped to 0.
inline constexpr double kClampTolerance = 1e-12;

inline void require_finite(Amplitude a, const char *what) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
        throw std::invalid_argument(std::string(what) + ": amplitude must be finite");
    }
}

/// <a|b> for coherent states.
inline Complex overlap(Amplitude a, Amplitude b) {
    require_finite(a, "overlap");
    require_finite(b, "overlap");
    return std::exp(-(std::norm(a) + std::norm(b)) / 2.0 + std::conj(a) * b);
}

struct BeamsplitterOutputs {
    Amplitude null;
    Amplitude signal;
};

/// 50:50 cube: (a, b) -> ((a - b)/sqrt2, (a + b)/sqrt2).
inline BeamsplitterOutputs beamsplitter_mix(Amplitude a, Amplitude b) {
    const double s = std::numbers::sqrt2 / 2.0;
    return {(a - b) * s, (a + b) * s};
}

struct MultiportOutputs {
    Amplitude bob_null;
    Amplitude bob_signal;
    Amplitude charlie_null;
    Amplitude charlie_signal;
};

/// The two-receiver comparison multiport. Each receiver halves his input,
/// forwards one half to the other receiver and mixes the retained half with
/// the half he receives:
///   charlie: (b/sqrt2 mixed with a/sqrt2) -> null (a-b)/2, signal (a+b)/2
///   bob:     (a/sqrt2 mixed with b/sqrt2) -> null (b-a)/2, signal (a+b)/2
/// where a is Alice's input at Bob and b her input at Charlie.
inline MultiportOutputs multiport_map(Amplitude alice_to_bob, Amplitude alice_to_charlie) {
    const double s = std::numbers::sqrt2 / 2.0;
    const Amplitude bob_keep = alice_to_bob * s;
    const Amplitude charlie_keep = alice_to_charlie * s;
    const auto at_charlie = beamsplitter_mix(bob_keep, charlie_keep);
    const auto at_bob = beamsplitter_mix(charlie_keep, bob_keep);
    return {at_bob.null, at_bob.signal, at_charlie.null, at_charlie.signal};
}

/// N equally spaced phases at a common amplitude: |alpha e^{2 pi i k / N}>.
class PhaseAlphabet {
  public:
    PhaseAlphabet(int n_phases, double amplitude) : n_(n_phases), amplitude_(amplitude) {
        if (n_phases < 2) {
            throw std::invalid_argument("PhaseAlphabet: need at least 2 phases");
        }
        if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
            throw std::invalid_argument("PhaseAlphabet: amplitude must be finite and >= 0");
        }
    }

    static PhaseAlphabet from_mean_photons(int n_phases, double mean_photons) {
        if (!(mean_photons >= 0.0)) {
            throw std::invalid_argument("PhaseAlphabet: mean photon number must be >= 0");
        }
        return PhaseAlphabet(n_phases, std::sqrt(mean_photons));
    }

    int size() const { return n_; }
    double amplitude() const { return amplitude_; }
    double mean_photons() const { return amplitude_ * amplitude_; }

    double phase(int k) const {
        check_index(k);
        return kTwoPi * k / n_;
    }

    Amplitude state(int k) const { return std::polar(amplitude_, phase(k)); }

    /// Same phases, amplitude multiplied by `factor` (e.g. sqrt(3/2)).
    PhaseAlphabet scaled(double factor) const { return PhaseAlphabet(n_, amplitude_ * factor); }

    void check_index(int k) const {
        if (k < 0 || k >= n_) {
            throw std::out_of_range("phase index " + std::to_string(k) + " out of range for N = " +
                                    std::to_string(n_));
        }
    }

  private:
    int n_;
    double amplitude_;
};

/// Plain O(N^2) DFT with the forward sign: out_k = sum_l in_l e^{-2 pi i k l / N}.
inline std::vector<Complex> dft(std::span<const Complex> in) {
    const std::size_t n = in.size();
    std::vector<Complex> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        Complex acc = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            // Reduce k*l mod n first so large N keeps full phase precision.
            acc += in[l] * std::polar(1.0, -kTwoPi * static_cast<double>((k * l) % n) / static_cast<double>(n));
        }
        out[k] = acc;
    }
    return out;
}

/// Spectrum of the circulant Gram matrix of a PhaseAlphabet and the change of
/// basis to the orthonormal "standard basis" |b_k> in which the mixture of the
/// alphabet is diagonal.
struct SpectralDecomposition {
    PhaseAlphabet alphabet;
    /// lambda_k >= 0, sum = N.
    RVector eigenvalues;
    /// Unitary DFT matrix F_{lk} = e^{-2 pi i k l/N}/sqrt(N); |b_k> is proportional
    /// to sum_l F_{lk} |v_l> with norm sqrt(lambda_k).
    CMatrix basis_change;

    int size() const { return alphabet.size(); }
};

/// Gram matrix G_{kl} = <v_k|v_l>; circulant with first row <v_0|v_l>.
inline CMatrix gram_matrix(const PhaseAlphabet &alphabet) {
    const int n = alphabet.size();
    CMatrix g(n, n);
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            g(k, l) = overlap(alphabet.state(k), alphabet.state(l));
        }
    }
    return g;
}

inline SpectralDecomposition gram_spectrum(const PhaseAlphabet &alphabet) {
    const int n = alphabet.size();
    std::vector<Complex> first_row(n);
    for (int l = 0; l < n; ++l) {
        first_row[l] = overlap(alphabet.state(0), alphabet.state(l));
    }
    const auto transformed = dft(first_row);

    RVector lambda(n);
    for (int k = 0; k < n; ++k) {
        double v = transformed[k].real();
        if (v < 0.0) {
            if (v < -kClampTolerance) {
                throw std::runtime_error("gram_spectrum: negative Gram eigenvalue " + std::to_string(v));
            }
            v = 0.0;
        }
        lambda(k) = v;
    }

    CMatrix f(n, n);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    for (int l = 0; l < n; ++l) {
        for (int k = 0; k < n; ++k) {
            f(l, k) = std::polar(norm, -kTwoPi * static_cast<double>((static_cast<long>(k) * l) % n) / n);
        }
    }
    return {alphabet, lambda, f};
}

/// Coordinates of |v_k> in the standard basis:
/// (|v_k>)_l = e^{2 pi i k l/N} sqrt(lambda_l / N).
inline CVector state_coordinates(int k, const SpectralDecomposition &spec) {
    spec.alphabet.check_index(k);
    const int n = spec.size();
    CVector v(n);
    for (int l = 0; l < n; ++l) {
        const double mag = std::sqrt(spec.eigenvalues(l) / n);
        v(l) = std::polar(mag, kTwoPi * static_cast<double>((static_cast<long>(k) * l) % n) / n);
    }
    return v;
}

/// The symmetry U = diag(e^{2 pi i l/N}) with |v_k> = U^k |v_0>.
inline CMatrix phase_unitary(int n, int power = 1) {
    CMatrix u = CMatrix::Zero(n, n);
    for (int l = 0; l < n; ++l) {
        const long e = ((static_cast<long>(power) * l) % n + n) % n;
        u(l, l) = std::polar(1.0, kTwoPi * static_cast<double>(e) / n);
    }
    return u;
}

/// Hermitian matrix with unit trace and no eigenvalue below -1e-10.
class DensityMatrix {
  public:
    static constexpr double kHermitianTolerance = 1e-12;
    static constexpr double kTraceTolerance = 1e-12;
    static constexpr double kPsdTolerance = 1e-10;

    explicit DensityMatrix(CMatrix entries) : m_(std::move(entries)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0) {
            throw std::invalid_argument("DensityMatrix: must be square and non-empty");
        }
        if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) {
            throw std::invalid_argument("DensityMatrix: not Hermitian");
        }
        if (std::abs(m_.trace() - Complex(1.0)) > kTraceTolerance) {
            throw std::invalid_argument("DensityMatrix: trace differs from 1");
        }
        const CMatrix h = (m_ + m_.adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -kPsdTolerance) {
            throw std::invalid_argument("DensityMatrix: not positive semidefinite");
        }
    }

    static DensityMatrix pure(const CVector &psi) {
        const double nrm = psi.squaredNorm();
        if (nrm <= 0.0) {
            throw std::invalid_argument("DensityMatrix::pure: zero vector");
        }
        return DensityMatrix(psi * psi.adjoint() / nrm);
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix &matrix() const { return m_; }

    RVector eigenvalues() const {
        const CMatrix h = (m_ + m_.adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

  private:
    CMatrix m_;
};

/// rho_Single = (1/N) sum_k |v_k><v_k| = diag(lambda_k / N) in the standard basis.
inline DensityMatrix signature_element_density(const PhaseAlphabet &alphabet) {
    const auto spec = gram_spectrum(alphabet);
    const int n = alphabet.size();
    CMatrix rho = CMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        rho(k, k) = spec.eigenvalues(k) / n;
    }
    return DensityMatrix(rho);
}

/// Shannon entropy in bits of a probability vector, 0 log 0 = 0.
inline double entropy_bits(const RVector &p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) {
            s -= p(i) * std::log2(p(i));
        }
    }
    return s;
}

inline double von_neumann_entropy(const DensityMatrix &rho) {
    RVector p = rho.eigenvalues();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) < -DensityMatrix::kPsdTolerance) {
            throw std::invalid_argument("von_neumann_entropy: negative eigenvalue");
        }
        p(i) = std::max(p(i), 0.0);
    }
    return std::clamp(entropy_bits(p), 0.0, std::log2(static_cast<double>(rho.dim())));
}

/// (1/2) || a - b ||_1.
inline double trace_distance(const DensityMatrix &a, const DensityMatrix &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("trace_distance: dimension mismatch");
    }
    const CMatrix d = a.matrix() - b.matrix();
    Eigen::SelfAdjointEigenSolver<CMatrix> es((d + d.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    return std::clamp(0.5 * es.eigenvalues().cwiseAbs().sum(), 0.0, 1.0);
}

}  // namespace qds
