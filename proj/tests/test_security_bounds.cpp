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

#include "qds/security_bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace qds;

namespace {
constexpr double kGap = 8.03e-4;
}

TEST(Thresholds, Examples) {
    const auto th = thresholds(3.9e-3, kGap);
    EXPECT_NEAR(th.s_a, 4.168e-3, 0.001e-3);
    EXPECT_NEAR(th.s_v, 4.435e-3, 0.001e-3);
    EXPECT_NEAR(th.s_v - th.s_a, kGap / 3.0, 1e-15);
    EXPECT_THROW((void)thresholds(3.9e-3, 0.0), std::invalid_argument);
    EXPECT_THROW((void)thresholds(3.9e-3, -1e-4), std::invalid_argument);
}

TEST(ForgingBound, NontrivialLength) {
    const double len = nontrivial_length(kGap);
    EXPECT_NEAR(len, 4.84e6, 0.01e6);
    EXPECT_NEAR(forging_bound(kGap, len).raw, 1.0, 1e-12);
    EXPECT_TRUE(forging_bound(kGap, 0.99 * len).vacuous);
    EXPECT_FALSE(forging_bound(kGap, 1.01 * len).vacuous);
}

TEST(ForgingBound, LimitsAndExponentialLaw) {
    const auto b0 = forging_bound(kGap, 0.0);
    EXPECT_EQ(b0.raw, 2.0);
    EXPECT_EQ(b0.value(), 1.0);
    EXPECT_TRUE(b0.vacuous);
    const double half1 = forging_bound(kGap, 1e7).raw / 2.0;
    const double half2 = forging_bound(kGap, 2e7).raw / 2.0;
    EXPECT_NEAR(half2, half1 * half1, 1e-15);
    double prev = 3.0;
    for (double len = 1.0; len < 1e9; len *= 3.0) {
        const double v = forging_bound(kGap, len).raw;
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(RobustnessBound, ExampleAndDominance) {
    EXPECT_NEAR(robustness_bound(kGap, 1e7).raw, 0.2956, 0.0005);
    EXPECT_LT(robustness_bound(kGap, 1e11).raw, 1e-100);
    for (double g : {1e-4, kGap, 0.01, 0.05, 0.3}) {
        for (double len = 1.0; len < 1e10; len *= 7.0) {
            EXPECT_LE(robustness_bound(g, len).raw, forging_bound(g, len).raw);
        }
    }
}

TEST(RepudiationBound, Examples) {
    const double frac = kGap / 3.0;
    EXPECT_NEAR(repudiation_bound(0.5, frac, 1e4).raw, 0.156, 0.001);
    EXPECT_GT(repudiation_bound(0.8, frac, 1e5).raw, repudiation_bound(0.5, frac, 1e5).raw);
    const double slow = repudiation_bound(1000.0 / 1001.0, frac, 1e8).raw;
    EXPECT_LT(slow, 1.0);
    EXPECT_GT(slow, 1e-20);
    const auto v = repudiation_bound(1.0, frac, 1e8);
    EXPECT_TRUE(v.vacuous);
    EXPECT_EQ(v.value(), 1.0);
    EXPECT_THROW((void)repudiation_bound(0.5, 0.0, 1e4), std::invalid_argument);
}

TEST(RepudiationBound, DominatedByForgingAboveThreshold) {
    const double frac = kGap / 3.0;
    for (double len = 1e6; len <= 1e8; len *= 1.2) {
        if (len < nontrivial_length(kGap)) continue;
        EXPECT_LE(repudiation_bound(0.8, frac, len).raw, forging_bound(kGap, len).raw) << len;
        EXPECT_LE(repudiation_bound(0.5, frac, len).raw, forging_bound(kGap, len).raw) << len;
    }
}

TEST(ActiveDelta, Limits) {
    EXPECT_NEAR(active_delta(0.0, 1e-4, 1e9), 1e-2, 1e-8);
    EXPECT_NEAR(active_delta(1e-3, 1e-3, 1e12), std::sqrt(2e-3), 1e-12);
    EXPECT_NEAR(active_delta(1e-3, 1e-12, 1e6), 1.0, 1e-12);
    double prev = 2.0;
    for (double len = 1.0; len < 1e12; len *= 4.0) {
        const double d = active_delta(1e-3, 1e-3, len);
        EXPECT_LE(d, prev);
        EXPECT_GT(d, 0.0);
        EXPECT_LE(d, 1.0);
        prev = d;
    }
    EXPECT_THROW((void)active_delta(0.6, 0.5, 10.0), std::invalid_argument);
}

TEST(ActiveForgingBound, Examples) {
    const double g_amp = 4.61e-3 - 3.9e-3;
    EXPECT_NEAR(g_amp, 7.1e-4, 1e-12);
    const auto a = active_forging_bound(g_amp, 0.0, 1e7);
    EXPECT_EQ(a.forging.raw, forging_bound(g_amp, 1e7).raw);
    EXPECT_EQ(a.robustness.raw, robustness_bound(g_amp, 1e7).raw);
    const auto v = active_forging_bound(g_amp, g_amp, 1e7);
    EXPECT_TRUE(v.gap_exhausted);
    EXPECT_EQ(v.forging.raw, 2.0);
    EXPECT_TRUE(v.forging.vacuous);
}

TEST(MultiportRobustness, Examples) {
    EXPECT_NEAR(multiport_robustness_bound(1e-3, 1e7).raw, 2.06e-9, 0.01e-9);
    EXPECT_EQ(multiport_robustness_bound(1e-3, 0.0).raw, 1.0);
    const double e1 = std::log(multiport_robustness_bound(1e-3, 1e6).raw);
    const double e2 = std::log(multiport_robustness_bound(2e-3, 1e6).raw);
    EXPECT_NEAR(e2, 4.0 * e1, 1e-9);
}

TEST(TraceDistanceFromFidelity, Examples) {
    EXPECT_EQ(trace_distance_from_fidelity(1.0), 0.0);
    EXPECT_EQ(trace_distance_from_fidelity(0.0), 1.0);
    EXPECT_NEAR(trace_distance_from_fidelity(0.99), 0.1, 1e-12);
    EXPECT_THROW((void)trace_distance_from_fidelity(1.5), std::invalid_argument);
}

TEST(TraceDistance, BoundsDifferenceOfOutcomeProbabilities) {
    // |Tr(E rho) - Tr(E sigma)| <= T(rho, sigma) for every effect 0 <= E <= 1.
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    const auto random_psi = [&](int n) {
        CVector v(n);
        for (int i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
        return v;
    };
    for (int t = 0; t < 50; ++t) {
        const int n = 4;
        CMatrix a = CMatrix::Zero(n, n);
        CMatrix b = CMatrix::Zero(n, n);
        for (int k = 0; k < 3; ++k) {
            const CVector x = random_psi(n);
            const CVector y = random_psi(n);
            a += x * x.adjoint();
            b += y * y.adjoint();
        }
        const DensityMatrix rho(a / a.trace().real());
        const DensityMatrix sigma(b / b.trace().real());
        const double td = trace_distance(rho, sigma);

        // A random 4-outcome POVM: E_i = S^{-1/2} A_i S^{-1/2}.
        std::vector<CMatrix> parts;
        CMatrix s = CMatrix::Zero(n, n);
        for (int i = 0; i < 4; ++i) {
            const CVector x = random_psi(n);
            parts.push_back(x * x.adjoint());
            s += parts.back();
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> es(s);
        const CMatrix s_inv_half = es.operatorInverseSqrt();
        for (const auto &p : parts) {
            const CMatrix e = s_inv_half * p * s_inv_half;
            const double diff = std::abs((e * (rho.matrix() - sigma.matrix())).trace().real());
            EXPECT_LE(diff, td + 1e-12);
        }
    }
}

TEST(InfoBalance, Examples) {
    const auto zero = info_balance(PhaseAlphabet(8, 0.0), 2, 1e6);
    EXPECT_EQ(zero.accessible_bits, 0.0);
    EXPECT_EQ(zero.ratio, 0.0);
    EXPECT_EQ(zero.key_bits, 3e6);

    const auto op = info_balance(PhaseAlphabet::from_mean_photons(8, 0.16), 2, 1e6);
    EXPECT_LT(op.ratio, 0.5);
    EXPECT_EQ(op.holds, op.ratio < kInfoBalanceMargin);
    EXPECT_NEAR(op.accessible_bits / op.key_bits, op.ratio, 1e-12);

    const auto big = info_balance(PhaseAlphabet::from_mean_photons(8, 60.0), 2, 1e6);
    EXPECT_FALSE(big.holds);
    EXPECT_NEAR(big.ratio, 2.0, 1e-2);
    EXPECT_THROW((void)info_balance(PhaseAlphabet(8, 0.4), 0, 1.0), std::invalid_argument);
}

TEST(UsdProbability, Examples) {
    EXPECT_EQ(usd_probability(PhaseAlphabet(8, 0.0)), 0.0);
    EXPECT_NEAR(usd_probability(PhaseAlphabet::from_mean_photons(4, 400.0)), 1.0, 1e-9);
    EXPECT_NEAR(usd_probability(PhaseAlphabet::from_mean_photons(2, 400.0)), 1.0, 1e-9);
    for (double mu : {0.16, 0.24}) {
        const double op = usd_probability(PhaseAlphabet::from_mean_photons(8, mu));
        EXPECT_GE(op, 1e-9) << mu;
        EXPECT_LE(op, 1e-7) << mu;
        // Poisson closed form for the smallest eigenvalue; n = 7 dominates.
        const double closed = 8.0 * std::exp(-mu) * std::pow(mu, 7) / 5040.0;
        EXPECT_NEAR(op, closed, 1e-3 * closed) << mu;
    }
    // Two states: 1 - |<a|-a>|.
    EXPECT_NEAR(usd_probability(PhaseAlphabet::from_mean_photons(2, 0.3)), 1.0 - std::exp(-0.6), 1e-12);
}

TEST(SecurityReport, AssemblesConsistentSweep) {
    const auto alphabet = PhaseAlphabet::from_mean_photons(8, 0.16);
    const auto passive = passive_forgery_analysis(measured_cost_matrix(), alphabet, false);
    const auto amplified = passive_forgery_analysis(measured_cost_matrix(), alphabet, true);
    SecurityParameters params;
    const auto rep = build_security_report(passive, amplified, alphabet, params);
    EXPECT_EQ(rep.sweep.size(), params.sweep_lengths.size());
    EXPECT_NEAR(rep.gap, 8.03e-4, 0.3e-4);
    EXPECT_NEAR(rep.gap_amplified, 7.13e-4, 0.05e-3);
    EXPECT_NEAR(rep.hoeffding_slack, 5e-8, 1e-20);
    EXPECT_NEAR(rep.nontrivial_length, 4.8e6, 0.2e6);
    for (const auto &row : rep.sweep) {
        EXPECT_EQ(row.forging.raw, forging_bound(rep.gap, row.length).raw);
        EXPECT_LE(row.robustness.raw, row.forging.raw);
        EXPECT_GT(row.delta, 0.0);
        EXPECT_LE(row.delta, 1.0);
    }
}

TEST(Hoeffding, EmpiricalTailBelowBound) {
    // Binomial counts with success probability p exceed (p + t) L no more
    // often than exp(-2 t^2 L).
    std::mt19937_64 rng(5);
    const double p = 0.05;
    const int len = 2000;
    const int trials = 4000;
    std::binomial_distribution<int> binom(len, p);
    for (double t : {0.005, 0.01, 0.02}) {
        int exceed = 0;
        for (int i = 0; i < trials; ++i) {
            if (binom(rng) > (p + t) * len) ++exceed;
        }
        const double bound = std::exp(-2.0 * t * t * len);
        const double freq = static_cast<double>(exceed) / trials;
        EXPECT_LE(freq, bound + 4.0 * std::sqrt(bound * (1 - bound) / trials) + 1e-12) << t;
    }
}
