// Copyright 2026 The QZD Authors
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

#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "qzd/atomkick.hpp"
#include "qzd/error.hpp"
#include "qzd/zeno.hpp"

namespace qzd {
namespace {

PulseParams pulse(double omega_hz, double rabi_hz, double theta, int s, bool minus = true) {
    PulseParams p;
    p.omega = 2.0 * M_PI * omega_hz;
    p.rabi_drive = 2.0 * M_PI * rabi_hz;
    p.theta = theta;
    p.s = s;
    p.include_minus_branch = minus;
    return p;
}

// Joint Hamiltonian in the bare basis, index = atom * dim + n with atom
// h = 0, e = 1, g = 2, in the frame of a drive resonant with |h,s> -> |+,s>:
// g and e sit at -(Omega/2) sqrt(s), the cavity couples |e,n-1> <-> |g,n>
// with (Omega/2) sqrt(n), and the drive couples |h,n> <-> |g,n> with Omega_R/2.
CMatrix bare_hamiltonian(const PulseParams& p, int dim) {
    const double delta = -0.5 * p.omega * std::sqrt(double(p.s));
    CMatrix h = CMatrix::Zero(3 * dim, 3 * dim);
    for (int n = 0; n < dim; ++n) {
        h(dim + n, dim + n) = delta;
        h(2 * dim + n, 2 * dim + n) = delta;
        h(n, 2 * dim + n) = h(2 * dim + n, n) = 0.5 * p.rabi_drive;
        if (n >= 1) h(dim + n - 1, 2 * dim + n) = h(2 * dim + n, dim + n - 1) = 0.5 * p.omega * std::sqrt(double(n));
    }
    return h;
}

TEST(AtomKick, Validation) {
    EXPECT_NO_THROW(pulse(50e3, 500, 2 * M_PI, 1).validate());
    EXPECT_THROW(pulse(0, 500, 2 * M_PI, 1).validate(), Error);
    EXPECT_THROW(pulse(50e3, 0, 2 * M_PI, 1).validate(), Error);
    EXPECT_THROW(pulse(50e3, 500, 0.0, 1).validate(), Error);
    EXPECT_THROW(pulse(50e3, 500, 4 * M_PI + 0.1, 1).validate(), Error);
    EXPECT_THROW(pulse(50e3, 500, 1.0, -1).validate(), Error);
}

TEST(AtomKick, DurationAndSelectivity) {
    const PulseParams p = pulse(50e3, 500, 2 * M_PI, 1);
    EXPECT_NEAR(p.duration(), 2 * M_PI * std::sqrt(2.0) / p.rabi_drive, 1e-18);
    EXPECT_NEAR(pulse(50e3, 500, 2 * M_PI, 0).duration(), 2 * M_PI / p.rabi_drive, 1e-18);
    EXPECT_NEAR(p.selectivity_ratio(), 500.0 / (50e3 * (std::sqrt(2.0) - 1.0)), 1e-15);
    EXPECT_FALSE(p.selectivity_warning());
    EXPECT_TRUE(pulse(50e3, 10e3, 2 * M_PI, 1).selectivity_warning());
}

TEST(AtomKick, DressedDetunings) {
    const PulseParams p = pulse(50e3, 500, 2 * M_PI, 1);
    const DressedDetunings d0 = dressed_detunings(0, p);
    EXPECT_NEAR(d0.plus, -M_PI * 50e3, 1e-9);
    EXPECT_EQ(d0.plus, d0.minus);
    EXPECT_EQ(dressed_detunings(1, p).plus, 0.0);
    const PulseParams p3 = pulse(50e3, 500, 2 * M_PI, 3);
    EXPECT_NEAR(dressed_detunings(4, p3).plus - dressed_detunings(3, p3).plus,
                0.5 * p3.omega * (2.0 - std::sqrt(3.0)), 1e-9);
    EXPECT_NEAR(dressed_detunings(4, p3).minus, -0.5 * p3.omega * (2.0 + std::sqrt(3.0)), 1e-9);
    EXPECT_THROW(dressed_detunings(-1, p), DimensionError);
}

TEST(AtomKick, BlocksAreUnitary) {
    for (int n = 0; n < 12; ++n) {
        for (bool minus : {true, false}) {
            const CMatrix u = pulse_block_unitary(n, pulse(50e3, 2e3, 1.3, 2, minus));
            EXPECT_LT((u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff(), 1e-13);
            EXPECT_EQ(u.rows(), (n == 0 || !minus) ? 2 : 3);
        }
    }
}

TEST(AtomKick, ResonantTwoPiFlipsSign) {
    for (int s : {1, 2, 5}) {
        const CMatrix u = pulse_block_unitary(s, pulse(50e3, 500, 2 * M_PI, s, false));
        EXPECT_NEAR(std::abs(u(0, 0) + 1.0), 0.0, 1e-12) << s;
    }
    const CMatrix u0 = pulse_block_unitary(0, pulse(50e3, 500, 2 * M_PI, 0, false));
    EXPECT_NEAR(std::abs(u0(0, 0) + 1.0), 0.0, 1e-12);
}

TEST(AtomKick, TwoLevelBlockMatchesRabiFormula) {
    // H = [[0, c], [c, d]]: <0|e^{-iH t}|0> = e^{-i d t/2} (cos(W t/2) + i d/W sin(W t/2)), W = sqrt(4c^2 + d^2).
    const PulseParams p = pulse(50e3, 3e3, 1.7, 2, false);
    for (int n = 0; n < 8; ++n) {
        const double c = n == 0 ? 0.5 * p.rabi_drive : 0.5 * p.rabi_drive / std::sqrt(2.0);
        const double d = dressed_detunings(n, p).plus;
        const double t = p.theta * std::sqrt(2.0) / p.rabi_drive;
        const double w = std::sqrt(4 * c * c + d * d);
        const Complex want = std::polar(1.0, -0.5 * d * t) * Complex(std::cos(0.5 * w * t), d / w * std::sin(0.5 * w * t));
        EXPECT_LT(std::abs(pulse_block_unitary(n, p)(0, 0) - want), 1e-12) << n;
    }
}

TEST(AtomKick, ThreeLevelBlockMatchesMatrixExponential) {
    const PulseParams p = pulse(50e3, 4e3, 2.2, 1, true);
    for (int n = 1; n < 6; ++n) {
        const DressedDetunings d = dressed_detunings(n, p);
        const double c = 0.5 * p.rabi_drive / std::sqrt(2.0);
        CMatrix h(3, 3);
        h << 0, c, c, c, d.plus, 0, c, 0, d.minus;
        const CMatrix want = (Complex(0, -p.duration()) * h).exp();
        EXPECT_LT((pulse_block_unitary(n, p) - want).cwiseAbs().maxCoeff(), 1e-11) << n;
    }
}

TEST(AtomKick, OffResonantSurvival) {
    const PulseParams p = pulse(50e3, 500, 2 * M_PI, 1, false);
    for (int n : {3, 5, 9}) {
        const double dp = dressed_detunings(n, p).plus;
        const double bound = 1.0 - std::pow(p.rabi_drive / (std::sqrt(2.0) * dp), 2);
        EXPECT_GT(std::abs(pulse_block_unitary(n, p)(0, 0)), bound) << n;
    }
}

TEST(AtomKick, WeakDriveApproachesIdealKick) {
    for (int s : {1, 3}) {
        const CVector c = conditioned_amplitudes(pulse(50e3, 5, 2 * M_PI, s), 20);
        const CMatrix ideal = kick_op(s, 20).mat();
        for (int n = 0; n < 20; ++n) EXPECT_LT(std::abs(c(n) - ideal(n, n)), 2e-3) << s << " " << n;
    }
}

TEST(AtomKick, SmallAngleIsNearIdentity) {
    const CVector c = conditioned_amplitudes(pulse(50e3, 500, 1e-6, 1), 10);
    for (int n = 0; n < 10; ++n) EXPECT_LT(std::abs(c(n) - 1.0), 1e-5);
}

TEST(AtomKick, RealisticKickBookkeeping) {
    const PulseParams p = pulse(50e3, 500, 1.0, 1);
    const FieldState psi = coherent(1.0, 20);
    const JointKickResult r = realistic_kick(psi, p, 1e-2);
    const CVector c = conditioned_amplitudes(p, 20);
    for (int n = 0; n < 20; ++n) {
        EXPECT_NEAR(r.atom_leak(n), 1.0 - std::norm(c(n)), 1e-15);
        EXPECT_NEAR(r.branch_populations(n), std::norm(psi[n]) * r.atom_leak(n), 1e-15);
    }
    EXPECT_NEAR(r.leak_probability, r.branch_populations.sum(), 1e-15);
    EXPECT_EQ(r.leak_flagged, r.leak_probability > 1e-2);
    EXPECT_GT(fidelity_pure(r.state, FieldState(c.cwiseProduct(psi.amps()))), 1.0 - 1e-14);
    EXPECT_LT((r.field_unitary_on_h.mat().diagonal() - c).norm(), 1e-15);
}

TEST(AtomKick, JointKickMatchesBareBasisEvolution) {
    std::mt19937_64 rng(31);
    const int dim = 14;
    for (const PulseParams& p : {pulse(50e3, 2e3, 1.0, 1), pulse(50e3, 6e3, 2 * M_PI, 2), pulse(30e3, 1e3, 4.0, 0)}) {
        const DressedKick kick(p, dim);
        const CMatrix u = (Complex(0, -p.duration()) * bare_hamiltonian(p, dim)).exp();
        AtomFieldState js{CVector::Random(dim), CVector::Random(dim), CVector::Random(dim)};
        js.e(dim - 1) = 0.0;
        CVector flat(3 * dim);
        flat << js.h, js.e, js.g;
        const CVector want = u * flat;
        kick.apply(js, 0.0);
        CVector got(3 * dim);
        got << js.h, js.e, js.g;
        EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(AtomKick, DisplacedJointKickPreservesNormAndMatchesConditionedMap) {
    const int dim = 30;
    const PulseParams p = pulse(50e3, 500, 1.0, 1);
    const DressedKick kick(p, dim);
    const FieldState psi = coherent(Complex(0.5, 0.3), dim);
    AtomFieldState js = AtomFieldState::atom_in_h(psi);
    kick.apply(js, Complex(1.0, -0.5));
    EXPECT_NEAR(js.norm2(), 1.0, 1e-12);
    // A fresh atom: the h branch is exactly the conditioned map.
    const CVector cond = kick.apply_conditioned(psi.amps(), Complex(1.0, -0.5));
    EXPECT_LT((js.h - cond).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(js.leaked_population(), 1.0 - cond.squaredNorm(), 1e-12);
    EXPECT_GT(fidelity_pure(js.conditioned_on_h(), FieldState(cond)), 1.0 - 1e-12);
    EXPECT_THROW(DressedKick(p, dim + 1).apply(js, 0.0), DimensionError);
}

TEST(AtomKick, ConditionedDisplacedKickMatchesDenseForm) {
    const int dim = 30;
    const PulseParams p = pulse(50e3, 500, 1.0, 1);
    const CVector c = conditioned_amplitudes(p, dim);
    const Complex gamma(0.8, 0.2);
    const CMatrix dense = oracle::displacement(gamma, dim) * c.asDiagonal() * oracle::displacement(-gamma, dim);
    EXPECT_LT((displaced_kick(KickSpec{1, gamma, p}, dim).mat() - dense).cwiseAbs().maxCoeff(), 1e-10);
}

}  // namespace
}  // namespace qzd
