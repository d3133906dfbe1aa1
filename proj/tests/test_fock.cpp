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
#include "qzd/error.hpp"
#include "qzd/fock.hpp"

namespace qzd {
namespace {

TEST(Fock, TruncationRule) {
    EXPECT_EQ(min_truncation_dim(0.0), 10);
    EXPECT_EQ(min_truncation_dim(5.0), 65);
    EXPECT_EQ(min_truncation_dim(2.0), 26);
    EXPECT_EQ(min_truncation_dim(-3.0), min_truncation_dim(3.0));
}

TEST(Fock, FieldStateNormalizesAndRejectsBadInput) {
    CVector v(3);
    v << 3.0, 4.0, 0.0;
    const FieldState s(v);
    EXPECT_NEAR(s.amps().norm(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(s[0]), 0.6, 1e-15);
    EXPECT_THROW(FieldState(CVector::Zero(4)), Error);
    EXPECT_THROW(FieldState(CVector::Ones(1)), DimensionError);
    EXPECT_THROW(fock_basis(5, 5), DimensionError);
    EXPECT_THROW(fock_basis(-1, 5), DimensionError);
}

TEST(Fock, CoherentMatchesClosedForm) {
    for (Complex alpha : {Complex(0.0), Complex(1.5, -0.5), Complex(-3.0, 2.0)}) {
        const int dim = min_truncation_dim(std::abs(alpha)) + 20;
        const CVector want = oracle::coherent_amplitudes(alpha, dim);
        EXPECT_LT((coherent(alpha, dim).amps() - want).cwiseAbs().maxCoeff(), 1e-12) << alpha;
    }
}

TEST(Fock, CoherentRefusesTooSmallDim) {
    EXPECT_THROW(coherent(5.0, 64), TruncationError);
    EXPECT_NO_THROW(coherent(5.0, 65));
}

TEST(Fock, CoherentMoments) {
    const Complex alpha(1.2, 0.7);
    const FieldState s = coherent(alpha, 40);
    EXPECT_NEAR(mean_energy(s), std::norm(alpha), 1e-10);
    EXPECT_NEAR(std::abs(mean_amplitude(s) - alpha), 0.0, 1e-10);
    EXPECT_NEAR(min_quadrature_variance_ratio(s), 1.0, 1e-9);
}

TEST(Fock, SqueezedVacuumVarianceRatio) {
    // S(r) = exp(r (a^2 - a^dag^2) / 2) squeezes one quadrature by e^{-2r}.
    const int dim = 80;
    const CMatrix a = oracle::lowering(dim);
    for (double r : {0.2, 0.5, 0.8}) {
        const CMatrix gen = 0.5 * r * (a * a - a.adjoint() * a.adjoint());
        const CVector v = gen.exp().col(0);
        EXPECT_NEAR(min_quadrature_variance_ratio(FieldState(v)), std::exp(-2.0 * r), 1e-8) << r;
    }
}

TEST(Fock, DisplacementMatchesMatrixExponential) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 8; ++trial) {
        const int dim = 10 + trial * 7;
        const Complex beta = oracle::random_complex(rng, 2.0);
        const CMatrix want = oracle::displacement(beta, dim);
        EXPECT_LT((displacement_op(beta, dim).mat() - want).cwiseAbs().maxCoeff(), 1e-10) << dim << " " << beta;
    }
}

TEST(Fock, DisplacementIsUnitaryAndInverts) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const Complex beta = oracle::random_complex(rng, 4.0);
        const Operator d = displacement_op(beta, 50);
        EXPECT_LT(d.unitarity_error(), 1e-12);
        EXPECT_LT((displacement_op(-beta, 50).mat() - d.adjoint().mat()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Fock, ApplyDisplacementAgreesWithMatrix) {
    std::mt19937_64 rng(13);
    CVector v = CVector::Random(30);
    for (int trial = 0; trial < 5; ++trial) {
        const Complex beta = oracle::random_complex(rng, 3.0);
        EXPECT_LT((apply_displacement(beta, v) - displacement_op(beta, 30).mat() * v).cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(Fock, DisplacedVacuumIsCoherent) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 10; ++trial) {
        const Complex alpha = oracle::random_complex(rng, 4.0);
        const int dim = min_truncation_dim(std::abs(alpha));
        const FieldState d(apply_displacement(alpha, fock_basis(0, dim).amps()));
        EXPECT_LT(1.0 - fidelity_pure(d, coherent(alpha, dim)), 1e-8) << alpha;
    }
}

TEST(Fock, DisplacementComposition) {
    // D(a) D(b) = e^{i Im(a conj(b))} D(a + b) on states well inside the truncation.
    std::mt19937_64 rng(15);
    const int dim = 90;
    const CVector vac = fock_basis(0, dim).amps();
    for (int trial = 0; trial < 10; ++trial) {
        const Complex a = oracle::random_complex(rng, 2.0), b = oracle::random_complex(rng, 2.0);
        const CVector lhs = apply_displacement(a, apply_displacement(b, vac));
        const CVector rhs = std::polar(1.0, std::imag(a * std::conj(b))) * apply_displacement(a + b, vac);
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Fock, DisplacedFock) {
    const CVector v = displaced_fock(2, Complex(0.4, -0.3), 30);
    const CVector want = oracle::displacement(Complex(0.4, -0.3), 30).col(2);
    EXPECT_LT((v - want).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_THROW(displaced_fock(30, 0.0, 30), DimensionError);
}

TEST(Fock, LadderOperators) {
    const int dim = 12;
    const CMatrix a = annihilation_op(dim).mat();
    EXPECT_LT((a - oracle::lowering(dim)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((creation_op(dim).mat() - a.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
    const CMatrix n = number_op(dim).mat();
    EXPECT_LT((n - a.adjoint() * a).cwiseAbs().maxCoeff(), 1e-14);
    const CMatrix p = parity_op(dim).mat();
    for (int k = 0; k < dim; ++k) EXPECT_EQ(p(k, k).real(), k % 2 == 0 ? 1.0 : -1.0);
    EXPECT_EQ((identity_op(dim).mat() - CMatrix::Identity(dim, dim)).norm(), 0.0);
}

TEST(Fock, OperatorChecks) {
    EXPECT_THROW(Operator(CMatrix::Zero(2, 3)), DimensionError);
    EXPECT_THROW(number_op(4) * number_op(5), DimensionError);
    EXPECT_THROW(number_op(4).apply(fock_basis(0, 5)), DimensionError);
    EXPECT_EQ(number_op(6).hermiticity_error(), 0.0);
    EXPECT_GT(annihilation_op(6).hermiticity_error(), 0.5);
}

TEST(Fock, CatStates) {
    const int dim = 40;
    const FieldState even = cat_state(2.0, 1.0, dim);
    const FieldState odd = cat_state(2.0, -1.0, dim);
    const RVector pe = photon_distribution(even), po = photon_distribution(odd);
    for (int n = 1; n < dim; n += 2) EXPECT_LT(pe(n), 1e-25);
    for (int n = 0; n < dim; n += 2) EXPECT_LT(po(n), 1e-25);
    // <n> = |a|^2 tanh(|a|^2) for the even cat.
    EXPECT_NEAR(mean_energy(even), 4.0 * std::tanh(4.0), 1e-10);
    EXPECT_NEAR(mean_energy(odd), 4.0 / std::tanh(4.0), 1e-10);
    EXPECT_THROW(cat_state(2.0, 0.5, dim), Error);
}

TEST(Fock, CoherentSuperposition) {
    const int dim = 60;
    const FieldState s = coherent_superposition({Complex(0, 3), Complex(0, -3)}, {1.0, 1.0}, dim);
    EXPECT_GT(fidelity_pure(s, cat_state(Complex(0, 3), 1.0, dim)), 1.0 - 1e-12);
    EXPECT_THROW(coherent_superposition({1.0}, {1.0, 1.0}, dim), Error);
}

TEST(Fock, FidelityProperties) {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        const FieldState a(CVector::Random(20)), b(CVector::Random(20));
        const double f = fidelity_pure(a, b);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0 + 1e-15);
        EXPECT_NEAR(f, fidelity_pure(b, a), 1e-15);
        EXPECT_NEAR(fidelity_pure(a, a), 1.0, 1e-14);
    }
    EXPECT_THROW(fidelity_pure(fock_basis(0, 4), fock_basis(0, 5)), DimensionError);
}

TEST(Fock, TruncationCheckSumsGuardLevels) {
    CVector v = CVector::Zero(10);
    v(0) = 1.0;
    v(8) = 0.01;
    const FieldState s(v);
    const TruncationReport r = truncation_check(s, 3, 1e-6);
    EXPECT_NEAR(r.top_population, std::norm(s[8]), 1e-18);
    EXPECT_FALSE(r.ok);
    EXPECT_TRUE(truncation_check(s, 1, 1e-6).ok);
    EXPECT_THROW(truncation_check(s, 10, 1e-6), DimensionError);
}

}  // namespace
}  // namespace qzd
