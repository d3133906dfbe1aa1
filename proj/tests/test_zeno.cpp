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
#include <sstream>

#include "oracle.hpp"
#include "qzd/error.hpp"
#include "qzd/zeno.hpp"

namespace qzd {
namespace {

CVector dense_run(const CVector& psi0, const Schedule& schedule) {
    const int dim = static_cast<int>(psi0.size());
    CVector psi = psi0;
    for (const Step& st : schedule) {
        psi = oracle::displacement(st.displacement, dim) * psi;
        for (const KickSpec& k : st.kicks) psi = oracle::kick(k.s, k.gamma, dim) * psi;
    }
    return psi;
}

TEST(Zeno, KickOperator) {
    const Operator u = kick_op(3, 8);
    EXPECT_EQ(u.unitarity_error(), 0.0);
    EXPECT_EQ(u.mat()(3, 3).real(), -1.0);
    EXPECT_LT(((u * u).mat() - CMatrix::Identity(8, 8)).norm(), 1e-15);
    EXPECT_THROW(kick_op(8, 8), DimensionError);
}

TEST(Zeno, DisplacedKickMatchesDenseConjugation) {
    const Complex gamma(0.7, -1.1);
    const CMatrix got = displaced_kick(KickSpec{2, gamma, std::nullopt}, 40).mat();
    EXPECT_LT((got - oracle::kick(2, gamma, 40)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Zeno, StepMatchesDenseProduct) {
    const int dim = 30;
    const FieldState psi = coherent(Complex(0.3, 0.2), dim);
    const std::vector<KickSpec> kicks{{1, Complex(0.5, 0.0), std::nullopt}, {3, 0.0, std::nullopt}};
    const FieldState out = zeno_step(psi, Complex(0.05, 0.1), kicks);
    const CVector want = dense_run(psi.amps(), {Step{Complex(0.05, 0.1), kicks}});
    EXPECT_LT((out.amps() - want).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Zeno, RunMatchesDenseProductOnRandomSchedules) {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> steps(1, 30), nk(0, 2), sdist(0, 4);
    for (int trial = 0; trial < 6; ++trial) {
        const int dim = 40;
        Schedule sched;
        const int p = steps(rng);
        for (int k = 0; k < p; ++k) {
            Step st{oracle::random_complex(rng, 0.1), {}};
            const int n = nk(rng);
            for (int j = 0; j < n; ++j) st.kicks.push_back({sdist(rng), oracle::random_complex(rng, 1.0), std::nullopt});
            sched.push_back(st);
        }
        const FieldState psi0 = coherent(oracle::random_complex(rng, 1.0), dim);
        ZenoRunOptions opt;
        opt.leak_tol = 1.0;
        const EvolutionTrace t = zeno_run(psi0, sched, opt);
        ASSERT_TRUE(t.ok());
        const CVector want = dense_run(psi0.amps(), sched);
        EXPECT_LT((t.final_state.amps() - want).cwiseAbs().maxCoeff(), 1e-10) << trial;
    }
}

TEST(Zeno, RunPreservesNorm) {
    const EvolutionTrace t = zeno_run(fock_basis(0, 40), uniform_schedule(0.1, {{6, 0.0, std::nullopt}}, 40));
    EXPECT_LT(t.max_norm_drift, 1e-12);
    for (const TraceRecord& r : t.records) EXPECT_NEAR(r.probs.sum(), 1.0, 1e-12);
}

TEST(Zeno, RecordEveryKeepsFirstAndLast) {
    ZenoRunOptions opt;
    opt.record_every = 4;
    const EvolutionTrace t = zeno_run(fock_basis(0, 30), uniform_schedule(0.1, {{6, 0.0, std::nullopt}}, 10), opt);
    std::vector<int> steps;
    for (const TraceRecord& r : t.records) steps.push_back(r.step);
    EXPECT_EQ(steps, (std::vector<int>{0, 4, 8, 10}));
    EXPECT_EQ(t.steps_run, 10);
    EXPECT_FALSE(t.records.back().state.has_value());
}

TEST(Zeno, KeepStatesStoresFields) {
    ZenoRunOptions opt;
    opt.keep_states = true;
    const EvolutionTrace t = zeno_run(fock_basis(0, 30), uniform_schedule(0.1, {{6, 0.0, std::nullopt}}, 3), opt);
    ASSERT_TRUE(t.records.back().state.has_value());
    EXPECT_GT(fidelity_pure(*t.records.back().state, t.final_state), 1.0 - 1e-15);
}

TEST(Zeno, GuardBreachStopsRun) {
    // Free drive at dim 20 runs into the top levels quickly.
    const EvolutionTrace t = zeno_run(fock_basis(0, 20), uniform_schedule(0.3, {}, 30));
    ASSERT_FALSE(t.ok());
    EXPECT_LT(t.steps_run, 30);
    EXPECT_FALSE(t.records.back().trunc.ok);
    EXPECT_THROW(zeno_step(fock_basis(0, 12), 3.0, {}), TruncationError);
}

TEST(Zeno, RejectsKicksInGuardLevels) {
    EXPECT_THROW(zeno_run(fock_basis(0, 10), uniform_schedule(0.1, {{7, 0.0, std::nullopt}}, 1)), DimensionError);
    EXPECT_THROW(zeno_run(fock_basis(0, 10), Schedule{}), Error);
}

TEST(Zeno, FreeDriveIsDisplacement) {
    const EvolutionTrace t = zeno_run(coherent(-2.0, 40), uniform_schedule(0.1, {}, 20));
    EXPECT_GT(fidelity_pure(t.final_state, coherent(0.0, 40)), 1.0 - 1e-10);
}

TEST(Zeno, EffectiveHamiltonianStructure) {
    const Complex e(0.3, 0.4);
    const CMatrix h = effective_hamiltonian(e, 2, 10).mat();
    EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(std::abs(h(2, 1)), 0.0);
    EXPECT_EQ(std::abs(h(3, 2)), 0.0);
    // Away from s it equals -i(conj(E) a - E a^dag).
    const CMatrix a = oracle::lowering(10);
    const CMatrix full = Complex(0, -1) * (std::conj(e) * a - e * a.adjoint());
    EXPECT_LT(std::abs(h(5, 4) - full(5, 4)), 1e-15);
    EXPECT_LT(std::abs(h(0, 1) - full(0, 1)), 1e-15);
}

TEST(Zeno, StroboscopicRunApproachesZenoLimit) {
    // N steps of beta = B / N with kicks at s = 3; error shrinks as N grows.
    const int dim = 40;
    const FieldState psi0 = fock_basis(0, dim);
    const Complex total(1.5, 0.0);
    double prev = 1.0;
    for (int n : {20, 80, 320}) {
        const EvolutionTrace t = zeno_run(psi0, uniform_schedule(total / double(n), {{3, 0.0, std::nullopt}}, n));
        const FieldState lim = zeno_limit_evolve(psi0, total, 3, 1.0);
        const double err = 1.0 - fidelity_pure(t.final_state, lim);
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(Zeno, ZenoLimitRejectsStraddlingStates) {
    EXPECT_THROW(zeno_limit_evolve(coherent(1.0, 20), 0.1, 1, 1.0), Error);
    EXPECT_NO_THROW(zeno_limit_evolve(fock_basis(0, 20), 0.1, 1, 1.0));
}

TEST(Zeno, TopologicalPhaseIdentity) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 5; ++trial) {
        std::uniform_int_distribution<int> sd(0, 3), pd(1, 10);
        const double r = topological_phase_identity_residual(sd(rng), oracle::random_complex(rng, 1.0),
                                                             oracle::random_complex(rng, 0.1), pd(rng), 70);
        EXPECT_LT(r, 1e-10);
    }
    EXPECT_THROW(topological_phase_identity_residual(1, 5.0, 0.1, 10, 20), TruncationError);
}

TEST(Zeno, SlidingContrast) {
    std::vector<double> v;
    for (int i = 0; i < 100; ++i) v.push_back(2.0 * std::sin(2.0 * M_PI * i / 20.0));
    const auto c = sliding_contrast(v, 20);
    ASSERT_EQ(c.size(), 81u);
    for (double x : c) EXPECT_NEAR(x, 2.0 * 2.0 * std::sin(2.0 * M_PI * 5 / 20.0), 1e-12);
    EXPECT_TRUE(sliding_contrast(v, 200).empty());
    EXPECT_THROW(sliding_contrast(v, 0), Error);
}

TEST(Zeno, TraceCsvFormat) {
    ZenoRunOptions opt;
    const EvolutionTrace t = zeno_run(fock_basis(0, 30), uniform_schedule(0.1, {{6, 0.0, std::nullopt}}, 2), opt);
    std::ostringstream out;
    write_trace_csv(t, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "step,energy,p0,p1,p2,p3,p4,p5,p6,p7,p8,p9,leak");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 12);
    }
    EXPECT_EQ(rows, 3);
    // 17 significant digits round-trip.
    std::ostringstream st;
    write_state_csv(t.final_state, st);
    std::istringstream sin(st.str());
    std::getline(sin, line);
    EXPECT_EQ(line, "index,re,im");
    std::getline(sin, line);
    const double re = std::stod(line.substr(line.find(',') + 1));
    EXPECT_EQ(re, t.final_state[0].real());
}

}  // namespace
}  // namespace qzd
