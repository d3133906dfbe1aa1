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

// Stroboscopic Zeno engine. One step maps psi -> (prod kicks) D(beta) psi.

#ifndef QZD_ZENO_HPP
#define QZD_ZENO_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qzd/atomkick.hpp"
#include "qzd/fock.hpp"

namespace qzd {

/// Kick flipping the sign of D(gamma)|s>. Ideal unless `dressed` is set.
struct KickSpec {
    int s = 0;
    Complex gamma = 0.0;
    std::optional<PulseParams> dressed;
};

struct Step {
    Complex displacement = 0.0;
    std::vector<KickSpec> kicks;
};

using Schedule = std::vector<Step>;

/// `steps` copies of the same step.
Schedule uniform_schedule(Complex beta, const std::vector<KickSpec>& kicks, int steps);

/// 1 - 2|s><s|
Operator kick_op(int s, int dim);

/// D(gamma) U_s D(-gamma) for ideal kicks. For dressed kicks, the field map
/// conditioned on the atom staying in h, D(gamma) diag(c) D(-gamma).
Operator displaced_kick(const KickSpec& spec, int dim);

/// One step on a pure field. Dressed kicks use a fresh atom and condition on h.
/// Throws TruncationError if the guard levels exceed leak_tol afterwards.
FieldState zeno_step(const FieldState& state, Complex beta, const std::vector<KickSpec>& kicks,
                     int guard_levels = kDefaultGuardLevels, double leak_tol = kDefaultLeakTol);

/// How dressed kicks treat the atom.
enum class AtomMode {
    /// One joint atom-field state carried through the run; the reported field
    /// is the component with the atom in h.
    Coherent,
    /// Fresh atom per kick, field conditioned on h and renormalized.
    Postselected,
};

struct ZenoRunOptions {
    int record_every = 1;
    int guard_levels = kDefaultGuardLevels;
    double leak_tol = kDefaultLeakTol;
    AtomMode atom_mode = AtomMode::Coherent;
    /// Store the field in every record.
    bool keep_states = false;
};

struct TraceRecord {
    int step = 0;
    double energy = 0.0;
    RVector probs;
    TruncationReport trunc;
    Complex mean_amplitude = 0.0;
    /// Population that left h (0 for ideal kicks).
    double atom_leak = 0.0;
    std::optional<FieldState> state;
};

struct EvolutionTrace {
    /// Step 0 (input) and every record_every-th step, plus the last step.
    std::vector<TraceRecord> records;
    FieldState final_state;
    int steps_run = 0;
    int renormalizations = 0;
    /// Largest |norm^2 - 1| removed by a renormalization.
    double max_norm_drift = 0.0;
    /// Set when the run stopped early; records hold the partial trace.
    std::optional<std::string> failure;

    bool ok() const { return !failure.has_value(); }
};

EvolutionTrace zeno_run(const FieldState& state, const Schedule& schedule,
                        const ZenoRunOptions& options = {});

/// -i(conj(E) a - E a^dag) with every element coupling |s> to |s+-1> zeroed.
Operator effective_hamiltonian(Complex drive_amp, int s, int dim);

/// exp(-i H_Z t) psi, evolved block by block. Throws Error when more than one
/// of the blocks {<s}, {s}, {>s} holds population above leak_tol.
FieldState zeno_limit_evolve(const FieldState& state, Complex drive_amp, int s, double t,
                             double leak_tol = kDefaultLeakTol);

/// max |LHS - RHS| of
///   [U_s(gamma) D(beta)]^p = D(gamma) [U_s D(beta)]^p D(-gamma) e^{2ip Im(beta conj(gamma))}
/// over the leading K x K block, K counting the Fock levels k whose reach
/// (sqrt(k) + |gamma| + p|beta|) satisfies the truncation rule at dim.
double topological_phase_identity_residual(int s, Complex gamma, Complex beta, int p, int dim);

/// max - min of `values` over each window [i, i + window).
std::vector<double> sliding_contrast(const std::vector<double>& values, int window);

/// CSV `step,energy,p0,...,p9,leak`, 17 significant digits.
void write_trace_csv(const EvolutionTrace& trace, std::ostream& out);
void write_trace_csv(const EvolutionTrace& trace, const std::string& path);

/// CSV `index,re,im`, one row per Fock amplitude.
void write_state_csv(const FieldState& state, std::ostream& out);
void write_state_csv(const FieldState& state, const std::string& path);

}  // namespace qzd

#endif  // QZD_ZENO_HPP
