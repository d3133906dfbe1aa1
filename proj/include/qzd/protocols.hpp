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

// Phase-space tweezers built from displaced s = 1 kicks, and the protocols on
// top of them: stretched cats, vacuum crush, multi-component cats.

#ifndef QZD_PROTOCOLS_HPP
#define QZD_PROTOCOLS_HPP

#include <optional>
#include <vector>

#include "qzd/fock.hpp"
#include "qzd/openquantum.hpp"
#include "qzd/zeno.hpp"

namespace qzd {

inline constexpr double kDefaultAdiabaticCap = 0.1;
/// Two coherent components (or an EC and a component) overlap when
/// exp(-|delta|^2 / 2) exceeds this.
inline constexpr double kOverlapTol = 1e-3;

/// EC centres visited by one tweezer. One kick is issued at every waypoint,
/// the first one included.
struct TweezerTrajectory {
    int s = 1;
    std::vector<Complex> waypoints;
    int kicks_per_step = 1;
};

/// n_steps + 1 evenly spaced waypoints from `from` to `to`. Throws
/// AdiabaticityError when the spacing is not below `cap`.
TweezerTrajectory linear_trajectory(Complex from, Complex to, int n_steps, double cap = kDefaultAdiabaticCap,
                                    int s = 1);

/// Throws AdiabaticityError if any |waypoint step| >= cap.
void check_adiabatic(const TweezerTrajectory& trajectory, double cap = kDefaultAdiabaticCap);

/// Gaussian-overlap heuristic for two phase-space points.
bool overlapping(Complex a, Complex b, double tol = kOverlapTol);

enum class TweezerOrder {
    /// All kicks of the first trajectory, then the second, and so on.
    Sequential,
    /// One kick per trajectory per round.
    RoundRobin,
};

struct TweezerOptions {
    Complex beta_free = 0.0;
    TweezerOrder order = TweezerOrder::RoundRobin;
    double adiabatic_cap = kDefaultAdiabaticCap;
    /// Components no EC may come near.
    std::vector<Complex> protected_components;
    /// Skip the EC-EC overlap check (crush trajectories meet on purpose).
    bool allow_ec_overlap = false;
    /// Use this pulse for every kick instead of ideal kicks.
    std::optional<PulseParams> dressed;
    ZenoRunOptions run;
};

/// Kick schedule for a set of trajectories. In round-robin order a round is
/// one step holding every trajectory's kick; a kick identical to the previous
/// one in the round is issued once. In sequential order every kick is a step.
Schedule tweezer_schedule(const std::vector<TweezerTrajectory>& trajectories, const TweezerOptions& options = {});

struct TweezerResult {
    FieldState final_state;
    EvolutionTrace trace;
};

/// Validates adiabaticity and overlaps, then runs the tweezer schedule.
/// Throws TruncationError if the run hits the guard levels.
TweezerResult tweezer_run(const FieldState& state, const std::vector<TweezerTrajectory>& trajectories,
                          const TweezerOptions& options = {});

/// Holds the component at gamma with an s = 1 EC while every other component
/// moves by beta per step, n_steps times.
FieldState stretch_cat(const FieldState& state, Complex gamma, Complex beta, int n_steps);

/// e^{2iN Im(beta conj(gamma))}|gamma> + e^{iN Im(beta conj(alpha))}|alpha + N beta>,
/// normalized. The first factor is the phase the held component collects.
FieldState stretched_cat_target(Complex gamma, Complex alpha, Complex beta, int n_steps, int dim);

struct StretchResult {
    FieldState final_state;
    FieldState target;
    double fidelity = 0.0;
};

/// Stretches (|gamma> + |alpha>)/norm and compares with the analytic target.
/// Throws OverlapError if |<gamma|alpha>|^2 = e^{-|gamma-alpha|^2} >= overlap_tol.
StretchResult stretch_cat(Complex gamma, Complex alpha, Complex beta, int n_steps, int dim,
                          double overlap_tol = kOverlapTol);

/// Real alpha >= 0 with alpha^2 tanh(alpha^2) = target_energy, by bisection.
double energy_matched_cat_amplitude(double target_energy);

struct CrushSpec {
    FieldState initial;
    TweezerTrajectory first;
    TweezerTrajectory second;
};

/// Two ECs moving simultaneously from +-offset*axis to `center` in n_steps.
CrushSpec crush_spec(const FieldState& initial, Complex center, Complex axis, double offset, int n_steps);

struct CrushResult {
    FieldState final_state;
    EvolutionTrace trace;
    double energy = 0.0;
    double matched_alpha = 0.0;
    /// Fidelity with the even cat of equal energy oriented along the crush axis.
    double fidelity_vs_matched_cat = 0.0;
};

CrushResult crush_vacuum(const CrushSpec& spec, const ZenoRunOptions& run = {});

struct MultiCatPlan {
    int n_components = 4;
    double offset = 2.5;
    int steps = 200;
    int dim = 80;
};

struct MultiCatResult {
    FieldState final_state;
    int crushes = 0;
    /// Expected component centres after the last crush.
    std::vector<Complex> centers;
};

/// Crushes the vacuum, then crushes every resulting component again, the
/// crush axis alternating between the real and imaginary directions.
/// n_components must be a power of two.
MultiCatResult multi_cat_factory(const MultiCatPlan& plan, const ZenoRunOptions& run = {});

/// Even cat |a> + |-a> stretched to |b> + |-b> by two s = 1 tweezers with
/// dressed kicks under cavity damping. Each component takes
/// steps_per_component moves; a kick is issued at every new waypoint.
struct RealisticTweezerPlan {
    double alpha_from = 2.0;
    double alpha_to = 3.0;
    int steps_per_component = 5;
    /// omega, theta and include_minus_branch are used; s is forced to 1.
    PulseParams pulse;
    /// When > 0, rabi_drive is chosen so the pulses fill this many seconds.
    double total_duration = 3.4e-3;
    TweezerOrder order = TweezerOrder::RoundRobin;
    int dim = 40;
};

/// Pulse actually used by the plan, with rabi_drive resolved.
PulseParams realistic_pulse(const RealisticTweezerPlan& plan);
TimedSchedule realistic_tweezer_schedule(const RealisticTweezerPlan& plan);

struct RealisticTweezerResult {
    MasterResult damped;
    FieldState target;
    double fidelity = 0.0;
    std::optional<double> fidelity_undamped;
    double duration = 0.0;
    PulseParams pulse;
};

RealisticTweezerResult realistic_tweezer(const RealisticTweezerPlan& plan, const LindbladParams& params,
                                         bool compare_undamped = true);

}  // namespace qzd

#endif  // QZD_PROTOCOLS_HPP
