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

#include "qzd/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "numfmt.hpp"

namespace qzd {

namespace {

bool same_kick(const KickSpec& a, const KickSpec& b) {
    return a.s == b.s && a.gamma == b.gamma && a.dressed == b.dressed;
}

KickSpec make_kick(const TweezerTrajectory& t, Complex gamma, const TweezerOptions& o) {
    KickSpec k{t.s, gamma, std::nullopt};
    if (o.dressed) {
        k.dressed = *o.dressed;
        k.dressed->s = t.s;
    }
    return k;
}

// EC-EC checks pair ECs that are active in the same round; in sequential
// order only one EC exists at a time. Every EC position is checked against the
// protected components.
void check_overlaps(const std::vector<TweezerTrajectory>& ts, const TweezerOptions& o) {
    for (const auto& t : ts) {
        for (Complex g : t.waypoints) {
            for (Complex c : o.protected_components) {
                if (overlapping(g, c)) {
                    throw OverlapError("tweezer EC at (" + internal::fmt17(g.real()) + ", " +
                                       internal::fmt17(g.imag()) + ") overlaps a protected component");
                }
            }
        }
    }
    if (o.allow_ec_overlap || o.order == TweezerOrder::Sequential) return;
    std::size_t rounds = 0;
    for (const auto& t : ts) rounds = std::max(rounds, t.waypoints.size());
    for (std::size_t p = 0; p < rounds; ++p) {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (p >= ts[i].waypoints.size()) continue;
            for (std::size_t j = i + 1; j < ts.size(); ++j) {
                if (p >= ts[j].waypoints.size()) continue;
                if (overlapping(ts[i].waypoints[p], ts[j].waypoints[p])) {
                    throw OverlapError("tweezers " + std::to_string(i) + " and " + std::to_string(j) +
                                       " come closer than the overlap limit at round " + std::to_string(p));
                }
            }
        }
    }
}

FieldState field_of(const EvolutionTrace& trace) {
    if (!trace.ok()) throw TruncationError(*trace.failure);
    return trace.final_state;
}

}  // namespace

TweezerTrajectory linear_trajectory(Complex from, Complex to, int n_steps, double cap, int s) {
    if (n_steps < 1) throw Error("linear_trajectory: n_steps must be >= 1");
    TweezerTrajectory t;
    t.s = s;
    t.waypoints.reserve(n_steps + 1);
    for (int p = 0; p <= n_steps; ++p) {
        t.waypoints.push_back(p == n_steps ? to : from + (to - from) * (double(p) / n_steps));
    }
    check_adiabatic(t, cap);
    return t;
}

void check_adiabatic(const TweezerTrajectory& trajectory, double cap) {
    const auto& w = trajectory.waypoints;
    for (std::size_t p = 0; p + 1 < w.size(); ++p) {
        const double step = std::abs(w[p + 1] - w[p]);
        if (!(step < cap)) {
            throw AdiabaticityError("trajectory step " + std::to_string(p) + " moves " + internal::fmt17(step) +
                                    ", cap is " + internal::fmt17(cap));
        }
    }
}

bool overlapping(Complex a, Complex b, double tol) { return std::exp(-0.5 * std::norm(a - b)) > tol; }

Schedule tweezer_schedule(const std::vector<TweezerTrajectory>& trajectories, const TweezerOptions& options) {
    Schedule schedule;
    for (const auto& t : trajectories) {
        if (t.waypoints.empty()) throw Error("tweezer trajectory has no waypoints");
        if (t.kicks_per_step < 1) throw Error("tweezer kicks_per_step must be >= 1");
    }
    if (options.order == TweezerOrder::Sequential) {
        for (const auto& t : trajectories) {
            for (Complex g : t.waypoints) {
                for (int r = 0; r < t.kicks_per_step; ++r) {
                    schedule.push_back(Step{options.beta_free, {make_kick(t, g, options)}});
                }
            }
        }
        return schedule;
    }
    std::size_t rounds = 0;
    for (const auto& t : trajectories) rounds = std::max(rounds, t.waypoints.size());
    for (std::size_t p = 0; p < rounds; ++p) {
        int reps = 1;
        for (const auto& t : trajectories) reps = std::max(reps, t.kicks_per_step);
        for (int r = 0; r < reps; ++r) {
            Step st{options.beta_free, {}};
            for (const auto& t : trajectories) {
                if (p >= t.waypoints.size() || r >= t.kicks_per_step) continue;
                KickSpec k = make_kick(t, t.waypoints[p], options);
                if (!st.kicks.empty() && same_kick(st.kicks.back(), k)) continue;
                st.kicks.push_back(std::move(k));
            }
            schedule.push_back(std::move(st));
        }
    }
    return schedule;
}

TweezerResult tweezer_run(const FieldState& state, const std::vector<TweezerTrajectory>& trajectories,
                          const TweezerOptions& options) {
    if (trajectories.empty()) throw Error("tweezer_run: no trajectories");
    for (const auto& t : trajectories) check_adiabatic(t, options.adiabatic_cap);
    check_overlaps(trajectories, options);
    EvolutionTrace trace = zeno_run(state, tweezer_schedule(trajectories, options), options.run);
    FieldState final_state = field_of(trace);
    return TweezerResult{std::move(final_state), std::move(trace)};
}

FieldState stretch_cat(const FieldState& state, Complex gamma, Complex beta, int n_steps) {
    if (n_steps < 0) throw Error("stretch_cat: n_steps must be >= 0");
    if (n_steps == 0) return state;
    ZenoRunOptions run;
    run.record_every = n_steps;
    return field_of(zeno_run(state, uniform_schedule(beta, {KickSpec{1, gamma, std::nullopt}}, n_steps), run));
}

FieldState stretched_cat_target(Complex gamma, Complex alpha, Complex beta, int n_steps, int dim) {
    const double n = n_steps;
    const Complex held = std::polar(1.0, 2.0 * n * std::imag(beta * std::conj(gamma)));
    const Complex moved = std::polar(1.0, n * std::imag(beta * std::conj(alpha)));
    return coherent_superposition({gamma, alpha + n * beta}, {held, moved}, dim);
}

StretchResult stretch_cat(Complex gamma, Complex alpha, Complex beta, int n_steps, int dim, double overlap_tol) {
    if (std::exp(-std::norm(gamma - alpha)) >= overlap_tol) {
        throw OverlapError("stretch_cat: held and moving components overlap");
    }
    const double reach = std::max(std::abs(gamma), std::abs(alpha) + n_steps * std::abs(beta));
    if (dim < min_truncation_dim(reach)) {
        throw TruncationError("stretch_cat: dim " + std::to_string(dim) + " below " +
                              std::to_string(min_truncation_dim(reach)));
    }
    const FieldState input = coherent_superposition({gamma, alpha}, {1.0, 1.0}, dim);
    FieldState out = stretch_cat(input, gamma, beta, n_steps);
    FieldState target = stretched_cat_target(gamma, alpha, beta, n_steps, dim);
    const double f = fidelity_pure(out, target);
    return StretchResult{std::move(out), std::move(target), f};
}

double energy_matched_cat_amplitude(double target_energy) {
    if (!(target_energy > 0.0)) throw Error("energy_matched_cat_amplitude: target must be > 0");
    // x tanh x is increasing in x = alpha^2 and exceeds the target at x = target + 1.
    double lo = 0.0;
    double hi = std::sqrt(target_energy + 1.0);
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double x = mid * mid;
        (x * std::tanh(x) < target_energy ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

CrushSpec crush_spec(const FieldState& initial, Complex center, Complex axis, double offset, int n_steps) {
    if (std::abs(axis) == 0.0) throw Error("crush_spec: axis must be nonzero");
    const Complex u = axis / std::abs(axis);
    // Crush trajectories may be long; adiabaticity is checked by crush_vacuum.
    const double cap = std::numeric_limits<double>::infinity();
    return CrushSpec{initial, linear_trajectory(center + offset * u, center, n_steps, cap),
                     linear_trajectory(center - offset * u, center, n_steps, cap)};
}

CrushResult crush_vacuum(const CrushSpec& spec, const ZenoRunOptions& run) {
    TweezerOptions opt;
    opt.order = TweezerOrder::RoundRobin;
    opt.allow_ec_overlap = true;
    opt.run = run;
    TweezerResult tr = tweezer_run(spec.initial, {spec.first, spec.second}, opt);

    CrushResult res{tr.final_state, std::move(tr.trace)};
    res.energy = mean_energy(res.final_state);
    const Complex axis = spec.first.waypoints.front() - spec.second.waypoints.front();
    const Complex u = std::abs(axis) > 0.0 ? axis / std::abs(axis) : Complex(1.0);
    if (res.energy > 0.0) {
        res.matched_alpha = energy_matched_cat_amplitude(res.energy);
        const int dim = res.final_state.dim();
        const Complex center = spec.first.waypoints.back();
        const Complex a = res.matched_alpha * u;
        if (dim >= min_truncation_dim(std::abs(center) + res.matched_alpha)) {
            const FieldState cat = coherent_superposition({center + a, center - a}, {1.0, 1.0}, dim);
            res.fidelity_vs_matched_cat = fidelity_pure(res.final_state, cat);
        }
    }
    return res;
}

MultiCatResult multi_cat_factory(const MultiCatPlan& plan, const ZenoRunOptions& run) {
    const int n = plan.n_components;
    if (n < 1 || (n & (n - 1)) != 0) throw Error("multi_cat_factory: n_components must be a power of two");
    MultiCatResult res{fock_basis(0, plan.dim), 0, {Complex(0.0)}};
    double separation = 0.0;
    Complex axis(1.0, 0.0);
    while (static_cast<int>(res.centers.size()) < n) {
        std::vector<Complex> next;
        for (Complex c : res.centers) {
            const CrushSpec spec = crush_spec(res.final_state, c, axis, plan.offset, plan.steps);
            CrushResult cr = crush_vacuum(spec, run);
            res.final_state = cr.final_state;
            ++res.crushes;
            // Every crush splits a vacuum-like component the same way, so the
            // first crush fixes the separation used for all later centres.
            if (separation == 0.0) separation = cr.matched_alpha;
            next.push_back(c + separation * axis);
            next.push_back(c - separation * axis);
        }
        res.centers = std::move(next);
        axis *= Complex(0.0, 1.0);
    }
    return res;
}

PulseParams realistic_pulse(const RealisticTweezerPlan& plan) {
    if (plan.steps_per_component < 1) throw Error("realistic tweezer: steps_per_component must be >= 1");
    PulseParams p = plan.pulse;
    p.s = 1;
    if (plan.total_duration > 0.0) {
        const int kicks = 2 * plan.steps_per_component;
        p.rabi_drive = kicks * p.theta * std::sqrt(2.0) / plan.total_duration;
    }
    p.validate();
    return p;
}

TimedSchedule realistic_tweezer_schedule(const RealisticTweezerPlan& plan) {
    const PulseParams pulse = realistic_pulse(plan);
    const double cap = std::numeric_limits<double>::infinity();
    const int n = plan.steps_per_component;
    TweezerTrajectory up = linear_trajectory(plan.alpha_from, plan.alpha_to, n, cap);
    TweezerTrajectory down = linear_trajectory(-plan.alpha_from, -plan.alpha_to, n, cap);
    up.waypoints.erase(up.waypoints.begin());
    down.waypoints.erase(down.waypoints.begin());
    TweezerOptions opt;
    opt.order = plan.order;
    opt.dressed = pulse;
    TimedSchedule out;
    for (const Step& st : tweezer_schedule({up, down}, opt)) out.push_back(TimedStep{0.0, 0.0, st.kicks});
    return out;
}

RealisticTweezerResult realistic_tweezer(const RealisticTweezerPlan& plan, const LindbladParams& params,
                                         bool compare_undamped) {
    const int dim = plan.dim;
    const double reach = std::max(std::abs(plan.alpha_from), std::abs(plan.alpha_to));
    if (dim < min_truncation_dim(reach)) {
        throw TruncationError("realistic tweezer: dim " + std::to_string(dim) + " below " +
                              std::to_string(min_truncation_dim(reach)));
    }
    const TimedSchedule schedule = realistic_tweezer_schedule(plan);
    const DensityMatrix rho0 = DensityMatrix::from_pure(cat_state(plan.alpha_from, 1.0, dim));
    MasterOptions mo;
    mo.target = cat_state(plan.alpha_to, 1.0, dim);
    MasterResult damped = evolve_master(rho0, schedule, params, mo);
    RealisticTweezerResult res{std::move(damped), *mo.target, 0.0, std::nullopt, 0.0, PulseParams{}};
    res.fidelity = fidelity_mixed(res.damped.rho, res.target);
    res.duration = schedule_duration(schedule);
    res.pulse = realistic_pulse(plan);
    if (compare_undamped) {
        LindbladParams off = params;
        off.t_c = std::numeric_limits<double>::infinity();
        off.dt = 0.0;
        res.fidelity_undamped = fidelity_mixed(evolve_master(rho0, schedule, off, mo).rho, res.target);
    }
    return res;
}

}  // namespace qzd
