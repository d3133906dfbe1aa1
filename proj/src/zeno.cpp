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

#include "qzd/zeno.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <tuple>

#include "numfmt.hpp"

namespace qzd {

namespace {

// Per-run cache of flip vectors D(gamma)|s> and dressed pulse blocks. Owned by
// one run, so concurrent runs share nothing mutable.
class KickCache {
   public:
    explicit KickCache(int dim) : dim_(dim) {}

    const CVector& flip_vector(int s, Complex gamma) {
        const auto key = std::make_tuple(s, gamma.real(), gamma.imag());
        auto it = vecs_.find(key);
        if (it == vecs_.end()) it = vecs_.emplace(key, displaced_fock(s, gamma, dim_)).first;
        return it->second;
    }

    const DressedKick& dressed(const PulseParams& p) {
        for (const auto& k : dressed_) {
            if (k->params() == p) return *k;
        }
        dressed_.push_back(std::make_unique<DressedKick>(p, dim_));
        return *dressed_.back();
    }

   private:
    int dim_;
    std::map<std::tuple<int, double, double>, CVector> vecs_;
    std::vector<std::unique_ptr<DressedKick>> dressed_;
};

void reflect(CVector& x, const CVector& v) {
    const Complex overlap = v.dot(x);
    if (overlap != Complex(0.0)) x.noalias() -= (2.0 * overlap) * v;
}

void validate_kick(const KickSpec& k, int dim, int guard_levels) {
    if (k.s < 0 || k.s >= dim - guard_levels) {
        throw DimensionError("kick s = " + std::to_string(k.s) + " must lie in [0, dim - guard_levels) = [0, " +
                             std::to_string(dim - guard_levels) + ")");
    }
    if (k.dressed) {
        k.dressed->validate();
        if (k.dressed->s != k.s) throw Error("dressed kick: pulse s differs from kick s");
    }
}

bool has_dressed(const Schedule& schedule) {
    for (const Step& st : schedule) {
        for (const KickSpec& k : st.kicks) {
            if (k.dressed) return true;
        }
    }
    return false;
}

// Pure-field step without renormalization. Returns true if a dressed kick
// removed norm (atom left h).
bool advance_field(CVector& psi, const Step& step, KickCache& cache) {
    psi = apply_displacement(step.displacement, psi);
    bool lossy = false;
    for (const KickSpec& k : step.kicks) {
        if (k.dressed) {
            psi = cache.dressed(*k.dressed).apply_conditioned(psi, k.gamma);
            lossy = true;
        } else {
            reflect(psi, cache.flip_vector(k.s, k.gamma));
        }
    }
    return lossy;
}

void advance_joint(AtomFieldState& js, const Step& step, KickCache& cache) {
    js.displace(step.displacement);
    for (const KickSpec& k : step.kicks) {
        if (k.dressed) {
            cache.dressed(*k.dressed).apply(js, k.gamma);
        } else {
            const CVector& v = cache.flip_vector(k.s, k.gamma);
            reflect(js.h, v);
            reflect(js.e, v);
            reflect(js.g, v);
        }
    }
}

TruncationReport joint_truncation(const AtomFieldState& js, int guard, double tol) {
    TruncationReport r;
    r.guard_levels = guard;
    r.top_population = (js.h.tail(guard).squaredNorm() + js.e.tail(guard).squaredNorm() +
                        js.g.tail(guard).squaredNorm()) /
                       js.norm2();
    r.ok = r.top_population < tol;
    return r;
}

}  // namespace

Schedule uniform_schedule(Complex beta, const std::vector<KickSpec>& kicks, int steps) {
    if (steps < 0) throw Error("uniform_schedule: steps must be >= 0");
    return Schedule(static_cast<std::size_t>(steps), Step{beta, kicks});
}

Operator kick_op(int s, int dim) {
    if (s < 0 || s >= dim) throw DimensionError("kick_op: s outside [0, dim)");
    CMatrix u = CMatrix::Identity(dim, dim);
    u(s, s) = -1.0;
    return Operator(std::move(u));
}

Operator displaced_kick(const KickSpec& spec, int dim) {
    if (spec.s < 0 || spec.s >= dim) throw DimensionError("displaced_kick: s outside [0, dim)");
    CMatrix inner;
    if (spec.dressed) {
        inner = CMatrix(conditioned_amplitudes(*spec.dressed, dim).asDiagonal());
    } else {
        if (spec.gamma == Complex(0.0)) return kick_op(spec.s, dim);
        const CVector v = displaced_fock(spec.s, spec.gamma, dim);
        return Operator(CMatrix::Identity(dim, dim) - 2.0 * v * v.adjoint());
    }
    if (spec.gamma == Complex(0.0)) return Operator(std::move(inner));
    const CMatrix d = displacement_op(spec.gamma, dim).mat();
    return Operator(d * inner * d.adjoint());
}

FieldState zeno_step(const FieldState& state, Complex beta, const std::vector<KickSpec>& kicks,
                     int guard_levels, double leak_tol) {
    const int dim = state.dim();
    for (const KickSpec& k : kicks) validate_kick(k, dim, guard_levels);
    KickCache cache(dim);
    CVector psi = state.amps();
    advance_field(psi, Step{beta, kicks}, cache);
    FieldState out(std::move(psi));
    const TruncationReport r = truncation_check(out, guard_levels, leak_tol);
    if (!r.ok) {
        throw TruncationError("zeno_step: guard-level population " + internal::fmt17(r.top_population) +
                              " exceeds leak_tol");
    }
    return out;
}

EvolutionTrace zeno_run(const FieldState& state, const Schedule& schedule, const ZenoRunOptions& options) {
    if (schedule.empty()) throw Error("zeno_run: schedule is empty");
    if (options.record_every < 1) throw Error("zeno_run: record_every must be >= 1");
    const int dim = state.dim();
    const int guard = options.guard_levels;
    if (guard < 0 || guard >= dim) throw DimensionError("zeno_run: guard_levels outside [0, dim)");
    for (const Step& st : schedule) {
        for (const KickSpec& k : st.kicks) validate_kick(k, dim, guard);
    }
    const bool joint = options.atom_mode == AtomMode::Coherent && has_dressed(schedule);

    KickCache cache(dim);
    AtomFieldState js = AtomFieldState::atom_in_h(state);
    CVector psi = state.amps();
    EvolutionTrace trace{{}, state, 0, 0, 0.0, std::nullopt};

    auto record = [&](int step, const FieldState& field, const TruncationReport& tr, double leak) {
        TraceRecord rec;
        rec.step = step;
        rec.probs = photon_distribution(field);
        rec.energy = mean_energy(field);
        rec.trunc = tr;
        rec.mean_amplitude = mean_amplitude(field);
        rec.atom_leak = leak;
        if (options.keep_states) rec.state = field;
        trace.records.push_back(std::move(rec));
    };

    record(0, state, truncation_check(state, guard, options.leak_tol), 0.0);

    const int n = static_cast<int>(schedule.size());
    for (int k = 0; k < n; ++k) {
        TruncationReport tr;
        double leak = 0.0;
        double norm2 = 0.0;
        bool lossy = false;
        if (joint) {
            advance_joint(js, schedule[k], cache);
            norm2 = js.norm2();
            const double scale = 1.0 / std::sqrt(norm2);
            js.h *= scale;
            js.e *= scale;
            js.g *= scale;
            tr = joint_truncation(js, guard, options.leak_tol);
            leak = js.leaked_population();
        } else {
            lossy = advance_field(psi, schedule[k], cache);
            norm2 = psi.squaredNorm();
            if (lossy) leak = 1.0 - norm2;
            psi /= std::sqrt(norm2);
            tr = truncation_check(psi, guard, options.leak_tol);
        }
        if (!lossy && !joint) trace.max_norm_drift = std::max(trace.max_norm_drift, std::abs(norm2 - 1.0));
        ++trace.renormalizations;

        const bool h_empty = joint && js.h.squaredNorm() == 0.0;
        if (h_empty) {
            trace.failure = "step " + std::to_string(k + 1) + ": no amplitude left with the atom in h";
            break;
        }
        FieldState field = joint ? js.conditioned_on_h() : FieldState(psi);
        trace.steps_run = k + 1;
        trace.final_state = field;
        const bool last = k + 1 == n;
        if (!tr.ok || last || (k + 1) % options.record_every == 0) record(k + 1, field, tr, leak);
        if (!tr.ok) {
            trace.failure = "step " + std::to_string(k + 1) + ": guard-level population " +
                            internal::fmt17(tr.top_population) + " exceeds leak_tol " +
                            internal::fmt17(options.leak_tol);
            break;
        }
    }
    return trace;
}

Operator effective_hamiltonian(Complex drive_amp, int s, int dim) {
    if (s < 0 || s >= dim) throw DimensionError("effective_hamiltonian: s outside [0, dim)");
    CMatrix h = CMatrix::Zero(dim, dim);
    const Complex i(0.0, 1.0);
    for (int n = 0; n + 1 < dim; ++n) {
        if (n == s || n + 1 == s) continue;
        const double r = std::sqrt(double(n + 1));
        h(n + 1, n) = i * drive_amp * r;
        h(n, n + 1) = std::conj(h(n + 1, n));
    }
    return Operator(std::move(h));
}

FieldState zeno_limit_evolve(const FieldState& state, Complex drive_amp, int s, double t, double leak_tol) {
    const int dim = state.dim();
    if (s < 0 || s >= dim) throw DimensionError("zeno_limit_evolve: s outside [0, dim)");
    const CVector& v = state.amps();
    const double below = v.head(s).squaredNorm();
    const double at = std::norm(v(s));
    const double above = v.tail(dim - s - 1).squaredNorm();
    const int occupied = int(below > leak_tol) + int(at > leak_tol) + int(above > leak_tol);
    if (occupied > 1) throw Error("zeno_limit_evolve: initial state straddles the kicked level s");

    const CMatrix h = effective_hamiltonian(drive_amp, s, dim).mat();
    CVector out = CVector::Zero(dim);
    out(s) = v(s);
    auto evolve_block = [&](int start, int len) {
        if (len <= 0) return;
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.block(start, start, len, len));
        CVector phases(len);
        for (int k = 0; k < len; ++k) phases(k) = std::polar(1.0, -solver.eigenvalues()(k) * t);
        const CMatrix& q = solver.eigenvectors();
        out.segment(start, len) = q * phases.asDiagonal() * (q.adjoint() * v.segment(start, len));
    };
    evolve_block(0, s);
    evolve_block(s + 1, dim - s - 1);
    return FieldState(std::move(out));
}

double topological_phase_identity_residual(int s, Complex gamma, Complex beta, int p, int dim) {
    if (p < 0) throw Error("topological_phase_identity_residual: p must be >= 0");
    const double reach = std::abs(gamma) + p * std::abs(beta);
    int k_max = 0;
    while (k_max < dim) {
        const double r = std::sqrt(double(k_max)) + reach;
        if (r * r + 6.0 * r + 10.0 > dim) break;
        ++k_max;
    }
    if (k_max == 0) throw TruncationError("topological_phase_identity_residual: dim too small for the reach");

    const CMatrix d = displacement_op(beta, dim).mat();
    const CMatrix step_lhs = displaced_kick(KickSpec{s, gamma, std::nullopt}, dim).mat() * d;
    const CMatrix step_rhs = kick_op(s, dim).mat() * d;
    CMatrix lhs = CMatrix::Identity(dim, dim);
    CMatrix core = CMatrix::Identity(dim, dim);
    for (int k = 0; k < p; ++k) {
        lhs = step_lhs * lhs;
        core = step_rhs * core;
    }
    const CMatrix dg = displacement_op(gamma, dim).mat();
    const CMatrix dmg = displacement_op(-gamma, dim).mat();
    const Complex phase = std::polar(1.0, 2.0 * p * std::imag(beta * std::conj(gamma)));
    const CMatrix rhs = dg * core * dmg * phase;
    return (lhs - rhs).topLeftCorner(k_max, k_max).cwiseAbs().maxCoeff();
}

std::vector<double> sliding_contrast(const std::vector<double>& values, int window) {
    if (window < 1) throw Error("sliding_contrast: window must be >= 1");
    std::vector<double> out;
    const int n = static_cast<int>(values.size());
    for (int i = 0; i + window <= n; ++i) {
        const auto [lo, hi] = std::minmax_element(values.begin() + i, values.begin() + i + window);
        out.push_back(*hi - *lo);
    }
    return out;
}

void write_trace_csv(const EvolutionTrace& trace, std::ostream& out) {
    out << "step,energy";
    for (int k = 0; k < 10; ++k) out << ",p" << k;
    out << ",leak\n";
    for (const TraceRecord& r : trace.records) {
        out << r.step << ',' << internal::fmt17(r.energy);
        for (int k = 0; k < 10; ++k) out << ',' << internal::fmt17(k < r.probs.size() ? r.probs(k) : 0.0);
        out << ',' << internal::fmt17(r.trunc.top_population) << '\n';
    }
}

void write_trace_csv(const EvolutionTrace& trace, const std::string& path) {
    auto out = internal::open_output(path);
    write_trace_csv(trace, out);
    internal::finish_output(out, path);
}

void write_state_csv(const FieldState& state, std::ostream& out) {
    out << "index,re,im\n";
    for (int n = 0; n < state.dim(); ++n) {
        out << n << ',' << internal::fmt17(state[n].real()) << ',' << internal::fmt17(state[n].imag()) << '\n';
    }
}

void write_state_csv(const FieldState& state, const std::string& path) {
    auto out = internal::open_output(path);
    write_state_csv(state, out);
    internal::finish_output(out, path);
}

}  // namespace qzd
