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

#include "qzd/app.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "numfmt.hpp"

namespace qzd::app {

namespace {

namespace fs = std::filesystem;

const std::vector<std::pair<Protocol, std::string>>& protocol_table() {
    static const std::vector<std::pair<Protocol, std::string>> table = {
        {Protocol::ZenoConfine, "zeno_confine"},     {Protocol::ZenoUpper, "zeno_upper"},
        {Protocol::Tangential, "tangential"},        {Protocol::Fig3Revival, "fig3_revival"},
        {Protocol::TweezerStretch, "tweezer_stretch"}, {Protocol::TweezerMove, "tweezer_move"},
        {Protocol::Crush, "crush"},                  {Protocol::FourCat, "four_cat"},
        {Protocol::Realistic, "realistic"},
    };
    return table;
}

bool is_uniform_kick_protocol(Protocol p) {
    return p == Protocol::ZenoConfine || p == Protocol::ZenoUpper || p == Protocol::Tangential ||
           p == Protocol::Fig3Revival;
}

// Collects every problem in a config before anything runs.
class Reader {
   public:
    Reader(const Json& j, std::string prefix, std::vector<std::string>& errors)
        : j_(j), prefix_(std::move(prefix)), errors_(errors) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

    void known(const std::set<std::string>& keys) {
        if (!j_.is_object()) return;
        for (const auto& [k, v] : j_.items()) {
            if (!keys.count(k)) fail(k, "unknown key");
        }
    }

    void require(const char* key) {
        if (!has(key)) fail(key, "missing required key");
    }

    template <typename T>
    T get(const char* key, T fallback) {
        if (!has(key)) return fallback;
        const Json& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::runtime_error("expected true or false");
            } else if constexpr (std::is_same_v<T, int>) {
                if (!v.is_number_integer()) throw std::runtime_error("expected an integer");
            } else if constexpr (std::is_arithmetic_v<T>) {
                if (!v.is_number()) throw std::runtime_error("expected a number");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::runtime_error("expected a string");
            }
            return v.get<T>();
        } catch (const std::exception& e) {
            fail(key, e.what());
            return fallback;
        }
    }

    Complex complex(const char* key, Complex fallback) {
        if (!has(key)) return fallback;
        return parse_complex(j_.at(key), key, fallback);
    }

    std::vector<Complex> complex_list(const char* key) {
        std::vector<Complex> out;
        if (!has(key)) return out;
        const Json& v = j_.at(key);
        if (!v.is_array()) {
            fail(key, "expected an array of complex numbers");
            return out;
        }
        for (const Json& e : v) out.push_back(parse_complex(e, key, 0.0));
        return out;
    }

    std::vector<int> int_list(const char* key) {
        std::vector<int> out;
        if (!has(key)) return out;
        const Json& v = j_.at(key);
        if (!v.is_array()) {
            fail(key, "expected an array of integers");
            return out;
        }
        for (const Json& e : v) {
            if (!e.is_number_integer()) {
                fail(key, "expected an array of integers");
                return {};
            }
            out.push_back(e.get<int>());
        }
        return out;
    }

    const Json* child(const char* key) const { return has(key) ? &j_.at(key) : nullptr; }

    void fail(const std::string& key, const std::string& what) {
        errors_.push_back((key.empty() ? prefix_ : prefix_ + key) + ": " + what);
    }
    void check(bool ok, const std::string& key, const std::string& what) {
        if (!ok) fail(key, what);
    }
    const std::string& prefix() const { return prefix_; }

   private:
    // A complex number is a number, [re, im] or {"re": .., "im": ..}.
    Complex parse_complex(const Json& v, const char* key, Complex fallback) {
        if (v.is_number()) return v.get<double>();
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            return {v[0].get<double>(), v[1].get<double>()};
        }
        if (v.is_object() && v.contains("re") && v.contains("im") && v["re"].is_number() && v["im"].is_number()) {
            return {v["re"].get<double>(), v["im"].get<double>()};
        }
        fail(key, "expected a complex number: x, [re, im] or {\"re\": x, \"im\": y}");
        return fallback;
    }

    const Json& j_;
    std::string prefix_;
    std::vector<std::string>& errors_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string step_tag(int step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "step_%04d", step);
    return buf;
}

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json truncation_json(const TruncationReport& r) {
    return Json{{"top_population", r.top_population}, {"guard_levels", r.guard_levels}, {"ok", r.ok}};
}

class Artifacts {
   public:
    Artifacts(const RunOptions& o, const RunConfig& c) : dir_(o.out_dir), quiet_(o.quiet), wigner_(c.wigner) {
        if (!dir_.empty()) fs::create_directories(dir_);
    }

    bool enabled() const { return !dir_.empty(); }
    std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

    template <typename State>
    bool wigner(const State& state, const std::string& tag, const GridBounds& fallback) {
        if (!enabled() || !wigner_.enabled) return false;
        const WignerGrid g = wigner_grid(state, wigner_.bounds.value_or(fallback), wigner_.nx, wigner_.ny);
        export_csv(g, path("wigner_" + tag + ".csv"));
        export_pgm(g, path("wigner_" + tag + ".pgm"));
        note("wigner_" + tag + ".{csv,pgm}");
        return g.truncation_warning;
    }

    void note(const std::string& what) const {
        if (!quiet_) std::cerr << "  wrote " << what << '\n';
    }

   private:
    std::string dir_;
    bool quiet_;
    WignerConfig wigner_;
};

GridBounds square(double r) { return GridBounds{-r, r, -r, r}; }

ZenoRunOptions zeno_options(const RunConfig& c, bool keep_states) {
    ZenoRunOptions o;
    o.record_every = 1;
    o.guard_levels = c.guard_levels;
    o.leak_tol = c.leak_tol;
    o.atom_mode = c.kick.atom_mode;
    o.keep_states = keep_states;
    return o;
}

// Keeps step 0, multiples of record_every, and the last record.
EvolutionTrace thinned(const EvolutionTrace& full, int record_every) {
    EvolutionTrace t = full;
    t.records.clear();
    for (std::size_t k = 0; k < full.records.size(); ++k) {
        const TraceRecord& r = full.records[k];
        if (r.step % record_every == 0 || k + 1 == full.records.size()) {
            t.records.push_back(r);
            t.records.back().state.reset();
        }
    }
    return t;
}

void fill_from_trace(RunSummary& s, const EvolutionTrace& trace) {
    s.steps_run = trace.steps_run;
    s.final_energy = mean_energy(trace.final_state);
    s.truncation = trace.records.back().trunc;
    for (const TraceRecord& r : trace.records) s.max_atom_leak = std::max(s.max_atom_leak, r.atom_leak);
    s.extra["renormalizations"] = trace.renormalizations;
    s.extra["max_norm_drift"] = trace.max_norm_drift;
    const Complex m = mean_amplitude(trace.final_state);
    s.extra["final_mean_amplitude"] = complex_json(m);
    Json probs = Json::array();
    const RVector p = photon_distribution(trace.final_state);
    for (int n = 0; n < std::min<int>(10, p.size()); ++n) probs.push_back(p(n));
    s.extra["final_p0_p9"] = probs;
    if (trace.failure) {
        s.ok = false;
        s.error = *trace.failure;
    }
}

void write_trace_artifacts(const Artifacts& a, const RunConfig& c, const EvolutionTrace& trace) {
    if (!a.enabled()) return;
    write_trace_csv(thinned(trace, c.record_every), a.path("trace.csv"));
    a.note("trace.csv");
    write_state_csv(trace.final_state, a.path("state_final.csv"));
    a.note("state_final.csv");
}

// Wigner snapshots at the configured steps, or the final state when none.
bool write_snapshots(Artifacts& a, const RunConfig& c, const EvolutionTrace& trace, const GridBounds& bounds) {
    bool warn = false;
    if (c.snapshots.empty()) return a.wigner(trace.final_state, "final", bounds);
    for (int step : c.snapshots) {
        for (const TraceRecord& r : trace.records) {
            if (r.step == step && r.state) warn = a.wigner(*r.state, step_tag(step), bounds) || warn;
        }
    }
    return warn;
}

void run_uniform(const RunConfig& c, Artifacts& a, RunSummary& s) {
    const FieldState psi0 = coherent(c.alpha_init, c.dim);
    std::vector<KickSpec> kicks{KickSpec{c.s, c.hold, std::nullopt}};
    if (c.kick.dressed) kicks[0].dressed = c.kick.pulse(c.s);
    const Schedule schedule = uniform_schedule(c.beta, kicks, c.steps);
    const EvolutionTrace trace = zeno_run(psi0, schedule, zeno_options(c, !c.snapshots.empty()));
    fill_from_trace(s, trace);

    if (c.kick.dressed) {
        const Schedule ideal = uniform_schedule(c.beta, {KickSpec{c.s, c.hold, std::nullopt}}, c.steps);
        ZenoRunOptions o = zeno_options(c, false);
        o.record_every = std::max(1, c.steps);
        const EvolutionTrace ref = zeno_run(psi0, ideal, o);
        if (ref.ok() && trace.ok()) s.fidelity = fidelity_pure(trace.final_state, ref.final_state);
        s.extra["selectivity_ratio"] = kicks[0].dressed->selectivity_ratio();
        s.extra["pulse_duration_s"] = kicks[0].dressed->duration();
    }
    if (c.protocol == Protocol::Fig3Revival) {
        std::vector<double> e;
        for (const TraceRecord& r : trace.records) e.push_back(r.energy);
        const int window = 50;
        const auto contrast = sliding_contrast(e, window);
        if (!contrast.empty()) {
            int first_low = -1;
            double revival = 0.0;
            for (std::size_t k = 0; k < contrast.size(); ++k) {
                if (first_low < 0 && contrast[k] < 0.2 * contrast[0]) first_low = static_cast<int>(k);
                if (first_low >= 0) revival = std::max(revival, contrast[k]);
            }
            s.extra["contrast_window"] = window;
            s.extra["initial_contrast"] = contrast[0];
            s.extra["first_window_below_20pct"] = first_low;
            s.extra["revival_contrast_ratio"] = first_low >= 0 ? revival / contrast[0] : 0.0;
        }
    }
    if (c.protocol == Protocol::Tangential) {
        double v = min_quadrature_variance_ratio(psi0);
        for (const TraceRecord& r : trace.records) {
            if (r.state) v = std::min(v, min_quadrature_variance_ratio(*r.state));
        }
        v = std::min(v, min_quadrature_variance_ratio(trace.final_state));
        s.extra["final_min_quadrature_variance_ratio"] = min_quadrature_variance_ratio(trace.final_state);
    }
    write_trace_artifacts(a, c, trace);
    s.extra["wigner_truncation_warning"] = write_snapshots(a, c, trace, default_bounds(c.s));
}

void run_stretch(const RunConfig& c, Artifacts& a, RunSummary& s) {
    const StretchResult r = stretch_cat(c.hold, c.alpha_init, c.beta, c.steps, c.dim);
    s.steps_run = c.steps;
    s.final_energy = mean_energy(r.final_state);
    s.fidelity = r.fidelity;
    s.truncation = truncation_check(r.final_state, c.guard_levels, c.leak_tol);
    if (a.enabled()) {
        write_state_csv(r.final_state, a.path("state_final.csv"));
        a.note("state_final.csv");
    }
    const double reach = std::max(std::abs(c.hold), std::abs(c.alpha_init + double(c.steps) * c.beta)) + 3.0;
    s.extra["wigner_truncation_warning"] = a.wigner(r.final_state, "final", square(reach));
}

void run_move(const RunConfig& c, Artifacts& a, RunSummary& s) {
    const FieldState cat = cat_state(c.cat_alpha, 1.0, c.dim);
    const double cap = c.adiabatic_cap;
    std::vector<TweezerTrajectory> ts{linear_trajectory(c.cat_alpha, c.targets[0], c.steps, cap),
                                      linear_trajectory(-c.cat_alpha, c.targets[1], c.steps, cap)};
    TweezerOptions o;
    o.order = c.order;
    o.adiabatic_cap = cap;
    o.run = zeno_options(c, !c.snapshots.empty());
    if (c.kick.dressed) o.dressed = c.kick.pulse(1);
    const TweezerResult r = tweezer_run(cat, ts, o);
    fill_from_trace(s, r.trace);
    s.fidelity = fidelity_pure(r.final_state, coherent_superposition(c.targets, {1.0, 1.0}, c.dim));
    write_trace_artifacts(a, c, r.trace);
    double reach = c.cat_alpha;
    for (Complex t : c.targets) reach = std::max(reach, std::abs(t));
    s.extra["wigner_truncation_warning"] = write_snapshots(a, c, r.trace, square(reach + 3.0));
}

void run_crush(const RunConfig& c, Artifacts& a, RunSummary& s) {
    const CrushSpec spec = crush_spec(fock_basis(0, c.dim), 0.0, 1.0, c.offset, c.steps);
    const CrushResult r = crush_vacuum(spec, zeno_options(c, !c.snapshots.empty()));
    fill_from_trace(s, r.trace);
    s.fidelity = r.fidelity_vs_matched_cat;
    s.extra["matched_alpha"] = r.matched_alpha;
    write_trace_artifacts(a, c, r.trace);
    s.extra["wigner_truncation_warning"] = write_snapshots(a, c, r.trace, square(c.offset + 3.0));
}

void run_four_cat(const RunConfig& c, Artifacts& a, RunSummary& s) {
    MultiCatPlan plan{c.n_components, c.offset, c.steps, c.dim};
    const MultiCatResult r = multi_cat_factory(plan, zeno_options(c, false));
    s.steps_run = r.crushes * (c.steps + 1);
    s.final_energy = mean_energy(r.final_state);
    s.truncation = truncation_check(r.final_state, c.guard_levels, c.leak_tol);
    s.extra["crushes"] = r.crushes;
    Json centers = Json::array();
    double reach = 0.0;
    for (Complex z : r.centers) {
        centers.push_back(complex_json(z));
        reach = std::max(reach, std::abs(z));
    }
    s.extra["centers"] = centers;
    if (a.enabled()) {
        write_state_csv(r.final_state, a.path("state_final.csv"));
        a.note("state_final.csv");
    }
    s.extra["wigner_truncation_warning"] = a.wigner(r.final_state, "final", square(reach + 3.0));
}

void run_realistic(const RunConfig& c, Artifacts& a, RunSummary& s) {
    RealisticTweezerPlan plan;
    plan.alpha_from = c.cat_alpha;
    plan.alpha_to = c.targets[0].real();
    plan.steps_per_component = c.steps;
    plan.pulse = c.kick.pulse(1);
    plan.total_duration = c.realistic.total_duration;
    plan.order = c.order;
    plan.dim = c.dim;
    LindbladParams lp{c.realistic.t_c, c.realistic.n_th, c.realistic.dt};
    const RealisticTweezerResult r = realistic_tweezer(plan, lp, c.realistic.compare_undamped);
    s.steps_run = 2 * c.steps;
    s.final_energy = r.damped.rho.mean_energy();
    s.fidelity = r.fidelity;
    s.fidelity_undamped = r.fidelity_undamped;
    s.truncation.top_population = 0.0;
    for (int n = c.dim - c.guard_levels; n < c.dim; ++n) s.truncation.top_population += r.damped.rho.mat()(n, n).real();
    s.truncation.guard_levels = c.guard_levels;
    s.truncation.ok = s.truncation.top_population < c.leak_tol;
    for (const MasterRecord& m : r.damped.records) s.max_atom_leak = std::max(s.max_atom_leak, m.atom_leak);
    s.extra["duration_s"] = r.duration;
    s.extra["rabi_drive_hz"] = r.pulse.rabi_drive / (2.0 * M_PI);
    s.extra["selectivity_ratio"] = r.pulse.selectivity_ratio();
    s.extra["success_probability"] = r.damped.success_probability;
    s.extra["final_purity"] = r.damped.rho.purity();
    s.extra["max_trace_err"] = r.damped.max_trace_err;
    s.extra["max_hermiticity_err"] = r.damped.max_hermiticity_err;
    s.extra["min_eigenvalue"] = r.damped.min_eigenvalue;
    if (a.enabled()) {
        write_master_csv(r.damped, a.path("trace.csv"));
        a.note("trace.csv");
    }
    s.extra["wigner_truncation_warning"] =
        a.wigner(r.damped.rho, "final", square(std::max(c.cat_alpha, std::abs(c.targets[0])) + 3.0));
}

}  // namespace

const std::vector<std::string>& protocol_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [p, s] : protocol_table()) n.push_back(s);
        return n;
    }();
    return names;
}

std::string to_string(Protocol p) {
    for (const auto& [q, s] : protocol_table()) {
        if (q == p) return s;
    }
    return "unknown";
}

PulseParams KickModel::pulse(int s) const {
    PulseParams p;
    p.omega = 2.0 * M_PI * omega_hz;
    p.rabi_drive = 2.0 * M_PI * rabi_hz;
    p.theta = theta;
    p.s = s;
    p.include_minus_branch = include_minus_branch;
    return p;
}

RunConfig RunConfig::from_json(const Json& j) {
    std::vector<std::string> errors;
    RunConfig c;
    Reader r(j, "", errors);
    if (!errors.empty()) throw ConfigError("invalid config:\n  " + errors.front());

    r.known({"name", "description", "protocol", "dim", "s", "beta", "alpha_init", "steps", "record_every",
             "snapshots", "guard_levels", "leak_tol", "kick", "wigner", "cat_alpha", "cat_alpha_final", "targets",
             "hold", "order", "adiabatic_cap", "offset", "n_components", "realistic"});
    r.require("protocol");
    r.require("dim");
    r.require("steps");

    const std::string proto = r.get<std::string>("protocol", "");
    bool proto_ok = false;
    for (const auto& [p, name] : protocol_table()) {
        if (name == proto) {
            c.protocol = p;
            proto_ok = true;
        }
    }
    if (r.has("protocol") && !proto_ok) {
        std::string list;
        for (const auto& n : protocol_names()) list += (list.empty() ? "" : ", ") + n;
        r.fail("protocol", "unknown protocol '" + proto + "' (expected one of " + list + ")");
    }

    c.dim = r.get<int>("dim", 0);
    c.s = r.get<int>("s", c.protocol == Protocol::ZenoConfine || is_uniform_kick_protocol(c.protocol) ? 6 : 1);
    c.beta = r.complex("beta", c.beta);
    c.alpha_init = r.complex("alpha_init", 0.0);
    c.steps = r.get<int>("steps", 0);
    c.record_every = r.get<int>("record_every", 1);
    c.snapshots = r.int_list("snapshots");
    c.guard_levels = r.get<int>("guard_levels", kDefaultGuardLevels);
    c.leak_tol = r.get<double>("leak_tol", kDefaultLeakTol);
    c.cat_alpha = r.get<double>("cat_alpha", 2.0);
    c.targets = r.complex_list("targets");
    c.hold = r.complex("hold", 0.0);
    c.adiabatic_cap = r.get<double>("adiabatic_cap", kDefaultAdiabaticCap);
    c.offset = r.get<double>("offset", 2.5);
    c.n_components = r.get<int>("n_components", 4);
    const std::string order = r.get<std::string>("order", "sequential");
    if (order == "sequential") {
        c.order = TweezerOrder::Sequential;
    } else if (order == "round_robin") {
        c.order = TweezerOrder::RoundRobin;
    } else {
        r.fail("order", "expected 'sequential' or 'round_robin'");
    }
    if (r.has("cat_alpha_final")) c.targets = {Complex(r.get<double>("cat_alpha_final", 3.0), 0.0)};

    if (const Json* k = r.child("kick")) {
        Reader kr(*k, "kick.", errors);
        kr.known({"model", "omega_hz", "rabi_hz", "theta", "include_minus_branch", "atom_mode"});
        const std::string model = kr.get<std::string>("model", "ideal");
        if (model != "ideal" && model != "dressed") kr.fail("model", "expected 'ideal' or 'dressed'");
        c.kick.dressed = model == "dressed";
        c.kick.omega_hz = kr.get<double>("omega_hz", c.kick.omega_hz);
        c.kick.rabi_hz = kr.get<double>("rabi_hz", c.kick.rabi_hz);
        c.kick.theta = kr.get<double>("theta", c.kick.theta);
        c.kick.include_minus_branch = kr.get<bool>("include_minus_branch", true);
        const std::string mode = kr.get<std::string>("atom_mode", "coherent");
        if (mode == "coherent") {
            c.kick.atom_mode = AtomMode::Coherent;
        } else if (mode == "postselected") {
            c.kick.atom_mode = AtomMode::Postselected;
        } else {
            kr.fail("atom_mode", "expected 'coherent' or 'postselected'");
        }
        kr.check(c.kick.omega_hz > 0.0, "omega_hz", "must be > 0");
        kr.check(c.kick.rabi_hz > 0.0, "rabi_hz", "must be > 0");
        kr.check(c.kick.theta > 0.0 && c.kick.theta <= 4.0 * M_PI + 1e-12, "theta", "must lie in (0, 4 pi]");
    }
    if (const Json* w = r.child("wigner")) {
        Reader wr(*w, "wigner.", errors);
        wr.known({"enabled", "nx", "ny", "bounds"});
        c.wigner.enabled = wr.get<bool>("enabled", true);
        c.wigner.nx = wr.get<int>("nx", kDefaultGridPoints);
        c.wigner.ny = wr.get<int>("ny", kDefaultGridPoints);
        wr.check(c.wigner.nx >= 2 && c.wigner.ny >= 2, "nx", "nx and ny must be >= 2");
        if (wr.has("bounds")) {
            const Json& b = w->at("bounds");
            if (b.is_array() && b.size() == 4 && std::all_of(b.begin(), b.end(), [](const Json& x) {
                    return x.is_number();
                })) {
                c.wigner.bounds = GridBounds{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                                             b[3].get<double>()};
                wr.check(c.wigner.bounds->x_max > c.wigner.bounds->x_min &&
                             c.wigner.bounds->y_max > c.wigner.bounds->y_min,
                         "bounds", "expected x_min < x_max and y_min < y_max");
            } else {
                wr.fail("bounds", "expected [x_min, x_max, y_min, y_max]");
            }
        }
    }
    if (const Json* q = r.child("realistic")) {
        Reader qr(*q, "realistic.", errors);
        qr.known({"t_c", "n_th", "dt", "total_duration", "compare_undamped"});
        c.realistic.t_c = qr.get<double>("t_c", c.realistic.t_c);
        c.realistic.n_th = qr.get<double>("n_th", 0.0);
        c.realistic.dt = qr.get<double>("dt", 0.0);
        c.realistic.total_duration = qr.get<double>("total_duration", c.realistic.total_duration);
        c.realistic.compare_undamped = qr.get<bool>("compare_undamped", true);
        qr.check(c.realistic.t_c > 0.0, "t_c", "must be > 0");
        qr.check(c.realistic.n_th >= 0.0, "n_th", "must be >= 0");
        qr.check(c.realistic.dt >= 0.0, "dt", "must be >= 0 (0 selects t_c * 1e-6)");
        qr.check(c.realistic.total_duration >= 0.0, "total_duration", "must be >= 0");
    }

    // Cross-field checks, only meaningful once the basics parsed.
    if (r.has("dim")) r.check(c.dim >= 2, "dim", "must be >= 2");
    if (r.has("steps")) r.check(c.steps >= 1, "steps", "must be >= 1");
    r.check(c.record_every >= 1, "record_every", "must be >= 1");
    r.check(c.leak_tol > 0.0, "leak_tol", "must be > 0");
    r.check(c.guard_levels >= 1 && (c.dim < 2 || c.guard_levels < c.dim), "guard_levels", "must lie in [1, dim)");
    r.check(c.adiabatic_cap > 0.0, "adiabatic_cap", "must be > 0");
    if (c.dim >= 2 && c.s >= 0) {
        r.check(c.s < c.dim - c.guard_levels, "s", "must lie in [0, dim - guard_levels)");
    } else {
        r.check(c.s >= 0, "s", "must be >= 0");
    }
    auto need_dim = [&](double reach, const std::string& why) {
        const int need = min_truncation_dim(reach);
        if (c.dim >= 2 && c.dim < need) {
            r.fail("dim", std::to_string(c.dim) + " is below the truncation rule for " + why + " (need " +
                              std::to_string(need) + ")");
        }
    };
    if (proto_ok) {
        switch (c.protocol) {
            case Protocol::ZenoConfine:
            case Protocol::ZenoUpper:
            case Protocol::Tangential:
            case Protocol::Fig3Revival:
                need_dim(std::abs(c.alpha_init), "alpha_init");
                break;
            case Protocol::TweezerStretch:
                need_dim(std::max(std::abs(c.hold), std::abs(c.alpha_init + double(c.steps) * c.beta)),
                         "the stretched components");
                break;
            case Protocol::TweezerMove:
                r.check(c.targets.size() == 2, "targets", "tweezer_move needs two targets");
                for (Complex t : c.targets) need_dim(std::abs(t), "the tweezer targets");
                need_dim(c.cat_alpha, "cat_alpha");
                break;
            case Protocol::Crush:
                r.check(c.offset > 0.0, "offset", "must be > 0");
                need_dim(c.offset, "the crush offset");
                break;
            case Protocol::FourCat:
                r.check(c.n_components >= 1 && (c.n_components & (c.n_components - 1)) == 0, "n_components",
                        "must be a power of two");
                need_dim(std::sqrt(2.0) * c.offset + 1.0, "the component centres");
                break;
            case Protocol::Realistic:
                r.check(c.targets.size() == 1 && c.targets[0].imag() == 0.0 && c.targets[0].real() > 0.0,
                        "cat_alpha_final", "realistic needs a positive cat_alpha_final");
                if (c.targets.size() == 1) need_dim(std::max(c.cat_alpha, std::abs(c.targets[0])), "the cat");
                break;
        }
    }
    if (proto_ok && !c.snapshots.empty()) {
        // Snapshot steps count schedule steps: one per kick in sequential
        // tweezer order, one per round otherwise.
        int last = -1;
        if (is_uniform_kick_protocol(c.protocol)) last = c.steps;
        if (c.protocol == Protocol::TweezerMove) last = c.order == TweezerOrder::Sequential ? 2 * (c.steps + 1) : c.steps + 1;
        if (c.protocol == Protocol::Crush) last = c.steps + 1;
        if (last < 0) {
            r.fail("snapshots", "not supported for " + to_string(c.protocol) + "; the final state is always written");
        }
        for (int step : c.snapshots) {
            if (last >= 0 && (step < 0 || step > last)) {
                r.fail("snapshots", "step " + std::to_string(step) + " outside [0, " + std::to_string(last) + "]");
            }
        }
    }
    if (!errors.empty()) {
        std::string msg = "invalid config (" + std::to_string(errors.size()) + " problem" +
                          (errors.size() == 1 ? "" : "s") + "):";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return c;
}

Json RunSummary::to_json() const {
    Json j;
    j["protocol"] = protocol;
    j["status"] = ok ? "ok" : "failed";
    if (!error.empty()) j["error"] = error;
    j["dim"] = dim;
    j["steps_run"] = steps_run;
    j["final_energy"] = final_energy;
    j["fidelity"] = fidelity ? Json(*fidelity) : Json(nullptr);
    if (fidelity_undamped) j["fidelity_undamped"] = *fidelity_undamped;
    j["truncation"] = truncation_json(truncation);
    j["max_atom_leak"] = max_atom_leak;
    j["wall_time_s"] = wall_time_s;
    j["details"] = extra;
    return j;
}

RunSummary run(const RunConfig& config, const RunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    Artifacts artifacts(options, config);
    RunSummary s;
    s.protocol = to_string(config.protocol);
    s.dim = config.dim;
    switch (config.protocol) {
        case Protocol::ZenoConfine:
        case Protocol::ZenoUpper:
        case Protocol::Tangential:
        case Protocol::Fig3Revival:
            run_uniform(config, artifacts, s);
            break;
        case Protocol::TweezerStretch:
            run_stretch(config, artifacts, s);
            break;
        case Protocol::TweezerMove:
            run_move(config, artifacts, s);
            break;
        case Protocol::Crush:
            run_crush(config, artifacts, s);
            break;
        case Protocol::FourCat:
            run_four_cat(config, artifacts, s);
            break;
        case Protocol::Realistic:
            run_realistic(config, artifacts, s);
            break;
    }
    s.wall_time_s = seconds_since(t0);
    if (artifacts.enabled()) {
        std::ofstream out(artifacts.path("summary.json"));
        out << s.to_json().dump(2) << '\n';
        if (!out) throw Error("cannot write summary.json");
        artifacts.note("summary.json");
    }
    return s;
}

void set_dotted(Json& j, const std::string& path, const Json& value) {
    Json* node = &j;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("sweep: bad parameter path '" + path + "'");
        if (!node->is_object()) throw ConfigError("sweep: '" + path + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key)) (*node)[key] = Json::object();
        node = &(*node)[key];
        start = dot + 1;
    }
}

std::vector<SweepRow> sweep(const Json& base, const Json& ranges, int workers) {
    if (!ranges.is_object() || ranges.empty()) throw ConfigError("sweep: ranges must be a non-empty object");
    std::vector<std::string> keys;
    std::vector<std::vector<Json>> values;
    std::size_t total = 1;
    for (const auto& [k, v] : ranges.items()) {
        if (!v.is_array() || v.empty()) throw ConfigError("sweep: range '" + k + "' must be a non-empty array");
        keys.push_back(k);
        values.emplace_back(v.begin(), v.end());
        total *= v.size();
    }
    std::vector<SweepRow> rows(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        rows[idx].values.resize(keys.size());
        for (std::size_t k = keys.size(); k-- > 0;) {
            rows[idx].values[k] = values[k][rem % values[k].size()];
            rem /= values[k].size();
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t idx = next++; idx < total; idx = next++) {
            SweepRow& row = rows[idx];
            Json cfg = base;
            try {
                for (std::size_t k = 0; k < keys.size(); ++k) set_dotted(cfg, keys[k], row.values[k]);
                row.summary = run(RunConfig::from_json(cfg), RunOptions{});
            } catch (const std::exception& e) {
                row.summary.ok = false;
                row.summary.error = e.what();
            }
        }
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(total)));
    std::vector<std::thread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return rows;
}

void write_sweep_csv(const Json& ranges, const std::vector<SweepRow>& rows, const std::string& path) {
    auto out = internal::open_output(path);
    auto cell = [](const Json& v) -> std::string {
        if (v.is_number()) return internal::fmt17(v.get<double>());
        std::string s = v.is_string() ? v.get<std::string>() : v.dump();
        // One row per line: multi-line config errors become "; "-separated.
        for (std::size_t p; (p = s.find('\n')) != std::string::npos;) {
            const std::size_t end = s.find_first_not_of(' ', p + 1);
            s.replace(p, (end == std::string::npos ? s.size() : end) - p, "; ");
        }
        if (s.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            return q + "\"";
        }
        return s;
    };
    out << "index";
    for (const auto& [k, v] : ranges.items()) out << ',' << cell(Json(k));
    out << ",status,fidelity,fidelity_undamped,final_energy,max_atom_leak,top_population,error\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const RunSummary& s = rows[i].summary;
        out << i;
        for (const Json& v : rows[i].values) out << ',' << cell(v);
        out << ',' << (s.ok ? "ok" : "failed") << ',' << (s.fidelity ? internal::fmt17(*s.fidelity) : "") << ','
            << (s.fidelity_undamped ? internal::fmt17(*s.fidelity_undamped) : "") << ','
            << internal::fmt17(s.final_energy) << ',' << internal::fmt17(s.max_atom_leak) << ','
            << internal::fmt17(s.truncation.top_population) << ',' << cell(Json(s.error)) << '\n';
    }
    internal::finish_output(out, path);
}

}  // namespace qzd::app
