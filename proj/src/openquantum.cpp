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

#include "qzd/openquantum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "numfmt.hpp"

namespace qzd {

namespace {

// Dissipator of the truncated a, a^dag. The truncated a a^dag has a zero in
// its last diagonal entry, which keeps the generator exactly trace preserving.
void add_dissipator(const CMatrix& rho, double down, double up, CMatrix& out) {
    const int d = static_cast<int>(rho.rows());
    for (int n = 0; n < d; ++n) {
        for (int m = 0; m < d; ++m) {
            Complex v = -0.5 * down * double(m + n) * rho(m, n);
            if (m + 1 < d && n + 1 < d) v += down * std::sqrt(double(m + 1) * (n + 1)) * rho(m + 1, n + 1);
            if (up != 0.0) {
                const double cm = m + 1 < d ? m + 1.0 : 0.0;
                const double cn = n + 1 < d ? n + 1.0 : 0.0;
                v -= 0.5 * up * (cm + cn) * rho(m, n);
                if (m > 0 && n > 0) v += up * std::sqrt(double(m) * n) * rho(m - 1, n - 1);
            }
            out(m, n) += v;
        }
    }
}

CMatrix rk4_step(const CMatrix& rho, const CMatrix* h, const LindbladParams& p, double dt) {
    const CMatrix k1 = lindblad_rhs(rho, h, p);
    const CMatrix k2 = lindblad_rhs(rho + 0.5 * dt * k1, h, p);
    const CMatrix k3 = lindblad_rhs(rho + 0.5 * dt * k2, h, p);
    const CMatrix k4 = lindblad_rhs(rho + dt * k3, h, p);
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

CMatrix integrate(const CMatrix& rho, const CMatrix* h, double duration, const LindbladParams& p) {
    if (duration <= 0.0) return rho;
    const double max_dt = p.step_size();
    const long steps = std::max(1L, static_cast<long>(std::ceil(duration / max_dt - 1e-9)));
    const double dt = duration / double(steps);
    CMatrix r = rho;
    for (long k = 0; k < steps; ++k) r = rk4_step(r, h, p, dt);
    return r;
}

double purity_of(const CMatrix& rho) { return (rho.cwiseAbs2()).sum(); }

}  // namespace

DensityMatrix::DensityMatrix(CMatrix mat) : mat_(std::move(mat)) {
    if (mat_.rows() != mat_.cols()) throw DimensionError("density matrix must be square");
    if (mat_.rows() < 2) throw DimensionError("density matrix dim must be >= 2");
}

DensityMatrix DensityMatrix::from_pure(const FieldState& psi) {
    return DensityMatrix(psi.amps() * psi.amps().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    if (dim < 2) throw DimensionError("density matrix dim must be >= 2");
    return DensityMatrix(CMatrix::Identity(dim, dim) / double(dim));
}

double DensityMatrix::purity() const { return purity_of(mat_); }

double DensityMatrix::mean_energy() const {
    double e = 0.0;
    for (int n = 0; n < dim(); ++n) e += n * mat_(n, n).real();
    return e;
}

double DensityMatrix::hermiticity_error() const { return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix::min_eigenvalue() const {
    const CMatrix herm = 0.5 * (mat_ + mat_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

void LindbladParams::validate() const {
    if (!(t_c > 0.0)) throw Error("lindblad: t_c must be > 0");
    if (!(n_th >= 0.0) || !std::isfinite(n_th)) throw Error("lindblad: n_th must be finite and >= 0");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw Error("lindblad: dt must be finite and >= 0");
    if (dt > 0.0 && std::isfinite(t_c) && dt > 1e-2 * t_c) throw Error("lindblad: dt must be << t_c");
}

double LindbladParams::step_size() const {
    if (dt > 0.0) return dt;
    return std::isfinite(t_c) ? t_c * 1e-6 : std::numeric_limits<double>::infinity();
}

double LindbladParams::decay_rate() const { return std::isfinite(t_c) ? 1.0 / t_c : 0.0; }

CMatrix lindblad_rhs(const CMatrix& rho, const CMatrix* hamiltonian, const LindbladParams& params) {
    CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
    if (hamiltonian != nullptr) {
        const Complex i(0.0, 1.0);
        out.noalias() -= i * (*hamiltonian * rho);
        out.noalias() += i * (rho * *hamiltonian);
    }
    const double kappa = params.decay_rate();
    if (kappa > 0.0) add_dissipator(rho, kappa * (params.n_th + 1.0), kappa * params.n_th, out);
    return out;
}

CMatrix lindblad_rhs(const DensityMatrix& rho, const Operator& hamiltonian, const LindbladParams& params) {
    if (rho.dim() != hamiltonian.dim()) throw DimensionError("lindblad_rhs: dimension mismatch");
    return lindblad_rhs(rho.mat(), &hamiltonian.mat(), params);
}

DensityMatrix evolve_lindblad(const DensityMatrix& rho, const Operator* hamiltonian, double duration,
                              const LindbladParams& params) {
    params.validate();
    if (duration < 0.0) throw Error("evolve_lindblad: duration must be >= 0");
    if (hamiltonian != nullptr && hamiltonian->dim() != rho.dim()) {
        throw DimensionError("evolve_lindblad: dimension mismatch");
    }
    if (!std::isfinite(params.step_size())) {
        throw Error("evolve_lindblad: set dt when damping is off");
    }
    return DensityMatrix(integrate(rho.mat(), hamiltonian ? &hamiltonian->mat() : nullptr, duration, params));
}

double fidelity_mixed(const DensityMatrix& rho, const FieldState& psi) {
    if (rho.dim() != psi.dim()) throw DimensionError("fidelity_mixed: dimension mismatch");
    const double f = psi.amps().dot(rho.mat() * psi.amps()).real();
    return std::clamp(f, 0.0, 1.0);
}

double schedule_duration(const TimedSchedule& schedule) {
    double t = 0.0;
    for (const TimedStep& st : schedule) {
        t += st.drive_duration;
        for (const KickSpec& k : st.kicks) {
            if (k.dressed) t += k.dressed->duration();
        }
    }
    return t;
}

MasterResult evolve_master(const DensityMatrix& rho0, const TimedSchedule& schedule, const LindbladParams& params,
                           const MasterOptions& options) {
    params.validate();
    const int dim = rho0.dim();
    if (options.target && options.target->dim() != dim) throw DimensionError("evolve_master: target dim mismatch");
    const bool damping = params.decay_rate() > 0.0;

    MasterResult res{rho0, {}, 0.0, 1.0, 0.0, 0.0, 0.0, {}};
    CMatrix rho = rho0.mat();
    double t = 0.0;

    auto record = [&](double leak) {
        const DensityMatrix dm(rho);
        const double tr_err = std::abs(dm.trace() - 1.0);
        res.max_trace_err = std::max(res.max_trace_err, tr_err);
        res.max_hermiticity_err = std::max(res.max_hermiticity_err, dm.hermiticity_error());
        const double lam = dm.min_eigenvalue();
        res.min_eigenvalue = std::min(res.min_eigenvalue, lam);
        if (lam < -options.positivity_tol) {
            throw PositivityError("evolve_master: eigenvalue " + internal::fmt17(lam) + " at t = " +
                                  internal::fmt17(t) + " s; reduce dt");
        }
        MasterRecord r;
        r.t = t;
        r.energy = dm.mean_energy() / dm.trace();
        r.purity = dm.purity();
        r.fidelity = options.target ? fidelity_mixed(dm, *options.target) : 0.0;
        r.trace_err = tr_err;
        r.atom_leak = leak;
        res.records.push_back(r);
    };
    auto decay = [&](double duration) {
        if (duration <= 0.0) return;
        t += duration;
        if (!damping) return;
        const double before = purity_of(rho);
        rho = integrate(rho, nullptr, duration, params);
        res.max_trace_err = std::max(res.max_trace_err, std::abs(rho.trace().real() - 1.0));
        res.decay_purities.emplace_back(before, purity_of(rho));
    };

    record(0.0);
    const CMatrix a = annihilation_op(dim).mat();
    for (const TimedStep& st : schedule) {
        if (st.displacement != Complex(0.0)) {
            if (st.drive_duration > 0.0 && damping) {
                const Complex e = st.displacement / st.drive_duration;
                const Complex i(0.0, 1.0);
                const CMatrix h = -i * (std::conj(e) * a - e * a.adjoint());
                rho = integrate(rho, &h, st.drive_duration, params);
            } else {
                const CMatrix d = displacement_op(st.displacement, dim).mat();
                rho = d * rho * d.adjoint();
            }
        }
        if (st.drive_duration > 0.0) t += st.drive_duration;

        double survive = 1.0;
        for (const KickSpec& k : st.kicks) {
            if (k.s < 0 || k.s >= dim) throw DimensionError("evolve_master: kick s outside [0, dim)");
            const double tau = k.dressed ? k.dressed->duration() : 0.0;
            decay(0.5 * tau);
            const CMatrix kmat = displaced_kick(k, dim).mat();
            rho = kmat * rho * kmat.adjoint();
            const double tr = rho.trace().real();
            if (!(tr > 0.0)) throw Error("evolve_master: every atom left h");
            rho /= tr;
            survive *= tr;
            decay(0.5 * tau);
        }
        res.success_probability *= survive;
        record(1.0 - survive);
    }
    res.rho = DensityMatrix(rho);
    res.total_time = t;
    return res;
}

void write_master_csv(const MasterResult& result, std::ostream& out) {
    out << "t_seconds,energy,purity,fidelity_vs_target,trace_err\n";
    for (const MasterRecord& r : result.records) {
        out << internal::fmt17(r.t) << ',' << internal::fmt17(r.energy) << ',' << internal::fmt17(r.purity) << ','
            << internal::fmt17(r.fidelity) << ',' << internal::fmt17(r.trace_err) << '\n';
    }
}

void write_master_csv(const MasterResult& result, const std::string& path) {
    auto out = internal::open_output(path);
    write_master_csv(result, out);
    internal::finish_output(out, path);
}

}  // namespace qzd
