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

#include "qzd/atomkick.hpp"

#include <cmath>
#include <string>

namespace qzd {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

CMatrix hermitian_exp(const CMatrix& h, double t) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
    CVector phases(h.rows());
    for (int k = 0; k < h.rows(); ++k) phases(k) = std::polar(1.0, -solver.eigenvalues()(k) * t);
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

}  // namespace

void PulseParams::validate() const {
    if (!(omega > 0.0)) throw Error("pulse: omega must be > 0");
    if (!(rabi_drive > 0.0)) throw Error("pulse: rabi_drive must be > 0");
    if (!(theta > 0.0) || theta > 4.0 * M_PI + 1e-12) throw Error("pulse: theta must lie in (0, 4 pi]");
    if (s < 0) throw Error("pulse: s must be >= 0");
}

double PulseParams::duration() const {
    return s == 0 ? theta / rabi_drive : theta * std::sqrt(2.0) / rabi_drive;
}

double PulseParams::selectivity_ratio() const {
    return rabi_drive / (omega * std::abs(std::sqrt(s + 1.0) - std::sqrt(double(s))));
}

DressedDetunings dressed_detunings(int n, const PulseParams& params) {
    if (n < 0) throw DimensionError("dressed_detunings: n must be >= 0");
    const double half = 0.5 * params.omega;
    const double rs = std::sqrt(double(params.s));
    if (n == 0) return {-half * rs, -half * rs};
    const double rn = std::sqrt(double(n));
    return {half * (rn - rs), -half * (rn + rs)};
}

CMatrix pulse_block_unitary(int n, const PulseParams& params) {
    params.validate();
    const DressedDetunings d = dressed_detunings(n, params);
    const double tau = params.duration();
    if (n == 0) {
        CMatrix h(2, 2);
        h << 0.0, 0.5 * params.rabi_drive, 0.5 * params.rabi_drive, d.plus;
        return hermitian_exp(h, tau);
    }
    const double c = params.rabi_drive * 0.5 * kInvSqrt2;
    if (!params.include_minus_branch) {
        CMatrix h(2, 2);
        h << 0.0, c, c, d.plus;
        return hermitian_exp(h, tau);
    }
    CMatrix h(3, 3);
    h << 0.0, c, c, c, d.plus, 0.0, c, 0.0, d.minus;
    return hermitian_exp(h, tau);
}

CVector conditioned_amplitudes(const PulseParams& params, int dim) {
    CVector c(dim);
    for (int n = 0; n < dim; ++n) c(n) = pulse_block_unitary(n, params)(0, 0);
    return c;
}

JointKickResult realistic_kick(const FieldState& state, const PulseParams& params,
                               double leak_threshold) {
    const int dim = state.dim();
    const CVector c = conditioned_amplitudes(params, dim);
    const RVector leak = (1.0 - c.cwiseAbs2().array()).matrix();
    const RVector pops = state.amps().cwiseAbs2();
    const RVector branch = pops.cwiseProduct(leak);
    const double total = branch.sum();
    const CVector out = c.cwiseProduct(state.amps());
    if (out.norm() == 0.0) throw Error("realistic_kick: no amplitude left with the atom in h");
    return JointKickResult{Operator(CMatrix(c.asDiagonal())), leak, FieldState(out), branch, total,
                           total > leak_threshold};
}

AtomFieldState AtomFieldState::atom_in_h(const FieldState& field) {
    const int dim = field.dim();
    return AtomFieldState{field.amps(), CVector::Zero(dim), CVector::Zero(dim)};
}

FieldState AtomFieldState::conditioned_on_h() const { return FieldState(h); }

void AtomFieldState::displace(Complex beta) {
    if (beta == Complex(0.0)) return;
    h = apply_displacement(beta, h);
    if (e.squaredNorm() > 0.0) e = apply_displacement(beta, e);
    if (g.squaredNorm() > 0.0) g = apply_displacement(beta, g);
}

DressedKick::DressedKick(const PulseParams& params, int dim) : params_(params) {
    params_.validate();
    blocks_.resize(dim);
    conditioned_.resize(dim);
    for (int n = 0; n < dim; ++n) {
        const CMatrix u = pulse_block_unitary(n, params_);
        Eigen::Matrix3cd b = Eigen::Matrix3cd::Identity();
        b.topLeftCorner(u.rows(), u.cols()) = u;
        blocks_[n] = b;
        conditioned_(n) = u(0, 0);
    }
}

void DressedKick::apply(AtomFieldState& joint, Complex gamma) const {
    const int dim = this->dim();
    if (joint.dim() != dim) throw DimensionError("DressedKick: dimension mismatch");
    joint.displace(-gamma);
    {
        Eigen::Vector3cd v(joint.h(0), joint.g(0), 0.0);
        v = blocks_[0] * v;
        joint.h(0) = v(0);
        joint.g(0) = v(1);
    }
    for (int n = 1; n < dim; ++n) {
        const Complex en = joint.e(n - 1);
        const Complex gn = joint.g(n);
        // |+-,n> = (|g,n> +- |e,n-1>)/sqrt2; the drive reaches both through g.
        Eigen::Vector3cd v(joint.h(n), kInvSqrt2 * (gn + en), kInvSqrt2 * (gn - en));
        v = blocks_[n] * v;
        joint.h(n) = v(0);
        joint.e(n - 1) = kInvSqrt2 * (v(1) - v(2));
        joint.g(n) = kInvSqrt2 * (v(1) + v(2));
    }
    joint.displace(gamma);
}

CVector DressedKick::apply_conditioned(const CVector& v, Complex gamma) const {
    CVector w = apply_displacement(-gamma, v);
    w = conditioned_.cwiseProduct(w);
    return apply_displacement(gamma, w);
}

}  // namespace qzd
