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

// Photon-number-selective kick realized by a square interrogation pulse on
// the h -> g transition of an atom dressed by the cavity field.
//
// Per photon number n the pulse couples |h,n> to the dressed doublet
// |+-,n> = (|e,n-1> +- |g,n>)/sqrt(2), each with strength Omega_R/(2 sqrt 2).
// For n = 0 only the bare |h,0> <-> |g,0> line exists (coupling Omega_R/2).
// The drive is resonant with |h,s> -> |+,s>; the blocks are independent in n.

#ifndef QZD_ATOMKICK_HPP
#define QZD_ATOMKICK_HPP

#include <vector>

#include "qzd/fock.hpp"

namespace qzd {

struct PulseParams {
    double omega = 0.0;       // vacuum Rabi frequency, rad/s
    double rabi_drive = 0.0;  // drive Rabi frequency on the bare h -> g line, rad/s
    double theta = 2.0 * M_PI;
    int s = 1;
    bool include_minus_branch = true;

    /// Throws Error unless omega > 0, rabi_drive > 0, theta in (0, 4 pi], s >= 0.
    void validate() const;

    /// Pulse length: theta sqrt(2)/Omega_R on a dressed line, theta/Omega_R
    /// when s = 0 addresses the bare line.
    double duration() const;

    /// rabi_drive / (omega |sqrt(s+1) - sqrt(s)|)
    double selectivity_ratio() const;
    bool selectivity_warning() const { return selectivity_ratio() > 0.3; }

    bool operator==(const PulseParams&) const = default;
};

struct DressedDetunings {
    double plus = 0.0;
    double minus = 0.0;
};

/// Rotating-frame detunings of |+,n> and |-,n> from the drive. For n = 0 both
/// fields hold the detuning of the bare |g,0> line.
DressedDetunings dressed_detunings(int n, const PulseParams& params);

/// exp(-i H_n tau) for one photon number. Basis order {h, +, -} (3x3), or
/// {h, +} without the minus branch, or {h, g} at n = 0 (2x2).
CMatrix pulse_block_unitary(int n, const PulseParams& params);

/// <h,n| U_n |h,n> for n in [0, dim).
CVector conditioned_amplitudes(const PulseParams& params, int dim);

struct JointKickResult {
    /// diag(<h,n|U_n|h,n>): field map conditioned on the atom staying in h.
    Operator field_unitary_on_h;
    /// 1 - |<h,n|U_n|h,n>|^2 per photon number.
    RVector atom_leak;
    /// Field after the pulse, conditioned on h and renormalized.
    FieldState state;
    /// Unconditioned population per n that left h: |psi_n|^2 atom_leak(n).
    RVector branch_populations;
    double leak_probability = 0.0;
    bool leak_flagged = false;
};

/// One kick with a fresh atom prepared in h.
JointKickResult realistic_kick(const FieldState& state, const PulseParams& params,
                               double leak_threshold = 1e-2);

/// Atom + field amplitudes with the atom in h, e or g: h(n) = <h,n|psi>,
/// e(n) = <e,n|psi>, g(n) = <g,n|psi>. e(dim-1) stays zero since its
/// dressed partner |g,dim> is outside the truncation.
struct AtomFieldState {
    CVector h;
    CVector e;
    CVector g;

    static AtomFieldState atom_in_h(const FieldState& field);

    int dim() const { return static_cast<int>(h.size()); }
    double leaked_population() const { return e.squaredNorm() + g.squaredNorm(); }
    double norm2() const { return h.squaredNorm() + leaked_population(); }
    /// Field amplitudes with the atom found in h, renormalized.
    FieldState conditioned_on_h() const;
    /// Cavity displacement, applied to the field in every atomic branch.
    void displace(Complex beta);
};

/// Block unitaries of one pulse, precomputed for a truncation.
class DressedKick {
   public:
    DressedKick(const PulseParams& params, int dim);

    const PulseParams& params() const { return params_; }
    int dim() const { return static_cast<int>(conditioned_.size()); }
    const CVector& conditioned() const { return conditioned_; }

    /// Kick centred at gamma on the joint state: D(gamma) U D(-gamma), the
    /// displacements acting on the field only.
    void apply(AtomFieldState& joint, Complex gamma) const;

    /// Fresh-atom kick conditioned on h: D(gamma) diag(c) D(-gamma) v, not
    /// renormalized.
    CVector apply_conditioned(const CVector& v, Complex gamma) const;

   private:
    PulseParams params_;
    std::vector<Eigen::Matrix3cd> blocks_;
    CVector conditioned_;
};

}  // namespace qzd

#endif  // QZD_ATOMKICK_HPP
