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

// Truncated Fock space: pure field states, dense operators, the displacement
// algebra and photon statistics of a single cavity mode.
//
// Basis |0>..|dim-1>. Phase-space amplitudes use the convention
// D(beta) = exp(beta a^dag - conj(beta) a), so <a> = alpha for |alpha>.

#ifndef QZD_FOCK_HPP
#define QZD_FOCK_HPP

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "qzd/error.hpp"

namespace qzd {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr int kDefaultGuardLevels = 3;
inline constexpr double kDefaultLeakTol = 1e-6;

/// Normalized pure state of the cavity field on the truncated basis.
class FieldState {
   public:
    /// Normalizes `amps`. Throws DimensionError for dim < 2 or a zero vector.
    explicit FieldState(CVector amps);

    int dim() const { return static_cast<int>(amps_.size()); }
    const CVector& amps() const { return amps_; }
    Complex operator[](int n) const { return amps_(n); }

   private:
    CVector amps_;
};

/// Dense complex matrix acting on the truncated space. Not necessarily unitary.
class Operator {
   public:
    explicit Operator(CMatrix mat);

    int dim() const { return static_cast<int>(mat_.rows()); }
    const CMatrix& mat() const { return mat_; }

    Operator adjoint() const { return Operator(mat_.adjoint()); }
    Operator operator*(const Operator& rhs) const;

    /// Applies the operator and renormalizes.
    FieldState apply(const FieldState& state) const;

    /// max |(M^dag M - 1)_ij|
    double unitarity_error() const;
    /// max |(M - M^dag)_ij|
    double hermiticity_error() const;

   private:
    CMatrix mat_;
};

struct TruncationReport {
    double top_population = 0.0;
    int guard_levels = kDefaultGuardLevels;
    bool ok = true;
};

// ---- states ---------------------------------------------------------------

FieldState fock_basis(int n, int dim);

/// Smallest dim accepted for amplitudes up to |alpha_max|:
/// ceil(|a|^2 + 6|a| + 10).
int min_truncation_dim(double alpha_max);

/// Poisson amplitudes alpha^n/sqrt(n!) (log space), renormalized on the
/// truncated basis. Throws TruncationError below min_truncation_dim(|alpha|).
FieldState coherent(Complex alpha, int dim);

/// (|alpha> + phase |-alpha>)/norm with |phase| = 1.
FieldState cat_state(Complex alpha, Complex phase, int dim);

/// Normalized superposition sum_k weights[k] |alphas[k]>. No truncation
/// precondition; callers size dim themselves.
FieldState coherent_superposition(const std::vector<Complex>& alphas,
                                  const std::vector<Complex>& weights, int dim);

// ---- operators ------------------------------------------------------------

Operator annihilation_op(int dim);
Operator creation_op(int dim);
Operator number_op(int dim);
/// (-1)^N
Operator parity_op(int dim);
Operator identity_op(int dim);

/// exp(beta a^dag - conj(beta) a) on the truncated space. Built from the
/// spectral decomposition of the Hermitian generator i(a^dag - a), so the
/// result is unitary to rounding and D(-beta) is exactly D(beta)^dag.
Operator displacement_op(Complex beta, int dim);

/// D(beta) v without forming the matrix. O(dim^2).
CVector apply_displacement(Complex beta, const CVector& v);

/// D(gamma)|s>, the eigenvector flipped by the displaced kick. O(dim^2).
CVector displaced_fock(int s, Complex gamma, int dim);

// ---- statistics -----------------------------------------------------------

RVector photon_distribution(const FieldState& state);
double mean_energy(const FieldState& state);
/// <a>
Complex mean_amplitude(const FieldState& state);

/// Smallest variance of the quadrature (a e^{-i phi} + a^dag e^{i phi})/2 over
/// phi, divided by its vacuum value 1/4.
double min_quadrature_variance_ratio(const FieldState& state);

/// |<a|b>|^2. Throws DimensionError on mismatched dims.
double fidelity_pure(const FieldState& a, const FieldState& b);

TruncationReport truncation_check(const FieldState& state,
                                  int guard_levels = kDefaultGuardLevels,
                                  double leak_tol = kDefaultLeakTol);
TruncationReport truncation_check(const CVector& amps, int guard_levels,
                                  double leak_tol);

}  // namespace qzd

#endif  // QZD_FOCK_HPP
