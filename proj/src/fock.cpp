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

#include "qzd/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace qzd {

namespace {

void require_dim(int dim) {
    if (dim < 2) {
        throw DimensionError("truncation dim must be >= 2, got " + std::to_string(dim));
    }
}

// Spectrum of the real symmetric tridiagonal J with J(n+1,n) = sqrt(n+1).
// i(a^dag - a) = T J T^dag with T = diag(i^n), hence
//   D(r e^{i phi}) = P Q exp(-i r Lambda) Q^T P^dag,  P = diag(e^{i n (phi + pi/2)}).
struct GeneratorSpectrum {
    Eigen::MatrixXd vecs;
    RVector vals;
};

std::shared_ptr<const GeneratorSpectrum> generator_spectrum(int dim) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const GeneratorSpectrum>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(dim);
    if (it != cache.end()) return it->second;

    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n + 1 < dim; ++n) {
        j(n + 1, n) = std::sqrt(static_cast<double>(n + 1));
        j(n, n + 1) = j(n + 1, n);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(j);
    auto spec = std::make_shared<GeneratorSpectrum>();
    spec->vecs = solver.eigenvectors();
    spec->vals = solver.eigenvalues();
    cache.emplace(dim, spec);
    return spec;
}

CVector frame_phases(Complex beta, int dim) {
    const double phi = std::arg(beta) + M_PI / 2.0;
    CVector p(dim);
    for (int n = 0; n < dim; ++n) p(n) = std::polar(1.0, n * phi);
    return p;
}

CVector spectral_phases(const GeneratorSpectrum& spec, double r) {
    const int dim = static_cast<int>(spec.vals.size());
    CVector e(dim);
    for (int k = 0; k < dim; ++k) e(k) = std::polar(1.0, -r * spec.vals(k));
    return e;
}

CVector coherent_amplitudes(Complex alpha, int dim) {
    CVector amps = CVector::Zero(dim);
    const double r = std::abs(alpha);
    if (r == 0.0) {
        amps(0) = 1.0;
        return amps;
    }
    const double phi = std::arg(alpha);
    const double log_r = std::log(r);
    for (int n = 0; n < dim; ++n) {
        const double log_mag = -0.5 * r * r + n * log_r - 0.5 * std::lgamma(n + 1.0);
        amps(n) = std::polar(std::exp(log_mag), n * phi);
    }
    return amps;
}

}  // namespace

FieldState::FieldState(CVector amps) : amps_(std::move(amps)) {
    require_dim(static_cast<int>(amps_.size()));
    const double norm = amps_.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error("field state has zero or non-finite norm");
    }
    amps_ /= norm;
}

Operator::Operator(CMatrix mat) : mat_(std::move(mat)) {
    if (mat_.rows() != mat_.cols()) throw DimensionError("operator matrix must be square");
    require_dim(static_cast<int>(mat_.rows()));
}

Operator Operator::operator*(const Operator& rhs) const {
    if (dim() != rhs.dim()) throw DimensionError("operator dimension mismatch");
    return Operator(mat_ * rhs.mat_);
}

FieldState Operator::apply(const FieldState& state) const {
    if (dim() != state.dim()) throw DimensionError("operator/state dimension mismatch");
    return FieldState(mat_ * state.amps());
}

double Operator::unitarity_error() const {
    const CMatrix r = mat_.adjoint() * mat_ - CMatrix::Identity(dim(), dim());
    return r.cwiseAbs().maxCoeff();
}

double Operator::hermiticity_error() const {
    return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
}

FieldState fock_basis(int n, int dim) {
    require_dim(dim);
    if (n < 0 || n >= dim) {
        throw DimensionError("Fock index " + std::to_string(n) + " outside [0, " +
                             std::to_string(dim) + ")");
    }
    CVector amps = CVector::Zero(dim);
    amps(n) = 1.0;
    return FieldState(std::move(amps));
}

int min_truncation_dim(double alpha_max) {
    const double a = std::abs(alpha_max);
    return static_cast<int>(std::ceil(a * a + 6.0 * a + 10.0));
}

FieldState coherent(Complex alpha, int dim) {
    require_dim(dim);
    const int needed = min_truncation_dim(std::abs(alpha));
    if (dim < needed) {
        throw TruncationError("dim " + std::to_string(dim) + " too small for |alpha| = " +
                              std::to_string(std::abs(alpha)) + " (need " +
                              std::to_string(needed) + ")");
    }
    return FieldState(coherent_amplitudes(alpha, dim));
}

FieldState cat_state(Complex alpha, Complex phase, int dim) {
    if (std::abs(std::abs(phase) - 1.0) > 1e-12) throw Error("cat phase must have modulus 1");
    const FieldState plus = coherent(alpha, dim);
    const FieldState minus = coherent(-alpha, dim);
    return FieldState(plus.amps() + phase * minus.amps());
}

FieldState coherent_superposition(const std::vector<Complex>& alphas,
                                  const std::vector<Complex>& weights, int dim) {
    require_dim(dim);
    if (alphas.size() != weights.size() || alphas.empty()) {
        throw Error("coherent_superposition needs matching, non-empty inputs");
    }
    CVector sum = CVector::Zero(dim);
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        CVector c = coherent_amplitudes(alphas[k], dim);
        sum += weights[k] * c / c.norm();
    }
    return FieldState(std::move(sum));
}

Operator annihilation_op(int dim) {
    require_dim(dim);
    CMatrix a = CMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return Operator(std::move(a));
}

Operator creation_op(int dim) { return annihilation_op(dim).adjoint(); }

Operator number_op(int dim) {
    require_dim(dim);
    CMatrix n = CMatrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return Operator(std::move(n));
}

Operator parity_op(int dim) {
    require_dim(dim);
    CMatrix p = CMatrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return Operator(std::move(p));
}

Operator identity_op(int dim) {
    require_dim(dim);
    return Operator(CMatrix::Identity(dim, dim));
}

Operator displacement_op(Complex beta, int dim) {
    require_dim(dim);
    if (beta == Complex(0.0)) return identity_op(dim);
    const auto spec = generator_spectrum(dim);
    const CVector e = spectral_phases(*spec, std::abs(beta));
    const CVector p = frame_phases(beta, dim);
    const CMatrix q = spec->vecs.cast<Complex>();
    CMatrix m = q * e.asDiagonal() * q.transpose();
    m = p.asDiagonal() * m * p.conjugate().asDiagonal();
    return Operator(std::move(m));
}

CVector apply_displacement(Complex beta, const CVector& v) {
    const int dim = static_cast<int>(v.size());
    require_dim(dim);
    if (beta == Complex(0.0)) return v;
    const auto spec = generator_spectrum(dim);
    const CVector p = frame_phases(beta, dim);
    CVector w = p.conjugate().cwiseProduct(v);
    w = spec->vecs.transpose().cast<Complex>() * w;
    w = w.cwiseProduct(spectral_phases(*spec, std::abs(beta)));
    w = spec->vecs.cast<Complex>() * w;
    return p.cwiseProduct(w);
}

CVector displaced_fock(int s, Complex gamma, int dim) {
    if (s < 0 || s >= dim) throw DimensionError("displaced_fock: index out of range");
    CVector e = CVector::Zero(dim);
    e(s) = 1.0;
    return apply_displacement(gamma, e);
}

RVector photon_distribution(const FieldState& state) { return state.amps().cwiseAbs2(); }

double mean_energy(const FieldState& state) {
    const RVector p = photon_distribution(state);
    double e = 0.0;
    for (int n = 0; n < p.size(); ++n) e += n * p(n);
    return e;
}

Complex mean_amplitude(const FieldState& state) {
    const CVector& v = state.amps();
    Complex m = 0.0;
    for (int n = 1; n < v.size(); ++n) m += std::conj(v(n - 1)) * std::sqrt(double(n)) * v(n);
    return m;
}

double min_quadrature_variance_ratio(const FieldState& state) {
    const CVector& v = state.amps();
    const int dim = state.dim();
    Complex m = 0.0;
    Complex m2 = 0.0;
    for (int n = 1; n < dim; ++n) {
        m += std::conj(v(n - 1)) * std::sqrt(double(n)) * v(n);
    }
    for (int n = 2; n < dim; ++n) {
        m2 += std::conj(v(n - 2)) * std::sqrt(double(n) * (n - 1)) * v(n);
    }
    const double nbar = mean_energy(state);
    return 1.0 + 2.0 * (nbar - std::norm(m)) - 2.0 * std::abs(m2 - m * m);
}

double fidelity_pure(const FieldState& a, const FieldState& b) {
    if (a.dim() != b.dim()) throw DimensionError("fidelity_pure: dimension mismatch");
    return std::min(1.0, std::norm(a.amps().dot(b.amps())));
}

TruncationReport truncation_check(const CVector& amps, int guard_levels, double leak_tol) {
    const int dim = static_cast<int>(amps.size());
    if (guard_levels < 0 || guard_levels >= dim) {
        throw DimensionError("guard_levels must lie in [0, dim)");
    }
    TruncationReport report;
    report.guard_levels = guard_levels;
    report.top_population = amps.tail(guard_levels).squaredNorm();
    report.ok = report.top_population < leak_tol;
    return report;
}

TruncationReport truncation_check(const FieldState& state, int guard_levels, double leak_tol) {
    return truncation_check(state.amps(), guard_levels, leak_tol);
}

}  // namespace qzd
