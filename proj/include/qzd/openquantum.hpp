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

// Cavity damping of the field density matrix.
//
//   d rho/dt = -i[H, rho] + (n_th + 1)/T_c D[a] rho + n_th/T_c D[a^dag] rho,
//   D[L] rho = L rho L^dag - {L^dag L, rho}/2,
//
// integrated with fixed-step RK4. Kicks are instantaneous CP maps placed at
// the midpoint of their pulse; damping runs over the whole pulse.

#ifndef QZD_OPENQUANTUM_HPP
#define QZD_OPENQUANTUM_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qzd/fock.hpp"
#include "qzd/zeno.hpp"

namespace qzd {

class DensityMatrix {
   public:
    /// Square, dim >= 2. Physicality is not enforced here; see check().
    explicit DensityMatrix(CMatrix mat);

    static DensityMatrix from_pure(const FieldState& psi);
    static DensityMatrix maximally_mixed(int dim);

    int dim() const { return static_cast<int>(mat_.rows()); }
    const CMatrix& mat() const { return mat_; }

    double trace() const { return mat_.trace().real(); }
    double purity() const;
    double mean_energy() const;
    double hermiticity_error() const;
    double min_eigenvalue() const;

   private:
    CMatrix mat_;
};

struct LindbladParams {
    /// Energy damping time in seconds. +inf switches damping off.
    double t_c = 0.13;
    double n_th = 0.0;
    /// Integrator step in seconds; 0 selects t_c * 1e-6.
    double dt = 0.0;

    void validate() const;
    double step_size() const;
    double decay_rate() const;
};

/// Right-hand side of the master equation. Traceless and Hermiticity
/// preserving up to rounding.
CMatrix lindblad_rhs(const CMatrix& rho, const CMatrix* hamiltonian, const LindbladParams& params);
CMatrix lindblad_rhs(const DensityMatrix& rho, const Operator& hamiltonian, const LindbladParams& params);

/// Evolves rho for `duration` seconds under H (nullptr for none) with
/// RK4 steps of at most params.step_size().
DensityMatrix evolve_lindblad(const DensityMatrix& rho, const Operator* hamiltonian, double duration,
                              const LindbladParams& params);

/// <psi|rho|psi>, clamped to [0, 1].
double fidelity_mixed(const DensityMatrix& rho, const FieldState& psi);

struct TimedStep {
    Complex displacement = 0.0;
    /// Seconds over which the displacement is driven. 0 applies D(beta)
    /// instantaneously.
    double drive_duration = 0.0;
    /// Dressed kicks last PulseParams::duration(); ideal kicks take no time.
    std::vector<KickSpec> kicks;
};

using TimedSchedule = std::vector<TimedStep>;

struct MasterRecord {
    double t = 0.0;
    double energy = 0.0;
    double purity = 0.0;
    double fidelity = 0.0;
    double trace_err = 0.0;
    /// Probability that the atoms of this step left h.
    double atom_leak = 0.0;
};

struct MasterResult {
    DensityMatrix rho;
    std::vector<MasterRecord> records;
    double total_time = 0.0;
    /// Probability that every atom of the run stayed in h.
    double success_probability = 1.0;
    double max_trace_err = 0.0;
    double max_hermiticity_err = 0.0;
    double min_eigenvalue = 0.0;
    /// Purity before and after each kick-free, drive-free damping segment.
    std::vector<std::pair<double, double>> decay_purities;
};

struct MasterOptions {
    std::optional<FieldState> target;
    /// Abort with PositivityError when an eigenvalue drops below -tol.
    double positivity_tol = 1e-6;
};

/// Runs a timed schedule with damping. Records one row per step (plus t = 0).
MasterResult evolve_master(const DensityMatrix& rho, const TimedSchedule& schedule,
                           const LindbladParams& params, const MasterOptions& options = {});

/// Total wall-clock length of a timed schedule in seconds.
double schedule_duration(const TimedSchedule& schedule);

/// CSV `t_seconds,energy,purity,fidelity_vs_target,trace_err`.
void write_master_csv(const MasterResult& result, std::ostream& out);
void write_master_csv(const MasterResult& result, const std::string& path);

}  // namespace qzd

#endif  // QZD_OPENQUANTUM_HPP
