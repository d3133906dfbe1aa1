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

// Config-driven experiment runner behind the qzd command-line tool.

#ifndef QZD_APP_HPP
#define QZD_APP_HPP

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qzd/atomkick.hpp"
#include "qzd/openquantum.hpp"
#include "qzd/phasespace.hpp"
#include "qzd/protocols.hpp"
#include "qzd/zeno.hpp"

namespace qzd::app {

using Json = nlohmann::json;

enum class Protocol {
    ZenoConfine,
    ZenoUpper,
    Tangential,
    Fig3Revival,
    TweezerStretch,
    TweezerMove,
    Crush,
    FourCat,
    Realistic,
};

const std::vector<std::string>& protocol_names();
std::string to_string(Protocol p);

struct KickModel {
    bool dressed = false;
    double omega_hz = 50e3;
    double rabi_hz = 0.5e3;
    double theta = 2.0 * M_PI;
    bool include_minus_branch = true;
    AtomMode atom_mode = AtomMode::Coherent;

    PulseParams pulse(int s) const;
};

struct WignerConfig {
    bool enabled = true;
    int nx = kDefaultGridPoints;
    int ny = kDefaultGridPoints;
    std::optional<GridBounds> bounds;
};

struct RealisticConfig {
    double t_c = 0.13;
    double n_th = 0.0;
    double dt = 0.0;
    /// Total pulse time of the run; sets the drive Rabi frequency when > 0.
    double total_duration = 3.4e-3;
    bool compare_undamped = true;
};

/// Validated run description. Unused fields keep their defaults.
struct RunConfig {
    Protocol protocol = Protocol::ZenoConfine;
    int dim = 0;
    int s = 6;
    Complex beta = 0.1;
    Complex alpha_init = 0.0;
    int steps = 0;
    int record_every = 1;
    std::vector<int> snapshots;
    int guard_levels = kDefaultGuardLevels;
    double leak_tol = kDefaultLeakTol;
    KickModel kick;
    WignerConfig wigner;

    // tweezer / stretch / crush geometry
    double cat_alpha = 2.0;
    std::vector<Complex> targets;
    Complex hold = 0.0;
    TweezerOrder order = TweezerOrder::Sequential;
    double adiabatic_cap = kDefaultAdiabaticCap;
    double offset = 2.5;
    int n_components = 4;

    RealisticConfig realistic;

    /// Parses and validates; every problem is collected into one ConfigError.
    static RunConfig from_json(const Json& j);
};

/// Summary of one run; also written as summary.json.
struct RunSummary {
    std::string protocol;
    bool ok = true;
    std::string error;
    int dim = 0;
    int steps_run = 0;
    double final_energy = 0.0;
    std::optional<double> fidelity;
    std::optional<double> fidelity_undamped;
    TruncationReport truncation;
    double max_atom_leak = 0.0;
    double wall_time_s = 0.0;
    Json extra = Json::object();

    Json to_json() const;
};

struct RunOptions {
    /// Directory for artifacts; empty writes nothing.
    std::string out_dir;
    bool quiet = false;
};

/// Runs one configuration. Module errors propagate as exceptions.
RunSummary run(const RunConfig& config, const RunOptions& options);

/// Names and text of the built-in presets.
const std::vector<std::pair<std::string, std::string>>& presets();
Json preset_json(const std::string& name);

/// Sets `value` at a dotted path such as "kick.theta", creating objects.
void set_dotted(Json& j, const std::string& path, const Json& value);

struct SweepRow {
    std::vector<Json> values;
    RunSummary summary;
};

/// Cartesian product of `ranges` (dotted path -> array of values) applied to
/// `base`. Rows come back in lexicographic order of the range indices, the
/// last key varying fastest. Failing points are recorded, not thrown.
std::vector<SweepRow> sweep(const Json& base, const Json& ranges, int workers);

/// sweep.csv: one column per range key, then status and summary metrics.
void write_sweep_csv(const Json& ranges, const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace qzd::app

#endif  // QZD_APP_HPP
