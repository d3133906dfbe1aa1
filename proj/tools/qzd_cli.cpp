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

// qzd: run, sweep and inspect Zeno-dynamics experiments from JSON configs.
//
// Exit codes: 0 success, 1 a run finished but reported failure, 2 bad usage
// or config, 3 a run aborted with an error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "qzd/app.hpp"

namespace {

using qzd::app::Json;

constexpr int kExitRunFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitError = 3;

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw qzd::ConfigError("cannot open config '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw qzd::ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

// A path to a JSON file, or the name of a built-in preset.
Json load_base(const std::string& source) {
    if (std::filesystem::exists(source)) return load_json(source);
    return qzd::app::preset_json(source);
}

int run_one(Json cfg, const std::string& out, int dim, bool quiet) {
    if (dim > 0) cfg["dim"] = dim;
    const qzd::app::RunConfig config = qzd::app::RunConfig::from_json(cfg);
    const qzd::app::RunSummary summary = qzd::app::run(config, {out, quiet});
    if (!quiet) std::cout << summary.to_json().dump(2) << '\n';
    if (!summary.ok) {
        std::cerr << "qzd: run failed: " << summary.error << '\n';
        return kExitRunFailed;
    }
    return 0;
}

// "key=[v1, v2]" or "key=v1,v2" (numbers or JSON values).
std::pair<std::string, Json> parse_range(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw qzd::ConfigError("--range expects key=values, got '" + spec + "'");
    const std::string key = spec.substr(0, eq);
    std::string text = spec.substr(eq + 1);
    if (text.empty() || text.front() != '[') text = "[" + text + "]";
    Json values;
    try {
        values = Json::parse(text);
    } catch (const Json::parse_error&) {
        throw qzd::ConfigError("--range '" + key + "': values must be JSON, got '" + spec.substr(eq + 1) + "'");
    }
    if (!values.is_array() || values.empty()) throw qzd::ConfigError("--range '" + key + "' has no values");
    return {key, values};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zeno dynamics in phase space: exclusion circles, tweezers and cat states"};
    app.require_subcommand(1);

    std::string out;
    int dim = 0;
    bool quiet = false;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--out,-o", out, "Directory for trace, Wigner and summary files");
        sub->add_option("--dim", dim, "Override the Fock truncation")->check(CLI::PositiveNumber);
        sub->add_flag("--quiet,-q", quiet, "Print nothing on success");
    };

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run a JSON config");
    run_cmd->add_option("config", config_path, "Config file")->required();
    common(run_cmd);

    std::string preset_name;
    bool print_only = false;
    auto* preset_cmd = app.add_subcommand("preset", "Run a built-in preset");
    preset_cmd->add_option("name", preset_name, "Preset name (see list-presets)")->required();
    preset_cmd->add_flag("--print", print_only, "Print the preset config instead of running it");
    common(preset_cmd);

    auto* list_cmd = app.add_subcommand("list-presets", "List built-in presets");

    std::string sweep_base;
    std::vector<std::string> ranges;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the Cartesian product of parameter ranges");
    sweep_cmd->add_option("base", sweep_base, "Config file or preset name")->required();
    sweep_cmd->add_option("--range,-r", ranges, "Dotted key and values, e.g. kick.theta=[0.5,1,2]")->required();
    sweep_cmd->add_option("--workers,-j", workers, "Parallel runs")->check(CLI::PositiveNumber);
    common(sweep_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list_cmd) {
            for (const auto& [name, text] : qzd::app::presets()) {
                const Json j = Json::parse(text);
                std::cout << name << "  " << j.value("description", "") << '\n';
            }
            return 0;
        }
        if (*run_cmd) return run_one(load_json(config_path), out, dim, quiet);
        if (*preset_cmd) {
            Json cfg = qzd::app::preset_json(preset_name);
            if (print_only) {
                std::cout << cfg.dump(2) << '\n';
                return 0;
            }
            return run_one(cfg, out, dim, quiet);
        }
        if (*sweep_cmd) {
            Json base = load_base(sweep_base);
            if (dim > 0) base["dim"] = dim;
            base["wigner"] = Json{{"enabled", false}};
            Json range_json = Json::object();
            for (const auto& r : ranges) {
                auto [key, values] = parse_range(r);
                range_json[key] = values;
            }
            const auto rows = qzd::app::sweep(base, range_json, workers);
            const std::string dir = out.empty() ? "." : out;
            std::filesystem::create_directories(dir);
            const std::string csv = (std::filesystem::path(dir) / "sweep.csv").string();
            qzd::app::write_sweep_csv(range_json, rows, csv);
            int failed = 0;
            std::ptrdiff_t best = -1;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto& s = rows[i].summary;
                if (!s.ok) ++failed;
                if (s.ok && s.fidelity && (best < 0 || *s.fidelity > *rows[best].summary.fidelity)) {
                    best = static_cast<std::ptrdiff_t>(i);
                }
            }
            if (!quiet) {
                std::cout << "wrote " << csv << " (" << rows.size() << " points, " << failed << " failed)\n";
                if (best >= 0) {
                    std::cout << "best fidelity " << *rows[best].summary.fidelity << " at";
                    std::size_t k = 0;
                    for (const auto& [key, v] : range_json.items()) std::cout << ' ' << key << '=' << rows[best].values[k++].dump();
                    std::cout << '\n';
                }
            }
            return failed == 0 ? 0 : kExitRunFailed;
        }
    } catch (const qzd::ConfigError& e) {
        std::cerr << "qzd: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "qzd: error: " << e.what() << '\n';
        return kExitError;
    }
    return 0;
}
