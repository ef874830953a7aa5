#pragma once

// Experiment harness: serializable configuration, the cross-module invariant
// suite, and the canonical studies with machine-readable artifacts.

#include <string>
#include <vector>

namespace calor {

struct ExperimentConfig {
    std::string fn_path;        // function spec (JSON); empty = h_1 in 1d
    std::string out_dir = ".";
    std::string format = "csv"; // csv | json
    int quad_order = 48;
    unsigned seed = 2026;
    int threads = 0; // 0 keeps the runtime default

    std::vector<double> base; // x1..xn then t; empty = origin
    double r = 1.0;
    double tau_min = 1.0 / 64.0, tau_max = 4.0;
    int k = 2;
    double gamma = 0.125, delta = 0.05, eta = 0.05, eps = 1e-3;
    double r_star = 1.0 / 32.0;
    double grid_h = 1.0 / 64.0;
};

// JSON round-trip with explicit defaults for absent fields.  load throws
// std::runtime_error prefixed "config error:" on malformed content.
ExperimentConfig load_config(const std::string& path);
void dump_config(const std::string& path, const ExperimentConfig& cfg);
std::string config_to_json(const ExperimentConfig& cfg);

// FNV-1a (64-bit, hex) over the canonical JSON dump with the output location
// removed; stamped on artifacts.
std::string config_hash(const ExperimentConfig& cfg);

struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool pass = true;
};

// Cross-module invariant suite with named checks. quad_order below the
// exactness threshold is reported here, not silently absorbed.
VerifyReport run_verify(const ExperimentConfig& cfg);
std::string verify_report_json(const VerifyReport& rep);

// Canonical studies: "frequency", "minkowski", "neck", "graph".  Artifacts
// land in cfg.out_dir, every file headed by the config hash.  Returns 0 on
// success, 1 on an assertion-grade failure, 2 on config/usage errors.
int run_study(const std::string& name, const ExperimentConfig& cfg);

} // namespace calor
