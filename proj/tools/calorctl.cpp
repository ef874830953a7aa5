// calorctl: command-line front end for the calor library.
//
//   calorctl verify                 — run the built-in self checks
//   calorctl study <name>           — run a canned experiment (frequency,
//                                     minkowski, neck, graph)
//   calorctl frequency ...          — frequency profile CSV for one function
//   calorctl symmetry ...           — best almost-symmetric plane as JSON
//   calorctl strata ...             — effective nodal/singular set as an RLE dump
//   calorctl minkowski ...          — content of a dumped set at given radii
//   calorctl neck ...               — neck decomposition (same as `study neck`)
//
// Global flags (--config/--out/--format/--quad-order/--seed/--threads) apply
// to every subcommand; a JSON config loads first and explicit flags override.
// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "calor/caloricpoly.hpp"
#include "calor/cli.hpp"
#include "calor/frequency.hpp"
#include "calor/spacetime.hpp"
#include "calor/strata.hpp"
#include "calor/symmetry.hpp"

namespace {

using namespace calor;
using nlohmann::json;

std::vector<double> parse_csv_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Poly resolve_fn(const ExperimentConfig& cfg) {
    if (cfg.fn_path.empty()) return heat_polynomial(1, 0, 1);
    return load_poly_spec(cfg.fn_path);
}

SpaceTimePoint resolve_base(const ExperimentConfig& cfg, int n) {
    if (cfg.base.empty()) return SpaceTimePoint(Eigen::VectorXd::Zero(n), 0.0);
    if ((int)cfg.base.size() != n + 1)
        throw std::runtime_error("config error: base needs n spatial entries plus t");
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = cfg.base[(std::size_t)i];
    return SpaceTimePoint(x, cfg.base.back());
}

json plane_json(const ParabolicPlane& V) {
    json basis = json::array();
    for (int c = 0; c < (int)V.basis.cols(); ++c) {
        json col = json::array();
        for (int r = 0; r < (int)V.basis.rows(); ++r) col.push_back(V.basis(r, c));
        basis.push_back(col);
    }
    json base = json::array();
    for (int i = 0; i < (int)V.base.x.size(); ++i) base.push_back(V.base.x(i));
    base.push_back(V.base.t);
    return json{{"base", base}, {"vertical", V.vertical}, {"k", V.k()}, {"basis", basis}};
}

int cmd_frequency(const ExperimentConfig& cfg, const std::string& out_file) {
    Poly u = resolve_fn(cfg);
    SpaceTimePoint base = resolve_base(cfg, u.n());
    auto prof = profile(u, base, cfg.tau_min, cfg.tau_max);
    std::ofstream out(out_file);
    if (!out) throw std::runtime_error("cannot write " + out_file);
    out << "# config " << config_hash(cfg) << "\n";
    out << "tau,H,E,N,D\n";
    for (std::size_t i = 0; i < prof.taus.size(); ++i)
        out << fmt(prof.taus[i]) << ',' << fmt(prof.H[i]) << ',' << fmt(prof.E[i])
            << ',' << fmt(prof.N[i]) << ',' << fmt(prof.D[i]) << "\n";
    std::cout << "wrote " << prof.taus.size() << " rows to " << out_file << "\n";
    return 0;
}

int cmd_symmetry(const ExperimentConfig& cfg, const std::string& out_file) {
    Poly u = resolve_fn(cfg);
    SpaceTimePoint base = resolve_base(cfg, u.n());
    auto sc = best_symmetry_plane(u, base, cfg.r, cfg.k);
    json j{{"plane", plane_json(sc.plane)},
           {"mode", sc.mode == SymmetryMode::Spatial ? "spatial" : "temporal"},
           {"r", sc.r},
           {"score", sc.score},
           {"config", config_hash(cfg)}};
    std::cout << j.dump(2) << "\n";
    if (!out_file.empty()) {
        std::ofstream out(out_file);
        if (!out) throw std::runtime_error("cannot write " + out_file);
        out << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_strata(const ExperimentConfig& cfg, const std::string& mode,
               const std::string& out_file) {
    Poly u = resolve_fn(cfg);
    SpaceTimePoint base = resolve_base(cfg, u.n());
    ParabolicBall domain{base, cfg.r};
    GridRegion g = [&]() -> GridRegion {
        if (mode == "effective-nodal")
            return effective_nodal(u, domain, cfg.r_star, cfg.grid_h);
        if (mode == "singular")
            return effective_singular(u, domain, cfg.r_star, cfg.grid_h);
        if (mode == "stratum")
            return stratum_membership(u, StratumSpec{cfg.k, cfg.eps, cfg.r_star, cfg.r},
                                      domain, cfg.grid_h);
        throw std::runtime_error(
            "config error: mode must be effective-nodal, singular, or stratum");
    }();
    g.rle_dump(out_file);
    std::cout << "wrote " << g.count() << " occupied cells to " << out_file << "\n";
    return 0;
}

int cmd_minkowski(const ExperimentConfig& cfg, const std::string& set_path,
                  const std::string& radii_str, double ambient_r,
                  const std::string& out_file) {
    GridRegion g = GridRegion::rle_parse(set_path);
    auto radii = parse_csv_doubles(radii_str);
    if (radii.empty()) throw std::runtime_error("config error: no radii given");
    ParabolicBall ambient{g.bounds.center, ambient_r > 0 ? ambient_r : g.bounds.r};
    std::ofstream out(out_file);
    if (!out) throw std::runtime_error("cannot write " + out_file);
    out << "# config " << config_hash(cfg) << "\n";
    out << "r,volume\n";
    for (double r : radii)
        out << fmt(r) << ',' << fmt(minkowski_content(g, r, ambient)) << "\n";
    std::cout << "wrote " << radii.size() << " rows to " << out_file << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    ExperimentConfig cfg;
    // The config file loads before flag parsing so that flags override it.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                cfg = load_config(argv[i + 1]);
            } catch (const std::exception& e) {
                std::cerr << e.what() << "\n";
                return 2;
            }
        }
    }

    CLI::App app{"geometric analysis of caloric functions"};
    app.require_subcommand(1);

    std::string config_path, base_str;
    app.add_option("--config", config_path, "JSON config file; flags override it");
    app.add_option("--out", cfg.out_dir, "output directory for study artifacts");
    app.add_option("--format", cfg.format, "artifact format: csv or json");
    app.add_option("--quad-order", cfg.quad_order, "Gauss-Hermite order");
    app.add_option("--seed", cfg.seed, "seed for randomized sweeps");
    app.add_option("--threads", cfg.threads, "worker threads (0 = library default)");
    app.add_option("--fn", cfg.fn_path, "caloric function spec (JSON); empty = h_1");
    app.add_option("--base", base_str, "base point as x1,..,xn,t");
    app.add_option("--r", cfg.r, "reference scale");
    app.add_option("--tau-min", cfg.tau_min, "smallest time scale");
    app.add_option("--tau-max", cfg.tau_max, "largest time scale");
    app.add_option("--k", cfg.k, "plane / stratum dimension");
    app.add_option("--gamma", cfg.gamma, "neck packing ratio");
    app.add_option("--delta", cfg.delta, "frequency pinching tolerance");
    app.add_option("--eta", cfg.eta, "symmetry-drop threshold");
    app.add_option("--eps", cfg.eps, "stratum pinching threshold");
    app.add_option("--rstar", cfg.r_star, "stopping scale");
    app.add_option("--grid", cfg.grid_h, "grid spacing");

    auto* freq = app.add_subcommand("frequency", "frequency profile CSV");
    std::string freq_out = "profile.csv";
    freq->add_option("--out-file", freq_out, "CSV path for the profile");
    freq->fallthrough();

    auto* symm = app.add_subcommand("symmetry", "best almost-symmetric plane");
    std::string symm_out;
    symm->add_option("--out-file", symm_out, "also write the JSON report here");
    symm->fallthrough();

    auto* strata = app.add_subcommand("strata", "effective nodal/singular sets");
    std::string strata_mode = "effective-nodal", strata_out = "strata.rle";
    strata->add_option("--mode", strata_mode,
                       "effective-nodal (default), singular, or stratum");
    strata->add_option("--out-file", strata_out, "RLE dump path");
    strata->fallthrough();

    auto* mink = app.add_subcommand("minkowski", "content of a dumped set");
    std::string mink_set, mink_radii, mink_out = "minkowski.csv";
    double mink_ambient = 0.0;
    mink->add_option("--set", mink_set, "RLE dump to measure")->required();
    mink->add_option("--radii", mink_radii, "comma-separated radii")->required();
    mink->add_option("--ambient", mink_ambient, "ambient ball radius (default: dump bounds)");
    mink->add_option("--out-file", mink_out, "CSV path");
    mink->fallthrough();

    auto* neck = app.add_subcommand("neck", "neck decomposition");
    neck->fallthrough();

    auto* verify = app.add_subcommand("verify", "run the built-in self checks");
    verify->fallthrough();

    auto* study = app.add_subcommand("study", "run a canned experiment");
    std::string study_name;
    study->add_option("name", study_name, "frequency | minkowski | neck | graph")
        ->required();
    study->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (!base_str.empty()) cfg.base = parse_csv_doubles(base_str);

    try {
        if (*verify) {
            auto rep = run_verify(cfg);
            for (const auto& c : rep.checks)
                std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  —  "
                          << c.detail << "\n";
            std::filesystem::create_directories(cfg.out_dir);
            std::ofstream out(cfg.out_dir + "/verify.json");
            out << verify_report_json(rep) << "\n";
            std::cout << (rep.pass ? "all checks passed" : "CHECKS FAILED") << "\n";
            return rep.pass ? 0 : 1;
        }
        if (*study) return run_study(study_name, cfg);
        if (*neck) return run_study("neck", cfg);
        if (*freq) return cmd_frequency(cfg, freq_out);
        if (*symm) return cmd_symmetry(cfg, symm_out);
        if (*strata) return cmd_strata(cfg, strata_mode, strata_out);
        if (*mink) return cmd_minkowski(cfg, mink_set, mink_radii, mink_ambient, mink_out);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::cerr << "error: " << msg << "\n";
        return msg.rfind("config error", 0) == 0 ? 2 : 1;
    }
    return 2;
}
