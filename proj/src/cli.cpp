#include "calor/cli.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "calor/caloricpoly.hpp"
#include "calor/exec.hpp"
#include "calor/frequency.hpp"
#include "calor/gaussquad.hpp"
#include "calor/graph.hpp"
#include "calor/measures.hpp"
#include "calor/neck.hpp"
#include "calor/spacetime.hpp"
#include "calor/strata.hpp"
#include "calor/symmetry.hpp"

namespace calor {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json config_json(const ExperimentConfig& c) {
    return json{{"fn_path", c.fn_path},   {"out_dir", c.out_dir},
                {"format", c.format},     {"quad_order", c.quad_order},
                {"seed", c.seed},         {"threads", c.threads},
                {"base", c.base},         {"r", c.r},
                {"tau_min", c.tau_min},   {"tau_max", c.tau_max},
                {"k", c.k},               {"gamma", c.gamma},
                {"delta", c.delta},       {"eta", c.eta},
                {"eps", c.eps},           {"r_star", c.r_star},
                {"grid_h", c.grid_h}};
}

// The default subject: the coordinate caloric function h_1 in one dimension.
Poly default_fn() { return heat_polynomial(1, 0, 1); }

Poly resolve_fn(const ExperimentConfig& cfg) {
    if (cfg.fn_path.empty()) return default_fn();
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

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config error: cannot write " + path);
    for (const auto& l : lines) out << l << "\n";
}

std::string timestamp() {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::vector<std::string> csv_head(const ExperimentConfig& cfg, const std::string& cols) {
    return {"# config " + config_hash(cfg), "# generated " + timestamp(), cols};
}

} // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
    return config_json(cfg).dump(2);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config error: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("config error: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c.fn_path = j.value("fn_path", c.fn_path);
        c.out_dir = j.value("out_dir", c.out_dir);
        c.format = j.value("format", c.format);
        c.quad_order = j.value("quad_order", c.quad_order);
        c.seed = j.value("seed", c.seed);
        c.threads = j.value("threads", c.threads);
        c.base = j.value("base", c.base);
        c.r = j.value("r", c.r);
        c.tau_min = j.value("tau_min", c.tau_min);
        c.tau_max = j.value("tau_max", c.tau_max);
        c.k = j.value("k", c.k);
        c.gamma = j.value("gamma", c.gamma);
        c.delta = j.value("delta", c.delta);
        c.eta = j.value("eta", c.eta);
        c.eps = j.value("eps", c.eps);
        c.r_star = j.value("r_star", c.r_star);
        c.grid_h = j.value("grid_h", c.grid_h);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("config error: ") + e.what());
    }
    if (c.format != "csv" && c.format != "json")
        throw std::runtime_error("config error: format must be csv or json");
    return c;
}

void dump_config(const std::string& path, const ExperimentConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config error: cannot write " + path);
    out << config_to_json(cfg) << "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
    // where the artifacts land is not part of the experiment's identity
    json j = config_json(cfg);
    j.erase("out_dir");
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
    return buf;
}

namespace {

void add_check(VerifyReport& rep, const std::string& name,
               const std::function<std::pair<bool, std::string>()>& body) {
    CheckResult c;
    c.name = name;
    try {
        auto [ok, detail] = body();
        c.pass = ok;
        c.detail = detail;
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = std::string("exception: ") + e.what();
    }
    rep.pass = rep.pass && c.pass;
    rep.checks.push_back(std::move(c));
}

bool poly_is_zero(const Poly& p) { return p.sup_bound(1.0, 1.0) == 0.0; }

} // namespace

VerifyReport run_verify(const ExperimentConfig& cfg) {
    VerifyReport rep;
    if (cfg.threads > 0) set_threads(cfg.threads);

    add_check(rep, "spacetime/scale-invariance", [] {
        Eigen::VectorXd a(2), b(2);
        a << 0.3, -1.2;
        b << 1.7, 0.4;
        SpaceTimePoint p(a, 0.25), q(b, -1.5);
        SpaceTimePoint c(Eigen::VectorXd::Zero(2), 0.0);
        double lhs = parabolic_distance(parabolic_scale(p, 3.0, c),
                                        parabolic_scale(q, 3.0, c));
        double rhs = 3.0 * parabolic_distance(p, q);
        bool ok = std::fabs(lhs - rhs) <= 1e-12 * (1.0 + rhs);
        return std::make_pair(ok, "|d(3p,3q) - 3 d(p,q)| = " + fmt(std::fabs(lhs - rhs)));
    });

    add_check(rep, "caloricpoly/heat-polynomials-caloric", [] {
        for (int m = 0; m <= 6; ++m)
            if (!poly_is_zero(heat_residual(heat_polynomial(m, 0, 2))))
                return std::make_pair(false, "residual nonzero at degree " + std::to_string(m));
        if (!poly_is_zero(heat_residual(heat_basis({2, 3}, 2))))
            return std::make_pair(false, std::string("mixed basis residual nonzero"));
        return std::make_pair(true, std::string("degrees 0..6 and mixed (2,3)"));
    });

    add_check(rep, "caloricpoly/spectral-reconstruction", [&] {
        Poly u = random_caloric(2, 5, cfg.seed);
        std::vector<Rat> x0{Rat(1) / 2, Rat(-1) / 3};
        auto pieces = spectral_decompose(u, x0, Rat(1) / 4);
        Poly sum(2);
        for (const auto& p : pieces) sum = sum + p;
        return std::make_pair(poly_is_zero(sum - u), std::string("sum of pieces == u"));
    });

    add_check(rep, "caloricpoly/commutator-zero", [&] {
        Poly u = random_caloric(2, 4, cfg.seed + 1);
        DriftOperator a1{{Rat(0), Rat(0)}, Rat(1)};
        DriftOperator a2{{Rat(1), Rat(-2)}, Rat(3) / 2};
        auto res = commutator_residuals(u, a1, a2);
        bool ok = poly_is_zero(res.spatial) && poly_is_zero(res.temporal);
        return std::make_pair(ok, std::string("both residuals identically zero"));
    });

    add_check(rep, "gaussquad/moment-exactness", [&] {
        Poly x8 = Poly::var(1, 0);
        Poly p = x8 * x8;
        p = p * p;
        p = p * p; // x^8
        Rat exact = gauss_moment_integral(p, Rat(1) / 2);
        HeatKernelMeasure mu{SpaceTimePoint(Eigen::VectorXd::Zero(1), 0.0), -0.5};
        auto got = integrate_fn(
            [](const Eigen::VectorXd& x, double) { return std::pow(x(0), 8); }, mu,
            cfg.quad_order, Exec::Parallel, 1e-9, cfg.quad_order);
        double rel = std::fabs(got.value - to_double(exact)) /
                     std::max(1.0, std::fabs(to_double(exact)));
        return std::make_pair(rel < 1e-9,
                              "order " + std::to_string(cfg.quad_order) +
                                  " relative error " + fmt(rel) + " on x^8");
    });

    add_check(rep, "frequency/heat-polynomial-frequency", [] {
        for (int m = 1; m <= 4; ++m) {
            FrequencyEvaluator ev(heat_polynomial(m, 0, 1),
                                  SpaceTimePoint(Eigen::VectorXd::Zero(1), 0.0));
            if (ev.N(Rat(1)) != Rat(m))
                return std::make_pair(false, "N != m at m = " + std::to_string(m));
            if (ev.N(Rat(3) / 7) != Rat(m))
                return std::make_pair(false, "N not scale-free at m = " + std::to_string(m));
        }
        return std::make_pair(true, std::string("N(h_m) = m exactly, m = 1..4"));
    });

    add_check(rep, "frequency/mixture-closed-forms", [] {
        Poly u = Poly::constant(1, Rat(1)) + heat_polynomial(2, 0, 1);
        FrequencyEvaluator ev(u, SpaceTimePoint(Eigen::VectorXd::Zero(1), 0.0));
        if (ev.H(Rat(1)) != Rat(9)) return std::make_pair(false, std::string("H(1) != 9"));
        if (ev.E(Rat(1)) != Rat(16)) return std::make_pair(false, std::string("E(1) != 16"));
        if (ev.N(Rat(1)) != Rat(16) / 9)
            return std::make_pair(false, std::string("N(1) != 16/9"));
        double d = ev.D(Rat(1));
        bool ok = std::fabs(d - std::log2(33.0 / 9.0)) < 1e-12;
        return std::make_pair(ok, std::string("H=9, E=16, N=16/9, D=log2(33/9)"));
    });

    add_check(rep, "frequency/monotone-in-scale", [] {
        Poly u = Poly::constant(1, Rat(1)) + heat_polynomial(1, 0, 1) +
                 heat_polynomial(2, 0, 1);
        FrequencyEvaluator ev(u, SpaceTimePoint(Eigen::VectorXd::Zero(1), 0.0));
        Rat prev(-1);
        for (int i = 0; i <= 16; ++i) {
            Rat tau = Rat(1) / 4 + (Rat(4) - Rat(1) / 4) * i / 16;
            Rat nv = ev.N(tau);
            if (nv < prev) return std::make_pair(false, std::string("N decreased"));
            prev = nv;
        }
        return std::make_pair(true, std::string("N nondecreasing on [1/4, 4]"));
    });

    add_check(rep, "symmetry/h1-plane-score", [] {
        ParabolicPlane V;
        V.base = SpaceTimePoint(Eigen::VectorXd::Zero(1), 0.0);
        V.basis = Eigen::MatrixXd::Identity(1, 1);
        V.vertical = false;
        auto sc = symmetry_score(heat_polynomial(1, 0, 1), V.base, 1.0, V);
        bool ok = std::fabs(sc.score - 1.0) < 1e-12;
        return std::make_pair(ok, "score(h_1, span e_1, r=1) = " + fmt(sc.score));
    });

    add_check(rep, "measures/planar-beta-zero", [] {
        WeightedCloud mu;
        for (int i = 0; i < 12; ++i) {
            Eigen::VectorXd x(2);
            x << 0.0, 0.3 * i - 1.5;
            mu.points.emplace_back(x, 0.07 * i * i - 0.4);
            mu.weights.push_back(1.0 + 0.1 * i);
        }
        auto b = beta_number(mu, SpaceTimePoint(Eigen::VectorXd::Zero(2), 0.0), 4.0, 3);
        return std::make_pair(b.value < 1e-18, "beta^2 = " + fmt(b.value));
    });

    add_check(rep, "strata/rle-roundtrip", [&] {
        GridRegion g = GridRegion::empty(
            ParabolicBall{SpaceTimePoint(Eigen::VectorXd::Zero(1), 0.0), 0.5}, 1.0 / 16);
        g.set({3}, 2, true);
        g.set({3}, 3, true);
        g.set({7}, 40, true);
        std::filesystem::create_directories(cfg.out_dir);
        std::string path = cfg.out_dir + "/verify_roundtrip.rle";
        g.rle_dump(path);
        GridRegion h = GridRegion::rle_parse(path);
        bool ok = h.count() == g.count() && h.get({3}, 2) && h.get({3}, 3) &&
                  h.get({7}, 40) && h.hx == g.hx;
        return std::make_pair(ok, std::string("dump/parse preserves occupancy"));
    });

    add_check(rep, "neck/packing-weights", [] {
        NeckRegion N;
        N.x0 = SpaceTimePoint(Eigen::VectorXd::Zero(1), 0.0);
        N.r = 1.0;
        N.k = 2;
        N.model_plane.base = N.x0;
        N.model_plane.basis = Eigen::MatrixXd::Zero(1, 0);
        N.model_plane.vertical = true;
        for (int q = -2; q <= 2; ++q) {
            N.centers.emplace_back(Eigen::VectorXd::Zero(1), 0.1 * q);
            N.radii.push_back(1.0 / 32);
        }
        auto mu = packing_measure(N, 2);
        for (double w : mu.weights)
            if (std::fabs(w - 1.0 / 1024) > 1e-18)
                return std::make_pair(false, std::string("weight != r^2"));
        return std::make_pair(true, std::string("atom weights equal r_x^k"));
    });

    add_check(rep, "graph/half-derivative-tone", [] {
        const std::size_t W = 64;
        const double dt = 1.0 / (double)W;
        std::vector<double> phi(W);
        for (std::size_t i = 0; i < W; ++i)
            phi[i] = std::cos(2.0 * M_PI * 5.0 * (double)i * dt);
        auto four = half_time_derivative(phi, dt, HalfDtBackend::Fourier);
        double target = std::sqrt(2.0 * M_PI * 5.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < W; ++i)
            worst = std::max(worst, std::fabs(four[i] - target * phi[i]));
        return std::make_pair(worst < 1e-10, "multiplier deviation " + fmt(worst));
    });

    add_check(rep, "graph/bmo-constant-zero", [] {
        std::vector<SpaceTimePoint> pts;
        std::vector<double> g;
        for (int i = 0; i < 20; ++i) {
            Eigen::VectorXd x(1);
            x << 0.1 * i;
            pts.emplace_back(x, 0.05 * i);
            g.push_back(3.25);
        }
        double b = bmo_norm(pts, g);
        return std::make_pair(b == 0.0, "bmo(const) = " + fmt(b));
    });

    add_check(rep, "exec/serial-parallel-bitwise", [&] {
        HeatKernelMeasure mu{SpaceTimePoint(Eigen::VectorXd::Zero(2), 0.0), -1.0};
        auto f = [](const Eigen::VectorXd& x, double) {
            return std::sin(3 * x(0)) * std::exp(0.2 * x(1)) + x(0) * x(0);
        };
        auto a = integrate_fn(f, mu, cfg.quad_order, Exec::Serial);
        auto b = integrate_fn(f, mu, cfg.quad_order, Exec::Parallel);
        return std::make_pair(a.value == b.value,
                              "serial " + fmt(a.value) + " vs parallel " + fmt(b.value));
    });

    return rep;
}

std::string verify_report_json(const VerifyReport& rep) {
    json j;
    j["pass"] = rep.pass;
    j["checks"] = json::array();
    for (const auto& c : rep.checks)
        j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return j.dump(2);
}

namespace {

int study_frequency(const ExperimentConfig& cfg) {
    Poly u = resolve_fn(cfg);
    SpaceTimePoint base = resolve_base(cfg, u.n());
    auto prof = profile(u, base, cfg.tau_min, cfg.tau_max);
    auto lines = csv_head(cfg, "tau,H,E,N,D");
    for (std::size_t i = 0; i < prof.taus.size(); ++i)
        lines.push_back(fmt(prof.taus[i]) + "," + fmt(prof.H[i]) + "," + fmt(prof.E[i]) +
                        "," + fmt(prof.N[i]) + "," + fmt(prof.D[i]));
    write_lines(cfg.out_dir + "/frequency_profile.csv", lines);

    json meta{{"config", config_hash(cfg)},
              {"rows", prof.taus.size()},
              {"tau_min", cfg.tau_min},
              {"tau_max", cfg.tau_max}};
    write_lines(cfg.out_dir + "/frequency_profile.json", {meta.dump(2)});
    return 0;
}

int study_minkowski(const ExperimentConfig& cfg) {
    Poly u = resolve_fn(cfg);
    SpaceTimePoint base = resolve_base(cfg, u.n());

    std::vector<double> radii;
    for (int i = 0; i < 6; ++i)
        radii.push_back(1.0 / 16.0 * std::pow(16.0 * 0.7071067811865476, i / 5.0));
    double hx = std::min(cfg.grid_h, radii.front() / 8.0);

    GridRegion region = effective_nodal(u, ParabolicBall{base, 1.0}, radii.front(), hx);
    ParabolicBall ambient{base, 1.0};

    std::vector<std::pair<double, double>> vols;
    auto lines = csv_head(cfg, "r,volume");
    for (double r : radii) {
        double v = minkowski_content(region, r, ambient);
        vols.push_back({r, v});
        lines.push_back(fmt(r) + "," + fmt(v));
    }
    write_lines(cfg.out_dir + "/minkowski_volumes.csv", lines);

    auto fit = dimension_fit(vols, 200, cfg.seed);
    json meta{{"config", config_hash(cfg)},
              {"slope", fit.slope},
              {"intercept", fit.intercept},
              {"ci_lo", fit.ci_lo},
              {"ci_hi", fit.ci_hi},
              {"cells", region.count()}};
    write_lines(cfg.out_dir + "/minkowski_fit.json", {meta.dump(2)});
    return 0;
}

json plane_json(const ParabolicPlane& V) {
    json basis = json::array();
    for (int c = 0; c < (int)V.basis.cols(); ++c) {
        json col = json::array();
        for (int r = 0; r < (int)V.basis.rows(); ++r) col.push_back(V.basis(r, c));
        basis.push_back(col);
    }
    return json{{"vertical", V.vertical}, {"k", V.k()}, {"basis", basis}};
}

int study_neck(const ExperimentConfig& cfg) {
    Poly u = resolve_fn(cfg);
    SpaceTimePoint base = resolve_base(cfg, u.n());
    DecompParams prm;
    prm.gamma = cfg.gamma;
    prm.seed = cfg.seed;
    auto dec = greedy_neck_decomposition(u, ParabolicBall{base, cfg.r}, cfg.k,
                                         cfg.delta, cfg.eta, cfg.r_star, prm);

    json tree{{"config", config_hash(cfg)},
              {"budget_exceeded", dec.budget_exceeded},
              {"counts",
               {{"neck", dec.necks.size()},
                {"b", dec.b_balls.size()},
                {"f", dec.f_balls.size()},
                {"trace", dec.trace.size()}}},
              {"ledger",
               {{"neck", dec.ledger.neck},
                {"b", dec.ledger.b},
                {"d", dec.ledger.d},
                {"e", dec.ledger.e},
                {"f", dec.ledger.f},
                {"total", dec.ledger.total()}}}};
    tree["necks"] = json::array();
    for (const auto& nk : dec.necks) {
        json jn{{"r", nk.r},       {"m", nk.m},
                {"k", nk.k},       {"centers", nk.centers.size()},
                {"delta", nk.delta}, {"eta", nk.eta},
                {"plane", plane_json(nk.model_plane)}};
        tree["necks"].push_back(jn);
    }
    write_lines(cfg.out_dir + "/neck_tree.json", {tree.dump(2)});

    auto lines = csv_head(cfg, "class,count,sum_rk");
    lines.push_back("neck," + std::to_string(dec.necks.size()) + "," + fmt(dec.ledger.neck));
    lines.push_back("b," + std::to_string(dec.b_balls.size()) + "," + fmt(dec.ledger.b));
    long dcount = 0, ecount = 0;
    for (const auto& t : dec.trace) {
        dcount += t.cls == BallClass::D;
        ecount += t.cls == BallClass::E;
    }
    lines.push_back("d," + std::to_string(dcount) + "," + fmt(dec.ledger.d));
    lines.push_back("e," + std::to_string(ecount) + "," + fmt(dec.ledger.e));
    lines.push_back("f," + std::to_string(dec.f_balls.size()) + "," + fmt(dec.ledger.f));
    write_lines(cfg.out_dir + "/neck_ledger.csv", lines);

    if (!dec.necks.empty()) {
        auto mu = packing_measure(dec.necks.front());
        write_cloud_csv(cfg.out_dir + "/neck_centers.csv", mu);
    }
    return 0;
}

int study_graph(const ExperimentConfig& cfg) {
    Poly u = resolve_fn(cfg);
    SpaceTimePoint base = resolve_base(cfg, u.n());
    DecompParams prm;
    prm.gamma = cfg.gamma;
    prm.seed = cfg.seed;
    auto dec = greedy_neck_decomposition(u, ParabolicBall{base, cfg.r}, cfg.k,
                                         cfg.delta, cfg.eta, cfg.r_star, prm);
    json out{{"config", config_hash(cfg)}, {"necks", dec.necks.size()}};
    if (dec.necks.empty()) {
        out["note"] = "no neck regions found at this configuration";
        write_lines(cfg.out_dir + "/graph_report.json", {out.dump(2)});
        return 0;
    }
    const NeckRegion& nk = dec.necks.front();
    auto mu = packing_measure(nk);
    auto G = graph_from_centers(mu, nk.model_plane);
    out["nodes"] = G.nodes.size();
    out["lipschitz_est"] = G.lipschitz_est;

    // drill a tapered hole around the anchor and extend across it
    std::vector<double> holes(G.nodes.size(), 0.0);
    for (std::size_t i = 0; i < G.nodes.size(); ++i) {
        double d = parabolic_distance(G.node_point(G.nodes[i]), nk.x0);
        holes[i] = std::max(0.0, (nk.r / 4.0 - d) / 2.0);
    }
    auto ext = whitney_extension(G, holes);
    out["extension"] = {{"max_affine_residual", ext.max_affine_residual},
                        {"lipschitz_est", ext.lipschitz_est},
                        {"pieces", ext.pou.centers.size()}};

    auto reg = regularity_report(ext.filled);
    out["regularity"] = {{"lipschitz_est", reg.lipschitz_est},
                         {"carleson_energy", reg.carleson_energy},
                         {"bmo_half_dt", reg.bmo_half_dt},
                         {"ratio", reg.ratio},
                         {"regular", reg.regular}};
    write_lines(cfg.out_dir + "/graph_report.json", {out.dump(2)});
    return 0;
}

} // namespace

int run_study(const std::string& name, const ExperimentConfig& cfg) {
    try {
        std::filesystem::create_directories(cfg.out_dir);
        if (cfg.threads > 0) set_threads(cfg.threads);
        if (name == "frequency") return study_frequency(cfg);
        if (name == "minkowski") return study_minkowski(cfg);
        if (name == "neck") return study_neck(cfg);
        if (name == "graph") return study_graph(cfg);
        std::cerr << "unknown study: " << name
                  << " (expected frequency|minkowski|neck|graph)\n";
        return 2;
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::cerr << "study " << name << " failed: " << msg << "\n";
        return msg.rfind("config error", 0) == 0 ? 2 : 1;
    }
}

} // namespace calor
