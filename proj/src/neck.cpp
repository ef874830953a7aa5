#include "calor/neck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "calor/frequency.hpp"
#include "calor/gaussquad.hpp"
#include "calor/symmetry.hpp"

namespace calor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ParabolicPlane rebase(const ParabolicPlane& V, const SpaceTimePoint& x) {
    ParabolicPlane W = V;
    W.base = x;
    return W;
}

// Nearest plane point; vertical planes keep the time coordinate.
SpaceTimePoint plane_project(const SpaceTimePoint& p, const ParabolicPlane& V) {
    Eigen::VectorXd px = V.base.x;
    if (V.basis.cols() > 0)
        px += V.basis * (V.basis.transpose() * (p.x - V.base.x));
    return SpaceTimePoint(px, V.vertical ? p.t : V.base.t);
}

std::vector<std::size_t> stride_pick(std::size_t total, std::size_t want) {
    std::vector<std::size_t> idx;
    if (total == 0) return idx;
    std::size_t stride = std::max<std::size_t>(1, total / std::max<std::size_t>(1, want));
    for (std::size_t i = 0; i < total; i += stride) idx.push_back(i);
    return idx;
}

double median_nn_spacing(const std::vector<SpaceTimePoint>& pts) {
    if (pts.size() < 2) return 0.0;
    auto idx = stride_pick(pts.size(), 512);
    std::vector<double> nn;
    nn.reserve(idx.size());
    for (std::size_t i : idx) {
        double best = kInf;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (j == i) continue;
            best = std::min(best, parabolic_distance(pts[i], pts[j]));
        }
        if (std::isfinite(best)) nn.push_back(best);
    }
    if (nn.empty()) return 0.0;
    std::sort(nn.begin(), nn.end());
    return nn[nn.size() / 2];
}

// Lattice sample of the plane ball P^V(c, s) = {c + B w (+ dt) : |w| <= s,
// |dt| <= s^2}; c is assumed to lie on the plane.  Fixed per-direction counts
// keep the cost bounded; membership below is decided on these samples only.
std::vector<SpaceTimePoint> plane_samples(const ParabolicPlane& V,
                                          const SpaceTimePoint& c, double s,
                                          int per_dir = 5, int per_time = 9) {
    int j = (int)V.basis.cols();
    std::vector<double> grid((std::size_t)per_dir);
    for (int i = 0; i < per_dir; ++i)
        grid[(std::size_t)i] = -s + 2.0 * s * i / (per_dir - 1);
    int nt = V.vertical ? per_time : 1;
    std::vector<SpaceTimePoint> out;
    long long total = nt;
    for (int d = 0; d < j; ++d) total *= per_dir;
    for (long long f = 0; f < total; ++f) {
        long long rem = f;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(j);
        for (int d = 0; d < j; ++d) {
            w(d) = grid[(std::size_t)(rem % per_dir)];
            rem /= per_dir;
        }
        if (w.norm() > s) continue;
        double dt = 0.0;
        if (V.vertical && per_time > 1)
            dt = -s * s + 2.0 * s * s * (double)(rem % nt) / (per_time - 1);
        out.emplace_back(c.x + V.basis * w, c.t + dt);
    }
    return out;
}

void validate_region(const NeckRegion& N, const char* who) {
    const std::size_t M = N.centers.size();
    std::ostringstream err;
    err << who << ": ";
    if (M == 0 || N.radii.size() != M) {
        err << "centers/radii mismatch or empty center set";
        throw std::runtime_error(err.str());
    }
    if (!(N.r > 0) || !(N.gamma > 0 && N.gamma < 1) || !(N.delta > 0) || !(N.eta > 0)) {
        err << "need r > 0, gamma in (0,1), delta > 0, eta > 0";
        throw std::runtime_error(err.str());
    }
    for (std::size_t i = 0; i < M; ++i) {
        if (N.radii[i] < 0 || N.radii[i] > N.gamma * N.r * (1 + 1e-9)) {
            err << "center radius outside [0, gamma r]";
            throw std::runtime_error(err.str());
        }
        if (N.centers[i].dim() != N.x0.dim()) {
            err << "center dimension mismatch";
            throw std::runtime_error(err.str());
        }
    }
    if ((int)N.model_plane.basis.rows() != N.x0.dim() || N.model_plane.k() != N.k) {
        err << "model plane does not have parabolic dimension k";
        throw std::runtime_error(err.str());
    }
}

double geom_scale(double lo, double hi, int lev, int levels) {
    if (levels <= 1 || hi <= lo) return lo;
    return lo * std::pow(hi / lo, (double)lev / (double)(levels - 1));
}

// Sufficient containment P(x, c s) subset of P(x0, 2r).
bool contained(const SpaceTimePoint& x, double cs, const SpaceTimePoint& x0, double r2) {
    return (x.x - x0.x).norm() + cs <= r2 * (1 + 1e-12) &&
           std::fabs(x.t - x0.t) + cs * cs <= r2 * r2 * (1 + 1e-12);
}

} // namespace

NeckReport verify_neck(const Poly& u, const NeckRegion& N, bool strong,
                       double s_floor, int levels, std::size_t max_centers) {
    validate_region(N, "verify_neck");
    if (u.n() != N.x0.dim())
        throw std::runtime_error("verify_neck: dimension mismatch between u and region");
    if (levels < 2) levels = 2;
    const std::size_t M = N.centers.size();
    const double g = N.gamma, rr = N.r, del = N.delta, eta = N.eta;
    if (s_floor <= 0) s_floor = g * g * rr;
    const double s_hi = rr / (g * g * g);

    NeckReport rep;
    rep.strong_checked = strong;

    // (n1) the balls P(x, gamma^2 r_x) are pairwise disjoint, and
    // (n5) the radius function is parabolically delta-Lipschitz.
    {
        auto pick = stride_pick(M, 4096);
        double m1 = kInf, m5 = kInf;
        for (std::size_t a = 0; a < pick.size(); ++a) {
            for (std::size_t b = a + 1; b < pick.size(); ++b) {
                const auto& xa = N.centers[pick[a]];
                const auto& xb = N.centers[pick[b]];
                double ra = g * g * N.radii[pick[a]];
                double rb = g * g * N.radii[pick[b]];
                double dx = (xa.x - xb.x).norm();
                double dt = std::fabs(xa.t - xb.t);
                double m;
                if (ra + rb <= 0)
                    m = (dx > 0 || dt > 0) ? 1.0 : -1.0;
                else
                    m = std::max(dx / (ra + rb), dt / (ra * ra + rb * rb)) - 1.0;
                m1 = std::min(m1, m);
                double dp = parabolic_distance(xa, xb);
                double dr = std::fabs(N.radii[pick[a]] - N.radii[pick[b]]);
                if (dp > 0)
                    m5 = std::min(m5, (del * dp - dr) / (del * dp));
                else if (dr > 0)
                    m5 = std::min(m5, -1.0);
            }
        }
        rep.n1.margin = m1;
        rep.n1.pass = m1 >= 0;
        rep.n5.margin = m5;
        rep.n5.pass = m5 >= 0;
        std::ostringstream os;
        os << pick.size() << " of " << M << " centers paired";
        rep.n1.note = rep.n5.note = os.str();
    }

    // (n2) frequency pinched near m and (n3) k- but not (k+1)-symmetric,
    // scanned per center over the band [max(r_x, s_floor), gamma^{-3} r].
    auto pick = stride_pick(M, max_centers);
    const bool kp1_admissible = N.k + 1 <= u.n() + 2;
    struct CenterMargins {
        double n2 = kInf, sym = kInf, notsym = kInf;
        std::string err;
    };
    std::vector<CenterMargins> cm(pick.size());
#pragma omp parallel for schedule(dynamic)
    for (long long ii = 0; ii < (long long)pick.size(); ++ii) {
        auto& c = cm[(std::size_t)ii];
        try {
            const SpaceTimePoint& x = N.centers[pick[(std::size_t)ii]];
            double s_lo = std::max(N.radii[pick[(std::size_t)ii]], s_floor);
            FrequencyEvaluator ev(u, x);
            ParabolicPlane Vx = rebase(N.model_plane, x);
            for (int lev = 0; lev < levels; ++lev) {
                double s = geom_scale(s_lo, s_hi, lev, levels);
                Rat tau = Rat(s) * Rat(s);
                double nd = to_double(ev.N(tau));
                c.n2 = std::min(c.n2, (del - std::fabs(nd - (double)N.m)) / del);
                double sc = symmetry_score(u, x, s, Vx).score;
                c.sym = std::min(c.sym, (del - sc) / del);
                if (kp1_admissible) {
                    double best = best_symmetry_plane(u, x, s, N.k + 1).score;
                    c.notsym = std::min(c.notsym, (best - eta) / eta);
                }
            }
        } catch (const std::exception& e) {
            c.err = e.what();
        }
    }
    {
        double m2 = kInf, m3 = kInf;
        std::string err;
        for (const auto& c : cm) {
            if (!c.err.empty()) err = c.err;
            m2 = std::min(m2, c.n2);
            m3 = std::min(m3, std::min(c.sym, c.notsym));
        }
        if (!kp1_admissible)
            rep.n3.note = "no (k+1)-planes exist in this dimension; only the "
                          "k-symmetry half was scanned";
        if (!err.empty()) {
            rep.n2.pass = rep.n3.pass = false;
            rep.n2.note = rep.n3.note = err;
            rep.n2.margin = rep.n3.margin = -kInf;
        } else {
            rep.n2.margin = m2;
            rep.n2.pass = m2 > 0;
            rep.n3.margin = m3;
            rep.n3.pass = m3 > 0;
        }
    }

    // (n4) the center set hugs the model plane (a) and, conversely, the plane
    // patch through each center is covered by the center balls (b); the strong
    // form tightens the covering radius to gamma s.
    {
        double m4a = kInf, m4b = kInf, m4s = kInf, cc = 0.0;
        std::string err;
#pragma omp parallel for schedule(dynamic)
        for (long long ii = 0; ii < (long long)pick.size(); ++ii) {
            double l4a = kInf, l4b = kInf, l4s = kInf, lcc = 0.0;
            std::string lerr;
            try {
                const SpaceTimePoint& x = N.centers[pick[(std::size_t)ii]];
                double s_lo = std::max(N.radii[pick[(std::size_t)ii]], s_floor);
                ParabolicPlane Vx = rebase(N.model_plane, x);
                for (int lev = 0; lev < levels; ++lev) {
                    double s = geom_scale(s_lo, s_hi, lev, levels);
                    if (!contained(x, s, N.x0, 2.0 * rr)) continue;
                    for (std::size_t z = 0; z < M; ++z) {
                        if (parabolic_distance(N.centers[z], x) >= s) continue;
                        double d = plane_distance(N.centers[z], Vx);
                        l4a = std::min(l4a, (del * s - d) / (del * s));
                    }
                    for (const auto& p : plane_samples(Vx, x, s)) {
                        double creq = kInf, dmin = kInf;
                        for (std::size_t y = 0; y < M; ++y) {
                            double d = parabolic_distance(p, N.centers[y]);
                            creq = std::min(creq, d / (g * (s + N.radii[y])));
                            dmin = std::min(dmin, d);
                        }
                        lcc = std::max(lcc, creq);
                        l4b = std::min(l4b, (10.0 - creq) / 10.0);
                        if (strong) l4s = std::min(l4s, (g * s - dmin) / (g * s));
                    }
                }
            } catch (const std::exception& e) {
                lerr = e.what();
            }
#pragma omp critical(calor_neck_n4)
            {
                m4a = std::min(m4a, l4a);
                m4b = std::min(m4b, l4b);
                m4s = std::min(m4s, l4s);
                cc = std::max(cc, lcc);
                if (!lerr.empty()) err = lerr;
            }
        }
        if (!err.empty()) {
            rep.n4a.pass = rep.n4b.pass = false;
            rep.n4a.note = rep.n4b.note = err;
            rep.n4a.margin = rep.n4b.margin = -kInf;
        } else {
            rep.n4a.margin = m4a;
            rep.n4a.pass = m4a > 0;
            rep.n4b.margin = m4b;
            rep.n4b.pass = m4b > 0;
            rep.cover_constant = cc;
            if (strong) {
                rep.n4b_strong.margin = m4s;
                rep.n4b_strong.pass = m4s > 0;
            }
        }
    }

    rep.pass = rep.n1.pass && rep.n2.pass && rep.n3.pass && rep.n4a.pass &&
               rep.n4b.pass && rep.n5.pass && (!strong || rep.n4b_strong.pass);
    return rep;
}

WhitneyReport whitney_cover_check(const NeckRegion& N, double cover_slack,
                                  std::size_t max_centers, int levels) {
    validate_region(N, "whitney_cover_check");
    if (levels < 1) levels = 1;
    const std::size_t M = N.centers.size();
    const double g = N.gamma, rr = N.r;
    if (cover_slack <= 0) {
        cover_slack = median_nn_spacing(N.centers);
        if (cover_slack <= 0) cover_slack = g * g * rr;
    }
    ParabolicPlane V0 = N.model_plane;
    V0.base = N.x0;

    WhitneyReport w;
    for (std::size_t i : stride_pick(M, max_centers)) {
        const SpaceTimePoint& x = N.centers[i];
        double rx = N.radii[i];
        double s_lo = rx > 0 ? rx / g : g * g * rr;
        if (s_lo > rr) {
            w.skipped += levels;
            continue;
        }
        for (int lev = 0; lev < levels; ++lev) {
            double s = geom_scale(s_lo, rr, lev, levels);
            if (!contained(x, 1.5 * s, N.x0, 2.0 * rr)) {
                ++w.skipped;
                continue;
            }
            ++w.checked;
            SpaceTimePoint px = plane_project(x, V0);
            for (const auto& p : plane_samples(V0, px, 7.0 * s / 4.0)) {
                // A finite region only claims the covering inside its own
                // ball; past the closed ball there are no centers at all.
                if (parabolic_distance(p, N.x0) > 2.0 * rr) continue;
                double gap = kInf;
                for (std::size_t z = 0; z < M; ++z) {
                    if (parabolic_distance(N.centers[z], x) >= 9.0 * s / 5.0) continue;
                    double d = parabolic_distance(p, plane_project(N.centers[z], V0));
                    gap = std::min(gap, d - std::max(N.radii[z], cover_slack));
                }
                if (gap > 0) {
                    w.covered = false;
                    w.worst_gap = std::max(w.worst_gap, gap);
                    if (w.uncovered.size() < 16) w.uncovered.push_back(p);
                }
            }
        }
    }
    return w;
}

WeightedCloud packing_measure(const NeckRegion& N, int k_eff, double h0) {
    validate_region(N, "packing_measure");
    if (k_eff < 0) k_eff = N.x0.dim() + 1;
    if (h0 <= 0) {
        h0 = median_nn_spacing(N.centers);
        if (h0 <= 0) h0 = N.gamma * N.gamma * N.r;
    }
    WeightedCloud mu;
    mu.points = N.centers;
    mu.weights.reserve(N.centers.size());
    for (double rx : N.radii)
        mu.weights.push_back(std::pow(rx > 0 ? rx : h0, (double)k_eff));
    return mu;
}

namespace {

// N_y(s^2) at a fixed scale, for arbitrary base points y, through smeared
// polynomials; one construction serves every sample.
struct ScaleProbe {
    double tau = 0.0;
    Poly sh, se;

    double N_at(const SpaceTimePoint& y) const {
        double h = sh.eval(y.x, y.t);
        if (!(h > 1e-300)) return kInf;
        return 2.0 * tau * se.eval(y.x, y.t) / h;
    }
};

ScaleProbe make_probe(const Poly& usq, const Poly& gsq, double s) {
    Rat t = Rat(s) * Rat(s);
    return ScaleProbe{to_double(t), gauss_smear(usq, t), gauss_smear(gsq, t)};
}

} // namespace

NeckDecomposition greedy_neck_decomposition(const Poly& u, const ParabolicBall& ball,
                                            int k, double delta, double eta,
                                            double r_star, const DecompParams& prm) {
    const int n = u.n();
    if (ball.center.dim() != n)
        throw std::runtime_error("greedy_neck_decomposition: dimension mismatch");
    if (!(ball.r > 0) || !(r_star > 0) || r_star > ball.r)
        throw std::runtime_error("greedy_neck_decomposition: need 0 < r_star <= r");
    if (!(delta > 0 && delta < 1) || !(eta > 0))
        throw std::runtime_error("greedy_neck_decomposition: need delta in (0,1), eta > 0");
    if (k < 1 || k > n + 2)
        throw std::runtime_error("greedy_neck_decomposition: k outside [1, n+2]");
    if (!(prm.alpha > 0) || !(prm.gamma > 0 && prm.gamma < 1))
        throw std::runtime_error("greedy_neck_decomposition: bad alpha/gamma");

    Poly usq = u * u;
    Poly gsq(n);
    for (int i = 0; i < n; ++i) {
        Poly d = u.dx(i);
        gsq = gsq + d * d;
    }

    NeckDecomposition out;
    long count = 0;
    const double g = prm.gamma;

    // Pinched-point sampler: a 9^{n+1} lattice on P(x, 4 rho) filtered by
    // |N_y(s^2) - m| <= delta across five scales in [delta rho, rho/delta],
    // plus one refinement lattice at quarter spacing around the best sample.
    auto pinched_set = [&](const SpaceTimePoint& x, double rho, int m,
                           SpaceTimePoint* best_pt) {
        std::vector<ScaleProbe> probes;
        for (int j = 0; j < 5; ++j)
            probes.push_back(make_probe(usq, gsq, geom_scale(delta * rho, rho / delta, j, 5)));
        auto dev = [&](const SpaceTimePoint& y) {
            double worst = 0.0;
            for (const auto& pr : probes) {
                double nv = pr.N_at(y);
                if (!std::isfinite(nv)) return kInf;
                worst = std::max(worst, std::fabs(nv - (double)m));
            }
            return worst;
        };
        std::vector<SpaceTimePoint> pinched;
        double best_dev = kInf;
        SpaceTimePoint best = x;
        auto sweep = [&](SpaceTimePoint c, double hx, double ht) {
            long long total = 1;
            for (int d = 0; d < n + 1; ++d) total *= 9;
            for (long long f = 0; f < total; ++f) {
                long long rem = f;
                Eigen::VectorXd y = c.x;
                double nrm2 = 0.0;
                for (int d = 0; d < n; ++d) {
                    double off = (double)(rem % 9 - 4) * hx;
                    rem /= 9;
                    y(d) += off;
                    nrm2 += off * off;
                }
                double toff = (double)(rem % 9 - 4) * ht;
                SpaceTimePoint p(y, c.t + toff);
                if (parabolic_distance(p, x) >= 4.0 * rho || nrm2 > 16.0 * rho * rho)
                    continue;
                double dv = dev(p);
                if (dv < best_dev) {
                    best_dev = dv;
                    best = p;
                }
                if (dv <= delta) pinched.push_back(p);
            }
        };
        sweep(x, rho, 4.0 * rho * rho);
        sweep(best, rho / 4.0, rho * rho);
        if (best_pt) *best_pt = best;
        return pinched;
    };

    // b-test: some sample of P(x, 4 rho) has (k+1,1)-pinching <= eta at scale
    // 100 rho.  Coarse 3^{n+1} lattice, nearest samples first.
    auto is_b = [&](const SpaceTimePoint& x, double rho, unsigned seed) {
        std::vector<SpaceTimePoint> samples;
        long long total = 1;
        for (int d = 0; d < n + 1; ++d) total *= 3;
        for (long long f = 0; f < total; ++f) {
            long long rem = f;
            Eigen::VectorXd y = x.x;
            for (int d = 0; d < n; ++d) {
                y(d) += (double)(rem % 3 - 1) * 2.0 * rho;
                rem /= 3;
            }
            samples.emplace_back(y, x.t + (double)(rem % 3 - 1) * 8.0 * rho * rho);
        }
        std::sort(samples.begin(), samples.end(),
                  [&](const SpaceTimePoint& a, const SpaceTimePoint& b) {
                      return parabolic_distance(a, x) < parabolic_distance(b, x);
                  });
        for (const auto& y : samples) {
            auto rep = kalpha_pinching(u, y, 100.0 * rho, k + 1, 1.0, {}, seed, 2000);
            if (rep.search_ok && rep.kalpha <= eta) return true;
        }
        return false;
    };

    // Neck emission for a c-ball: the model plane comes from the pinched set
    // itself (span) with the best-plane heuristic as fallback; centers are a
    // plane lattice of spacing 2 r_c so the covering axiom holds with room,
    // and every center ball is pushed to the terminal ledger.
    auto emit_neck = [&](const SpaceTimePoint& anchor, double rho, int m,
                         const std::vector<SpaceTimePoint>& pinched, bool spatial) {
        ParabolicPlane V;
        bool built = false;
        try {
            IndependentSet iset;
            iset.points = pinched;
            iset.spatial = spatial;
            iset.alpha = prm.alpha * rho;
            V = basis_from_independent(iset);
            built = V.k() == k;
        } catch (const std::exception&) {
            built = false;
        }
        if (!built) V = best_symmetry_plane(u, anchor, rho, k).plane;
        V.base = anchor;

        double rc = std::min(std::max(r_star, g * g * rho), g * rho);
        double a = 2.0 * rc;
        // cap the lattice; widening the spacing only loosens the covering
        // margin, which verify_neck reports honestly
        int j = (int)V.basis.cols();
        auto lattice_count = [&](double sp) {
            double cnt = V.vertical ? 2.0 * std::floor(4.0 * rho * rho / (sp * sp)) + 1 : 1.0;
            for (int d = 0; d < j; ++d) cnt *= 2.0 * std::floor(2.0 * rho / sp) + 1;
            return cnt;
        };
        while (lattice_count(a) > 131072.0) a *= 2.0;

        NeckRegion neck;
        neck.x0 = anchor;
        neck.r = rho;
        neck.model_plane = V;
        neck.m = m;
        neck.k = k;
        neck.delta = delta;
        neck.eta = eta;
        neck.gamma = g;
        int ms = (int)std::floor(2.0 * rho / a);
        long long mt = V.vertical ? (long long)std::floor(4.0 * rho * rho / (a * a)) : 0;
        for (long long q = -mt; q <= mt; ++q) {
            std::function<void(int, Eigen::VectorXd)> rec = [&](int d, Eigen::VectorXd w) {
                if (d == j) {
                    if (w.norm() > 2.0 * rho) return;
                    SpaceTimePoint c(anchor.x + V.basis * w, anchor.t + (double)q * a * a);
                    if (parabolic_distance(c, anchor) > 2.0 * rho) return;
                    neck.centers.push_back(c);
                    neck.radii.push_back(rc);
                    return;
                }
                for (int i = -ms; i <= ms; ++i) {
                    w(d) = (double)i * a;
                    rec(d + 1, w);
                }
            };
            rec(0, Eigen::VectorXd::Zero(j));
        }
        out.ledger.neck += std::pow(rho, k);
        for (std::size_t i = 0; i < neck.centers.size(); ++i) {
            out.f_balls.push_back(ParabolicBall{neck.centers[i], rc});
            out.ledger.f += std::pow(rc, k);
        }
        out.necks.push_back(std::move(neck));
    };

    // Half-scale subdivision used by d- and e-balls: spatial spacing keeps the
    // Euclidean cell radius under rho/4, the time spacing keeps |dt| under
    // rho^2/4, so the children at radius rho/2 cover P(x, rho).
    auto children_of = [&](const SpaceTimePoint& x, double rho) {
        int root = std::max(1, (int)std::ceil(std::sqrt((double)n)));
        double hx = rho / (2.0 * root);
        double ht = rho * rho / 4.0;
        int kx = (int)std::floor(rho / hx + 1e-9);
        std::vector<SpaceTimePoint> kids;
        std::function<void(int, Eigen::VectorXd)> rec = [&](int d, Eigen::VectorXd y) {
            if (d == n) {
                for (int q = -4; q <= 4; ++q)
                    kids.emplace_back(y, x.t + (double)q * ht);
                return;
            }
            for (int i = -kx; i <= kx; ++i) {
                y(d) = x.x(d) + (double)i * hx;
                rec(d + 1, y);
            }
        };
        rec(0, x.x);
        return kids;
    };

    std::function<void(const SpaceTimePoint&, double, int)> classify =
        [&](const SpaceTimePoint& x, double rho, int depth) {
            ++count;
            if (count > prm.ball_budget) out.budget_exceeded = true;
            if (rho <= r_star * (1 + 1e-12) || depth >= prm.depth_cap ||
                out.budget_exceeded) {
                out.f_balls.push_back(ParabolicBall{x, rho});
                out.ledger.f += std::pow(rho, k);
                out.trace.push_back({ParabolicBall{x, rho}, BallClass::F, depth});
                return;
            }

            if (is_b(x, rho, prm.seed + (unsigned)count)) {
                out.b_balls.push_back(ParabolicBall{x, rho});
                out.ledger.b += std::pow(rho, k);
                out.trace.push_back({ParabolicBall{x, rho}, BallClass::B, depth});
                return;
            }

            ScaleProbe probe = make_probe(usq, gsq, rho);
            double nx = probe.N_at(x);
            int m = std::isfinite(nx) ? (int)std::llround(nx) : 0;
            if (m < 0) m = 0;
            SpaceTimePoint anchor = x;
            auto pinched = pinched_set(x, rho, m, &anchor);

            if (!pinched.empty()) {
                auto indep = independence_check(pinched, k, prm.alpha * rho, 1e-3, prm.seed);
                if (indep.independent) {
                    out.trace.push_back({ParabolicBall{x, rho}, BallClass::C, depth});
                    emit_neck(anchor, rho, m, pinched, indep.spatial);
                    return;
                }
            }

            BallClass cls = pinched.empty() ? BallClass::E : BallClass::D;
            out.trace.push_back({ParabolicBall{x, rho}, cls, depth});
            (cls == BallClass::E ? out.ledger.e : out.ledger.d) += std::pow(rho, k);
            for (const auto& y : children_of(x, rho)) classify(y, rho / 2.0, depth + 1);
        };

    classify(ball.center, ball.r, 0);
    return out;
}

} // namespace calor
