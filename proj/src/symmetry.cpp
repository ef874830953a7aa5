#include "calor/symmetry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

namespace calor {

namespace {

std::vector<Rat> rat_vec(const Eigen::VectorXd& x) {
    std::vector<Rat> v((std::size_t)x.size());
    for (long i = 0; i < x.size(); ++i) v[(std::size_t)i] = Rat(x(i));
    return v;
}

Eigen::MatrixXd orthonormal_copy(const Eigen::MatrixXd& B) {
    Eigen::MatrixXd Q = B;
    for (long c = 0; c < Q.cols(); ++c) {
        for (long p = 0; p < c; ++p) Q.col(c) -= Q.col(p).dot(Q.col(c)) * Q.col(p);
        double nrm = Q.col(c).norm();
        if (nrm < 1e-12)
            throw std::runtime_error("symmetry: plane basis is rank-deficient");
        Q.col(c) /= nrm;
    }
    return Q;
}

// ascending eigenvalues with the first-nonzero-component-positive convention
void fix_signs(Eigen::MatrixXd& V) {
    for (long c = 0; c < V.cols(); ++c)
        for (long i = 0; i < V.rows(); ++i) {
            if (std::fabs(V(i, c)) > 1e-14) {
                if (V(i, c) < 0) V.col(c) = -V.col(c);
                break;
            }
        }
}

} // namespace

SymmetryScore symmetry_score(const Poly& u, const SpaceTimePoint& x0, double r,
                             const ParabolicPlane& V) {
    if (r <= 0) throw std::runtime_error("symmetry_score: r must be positive");
    if (V.basis.rows() != x0.dim() && V.basis.cols() > 0)
        throw std::runtime_error("symmetry_score: plane dimension mismatch");

    Poly w = u.shifted(rat_vec(x0.x), Rat(x0.t));
    Rat r2 = Rat(r) * Rat(r);
    Rat h = gauss_moment_integral((w * w).at_time(-r2), r2);
    if (to_double(h) <= 1e-300)
        throw std::runtime_error("symmetry_score: degenerate function (H vanishes)");

    Eigen::MatrixXd B = V.basis.cols() > 0 ? orthonormal_copy(V.basis)
                                           : Eigen::MatrixXd(x0.dim(), 0);
    Poly proj(u.n());
    for (long c = 0; c < B.cols(); ++c) {
        Poly dir(u.n());
        for (int i = 0; i < u.n(); ++i) dir = dir + w.dx(i) * Rat(B(i, c));
        proj = proj + dir * dir;
    }
    Rat score = gauss_moment_integral(proj.at_time(-r2), r2) * r2 * 2 / h;
    if (V.vertical) {
        Poly dt = w.dt();
        score += gauss_moment_integral((dt * dt).at_time(-r2), r2) * r2 * r2 * 2 / h;
    }

    SymmetryScore out;
    out.plane = V;
    out.plane.base = x0;
    out.plane.basis = B;
    out.r = r;
    out.score = to_double(score);
    out.mode = V.vertical ? SymmetryMode::Temporal : SymmetryMode::Spatial;
    return out;
}

SymmetryScore best_symmetry_plane(const Poly& u, const SpaceTimePoint& x0, double r,
                                  int k) {
    int n = x0.dim();
    if (k < 1 || k > n + 2)
        throw std::runtime_error("best_symmetry_plane: need 1 <= k <= n+2");
    if (r <= 0) throw std::runtime_error("best_symmetry_plane: r must be positive");

    Poly w = u.shifted(rat_vec(x0.x), Rat(x0.t));
    Rat r2 = Rat(r) * Rat(r);

    // gradient Gram matrix at scale r^2 (exact integrals, rounded once)
    std::vector<Poly> grads;
    for (int i = 0; i < n; ++i) grads.push_back(w.dx(i));
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = to_double(
                gauss_moment_integral((grads[(std::size_t)i] * grads[(std::size_t)j])
                                          .at_time(-r2),
                                      r2));
            G(i, j) = v;
            G(j, i) = v;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("best_symmetry_plane: eigen-solver failure");
    Eigen::MatrixXd evec = es.eigenvectors();
    fix_signs(evec);

    std::optional<SymmetryScore> best;
    if (k <= n) {
        ParabolicPlane cand;
        cand.base = x0;
        cand.basis = evec.leftCols(k);
        cand.vertical = false;
        best = symmetry_score(u, x0, r, cand);
    }
    if (k >= 2 && k - 2 <= n) {
        ParabolicPlane cand;
        cand.base = x0;
        cand.basis = evec.leftCols(k - 2);
        cand.vertical = true;
        SymmetryScore sv = symmetry_score(u, x0, r, cand);
        if (!best || sv.score < best->score) best = sv;
    }
    if (!best)
        throw std::runtime_error("best_symmetry_plane: no admissible candidate");
    return *best;
}

PinchSymReport pinching_to_symmetry(const Poly& u, const SpaceTimePoint& x0, double r,
                                    int k, double alpha, double ratio_bound,
                                    double threshold) {
    PinchSymReport rep;
    PinchingReport pr = kalpha_pinching(u, x0, r, k, alpha);
    rep.pinching = pr.kalpha;
    rep.best = best_symmetry_plane(u, x0, r, k);
    if (rep.pinching == 0.0)
        rep.ratio = rep.best.score == 0.0 ? 0.0
                                          : std::numeric_limits<double>::infinity();
    else
        rep.ratio = rep.best.score / rep.pinching;
    rep.bound_checked = pr.search_ok && rep.pinching < threshold;
    if (rep.bound_checked)
        rep.bound_ok = rep.best.score <= ratio_bound * rep.pinching + 1e-12;
    return rep;
}

SymPinchReport symmetry_to_pinching(const Poly& u, const SpaceTimePoint& x0, double r,
                                    double kappa, const ParabolicPlane& V,
                                    double eps) {
    if (!(r > 0 && kappa > 0 && kappa <= 1 && eps > 0))
        throw std::runtime_error(
            "symmetry_to_pinching: need r > 0, kappa in (0,1], eps > 0");
    SymPinchReport rep;
    rep.score_100r = symmetry_score(u, x0, 100 * r, V).score;
    rep.pre_symmetric = rep.score_100r <= eps;

    FrequencyEvaluator ev(u, x0);
    Rat r2 = Rat(r) * Rat(r);
    Rat k2 = Rat(kappa) * Rat(kappa);
    rep.freq_span = std::fabs(to_double(ev.N(r2 * 100) - ev.N(k2 * r2 / 100)));
    rep.pre_pinched = rep.freq_span <= eps;

    // sample grid on (x0 + V) inside P(x0, 10r)
    Eigen::MatrixXd B = V.basis.cols() > 0 ? orthonormal_copy(V.basis)
                                           : Eigen::MatrixXd(x0.dim(), 0);
    long jdim = B.cols() + (V.vertical ? 1 : 0);
    int per = jdim <= 2 ? 5 : 3;
    double span = 10.0 * r;
    std::vector<SpaceTimePoint> pts;
    long total = 1;
    for (long d = 0; d < jdim; ++d) total *= per;
    for (long idx = 0; idx < total; ++idx) {
        long rem = idx;
        SpaceTimePoint p = x0;
        for (long d = 0; d < B.cols(); ++d) {
            int step = (int)(rem % per) - per / 2;
            rem /= per;
            p.x += B.col(d) * (0.4 * span * step / std::max(1, per / 2));
        }
        if (V.vertical) {
            int step = (int)(rem % per) - per / 2;
            p.t += 0.4 * span * span * step / std::max(1, per / 2);
        }
        if (parabolic_distance(p, x0) < span) pts.push_back(p);
    }

    rep.samples.resize(pts.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < (long long)pts.size(); ++i) {
        FrequencyEvaluator evi(u, pts[(std::size_t)i]);
        double var = std::fabs(to_double(evi.N(r2 * 50) - evi.N(k2 * r2 / 50)));
        rep.samples[(std::size_t)i] = {pts[(std::size_t)i], var};
    }
    rep.max_variation = 0.0;
    for (const auto& s : rep.samples)
        rep.max_variation = std::max(rep.max_variation, s.variation);
    rep.ratio_to_sqrt_eps = rep.max_variation / std::sqrt(eps);
    return rep;
}

DimReductionTable dimension_reduction_probe(const Poly& u, const SpaceTimePoint& x0,
                                            double r, const ParabolicPlane& V,
                                            double eta, double eps, unsigned seed) {
    if (!(r > 0 && eta > 0 && eps > 0))
        throw std::runtime_error(
            "dimension_reduction_probe: need r, eta, eps positive");
    int n = x0.dim();
    int k = V.k();

    ParabolicPlane W = V;
    W.base = x0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-2.0 * r, 2.0 * r);
    std::uniform_real_distribution<double> ut(-4.0 * r * r, 4.0 * r * r);
    std::vector<SpaceTimePoint> ys;
    for (int tries = 0; tries < 4000 && ys.size() < 12; ++tries) {
        SpaceTimePoint y = x0;
        for (int i = 0; i < n; ++i) y.x(i) += ux(rng);
        y.t += ut(rng);
        if (parabolic_distance(y, x0) >= 2.0 * r) continue;
        if (plane_distance(y, W) <= eta * r) continue;
        ys.push_back(y);
    }

    DimReductionTable table;
    table.min_beta = std::numeric_limits<double>::infinity();
    for (const auto& y : ys) {
        DimReductionRow row;
        row.y = y;
        for (int j = 8; j >= 1; --j) { // fine to coarse; keep the smallest hit
            double beta = std::ldexp(1.0, -j);
            PinchingReport pr = kalpha_pinching(u, y, beta * r, k + 1, 1.0, {},
                                                seed + (unsigned)j, 4000);
            if (pr.search_ok && pr.kalpha < eps) {
                row.found = true;
                row.beta = beta;
                row.value = pr.kalpha;
                break;
            }
        }
        if (row.found) {
            table.any_found = true;
            table.min_beta = std::min(table.min_beta, row.beta);
        }
        table.rows.push_back(row);
    }
    if (!table.any_found) table.min_beta = 0.0;
    return table;
}

} // namespace calor
