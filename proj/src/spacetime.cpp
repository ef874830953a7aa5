#include "calor/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace calor {

double parabolic_distance(const SpaceTimePoint& a, const SpaceTimePoint& b) {
    if (a.dim() != b.dim())
        throw std::runtime_error("parabolic_distance: dimension mismatch");
    double ds = (a.x - b.x).norm();
    double dt = std::sqrt(std::fabs(a.t - b.t));
    return std::max(ds, dt);
}

SpaceTimePoint parabolic_scale(const SpaceTimePoint& p, double lambda,
                               const SpaceTimePoint& center) {
    SpaceTimePoint q;
    q.x = center.x + lambda * (p.x - center.x);
    q.t = center.t + lambda * lambda * (p.t - center.t);
    return q;
}

bool ParabolicBall::contains(const SpaceTimePoint& p) const {
    return parabolic_distance(p, center) < r;
}

double plane_distance(const SpaceTimePoint& y, const ParabolicPlane& plane) {
    if (y.dim() != plane.base.dim())
        throw std::runtime_error("plane_distance: dimension mismatch");
    Eigen::VectorXd d = y.x - plane.base.x;
    Eigen::VectorXd perp = d;
    if (plane.basis.cols() > 0)
        perp -= plane.basis * (plane.basis.transpose() * d);
    double ds = perp.norm();
    if (plane.vertical) return ds;
    return std::max(ds, std::sqrt(std::fabs(y.t - plane.base.t)));
}

namespace {

// ---- exact minimum enclosing ball (Welzl, move-to-front) ----------------

struct Ball {
    Eigen::VectorXd c;
    double r2 = -1.0;
    bool contains(const Eigen::VectorXd& p, double slack) const {
        if (r2 < 0) return false;
        return (p - c).squaredNorm() <= r2 * (1.0 + slack) + slack;
    }
};

// Circumsphere of a support set (1..d+1 affinely independent points),
// solved as a least-squares system; returns r2 < 0 on degeneracy.
Ball circumsphere(const std::vector<Eigen::VectorXd>& sup) {
    Ball b;
    if (sup.empty()) return b;
    int m = (int)sup.size() - 1;
    const Eigen::VectorXd& p0 = sup[0];
    if (m == 0) {
        b.c = p0;
        b.r2 = 0.0;
        return b;
    }
    Eigen::MatrixXd A(m, p0.size());
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd d = sup[i + 1] - p0;
        A.row(i) = 2.0 * d.transpose();
        rhs(i) = d.squaredNorm();
    }
    Eigen::VectorXd u = A.colPivHouseholderQr().solve(rhs);
    if ((A * u - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) return b;  // degenerate
    b.c = p0 + u;
    b.r2 = 0.0;
    for (const auto& p : sup) b.r2 = std::max(b.r2, (p - b.c).squaredNorm());
    return b;
}

Ball welzl(std::vector<Eigen::VectorXd> pts, std::mt19937_64& rng) {
    std::shuffle(pts.begin(), pts.end(), rng);
    std::vector<Eigen::VectorXd> sup;
    const double slack = 1e-12;
    Ball best = circumsphere({});
    // Iterated move-to-front; dimension is tiny so the support loop is cheap.
    for (int pass = 0; pass < 2; ++pass) {
        sup.clear();
        best = Ball{};
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (best.contains(pts[i], slack)) continue;
            // grow: find ball of {pts[0..i]} with pts[i] on the boundary
            std::function<Ball(std::size_t, std::vector<Eigen::VectorXd>)> grow =
                [&](std::size_t end, std::vector<Eigen::VectorXd> support) -> Ball {
                Ball b = circumsphere(support);
                if (support.size() >= (std::size_t)pts[0].size() + 1) return b;
                for (std::size_t j = 0; j < end; ++j) {
                    if (!b.contains(pts[j], slack)) {
                        auto s2 = support;
                        s2.push_back(pts[j]);
                        b = grow(j, std::move(s2));
                    }
                }
                return b;
            };
            best = grow(i, {pts[i]});
            // move-to-front
            auto p = pts[i];
            pts.erase(pts.begin() + (long)i);
            pts.insert(pts.begin(), p);
        }
    }
    return best;
}

double cheb_radius(const std::vector<Eigen::VectorXd>& pts, std::mt19937_64& rng,
                   Eigen::VectorXd* center = nullptr) {
    if (pts.empty()) return 0.0;
    Ball b = welzl(pts, rng);
    if (b.r2 < 0) {  // all-degenerate fallback: centroid bound
        Eigen::VectorXd c = Eigen::VectorXd::Zero(pts[0].size());
        for (const auto& p : pts) c += p;
        c /= (double)pts.size();
        double r2 = 0;
        for (const auto& p : pts) r2 = std::max(r2, (p - c).squaredNorm());
        if (center) *center = c;
        return std::sqrt(r2);
    }
    if (center) *center = b.c;
    return std::sqrt(std::max(0.0, b.r2));
}

// Objective: covering radius of the spatial parts projected orthogonally to
// the column span of B (plus, for horizontal planes, the fixed time term).
double perp_cheb(const std::vector<SpaceTimePoint>& pts, const Eigen::MatrixXd& B,
                 std::mt19937_64& rng, Eigen::VectorXd* center = nullptr) {
    std::vector<Eigen::VectorXd> proj(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Eigen::VectorXd d = pts[i].x;
        if (B.cols() > 0) d -= B * (B.transpose() * d);
        proj[i] = d;
    }
    return cheb_radius(proj, rng, center);
}

Eigen::MatrixXd orthonormalize(Eigen::MatrixXd M, double tol = 1e-10) {
    // modified Gram-Schmidt with one reorthogonalization pass
    int n = (int)M.rows();
    Eigen::MatrixXd Q(n, M.cols());
    int r = 0;
    for (int j = 0; j < M.cols(); ++j) {
        Eigen::VectorXd v = M.col(j);
        for (int rep = 0; rep < 2; ++rep)
            for (int i = 0; i < r; ++i) v -= Q.col(i).dot(v) * Q.col(i);
        double nv = v.norm();
        if (nv > tol) Q.col(r++) = v / nv;
    }
    return Q.leftCols(r);
}

// Coordinate descent over the Grassmannian: rotate the frame in the plane of
// one span column and one complement column, golden-section in the angle.
double frame_descent(const std::vector<SpaceTimePoint>& pts, Eigen::MatrixXd& B,
                     std::mt19937_64& rng, int sweeps = 8) {
    int n = (int)pts[0].x.size();
    int j = (int)B.cols();
    if (j == 0 || j == n) return perp_cheb(pts, B, rng);

    // complete B to a full orthonormal frame
    Eigen::MatrixXd full(n, n);
    full.leftCols(j) = B;
    Eigen::MatrixXd reszt = Eigen::MatrixXd::Identity(n, n);
    reszt -= B * B.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(reszt, Eigen::ComputeThinU);
    full.rightCols(n - j) = svd.matrixU().leftCols(n - j);

    double best = perp_cheb(pts, full.leftCols(j), rng);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double sweep_start = best;
        for (int a = 0; a < j; ++a) {
            for (int b = j; b < n; ++b) {
                auto rotated = [&](double th) {
                    Eigen::MatrixXd F = full;
                    F.col(a) = std::cos(th) * full.col(a) + std::sin(th) * full.col(b);
                    F.col(b) = -std::sin(th) * full.col(a) + std::cos(th) * full.col(b);
                    return F;
                };
                auto value = [&](double th) {
                    Eigen::MatrixXd F = rotated(th);
                    return perp_cheb(pts, F.leftCols(j), rng);
                };
                // bracket by sampling, then golden-section
                double lo = -M_PI / 2, hi = M_PI / 2, bth = 0.0, bv = best;
                for (int s = 0; s <= 16; ++s) {
                    double th = lo + (hi - lo) * s / 16.0;
                    double v = value(th);
                    if (v < bv) { bv = v; bth = th; }
                }
                double a1 = bth - (hi - lo) / 16.0, b1 = bth + (hi - lo) / 16.0;
                double x1 = b1 - phi * (b1 - a1), x2 = a1 + phi * (b1 - a1);
                double f1 = value(x1), f2 = value(x2);
                for (int it = 0; it < 40; ++it) {
                    if (f1 < f2) { b1 = x2; x2 = x1; f2 = f1; x1 = b1 - phi * (b1 - a1); f1 = value(x1); }
                    else { a1 = x1; x1 = x2; f1 = f2; x2 = a1 + phi * (b1 - a1); f2 = value(x2); }
                }
                double th = (f1 < f2) ? x1 : x2, v = std::min(f1, f2);
                if (v < best - 1e-15) {
                    best = v;
                    full = rotated(th);
                }
            }
        }
        if (best > sweep_start - 1e-13) break;
    }
    B = full.leftCols(j);
    return best;
}

// All j-subsets of the n coordinate axes, as starting frames.
void axis_frames(int n, int j, std::vector<Eigen::MatrixXd>& out) {
    std::vector<int> idx(j);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == j) {
            Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, j);
            for (int i = 0; i < j; ++i) B(idx[i], i) = 1.0;
            out.push_back(B);
            return;
        }
        for (int i = start; i < n; ++i) { idx[depth] = i; rec(i + 1, depth + 1); }
    };
    if (j >= 0 && j <= n) rec(0, 0);
}

// Best plane of spatial dimension j for one family. Returns the covering
// radius and fills the optimal frame + spatial center.
double best_frame(const std::vector<SpaceTimePoint>& pts, int n, int j,
                  std::mt19937_64& rng, Eigen::MatrixXd& Bout, Eigen::VectorXd& cout) {
    std::vector<Eigen::MatrixXd> starts;
    axis_frames(n, j, starts);
    // PCA start: top-j eigenvectors of the centered scatter
    if (j > 0 && j < n) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
        for (const auto& p : pts) mean += p.x;
        mean /= (double)pts.size();
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
        for (const auto& p : pts) S += (p.x - mean) * (p.x - mean).transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        starts.push_back(es.eigenvectors().rightCols(j));
    }
    // random Stiefel starts
    std::normal_distribution<double> gauss;
    for (int s = 0; s < 6 && j > 0 && j < n; ++s) {
        Eigen::MatrixXd G(n, j);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < j; ++c) G(r, c) = gauss(rng);
        Eigen::MatrixXd Q = orthonormalize(G);
        if (Q.cols() == j) starts.push_back(Q);
    }

    double best = std::numeric_limits<double>::infinity();
    for (auto& B : starts) {
        Eigen::MatrixXd Bl = B;
        double v = frame_descent(pts, Bl, rng);
        if (v < best) {
            best = v;
            Bout = Bl;
        }
    }
    perp_cheb(pts, Bout, rng, &cout);
    return best;
}

} // namespace

IndependenceReport independence_check(const std::vector<SpaceTimePoint>& points,
                                      int k, double alpha, double eps_cert,
                                      unsigned seed) {
    if (points.empty())
        throw std::runtime_error("independence_check: empty point set");
    int n = points[0].dim();
    for (const auto& p : points)
        if (p.dim() != n) throw std::runtime_error("independence_check: mixed dimensions");
    if (k < 1) throw std::runtime_error("independence_check: k must be >= 1");

    std::mt19937_64 rng(seed);
    double tmin = points[0].t, tmax = points[0].t;
    for (const auto& p : points) {
        tmin = std::min(tmin, p.t);
        tmax = std::max(tmax, p.t);
    }
    double time_term = std::sqrt(0.5 * (tmax - tmin));

    IndependenceReport rep;
    rep.covering_radius = std::numeric_limits<double>::infinity();

    // horizontal planes of parabolic dimension k-1: spatial dim k-1 <= n
    if (k - 1 <= n) {
        Eigen::MatrixXd B;
        Eigen::VectorXd c;
        double sp = best_frame(points, n, k - 1, rng, B, c);
        double v = std::max(sp, time_term);
        if (v < rep.covering_radius) {
            rep.covering_radius = v;
            rep.witness.base = SpaceTimePoint(c, 0.5 * (tmin + tmax));
            rep.witness.basis = B;
            rep.witness.vertical = false;
        }
    }
    // vertical planes of parabolic dimension k-1: spatial dim k-3 >= 0
    if (k - 3 >= 0 && k - 3 <= n) {
        Eigen::MatrixXd B;
        Eigen::VectorXd c;
        double v = best_frame(points, n, k - 3, rng, B, c);
        if (v < rep.covering_radius) {
            rep.covering_radius = v;
            rep.witness.base = SpaceTimePoint(c, 0.5 * (tmin + tmax));
            rep.witness.basis = B;
            rep.witness.vertical = true;
        }
    }

    rep.margin = rep.covering_radius - alpha;
    rep.independent = rep.covering_radius > alpha * (1.0 + eps_cert);
    rep.spatial = (tmax - tmin) < alpha * alpha;
    return rep;
}

ParabolicPlane basis_from_independent(const IndependentSet& s, double tol) {
    if (s.points.empty())
        throw std::runtime_error("basis_from_independent: empty set");
    int n = s.points[0].dim();
    int K = (int)s.points.size() - 1;
    Eigen::MatrixXd D(n, std::max(K, 1));
    D.setZero();
    for (int i = 0; i < K; ++i) D.col(i) = s.points[i + 1].x - s.points[0].x;

    Eigen::MatrixXd Q = orthonormalize(D.leftCols(std::max(K, 0)), tol);
    if (s.spatial && (int)Q.cols() < K)
        throw std::runtime_error(
            "basis_from_independent: spatial differences are rank deficient");

    ParabolicPlane plane;
    plane.base = s.points[0];
    plane.basis = Q;
    plane.vertical = !s.spatial;
    return plane;
}

std::vector<SpaceTimePoint> read_points_csv(std::istream& in) {
    std::vector<SpaceTimePoint> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::vector<double> vals;
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() < 2)
            throw std::runtime_error("read_points_csv: row needs at least x1,t");
        SpaceTimePoint p;
        p.x = Eigen::Map<Eigen::VectorXd>(vals.data(), (long)vals.size() - 1);
        p.t = vals.back();
        if (!pts.empty() && p.dim() != pts[0].dim())
            throw std::runtime_error("read_points_csv: inconsistent row width");
        pts.push_back(std::move(p));
    }
    return pts;
}

void write_points_csv(std::ostream& out, const std::vector<SpaceTimePoint>& pts) {
    out.precision(17);
    for (const auto& p : pts) {
        for (int i = 0; i < p.dim(); ++i) out << p.x(i) << ',';
        out << p.t << '\n';
    }
}

} // namespace calor
