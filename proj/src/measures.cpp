#include "calor/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace calor {

double WeightedCloud::total_weight() const {
    double w = 0.0;
    for (double v : weights) w += v;
    return w;
}

WeightedCloud WeightedCloud::restrict_to(const ParabolicBall& ball) const {
    WeightedCloud out;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (ball.contains(points[i])) {
            out.points.push_back(points[i]);
            out.weights.push_back(weights[i]);
        }
    return out;
}

WeightedCloud read_cloud_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_cloud_csv: cannot open " + path);
    WeightedCloud cloud;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::vector<double> vals;
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() < 3)
            throw std::runtime_error("read_cloud_csv: need columns x1..xn,t,w");
        int n = (int)vals.size() - 2;
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x(i) = vals[(std::size_t)i];
        double w = vals.back();
        if (w <= 0) throw std::runtime_error("read_cloud_csv: weights must be positive");
        cloud.points.emplace_back(x, vals[(std::size_t)n]);
        cloud.weights.push_back(w);
    }
    return cloud;
}

void write_cloud_csv(const std::string& path, const WeightedCloud& cloud) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_cloud_csv: cannot open " + path);
    out.precision(17);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        for (long j = 0; j < cloud.points[i].x.size(); ++j)
            out << cloud.points[i].x(j) << ",";
        out << cloud.points[i].t << "," << cloud.weights[i] << "\n";
    }
}

Covariance covariance(const WeightedCloud& mu, const ParabolicBall& ball) {
    WeightedCloud res = mu.restrict_to(ball);
    if (res.size() == 0)
        throw std::runtime_error("covariance: empty restriction to ball");
    int n = res.dim();
    double mass = res.total_weight();

    Covariance cov;
    cov.mass = mass;
    cov.x_cm = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < res.size(); ++i)
        cov.x_cm += res.weights[i] * res.points[i].x;
    cov.x_cm /= mass;

    cov.Q = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < res.size(); ++i) {
        Eigen::VectorXd d = res.points[i].x - cov.x_cm;
        cov.Q += res.weights[i] * (d * d.transpose());
    }
    cov.Q /= mass;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.Q);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("covariance: eigen-solver failure");
    cov.eigenvalues = es.eigenvalues();
    cov.eigenvectors = es.eigenvectors();
    // sign convention: first nonzero component of each eigenvector positive
    for (long c = 0; c < cov.eigenvectors.cols(); ++c)
        for (long i = 0; i < n; ++i)
            if (std::fabs(cov.eigenvectors(i, c)) > 1e-14) {
                if (cov.eigenvectors(i, c) < 0)
                    cov.eigenvectors.col(c) = -cov.eigenvectors.col(c);
                break;
            }
    return cov;
}

namespace {

// unnormalized best-fit residual over vertical planes with spatial dim q:
// mass * (sum of the n-q smallest eigenvalues of the normalized covariance)
double vertical_residual(const Covariance& cov, int q) {
    int n = (int)cov.eigenvalues.size();
    double s = 0.0;
    for (int i = 0; i < n - q; ++i) s += cov.eigenvalues(i);
    return cov.mass * s;
}

double sq(double v) { return v * v; }

// exact residual of a horizontal plane candidate (spatial span L through
// x_cm at fixed time t0): sum w * max(spatial dist^2, |dt|)
double horizontal_residual(const WeightedCloud& res, const Eigen::VectorXd& x_cm,
                           const Eigen::MatrixXd& L, double t0) {
    double s = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        Eigen::VectorXd d = res.points[i].x - x_cm;
        double par2 = (L.transpose() * d).squaredNorm();
        double dist2 = d.squaredNorm() - par2;
        s += res.weights[i] * std::max(dist2, std::fabs(res.points[i].t - t0));
    }
    return s;
}

} // namespace

BetaNumber beta_number(const WeightedCloud& mu, const SpaceTimePoint& center, double r,
                       int k, PlaneFamily family) {
    if (r <= 0) throw std::runtime_error("beta_number: r must be positive");
    ParabolicBall ball{center, r};
    WeightedCloud res = mu.restrict_to(ball);
    if (res.size() == 0) throw std::runtime_error("beta_number: empty ball");
    int n = res.dim();

    BetaNumber beta;
    beta.center = center;
    beta.r = r;
    beta.k = k;

    double norm = std::pow(r, -(double)(k + 2));
    double best = std::numeric_limits<double>::infinity();
    ParabolicPlane best_plane;

    if (k >= 2 && k - 2 <= n) {
        Covariance cov = covariance(mu, ball);
        int q = k - 2;
        best = norm * vertical_residual(cov, q);
        best_plane.base = SpaceTimePoint(cov.x_cm, center.t);
        best_plane.basis = cov.eigenvectors.rightCols(q);
        best_plane.vertical = true;
    } else if (family == PlaneFamily::Vertical) {
        throw std::runtime_error("beta_number: vertical family needs 2 <= k <= n+2");
    }

    if (family == PlaneFamily::All && k <= n) {
        // horizontal planes: PCA span at a scanned time offset, locally refined
        Covariance cov = covariance(mu, ball);
        Eigen::MatrixXd L = cov.eigenvectors.rightCols(k);
        double tlo = center.t - r * r, thi = center.t + r * r;
        auto eval = [&](double t0) {
            return norm * horizontal_residual(res, cov.x_cm, L, t0);
        };
        double bt = center.t, bv = eval(bt);
        for (int i = 0; i <= 64; ++i) {
            double t0 = tlo + (thi - tlo) * i / 64.0;
            double v = eval(t0);
            if (v < bv) {
                bv = v;
                bt = t0;
            }
        }
        double step = (thi - tlo) / 64.0;
        for (int pass = 0; pass < 20; ++pass) {
            step /= 2.0;
            for (double t0 : {bt - step, bt + step}) {
                double v = eval(t0);
                if (v < bv) {
                    bv = v;
                    bt = t0;
                }
            }
        }
        if (bv < best) {
            best = bv;
            best_plane.base = SpaceTimePoint(cov.x_cm, bt);
            best_plane.basis = L;
            best_plane.vertical = false;
        }
    }

    if (!std::isfinite(best))
        throw std::runtime_error("beta_number: no admissible plane for k, family");
    beta.value = best;
    beta.best_plane = best_plane;
    return beta;
}

ParabolicPlane best_vertical_plane(const WeightedCloud& mu, const SpaceTimePoint& x,
                                   double r, int k) {
    BetaNumber b = beta_number(mu, x, r, k, PlaneFamily::Vertical);
    return b.best_plane;
}

double kappa_number(const std::vector<GraphSample>& samples, const SpaceTimePoint& x,
                    double r) {
    if (r <= 0) throw std::runtime_error("kappa_number: r must be positive");
    int d = x.dim(); // spatial dimension of the plane coordinates

    std::vector<const GraphSample*> in;
    for (const auto& s : samples) {
        double ds = (s.y - x.x).norm();
        double dt = std::sqrt(std::fabs(s.t - x.t));
        if (std::max(ds, dt) < r) in.push_back(&s);
    }
    if ((int)in.size() < d + 1)
        throw std::runtime_error("kappa_number: rank error (too few samples in ball)");

    long vd = in.front()->val.size();
    for (const auto* s : in)
        if (s->val.size() != vd)
            throw std::runtime_error("kappa_number: inconsistent value dimensions");

    // weighted least squares for ell(y) = a . (y - x) + b, one fit per component
    Eigen::MatrixXd A((long)in.size(), d + 1);
    Eigen::MatrixXd B((long)in.size(), vd);
    Eigen::VectorXd sw((long)in.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        double w = in[i]->w;
        if (w <= 0) throw std::runtime_error("kappa_number: weights must be positive");
        double rt = std::sqrt(w);
        for (int j = 0; j < d; ++j) A((long)i, j) = rt * (in[i]->y(j) - x.x(j));
        A((long)i, d) = rt;
        B.row((long)i) = rt * in[i]->val.transpose();
        sw((long)i) = rt;
        mass += w;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < d + 1)
        throw std::runtime_error("kappa_number: rank error (degenerate sample layout)");
    Eigen::MatrixXd coef = qr.solve(B);
    double resid2 = (A * coef - B).squaredNorm();
    return resid2 / mass / (r * r);
}

AhlforsReport ahlfors_check(const WeightedCloud& mu, int k, double s_min, double s_max,
                            std::size_t max_centers) {
    if (!(0 < s_min && s_min <= s_max))
        throw std::runtime_error("ahlfors_check: need 0 < s_min <= s_max");
    AhlforsReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    rep.max_ratio = 0.0;

    std::size_t stride = std::max<std::size_t>(1, mu.size() / max_centers);
    for (std::size_t ci = 0; ci < mu.size(); ci += stride) {
        const SpaceTimePoint& c = mu.points[ci];
        for (double s = s_max; s >= s_min * (1 - 1e-12); s /= 2.0) {
            double m = 0.0;
            for (std::size_t i = 0; i < mu.size(); ++i)
                if (parabolic_distance(mu.points[i], c) < s) m += mu.weights[i];
            AhlforsRow row{c, s, m / std::pow(s, (double)k)};
            rep.rows.push_back(row);
            if (row.ratio <= 0) rep.all_positive = false;
            if (row.ratio > 0) rep.min_ratio = std::min(rep.min_ratio, row.ratio);
            rep.max_ratio = std::max(rep.max_ratio, row.ratio);
        }
    }
    rep.spread = (rep.min_ratio > 0 && rep.max_ratio > 0)
                     ? rep.max_ratio / rep.min_ratio
                     : std::numeric_limits<double>::infinity();
    return rep;
}

double carleson_energy(const WeightedCloud& mu, int k, const ParabolicBall& region,
                       double s_max, int levels) {
    if (s_max <= 0) throw std::runtime_error("carleson_energy: s_max must be positive");
    WeightedCloud res = mu.restrict_to(region);
    double energy = 0.0;
    double log2 = std::log(2.0);
    for (std::size_t i = 0; i < res.size(); ++i) {
        for (int lev = 0; lev < levels; ++lev) {
            double s = s_max * std::ldexp(1.0, -lev);
            ParabolicBall b{res.points[i], s};
            if (mu.restrict_to(b).size() == 0) continue;
            BetaNumber beta = beta_number(mu, res.points[i], s, k);
            energy += res.weights[i] * beta.value * log2;
        }
    }
    return energy / std::pow(region.r, (double)k);
}

} // namespace calor
