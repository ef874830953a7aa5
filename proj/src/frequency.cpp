#include "calor/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace calor {

namespace {

std::vector<Rat> rat_vec(const Eigen::VectorXd& x) {
    std::vector<Rat> v((std::size_t)x.size());
    for (long i = 0; i < x.size(); ++i) v[(std::size_t)i] = Rat(x(i));
    return v;
}

mpz_class rat_floor(const Rat& q) {
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return f;
}

// nearest integer, exact half ties rounding down: ceil(q - 1/2)
long nearest_int_ties_down(const Rat& q) {
    Rat shifted = q - Rat(1, 2);
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
    return c.get_si();
}

} // namespace

FrequencyEvaluator::FrequencyEvaluator(const Poly& u, const std::vector<Rat>& x0,
                                       const Rat& t0)
    : u_(u.shifted(x0, t0)) {
    usq_ = u_ * u_;
    Poly g(u_.n());
    for (int i = 0; i < u_.n(); ++i) {
        Poly d = u_.dx(i);
        g = g + d * d;
    }
    gradsq_ = g;
    Poly dt = u_.dt();
    dtsq_ = dt * dt;
    box_ = u_.dt() - u_.laplacian();
}

FrequencyEvaluator::FrequencyEvaluator(const Poly& u, const SpaceTimePoint& base)
    : FrequencyEvaluator(u, rat_vec(base.x), Rat(base.t)) {}

Rat FrequencyEvaluator::H(const Rat& tau) const {
    return gauss_moment_integral(usq_.at_time(-tau), tau);
}

Rat FrequencyEvaluator::E(const Rat& tau) const {
    return gauss_moment_integral(gradsq_.at_time(-tau), tau) * tau * 2;
}

Rat FrequencyEvaluator::N(const Rat& tau) const {
    Rat h = H(tau);
    if (h == 0)
        throw std::runtime_error("frequency: degenerate function (H vanishes)");
    return E(tau) / h;
}

double FrequencyEvaluator::D(const Rat& tau) const {
    Rat h1 = H(tau);
    Rat h2 = H(tau * 2);
    if (h1 == 0 || h2 == 0)
        throw std::runtime_error("frequency: degenerate function (H vanishes)");
    return std::log2(to_double(h2 / h1));
}

Rat FrequencyEvaluator::H_tiny_guard() const { return Rat(1, 1); }

Rat FrequencyEvaluator::eigen_defect(const Rat& tau) const {
    Poly w = u_.at_time(-tau);
    Poly p = w.laplacian();
    Rat inv = Rat(1) / (tau * 2);
    for (int i = 0; i < w.n(); ++i) p = p - Poly::var(w.n(), i) * w.dx(i) * inv;
    Poly q = p + w * (N(tau) * inv);
    return gauss_moment_integral(q * q, tau);
}

Rat FrequencyEvaluator::derivative_analytic(const Rat& tau) const {
    Rat h = H(tau);
    if (h == 0)
        throw std::runtime_error("frequency: degenerate function (H vanishes)");
    Poly w = u_.at_time(-tau);
    Poly p = w.laplacian();
    Rat inv = Rat(1) / (tau * 2);
    for (int i = 0; i < w.n(); ++i) p = p - Poly::var(w.n(), i) * w.dx(i) * inv;
    Poly q = p + w * (E(tau) / h * inv);
    Rat quad = gauss_moment_integral(q * q, tau);
    Rat cross = gauss_moment_integral(q * box_.at_time(-tau), tau);
    return (quad + cross) * tau * 4 / h;
}

Functionals functionals(const Poly& u, const SpaceTimePoint& base, double tau) {
    if (tau <= 0) throw std::runtime_error("functionals: tau must be positive");
    FrequencyEvaluator ev(u, base);
    Rat t(tau);
    Rat h = ev.H(t);
    double hd = to_double(h);
    if (hd <= 1e-300)
        throw std::runtime_error("functionals: degenerate function (H below 1e-300)");
    Functionals f;
    f.H = hd;
    f.E = to_double(ev.E(t));
    f.N = to_double(ev.E(t) / h);
    f.D = ev.D(t);
    return f;
}

FrequencyProfile profile(const Poly& u, const SpaceTimePoint& base, double tau_min,
                         double tau_max, double ratio) {
    if (!(tau_min > 0 && tau_max >= tau_min))
        throw std::runtime_error("profile: need 0 < tau_min <= tau_max");
    if (ratio <= 1.0) ratio = kProfileRatio;
    FrequencyProfile pr;
    pr.base = base;
    for (double t = tau_min; t <= tau_max * (1 + 1e-12); t *= ratio)
        pr.taus.push_back(t);

    std::size_t m = pr.taus.size();
    pr.H.assign(m, 0.0);
    pr.E.assign(m, 0.0);
    pr.N.assign(m, 0.0);
    pr.D.assign(m, 0.0);
    FrequencyEvaluator ev(u, base);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < (long long)m; ++i) {
        Rat t(pr.taus[(std::size_t)i]);
        Rat h = ev.H(t);
        pr.H[(std::size_t)i] = to_double(h);
        pr.E[(std::size_t)i] = to_double(ev.E(t));
        pr.N[(std::size_t)i] = h == 0 ? 0.0 : to_double(ev.E(t) / h);
        pr.D[(std::size_t)i] = h == 0 ? 0.0 : ev.D(t);
    }
    return pr;
}

Directional directional(const Poly& u, const SpaceTimePoint& base, double s,
                        const Eigen::MatrixXd& L) {
    if (s <= 0) throw std::runtime_error("directional: scale must be positive");
    if (L.rows() != base.dim())
        throw std::runtime_error("directional: subspace dimension mismatch");
    FrequencyEvaluator ev(u, base);
    Rat ts(s);
    Rat h = ev.H(ts);
    if (to_double(h) <= 1e-300)
        throw std::runtime_error("directional: degenerate function");

    // |pi_L grad u|^2 built exactly from the (binary-exact) column entries
    std::vector<Rat> bx = rat_vec(base.x);
    Poly shifted = u.shifted(bx, Rat(base.t));
    Poly proj(u.n());
    for (long c = 0; c < L.cols(); ++c) {
        Poly dir(u.n());
        for (int i = 0; i < u.n(); ++i) dir = dir + shifted.dx(i) * Rat(L(i, c));
        proj = proj + dir * dir;
    }
    Rat np = gauss_moment_integral(proj.at_time(-ts), ts) * ts * 2 / h;

    Poly dt = shifted.dt();
    Rat tt = gauss_moment_integral((dt * dt).at_time(-ts), ts) * ts * ts * 2 / h;

    Directional d;
    d.N_L = to_double(np);
    d.T = to_double(tt);
    return d;
}

DerivativePair frequency_derivative(const Poly& u, const SpaceTimePoint& base,
                                    double tau) {
    if (tau <= 0) throw std::runtime_error("frequency_derivative: tau must be positive");
    FrequencyEvaluator ev(u, base);
    Rat t(tau);
    DerivativePair out;
    out.analytic = to_double(ev.derivative_analytic(t));

    // five-point central difference on a multiplicative grid (exact nodes)
    Rat rho(65, 64);
    Rat n_p2 = ev.N(t * rho * rho);
    Rat n_p1 = ev.N(t * rho);
    Rat n_m1 = ev.N(t / rho);
    Rat n_m2 = ev.N(t / (rho * rho));
    Rat stencil = -n_p2 + n_p1 * 8 - n_m1 * 8 + n_m2;
    double h = std::log(65.0 / 64.0);
    out.finite_difference = to_double(stencil) / (12.0 * h * tau);
    return out;
}

double pinching(const Poly& u, const SpaceTimePoint& base, double r) {
    if (r <= 0) throw std::runtime_error("pinching: r must be positive");
    FrequencyEvaluator ev(u, base);
    Rat r2 = Rat(r) * Rat(r);
    return to_double(ev.N(r2 * 8) - ev.N(r2 / 8));
}

namespace {

// greedy farthest-point net of at most cap points (parabolic metric)
std::vector<SpaceTimePoint> farthest_net(const std::vector<SpaceTimePoint>& pts,
                                         std::size_t cap) {
    std::vector<SpaceTimePoint> net;
    if (pts.empty()) return net;
    net.push_back(pts[0]);
    std::vector<double> dist(pts.size(), 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i)
        dist[i] = parabolic_distance(pts[i], net[0]);
    while (net.size() < cap) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (dist[i] > dist[far]) far = i;
        if (dist[far] <= 0.0) break;
        net.push_back(pts[far]);
        for (std::size_t i = 0; i < pts.size(); ++i)
            dist[i] = std::min(dist[i], parabolic_distance(pts[i], net.back()));
    }
    return net;
}

} // namespace

PinchingReport kalpha_pinching(const Poly& u, const SpaceTimePoint& base, double r,
                               int k, double alpha,
                               std::vector<SpaceTimePoint> candidates, unsigned seed,
                               std::size_t max_candidates) {
    if (r <= 0 || alpha <= 0)
        throw std::runtime_error("kalpha_pinching: r and alpha must be positive");
    int n = base.dim();
    PinchingReport rep;
    rep.r = r;
    rep.E_r = pinching(u, base, r);

    double ball_r = r / 10.0;
    double a = alpha * r / 40.0;

    if (candidates.empty()) {
        // parabolic lattice of spacing a inside P(base, r/10)
        int ms = (int)std::floor(ball_r / a);
        long long mt = (long long)std::floor(ball_r * ball_r / (a * a));
        std::vector<long long> dims((std::size_t)n, 2LL * ms + 1);
        long long total = 2 * mt + 1;
        for (auto d : dims) total *= d;
        long long stride = std::max(1LL, total / (long long)max_candidates);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(-0.5, 0.5);
        for (long long idx = 0; idx < total; idx += stride) {
            long long rem = idx;
            Eigen::VectorXd x = base.x;
            double nrm2 = 0;
            for (int i = 0; i < n; ++i) {
                long long d = rem % (2 * ms + 1);
                rem /= (2 * ms + 1);
                double off = (double)(d - ms) * a;
                x(i) += off;
                nrm2 += off * off;
            }
            long long dq = rem % (2 * mt + 1) - mt;
            double toff = (double)dq * a * a;
            SpaceTimePoint p(x, base.t + toff);
            if (std::sqrt(nrm2) < ball_r && std::sqrt(std::fabs(toff)) < ball_r)
                candidates.push_back(p);
        }
        // random perturbations of lattice sites
        std::uniform_int_distribution<std::size_t> pick(0, candidates.empty() ? 0
                                                            : candidates.size() - 1);
        std::size_t extra = 10 * (std::size_t)std::max(k, 1);
        for (std::size_t e = 0; e < extra && !candidates.empty(); ++e) {
            SpaceTimePoint p = candidates[pick(rng)];
            for (int i = 0; i < n; ++i) p.x(i) += unif(rng) * a;
            p.t += unif(rng) * a * a;
            if (parabolic_distance(p, base) < ball_r) candidates.push_back(p);
        }
    } else {
        for (const auto& c : candidates)
            if (parabolic_distance(c, base) >= ball_r)
                throw std::runtime_error("kalpha_pinching: candidate outside P(base, r/10)");
    }

    if (candidates.empty()) {
        rep.search_ok = false;
        rep.kalpha = std::numeric_limits<double>::infinity();
        rep.note = "no candidates";
        return rep;
    }

    // single-point pinching per candidate through smeared polynomials
    Rat r2 = Rat(r) * Rat(r);
    Rat tau_hi = r2 * 8, tau_lo = r2 / 8;
    Poly usq = u * u;
    Poly gsq(u.n());
    for (int i = 0; i < u.n(); ++i) {
        Poly d = u.dx(i);
        gsq = gsq + d * d;
    }
    Poly sh_hi = gauss_smear(usq, tau_hi), se_hi = gauss_smear(gsq, tau_hi);
    Poly sh_lo = gauss_smear(usq, tau_lo), se_lo = gauss_smear(gsq, tau_lo);
    double thi = to_double(tau_hi), tlo = to_double(tau_lo);

    std::vector<std::pair<double, std::size_t>> pinch(candidates.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)candidates.size(); ++i) {
        const auto& c = candidates[(std::size_t)i];
        double h_hi = sh_hi.eval(c.x, c.t), h_lo = sh_lo.eval(c.x, c.t);
        double v;
        if (h_hi <= 1e-300 || h_lo <= 1e-300)
            v = std::numeric_limits<double>::infinity();
        else
            v = 2 * thi * se_hi.eval(c.x, c.t) / h_hi -
                2 * tlo * se_lo.eval(c.x, c.t) / h_lo;
        pinch[(std::size_t)i] = {v, (std::size_t)i};
    }
    std::sort(pinch.begin(), pinch.end());

    // smallest prefix (by pinching) that is (k, alpha r / 20)-independent
    double indep_alpha = alpha * r / 20.0;
    auto prefix_independent = [&](std::size_t count, IndependenceReport* out) {
        std::vector<SpaceTimePoint> pts;
        pts.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
            pts.push_back(candidates[pinch[i].second]);
        auto net = farthest_net(pts, 128);
        auto reprt = independence_check(net, k, indep_alpha, 1e-3, seed);
        if (out) *out = reprt;
        return reprt.independent;
    };

    IndependenceReport full_rep;
    if (!prefix_independent(candidates.size(), &full_rep)) {
        rep.search_ok = false;
        rep.kalpha = std::numeric_limits<double>::infinity();
        rep.note = "no independent subset among candidates";
        return rep;
    }
    std::size_t lo = 1, hi = candidates.size();
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo) / 2;
        if (prefix_independent(mid, nullptr))
            hi = mid;
        else
            lo = mid + 1;
    }
    IndependenceReport final_rep;
    prefix_independent(lo, &final_rep);

    rep.search_ok = true;
    rep.kalpha = pinch[lo - 1].first;
    rep.witness.points.clear();
    for (std::size_t i = 0; i < lo; ++i)
        rep.witness.points.push_back(candidates[pinch[i].second]);
    rep.witness.points = farthest_net(rep.witness.points, 128);
    rep.witness.spatial = final_rep.spatial;
    rep.witness.alpha = indep_alpha;
    return rep;
}

std::optional<double> find_pinched_scale(const Poly& u, const SpaceTimePoint& base,
                                         double r1, double r2, double eps) {
    if (!(0 < r1 && r1 < r2))
        throw std::runtime_error("find_pinched_scale: need 0 < r1 < r2");
    if (!(eps > 0 && eps < 1))
        throw std::runtime_error("find_pinched_scale: eps in (0,1)");
    FrequencyEvaluator ev(u, base);
    Rat e(eps);
    Rat ratio = e * e;                   // s-grid ratio eps^2 (tau ratio eps^4)
    Rat r1r(r1), r2r(r2);

    std::vector<Rat> grid;               // descending from r2
    for (Rat s = r2r * ratio; s > r1r; s = s * ratio) grid.push_back(s);
    // scan fine-to-coarse: the first passing scale is the smallest
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
        Rat s2 = (*it) * (*it);
        Rat hi = ev.N(s2 / (e * e));
        Rat lo = ev.N(s2 * (e * e));
        if (hi - lo < e) return to_double(*it);
    }
    return std::nullopt;
}

EigenResidual eigen_residual(const Poly& u, const SpaceTimePoint& base, double tau) {
    if (tau <= 0) throw std::runtime_error("eigen_residual: tau must be positive");
    FrequencyEvaluator ev(u, base);
    Rat t(tau);
    Rat h = ev.H(t);
    if (to_double(h) <= 1e-300)
        throw std::runtime_error("eigen_residual: degenerate function");
    Rat nn = ev.E(t) / h;

    EigenResidual res;
    res.m_star = (int)nearest_int_ties_down(nn);

    std::vector<Rat> x0 = rat_vec(base.x);
    Rat t0(base.t);
    auto pieces = spectral_decompose(u, x0, t0);
    Poly pm = (res.m_star >= 0 && res.m_star < (int)pieces.size())
                  ? pieces[(std::size_t)res.m_star]
                  : Poly(u.n());
    Poly diff = u - pm;
    Rat resid = integrate_poly(diff * diff, x0, t0, t);

    long j = (long)rat_floor(nn).get_si();
    Rat gap = (nn - Rat(j)) * (Rat(j + 1) - nn);
    Rat rhs = ev.eigen_defect(t) * t * t * 20;

    res.residual = to_double(resid / h);
    res.gap_product = to_double(gap);
    res.defect_rhs = to_double(rhs);
    res.slack = to_double(rhs - gap * h - resid);
    return res;
}

std::vector<HomogeneousErrorRow> homogeneous_error(const Poly& u,
                                                   const SpaceTimePoint& base,
                                                   double tau1, double tau2,
                                                   int grid_points) {
    if (!(0 < tau1 && tau1 < tau2 / 2))
        throw std::runtime_error("homogeneous_error: hypothesis failed: tau1 < tau2/2");
    FrequencyEvaluator ev(u, base);
    Rat t1(tau1), t2(tau2);
    Rat delta = ev.N(t2) - ev.N(t1);
    if (to_double(delta) >= 0.1)
        throw std::runtime_error(
            "homogeneous_error: hypothesis failed: N(tau2)-N(tau1) < 1/10");
    Rat h2 = ev.H(t2);

    int m = (int)nearest_int_ties_down(ev.N(t2));
    std::vector<Rat> x0 = rat_vec(base.x);
    Rat t0(base.t);
    auto pieces = spectral_decompose(u, x0, t0);
    Poly pm = (m >= 0 && m < (int)pieces.size()) ? pieces[(std::size_t)m] : Poly(u.n());
    Poly diff = u - pm;

    // derivative blocks (l, j) with 2l + j <= 2
    struct Block {
        int l, j;
        std::vector<Poly> comps;
    };
    std::vector<Block> blocks;
    blocks.push_back({0, 0, {diff}});
    {
        Block b{0, 1, {}};
        for (int i = 0; i < u.n(); ++i) b.comps.push_back(diff.dx(i));
        blocks.push_back(b);
    }
    {
        Block b{0, 2, {}};
        for (int i = 0; i < u.n(); ++i)
            for (int j2 = 0; j2 < u.n(); ++j2) b.comps.push_back(diff.dx(i).dx(j2));
        blocks.push_back(b);
    }
    blocks.push_back({1, 0, {diff.dt()}});

    std::vector<HomogeneousErrorRow> rows;
    Rat dh = delta * h2;
    for (int g = 0; g < grid_points; ++g) {
        Rat tau = t1 / 2;                       // grid: t1/2 * 2^{-g}
        for (int h = 0; h < g; ++h) tau = tau / 2;
        for (const auto& b : blocks) {
            Rat lhs = 0;
            for (const auto& c : b.comps) lhs += integrate_poly(c * c, x0, t0, tau);
            Rat scale = 1;
            for (int h = 0; h < 2 * b.l + b.j; ++h) scale *= tau;
            lhs *= scale;
            HomogeneousErrorRow row;
            row.l = b.l;
            row.j = b.j;
            row.tau = to_double(tau);
            row.lhs = to_double(lhs);
            if (dh == 0)
                row.ratio = (lhs == 0) ? 0.0 : std::numeric_limits<double>::infinity();
            else
                row.ratio = to_double(lhs / dh);
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace calor
