#include "calor/gaussquad.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace calor {

QuadratureRule QuadratureRule::gauss_hermite(int order) {
    if (order < 1) throw std::runtime_error("gauss_hermite: order must be >= 1");
    // Golub-Welsch on the probabilists' Hermite Jacobi matrix: off-diagonal
    // sqrt(k). Weights are the squared first components (total mass 1).
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        double b = std::sqrt((double)k);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadratureRule rule;
    rule.order = order;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        rule.weights[i] = v * v;
    }
    return rule;
}

Rat integrate_poly(const Poly& p, const std::vector<Rat>& x0, const Rat& t0,
                   const Rat& tau) {
    if (tau <= 0) throw std::runtime_error("integrate_poly: tau must be positive");
    Poly centered = p.shifted(x0, t0);       // coordinates z = x - x0, s = t - t0
    Poly slice = centered.at_time(-tau);     // slice t = t0 - tau
    return gauss_moment_integral(slice, tau);
}

Poly gauss_smear(const Poly& p, const Rat& tau) {
    if (tau <= 0) throw std::runtime_error("gauss_smear: tau must be positive");
    int n = p.n();
    Rat twotau = tau * 2;
    // moment table: E z^e over the largest spatial exponent present
    int maxe = 0;
    for (const auto& [m, c] : p.terms())
        for (int e : m.a) maxe = std::max(maxe, e);
    std::vector<Rat> moment((std::size_t)maxe + 1, Rat(0));
    moment[0] = 1;
    for (int e = 2; e <= maxe; e += 2) {
        mpz_class df;
        mpz_2fac_ui(df.get_mpz_t(), e - 1);
        Rat v(df);
        for (int h = 0; h < e / 2; ++h) v *= twotau;
        moment[(std::size_t)e] = v;
    }

    Poly out(n);
    for (const auto& [m, c] : p.terms()) {
        // (x0 + z)^a expands over even z-parts; (t0 - tau)^k expands binomially
        std::vector<std::pair<Mono, Rat>> acc{{Mono{std::vector<int>(n, 0), 0}, c}};
        for (int i = 0; i < n; ++i) {
            if (m.a[i] == 0) continue;
            std::vector<std::pair<Mono, Rat>> next;
            for (int b = 0; b <= m.a[i]; b += 2) {
                mpz_class ch;
                mpz_bin_uiui(ch.get_mpz_t(), m.a[i], b);
                Rat fac = Rat(ch) * moment[(std::size_t)b];
                if (fac == 0) continue;
                for (const auto& [mm, cc] : acc) {
                    Mono m2 = mm;
                    m2.a[i] += m.a[i] - b;
                    next.emplace_back(m2, cc * fac);
                }
            }
            acc = std::move(next);
        }
        if (m.k > 0) {
            std::vector<std::pair<Mono, Rat>> next;
            for (int j = 0; j <= m.k; ++j) {
                mpz_class ch;
                mpz_bin_uiui(ch.get_mpz_t(), m.k, j);
                Rat fac = Rat(ch);
                // (t0 - tau)^k contributes t0^j (-tau)^{k-j}
                Rat neg = 1;
                for (int h = 0; h < m.k - j; ++h) neg *= -tau;
                fac *= neg;
                for (const auto& [mm, cc] : acc) {
                    Mono m2 = mm;
                    m2.k += j;
                    next.emplace_back(m2, cc * fac);
                }
            }
            acc = std::move(next);
        }
        for (const auto& [mm, cc] : acc) out.add_term(mm, cc);
    }
    return out;
}

namespace {

double tensor_pass(const std::function<double(const Eigen::VectorXd&, double)>& f,
                   const HeatKernelMeasure& mu, const QuadratureRule& rule,
                   Exec exec) {
    int n = mu.base.dim();
    double tau = mu.tau();
    double s = std::sqrt(2.0 * tau);
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= (std::size_t)rule.order;

    return reduce_indexed(
        total,
        [&](std::size_t idx) {
            Eigen::VectorXd x(n);
            double w = 1.0;
            std::size_t rem = idx;
            for (int i = 0; i < n; ++i) {
                std::size_t d = rem % (std::size_t)rule.order;
                rem /= (std::size_t)rule.order;
                x(i) = mu.base.x(i) + s * rule.nodes[d];
                w *= rule.weights[d];
            }
            return w * f(x, mu.t);
        },
        exec);
}

} // namespace

IntegrateResult integrate_fn(const std::function<double(const Eigen::VectorXd&, double)>& f,
                             const HeatKernelMeasure& mu, int order, Exec exec,
                             double rel_tol, int max_order) {
    if (mu.tau() <= 0) throw std::runtime_error("integrate_fn: slice must satisfy t < t0");
    if (order < 2) order = 2;
    IntegrateResult res;
    int p = order;
    while (true) {
        QuadratureRule full = QuadratureRule::gauss_hermite(p);
        QuadratureRule half = QuadratureRule::gauss_hermite(p / 2);
        double vf = tensor_pass(f, mu, full, exec);
        double vh = tensor_pass(f, mu, half, exec);
        res.value = vf;
        res.error_estimate = std::fabs(vf - vh);
        res.order_used = p;
        if (res.error_estimate <= rel_tol * std::max(1e-300, std::fabs(vf))) break;
        if (p >= max_order) break;
        p = std::min(2 * p, max_order);
    }
    return res;
}

BasePointComparison basepoint_comparison(const Poly& u, const SpaceTimePoint& x0,
                                         const SpaceTimePoint& x1, double tau,
                                         double theta, double sigma, double r,
                                         int order) {
    auto fail = [](const std::string& what) {
        throw std::runtime_error("basepoint_comparison: hypothesis failed: " + what);
    };
    if (!(theta > 0.0 && theta <= 0.25)) fail("theta in (0, 1/4]");
    if (!(sigma > 0.0 && sigma <= 1.0)) fail("sigma in (0, 1]");
    if (!(r > 0.0)) fail("r > 0");
    if (!((x1.x - x0.x).norm() < r)) fail("|x1 - x0| < r");
    if (!(std::fabs(x1.t - x0.t) <= sigma * r * r)) fail("|t1 - t0| <= sigma r^2");
    if (!(tau >= 6.0 * sigma * r * r / theta)) fail("tau >= 6 sigma r^2 / theta");

    auto u2 = [&](const Eigen::VectorXd& x, double t) {
        double v = u.eval(x, t);
        return v * v;
    };
    HeatKernelMeasure m0{x0, x0.t - tau};
    HeatKernelMeasure m1{x1, x1.t - (1.0 + theta) * tau};
    BasePointComparison cmp;
    cmp.lhs = integrate_fn(u2, m0, order).value;
    cmp.rhs = integrate_fn(u2, m1, order).value;
    if (cmp.rhs > 0.0 && std::isfinite(cmp.rhs)) {
        cmp.ratio = cmp.lhs / cmp.rhs;
        cmp.bounded = std::isfinite(cmp.ratio);
    } else {
        cmp.ratio = std::numeric_limits<double>::infinity();
        cmp.bounded = false;
    }
    return cmp;
}

} // namespace calor
