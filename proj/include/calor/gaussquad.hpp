#pragma once

// Integration against the conjugate heat kernel measure
//   d nu_{x0;t}(x) = (4 pi (t0 - t))^{-n/2} exp(-|x - x0|^2 / (4 (t0 - t))) dx,
// a product Gaussian with per-axis variance 2 tau, tau = t0 - t > 0.
//
// Polynomials integrate exactly through moments; general integrands go
// through tensor Gauss-Hermite quadrature with the substitution
// x = x0 + sqrt(2 tau) z.

#include "calor/caloricpoly.hpp"
#include "calor/exec.hpp"
#include "calor/spacetime.hpp"

#include <functional>

namespace calor {

struct HeatKernelMeasure {
    SpaceTimePoint base;  // (x0, t0)
    double t = 0.0;       // slice time, t < t0

    double tau() const { return base.t - t; }
};

// Probabilists' Gauss-Hermite rule: integrates f against the standard normal
// density exactly for polynomials of degree <= 2*order - 1. Nodes/weights by
// Golub-Welsch on the symmetric Jacobi matrix.
struct QuadratureRule {
    int order = 48;
    std::vector<double> nodes;
    std::vector<double> weights;

    static QuadratureRule gauss_hermite(int order);
};

// Exact rational integral of the slice p(., t0 - tau) against nu_{x0;t0-tau}.
// Base point and tau are exact rationals.
Rat integrate_poly(const Poly& p, const std::vector<Rat>& x0, const Rat& t0,
                   const Rat& tau);

// Gaussian smear as a symbolic operator: returns the polynomial
//   S(x0, t0) = int p(x0 + z, t0 - tau) dG_{2 tau}(z)
// in the base-point variables (exact coefficients). Grid sweeps evaluate S
// per cell instead of integrating per cell.
Poly gauss_smear(const Poly& p, const Rat& tau);

struct IntegrateResult {
    double value = 0.0;
    double error_estimate = 0.0;  // |order p - order p/2|
    int order_used = 0;
};

// Tensor-product Gauss-Hermite integration of an arbitrary integrand against
// nu. The integrand receives the ambient spatial point and the slice time.
// If the order-p and order-p/2 values disagree by more than
// rel_tol * |value|, the order doubles (up to max_order). The reduction is
// chunk-deterministic: Serial and Parallel agree bit for bit.
IntegrateResult integrate_fn(const std::function<double(const Eigen::VectorXd&, double)>& f,
                             const HeatKernelMeasure& mu, int order = 48,
                             Exec exec = Exec::Parallel, double rel_tol = 1e-9,
                             int max_order = 192);

struct BasePointComparison {
    double lhs = 0.0;    // integral at (x0, t0 - tau)
    double rhs = 0.0;    // integral at (x1, t1 - (1+theta) tau)
    double ratio = 0.0;  // lhs / rhs; infinite ratio flags a degenerate rhs
    bool bounded = true;
};

// Compare u^2-mass seen from two nearby base points at comparable scales.
// Hypotheses (theta in (0, 1/4], sigma in (0,1], |x1-x0| < r, |t1-t0| <=
// sigma r^2, tau >= 6 sigma r^2 / theta) are preconditions; violations throw
// std::runtime_error naming the failed inequality.
BasePointComparison basepoint_comparison(const Poly& u, const SpaceTimePoint& x0,
                                         const SpaceTimePoint& x1, double tau,
                                         double theta, double sigma, double r,
                                         int order = 48);

} // namespace calor
