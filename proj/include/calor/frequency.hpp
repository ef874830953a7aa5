#pragma once

// Frequency functionals of a space-time function u seen from a base point:
//   H(tau) = int u^2 dnu,   E(tau) = 2 tau int |grad u|^2 dnu,
//   N(tau) = E/H,           D(tau) = log2(H(2 tau)/H(tau)),
// all integrals on the slice t = t0 - tau against the conjugate heat kernel
// measure of the base. For caloric u, N is monotone nondecreasing and
// N(tau) <= D(tau) <= N(2 tau).
//
// Polynomial inputs are evaluated exactly: gradients symbolically, integrals
// through rational Gaussian moments; doubles appear only at the boundary.

#include "calor/caloricpoly.hpp"
#include "calor/gaussquad.hpp"
#include "calor/spacetime.hpp"

#include <optional>
#include <string>
#include <vector>

namespace calor {

struct Functionals {
    double H = 0.0;
    double E = 0.0;
    double N = 0.0;
    double D = 0.0;
};

struct FrequencyProfile {
    SpaceTimePoint base;
    std::vector<double> taus;
    std::vector<double> H, E, N, D;
};

// Exact-arithmetic evaluator bound to one function and one base point; the
// shifted polynomial and its derived quantities are cached across scales.
class FrequencyEvaluator {
  public:
    FrequencyEvaluator(const Poly& u, const std::vector<Rat>& x0, const Rat& t0);
    FrequencyEvaluator(const Poly& u, const SpaceTimePoint& base);

    Rat H(const Rat& tau) const;
    Rat E(const Rat& tau) const;
    Rat N(const Rat& tau) const;  // throws if H(tau) vanishes
    double D(const Rat& tau) const;
    Rat H_tiny_guard() const;  // tol below which H counts as degenerate

    const Poly& shifted_u() const { return u_; }
    int n() const { return u_.n(); }

    // int (Delta_f w + (N/2tau) w)^2 dnu on the slice, the squared
    // eigen-equation defect; w = u(., t0 - tau).
    Rat eigen_defect(const Rat& tau) const;
    // analytic N'(tau); includes the box-term for non-caloric inputs
    Rat derivative_analytic(const Rat& tau) const;

  private:
    Poly u_;      // recentred: base at the origin
    Poly usq_;    // u^2
    Poly gradsq_; // |grad u|^2
    Poly dtsq_;   // (dt u)^2
    Poly box_;    // dt u - Laplacian u
};

Functionals functionals(const Poly& u, const SpaceTimePoint& base, double tau);

FrequencyProfile profile(const Poly& u, const SpaceTimePoint& base,
                         double tau_min, double tau_max, double ratio = 0.0);

// Directional frequency at time scale s: N_{s;L} uses the gradient component
// along the spatial subspace spanned by the columns of L (orthonormal);
// T_s = 2 s^2 int |dt u|^2 dnu / H_s.
struct Directional {
    double N_L = 0.0;
    double T = 0.0;
};
Directional directional(const Poly& u, const SpaceTimePoint& base, double s,
                        const Eigen::MatrixXd& L);

struct DerivativePair {
    double analytic = 0.0;
    double finite_difference = 0.0;
};
// N'(tau): the analytic quadratic-defect formula next to a five-point
// central difference on a multiplicative tau grid (exact node evaluations).
DerivativePair frequency_derivative(const Poly& u, const SpaceTimePoint& base,
                                    double tau);

// Frequency pinching across the scale band [r^2/8, 8 r^2].
double pinching(const Poly& u, const SpaceTimePoint& base, double r);

struct PinchingReport {
    double r = 0.0;
    double E_r = 0.0;        // single-point pinching at the base
    double kalpha = 0.0;     // inf over sampled independent subsets (upper bound)
    bool search_ok = false;  // false: no independent subset among candidates
    IndependentSet witness;
    std::string note;
};

// Pinching relative to planes of parabolic dimension k-1: the infimum over
// (k, alpha r/20)-independent subsets of P(base, r/10) of the worst
// single-point pinching. Candidate points come from a parabolic lattice of
// spacing alpha r/40 plus random perturbations (so the result is a
// documented upper bound for the true infimum). Equivalent threshold form:
// the smallest T such that the candidates with pinching <= T already form an
// independent set.
PinchingReport kalpha_pinching(const Poly& u, const SpaceTimePoint& base, double r,
                               int k, double alpha,
                               std::vector<SpaceTimePoint> candidates = {},
                               unsigned seed = 2026,
                               std::size_t max_candidates = 20000);

// Smallest scale s on the geometric grid {r2 eps^{2j}} inside (r1, r2) with
// N(eps^{-2} s^2) - N(eps^2 s^2) < eps; nullopt when no grid scale passes.
std::optional<double> find_pinched_scale(const Poly& u, const SpaceTimePoint& base,
                                         double r1, double r2, double eps);

struct EigenResidual {
    int m_star = 0;          // nearest integer to N(tau); exact ties round down
    double residual = 0.0;   // int (u - p_{m*})^2 dnu / H
    double gap_product = 0.0;  // (N-j)(j+1-N), j = floor N
    double defect_rhs = 0.0;   // 20 tau^2 int (Delta_f w + N/(2tau) w)^2 dnu
    double slack = 0.0;        // defect_rhs - gap_product*H - residual*H  (>= 0)
};
EigenResidual eigen_residual(const Poly& u, const SpaceTimePoint& base, double tau);

struct HomogeneousErrorRow {
    int l = 0, j = 0;
    double tau = 0.0;
    double lhs = 0.0;    // tau^{2l+j} int |dt^l grad^j (u - p_m)|^2 dnu_{-tau}
    double ratio = 0.0;  // lhs / (delta * H(tau2)); 0 when both vanish
};

// Almost-homogeneous approximation error across small scales. delta is
// measured as N(tau2) - N(tau1) and must be < 1/10 with tau1 < tau2/2;
// rows cover derivative orders 2l + j <= 2 on a geometric grid tau <= tau1/2.
std::vector<HomogeneousErrorRow> homogeneous_error(const Poly& u,
                                                   const SpaceTimePoint& base,
                                                   double tau1, double tau2,
                                                   int grid_points = 8);

// default tau-grid ratio for profiles
inline constexpr double kProfileRatio = 1.0905077326652577;  // 2^{1/8}

} // namespace calor
