#pragma once

// Neck regions: axiom verification, Whitney covering diagnostics, packing
// measure emission, and a finite-resolution greedy neck decomposition.

#include <string>
#include <vector>

#include "calor/caloricpoly.hpp"
#include "calor/measures.hpp"
#include "calor/spacetime.hpp"

namespace calor {

// P(x0, 2r) minus the closed balls P(x, r_x) around the center set; carries
// the model plane and the frequency/symmetry thresholds the axioms refer to.
struct NeckRegion {
    SpaceTimePoint x0;
    double r = 1.0; // neck scale; the center ball is P(x0, 2r)
    std::vector<SpaceTimePoint> centers;
    std::vector<double> radii; // r_x in [0, gamma r]
    ParabolicPlane model_plane;
    int m = 1;
    int k = 1;
    double delta = 0.05;
    double eta = 0.05;
    double gamma = 0.125;

    ParabolicBall center_ball() const { return ParabolicBall{x0, 2.0 * r}; }
};

struct AxiomCheck {
    bool pass = true;
    double margin = 0.0; // worst normalized slack; positive = satisfied
    std::string note;
};

struct NeckReport {
    AxiomCheck n1;         // P(x, gamma^2 r_x) pairwise disjoint
    AxiomCheck n2;         // sup_s |N_x(s^2) - m| < delta
    AxiomCheck n3;         // (k,delta,s)- but not (k+1,eta,s)-symmetric
    AxiomCheck n4a;        // centers hug x + V
    AxiomCheck n4b;        // plane covered by center balls
    AxiomCheck n4b_strong; // plane within gamma s of the center set
    AxiomCheck n5;         // r is parabolically delta-Lipschitz
    double cover_constant = 0.0; // achieved multiple of gamma (s + r_y) in n4b
    bool strong_checked = false;
    bool pass = true;
};

// Scan the scale band [max(r_x, s_floor), gamma^{-3} r] on a geometric grid
// and report the worst margin per axiom.  s_floor <= 0 selects gamma^2 r
// (the proxy floor used when r_x = 0).
NeckReport verify_neck(const Poly& u, const NeckRegion& N, bool strong = false,
                       double s_floor = 0.0, int levels = 10,
                       std::size_t max_centers = 64);

struct WhitneyReport {
    bool covered = true;
    int checked = 0;
    int skipped = 0; // (x, s) pairs below the radius floor
    double worst_gap = 0.0;
    std::vector<SpaceTimePoint> uncovered;
};

// Projected covering: plane points of P^V(pi(x), 7s/4) that lie inside the
// closed region ball must land in a closed plane ball P^V(pi(z),
// max(r_z, cover_slack)) for some center z near x.  cover_slack <= 0 selects
// the median nearest-neighbor spacing of the centers.
WhitneyReport whitney_cover_check(const NeckRegion& N, double cover_slack = 0.0,
                                  std::size_t max_centers = 24, int levels = 6);

// Packing measure: atoms r_x^{k_eff} at centers with r_x > 0, plus h0^{k_eff}
// surrogate weights at r_x = 0 centers.  k_eff < 0 selects n+1; h0 <= 0
// selects the median nearest-neighbor spacing.
WeightedCloud packing_measure(const NeckRegion& N, int k_eff = -1, double h0 = 0.0);

enum class BallClass { B, C, D, E, F };

struct ClassifiedBall {
    ParabolicBall ball;
    BallClass cls = BallClass::F;
    int depth = 0;
};

struct NeckLedger {
    double neck = 0.0, b = 0.0, d = 0.0, e = 0.0, f = 0.0; // sums of r^k
    double total() const { return neck + b + d + e + f; }
};

struct NeckDecomposition {
    std::vector<NeckRegion> necks;
    std::vector<ParabolicBall> b_balls;
    std::vector<ParabolicBall> f_balls;
    std::vector<ClassifiedBall> trace;
    NeckLedger ledger;
    bool budget_exceeded = false;
};

struct DecompParams {
    double alpha = 0.25;
    double gamma = 0.125;
    int depth_cap = 12;
    long ball_budget = 4096;
    unsigned seed = 17;
};

// Greedy classification: f at the radius floor; otherwise sample the pinched
// set V_{delta, m, rho} on P(x, 4 rho); b when some sample has small
// (k+1,1)-pinching at scale 100 rho; c (emit a neck over the symmetry plane)
// when the pinched set is (k, alpha rho)-independent; d/e subdivide.
NeckDecomposition greedy_neck_decomposition(const Poly& u, const ParabolicBall& ball,
                                            int k, double delta, double eta,
                                            double r_star,
                                            const DecompParams& params = {});

} // namespace calor
