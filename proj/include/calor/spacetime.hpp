#pragma once

// Space-time geometry: points, parabolic balls, parabolic planes, the
// parabolic distance, and (k,alpha)-independence of finite point sets.
//
// The ambient space is R^n x R with the parabolic distance
//   d_P((x,t),(y,s)) = max(|x-y|_2, sqrt(|t-s|)),
// under which time scales like distance squared.

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace calor {

struct SpaceTimePoint {
    Eigen::VectorXd x;
    double t = 0.0;

    SpaceTimePoint() = default;
    SpaceTimePoint(Eigen::VectorXd xx, double tt) : x(std::move(xx)), t(tt) {}
    int dim() const { return (int)x.size(); }
};

double parabolic_distance(const SpaceTimePoint& a, const SpaceTimePoint& b);

// Parabolic scaling (x,t) -> (c_x + lambda (x-c_x), c_t + lambda^2 (t-c_t)).
SpaceTimePoint parabolic_scale(const SpaceTimePoint& p, double lambda,
                               const SpaceTimePoint& center);

struct ParabolicBall {
    SpaceTimePoint center;
    double r = 1.0;

    bool contains(const SpaceTimePoint& p) const;
};

// A parabolically invariant affine plane. Two kinds exist:
//   horizontal: base + L x {0},  L a j-dim spatial subspace, parabolic dim j;
//   vertical:   base + L x R,    L a j-dim spatial subspace, parabolic dim j+2.
// `basis` holds an orthonormal spanning set of L in its columns (n x j).
struct ParabolicPlane {
    SpaceTimePoint base;
    Eigen::MatrixXd basis;
    bool vertical = false;

    int spatial_dim() const { return (int)basis.cols(); }
    int k() const { return vertical ? spatial_dim() + 2 : spatial_dim(); }
};

// d_P(y, plane): distance from a point to the nearest plane point. Vertical
// planes match the time coordinate exactly (only the spatial orthogonal
// component remains); horizontal planes live on one time slice, so the
// sqrt|dt| term survives the infimum.
double plane_distance(const SpaceTimePoint& y, const ParabolicPlane& plane);

// A finite point set together with its independence verdict.
struct IndependentSet {
    std::vector<SpaceTimePoint> points;
    bool spatial = true;  // all pairwise |dt| < alpha^2 (valid when independent)
    double alpha = 0.0;
};

struct IndependenceReport {
    bool independent = false;
    bool spatial = true;
    // Minimized covering radius: min over planes W of parabolic dimension k-1
    // of max_i d_P(x_i, W). Independence means this exceeds alpha.
    double covering_radius = 0.0;
    double margin = 0.0;            // covering_radius - alpha
    ParabolicPlane witness;         // best covering plane found
};

// Decide whether `points` is (k,alpha)-independent: no plane of parabolic
// dimension k-1 has all points within parabolic distance alpha. The min-max
// search runs over a frame grid refined by coordinate descent (Givens
// rotations); the result is an upper bound for the true covering radius, so
// "not independent" verdicts are certain while "independent" verdicts carry
// the certification slack eps_cert.
IndependenceReport independence_check(const std::vector<SpaceTimePoint>& points,
                                      int k, double alpha,
                                      double eps_cert = 1e-3,
                                      unsigned seed = 12345);

// Build the spanned plane from an independent set: base = first point,
// L = span of the spatial differences (modified Gram-Schmidt with a full
// reorthogonalization pass), vertical iff the set is temporal. Throws
// std::runtime_error when the differences are spatially rank deficient
// below `tol`.
ParabolicPlane basis_from_independent(const IndependentSet& s, double tol = 1e-12);

// CSV rows "x1,...,xn,t"; `read` infers n from the first row.
std::vector<SpaceTimePoint> read_points_csv(std::istream& in);
void write_points_csv(std::ostream& out, const std::vector<SpaceTimePoint>& pts);

} // namespace calor
