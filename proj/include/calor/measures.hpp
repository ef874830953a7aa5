#pragma once

// Point-cloud analytics for packing measures: spatial covariance, parabolic
// Jones beta-numbers (vertical family exact via PCA), best vertical planes,
// time-independent affine kappa-numbers, Ahlfors regularity sweeps, and
// discrete Carleson energies over dyadic scales.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "calor/spacetime.hpp"

namespace calor {

// Finite carrier of a packing measure: weighted atoms in space-time.
struct WeightedCloud {
    std::vector<SpaceTimePoint> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
    int dim() const { return points.empty() ? 0 : points.front().dim(); }
    double total_weight() const;
    WeightedCloud restrict_to(const ParabolicBall& ball) const;
};

WeightedCloud read_cloud_csv(const std::string& path);
void write_cloud_csv(const std::string& path, const WeightedCloud& cloud);

struct Covariance {
    Eigen::VectorXd x_cm;        // weighted spatial mean
    Eigen::MatrixXd Q;           // normalized spatial covariance
    Eigen::VectorXd eigenvalues; // ascending
    Eigen::MatrixXd eigenvectors;
    double mass = 0.0;
};

Covariance covariance(const WeightedCloud& mu, const ParabolicBall& ball);

enum class PlaneFamily { Vertical, All };

// Stored value is beta^2: r^{-(k+2)} * min over the plane family of
// \int_{P(x,r)} d_P(y, V)^2 dmu(y).
struct BetaNumber {
    SpaceTimePoint center;
    double r = 1.0;
    int k = 1;
    double value = 0.0;
    ParabolicPlane best_plane;
};

BetaNumber beta_number(const WeightedCloud& mu, const SpaceTimePoint& center, double r,
                       int k, PlaneFamily family = PlaneFamily::Vertical);

ParabolicPlane best_vertical_plane(const WeightedCloud& mu, const SpaceTimePoint& x,
                                   double r, int k);

// One sample of a graph function over a vertical plane: y in plane spatial
// coordinates, t, and the (possibly vector-valued) graph value.
struct GraphSample {
    Eigen::VectorXd y;
    double t = 0.0;
    Eigen::VectorXd val;
    double w = 1.0;
};

// kappa^2: best time-independent affine fit on the plane ball, reported as a
// weight-normalized mean-square residual divided by r^2.
double kappa_number(const std::vector<GraphSample>& samples, const SpaceTimePoint& x,
                    double r);

struct AhlforsRow {
    SpaceTimePoint center;
    double s = 0.0;
    double ratio = 0.0; // mu(P(center, s)) / s^k
};

struct AhlforsReport {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double spread = 0.0; // max/min over rows with positive mass
    bool all_positive = true;
    std::vector<AhlforsRow> rows;
};

AhlforsReport ahlfors_check(const WeightedCloud& mu, int k, double s_min, double s_max,
                            std::size_t max_centers = 64);

// Discrete Carleson energy: sum over atoms in the region and dyadic scales of
// beta^2(y, s) * log 2 * weight, normalized by region.r^k.
double carleson_energy(const WeightedCloud& mu, int k, const ParabolicBall& region,
                       double s_max, int levels = 12);

} // namespace calor
