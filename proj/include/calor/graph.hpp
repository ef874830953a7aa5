#pragma once

// Graph pipeline over a vertical model plane: the center-set graph map, a
// Whitney-style almost extension across holes, the half-order time
// derivative, parabolic BMO, and the Carleson-to-BMO regularity shadow.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "calor/measures.hpp"
#include "calor/spacetime.hpp"

namespace calor {

struct GraphNode {
    Eigen::VectorXi cell;   // integer plane-grid coordinates (j entries)
    long long tcell = 0;    // integer time-grid coordinate
    Eigen::VectorXd offset; // normal components, length n - j
    SpaceTimePoint source;  // the center this node came from
};

// A center set viewed as a graph over a vertical plane V: one normal offset
// per occupied grid cell, plus the worst pair slope.
struct NeckGraph {
    ParabolicPlane plane;       // vertical
    Eigen::MatrixXd normal;     // n x (n-j) orthonormal complement of the basis
    double h = 0.0;             // spatial grid spacing; time spacing is h^2
    std::vector<GraphNode> nodes;
    double lipschitz_est = 0.0; // max |offset difference| / d_P over node pairs

    SpaceTimePoint node_point(const GraphNode& nd) const; // plane point of a node
    Eigen::VectorXd node_coords(const GraphNode& nd) const; // plane coordinates
};

// Project each center onto V and snap to the grid (spacing h; h <= 0 picks the
// median nearest-neighbor spacing of the projections).  Two centers over one
// grid cell make the set non-graphical and raise an error naming both.
NeckGraph graph_from_centers(const WeightedCloud& centers, const ParabolicPlane& V,
                             double h = 0.0);

// Shepard blend of C^2 bumps (1 - d^2)^3 with the anisotropic parabolic
// profile d^2 = |dx|^2/r^2 + dt^2/r^4; weights sum to one wherever some bump
// is positive.
struct PartitionOfUnity {
    std::vector<SpaceTimePoint> centers;
    std::vector<double> radii;

    double bump(std::size_t i, const SpaceTimePoint& p) const;
    double bump_sum(const SpaceTimePoint& p) const;
    double weight(std::size_t i, const SpaceTimePoint& p) const;
};

struct PouCheck {
    double sum_err = 0.0; // max |sum of weights - 1| over covered probes
    int max_overlap = 0;  // most bumps active at one probe
    double c10 = 0.0;     // max r |grad psi|        (finite differences)
    double c01 = 0.0;     // max r^2 |dpsi/dt|
    double c20 = 0.0;     // max r^2 |second differences|
    bool covered = true;  // every probe lies in some bump support
};
PouCheck pou_check(const PartitionOfUnity& pou, const std::vector<SpaceTimePoint>& probes);

struct ExtensionResult {
    NeckGraph filled;     // offsets on every node; hole nodes overwritten
    PartitionOfUnity pou; // one blending piece per hole node
    double lipschitz_est = 0.0;
    double max_affine_residual = 0.0; // worst per-piece least-squares residual
};

// Whitney-style almost extension: keep the data where hole_radii = 0; on hole
// nodes blend time-independent affine fits of the kept data over
// P(z, fit_factor * rhat_z).  Affine data is reproduced exactly.  Throws when
// the hole radii are not 1-Lipschitz or a hole has too little covering data.
ExtensionResult whitney_extension(const NeckGraph& G, const std::vector<double>& hole_radii,
                                  double fit_factor = 8.0);

enum class HalfDtBackend { Singular, Fourier };

// Half-order time derivative of a periodic series (compactly supported series
// qualify).  The Fourier backend applies the |omega|^{1/2} multiplier; the
// singular backend sums the symmetric second-difference kernel
// (phi(t+s) + phi(t-s) - 2 phi(t)) / s^{3/2} with a local Taylor patch for the
// first cell, scaled by the calibrated constant.
std::vector<double> half_time_derivative(const std::vector<double>& phi, double dt,
                                         HalfDtBackend backend);

// The singular-kernel normalizer, calibrated once by least squares against the
// Fourier multiplier on pure tones (the closed form is -1 / (2 sqrt(2 pi))).
double half_derivative_constant();

// Parabolic BMO over a dyadic ball family inside the sample window: max over
// balls of the mean of |g - ball mean|.
double bmo_norm(const std::vector<SpaceTimePoint>& pts, const std::vector<double>& g,
                int levels = 5);

struct RegularityReport {
    double lipschitz_est = 0.0;
    double carleson_energy = 0.0; // dyadic kappa^2 energy, normalized by R^k
    double bmo_half_dt = 0.0;     // BMO of the half time derivative of f
    double ratio = 0.0;           // bmo / sqrt(carleson energy)
    bool regular = true;          // bmo <= c_impl sqrt(energy) + abs_tol
};

// Numeric shadow of "small kappa-Carleson energy forces small BMO" on a
// grid-complete graph (every occupied site carries the same time range).
// c_impl is configuration, not a derived constant.
RegularityReport regularity_report(const NeckGraph& G, double c_impl = 10.0,
                                   double abs_tol = 1e-9);

} // namespace calor
