#pragma once

// Effective nodal and singular sets on parabolic grids, quantitative strata,
// Minkowski-content box counting, dimension fitting, and time-slice
// disintegration sums.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "calor/caloricpoly.hpp"
#include "calor/spacetime.hpp"

namespace calor {

// Occupancy bitmap over a parabolic grid: spatial spacing h_x, time spacing
// h_t = h_x^2.  Cells are indexed per axis; a cell belongs to the region when
// its center satisfies the defining predicate.
struct GridRegion {
    ParabolicBall bounds;
    double hx = 0.0, ht = 0.0;
    std::vector<long> nx; // cells per spatial axis
    long nt = 0;
    std::vector<std::uint8_t> cells;

    static GridRegion empty(const ParabolicBall& bounds, double hx);

    int dim() const { return (int)nx.size(); }
    long spatial_cells() const;
    long total_cells() const { return spatial_cells() * nt; }
    long index(const std::vector<long>& iv, long it) const;
    SpaceTimePoint cell_center(const std::vector<long>& iv, long it) const;
    bool get(const std::vector<long>& iv, long it) const;
    void set(const std::vector<long>& iv, long it, bool v);
    long count() const;
    double cell_volume() const;
    double volume() const { return count() * cell_volume(); }

    // parabolic morphological dilation by radius r (spatial Euclidean ball,
    // time slab r^2), in grid units
    GridRegion dilated(double r) const;

    // run-length encoded dump (one line per time slice: it: start+len,...)
    void rle_dump(const std::string& path) const;
    static GridRegion rle_parse(const std::string& path);
};

struct MembershipMargin {
    bool member = false;
    // min over the scale grid of (threshold RHS - inf LHS), normalized by the
    // RHS magnitude; positive = member with room, near zero = borderline
    double margin = 0.0;
    bool borderline = false; // |margin| < 1e-6
};

// Z_r: inf_{P(x, s/16)} u^2 <= (1/8) \int u^2 dnu_{x; t - s^2} for all
// s in [r_min, 1] (16 geometric levels; inf sub-sampled at spacing s/64).
MembershipMargin effective_nodal_point(const Poly& u, const SpaceTimePoint& x,
                                       double r_min);

// S_r: same with inf of (u^2 + 2 s^2 |grad u|^2) and threshold 1/16.
MembershipMargin effective_singular_point(const Poly& u, const SpaceTimePoint& x,
                                          double r_min);

GridRegion effective_nodal(const Poly& u, const ParabolicBall& domain, double r_min,
                           double hx);
GridRegion effective_singular(const Poly& u, const ParabolicBall& domain,
                              double r_min, double hx);

struct StratumSpec {
    int k = 1;
    double eps = 1e-3;
    double r1 = 0.0, r2 = 1.0;
};

// S^k_{eps, r}: E^{k+1,1}_s(x) >= eps for all s in [r1, r2] (16-level grid;
// sampled semantics — scales are probed on the grid, not continuously).
bool stratum_member(const Poly& u, const SpaceTimePoint& x, const StratumSpec& spec,
                    int levels = 16);

GridRegion stratum_membership(const Poly& u, const StratumSpec& spec,
                              const ParabolicBall& domain, double hx);

// Box-count Minkowski content of P(region, r) within the ambient ball.
// Precondition: grid spacing <= r/8.
double minkowski_content(const GridRegion& region, double r,
                         const ParabolicBall& ambient);

// Closed-form carrier {x_i = 0 for i in zero_axes} x [t_lo, t_hi], intersected
// with the ambient ball; all_time extends the window to the full ambient slab.
struct AxisSet {
    std::vector<int> zero_axes;
    bool all_time = true;
    double t_lo = 0.0, t_hi = 0.0;
};

// Factorized box count for AxisSet carriers: spatial cells are enumerated,
// the time count per spatial cell is closed-form.
double minkowski_content(const AxisSet& set, double r, const ParabolicBall& ambient,
                         double spacing);

struct DimensionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0; // bootstrap 95%
};

// Log-log least squares of volume against r; needs >= 4 scales spanning a
// decade.
DimensionFit dimension_fit(const std::vector<std::pair<double, double>>& volumes,
                           int bootstrap = 200, unsigned seed = 11);

struct TimeSliceRow {
    double t = 0.0;
    long cells = 0;
    double measure = 0.0; // cells * hx^{k - 2 sigma}
};

struct DisintegrationReport {
    std::vector<TimeSliceRow> slices;
    double lhs = 0.0;  // sum over slices of measure * ht^sigma
    double rhs = 0.0;  // total box-count measure: count * hx^k
    double ratio = 0.0;
};

DisintegrationReport time_slice_measures(const GridRegion& region, int k,
                                         double sigma = 1.0);

} // namespace calor
