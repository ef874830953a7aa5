#pragma once

// Quantitative symmetry of caloric functions: directional scores against a
// space-time plane, eigenvector detection of the best nearly-invariant plane,
// the equivalence with frequency pinching, and the dimension-reduction probe.

#include <optional>
#include <vector>

#include "calor/caloricpoly.hpp"
#include "calor/frequency.hpp"
#include "calor/spacetime.hpp"

namespace calor {

enum class SymmetryMode { Spatial, Temporal };

// Smallest eps such that u is (k, eps, r)-symmetric with respect to the plane.
struct SymmetryScore {
    ParabolicPlane plane;
    double r = 1.0;
    double score = 0.0;
    SymmetryMode mode = SymmetryMode::Spatial;
};

// score = 2 r^2 \int |pi_V grad u|^2 dnu / H(r^2), plus 2 r^4 \int |du/dt|^2 / H
// when the plane is vertical (contains the time axis).  The plane's spatial
// columns are re-orthonormalized defensively before projecting.
SymmetryScore symmetry_score(const Poly& u, const SpaceTimePoint& x0, double r,
                             const ParabolicPlane& V);

// Candidate construction from the gradient Gram matrix G = \int grad u (x)
// grad u dnu_{-r^2}: the horizontal plane spans the k eigenvectors of smallest
// eigenvalue; the vertical one (k >= 2) spans the k-2 smallest plus the time
// axis.  Returns the lower-scoring candidate.  Heuristic: optimal within this
// eigen-candidate family, not certified over the whole plane Grassmannian.
SymmetryScore best_symmetry_plane(const Poly& u, const SpaceTimePoint& x0, double r,
                                  int k);

struct PinchSymReport {
    double pinching = 0.0;      // E^{k,alpha}_r at (x0, r)
    SymmetryScore best;         // best k-plane score at scale r
    double ratio = 0.0;         // score / pinching (0 when both vanish)
    bool bound_checked = false; // pinching below threshold, bound evaluated
    bool bound_ok = true;       // score <= ratio_bound * pinching (+1e-12)
};

// Small k-alpha pinching forces almost k-symmetry; report both sides.
PinchSymReport pinching_to_symmetry(const Poly& u, const SpaceTimePoint& x0, double r,
                                    int k, double alpha, double ratio_bound = 1e6,
                                    double threshold = 0.1);

struct SymPinchSample {
    SpaceTimePoint v;
    double variation = 0.0; // |N_v(50 r^2) - N_v(kappa^2 r^2 / 50)|
};

struct SymPinchReport {
    bool pre_symmetric = true;  // score at 100r below eps
    bool pre_pinched = true;    // frequency span at x0 below eps
    double score_100r = 0.0;
    double freq_span = 0.0;
    double max_variation = 0.0;
    double ratio_to_sqrt_eps = 0.0;
    std::vector<SymPinchSample> samples;
};

// Almost symmetry controls the frequency drop along the plane: sample points
// v on (x0 + V) inside P(x0, 10r) and report the largest variation.  Failed
// preconditions are flagged and the sweep still runs (diagnostic mode).
SymPinchReport symmetry_to_pinching(const Poly& u, const SpaceTimePoint& x0, double r,
                                    double kappa, const ParabolicPlane& V, double eps);

struct DimReductionRow {
    SpaceTimePoint y;
    bool found = false;
    double beta = 0.0;  // smallest grid scale with E^{k+1,1}_{beta r}(y) < eps
    double value = 0.0; // the pinching value at that scale
};

struct DimReductionTable {
    std::vector<DimReductionRow> rows;
    bool any_found = false;
    double min_beta = 0.0;
};

// Away from the symmetry plane, (k+1)-pinching becomes small at some scale:
// probe sample points y in P(x0, 2r) at plane-distance > eta r, scanning
// beta over a dyadic grid.
DimReductionTable dimension_reduction_probe(const Poly& u, const SpaceTimePoint& x0,
                                            double r, const ParabolicPlane& V,
                                            double eta, double eps,
                                            unsigned seed = 7);

} // namespace calor
