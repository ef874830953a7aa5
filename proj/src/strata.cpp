#include "calor/strata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "calor/frequency.hpp"
#include "calor/gaussquad.hpp"

namespace calor {

// ---------------------------------------------------------------- GridRegion

GridRegion GridRegion::empty(const ParabolicBall& bounds, double hx) {
    if (hx <= 0) throw std::runtime_error("GridRegion: spacing must be positive");
    GridRegion g;
    g.bounds = bounds;
    g.hx = hx;
    g.ht = hx * hx;
    int n = bounds.center.dim();
    g.nx.assign((std::size_t)n, (long)std::ceil(2.0 * bounds.r / hx));
    g.nt = (long)std::ceil(2.0 * bounds.r * bounds.r / g.ht);
    g.cells.assign((std::size_t)g.total_cells(), 0);
    return g;
}

long GridRegion::spatial_cells() const {
    long s = 1;
    for (long v : nx) s *= v;
    return s;
}

long GridRegion::index(const std::vector<long>& iv, long it) const {
    long flat = 0;
    for (std::size_t i = 0; i < nx.size(); ++i) flat = flat * nx[i] + iv[i];
    return flat * nt + it;
}

SpaceTimePoint GridRegion::cell_center(const std::vector<long>& iv, long it) const {
    Eigen::VectorXd x = bounds.center.x;
    for (std::size_t i = 0; i < nx.size(); ++i)
        x((long)i) += -bounds.r + (iv[i] + 0.5) * hx;
    double t = bounds.center.t - bounds.r * bounds.r + (it + 0.5) * ht;
    return SpaceTimePoint(x, t);
}

bool GridRegion::get(const std::vector<long>& iv, long it) const {
    return cells[(std::size_t)index(iv, it)] != 0;
}

void GridRegion::set(const std::vector<long>& iv, long it, bool v) {
    cells[(std::size_t)index(iv, it)] = v ? 1 : 0;
}

long GridRegion::count() const {
    long c = 0;
    for (auto v : cells) c += v != 0;
    return c;
}

double GridRegion::cell_volume() const {
    double v = ht;
    for (std::size_t i = 0; i < nx.size(); ++i) v *= hx;
    return v;
}

namespace {

// two-pass distance transform along a strided 1D line: steps to the nearest
// occupied cell (large value when none)
void line_distance(const std::uint8_t* in, long count, long stride,
                   std::vector<long>& dist) {
    const long kFar = 1L << 60;
    dist.assign((std::size_t)count, kFar);
    long run = kFar;
    for (long i = 0; i < count; ++i) {
        run = in[i * stride] ? 0 : (run == kFar ? kFar : run + 1);
        dist[(std::size_t)i] = run;
    }
    run = kFar;
    for (long i = count - 1; i >= 0; --i) {
        run = in[i * stride] ? 0 : (run == kFar ? kFar : run + 1);
        dist[(std::size_t)i] = std::min(dist[(std::size_t)i], run);
    }
}

} // namespace

GridRegion GridRegion::dilated(double r) const {
    if (r <= 0) throw std::runtime_error("GridRegion::dilated: r must be positive");
    GridRegion out = *this;

    // time dilation: slab of half-width r^2 (strict, center-to-center)
    long rt = (long)std::floor(r * r / ht * (1.0 - 1e-12));
    long scells = spatial_cells();
    {
        std::vector<long> dist;
#pragma omp parallel for schedule(static) private(dist)
        for (long s = 0; s < scells; ++s) {
            line_distance(&cells[(std::size_t)(s * nt)], nt, 1, dist);
            for (long it = 0; it < nt; ++it)
                out.cells[(std::size_t)(s * nt + it)] =
                    dist[(std::size_t)it] <= rt ? 1 : 0;
        }
    }

    // spatial dilation: Euclidean ball of radius r, axis by axis is wrong for
    // n >= 2, so sweep offsets in all but the last axis and use a distance
    // transform along the last axis
    int n = dim();
    long rx = (long)std::floor(r / hx * (1.0 - 1e-12));
    if (n == 0 || rx < 0) return out;

    // distance-to-occupied along the last spatial axis for every line of the
    // time-dilated bitmap
    long last = nx[(std::size_t)(n - 1)];
    long lines = scells / last; // lines indexed by the leading spatial axes
    std::vector<long> lastdist((std::size_t)(scells * nt));
    {
        std::vector<long> dist;
#pragma omp parallel for collapse(2) schedule(static) private(dist)
        for (long L = 0; L < lines; ++L) {
            for (long it = 0; it < nt; ++it) {
                const std::uint8_t* base = &out.cells[(std::size_t)(L * last * nt + it)];
                line_distance(base, last, nt, dist);
                for (long j = 0; j < last; ++j)
                    lastdist[(std::size_t)((L * last + j) * nt + it)] =
                        dist[(std::size_t)j];
            }
        }
    }

    GridRegion res = out;
    // offsets over the leading n-1 axes; per offset the admissible reach along
    // the last axis is floor(sqrt(r^2 - |off|^2)/hx)
    std::vector<long> off((std::size_t)(n - 1), -rx);
    bool done = (n - 1) == 0;
    auto apply_offset = [&](const std::vector<long>& o, long reach) {
#pragma omp parallel for schedule(static)
        for (long flat = 0; flat < scells; ++flat) {
            long rem = flat;
            std::vector<long> iv((std::size_t)n);
            for (int i = n - 1; i >= 0; --i) {
                iv[(std::size_t)i] = rem % nx[(std::size_t)i];
                rem /= nx[(std::size_t)i];
            }
            bool ok = true;
            for (int i = 0; i < n - 1; ++i) {
                iv[(std::size_t)i] += o[(std::size_t)i];
                if (iv[(std::size_t)i] < 0 || iv[(std::size_t)i] >= nx[(std::size_t)i])
                    ok = false;
            }
            if (!ok) continue;
            long src = 0;
            for (int i = 0; i < n; ++i) src = src * nx[(std::size_t)i] + iv[(std::size_t)i];
            for (long it = 0; it < nt; ++it) {
                if (res.cells[(std::size_t)(flat * nt + it)]) continue;
                if (lastdist[(std::size_t)(src * nt + it)] <= reach)
                    res.cells[(std::size_t)(flat * nt + it)] = 1;
            }
        }
    };
    if (done) {
        apply_offset({}, rx);
    } else {
        while (true) {
            double o2 = 0;
            for (long v : off) o2 += (double)v * v * hx * hx;
            if (o2 < r * r) {
                long reach =
                    (long)std::floor(std::sqrt(r * r - o2) / hx * (1.0 - 1e-12));
                apply_offset(off, reach);
            }
            int a = 0;
            while (a < n - 1 && ++off[(std::size_t)a] > rx) {
                off[(std::size_t)a] = -rx;
                ++a;
            }
            if (a == n - 1) break;
        }
    }
    return res;
}

void GridRegion::rle_dump(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("rle_dump: cannot open " + path);
    out.precision(17);
    out << "calor-grid " << dim() << " " << hx << " " << bounds.r << " "
        << bounds.center.t;
    for (long i = 0; i < bounds.center.x.size(); ++i) out << " " << bounds.center.x(i);
    out << "\n";
    long scells = spatial_cells();
    for (long it = 0; it < nt; ++it) {
        std::ostringstream line;
        bool any = false;
        long s = 0;
        while (s < scells) {
            if (cells[(std::size_t)(s * nt + it)]) {
                long start = s, len = 0;
                while (s < scells && cells[(std::size_t)(s * nt + it)]) {
                    ++len;
                    ++s;
                }
                if (any) line << ",";
                line << start << "+" << len;
                any = true;
            } else {
                ++s;
            }
        }
        if (any) out << it << ":" << line.str() << "\n";
    }
}

GridRegion GridRegion::rle_parse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("rle_parse: cannot open " + path);
    std::string tag;
    int n;
    double hx, R, t0;
    in >> tag >> n >> hx >> R >> t0;
    if (tag != "calor-grid") throw std::runtime_error("rle_parse: bad header");
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) in >> c(i);
    GridRegion g = GridRegion::empty(ParabolicBall{SpaceTimePoint(c, t0), R}, hx);
    std::string line;
    std::getline(in, line); // finish header line
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t colon = line.find(':');
        if (colon == std::string::npos) throw std::runtime_error("rle_parse: bad row");
        long it = std::stol(line.substr(0, colon));
        std::stringstream runs(line.substr(colon + 1));
        std::string run;
        while (std::getline(runs, run, ',')) {
            std::size_t plus = run.find('+');
            long start = std::stol(run.substr(0, plus));
            long len = std::stol(run.substr(plus + 1));
            for (long s = start; s < start + len; ++s)
                g.cells[(std::size_t)(s * g.nt + it)] = 1;
        }
    }
    return g;
}

// ------------------------------------------------- effective nodal/singular

namespace {

struct LevelData {
    double s = 0.0;
    Poly rhs_poly;         // theta * smeared H, evaluated at the base point
    Poly F;                // u^2 (nodal) or u^2 + 2 s^2 |grad u|^2 (singular)
    double lip_x = 0.0;    // Euclidean gradient bound of F on the domain
    double lip_t = 0.0;    // time-derivative bound of F on the domain
};

std::vector<LevelData> build_levels(const Poly& u, double r_min, double theta,
                                    bool singular, double X, double T) {
    if (!(r_min > 0 && r_min < 1))
        throw std::runtime_error("effective set: need 0 < r_min < 1");
    Poly usq = u * u;
    Poly gsq(u.n());
    for (int i = 0; i < u.n(); ++i) {
        Poly d = u.dx(i);
        gsq = gsq + d * d;
    }
    std::vector<LevelData> levels(16);
    for (int j = 0; j < 16; ++j) {
        double s = std::pow(r_min, j / 15.0); // s_0 = 1 down to s_15 = r_min
        LevelData& L = levels[(std::size_t)j];
        L.s = s;
        Rat srat(s);
        L.rhs_poly = gauss_smear(usq, srat * srat) * Rat(theta);
        L.F = singular ? usq + gsq * (srat * srat * 2) : usq;
        double gx2 = 0.0;
        for (int i = 0; i < u.n(); ++i) {
            double b = L.F.dx(i).sup_bound(X, T);
            gx2 += b * b;
        }
        L.lip_x = std::sqrt(gx2);
        L.lip_t = L.F.dt().sup_bound(X, T);
    }
    return levels;
}

MembershipMargin membership_at(const std::vector<LevelData>& levels,
                               const SpaceTimePoint& x) {
    MembershipMargin mm;
    mm.member = true;
    mm.margin = std::numeric_limits<double>::infinity();
    for (const auto& L : levels) {
        double rhs = L.rhs_poly.eval(x.x, x.t);
        double norm = std::max(std::fabs(rhs), 1e-300);
        double rad = L.s / 16.0;
        double fc = L.F.eval(x.x, x.t);
        double margin;
        if (fc <= rhs) {
            margin = (rhs - fc) / norm;
        } else if (fc - L.lip_x * rad - L.lip_t * rad * rad > rhs) {
            margin = (rhs - (fc - L.lip_x * rad - L.lip_t * rad * rad)) / norm;
            mm.member = false;
        } else {
            // sub-sample P(x, s/16) at parabolic spacing s/64
            double best = fc;
            Eigen::VectorXd y = x.x;
            int n = (int)x.x.size();
            std::vector<int> dx((std::size_t)n, -4);
            while (true) {
                double nrm2 = 0;
                for (int i = 0; i < n; ++i) nrm2 += (double)dx[(std::size_t)i] *
                                                    dx[(std::size_t)i];
                if (nrm2 * (L.s / 64.0) * (L.s / 64.0) <= rad * rad) {
                    for (int i = 0; i < n; ++i)
                        y(i) = x.x(i) + dx[(std::size_t)i] * (L.s / 64.0);
                    double step_t = (L.s / 64.0) * (L.s / 64.0);
                    for (int m = -16; m <= 16; ++m)
                        best = std::min(best, L.F.eval(y, x.t + m * step_t));
                }
                int a = 0;
                while (a < n && ++dx[(std::size_t)a] > 4) {
                    dx[(std::size_t)a] = -4;
                    ++a;
                }
                if (a == n) break;
            }
            margin = (rhs - best) / norm;
            if (best > rhs) mm.member = false;
        }
        mm.margin = std::min(mm.margin, margin);
        if (!mm.member) break;
    }
    mm.borderline = std::fabs(mm.margin) < 1e-6;
    return mm;
}

// domain box bounds for the Lipschitz sup: |x| <= X, |t| <= T around origin
void domain_box(const ParabolicBall& domain, double& X, double& T) {
    X = domain.center.x.cwiseAbs().maxCoeff() + domain.r + 1.0;
    T = std::fabs(domain.center.t) + domain.r * domain.r + 1.0;
}

GridRegion effective_grid(const Poly& u, const ParabolicBall& domain, double r_min,
                          double hx, double theta, bool singular) {
    double X, T;
    domain_box(domain, X, T);
    auto levels = build_levels(u, r_min, theta, singular, X, T);
    GridRegion g = GridRegion::empty(domain, hx);
    long scells = g.spatial_cells();
#pragma omp parallel for schedule(dynamic, 8)
    for (long s = 0; s < scells; ++s) {
        std::vector<long> iv((std::size_t)g.dim());
        long rem = s;
        for (int i = g.dim() - 1; i >= 0; --i) {
            iv[(std::size_t)i] = rem % g.nx[(std::size_t)i];
            rem /= g.nx[(std::size_t)i];
        }
        for (long it = 0; it < g.nt; ++it) {
            SpaceTimePoint c = g.cell_center(iv, it);
            if (!domain.contains(c)) continue;
            MembershipMargin mm = membership_at(levels, c);
            if (mm.member) g.cells[(std::size_t)(s * g.nt + it)] = 1;
        }
    }
    return g;
}

} // namespace

MembershipMargin effective_nodal_point(const Poly& u, const SpaceTimePoint& x,
                                       double r_min) {
    double X = x.x.cwiseAbs().maxCoeff() + 2.0, T = std::fabs(x.t) + 2.0;
    auto levels = build_levels(u, r_min, 1.0 / 8.0, false, X, T);
    return membership_at(levels, x);
}

MembershipMargin effective_singular_point(const Poly& u, const SpaceTimePoint& x,
                                          double r_min) {
    double X = x.x.cwiseAbs().maxCoeff() + 2.0, T = std::fabs(x.t) + 2.0;
    auto levels = build_levels(u, r_min, 1.0 / 16.0, true, X, T);
    return membership_at(levels, x);
}

GridRegion effective_nodal(const Poly& u, const ParabolicBall& domain, double r_min,
                           double hx) {
    return effective_grid(u, domain, r_min, hx, 1.0 / 8.0, false);
}

GridRegion effective_singular(const Poly& u, const ParabolicBall& domain,
                              double r_min, double hx) {
    return effective_grid(u, domain, r_min, hx, 1.0 / 16.0, true);
}

// ------------------------------------------------------------------ strata

bool stratum_member(const Poly& u, const SpaceTimePoint& x, const StratumSpec& spec,
                    int levels) {
    if (!(spec.r1 > 0 && spec.r1 <= spec.r2 && spec.r2 <= 1.0))
        throw std::runtime_error("stratum_member: need 0 < r1 <= r2 <= 1");
    for (int j = 0; j < levels; ++j) {
        double s = levels == 1 ? spec.r1
                               : spec.r2 * std::pow(spec.r1 / spec.r2,
                                                    j / (double)(levels - 1));
        PinchingReport pr = kalpha_pinching(u, x, s, spec.k + 1, 1.0);
        if (!pr.search_ok) continue; // no independent subset: no upper witness
        if (pr.kalpha < spec.eps) return false;
    }
    return true;
}

GridRegion stratum_membership(const Poly& u, const StratumSpec& spec,
                              const ParabolicBall& domain, double hx) {
    GridRegion g = GridRegion::empty(domain, hx);
    long scells = g.spatial_cells();
#pragma omp parallel for schedule(dynamic)
    for (long s = 0; s < scells; ++s) {
        std::vector<long> iv((std::size_t)g.dim());
        long rem = s;
        for (int i = g.dim() - 1; i >= 0; --i) {
            iv[(std::size_t)i] = rem % g.nx[(std::size_t)i];
            rem /= g.nx[(std::size_t)i];
        }
        for (long it = 0; it < g.nt; ++it) {
            SpaceTimePoint c = g.cell_center(iv, it);
            if (!domain.contains(c)) continue;
            if (stratum_member(u, c, spec))
                g.cells[(std::size_t)(s * g.nt + it)] = 1;
        }
    }
    return g;
}

// ------------------------------------------------------------- minkowski

double minkowski_content(const GridRegion& region, double r,
                         const ParabolicBall& ambient) {
    if (region.hx > r / 8.0 * (1 + 1e-12))
        throw std::runtime_error("minkowski_content: grid spacing exceeds r/8");
    GridRegion dil = region.dilated(r);
    double vol = 0.0;
    long scells = dil.spatial_cells();
    double cv = dil.cell_volume();
#pragma omp parallel for schedule(static) reduction(+ : vol)
    for (long s = 0; s < scells; ++s) {
        std::vector<long> iv((std::size_t)dil.dim());
        long rem = s;
        for (int i = dil.dim() - 1; i >= 0; --i) {
            iv[(std::size_t)i] = rem % dil.nx[(std::size_t)i];
            rem /= dil.nx[(std::size_t)i];
        }
        for (long it = 0; it < dil.nt; ++it) {
            if (!dil.cells[(std::size_t)(s * dil.nt + it)]) continue;
            if (ambient.contains(dil.cell_center(iv, it))) vol += cv;
        }
    }
    return vol;
}

double minkowski_content(const AxisSet& set, double r, const ParabolicBall& ambient,
                         double spacing) {
    if (spacing > r / 8.0 * (1 + 1e-12))
        throw std::runtime_error("minkowski_content: grid spacing exceeds r/8");
    int n = ambient.center.dim();
    double hx = spacing, ht = hx * hx;
    double R = ambient.r;
    long per_axis = (long)std::ceil(2.0 * R / hx);
    double slab_lo = ambient.center.t - R * R, slab_hi = ambient.center.t + R * R;
    double lo = set.all_time ? slab_lo : set.t_lo;
    double hi = set.all_time ? slab_hi : set.t_hi;

    long spatial_total = 1;
    for (int i = 0; i < n; ++i) spatial_total *= per_axis;
    if (spatial_total > (1L << 26))
        throw std::runtime_error("minkowski_content: spatial grid too large");

    double vol = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : vol)
    for (long flat = 0; flat < spatial_total; ++flat) {
        long rem = flat;
        Eigen::VectorXd x(n);
        for (int i = n - 1; i >= 0; --i) {
            long idx = rem % per_axis;
            rem /= per_axis;
            x(i) = ambient.center.x(i) - R + (idx + 0.5) * hx;
        }
        if ((x - ambient.center.x).norm() >= R) continue;
        double d2 = 0.0;
        for (int a : set.zero_axes) d2 += x(a) * x(a);
        if (d2 >= r * r) continue;
        // time window: within r^2 of [lo, hi], clipped to the ambient slab
        double wlo = std::max(lo - r * r, slab_lo);
        double whi = std::min(hi + r * r, slab_hi);
        if (whi <= wlo) continue;
        // cell centers slab_lo + (j + 1/2) ht inside (wlo, whi)
        long jlo = (long)std::ceil((wlo - slab_lo) / ht - 0.5);
        long jhi = (long)std::floor((whi - slab_lo) / ht - 0.5);
        long nt = (long)std::ceil(2.0 * R * R / ht);
        jlo = std::max(jlo, 0L);
        jhi = std::min(jhi, nt - 1);
        if (jhi < jlo) continue;
        double cellvol = ht;
        for (int i = 0; i < n; ++i) cellvol *= hx;
        vol += (double)(jhi - jlo + 1) * cellvol;
    }
    return vol;
}

DimensionFit dimension_fit(const std::vector<std::pair<double, double>>& volumes,
                           int bootstrap, unsigned seed) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [r, v] : volumes)
        if (r > 0 && v > 0) pts.emplace_back(std::log(r), std::log(v));
    if (pts.size() < 4)
        throw std::runtime_error("dimension_fit: need at least 4 positive scales");
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0;
    for (const auto& [r, v] : volumes) {
        if (r > 0) {
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
    }
    if (rmax / rmin < 10.0 * (1 - 1e-12))
        throw std::runtime_error("dimension_fit: degenerate spread (< 1 decade)");

    auto fit = [](const std::vector<std::pair<double, double>>& p, double& slope,
                  double& icpt) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& [x, y] : p) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double m = (double)p.size();
        double den = m * sxx - sx * sx;
        slope = (m * sxy - sx * sy) / den;
        icpt = (sy - slope * sx) / m;
    };

    DimensionFit out;
    fit(pts, out.slope, out.intercept);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    std::vector<double> slopes;
    slopes.reserve((std::size_t)bootstrap);
    for (int b = 0; b < bootstrap; ++b) {
        std::vector<std::pair<double, double>> sample;
        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            auto p = pts[pick(rng)];
            sample.push_back(p);
            xmin = std::min(xmin, p.first);
            xmax = std::max(xmax, p.first);
        }
        if (xmax - xmin < 1e-9) continue; // all-equal resample has no slope
        double s, c;
        fit(sample, s, c);
        slopes.push_back(s);
    }
    std::sort(slopes.begin(), slopes.end());
    if (!slopes.empty()) {
        out.ci_lo = slopes[(std::size_t)((double)(slopes.size() - 1) * 0.025)];
        out.ci_hi = slopes[(std::size_t)((double)(slopes.size() - 1) * 0.975)];
    }
    return out;
}

DisintegrationReport time_slice_measures(const GridRegion& region, int k,
                                         double sigma) {
    DisintegrationReport rep;
    long scells = region.spatial_cells();
    for (long it = 0; it < region.nt; ++it) {
        long c = 0;
        for (long s = 0; s < scells; ++s) c += region.cells[(std::size_t)(s * region.nt + it)] != 0;
        TimeSliceRow row;
        std::vector<long> iv((std::size_t)region.dim(), 0);
        row.t = region.cell_center(iv, it).t;
        row.cells = c;
        row.measure = (double)c * std::pow(region.hx, (double)k - 2.0 * sigma);
        rep.slices.push_back(row);
        rep.lhs += row.measure * std::pow(region.ht, sigma);
    }
    rep.rhs = (double)region.count() * std::pow(region.hx, (double)k);
    rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : 0.0;
    return rep;
}

} // namespace calor
