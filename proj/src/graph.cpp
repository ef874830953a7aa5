#include "calor/graph.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace calor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> stride_pick(std::size_t total, std::size_t want) {
    std::vector<std::size_t> idx;
    if (total == 0) return idx;
    std::size_t stride = std::max<std::size_t>(1, total / std::max<std::size_t>(1, want));
    for (std::size_t i = 0; i < total; i += stride) idx.push_back(i);
    return idx;
}

// Orthonormal complement of the (orthonormal) columns of B in R^n.
Eigen::MatrixXd complement_of(const Eigen::MatrixXd& B, int n) {
    int j = (int)B.cols();
    if (j == 0) return Eigen::MatrixXd::Identity(n, n);
    if (j >= n) return Eigen::MatrixXd::Zero(n, 0);
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - B * B.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("graph_from_centers: eigen-solver failure");
    // ascending eigenvalues: the last n-j eigenvectors span the complement
    return es.eigenvectors().rightCols(n - j);
}

std::string point_str(const SpaceTimePoint& p) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < p.dim(); ++i) os << p.x(i) << ",";
    os << "t=" << p.t << ")";
    return os.str();
}

double plane_dp(const Eigen::VectorXd& wa, double ta, const Eigen::VectorXd& wb,
                double tb) {
    return std::max((wa - wb).norm(), std::sqrt(std::fabs(ta - tb)));
}

double pair_lipschitz(const NeckGraph& G) {
    double lip = 0.0;
    auto pick = stride_pick(G.nodes.size(), 2048);
    for (std::size_t a = 0; a < pick.size(); ++a) {
        const auto& na = G.nodes[pick[a]];
        Eigen::VectorXd wa = G.node_coords(na);
        double ta = (double)na.tcell * G.h * G.h;
        for (std::size_t b = a + 1; b < pick.size(); ++b) {
            const auto& nb = G.nodes[pick[b]];
            double d = plane_dp(wa, ta, G.node_coords(nb), (double)nb.tcell * G.h * G.h);
            if (d <= 0) continue;
            lip = std::max(lip, (na.offset - nb.offset).norm() / d);
        }
    }
    return lip;
}

// The lattice sum of (cos(m th) - 1) m^{-3/2} differs from -sqrt(2 pi th) by
// -zeta(-1/2) th^2 / 2 plus O(th^4); the trailing second-difference term below
// cancels that defect, so the discrete operator matches the continuum symbol
// to relative order (omega dt)^{7/2}.
constexpr double kLatticeDefect = 0.20788622497735454; // -zeta(-1/2)

// Weight of residue class l for a periodic series: the kernel mass of every
// lattice point m = l + jW, so the finite sum equals the whole-line sum.
std::vector<double> periodized_weights(std::size_t W, double dt) {
    std::vector<double> w(W, 0.0);
    const double inv_sqrt_dt = 1.0 / std::sqrt(dt);
    const double wp = std::pow((double)W, 1.5);
#pragma omp parallel for schedule(static)
    for (long long l = 1; l < (long long)W; ++l) {
        double a = (double)l / (double)W;
        // tail sum_{j >= 1} (j + a)^{-3/2}: direct terms, then the midpoint
        // integral remainder 2 / sqrt(J + 1/2 + a)
        double tail = 0.0;
        const int J = 512;
        for (int j = J; j >= 1; --j) tail += std::pow((double)j + a, -1.5);
        tail += 2.0 / std::sqrt((double)J + 0.5 + a);
        w[(std::size_t)l] = inv_sqrt_dt * (std::pow((double)l, -1.5) + tail / wp);
    }
    return w;
}

// Symmetric second-difference sum with unit constant over one period,
// periodized weights, and the lattice-defect patch.
std::vector<double> raw_singular(const std::vector<double>& phi, double dt) {
    const long long W = (long long)phi.size();
    const auto wts = periodized_weights((std::size_t)W, dt);
    std::vector<double> out((std::size_t)W, 0.0);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < W; ++i) {
        double acc = 0.0;
        for (long long l = 1; l < W; ++l) {
            double diff = phi[(std::size_t)((i + l) % W)] +
                          phi[(std::size_t)((i - l + W) % W)] -
                          2.0 * phi[(std::size_t)i];
            acc += diff * wts[(std::size_t)l];
        }
        double d2 = phi[(std::size_t)((i + 1) % W)] + phi[(std::size_t)((i - 1 + W) % W)] -
                    2.0 * phi[(std::size_t)i];
        acc += d2 / (dt * dt) * kLatticeDefect * std::pow(dt, 1.5);
        out[(std::size_t)i] = acc;
    }
    return out;
}

std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

SpaceTimePoint NeckGraph::node_point(const GraphNode& nd) const {
    Eigen::VectorXd x = plane.base.x;
    if (plane.basis.cols() > 0)
        x += plane.basis * (nd.cell.cast<double>() * h);
    return SpaceTimePoint(x, plane.base.t + (double)nd.tcell * h * h);
}

Eigen::VectorXd NeckGraph::node_coords(const GraphNode& nd) const {
    return nd.cell.cast<double>() * h;
}

NeckGraph graph_from_centers(const WeightedCloud& centers, const ParabolicPlane& V,
                             double h) {
    if (!V.vertical)
        throw std::runtime_error("graph_from_centers: plane must be vertical");
    if (centers.size() == 0)
        throw std::runtime_error("graph_from_centers: empty center set");
    const int n = centers.points.front().dim();
    if ((int)V.basis.rows() != n)
        throw std::runtime_error("graph_from_centers: plane dimension mismatch");
    const int j = (int)V.basis.cols();

    NeckGraph G;
    G.plane = V;
    G.normal = complement_of(V.basis, n);

    // plane coordinates of the projections
    std::vector<Eigen::VectorXd> w(centers.size());
    std::vector<double> tc(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        Eigen::VectorXd d = centers.points[i].x - V.base.x;
        w[i] = V.basis.transpose() * d;
        tc[i] = centers.points[i].t - V.base.t;
    }

    if (h <= 0) {
        std::vector<double> nn;
        for (std::size_t i : stride_pick(centers.size(), 512)) {
            double best = kInf;
            for (std::size_t q = 0; q < centers.size(); ++q) {
                if (q == i) continue;
                best = std::min(best, plane_dp(w[i], tc[i], w[q], tc[q]));
            }
            if (std::isfinite(best) && best > 0) nn.push_back(best);
        }
        std::sort(nn.begin(), nn.end());
        h = nn.empty() ? 1.0 : nn[nn.size() / 2];
    }
    G.h = h;

    std::map<std::vector<long long>, std::size_t> seen;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        GraphNode nd;
        nd.cell = Eigen::VectorXi(j);
        std::vector<long long> key((std::size_t)j + 1);
        for (int d = 0; d < j; ++d) {
            long long c = std::llround(w[i](d) / h);
            nd.cell(d) = (int)c;
            key[(std::size_t)d] = c;
        }
        nd.tcell = std::llround(tc[i] / (h * h));
        key[(std::size_t)j] = nd.tcell;
        auto ins = seen.emplace(key, i);
        if (!ins.second) {
            std::ostringstream os;
            os << "graph_from_centers: non-graphical center set; "
               << point_str(centers.points[ins.first->second]) << " and "
               << point_str(centers.points[i]) << " project to one grid cell";
            throw std::runtime_error(os.str());
        }
        nd.offset = G.normal.transpose() * (centers.points[i].x - V.base.x);
        nd.source = centers.points[i];
        G.nodes.push_back(std::move(nd));
    }
    G.lipschitz_est = pair_lipschitz(G);
    return G;
}

double PartitionOfUnity::bump(std::size_t i, const SpaceTimePoint& p) const {
    const double r = radii[i];
    if (!(r > 0)) return 0.0;
    double dx2 = (p.x - centers[i].x).squaredNorm() / (r * r);
    double dt = (p.t - centers[i].t) / (r * r);
    double d2 = dx2 + dt * dt;
    if (d2 >= 1.0) return 0.0;
    double s = 1.0 - d2;
    return s * s * s;
}

double PartitionOfUnity::bump_sum(const SpaceTimePoint& p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) s += bump(i, p);
    return s;
}

double PartitionOfUnity::weight(std::size_t i, const SpaceTimePoint& p) const {
    double s = bump_sum(p);
    return s > 0 ? bump(i, p) / s : 0.0;
}

PouCheck pou_check(const PartitionOfUnity& pou, const std::vector<SpaceTimePoint>& probes) {
    PouCheck out;
    for (const auto& p : probes) {
        double s = pou.bump_sum(p);
        if (!(s > 0)) {
            out.covered = false;
            continue;
        }
        int overlap = 0;
        double total = 0.0;
        for (std::size_t i = 0; i < pou.centers.size(); ++i) {
            double b = pou.bump(i, p);
            if (b > 0) ++overlap;
            total += pou.weight(i, p);

            double r = pou.radii[i];
            if (!(b > 0) || !(r > 0)) continue;
            double hx = r / 64.0, ht = r * r / 64.0;
            for (int d = 0; d < p.dim(); ++d) {
                SpaceTimePoint pp = p, pm = p;
                pp.x(d) += hx;
                pm.x(d) -= hx;
                double wp = pou.weight(i, pp), wm = pou.weight(i, pm),
                       wc = pou.weight(i, p);
                out.c10 = std::max(out.c10, r * std::fabs(wp - wm) / (2 * hx));
                out.c20 = std::max(out.c20,
                                   r * r * std::fabs(wp + wm - 2 * wc) / (hx * hx));
            }
            SpaceTimePoint tp = p, tm = p;
            tp.t += ht;
            tm.t -= ht;
            out.c01 = std::max(out.c01, r * r *
                                            std::fabs(pou.weight(i, tp) -
                                                      pou.weight(i, tm)) /
                                            (2 * ht));
        }
        out.max_overlap = std::max(out.max_overlap, overlap);
        out.sum_err = std::max(out.sum_err, std::fabs(total - 1.0));
    }
    return out;
}

ExtensionResult whitney_extension(const NeckGraph& G, const std::vector<double>& hole_radii,
                                  double fit_factor) {
    const std::size_t M = G.nodes.size();
    if (hole_radii.size() != M)
        throw std::runtime_error("whitney_extension: hole field size mismatch");
    if (!(fit_factor > 1))
        throw std::runtime_error("whitney_extension: fit_factor must exceed 1");
    const int j = (int)G.plane.basis.cols();
    const int vdim = (int)G.normal.cols();

    std::vector<Eigen::VectorXd> w(M);
    std::vector<double> tt(M);
    for (std::size_t i = 0; i < M; ++i) {
        w[i] = G.node_coords(G.nodes[i]);
        tt[i] = (double)G.nodes[i].tcell * G.h * G.h;
        if (!(hole_radii[i] >= 0) || !std::isfinite(hole_radii[i]))
            throw std::runtime_error("whitney_extension: hole radii must be finite and >= 0");
    }
    // the hole field must vary no faster than distance, as a radius field does
    {
        auto pick = stride_pick(M, 2048);
        for (std::size_t a = 0; a < pick.size(); ++a)
            for (std::size_t b = a + 1; b < pick.size(); ++b) {
                double d = plane_dp(w[pick[a]], tt[pick[a]], w[pick[b]], tt[pick[b]]);
                if (std::fabs(hole_radii[pick[a]] - hole_radii[pick[b]]) > d + 1e-12)
                    throw std::runtime_error(
                        "whitney_extension: hole radii are not 1-Lipschitz");
            }
    }

    ExtensionResult out;
    out.filled = G;

    std::vector<std::size_t> kept, holes;
    for (std::size_t i = 0; i < M; ++i)
        (hole_radii[i] > 0 ? holes : kept).push_back(i);
    if (holes.empty()) {
        out.lipschitz_est = G.lipschitz_est;
        return out;
    }
    if (kept.empty())
        throw std::runtime_error("whitney_extension: no data outside the holes");

    // one affine, time-independent piece per hole node
    std::vector<Eigen::MatrixXd> coef(holes.size()); // (j+1) x vdim
    for (std::size_t hi = 0; hi < holes.size(); ++hi) {
        std::size_t z = holes[hi];
        double rad = fit_factor * hole_radii[z];
        std::vector<std::size_t> data;
        for (std::size_t i : kept)
            if (plane_dp(w[i], tt[i], w[z], tt[z]) < rad) data.push_back(i);
        if ((int)data.size() < j + 1) {
            std::ostringstream os;
            os << "whitney_extension: hole at " << point_str(G.node_point(G.nodes[z]))
               << " has no covering data";
            throw std::runtime_error(os.str());
        }
        Eigen::MatrixXd A((int)data.size(), j + 1);
        Eigen::MatrixXd rhs((int)data.size(), vdim);
        for (std::size_t q = 0; q < data.size(); ++q) {
            A.block((int)q, 0, 1, j) = (w[data[q]] - w[z]).transpose();
            A((int)q, j) = 1.0;
            rhs.row((int)q) = G.nodes[data[q]].offset.transpose();
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        if (qr.rank() < j + 1) {
            std::ostringstream os;
            os << "whitney_extension: hole at " << point_str(G.node_point(G.nodes[z]))
               << " has no covering data";
            throw std::runtime_error(os.str());
        }
        coef[hi] = qr.solve(rhs);
        double resid = (A * coef[hi] - rhs).cwiseAbs().maxCoeff();
        out.max_affine_residual = std::max(out.max_affine_residual, resid);
    }

    out.pou.centers.reserve(holes.size());
    out.pou.radii.reserve(holes.size());
    for (std::size_t z : holes) {
        out.pou.centers.push_back(G.node_point(G.nodes[z]));
        out.pou.radii.push_back(fit_factor * hole_radii[z] / 2.0);
    }

    for (std::size_t hi = 0; hi < holes.size(); ++hi) {
        std::size_t z = holes[hi];
        SpaceTimePoint pz = G.node_point(G.nodes[z]);
        double bsum = out.pou.bump_sum(pz);
        Eigen::VectorXd val = Eigen::VectorXd::Zero(vdim);
        for (std::size_t qi = 0; qi < holes.size(); ++qi) {
            double b = out.pou.bump(qi, pz);
            if (!(b > 0)) continue;
            Eigen::VectorXd rel(j + 1);
            rel.head(j) = w[z] - w[holes[qi]];
            rel(j) = 1.0;
            val += (b / bsum) * (coef[qi].transpose() * rel);
        }
        out.filled.nodes[z].offset = val;
    }
    out.filled.lipschitz_est = pair_lipschitz(out.filled);
    out.lipschitz_est = out.filled.lipschitz_est;
    return out;
}

double half_derivative_constant() {
    static const double c = [] {
        const std::size_t W = 4096;
        const double dt = 1.0 / (double)W; // period one, tone k has omega = 2 pi k
        const auto wts = periodized_weights(W, dt);
        double num = 0.0, den = 0.0;
        for (int k = 3; k <= 10; ++k) {
            const double th = 2.0 * M_PI * (double)k / (double)W;
            double amp = 0.0;
            for (std::size_t l = 1; l < W; ++l)
                amp += (2.0 * std::cos(th * (double)l) - 2.0) * wts[l];
            amp += (2.0 * std::cos(th) - 2.0) / (dt * dt) * kLatticeDefect *
                   std::pow(dt, 1.5);
            const double target = std::sqrt(2.0 * M_PI * (double)k);
            num += target * amp;
            den += amp * amp;
        }
        return num / den;
    }();
    return c;
}

std::vector<double> half_time_derivative(const std::vector<double>& phi, double dt,
                                         HalfDtBackend backend) {
    const std::size_t W = phi.size();
    if (W < 4) throw std::runtime_error("half_time_derivative: series too short");
    if (!(dt > 0)) throw std::runtime_error("half_time_derivative: dt must be positive");
    for (double v : phi)
        if (!std::isfinite(v))
            throw std::runtime_error("half_time_derivative: non-finite input");

    if (backend == HalfDtBackend::Singular) {
        std::vector<double> out = raw_singular(phi, dt);
        const double c = half_derivative_constant();
        for (double& v : out) v *= c;
        return out;
    }

    std::lock_guard<std::mutex> lock(fftw_mutex());
    double* in = fftw_alloc_real(W);
    fftw_complex* fc = fftw_alloc_complex(W / 2 + 1);
    std::copy(phi.begin(), phi.end(), in);
    fftw_plan fwd = fftw_plan_dft_r2c_1d((int)W, in, fc, FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);
    for (std::size_t m = 0; m <= W / 2; ++m) {
        double om = 2.0 * M_PI * (double)m / ((double)W * dt);
        double s = std::sqrt(om);
        fc[m][0] *= s;
        fc[m][1] *= s;
    }
    fftw_plan bwd = fftw_plan_dft_c2r_1d((int)W, fc, in, FFTW_ESTIMATE);
    fftw_execute(bwd);
    fftw_destroy_plan(bwd);
    std::vector<double> out(W);
    for (std::size_t i = 0; i < W; ++i) out[i] = in[i] / (double)W;
    fftw_free(in);
    fftw_free(fc);
    return out;
}

double bmo_norm(const std::vector<SpaceTimePoint>& pts, const std::vector<double>& g,
                int levels) {
    if (pts.size() != g.size())
        throw std::runtime_error("bmo_norm: point/value size mismatch");
    if (pts.empty()) return 0.0;
    if (levels < 1) levels = 1;
    const int n = pts.front().dim();
    Eigen::VectorXd xlo = pts.front().x, xhi = pts.front().x;
    double tlo = pts.front().t, thi = pts.front().t;
    for (const auto& p : pts) {
        xlo = xlo.cwiseMin(p.x);
        xhi = xhi.cwiseMax(p.x);
        tlo = std::min(tlo, p.t);
        thi = std::max(thi, p.t);
    }
    SpaceTimePoint c0((xlo + xhi) / 2.0, (tlo + thi) / 2.0);
    double R = 0.0;
    for (const auto& p : pts) R = std::max(R, parabolic_distance(p, c0));
    if (!(R > 0)) return 0.0;
    R *= 1.0 + 1e-12;

    double worst = 0.0;
    for (int lev = 0; lev < levels; ++lev) {
        double s = R / std::pow(2.0, lev);
        // ball centers on a parabolic lattice of spacing s over the window
        std::vector<SpaceTimePoint> cts;
        long long kx = (long long)std::floor(R / s), kt = (long long)std::floor(R * R / (s * s));
        long long per = 2 * kx + 1, total = 2 * kt + 1;
        for (int d = 0; d < n; ++d) total *= per;
        long long stride = std::max(1LL, total / 4096);
        for (long long f = 0; f < total; f += stride) {
            long long rem = f;
            Eigen::VectorXd x = c0.x;
            for (int d = 0; d < n; ++d) {
                x(d) += (double)(rem % per - kx) * s;
                rem /= per;
            }
            cts.emplace_back(x, c0.t + (double)(rem % (2 * kt + 1) - kt) * s * s);
        }
        for (const auto& c : cts) {
            double sum = 0.0;
            long long cnt = 0;
            for (std::size_t i = 0; i < pts.size(); ++i)
                if (parabolic_distance(pts[i], c) < s) {
                    sum += g[i];
                    ++cnt;
                }
            if (cnt == 0) continue;
            double mean = sum / (double)cnt, osc = 0.0;
            for (std::size_t i = 0; i < pts.size(); ++i)
                if (parabolic_distance(pts[i], c) < s) osc += std::fabs(g[i] - mean);
            worst = std::max(worst, osc / (double)cnt);
        }
    }
    return worst;
}

RegularityReport regularity_report(const NeckGraph& G, double c_impl, double abs_tol) {
    RegularityReport rep;
    rep.lipschitz_est = G.lipschitz_est;
    if (G.nodes.empty() || G.normal.cols() == 0) {
        rep.regular = true;
        return rep;
    }
    const int j = (int)G.plane.basis.cols();

    // group nodes into per-site time series; the grid must be complete
    std::map<std::vector<int>, std::map<long long, std::size_t>> sites;
    for (std::size_t i = 0; i < G.nodes.size(); ++i) {
        std::vector<int> key((std::size_t)j);
        for (int d = 0; d < j; ++d) key[(std::size_t)d] = G.nodes[i].cell(d);
        sites[key][G.nodes[i].tcell] = i;
    }
    std::vector<long long> tref;
    for (auto& [key, series] : sites) {
        std::vector<long long> ts;
        for (auto& [t, idx] : series) ts.push_back(t);
        if (tref.empty()) {
            tref = ts;
            if (ts.size() < 4 || ts.back() - ts.front() + 1 != (long long)ts.size())
                throw std::runtime_error(
                    "regularity_report: graph is not a complete grid over V");
        } else if (ts != tref) {
            throw std::runtime_error(
                "regularity_report: graph is not a complete grid over V");
        }
    }

    // kappa Carleson energy over dyadic plane balls
    std::vector<GraphSample> samples(G.nodes.size());
    std::vector<SpaceTimePoint> qpts(G.nodes.size());
    for (std::size_t i = 0; i < G.nodes.size(); ++i) {
        samples[i].y = G.node_coords(G.nodes[i]);
        samples[i].t = (double)G.nodes[i].tcell * G.h * G.h;
        samples[i].val = G.nodes[i].offset;
        samples[i].w = 1.0;
        qpts[i] = SpaceTimePoint(samples[i].y, samples[i].t);
    }
    Eigen::VectorXd xlo = qpts.front().x, xhi = qpts.front().x;
    double tlo = qpts.front().t, thi = qpts.front().t;
    for (const auto& p : qpts) {
        xlo = xlo.cwiseMin(p.x);
        xhi = xhi.cwiseMax(p.x);
        tlo = std::min(tlo, p.t);
        thi = std::max(thi, p.t);
    }
    SpaceTimePoint c0((xlo + xhi) / 2.0, (tlo + thi) / 2.0);
    double R = 0.0;
    for (const auto& p : qpts) R = std::max(R, parabolic_distance(p, c0));
    const int k = G.plane.k();
    if (R > 0) {
        double energy = 0.0;
        for (int lev = 0; lev < 5; ++lev) {
            double s = R / std::pow(2.0, lev);
            long long kx = (long long)std::floor(R / s),
                      kt = (long long)std::floor(R * R / (s * s));
            long long per = 2 * kx + 1, total = 2 * kt + 1;
            for (int d = 0; d < j; ++d) total *= per;
            long long stride = std::max(1LL, total / 4096);
            for (long long f = 0; f < total; f += stride) {
                long long rem = f;
                Eigen::VectorXd x = c0.x;
                for (int d = 0; d < j; ++d) {
                    x(d) += (double)(rem % per - kx) * s;
                    rem /= per;
                }
                SpaceTimePoint c(x, c0.t + (double)(rem % (2 * kt + 1) - kt) * s * s);
                try {
                    double kap2 = kappa_number(samples, c, s);
                    energy += kap2 * std::pow(s, k) * std::log(2.0);
                } catch (const std::exception&) {
                    // under-determined ball: too few samples for the fit
                }
            }
        }
        rep.carleson_energy = energy / std::pow(R, k);
    }

    // BMO of the half time derivative, site by site
    std::vector<double> g(G.nodes.size(), 0.0);
    const double dtau = G.h * G.h;
    for (auto& [key, series] : sites) {
        std::vector<double> phi;
        std::vector<std::size_t> order;
        for (auto& [t, idx] : series) {
            phi.push_back(G.nodes[idx].offset(0));
            order.push_back(idx);
        }
        auto half = half_time_derivative(phi, dtau, HalfDtBackend::Fourier);
        for (std::size_t q = 0; q < order.size(); ++q) g[order[q]] = half[q];
    }
    rep.bmo_half_dt = bmo_norm(qpts, g);

    double root = std::sqrt(std::max(0.0, rep.carleson_energy));
    rep.ratio = root > 0 ? rep.bmo_half_dt / root
                         : (rep.bmo_half_dt > 0 ? kInf : 0.0);
    rep.regular = rep.bmo_half_dt <= c_impl * root + abs_tol;
    return rep;
}

} // namespace calor
