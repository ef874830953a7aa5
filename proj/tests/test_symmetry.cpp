#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "calor/symmetry.hpp"

using namespace calor;

namespace {

SpaceTimePoint origin(int n) { return SpaceTimePoint(Eigen::VectorXd::Zero(n), 0.0); }

ParabolicPlane horizontal(int n, int axis) {
    ParabolicPlane V;
    V.base = origin(n);
    V.basis = Eigen::MatrixXd::Zero(n, 1);
    V.basis(axis, 0) = 1.0;
    V.vertical = false;
    return V;
}

} // namespace

TEST_CASE("h_1 against its own axis scores exactly one") {
    Poly h1 = heat_polynomial(1, 0, 1);
    auto sc = symmetry_score(h1, origin(1), 1.0, horizontal(1, 0));
    CHECK(sc.score == doctest::Approx(1.0).epsilon(1e-12));
    // scale-free for the homogeneous h_1
    auto sc2 = symmetry_score(h1, origin(1), 0.25, horizontal(1, 0));
    CHECK(sc2.score == doctest::Approx(1.0).epsilon(1e-12));

    // vertical extension adds only the (vanishing) time energy
    ParabolicPlane vert = horizontal(1, 0);
    vert.vertical = true;
    auto sv = symmetry_score(h1, origin(1), 1.0, vert);
    CHECK(sv.score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("invariant directions score zero and the eigensearch finds them") {
    // u = h_2(x_0) in two variables: constant along e_1
    Poly u = heat_polynomial(2, 0, 2);
    auto zero = symmetry_score(u, origin(2), 1.0, horizontal(2, 1));
    CHECK(zero.score == doctest::Approx(0.0).epsilon(1e-14));

    auto best = best_symmetry_plane(u, origin(2), 1.0, 1);
    CHECK(best.score == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(best.plane.vertical);
    CHECK(std::abs(best.plane.basis(1, 0)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("static functions are vertically symmetric") {
    // u = x y is caloric and time-independent: the bare time axis (k = 2)
    // scores zero
    Poly u = Poly::var(2, 0) * Poly::var(2, 1);
    auto best = best_symmetry_plane(u, origin(2), 0.5, 2);
    CHECK(best.plane.vertical);
    CHECK(best.plane.spatial_dim() == 0);
    CHECK(best.score == doctest::Approx(0.0).epsilon(1e-13));

    // all spatial directions carry equal energy: any k=1 answer scores 1
    auto k1 = best_symmetry_plane(u, origin(2), 1.0, 1);
    CHECK(k1.score == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("symmetry scores are invariant under basis rotation inside the plane") {
    Poly u = random_caloric(3, 4, 21);
    ParabolicPlane V;
    V.base = origin(3);
    V.basis = Eigen::MatrixXd::Zero(3, 2);
    V.basis(0, 0) = 1.0;
    V.basis(1, 1) = 1.0;
    V.vertical = false;
    auto a = symmetry_score(u, origin(3), 0.7, V);

    double c = std::cos(0.3), s = std::sin(0.3);
    ParabolicPlane W = V;
    W.basis(0, 0) = c;
    W.basis(1, 0) = s;
    W.basis(0, 1) = -s;
    W.basis(1, 1) = c;
    auto b = symmetry_score(u, origin(3), 0.7, W);
    CHECK(a.score == doctest::Approx(b.score).epsilon(1e-12));
}

TEST_CASE("pinching controls symmetry on the h_1 family") {
    Poly h1 = heat_polynomial(1, 0, 1);
    SpaceTimePoint base(Eigen::VectorXd::Constant(1, 0.05), 0.0);
    auto rep = pinching_to_symmetry(h1, base, 0.5, 1, 0.25);
    CHECK(rep.pinching >= 0.0);
    CHECK(rep.best.score >= 0.0);
    if (rep.bound_checked) CHECK(rep.bound_ok);
}

TEST_CASE("symmetry forces flat frequency along the plane") {
    // h_1(x_0) in two variables is invariant along e_1
    Poly u = heat_polynomial(1, 0, 2);
    ParabolicPlane V = horizontal(2, 1);
    auto rep = symmetry_to_pinching(u, origin(2), 0.5, 0.5, V, 0.01);
    CHECK(rep.pre_symmetric);
    CHECK(rep.max_variation == doctest::Approx(0.0).epsilon(1e-10));
    REQUIRE_FALSE(rep.samples.empty());
}

TEST_CASE("dimension reduction probe returns per-point scales") {
    // h_1 is symmetric about the vertical axis; off-plane probes must find a
    // scale with small full-dimensional pinching
    Poly h1 = heat_polynomial(1, 0, 1);
    ParabolicPlane axis;
    axis.base = origin(1);
    axis.basis = Eigen::MatrixXd::Zero(1, 0);
    axis.vertical = true;
    auto table = dimension_reduction_probe(h1, origin(1), 0.5, axis, 0.1, 0.05);
    REQUIRE_FALSE(table.rows.empty());
    for (const auto& row : table.rows) {
        if (row.found) {
            CHECK(row.beta > 0.0);
            CHECK(row.value < 0.05);
        }
    }
    if (table.any_found) CHECK(table.min_beta > 0.0);
}
