#include "lab/heatpos.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace lab;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> gaussian(const HeatGeometry& g, double c, double w)
{
    std::vector<double> u(g.x.size());
    for (std::size_t j = 0; j < u.size(); ++j)
        u[j] = std::exp(-std::pow((g.x[j] - c) / w, 2));
    return u;
}

} // namespace

TEST_CASE("geometries")
{
    HeatGeometry g = interval_geometry(100, 2.0);
    CHECK(g.h() == doctest::Approx(0.02));
    CHECK(g.x.front() == doctest::Approx(0.01));
    CHECK(g.face.size() == 101);
    HeatGeometry s = meridian_geometry(make_profile("sphere"), 400);
    double area = 0.0;
    for (double v : s.volume)
        area += v;
    CHECK(area == doctest::Approx(4.0 * pi).epsilon(1e-12));
    CHECK(s.face.front() == doctest::Approx(0.0).scale(1.0));
    CHECK(s.face.back() == doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS(interval_geometry(4));
}

TEST_CASE("positivity and mass are preserved")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        HeatGeometry g = t % 2 ? interval_geometry(200) : meridian_geometry(make_profile("sphere"), 200);
        std::vector<double> u0(200);
        for (double& v : u0)
            v = U(rng) < 0.3 ? 0.0 : U(rng);
        HeatTrajectory tr = solve_heat(g, u0, 0.05, 1e-3);
        for (std::size_t s = 0; s < tr.t.size(); ++s) {
            CHECK(*std::min_element(tr.u[s].begin(), tr.u[s].end()) >= 0.0);
            CHECK(std::abs(tr.mass(s) - tr.mass(0)) <= 1e-10 * tr.mass(0));
        }
        // the L2 norm decays
        CHECK(tr.norm2(static_cast<int>(tr.t.size()) - 1) <= tr.norm2(0));
    }
    HeatGeometry g = interval_geometry(50);
    std::vector<double> bad(50, 1.0);
    bad[3] = -1e-3;
    CHECK_THROWS(solve_heat(g, bad, 0.1, 1e-3));
    CHECK_THROWS(solve_heat(g, std::vector<double>(49, 1.0), 0.1, 1e-3));
    CHECK_THROWS(solve_heat(g, std::vector<double>(50, 1.0), 0.1, 0.0));
}

TEST_CASE("discrete eigenfunction decay")
{
    // cos(pi x) + 2 is a discrete Neumann eigenvector with lambda_h = (2/h)^2 sin^2(pi h/2)
    const int n = 400;
    HeatGeometry g = interval_geometry(n);
    std::vector<double> u0(n);
    for (int j = 0; j < n; ++j)
        u0[j] = std::cos(pi * g.x[j]) + 2.0;
    const double dt = 1e-3;
    HeatTrajectory tr = solve_heat(g, u0, 0.1, dt);
    const double h = g.h();
    const double lh = std::pow(2.0 / h * std::sin(pi * h / 2.0), 2);
    const double factor = std::pow(1.0 / (1.0 + dt * lh), 100);
    for (int j = 0; j < n; ++j)
        CHECK(tr.u.back()[j] == doctest::Approx(2.0 + factor * std::cos(pi * g.x[j])).epsilon(1e-11));
}

TEST_CASE("interpolation in space and time")
{
    HeatGeometry g = interval_geometry(10);
    HeatTrajectory tr;
    tr.geom = g;
    tr.t = {0.0, 1.0};
    tr.u = {std::vector<double>(10, 0.0), g.x};
    CHECK(tr.value(0.5, 0.42) == doctest::Approx(0.21));
    CHECK(tr.value(1.0, 0.0) == doctest::Approx(0.05));  // clamped to the first center
    CHECK(tr.value(2.0, 0.42) == doctest::Approx(0.42));
}

TEST_CASE("Li-Yau randomized suite")
{
    HeatGeometry g = interval_geometry(400);
    HeatTrajectory tr = solve_heat(g, gaussian(g, 0.9, 0.03), 0.2, 1e-4);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
        double a = 1.1 + 1.9 * U(rng);
        double t1 = 0.2 * (0.005 + 0.9 * U(rng));
        double t2 = t1 + (0.2 - t1) * (0.01 + 0.99 * U(rng));
        violations += li_yau_check(tr, a, t1, t2, U(rng), U(rng)) < 0.0;
    }
    CHECK(violations == 0);
    CHECK_THROWS(li_yau_check(tr, 1.0, 0.05, 0.1, 0.2, 0.3));
    CHECK_THROWS(li_yau_check(tr, 2.0, 0.1, 0.05, 0.2, 0.3));
    CHECK_THROWS(li_yau_check(tr, 2.0, 0.05, 0.1, 0.2, 0.3, -1.0));
}

TEST_CASE("Li-Yau bound reduces to a ratio at equal points")
{
    HeatGeometry g = interval_geometry(200);
    HeatTrajectory tr = solve_heat(g, gaussian(g, 0.5, 0.1), 0.1, 1e-4);
    double t1 = 0.02, t2 = 0.08, a = 2.0;
    double m = li_yau_check(tr, a, t1, t2, 0.3, 0.3);
    double expect = std::pow(t2 / t1, a / 2.0) * tr.value(t2, 0.3) - tr.value(t1, 0.3);
    CHECK(m == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("observability of positive solutions")
{
    HeatGeometry g = interval_geometry(400);
    HeatTrajectory tr = solve_heat(g, gaussian(g, 0.9, 0.03), 0.1, 1e-4);
    double prev = INFINITY;
    for (double T : {0.025, 0.05, 0.1}) {
        double ratio = positive_observability_check(tr, 0.0, 0.2, T, 0.1).ratio;
        CHECK(ratio < prev);
        prev = ratio;
    }
    for (double T : {0.05, 0.1}) {
        ObservabilityReport a = positive_observability_check(tr, 0.0, 0.2, T, 0.1);
        CHECK(a.pass);
        CHECK(a.distance == doctest::Approx(0.8));
        CHECK(a.eta == doctest::Approx(5.0 * g.h()));
        CHECK(a.ratio > 1.0);
        ObservabilityReport b = pointwise_observability_check(tr, 0.5, T, 0.1);
        CHECK(b.pass);
        CHECK(b.distance == doctest::Approx(0.5));
    }
    CHECK_THROWS(positive_observability_check(tr, 0.0, 0.2, 0.2, 0.1));   // beyond the trajectory
    CHECK_THROWS(positive_observability_check(tr, 0.0, 0.2, 0.05, 1.0));  // eps outside (0, 1)
    CHECK_THROWS(positive_observability_check(tr, 0.1, 0.1 + g.h(), 0.05, 0.1));  // omega too thin
    CHECK_THROWS(pointwise_observability_check(tr, 1.5, 0.05, 0.1));
}

TEST_CASE("covering constant grows as eta shrinks")
{
    HeatGeometry g = interval_geometry(400);
    HeatTrajectory tr = solve_heat(g, gaussian(g, 0.9, 0.03), 0.05, 1e-4);
    ObservabilityReport fine = positive_observability_check(tr, 0.0, 0.2, 0.05, 0.1, 0.03);
    ObservabilityReport coarse = positive_observability_check(tr, 0.0, 0.2, 0.05, 0.1, 0.3);
    CHECK(fine.C_eta > coarse.C_eta);
}

TEST_CASE("negative control at a nodal point")
{
    NegativeControl nc = negative_control_example(400, 0.1, 0.1, 1e-4);
    CHECK_FALSE(nc.nodal.pass);
    CHECK(nc.max_abs_observation <= 1e-12);
    CHECK(nc.shifted.pass);
    CHECK(nc.as_predicted);
}
