#include "lab/agmon.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace lab;

TEST_CASE("closed forms")
{
    CHECK(agmon_closed_sphere(0.3) == doctest::Approx(1.21901806321722744).epsilon(1e-14));
    CHECK(agmon_closed_disk(0.1) == doctest::Approx(1.99823540901976094).epsilon(1e-14));
    CHECK(agmon_closed_disk(0.5) == doctest::Approx(0.450932493140378062).epsilon(1e-14));
    CHECK(agmon_closed_disk(1.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(agmon_closed_disk_derivative(0.5) == doctest::Approx(-std::sqrt(3.0)));
}

TEST_CASE("quadrature matches the sphere closed form on random points")
{
    RevolutionProfile p = make_profile("sphere");
    EquatorData eq = equator_data(p);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(0.01, std::numbers::pi - 0.01);
    for (int i = 0; i < 100; ++i) {
        double s = U(rng);
        CHECK(std::abs(agmon_distance(p, eq, s) - agmon_closed_sphere(s)) <= 1e-8);
    }
}

TEST_CASE("disk distance is monotone and vanishes at the boundary")
{
    double prev = INFINITY;
    for (double r = 0.05; r <= 1.0; r += 0.05) {
        double d = agmon_closed_disk(r);
        CHECK(d < prev);
        prev = d;
    }
    // derivative check by central differences
    const double h = 1e-6;
    for (double r : {0.2, 0.5, 0.8})
        CHECK((agmon_closed_disk(r + h) - agmon_closed_disk(r - h)) / (2 * h) ==
              doctest::Approx(agmon_closed_disk_derivative(r)).epsilon(1e-6));
}

TEST_CASE("logarithmic asymptote at the poles")
{
    RevolutionProfile p = make_profile("sphere");
    EquatorData eq = equator_data(p);
    for (double s : {1e-2, 1e-3, 1e-4})
        CHECK(std::abs(agmon_asymptote_residual(p, eq, s)) < s);
}

TEST_CASE("agmon table: parallel equals serial")
{
    RevolutionProfile p = make_profile("perturbed-sphere", {{"eps", 0.05}});
    EquatorData eq = equator_data(p);
    AgmonTable a = agmon_table(p, eq, 200), b = agmon_table_serial(p, eq, 200);
    REQUIRE(a.s.size() == b.s.size());
    for (std::size_t i = 0; i < a.s.size(); ++i) {
        CHECK(a.dA[i] == b.dA[i]);
        CHECK(a.dAprime[i] == b.dAprime[i]);
    }
    // d_A vanishes at the equator and grows away from it
    CHECK(agmon_distance(p, eq, eq.s0) == doctest::Approx(0.0).scale(1.0));
    CHECK(agmon_distance(p, eq, 0.3) > agmon_distance(p, eq, 0.6));
}
