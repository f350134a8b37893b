#include "lab/agmon.hpp"

#include "lab/io.hpp"
#include "lab/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lab {

namespace {

double integrand(const RevolutionProfile& p, double Rmax, double y)
{
    double R = p.R(y);
    if (!(R > 0.0))
        R = std::numeric_limits<double>::min();
    double num = (Rmax - R) * (Rmax + R);
    if (num <= 0.0)
        return 0.0;
    return std::sqrt(num) / (R * Rmax);
}

double checked(const QuadResult& q)
{
    if (!q.converged)
        throw std::runtime_error("agmon_distance: quadrature did not converge");
    return q.value;
}

} // namespace

double agmon_distance(const RevolutionProfile& p, const EquatorData& eq, double s, double tol)
{
    const double L = p.L(), s0 = eq.s0, Rmax = eq.Rmax;
    if (!(s > 0.0 && s < L))
        throw std::domain_error("agmon_distance: s outside (0, L)");
    if (s == s0)
        return 0.0;
    const bool left = s < s0;
    // split between the cusp region around s0 and the pole region
    const double sp = left ? 0.5 * s0 : s0 + 0.5 * (L - s0);
    const bool polar = left ? s < sp : s > sp;
    const double near_end = polar ? sp : s;
    const double sign = left ? -1.0 : 1.0;

    // y = s0 + sign t^2 removes the |y - s0| cusp
    double tmax = std::sqrt(std::abs(near_end - s0));
    double total = checked(integrate_adaptive(
        [&](double t) { return 2.0 * t * integrand(p, Rmax, s0 + sign * t * t); }, 0.0, tmax,
        tol, tol));
    if (polar) {
        // y = e^{-u} (or L - e^{-u}) turns the 1/y growth into a bounded integrand
        double u0 = -std::log(left ? sp : L - sp);
        double u1 = -std::log(left ? s : L - s);
        total += checked(integrate_adaptive(
            [&](double u) {
                double e = std::exp(-u);
                return integrand(p, Rmax, left ? e : L - e) * e;
            },
            u0, u1, tol, tol));
    }
    return total;
}

double agmon_distance(const RevolutionProfile& p, double s)
{
    return agmon_distance(p, equator_data(p), s);
}

double agmon_closed_sphere(double s)
{
    if (!(s > 0.0 && s < std::numbers::pi))
        throw std::domain_error("agmon_closed_sphere: s outside (0, pi)");
    return std::abs(std::log(std::sin(s)));
}

double agmon_closed_disk(double r)
{
    if (!(r > 0.0 && r <= 1.0))
        throw std::domain_error("agmon_closed_disk: r outside (0, 1]");
    double a = std::acosh(1.0 / r);
    return a - std::tanh(a);
}

double agmon_closed_disk_derivative(double r)
{
    if (!(r > 0.0 && r <= 1.0))
        throw std::domain_error("agmon_closed_disk_derivative: r outside (0, 1]");
    return -std::sqrt((1.0 - r) * (1.0 + r)) / r;
}

double agmon_asymptote_residual(const RevolutionProfile& p, const EquatorData& eq, double s)
{
    const double L = p.L();
    if (s > 0.0 && s < 0.1 * L)
        return agmon_distance(p, eq, s) + std::log(s);
    if (s > 0.9 * L && s < L)
        return agmon_distance(p, eq, s) + std::log(L - s);
    throw std::domain_error("agmon_asymptote_residual: s outside the pole neighborhoods");
}

namespace {

void fill_node(const RevolutionProfile& p, const EquatorData& eq, AgmonTable& t, int i)
{
    double s = t.s[i];
    double d = agmon_distance(p, eq, s);
    t.dA[i] = d;
    double g = integrand(p, eq.Rmax, s);
    t.dAprime[i] = s < eq.s0 ? -g : g;
    t.residual[i] = d + std::log(s < eq.s0 ? s : p.L() - s);
}

AgmonTable table_shell(const RevolutionProfile& p, const EquatorData& eq, int n)
{
    if (n < 2)
        throw std::invalid_argument("agmon_table: n must be at least 2");
    AgmonTable t;
    t.s0 = eq.s0;
    t.h = p.L() / n;
    for (int i = 1; i < n; ++i)
        t.s.push_back(p.L() * i / n);
    t.dA.resize(t.s.size());
    t.dAprime.resize(t.s.size());
    t.residual.resize(t.s.size());
    return t;
}

} // namespace

AgmonTable agmon_table(const RevolutionProfile& p, const EquatorData& eq, int n)
{
    AgmonTable t = table_shell(p, eq, n);
    const int m = static_cast<int>(t.s.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < m; ++i)
        fill_node(p, eq, t, i);
    return t;
}

AgmonTable agmon_table_serial(const RevolutionProfile& p, const EquatorData& eq, int n)
{
    AgmonTable t = table_shell(p, eq, n);
    for (int i = 0; i < static_cast<int>(t.s.size()); ++i)
        fill_node(p, eq, t, i);
    return t;
}

void write_agmon_csv(const AgmonTable& t, const std::string& path)
{
    CsvWriter w(path, {"s", "dA", "dAprime"});
    for (std::size_t i = 0; i < t.s.size(); ++i)
        w.row({t.s[i], t.dA[i], t.dAprime[i]});
}

} // namespace lab
