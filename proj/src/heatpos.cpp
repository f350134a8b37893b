#include "lab/heatpos.hpp"

#include "lab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lab {

HeatGeometry interval_geometry(int cells, double L)
{
    if (cells < 8 || !(L > 0.0))
        throw std::invalid_argument("interval_geometry: need cells >= 8 and L > 0");
    HeatGeometry g;
    g.name = "interval";
    g.a = 0.0;
    g.b = L;
    const double h = L / cells;
    for (int j = 0; j < cells; ++j) {
        g.x.push_back((j + 0.5) * h);
        g.volume.push_back(h);
    }
    g.face.assign(cells + 1, 1.0);
    return g;
}

HeatGeometry meridian_geometry(const RevolutionProfile& p, int cells)
{
    if (cells < 8)
        throw std::invalid_argument("meridian_geometry: need cells >= 8");
    HeatGeometry g;
    g.name = p.name();
    g.a = 0.0;
    g.b = p.L();
    const double h = p.L() / cells;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int j = 0; j < cells; ++j) {
        g.x.push_back((j + 0.5) * h);
        g.volume.push_back(two_pi * integrate_gl([&](double s) { return p.R(s); }, j * h,
                                                 (j + 1) * h, 1, 4));
    }
    for (int j = 0; j <= cells; ++j)
        g.face.push_back(two_pi * std::max(0.0, p.R(j * h)));
    return g;
}

double HeatTrajectory::mass(int step) const
{
    double m = 0.0;
    for (std::size_t j = 0; j < geom.x.size(); ++j)
        m += geom.volume[j] * u[step][j];
    return m;
}

double HeatTrajectory::norm2(int step) const
{
    double m = 0.0;
    for (std::size_t j = 0; j < geom.x.size(); ++j)
        m += geom.volume[j] * u[step][j] * u[step][j];
    return m;
}

namespace {

double interp_space(const HeatGeometry& g, const std::vector<double>& v, double x)
{
    const int n = static_cast<int>(g.x.size());
    if (x <= g.x.front())
        return v.front();
    if (x >= g.x.back())
        return v.back();
    const double h = g.h();
    int j = std::clamp(static_cast<int>((x - g.x.front()) / h), 0, n - 2);
    double s = (x - g.x[j]) / h;
    return (1.0 - s) * v[j] + s * v[j + 1];
}

// Measure of (c - rho, c + rho) within [a, b], cells counted by overlap fraction.
double ball_measure(const HeatGeometry& g, double c, double rho)
{
    const double lo = std::max(g.a, c - rho), hi = std::min(g.b, c + rho);
    const double h = g.h();
    double m = 0.0;
    for (std::size_t j = 0; j < g.x.size(); ++j) {
        double cl = g.x[j] - 0.5 * h, cr = g.x[j] + 0.5 * h;
        double ov = std::min(hi, cr) - std::max(lo, cl);
        if (ov > 0.0)
            m += g.volume[j] * ov / h;
    }
    return m;
}

std::vector<double> cover_centers(const HeatGeometry& g, double rho)
{
    std::vector<double> c;
    for (double x = g.a + rho;; x += 2.0 * rho) {
        c.push_back(std::min(x, g.b));
        if (x + rho >= g.b)
            break;
    }
    return c;
}

// int_{t0}^{t1} obs(u(t)) dt by trapezoid on the stored steps.
template <class Obs>
double time_integral(const HeatTrajectory& tr, double t0, double t1, Obs obs)
{
    std::vector<double> ts{t0};
    for (double t : tr.t)
        if (t > t0 && t < t1)
            ts.push_back(t);
    ts.push_back(t1);
    double sum = 0.0;
    double prev = obs(tr.at(ts[0]));
    for (std::size_t i = 1; i < ts.size(); ++i) {
        double cur = obs(tr.at(ts[i]));
        sum += 0.5 * (prev + cur) * (ts[i] - ts[i - 1]);
        prev = cur;
    }
    return sum;
}

void check_window(const HeatTrajectory& tr, double T, double eps)
{
    if (!(T > 0.0) || T > tr.t.back() * (1.0 + 1e-12))
        throw std::invalid_argument("observability: T outside the trajectory");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("observability: eps must lie in (0, 1)");
}

ObservabilityReport finish(ObservabilityReport r, const HeatTrajectory& tr, double obs_integral)
{
    const int n = 1;
    r.lhs = 0.0;
    std::vector<double> uT = tr.at(r.T);
    for (std::size_t j = 0; j < uT.size(); ++j)
        r.lhs += tr.geom.volume[j] * uT[j] * uT[j];
    double expo = std::pow(1.0 + r.eps, 3) * (r.distance + r.eta) * (r.distance + r.eta) / (2.0 * r.T);
    r.rhs = r.C_eta / (r.T * std::pow(r.eps, 2 * n + 2)) * std::exp(expo) * obs_integral;
    r.ratio = r.lhs > 0.0 ? r.rhs / r.lhs : INFINITY;
    r.pass = r.lhs <= r.rhs;
    return r;
}

} // namespace

double HeatTrajectory::value(double time, double x) const
{
    std::vector<double> v = at(time);
    return interp_space(geom, v, x);
}

std::vector<double> HeatTrajectory::at(double time) const
{
    if (time <= t.front())
        return u.front();
    if (time >= t.back())
        return u.back();
    int k = static_cast<int>(std::upper_bound(t.begin(), t.end(), time) - t.begin()) - 1;
    double s = (time - t[k]) / (t[k + 1] - t[k]);
    std::vector<double> v(u[k].size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = (1.0 - s) * u[k][j] + s * u[k + 1][j];
    return v;
}

HeatTrajectory solve_heat(const HeatGeometry& geom, const std::vector<double>& u0, double T,
                          double dt)
{
    const int n = static_cast<int>(geom.x.size());
    if (static_cast<int>(u0.size()) != n)
        throw std::invalid_argument("solve_heat: u0 does not match the grid");
    if (!(dt > 0.0) || !(T > 0.0))
        throw std::invalid_argument("solve_heat: T and dt must be positive");
    for (double v : u0)
        if (!(v >= 0.0))
            throw std::invalid_argument("solve_heat: negative or NaN initial data");
    const int steps = static_cast<int>(std::ceil(T / dt - 1e-9));
    const double k = T / steps;
    const double h = geom.h();

    // (V + k A) u_new = V u_old; off-diagonals -k R_face / h, zero flux at both ends
    std::vector<double> off(n + 1, 0.0), diag(n);
    for (int f = 1; f < n; ++f)
        off[f] = k * geom.face[f] / h;
    for (int j = 0; j < n; ++j)
        diag[j] = geom.volume[j] + off[j] + off[j + 1];

    HeatTrajectory tr;
    tr.geom = geom;
    tr.t.push_back(0.0);
    tr.u.push_back(u0);
    std::vector<double> cp(n), dp(n), x(n);
    for (int s = 1; s <= steps; ++s) {
        const std::vector<double>& prev = tr.u.back();
        // Thomas; every term keeps its sign, so nonnegativity is exact
        double denom = diag[0];
        cp[0] = off[1] / denom;
        dp[0] = geom.volume[0] * prev[0] / denom;
        for (int j = 1; j < n; ++j) {
            denom = diag[j] - off[j] * cp[j - 1];
            cp[j] = off[j + 1] / denom;
            dp[j] = (geom.volume[j] * prev[j] + off[j] * dp[j - 1]) / denom;
        }
        x[n - 1] = dp[n - 1];
        for (int j = n - 2; j >= 0; --j)
            x[j] = dp[j] + cp[j] * x[j + 1];
        tr.t.push_back(s * k);
        tr.u.push_back(x);
    }
    return tr;
}

double li_yau_check(const HeatTrajectory& traj, double alpha, double t1, double t2, double x,
                    double y, double K, int n)
{
    if (!(alpha > 1.0))
        throw std::invalid_argument("li_yau_check: alpha must exceed 1");
    if (!(t1 > 0.0 && t1 < t2 && t2 <= traj.t.back()))
        throw std::invalid_argument("li_yau_check: need 0 < t1 < t2 <= T");
    if (K < 0.0)
        throw std::invalid_argument("li_yau_check: K must be nonnegative");
    double lhs = traj.value(t1, x);
    double uy = traj.value(t2, y);
    if (!(uy > 0.0))
        throw std::domain_error("li_yau_check: u(t2, y) is not positive");
    double d = std::abs(x - y);
    double log_factor = 0.5 * n * alpha * std::log(t2 / t1) +
                        n * alpha * K * (t2 - t1) / (std::sqrt(2.0) * (alpha - 1.0)) +
                        alpha * d * d / (4.0 * (t2 - t1));
    return std::exp(log_factor) * uy - lhs;
}

ObservabilityReport positive_observability_check(const HeatTrajectory& traj, double omega_lo,
                                                 double omega_hi, double T, double eps,
                                                 double eta)
{
    check_window(traj, T, eps);
    const HeatGeometry& g = traj.geom;
    omega_lo = std::max(omega_lo, g.a);
    omega_hi = std::min(omega_hi, g.b);
    if (!(omega_hi > omega_lo))
        throw std::invalid_argument("positive_observability_check: empty omega");
    ObservabilityReport r;
    r.variant = "l2";
    r.T = T;
    r.eps = eps;
    r.eta = eta > 0.0 ? eta : 5.0 * g.h();
    const double rho = r.eta / 3.0;
    if (omega_hi - omega_lo < 2.0 * rho)
        throw std::invalid_argument("positive_observability_check: omega narrower than the covering balls");
    r.distance = std::max(omega_lo - g.a, g.b - omega_hi);
    // x in B(x_j, rho), y in B(y_j, rho) stay within d + 3 rho = d + eta
    r.C_eta = 0.0;
    for (double xc : cover_centers(g, rho)) {
        double yc = std::clamp(xc, omega_lo + rho, omega_hi - rho);
        r.C_eta += ball_measure(g, xc, rho) / ball_measure(g, yc, rho);
    }
    auto obs = [&](const std::vector<double>& v) {
        double s = 0.0;
        const double h = g.h();
        for (std::size_t j = 0; j < v.size(); ++j) {
            double ov = std::min(omega_hi, g.x[j] + 0.5 * h) - std::max(omega_lo, g.x[j] - 0.5 * h);
            if (ov > 0.0)
                s += g.volume[j] * ov / h * v[j] * v[j];
        }
        return s;
    };
    return finish(r, traj, time_integral(traj, (1.0 - eps) * T, T, obs));
}

ObservabilityReport pointwise_observability_check(const HeatTrajectory& traj, double z0,
                                                  double T, double eps, double eta)
{
    check_window(traj, T, eps);
    const HeatGeometry& g = traj.geom;
    if (z0 < g.a || z0 > g.b)
        throw std::invalid_argument("pointwise_observability_check: z0 outside the domain");
    ObservabilityReport r;
    r.variant = "pointwise";
    r.T = T;
    r.eps = eps;
    r.eta = eta > 0.0 ? eta : 5.0 * g.h();
    const double rho = r.eta / 3.0;
    r.distance = std::max(z0 - g.a, g.b - z0);
    // only x is integrated, so the covering contributes the ball measures themselves
    r.C_eta = 0.0;
    for (double xc : cover_centers(g, rho))
        r.C_eta += ball_measure(g, xc, rho);
    auto obs = [&](const std::vector<double>& v) {
        double u = interp_space(g, v, z0);
        return u * u;
    };
    return finish(r, traj, time_integral(traj, (1.0 - eps) * T, T, obs));
}

NegativeControl negative_control_example(int cells, double T, double eps, double dt)
{
    HeatGeometry g = interval_geometry(cells);
    const double L = g.b;
    NegativeControl nc;
    std::vector<double> u0(cells), u0s(cells);
    for (int j = 0; j < cells; ++j) {
        u0[j] = std::sin(2.0 * std::numbers::pi * g.x[j] / L);
        u0s[j] = u0[j] + 1.5;
    }
    // the sign-changing run bypasses the positivity guard: split into positive parts
    std::vector<double> pos(cells), neg(cells);
    for (int j = 0; j < cells; ++j) {
        pos[j] = std::max(u0[j], 0.0);
        neg[j] = std::max(-u0[j], 0.0);
    }
    HeatTrajectory tp = solve_heat(g, pos, T, dt), tn = solve_heat(g, neg, T, dt);
    HeatTrajectory diff = tp;
    for (std::size_t s = 0; s < diff.u.size(); ++s)
        for (int j = 0; j < cells; ++j)
            diff.u[s][j] = tp.u[s][j] - tn.u[s][j];
    const double z0 = 0.5 * L;
    nc.nodal = pointwise_observability_check(diff, z0, T, eps);
    for (std::size_t s = 0; s < diff.u.size(); ++s)
        nc.max_abs_observation = std::max(nc.max_abs_observation,
                                          std::abs(interp_space(g, diff.u[s], z0)));
    nc.shifted = pointwise_observability_check(solve_heat(g, u0s, T, dt), z0, T, eps);
    nc.as_predicted = !nc.nodal.pass && nc.shifted.pass;
    return nc;
}

} // namespace lab
