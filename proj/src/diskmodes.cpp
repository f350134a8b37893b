#include "lab/diskmodes.hpp"

#include "lab/agmon.hpp"
#include "lab/fit.hpp"
#include "lab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lab {

double bessel_j_series(int n, double z)
{
    if (n < 0 || z < 0.0)
        throw std::domain_error("bessel_j_series: need n >= 0, z >= 0");
    if (z == 0.0)
        return n == 0 ? 1.0 : 0.0;
    double half = 0.5 * z;
    double t = std::exp(n * std::log(half) - std::lgamma(n + 1.0));
    double sum = t;
    double q = half * half;
    for (int j = 0; j < 10000; ++j) {
        t *= -q / ((j + 1.0) * (n + j + 1.0));
        sum += t;
        if (std::abs(t) <= 1e-17 * std::abs(sum) && j > half)
            break;
    }
    return sum;
}

double bessel_j_trapezoid(int n, double z, int m)
{
    if (n < 0 || z < 0.0)
        throw std::domain_error("bessel_j_trapezoid: need n >= 0, z >= 0");
    if (m <= 0)
        m = 2 * (n + static_cast<int>(z)) + 64;
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
        double th = 2.0 * std::numbers::pi * j / m;
        sum += std::cos(n * th - z * std::sin(th));
    }
    return sum / m;
}

double bessel_j(int n, double z)
{
    if (n < 0 || z < 0.0)
        throw std::domain_error("bessel_j: need n >= 0, z >= 0");
    if (!std::isfinite(z) || z > 1e6)
        throw std::overflow_error("bessel_j: argument too large");
    if (z < 1.0)
        return bessel_j_series(n, z);
    // Miller: backward recurrence from a start index past both n and z,
    // normalized by J_0 + 2 sum_{k>=1} J_{2k} = 1
    double top = std::max<double>(n, z);
    int m = static_cast<int>(top + 30.0 + 4.0 * std::sqrt(top));
    m += m % 2;
    const double big = 1e250;
    double jp = 0.0, j = 1e-300;
    double sum = 0.0, result = 0.0;
    for (int k = m; k >= 1; --k) {
        double jm = (2.0 * k / z) * j - jp;
        jp = j;
        j = jm;  // J_{k-1}, unnormalized
        if (std::abs(j) > big) {
            j /= big;
            jp /= big;
            result /= big;
            sum /= big;
        }
        if (k - 1 == n)
            result = j;
        if (k - 1 > 0 && (k - 1) % 2 == 0)
            sum += 2.0 * j;
    }
    sum += j;
    return result / sum;
}

double bessel_first_zero(int n)
{
    if (n < 0)
        throw std::domain_error("bessel_first_zero: n must be nonnegative");
    double lo = n;
    double hi = n + 4.0 * std::cbrt(n + 1.0) + 4.0;
    double flo = bessel_j(n, lo);
    if (!(flo > 0.0))
        throw std::runtime_error("bessel_first_zero: J_n(n) not positive");
    const int steps = 400;
    double a = lo, fa = flo, b = hi;
    bool found = false;
    for (int i = 1; i <= steps; ++i) {
        double x = lo + (hi - lo) * i / steps;
        double fx = bessel_j(n, x);
        if (fx <= 0.0) {
            b = x;
            found = true;
            break;
        }
        a = x;
        fa = fx;
    }
    if (!found)
        throw std::runtime_error("bessel_first_zero: no sign change in bracket");
    (void)fa;
    while (b - a > 1e-12) {
        double mid = 0.5 * (a + b);
        if (bessel_j(n, mid) > 0.0)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

WhisperingMode whispering_mode(int n)
{
    WhisperingMode w;
    w.n = n;
    w.z1 = bessel_first_zero(n);
    w.lambda = w.z1 * w.z1;
    const double z = w.z1;
    w.norm2 = integrate_gl(
        [n, z](double r) {
            double v = bessel_j(n, z * r);
            return v * v * r;
        },
        0.0, 1.0, 32, 16);
    return w;
}

std::vector<WhisperingMode> whispering_modes(int n_lo, int n_hi)
{
    if (n_hi < n_lo)
        throw std::invalid_argument("whispering_modes: empty range");
    std::vector<WhisperingMode> out(n_hi - n_lo + 1);
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i <= n_hi - n_lo; ++i)
        out[i] = whispering_mode(n_lo + i);
    return out;
}

std::vector<WhisperingMode> whispering_modes_serial(int n_lo, int n_hi)
{
    if (n_hi < n_lo)
        throw std::invalid_argument("whispering_modes: empty range");
    std::vector<WhisperingMode> out;
    for (int n = n_lo; n <= n_hi; ++n)
        out.push_back(whispering_mode(n));
    return out;
}

BoundPair decay_bound_pair(int n, double alpha)
{
    if (n < 1 || alpha < 0.0)
        throw std::domain_error("decay_bound_pair: need n >= 1, alpha >= 0");
    BoundPair b;
    b.value = std::abs(bessel_j(n, n / std::cosh(alpha)));
    b.bound = std::exp(n * (std::tanh(alpha) - alpha));
    return b;
}

DiskDecayReport disk_decay_check(const std::vector<int>& n_range, double r,
                                 const DiskDecayOptions& opt)
{
    if (n_range.empty())
        throw std::invalid_argument("disk_decay_check: empty n range");
    if (!(r > 0.0 && r < 1.0))
        throw std::domain_error("disk_decay_check: r outside (0, 1)");
    int nmax = *std::max_element(n_range.begin(), n_range.end());
    if (nmax < 30)
        throw std::invalid_argument("disk_decay_check: need n_max >= 30");
    DiskDecayReport rep;
    rep.beta_max = std::numeric_limits<double>::infinity();
    for (int n : n_range) {
        if (n < 1)
            throw std::invalid_argument("disk_decay_check: n must be positive");
        rep.beta_max = std::min(rep.beta_max, (1.0 - r) * std::cbrt(double(n)));
    }
    if (opt.beta > rep.beta_max)
        throw std::invalid_argument("disk_decay_check: r too close to 1 for the n range");

    const int count = static_cast<int>(n_range.size());
    std::vector<double> x(count), y(count), ns(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < count; ++i) {
        WhisperingMode w = whispering_mode(n_range[i]);
        double sup = 0.0;
        const int samples = 400;
        for (int j = 1; j <= samples; ++j)
            sup = std::max(sup, std::abs(bessel_j(w.n, w.z1 * r * j / samples)));
        double norm = std::sqrt(2.0 * std::numbers::pi * w.norm2);
        x[i] = w.z1;
        y[i] = -std::log(sup / norm);
        ns[i] = w.n;
    }
    std::vector<int> win = top_half(ns, 5);
    std::vector<double> xs = pick(x, win), ys = pick(y, win);
    rep.points = static_cast<int>(xs.size());
    double dA = agmon_closed_disk(r);
    if (opt.lambda_sixth_term) {
        std::vector<double> x3, one(xs.size(), 1.0);
        for (double v : xs)
            x3.push_back(std::cbrt(v));
        LsqFit f = fit_lsq({xs, x3, one}, ys);
        rep.row.slope = f.coef[0];
        rep.row.stderr_ = f.stderr_[0];
        rep.sixth_coef = f.coef[1];
    } else {
        LineFit f = fit_line(xs, ys);
        rep.row.slope = f.slope;
        rep.row.stderr_ = f.slope_stderr;
    }
    rep.row.r = r;
    rep.row.dA_Rmax = dA;
    rep.row.slope_over_log = rep.row.slope / std::abs(std::log(r));
    rep.row.pass = rep.row.slope >= (1.0 - opt.rel_tol) * dA - 1e-12;
    return rep;
}

} // namespace lab
