#include "lab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace lab {

namespace {

GaussRule build_gl(int n)
{
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = w;
        r.w[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        r.x[n / 2] = 0.0;
    return r;
}

// Kronrod 15 / Gauss 7 constants (QUADPACK qk15).
constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const Fn& f, double a, double b)
{
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double rk = fc * wgk[7];
    double rg = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        double dx = h * xgk[j];
        double s = f(c - dx) + f(c + dx);
        rk += wgk[j] * s;
        if (j % 2 == 1)
            rg += wg[j / 2] * s;
    }
    return {a, b, rk * h, std::abs((rk - rg) * h)};
}

} // namespace

const GaussRule& gauss_legendre(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: order must be positive");
    static std::mutex mtx;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, build_gl(n)).first;
    return it->second;
}

void composite_nodes(double a, double b, int panels, int order,
                     std::vector<double>& xs, std::vector<double>& ws)
{
    const GaussRule& g = gauss_legendre(order);
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        for (int i = 0; i < order; ++i) {
            xs.push_back(lo + 0.5 * h * (g.x[i] + 1.0));
            ws.push_back(0.5 * h * g.w[i]);
        }
    }
}

double integrate_gl(const Fn& f, double a, double b, int panels, int order)
{
    const GaussRule& g = gauss_legendre(order);
    double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        double s = 0.0;
        for (int i = 0; i < order; ++i)
            s += g.w[i] * f(lo + 0.5 * h * (g.x[i] + 1.0));
        sum += 0.5 * h * s;
    }
    return sum;
}

QuadResult integrate_adaptive(const Fn& f, double a, double b,
                              double abs_tol, double rel_tol, int max_intervals)
{
    QuadResult res;
    if (a == b)
        return res;
    std::priority_queue<Segment> heap;
    Segment s0 = gk15(f, a, b);
    heap.push(s0);
    double value = s0.value, error = s0.error;
    int n = 1;
    while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
        if (n >= max_intervals) {
            res.converged = false;
            break;
        }
        Segment s = heap.top();
        heap.pop();
        double m = 0.5 * (s.a + s.b);
        if (m <= s.a || m >= s.b) {
            heap.push(s);
            res.converged = false;
            break;
        }
        Segment l = gk15(f, s.a, m), r = gk15(f, m, s.b);
        value += l.value + r.value - s.value;
        error += l.error + r.error - s.error;
        heap.push(l);
        heap.push(r);
        ++n;
    }
    // resum to shed accumulated update error
    value = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    res.value = value;
    res.error = error;
    res.evals = 15 * (2 * n - 1);
    return res;
}

} // namespace lab
