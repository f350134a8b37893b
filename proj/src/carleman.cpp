#include "lab/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lab {

using Eigen::Matrix2d;
using Eigen::Vector2d;

Grid::Grid(int dim_, int n_, double lo_, double hi_) : dim(dim_), n(n_), lo(lo_), hi(hi_)
{
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("Grid: dim must be 1 or 2");
    if (n < 9 || !(hi > lo))
        throw std::invalid_argument("Grid: need n >= 9 and hi > lo");
}

Vector2d Grid::point(int idx) const
{
    int i = idx % n, j = idx / n;
    return {lo + i * h(), dim == 2 ? lo + j * h() : 0.0};
}

int Grid::depth(int idx) const
{
    int i = idx % n, j = idx / n;
    int d = std::min(i, n - 1 - i);
    if (dim == 2)
        d = std::min({d, j, n - 1 - j});
    return d;
}

Field sample(const Grid& g, const PointFn& fn)
{
    Field out(g.size());
    for (int i = 0; i < g.size(); ++i)
        out[i] = fn(g.point(i));
    return out;
}

namespace {

// Neighbor offset along axis k.
int stride(const Grid& g, int k) { return k == 0 ? 1 : g.n; }

int axis_pos(const Grid& g, int idx, int k) { return k == 0 ? idx % g.n : idx / g.n; }

// First derivative along k: centered inside, second-order one-sided on the boundary.
double d1(const Field& u, const Grid& g, int idx, int k)
{
    const int s = stride(g, k), p = axis_pos(g, idx, k);
    const double h = g.h();
    if (p == 0)
        return (-3.0 * u[idx] + 4.0 * u[idx + s] - u[idx + 2 * s]) / (2.0 * h);
    if (p == g.n - 1)
        return (3.0 * u[idx] - 4.0 * u[idx - s] + u[idx - 2 * s]) / (2.0 * h);
    return (u[idx + s] - u[idx - s]) / (2.0 * h);
}

// Second derivatives; interior nodes only (depth >= 1).
double d2(const Field& u, const Grid& g, int idx, int k, int l)
{
    const double h = g.h();
    if (k == l) {
        const int s = stride(g, k);
        return (u[idx + s] - 2.0 * u[idx] + u[idx - s]) / (h * h);
    }
    const int a = stride(g, 0), b = stride(g, 1);
    return (u[idx + a + b] - u[idx + a - b] - u[idx - a + b] + u[idx - a - b]) / (4.0 * h * h);
}

Vector2d grad(const Field& u, const Grid& g, int idx)
{
    Vector2d d = Vector2d::Zero();
    for (int k = 0; k < g.dim; ++k)
        d(k) = d1(u, g, idx, k);
    return d;
}

// Restrict to the active dimension so 1D metrics behave as scalars.
Matrix2d active(const Matrix2d& m, int dim)
{
    if (dim == 2)
        return m;
    Matrix2d r = Matrix2d::Identity();
    r(0, 0) = m(0, 0);
    return r;
}

Matrix2d metric_at(const MetricField& mf, int idx) { return active(mf.g[idx], mf.grid.dim); }

Matrix2d metric_d1(const MetricField& mf, int idx, int k)
{
    const Grid& g = mf.grid;
    const int s = stride(g, k), p = axis_pos(g, idx, k);
    const double h = g.h();
    Matrix2d out;
    if (p == 0)
        out = (-3.0 * mf.g[idx] + 4.0 * mf.g[idx + s] - mf.g[idx + 2 * s]) / (2.0 * h);
    else if (p == g.n - 1)
        out = (3.0 * mf.g[idx] - 4.0 * mf.g[idx - s] + mf.g[idx - 2 * s]) / (2.0 * h);
    else
        out = (mf.g[idx + s] - mf.g[idx - s]) / (2.0 * h);
    if (g.dim == 1) {
        double v = out(0, 0);
        out.setZero();
        out(0, 0) = v;
    }
    return out;
}

// Covariant Hessian of u at an interior node: d_ij u - Gamma^k_ij d_k u.
Matrix2d hessian(const Field& u, const MetricField& mf, int idx, const Matrix2d& ginv,
                 const Vector2d& du)
{
    const int dim = mf.grid.dim;
    Matrix2d dg[2];
    for (int k = 0; k < 2; ++k)
        dg[k] = k < dim ? metric_d1(mf, idx, k) : Matrix2d::Zero();
    Matrix2d H = Matrix2d::Zero();
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double gamma_term = 0.0;
            for (int k = 0; k < dim; ++k) {
                double gk = 0.0;
                for (int l = 0; l < dim; ++l)
                    gk += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
                gamma_term += gk * du(k);
            }
            H(i, j) = d2(u, mf.grid, idx, i, j) - gamma_term;
        }
    return H;
}

// Eigenvalues of the pencil (Q, g), ascending.
Vector2d pencil_eigs(const Matrix2d& Q, const Matrix2d& g, int dim)
{
    if (dim == 1) {
        double v = Q(0, 0) / g(0, 0);
        return {v, v};
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix2d> es(Q, g);
    return es.eigenvalues();
}

struct PsiLocal {
    Matrix2d g, ginv, H;
    Vector2d dPsi, gradPsi;
    double grad2 = 0.0, lap = 0.0;
};

PsiLocal psi_local(const Field& Psi, const MetricField& mf, int idx)
{
    PsiLocal p;
    p.g = metric_at(mf, idx);
    p.ginv = p.g.inverse();
    p.dPsi = grad(Psi, mf.grid, idx);
    p.gradPsi = p.ginv * p.dPsi;
    p.grad2 = p.dPsi.dot(p.gradPsi);
    p.H = hessian(Psi, mf, idx, p.ginv, p.dPsi);
    p.H = 0.5 * (p.H + p.H.transpose());
    if (mf.grid.dim == 1) {
        p.H(0, 1) = p.H(1, 0) = p.H(1, 1) = 0.0;
    }
    p.lap = (p.ginv * p.H).trace();
    return p;
}

Subellipticity subellipticity_impl(const WeightPair& w, const MetricField& mf, int directions,
                                   std::uint64_t seed, bool parallel)
{
    const Grid& G = mf.grid;
    const int N = G.size();
    const double lam = w.lambda;
    const int band = 2;
    std::vector<double> mB(N, INFINITY), mBs(N, INFINITY), mE(N, INFINITY), bB(N, INFINITY),
        bE(N, INFINITY);
    std::vector<char> dom(N, 1);

    auto node = [&](int idx) {
        if (G.depth(idx) < band)
            return;
        PsiLocal p = psi_local(w.Psi, mf, idx);
        const double pre = lam * std::exp(lam * w.Psi[idx]);
        Matrix2d Q = 2.0 * p.H + 2.0 * lam * p.dPsi * p.dPsi.transpose() +
                     (lam * p.grad2 - p.lap) * p.g;
        if (G.dim == 1)
            Q = active(Q, 1);
        mB[idx] = pre * pencil_eigs(Q, p.g, G.dim)(0);
        mE[idx] = pre * (2.0 * p.gradPsi.dot(p.H * p.gradPsi) / p.grad2 +
                         lam * p.grad2 + p.lap);
        Vector2d he = pencil_eigs(p.H, p.g, G.dim);
        double hnorm = std::max(std::abs(he(0)), std::abs(he(1)));
        bB[idx] = pre * (lam * p.grad2 - 2.0 * hnorm - p.lap);
        bE[idx] = pre * (lam * p.grad2 - 2.0 * hnorm + p.lap);
        const double tol = 1e-10 * pre * (lam * p.grad2 + 2.0 * hnorm + std::abs(p.lap));
        if (mE[idx] < bE[idx] - tol)
            dom[idx] = 0;
        std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(idx) + 1)));
        std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
        for (int d = 0; d < directions; ++d) {
            Vector2d X(1.0, 0.0);
            if (G.dim == 2) {
                double a = ang(rng);
                X = Vector2d(std::cos(a), std::sin(a));
            }
            double x2 = X.dot(p.g * X);
            double val = pre * X.dot(Q * X) / x2;
            mBs[idx] = std::min(mBs[idx], val);
            if (val < bB[idx] - tol)
                dom[idx] = 0;
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int idx = 0; idx < N; ++idx)
            node(idx);
    } else {
        for (int idx = 0; idx < N; ++idx)
            node(idx);
    }
    Subellipticity s;
    s.band = band;
    s.minB = *std::min_element(mB.begin(), mB.end());
    s.minB_sampled = directions > 0 ? *std::min_element(mBs.begin(), mBs.end()) : s.minB;
    s.minE = *std::min_element(mE.begin(), mE.end());
    s.boundB = *std::min_element(bB.begin(), bB.end());
    s.boundE = *std::min_element(bE.begin(), bE.end());
    s.dominates = std::all_of(dom.begin(), dom.end(), [](char c) { return c != 0; });
    return s;
}

double sup_on_working(const Grid& G, const std::vector<double>& v, int band)
{
    double m = 0.0;
    for (int i = 0; i < G.size(); ++i)
        if (G.depth(i) >= band)
            m = std::max(m, std::abs(v[i]));
    return m;
}

} // namespace

MetricField MetricField::flat(const Grid& grid)
{
    MetricField m;
    m.grid = grid;
    m.g.assign(grid.size(), Matrix2d::Identity());
    m.eps = 1.0;
    m.D = 1.0;
    return m;
}

MetricField MetricField::from_function(const Grid& grid,
                                       const std::function<Matrix2d(const Vector2d&)>& fn,
                                       double eps, double D)
{
    MetricField m;
    m.grid = grid;
    m.eps = eps;
    m.D = D;
    m.g.resize(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        Matrix2d v = active(fn(grid.point(i)), grid.dim);
        m.g[i] = 0.5 * (v + v.transpose());
    }
    return m;
}

MetricField MetricField::perturbed(const Grid& grid, double amplitude, std::mt19937_64& rng,
                                   double eps, double D)
{
    struct Mode {
        Matrix2d A;
        Vector2d k;
        double phase;
    };
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> freq(1, 2);
    std::vector<Mode> modes(3);
    for (auto& m : modes) {
        double a = u(rng), b = u(rng), c = u(rng);
        m.A << a, b, b, c;
        m.k = Vector2d(freq(rng), grid.dim == 2 ? freq(rng) : 0);
        m.phase = std::numbers::pi * u(rng);
    }
    auto fn = [modes, amplitude](const Vector2d& x) {
        Matrix2d g = Matrix2d::Identity();
        for (const auto& m : modes)
            g += amplitude / 3.0 * m.A * std::sin(2.0 * std::numbers::pi * m.k.dot(x) + m.phase);
        return g;
    };
    MetricField m = from_function(grid, fn, eps, D);
    if (!m.in_class())
        throw std::invalid_argument("MetricField::perturbed: sample leaves the class; lower the amplitude");
    return m;
}

double MetricField::min_eigenvalue() const
{
    double m = INFINITY;
    for (const auto& x : g) {
        if (grid.dim == 1)
            m = std::min(m, x(0, 0));
        else
            m = std::min(m, Eigen::SelfAdjointEigenSolver<Matrix2d>(x, Eigen::EigenvaluesOnly).eigenvalues()(0));
    }
    return m;
}

double MetricField::max_eigenvalue() const
{
    double m = -INFINITY;
    for (const auto& x : g) {
        if (grid.dim == 1)
            m = std::max(m, x(0, 0));
        else
            m = std::max(m, Eigen::SelfAdjointEigenSolver<Matrix2d>(x, Eigen::EigenvaluesOnly).eigenvalues()(1));
    }
    return m;
}

double MetricField::lipschitz() const
{
    double L = 0.0;
    const double h = grid.h();
    for (int idx = 0; idx < grid.size(); ++idx)
        for (int k = 0; k < grid.dim; ++k) {
            if (axis_pos(grid, idx, k) == grid.n - 1)
                continue;
            Matrix2d d = active(g[idx + stride(grid, k)], grid.dim) - active(g[idx], grid.dim);
            if (grid.dim == 1)
                d(1, 1) = 0.0;
            double op = Eigen::SelfAdjointEigenSolver<Matrix2d>(d, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .cwiseAbs()
                            .maxCoeff();
            L = std::max(L, op / h);
        }
    return L;
}

bool MetricField::in_class() const
{
    return min_eigenvalue() >= eps && max_eigenvalue() <= D && lipschitz() <= D;
}

WeightPair convexify(const Field& Psi, const MetricField& metric, double lambda)
{
    const Grid& G = metric.grid;
    if (static_cast<int>(Psi.size()) != G.size())
        throw std::invalid_argument("convexify: Psi does not match the grid");
    if (!(lambda > 0.0))
        throw std::invalid_argument("convexify: lambda must be positive");
    WeightPair w;
    w.Psi = Psi;
    w.lambda = lambda;
    w.phi.resize(G.size());
    w.f.resize(G.size());
    double gmax = 0.0;
    std::vector<double> g2(G.size());
    for (int i = 0; i < G.size(); ++i) {
        Vector2d d = grad(Psi, G, i);
        g2[i] = d.dot(metric_at(metric, i).inverse() * d);
        gmax = std::max(gmax, g2[i]);
    }
    for (int i = 0; i < G.size(); ++i) {
        if (!(g2[i] > 1e-12 * gmax))
            throw std::domain_error("convexify: grad Psi vanishes at a node");
        double e = std::exp(lambda * Psi[i]);
        w.phi[i] = e;
        w.f[i] = 2.0 * lambda * lambda * e * g2[i];
    }
    return w;
}

Subellipticity subellipticity_minima(const WeightPair& w, const MetricField& metric,
                                     int directions, std::uint64_t seed)
{
    return subellipticity_impl(w, metric, directions, seed, true);
}

Subellipticity subellipticity_minima_serial(const WeightPair& w, const MetricField& metric,
                                            int directions, std::uint64_t seed)
{
    return subellipticity_impl(w, metric, directions, seed, false);
}

double critical_lambda(const Field& Psi, const MetricField& metric, double lambda_lo,
                       double lambda_hi, double rel_tol)
{
    auto m = [&](double lam) {
        Subellipticity s = subellipticity_minima(convexify(Psi, metric, lam), metric, 0);
        return std::min(s.minB, s.minE);
    };
    const int steps = 40;
    double prev = lambda_hi;
    if (!(m(lambda_hi) > 0.0))
        throw std::runtime_error("critical_lambda: not positive at lambda_hi");
    // walk down to the last sign change
    double lo = lambda_lo;
    bool found = false;
    for (int i = steps - 1; i >= 0; --i) {
        double lam = lambda_lo + (lambda_hi - lambda_lo) * i / steps;
        if (!(m(lam) > 0.0)) {
            lo = lam;
            found = true;
            break;
        }
        prev = lam;
    }
    if (!found)
        return lambda_lo;
    double hi = prev;
    while (hi - lo > rel_tol * hi) {
        double mid = 0.5 * (lo + hi);
        (m(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

CarlemanSetup carleman_setup(const WeightPair& w, const MetricField& metric,
                             const Subellipticity& s)
{
    const Grid& G = metric.grid;
    CarlemanSetup c;
    c.C0 = 0.25 * std::min(s.minB, s.minE);
    if (!(c.C0 > 0.0))
        throw std::domain_error("carleman_setup: subellipticity fails, raise lambda");
    const double lam = w.lambda;
    std::vector<double> fl(G.size(), 0.0), gf(G.size(), 0.0);
    double min_grad_phi2 = INFINITY;
    for (int i = 0; i < G.size(); ++i) {
        if (G.depth(i) < s.band)
            continue;
        PsiLocal p = psi_local(w.Psi, metric, i);
        double e = std::exp(lam * w.Psi[i]);
        double lap_phi = lam * e * (p.lap + lam * p.grad2);
        fl[i] = w.f[i] - lap_phi;
        Vector2d df = grad(w.f, G, i);
        gf[i] = std::sqrt(df.dot(p.ginv * df));
        min_grad_phi2 = std::min(min_grad_phi2, lam * lam * e * e * p.grad2);
    }
    c.f_minus_lap_phi = sup_on_working(G, fl, s.band);
    c.grad_f = sup_on_working(G, gf, s.band);
    c.c_phi = std::min(1.0, 1.0 / min_grad_phi2);
    c.tau0 = c.c_phi / c.C0 * (c.f_minus_lap_phi * c.f_minus_lap_phi + 0.5 * c.grad_f);
    return c;
}

std::string to_string(MarginStatus s)
{
    switch (s) {
    case MarginStatus::pass: return "pass";
    case MarginStatus::inconclusive: return "inconclusive";
    case MarginStatus::fail: return "fail";
    }
    return "?";
}

Field laplace_beltrami(const Field& u, const MetricField& mf)
{
    const Grid& G = mf.grid;
    const int N = G.size();
    Field out(N, 0.0);
    std::vector<Vector2d> flux(N, Vector2d::Zero());
    std::vector<double> vol(N);
    for (int i = 0; i < N; ++i) {
        Matrix2d g = metric_at(mf, i);
        vol[i] = std::sqrt(g.determinant());
        if (G.depth(i) >= 1)
            flux[i] = vol[i] * (g.inverse() * grad(u, G, i));
    }
    for (int i = 0; i < N; ++i) {
        if (G.depth(i) < 2)
            continue;
        double div = 0.0;
        for (int k = 0; k < G.dim; ++k) {
            const int s = stride(G, k);
            div += (flux[i + s](k) - flux[i - s](k)) / (2.0 * G.h());
        }
        out[i] = div / vol[i];
    }
    return out;
}

CarlemanRow carleman_inequality_check(const WeightPair& w, const MetricField& metric,
                                      const CarlemanSetup& setup, const Subellipticity& s,
                                      const Field& v, double tau)
{
    const Grid& G = metric.grid;
    if (static_cast<int>(v.size()) != G.size())
        throw std::invalid_argument("carleman_inequality_check: v does not match the grid");
    if (tau < setup.tau0)
        throw std::domain_error("carleman_inequality_check: tau below tau0");
    CarlemanRow row;
    row.lambda = w.lambda;
    row.tau = tau;
    row.minB = s.minB;
    row.minE = s.minE;

    const double dV = std::pow(G.h(), G.dim);
    Field lap = laplace_beltrami(v, metric);
    // common factor e^{-2 tau phimax} over the support keeps the sums finite
    double phimax = -INFINITY;
    for (int i = 0; i < G.size(); ++i)
        if (v[i] != 0.0 || lap[i] != 0.0 || grad(v, G, i).squaredNorm() != 0.0)
            phimax = std::max(phimax, w.phi[i]);
    if (std::isinf(phimax))
        phimax = 0.0;  // v = 0
    double a = 0.0, b = 0.0, r = 0.0;
    for (int i = 0; i < G.size(); ++i) {
        if (G.depth(i) < 2)
            continue;
        Vector2d dv = grad(v, G, i);
        if (v[i] == 0.0 && lap[i] == 0.0 && dv.squaredNorm() == 0.0)
            continue;
        Matrix2d g = metric_at(metric, i), ginv = g.inverse();
        double wt = std::exp(2.0 * tau * (w.phi[i] - phimax)) * std::sqrt(g.determinant()) * dV;
        Vector2d dphi = grad(w.phi, G, i);
        a += wt * v[i] * v[i] * dphi.dot(ginv * dphi);
        b += wt * dv.dot(ginv * dv);
        r += wt * lap[i] * lap[i];
    }
    // tau int_boundary e^{2 tau phi} d_nu phi |d_nu v|^2, one-sided normal derivatives
    double bt = 0.0;
    for (int i = 0; i < G.size(); ++i) {
        if (G.depth(i) != 0)
            continue;
        Matrix2d g = metric_at(metric, i), ginv = g.inverse();
        Vector2d dphi = grad(w.phi, G, i), dv = grad(v, G, i);
        for (int k = 0; k < G.dim; ++k) {
            int p = axis_pos(G, i, k);
            if (p != 0 && p != G.n - 1)
                continue;
            Vector2d nrm = Vector2d::Zero();
            nrm(k) = p == 0 ? -1.0 : 1.0;
            double nlen = std::sqrt(nrm.dot(ginv * nrm));
            double dn_phi = dphi.dot(ginv * nrm) / nlen;
            double dn_v = dv.dot(ginv * nrm) / nlen;
            if (dn_v == 0.0)
                continue;
            double ds = 1.0;
            if (G.dim == 2) {
                int t = 1 - k;
                int q = axis_pos(G, i, t);
                ds = std::sqrt(g(t, t)) * G.h() * ((q == 0 || q == G.n - 1) ? 0.5 : 1.0);
            }
            bt += std::exp(2.0 * tau * (w.phi[i] - phimax)) * dn_phi * dn_v * dn_v * ds;
        }
    }
    row.lhs = setup.C0 / 3.0 * (tau * tau * tau * a + tau * b);
    row.rhs = r + tau * bt;
    row.margin = row.rhs - row.lhs;
    if (row.margin >= 0.0)
        row.status = MarginStatus::pass;
    else if (row.margin >= -1e-3 * std::abs(row.rhs))
        row.status = MarginStatus::inconclusive;
    else
        row.status = MarginStatus::fail;
    return row;
}

double conjugation_identity_check(const Field& phi, const MetricField& metric, const Field& u,
                                  double tau)
{
    const Grid& G = metric.grid;
    const int N = G.size();
    Field conj(N);
    for (int i = 0; i < N; ++i)
        conj[i] = std::exp(-tau * phi[i]) * u[i];
    Field lap_w = laplace_beltrami(conj, metric);
    Field lap_u = laplace_beltrami(u, metric);
    Field lap_phi = laplace_beltrami(phi, metric);
    const double dV = std::pow(G.h(), G.dim);
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
        if (G.depth(i) < 2)
            continue;
        Matrix2d g = metric_at(metric, i), ginv = g.inverse();
        Vector2d dphi = grad(phi, G, i), du = grad(u, G, i);
        double lhs = std::exp(tau * phi[i]) * lap_w[i];
        double rhs = lap_u[i] - 2.0 * tau * dphi.dot(ginv * du) - tau * lap_phi[i] * u[i] +
                     tau * tau * dphi.dot(ginv * dphi) * u[i];
        sum += (lhs - rhs) * (lhs - rhs) * std::sqrt(g.determinant()) * dV;
    }
    return std::sqrt(sum);
}

double bump(const Vector2d& x, const Vector2d& c, double w)
{
    double s2 = (x - c).squaredNorm() / (w * w);
    return s2 < 1.0 ? std::exp(-1.0 / (1.0 - s2)) : 0.0;
}

Field random_bump(const Grid& grid, std::mt19937_64& rng, int margin)
{
    const double inner = margin * grid.h();
    const double span = grid.hi - grid.lo - 2.0 * inner;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double w = span * (0.1 + 0.3 * u(rng));
    Vector2d c(grid.lo + inner + w + (span - 2.0 * w) * u(rng), 0.0);
    if (grid.dim == 2)
        c(1) = grid.lo + inner + w + (span - 2.0 * w) * u(rng);
    return sample(grid, [c, w](const Vector2d& x) { return bump(x, c, w); });
}

UniformityReport uniformity_check(const Grid& grid, const PointFn& Psi_fn, double lambda,
                                  int n_metrics, double amplitude, int bumps_per_metric,
                                  std::mt19937_64& rng)
{
    UniformityReport rep;
    rep.lambda = lambda;
    rep.metrics = n_metrics;
    Field Psi = sample(grid, Psi_fn);
    MetricField flat = MetricField::flat(grid);
    WeightPair w0 = convexify(Psi, flat, lambda);
    Subellipticity s0 = subellipticity_minima(w0, flat, 0);
    CarlemanSetup c0 = carleman_setup(w0, flat, s0);
    rep.minB_flat = s0.minB;
    // 2x margin on both: C0 halved, and tau0 twice the threshold for the halved C0
    rep.C0 = 0.5 * c0.C0;
    rep.tau0 = 2.0 * (c0.c_phi / rep.C0) *
               (c0.f_minus_lap_phi * c0.f_minus_lap_phi + 0.5 * c0.grad_f);
    rep.minB_worst = rep.minE_worst = INFINITY;
    bool assumptions = true;
    for (int m = 0; m < n_metrics; ++m) {
        MetricField g = MetricField::perturbed(grid, amplitude, rng);
        WeightPair w = convexify(Psi, g, lambda);
        Subellipticity s = subellipticity_minima(w, g, 0);
        rep.minB_worst = std::min(rep.minB_worst, s.minB);
        rep.minE_worst = std::min(rep.minE_worst, s.minE);
        // the shared constants must satisfy the hypotheses on this metric too
        CarlemanSetup own = carleman_setup(w, g, s);
        CarlemanSetup shared = own;
        shared.C0 = rep.C0;
        shared.tau0 = own.c_phi / rep.C0 *
                      (own.f_minus_lap_phi * own.f_minus_lap_phi + 0.5 * own.grad_f);
        if (std::min(s.minB, s.minE) < 2.0 * rep.C0 || shared.tau0 > rep.tau0)
            assumptions = false;
        shared.tau0 = std::min(shared.tau0, rep.tau0);
        for (int b = 0; b < bumps_per_metric; ++b) {
            Field v = random_bump(grid, rng);
            for (double k : {1.0, 2.0, 4.0}) {
                CarlemanRow row = carleman_inequality_check(w, g, shared, s, v, k * rep.tau0);
                ++rep.checks;
                if (row.status == MarginStatus::inconclusive)
                    ++rep.inconclusive;
                else if (row.status == MarginStatus::fail)
                    ++rep.failures;
            }
        }
    }
    rep.pass = assumptions && rep.failures == 0 && rep.minB_worst >= 0.5 * rep.minB_flat;
    return rep;
}

} // namespace lab
