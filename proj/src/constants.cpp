#include "lab/constants.hpp"

#include "lab/fit.hpp"
#include "lab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lab {

Region Region::interval(double lo, double hi)
{
    Region r;
    if (hi > lo)
        r.parts.emplace_back(lo, hi);
    return r;
}

Region Region::ball(double x0, double r, double a, double b)
{
    return interval(std::max(a, x0 - r), std::min(b, x0 + r));
}

double Region::measure() const
{
    double m = 0.0;
    for (const auto& [lo, hi] : parts)
        m += hi - lo;
    return m;
}

double SpectralBasis::lambda_max() const
{
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& b : blocks)
        if (!b.lambda.empty())
            m = std::max(m, b.lambda.back());
    return m;
}

int SpectralBasis::dimension() const
{
    int d = 0;
    for (const auto& b : blocks)
        d += static_cast<int>(b.lambda.size());
    return d;
}

SpectralBasis interval_sine_basis(int n_modes, double L)
{
    if (n_modes < 1 || !(L > 0.0))
        throw std::invalid_argument("interval_sine_basis: need n_modes >= 1 and L > 0");
    SpectralBasis basis;
    basis.name = "interval-sine";
    basis.a = 0.0;
    basis.b = L;
    SpectralBlock blk;
    for (int j = 1; j <= n_modes; ++j)
        blk.lambda.push_back(std::pow(j * std::numbers::pi / L, 2));
    blk.samples = [n_modes, L](const Region& omega) {
        std::vector<double> xs, ws;
        for (auto [lo, hi] : omega.parts) {
            lo = std::max(lo, 0.0);
            hi = std::min(hi, L);
            if (hi <= lo)
                continue;
            int panels = static_cast<int>(std::ceil((hi - lo) / L * n_modes)) + 2;
            composite_nodes(lo, hi, panels, 20, xs, ws);
        }
        MatrixL F(static_cast<int>(xs.size()), n_modes);
        const long double pi = std::numbers::pi_v<long double>;
        const long double amp = std::sqrt(2.0L / L);
        for (int q = 0; q < static_cast<int>(xs.size()); ++q) {
            long double sw = std::sqrt(static_cast<long double>(ws[q]));
            for (int j = 1; j <= n_modes; ++j)
                F(q, j - 1) = sw * amp * std::sin(j * pi * static_cast<long double>(xs[q]) / L);
        }
        return F;
    };
    basis.blocks.push_back(std::move(blk));
    return basis;
}

namespace {

// Trapezoid on the mode nodes inside omega plus interpolated end nodes.
SpectralBlock sampled_block(std::vector<Mode> modes)
{
    SpectralBlock blk;
    blk.label = modes.front().k;
    for (const Mode& m : modes)
        blk.lambda.push_back(m.lambda);
    auto shared = std::make_shared<const std::vector<Mode>>(std::move(modes));
    blk.samples = [shared](const Region& omega) {
        const std::vector<Mode>& ms = *shared;
        const Mode& g = ms.front();
        const int N = static_cast<int>(g.s.size());
        const int m = static_cast<int>(ms.size());
        std::vector<long double> xs, wts;
        std::vector<std::vector<long double>> rows;
        auto value_at = [&](int j, double x) -> long double {
            int i = std::clamp(static_cast<int>((x - g.s.front()) / g.h), 0, N - 2);
            long double t = (x - g.s[i]) / g.h;
            return (1 - t) * ms[j].f[i] + t * ms[j].f[i + 1];
        };
        auto R_at = [&](double x) -> long double {
            int i = std::clamp(static_cast<int>((x - g.s.front()) / g.h), 0, N - 2);
            long double t = (x - g.s[i]) / g.h;
            return (1 - t) * g.R[i] + t * g.R[i + 1];
        };
        std::vector<std::vector<long double>> cols(m);
        std::vector<long double> w;
        for (auto [lo, hi] : omega.parts) {
            lo = std::max(lo, g.s.front());
            hi = std::min(hi, g.s.back());
            if (hi <= lo)
                continue;
            std::vector<double> nodes{lo};
            for (int i = 0; i < N; ++i)
                if (g.s[i] > lo && g.s[i] < hi)
                    nodes.push_back(g.s[i]);
            nodes.push_back(hi);
            const int q = static_cast<int>(nodes.size());
            for (int i = 0; i < q; ++i) {
                long double left = i > 0 ? nodes[i] - nodes[i - 1] : 0.0L;
                long double right = i < q - 1 ? nodes[i + 1] - nodes[i] : 0.0L;
                long double wt = 0.5L * (left + right) * R_at(nodes[i]) * 2.0L *
                                 std::numbers::pi_v<long double>;
                w.push_back(wt);
                for (int j = 0; j < m; ++j)
                    cols[j].push_back(value_at(j, nodes[i]));
            }
        }
        MatrixL F(static_cast<int>(w.size()), m);
        for (int r = 0; r < static_cast<int>(w.size()); ++r) {
            long double sw = std::sqrt(w[r]);
            for (int j = 0; j < m; ++j)
                F(r, j) = sw * cols[j][r];
        }
        return F;
    };
    return blk;
}

} // namespace

SpectralBasis revolution_basis(const RevolutionProfile& p, int k_max, double lambda_max,
                               int grid_size)
{
    SpectralBasis basis;
    basis.name = p.name();
    basis.a = 0.0;
    basis.b = p.L();
    std::vector<ModeFamily> fams(k_max + 1);
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k <= k_max; ++k)
        fams[k] = solve_reduced_below(p, k, lambda_max, grid_size);
    for (auto& fam : fams)
        if (!fam.modes.empty())
            basis.blocks.push_back(sampled_block(std::move(fam.modes)));
    return basis;
}

SpectralBasis ground_state_basis(const ModeFamily& fam, double L)
{
    SpectralBasis basis;
    basis.name = fam.profile + "-ground";
    basis.a = 0.0;
    basis.b = L;
    for (const Mode& m : fam.modes)
        if (m.n == 0)
            basis.blocks.push_back(sampled_block({m}));
    std::sort(basis.blocks.begin(), basis.blocks.end(),
              [](const SpectralBlock& x, const SpectralBlock& y) { return x.label < y.label; });
    return basis;
}

std::vector<MatrixL> gram(const SpectralBasis& basis, const Region& omega)
{
    const int nb = static_cast<int>(basis.blocks.size());
    std::vector<MatrixL> out(nb);
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < nb; ++i) {
        MatrixL F = basis.blocks[i].samples(omega);
        out[i] = F.transpose() * F;
    }
    return out;
}

std::vector<MatrixL> gram_serial(const SpectralBasis& basis, const Region& omega)
{
    std::vector<MatrixL> out;
    for (const auto& blk : basis.blocks) {
        MatrixL F = blk.samples(omega);
        out.push_back(F.transpose() * F);
    }
    return out;
}

namespace {

int count_upto(const std::vector<double>& lam, double lambda)
{
    return static_cast<int>(std::upper_bound(lam.begin(), lam.end(), lambda) - lam.begin());
}

constexpr long double eps_l = std::numeric_limits<long double>::epsilon();

struct Sigma {
    long double value = 0.0L;
    long double error = 0.0L;  // rounding bound
};

// sigma_min of G with a column-scaled error bound: eps * cond(G with unit columns).
Sigma smallest_singular(MatrixL G)
{
    const int m = static_cast<int>(G.cols());
    if (G.rows() > 2 * m) {
        Eigen::HouseholderQR<MatrixL> qr(G);
        G = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    }
    Sigma out;
    out.value = jacobi_singular_values<long double>(G).front();
    VectorL norms = G.colwise().norm();
    if (!(norms.minCoeff() > 0.0L))
        return {0.0L, 0.0L};
    MatrixL U = G * norms.cwiseInverse().asDiagonal();
    long double smin = jacobi_singular_values<long double>(U).front();
    out.error = smin > 0.0L ? out.value * 64 * eps_l * std::sqrt(static_cast<long double>(m)) / smin
                            : std::numeric_limits<long double>::infinity();
    return out;
}

} // namespace

double loc_sigma(const SpectralBasis& basis, const Region& omega, double lambda)
{
    long double best = std::numeric_limits<long double>::infinity();
    bool any = false;
    for (const auto& blk : basis.blocks) {
        int m = count_upto(blk.lambda, lambda);
        if (m == 0)
            continue;
        any = true;
        MatrixL F = blk.samples(omega);
        if (F.rows() == 0)
            return 0.0;
        best = std::min(best, smallest_singular(F.leftCols(m)).value);
    }
    if (!any)
        throw std::invalid_argument("loc_sigma: empty spectral window");
    return static_cast<double>(best);
}

double loc_eig(const SpectralBasis& basis, const Region& omega, double lambda)
{
    long double best = std::numeric_limits<long double>::infinity();
    bool any = false;
    for (const auto& blk : basis.blocks) {
        int m = count_upto(blk.lambda, lambda);
        if (m == 0)
            continue;
        any = true;
        MatrixL F = blk.samples(omega);
        for (int j = 0; j < m; ++j)
            best = std::min(best, F.rows() ? F.col(j).norm() : 0.0L);
    }
    if (!any)
        throw std::invalid_argument("loc_eig: empty spectral window");
    return static_cast<double>(best);
}

MatrixL heat_matrix(const MatrixL& A, const std::vector<double>& lambda, double T)
{
    const int m = static_cast<int>(A.rows());
    MatrixL B(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            long double s = static_cast<long double>(lambda[i]) + lambda[j];
            long double e = s == 0.0L ? static_cast<long double>(T) : std::expm1(s * T) / s;
            B(i, j) = A(i, j) * e;
        }
    return B;
}

namespace {

// Square-root factor of the heat pencil: rows sqrt(w_p) R diag(e^{lambda tau_p}), tau in
// (0, T), with R from a QR of the omega samples. G^T G reproduces heat_matrix.
Sigma loc_heat_block(const MatrixL& F, const std::vector<double>& lambda, double T)
{
    const int m = static_cast<int>(lambda.size());
    MatrixL R = F.leftCols(m);
    if (R.rows() > m) {
        Eigen::HouseholderQR<MatrixL> qr(R);
        R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    }
    // panels keep the exponent change per panel at most 4
    const int panels = std::max(4, static_cast<int>(std::ceil(2.0 * lambda.back() * T / 4.0)));
    std::vector<double> ts, ws;
    composite_nodes(0.0, T, panels, 16, ts, ws);
    const int nr = static_cast<int>(R.rows());
    MatrixL G(nr * static_cast<int>(ts.size()), m);
    for (std::size_t p = 0; p < ts.size(); ++p) {
        long double sw = std::sqrt(static_cast<long double>(ws[p]));
        for (int j = 0; j < m; ++j) {
            long double e = sw * std::exp(static_cast<long double>(lambda[j]) * ts[p]);
            G.block(static_cast<int>(p) * nr, j, nr, 1) = R.col(j) * e;
        }
    }
    return smallest_singular(std::move(G));
}

Sigma loc_heat_impl(const SpectralBasis& basis, const Region& omega, double T, double lambda_cap)
{
    if (!(T > 0.0))
        throw std::invalid_argument("loc_heat: T must be positive");
    double lmax = std::min(lambda_cap, basis.lambda_max());
    if (lmax * T < 10.0)
        throw std::invalid_argument("loc_heat: truncation too short, need lambda_max T >= 10");
    Sigma best{std::numeric_limits<long double>::infinity(), 0.0L};
    bool any = false;
    for (const auto& blk : basis.blocks) {
        int m = count_upto(blk.lambda, lambda_cap);
        if (m == 0)
            continue;
        any = true;
        MatrixL F = blk.samples(omega);
        if (F.rows() == 0)
            return {0.0L, 0.0L};
        std::vector<double> lam(blk.lambda.begin(), blk.lambda.begin() + m);
        Sigma s = loc_heat_block(F, lam, T);
        if (s.value < best.value)
            best = s;
    }
    if (!any)
        throw std::invalid_argument("loc_heat: empty spectral window");
    return best;
}

} // namespace

double loc_heat(const SpectralBasis& basis, const Region& omega, double T, double lambda_cap)
{
    return static_cast<double>(loc_heat_impl(basis, omega, T, lambda_cap).value);
}

std::vector<double> LocalizationCurve::log10_loc() const
{
    std::vector<double> out;
    for (double v : loc)
        out.push_back(std::log10(v));
    return out;
}

LocalizationCurve loc_sigma_curve(const SpectralBasis& basis, const Region& omega,
                                  const std::vector<double>& lambdas)
{
    LocalizationCurve c;
    c.kind = LocalizationCurve::Kind::lambda;
    c.param = lambdas;
    c.loc.assign(lambdas.size(), std::numeric_limits<double>::infinity());
    c.floor.assign(lambdas.size(), 0.0);
    // sample each block once and sweep the prefixes
    for (const auto& blk : basis.blocks) {
        MatrixL F = blk.samples(omega);
        const int nl = static_cast<int>(lambdas.size());
        std::vector<double> vals(nl, std::numeric_limits<double>::infinity()), floors(nl, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
        for (int i = 0; i < nl; ++i) {
            int m = count_upto(blk.lambda, lambdas[i]);
            if (m > 0 && F.rows()) {
                Sigma sg = smallest_singular(F.leftCols(m));
                vals[i] = static_cast<double>(sg.value);
                floors[i] = static_cast<double>(sg.error);
            } else if (m > 0) {
                vals[i] = 0.0;
            }
        }
        for (int i = 0; i < nl; ++i)
            if (vals[i] < c.loc[i]) {
                c.loc[i] = vals[i];
                c.floor[i] = floors[i];
            }
    }
    for (double v : c.loc)
        if (std::isinf(v))
            throw std::invalid_argument("loc_sigma_curve: empty spectral window");
    return c;
}

LocalizationCurve loc_eig_curve(const SpectralBasis& basis, const Region& omega,
                                const std::vector<double>& lambdas)
{
    LocalizationCurve c;
    c.kind = LocalizationCurve::Kind::lambda;
    c.param = lambdas;
    for (double l : lambdas)
        c.loc.push_back(loc_eig(basis, omega, l));
    c.floor.assign(lambdas.size(), 0.0);
    return c;
}

LocalizationCurve loc_heat_curve(const SpectralBasis& basis, const Region& omega,
                                 const std::vector<double>& times, double cap_factor)
{
    LocalizationCurve c;
    c.kind = LocalizationCurve::Kind::time;
    c.param = times;
    c.loc.resize(times.size());
    c.floor.assign(times.size(), 0.0);
    std::vector<std::string> errors(times.size());
    const int nt = static_cast<int>(times.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < nt; ++i) {
        try {
            Sigma sg = loc_heat_impl(basis, omega, times[i], cap_factor / times[i]);
            c.loc[i] = static_cast<double>(sg.value);
            c.floor[i] = static_cast<double>(sg.error);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty())
            throw std::runtime_error(e);
    return c;
}

namespace {

CurveFit tail_fit(std::vector<double> x, const LocalizationCurve& c, int min_points,
                  double min_span, std::vector<double> span_param)
{
    std::vector<double> loc;
    std::vector<int> keep;
    for (std::size_t i = 0; i < c.loc.size(); ++i)
        if (c.floor.empty() || c.loc[i] > 10.0 * c.floor[i])
            keep.push_back(static_cast<int>(i));
    x = pick(x, keep);
    span_param = pick(span_param, keep);
    loc = pick(c.loc, keep);
    if (static_cast<int>(x.size()) < min_points)
        throw std::invalid_argument("fit: need at least " + std::to_string(min_points) + " points");
    double lo = *std::min_element(span_param.begin(), span_param.end());
    double hi = *std::max_element(span_param.begin(), span_param.end());
    if (!(lo > 0.0) || hi < min_span * lo)
        throw std::invalid_argument("fit: parameter range too narrow");
    std::vector<double> y;
    for (double v : loc) {
        if (!(v > 0.0))
            throw std::invalid_argument("fit: nonpositive localization value");
        y.push_back(-std::log(v));
    }
    std::vector<int> win = top_half(x, 3);
    LineFit f = fit_line(pick(x, win), pick(y, win));
    return {f.slope, f.intercept, f.slope_stderr, static_cast<int>(win.size())};
}

} // namespace

CurveFit fit_k_sigma(const LocalizationCurve& c)
{
    if (c.kind != LocalizationCurve::Kind::lambda)
        throw std::invalid_argument("fit_k_sigma: curve is not indexed by lambda");
    std::vector<double> x;
    for (double l : c.param)
        x.push_back(std::sqrt(l));
    return tail_fit(x, c, 6, 4.0, c.param);
}

CurveFit fit_k_heat(const LocalizationCurve& c)
{
    if (c.kind != LocalizationCurve::Kind::time)
        throw std::invalid_argument("fit_k_heat: curve is not indexed by time");
    std::vector<double> x;
    for (double t : c.param)
        x.push_back(1.0 / t);
    return tail_fit(x, c, 6, 4.0, c.param);
}

ChainCheck chain_check(const CurveFit& eig, const CurveFit& heat, const CurveFit& sigma)
{
    ChainCheck c;
    c.K_eig = eig.K;
    c.K_heat = heat.K;
    c.K_sigma = sigma.K;
    double s_low = std::hypot(0.5 * eig.K * eig.stderr_, heat.stderr_);
    double s_up = std::hypot(heat.stderr_, 8.0 * sigma.K * sigma.stderr_);
    c.slack = 3.0 * std::max(s_low, s_up);
    c.lower = 0.25 * eig.K * eig.K <= heat.K + 3.0 * s_low;
    c.upper = heat.K <= 4.0 * sigma.K * sigma.K + 3.0 * s_up;
    c.pass = c.lower && c.upper;
    return c;
}

double miller_cstar(double a, double b)
{
    if (a < 0.0 || b < 0.0)
        throw std::domain_error("miller_cstar: a and b must be nonnegative");
    double sb = std::sqrt(b);
    double v = a + sb + std::sqrt(a * a + 2.0 * a * sb);
    return v * v;
}

double miller_identity_residual(double a, double b)
{
    if (!(a > 0.0) || b < 0.0)
        throw std::domain_error("miller_identity_residual: need a > 0, b >= 0");
    double c = miller_cstar(a, b);
    // sqrt(a + 2 sqrt b) - sqrt a = 2 sqrt b / (sqrt(a + 2 sqrt b) + sqrt a), cancellation-free
    double sb = std::sqrt(b);
    double u = std::sqrt(a + 2.0 * sb), v = std::sqrt(a);
    if (b == 0.0)
        return 0.0;
    double diff = 2.0 * sb / (u + v);
    double lhs = 4.0 * b * b / std::pow(diff, 4);
    return std::abs(lhs - c) / c;
}

double heat_from_wave_bound(double S, double Kwave, double alpha1, double alpha2)
{
    if (!(S > 0.0) || Kwave < 0.0 || alpha1 < 0.0 || alpha2 < 0.0)
        throw std::domain_error("heat_from_wave_bound: invalid inputs");
    return alpha1 * S * S + alpha2 * Kwave * Kwave;
}

double lambda_mu_factor(double Lambda, double K, double mu0, double alpha)
{
    if (!(Lambda > 0.0) || K < 0.0 || mu0 < 0.0 || !(alpha > 0.0))
        throw std::domain_error("lambda_mu_factor: invalid inputs");
    if (Lambda + alpha <= mu0)
        return (mu0 - alpha) / alpha * std::exp(K * mu0);
    return std::exp(K * alpha) / alpha * Lambda * (Lambda + alpha) * std::exp(K * Lambda);
}

double lambda_mu_factor_corrected(double Lambda, double K, double mu0, double alpha)
{
    double F = lambda_mu_factor(Lambda, K, mu0, alpha);
    return Lambda + alpha <= mu0 ? mu0 * F : F;
}

bool lambda_mu_check(double Lambda, double X, double K, double mu0, double alpha,
                     bool corrected)
{
    if (X < 0.0)
        throw std::domain_error("lambda_mu_check: X must be nonnegative");
    double F = corrected ? lambda_mu_factor_corrected(Lambda, K, mu0, alpha)
                         : lambda_mu_factor(Lambda, K, mu0, alpha);
    return 1.0 <= F * X;
}

double lambda_mu_min_X(double Lambda, double K, const std::vector<double>& mu_grid)
{
    double X = 0.0;
    for (double mu : mu_grid)
        X = std::max(X, (1.0 / Lambda - 1.0 / mu) * std::exp(-K * mu));
    return X;
}

bool lambda_mu_converse(double Lambda, double X, const std::function<double(double)>& F,
                        double mu)
{
    if (!(Lambda >= 1.0) || !(1.0 <= F(Lambda) * X))
        throw std::domain_error("lambda_mu_converse: hypothesis not satisfied");
    return 1.0 / Lambda <= F(mu) * X + 1.0 / mu;
}

namespace {

// log of int_0^1 exp(-x (1/s + 1/(1-s) - 4)) ds; the integrand peaks at 1 for s = 1/2
double log_shifted_integral(double x)
{
    auto g = [x](double s) {
        if (s <= 0.0 || s >= 1.0)
            return 0.0;
        return std::exp(-x * (1.0 / s + 1.0 / (1.0 - s) - 4.0));
    };
    QuadResult left = integrate_adaptive(g, 0.0, 0.5, 1e-300, 1e-13, 20000);
    if (!left.converged)
        throw std::runtime_error("transmutation_integral: quadrature did not converge");
    return std::log(2.0 * left.value);
}

} // namespace

double transmutation_constant()
{
    static const double C = std::exp(log_shifted_integral(1.0));
    return C;
}

Transmutation transmutation_integral(double T, double alpha)
{
    if (!(T > 0.0) || !(alpha > 0.0))
        throw std::domain_error("transmutation_integral: T and alpha must be positive");
    double x = alpha / T;
    if (x < 1.0)
        throw std::domain_error("transmutation_integral: requires alpha/T >= 1");
    Transmutation t;
    t.C = transmutation_constant();
    double logJ = log_shifted_integral(x);
    t.log_value = std::log(T) - 4.0 * x + logJ;
    t.log_lower_bound = std::log(t.C) + std::log(T) + 0.5 * std::log(T / alpha) - 4.0 * x;
    t.value = std::exp(t.log_value);
    t.lower_bound = std::exp(t.log_lower_bound);
    t.ratio = std::exp(logJ + 0.5 * std::log(x));
    t.holds = t.log_value >= t.log_lower_bound - 1e-12;
    return t;
}

double kernel_bound_eval(double t, double s, double T, double alpha, double delta)
{
    if (!(t > 0.0 && t < T) || !(delta > 0.0 && delta < 1.0))
        throw std::domain_error("kernel_bound_eval: need t in (0, T) and delta in (0, 1)");
    double m = std::min(t, T - t);
    return std::abs(s) * std::exp((s * s / delta - alpha / (1.0 + delta)) / m);
}

ScalingReport small_ball_scaling(const SpectralBasis& basis, double x0,
                                 const std::vector<double>& radii,
                                 const std::vector<double>& lambdas)
{
    if (radii.empty() || lambdas.empty())
        throw std::invalid_argument("small_ball_scaling: empty sweep");
    double rlo = *std::min_element(radii.begin(), radii.end());
    double rhi = *std::max_element(radii.begin(), radii.end());
    double llo = *std::min_element(lambdas.begin(), lambdas.end());
    double lhi = *std::max_element(lambdas.begin(), lambdas.end());
    if (rhi < 8.0 * rlo)
        throw std::invalid_argument("small_ball_scaling: radii must span 8x");
    if (lhi < 4.0 * llo)
        throw std::invalid_argument("small_ball_scaling: lambdas must span 4x");

    ScalingReport rep;
    std::vector<double> c1, c2;
    for (double r : radii) {
        LocalizationCurve c = loc_sigma_curve(basis, Region::ball(x0, r, basis.a, basis.b), lambdas);
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            if (!(c.loc[i] > 10.0 * c.floor[i]))
                throw std::runtime_error("small_ball_scaling: Loc below rounding resolution; reduce lambda or raise r");
            double y = -std::log(c.loc[i]);
            double g = 1.0 + std::log(1.0 / r);
            rep.r.push_back(r);
            rep.lambda.push_back(lambdas[i]);
            rep.minus_log_loc.push_back(y);
            c1.push_back(std::sqrt(lambdas[i]) * g);
            c2.push_back(g);
        }
    }
    LsqFit f = fit_lsq({c1, c2}, rep.minus_log_loc, false);
    rep.C1 = f.coef[0];
    rep.C2 = f.coef[1];
    rep.r2 = f.r2;
    rep.r2_centered = fit_lsq({c1, c2}, rep.minus_log_loc, true).r2;
    rep.r2_log_r = 1.0;
    if (radii.size() >= 3)
        for (double l : lambdas) {
            std::vector<double> x, y;
            for (std::size_t i = 0; i < rep.r.size(); ++i)
                if (rep.lambda[i] == l) {
                    x.push_back(std::log(1.0 / rep.r[i]));
                    y.push_back(rep.minus_log_loc[i]);
                }
            rep.r2_log_r = std::min(rep.r2_log_r, fit_line(x, y).r2);
        }
    for (std::size_t i = 0; i < c1.size(); ++i) {
        double model = rep.C1 * c1[i] + rep.C2 * c2[i];
        if (model > 0.0)
            rep.envelope = std::max(rep.envelope, rep.minus_log_loc[i] / model);
    }
    std::vector<double> xs, ys, xr, yr;
    for (std::size_t i = 0; i < rep.r.size(); ++i) {
        if (rep.r[i] == rlo) {
            xs.push_back(std::sqrt(rep.lambda[i]));
            ys.push_back(rep.minus_log_loc[i]);
        }
        if (rep.lambda[i] == lhi) {
            xr.push_back(std::log(1.0 / rep.r[i]));
            yr.push_back(rep.minus_log_loc[i]);
        }
    }
    if (xs.size() >= 2)
        rep.marginal_sqrt_lambda_slope = fit_line(xs, ys).slope;
    if (xr.size() >= 2)
        rep.marginal_log_r_slope = fit_line(xr, yr).slope;
    return rep;
}

} // namespace lab
