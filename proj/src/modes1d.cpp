#include "lab/modes1d.hpp"

#include "lab/agmon.hpp"
#include "lab/fit.hpp"
#include "lab/io.hpp"
#include "lab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Discretization {
    std::vector<double> s, R, W;
    std::vector<double> diag;  // K_ii
    std::vector<double> off;   // K_{i,i+1}
    double h = 0.0;
    bool natural = false;
    int first = 0, last = 0;  // unknown index range [first, last]
};

Discretization discretize(const RevolutionProfile& p, int k, int grid_size, double delta)
{
    const double L = p.L();
    const double h0 = L / grid_size;
    int N = static_cast<int>(std::lround((L - 2 * delta) / h0)) + 1;
    if (N < 10)
        throw std::invalid_argument("solve_reduced: grid too coarse for the cutoff");
    Discretization d;
    d.h = (L - 2 * delta) / (N - 1);
    d.natural = (k == 0);
    d.s.resize(N);
    d.R.resize(N);
    d.W.resize(N);
    for (int i = 0; i < N; ++i) {
        d.s[i] = delta + i * d.h;
        d.R[i] = p.R(d.s[i]);
        if (!(d.R[i] > 0.0))
            throw std::runtime_error("solve_reduced: R not positive on the truncated meridian");
        d.W[i] = d.R[i] * d.h;
    }
    const double kk = static_cast<double>(k) * k;
    d.diag.assign(N, 0.0);
    d.off.assign(N - 1, 0.0);
    for (int i = 0; i < N - 1; ++i) {
        double Rm = p.R(d.s[i] + 0.5 * d.h);
        d.off[i] = -Rm / d.h;
        d.diag[i] += Rm / d.h;
        d.diag[i + 1] += Rm / d.h;
    }
    if (d.natural) {
        d.W[0] *= 0.5;
        d.W[N - 1] *= 0.5;
        d.first = 0;
        d.last = N - 1;
    } else {
        d.first = 1;
        d.last = N - 2;
    }
    for (int i = 0; i < N; ++i)
        d.diag[i] += kk * (d.W[i] / d.R[i]) / d.R[i];
    return d;
}

SymTridiag symmetrize(const Discretization& d)
{
    SymTridiag t;
    for (int i = d.first; i <= d.last; ++i) {
        t.d.push_back(d.diag[i] / d.W[i]);
        if (i < d.last)
            t.e.push_back(d.off[i] / std::sqrt(d.W[i] * d.W[i + 1]));
    }
    return t;
}

// Recurrence from both ends toward the allowed region; each half runs in its growing direction.
std::vector<double> eigenvector(const Discretization& d, int k, double lambda)
{
    const int N = static_cast<int>(d.s.size());
    const double big = 1e200;
    auto row_coef = [&](int i) { return d.diag[i] - lambda * d.W[i]; };

    std::vector<double> fw(N, 0.0), bw(N, 0.0);
    if (d.natural) {
        fw[0] = 1.0;
        fw[1] = -row_coef(0) * fw[0] / d.off[0];
        bw[N - 1] = 1.0;
        bw[N - 2] = -row_coef(N - 1) * bw[N - 1] / d.off[N - 2];
    } else {
        fw[1] = 1.0;
        bw[N - 2] = 1.0;
    }
    for (int i = 1; i < N - 1; ++i) {
        fw[i + 1] = -(row_coef(i) * fw[i] + d.off[i - 1] * fw[i - 1]) / d.off[i];
        if (std::abs(fw[i + 1]) > big)
            for (int j = 0; j <= i + 1; ++j)
                fw[j] /= big;
    }
    for (int i = N - 2; i >= 1; --i) {
        bw[i - 1] = -(row_coef(i) * bw[i] + d.off[i] * bw[i + 1]) / d.off[i - 1];
        if (std::abs(bw[i - 1]) > big)
            for (int j = i - 1; j < N; ++j)
                bw[j] /= big;
    }

    // classically allowed band lambda >= k^2/R^2
    const double kk = static_cast<double>(k) * k;
    int iL = -1, iR = -1;
    for (int i = 0; i < N; ++i) {
        if (lambda * d.R[i] * d.R[i] >= kk) {
            if (iL < 0)
                iL = i;
            iR = i;
        }
    }
    if (iL < 0) {
        iL = 0;
        iR = N - 1;
    }
    iL = std::max(iL, 1);
    iR = std::min(iR, N - 2);
    int m = iL;
    double best = -1.0;
    for (int i = iL; i <= iR; ++i) {
        if (std::abs(fw[i]) > best) {
            best = std::abs(fw[i]);
            m = i;
        }
    }
    if (bw[m] == 0.0 || fw[m] == 0.0)
        throw std::runtime_error("solve_reduced: eigenvector matching failed");

    // rescale both halves so that the larger one stays finite
    double ratio = fw[m] / bw[m];
    std::vector<double> f(N);
    if (std::abs(ratio) <= 1.0) {
        for (int i = 0; i <= m; ++i)
            f[i] = fw[i];
        for (int i = m + 1; i < N; ++i)
            f[i] = bw[i] * ratio;
    } else {
        for (int i = 0; i <= m; ++i)
            f[i] = fw[i] / ratio;
        for (int i = m + 1; i < N; ++i)
            f[i] = bw[i];
    }
    return f;
}

Mode make_mode(const Discretization& d, int k, int n, double lambda)
{
    Mode m;
    m.k = k;
    m.n = n;
    m.lambda = lambda;
    m.h = d.h;
    m.s = d.s;
    m.R = d.R;
    m.w = d.W;
    if (!d.natural) {
        m.w.front() = 0.0;
        m.w.back() = 0.0;
    }
    m.f = eigenvector(d, k, lambda);
    if (!d.natural) {
        m.f.front() = 0.0;
        m.f.back() = 0.0;
    }
    const int N = static_cast<int>(m.f.size());
    double peak = 0.0;
    int ipeak = 0;
    for (int i = 0; i < N; ++i)
        if (std::abs(m.f[i]) > peak) {
            peak = std::abs(m.f[i]);
            ipeak = i;
        }
    double scale = (m.f[ipeak] < 0 ? -1.0 : 1.0) / peak;
    for (double& v : m.f)
        v *= scale;
    double norm2 = 0.0;
    for (int i = 0; i < N; ++i)
        norm2 += m.w[i] * m.f[i] * m.f[i];
    norm2 *= two_pi;
    double inv = 1.0 / std::sqrt(norm2);
    for (double& v : m.f)
        v *= inv;

    // trapezoid cells of g = f^2 R accumulated from the north cutoff
    m.cum.assign(N, 0.0);
    for (int i = 1; i < N; ++i) {
        double g0 = m.f[i - 1] * m.f[i - 1] * m.R[i - 1];
        double g1 = m.f[i] * m.f[i] * m.R[i];
        m.cum[i] = m.cum[i - 1] + two_pi * 0.5 * d.h * (g0 + g1);
    }
    return m;
}

} // namespace

double Mode::eval(double x) const
{
    const int N = static_cast<int>(s.size());
    if (N < 4 || x < s.front() || x > s.back())
        return 0.0;
    int i = static_cast<int>((x - s.front()) / h);
    i = std::clamp(i - 1, 0, N - 4);
    double out = 0.0;
    for (int j = 0; j < 4; ++j) {
        double lj = 1.0;
        for (int q = 0; q < 4; ++q)
            if (q != j)
                lj *= (x - s[i + q]) / (s[i + j] - s[i + q]);
        out += lj * f[i + j];
    }
    return out;
}

const Mode& ModeFamily::get(int k, int n) const
{
    for (const Mode& m : modes)
        if (m.k == k && m.n == n)
            return m;
    throw std::out_of_range("ModeFamily::get: no mode (" + std::to_string(k) + ", " +
                            std::to_string(n) + ")");
}

double default_cutoff(double L, int grid_size)
{
    return std::max(5.0 * L / grid_size, 1e-3 * L);
}

ModeFamily solve_reduced(const RevolutionProfile& p, int k, int n_max, int grid_size,
                         double delta)
{
    if (k < 0 || n_max < 0)
        throw std::invalid_argument("solve_reduced: k and n_max must be nonnegative");
    if (grid_size < 200)
        throw std::invalid_argument("solve_reduced: grid_size must be at least 200");
    if (delta <= 0.0)
        delta = default_cutoff(p.L(), grid_size);
    Discretization d = discretize(p, k, grid_size, delta);
    SymTridiag t = symmetrize(d);
    if (n_max >= t.size())
        throw std::invalid_argument("solve_reduced: n_max exceeds the discrete spectrum");

    ModeFamily fam;
    fam.profile = p.name();
    fam.grid_size = grid_size;
    fam.delta = delta;
    double prev = -std::numeric_limits<double>::infinity();
    for (int n = 0; n <= n_max; ++n) {
        double lam = t.eigenvalue(n);
        if (!(lam > prev))
            throw std::runtime_error("solve_reduced: eigenvalues not strictly increasing");
        prev = lam;
        fam.modes.push_back(make_mode(d, k, n, lam));
    }
    return fam;
}

ModeFamily solve_reduced_below(const RevolutionProfile& p, int k, double lambda_max,
                               int grid_size)
{
    double delta = default_cutoff(p.L(), grid_size);
    int count = symmetrize(discretize(p, k, grid_size, delta)).count_below(lambda_max);
    if (count == 0) {
        ModeFamily fam;
        fam.profile = p.name();
        fam.grid_size = grid_size;
        fam.delta = delta;
        return fam;
    }
    return solve_reduced(p, k, count - 1, grid_size, delta);
}

double cutoff_sensitivity(const RevolutionProfile& p, int k, int n, int grid_size)
{
    double delta = default_cutoff(p.L(), grid_size);
    double a = symmetrize(discretize(p, k, grid_size, delta)).eigenvalue(n);
    double b = symmetrize(discretize(p, k, grid_size, 0.5 * delta)).eigenvalue(n);
    return std::abs(a - b) / std::max(std::abs(a), 1e-300);
}

namespace {

ModeFamily merge(const RevolutionProfile& p, std::vector<ModeFamily>& parts, int grid_size)
{
    ModeFamily fam;
    fam.profile = p.name();
    fam.grid_size = grid_size;
    fam.delta = default_cutoff(p.L(), grid_size);
    for (auto& part : parts)
        for (auto& m : part.modes)
            fam.modes.push_back(std::move(m));
    return fam;
}

} // namespace

ModeFamily solve_family(const RevolutionProfile& p, int k_lo, int k_hi, int n_max,
                        int grid_size)
{
    if (k_hi < k_lo)
        throw std::invalid_argument("solve_family: empty k range");
    const int count = k_hi - k_lo + 1;
    std::vector<ModeFamily> parts(count);
    std::vector<std::string> errors(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (int j = 0; j < count; ++j) {
        try {
            parts[j] = solve_reduced(p, k_lo + j, n_max, grid_size);
        } catch (const std::exception& e) {
            errors[j] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty())
            throw std::runtime_error(e);
    return merge(p, parts, grid_size);
}

ModeFamily solve_family_serial(const RevolutionProfile& p, int k_lo, int k_hi, int n_max,
                               int grid_size)
{
    if (k_hi < k_lo)
        throw std::invalid_argument("solve_family: empty k range");
    std::vector<ModeFamily> parts;
    for (int k = k_lo; k <= k_hi; ++k)
        parts.push_back(solve_reduced(p, k, n_max, grid_size));
    return merge(p, parts, grid_size);
}

double harmonic_prediction(const EquatorData& eq, int k)
{
    if (!(eq.c0 > 0.0) || !(eq.Rmax > 0.0))
        throw std::invalid_argument("harmonic_prediction: degenerate equator");
    double kd = k;
    return kd * kd / (eq.Rmax * eq.Rmax) + kd * std::sqrt(eq.c0);
}

double ball_norm_sq(const Mode& m, double r)
{
    const double L_end = m.s.back() + m.s.front();
    if (!(r > 0.0 && r <= L_end))
        throw std::domain_error("ball_norm: r outside (0, L]");
    const int N = static_cast<int>(m.s.size());
    if (r <= m.s.front())
        return 0.0;
    if (r >= m.s.back())
        return m.cum.back();
    int i = std::min(static_cast<int>((r - m.s.front()) / m.h), N - 2);
    double t = r - m.s[i];
    double g0 = m.f[i] * m.f[i] * m.R[i];
    double g1 = m.f[i + 1] * m.f[i + 1] * m.R[i + 1];
    double gr = g0 + (g1 - g0) * t / m.h;
    return m.cum[i] + two_pi * 0.5 * t * (g0 + gr);
}

double ball_norm(const Mode& m, double r) { return std::sqrt(ball_norm_sq(m, r)); }

double sphere_ck2(int k)
{
    if (k < 0)
        throw std::domain_error("sphere_ck2: k must be nonnegative");
    // int_0^pi sin^{2k+1} = 2 prod_{j=1..k} 2j/(2j+1)
    double I = 2.0;
    for (int j = 1; j <= k; ++j)
        I *= (2.0 * j) / (2.0 * j + 1.0);
    return 1.0 / (two_pi * I);
}

double sphere_ck_asymptotic(int k)
{
    return std::pow(static_cast<double>(k), 0.25) /
           (std::sqrt(2.0) * std::pow(std::numbers::pi, 0.75));
}

SphereNorm sphere_exact_norm(int k, double r)
{
    if (!(r > 0.0 && r < 0.5 * std::numbers::pi))
        throw std::domain_error("sphere_exact_norm: r outside (0, pi/2)");
    SphereNorm out;
    out.ck2 = sphere_ck2(k);
    out.value = out.ck2 * std::numbers::pi / (k + 1) *
                std::pow(std::sin(r), 2.0 * k + 2.0) / std::cos(r);
    double t = std::tan(r);
    out.remainder_bound = t * t / (2.0 * k + 2.0);
    return out;
}

DecayReport agmon_decay_check(const ModeFamily& family, const RevolutionProfile& p,
                              const EquatorData& eq, const std::vector<double>& radii,
                              double rel_tol)
{
    std::vector<const Mode*> ground;
    for (const Mode& m : family.modes)
        if (m.n == 0 && m.k >= 1)
            ground.push_back(&m);
    std::sort(ground.begin(), ground.end(),
              [](const Mode* a, const Mode* b) { return a->k < b->k; });
    if (ground.empty() || ground.back()->k < 20)
        throw std::invalid_argument("agmon_decay_check: need n = 0 modes up to k >= 20");
    for (std::size_t i = 1; i < ground.size(); ++i)
        if (ground[i]->k != ground[i - 1]->k + 1)
            throw std::invalid_argument("agmon_decay_check: k range must be contiguous");

    std::vector<double> ks;
    for (const Mode* m : ground)
        ks.push_back(m->k);
    std::vector<int> window = top_half(ks, 5);

    DecayReport rep;
    rep.pass = true;
    for (double r : radii) {
        std::vector<double> x, y;
        for (int idx : window) {
            double b = ball_norm(*ground[idx], r);
            if (b > 0.0 && std::isfinite(b)) {
                x.push_back(std::sqrt(ground[idx]->lambda));
                y.push_back(-std::log(b));
            }
        }
        if (x.size() < 5)
            throw std::runtime_error("agmon_decay_check: fewer than 5 usable points");
        LineFit fit = fit_line(x, y);
        DecayRow row;
        row.r = r;
        row.slope = fit.slope;
        row.stderr_ = fit.slope_stderr;
        double dA = r >= eq.s0 ? 0.0 : agmon_distance(p, eq, r);
        row.dA_Rmax = dA * eq.Rmax;
        row.slope_over_log = fit.slope / std::abs(std::log(r));
        row.pass = row.slope >= (1.0 - rel_tol) * row.dA_Rmax - 1e-12;
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

VanishingOrder vanishing_order(const std::vector<double>& r, const std::vector<double>& norms,
                               int dim, double tol)
{
    if (r.size() != norms.size() || r.size() < 5)
        throw std::invalid_argument("vanishing_order: need at least 5 radii");
    double rmin = *std::min_element(r.begin(), r.end());
    double rmax = *std::max_element(r.begin(), r.end());
    if (!(rmax >= 10.0 * rmin))
        throw std::invalid_argument("vanishing_order: radii must span a decade");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(norms[i] > 0.0) || !(r[i] > 0.0))
            throw std::invalid_argument("vanishing_order: nonpositive norm or radius");
        lx.push_back(std::log(r[i]));
        ly.push_back(std::log(norms[i]));
    }
    LineFit fit = fit_line(lx, ly);
    VanishingOrder v;
    v.D = fit.slope;
    v.stderr_ = fit.slope_stderr;
    v.order = std::max(0, static_cast<int>(std::ceil(v.D - 0.5 * dim - tol)));
    return v;
}

void write_family_csv(const ModeFamily& fam, const std::string& path,
                      const std::string& samples_path)
{
    CsvWriter w(path, {"k", "n", "lambda"});
    for (const Mode& m : fam.modes)
        w.row({double(m.k), double(m.n), m.lambda});
    CsvWriter ws(samples_path, {"k", "n", "s", "f"});
    for (const Mode& m : fam.modes)
        for (std::size_t i = 0; i < m.s.size(); ++i)
            ws.row({double(m.k), double(m.n), m.s[i], m.f[i]});
}

} // namespace lab
