#include "lab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace lab {

std::string to_string(ProfileKind k)
{
    switch (k) {
    case ProfileKind::sphere: return "sphere";
    case ProfileKind::custom_analytic: return "custom-analytic";
    case ProfileKind::sampled: return "sampled";
    }
    return "unknown";
}

namespace {

// d-th derivative at x of the Lagrange polynomial through (xs, fs), d in {1,2}.
double lagrange_deriv(const double* xs, const double* fs, int m, double x, int d)
{
    double out = 0.0;
    for (int j = 0; j < m; ++j) {
        double denom = 1.0;
        for (int k = 0; k < m; ++k)
            if (k != j)
                denom *= xs[j] - xs[k];
        double num = 0.0;
        if (d == 1) {
            for (int a = 0; a < m; ++a) {
                if (a == j)
                    continue;
                double p = 1.0;
                for (int k = 0; k < m; ++k)
                    if (k != j && k != a)
                        p *= x - xs[k];
                num += p;
            }
        } else {
            for (int a = 0; a < m; ++a) {
                if (a == j)
                    continue;
                for (int b = 0; b < m; ++b) {
                    if (b == j || b == a)
                        continue;
                    double p = 1.0;
                    for (int k = 0; k < m; ++k)
                        if (k != j && k != a && k != b)
                            p *= x - xs[k];
                    num += p;
                }
            }
        }
        out += fs[j] * num / denom;
    }
    return out;
}

double golden_max(const std::function<double(double)>& f, double a, double b, double tol)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

int RevolutionProfile::Table::cell(double x) const
{
    auto it = std::upper_bound(s.begin(), s.end(), x);
    int i = static_cast<int>(it - s.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(s.size()) - 2);
}

RevolutionProfile RevolutionProfile::analytic(double L, Fn R, Fn dR, Fn d2R,
                                              ProfileKind kind, std::string name)
{
    if (!(L > 0.0))
        throw std::invalid_argument("profile: L must be positive");
    RevolutionProfile p;
    p.L_ = L;
    p.kind_ = kind;
    p.name_ = std::move(name);
    p.R_ = std::move(R);
    p.dR_ = std::move(dR);
    p.d2R_ = std::move(d2R);
    return p;
}

RevolutionProfile RevolutionProfile::sampled(std::vector<double> s, std::vector<double> R,
                                             std::string name)
{
    const int n = static_cast<int>(s.size());
    if (n < 5 || static_cast<int>(R.size()) != n)
        throw std::invalid_argument("sampled profile: need at least 5 matching samples");
    if (s.front() != 0.0)
        throw std::invalid_argument("sampled profile: s must start at 0");
    for (int i = 1; i < n; ++i)
        if (!(s[i] > s[i - 1]))
            throw std::invalid_argument("sampled profile: s must be strictly increasing");
    auto t = std::make_shared<Table>();
    t->s = std::move(s);
    t->R = std::move(R);
    t->dR.resize(n);
    t->d2R.resize(n);
    for (int i = 0; i < n; ++i) {
        int lo = std::clamp(i - 1, 0, n - 3);
        t->dR[i] = lagrange_deriv(&t->s[lo], &t->R[lo], 3, t->s[i], 1);
        int lo4 = std::clamp(i - 1, 0, n - 4);
        if (i > 0 && i < n - 1)
            t->d2R[i] = lagrange_deriv(&t->s[i - 1], &t->R[i - 1], 3, t->s[i], 2);
        else
            t->d2R[i] = lagrange_deriv(&t->s[lo4], &t->R[lo4], 4, t->s[i], 2);
    }
    for (int i = 1; i < n; ++i)
        t->h = std::max(t->h, t->s[i] - t->s[i - 1]);

    RevolutionProfile p;
    p.L_ = t->s.back();
    p.kind_ = ProfileKind::sampled;
    p.name_ = std::move(name);
    p.table_ = t;
    return p;
}

double RevolutionProfile::table_step() const { return table_ ? table_->h : 0.0; }

double RevolutionProfile::R(double x) const
{
    if (!table_)
        return R_(x);
    const Table& t = *table_;
    int i = t.cell(x);
    double h = t.s[i + 1] - t.s[i];
    double u = (x - t.s[i]) / h;
    double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return h00 * t.R[i] + h10 * h * t.dR[i] + h01 * t.R[i + 1] + h11 * h * t.dR[i + 1];
}

double RevolutionProfile::dR(double x) const
{
    if (!table_)
        return dR_(x);
    const Table& t = *table_;
    int i = t.cell(x);
    double h = t.s[i + 1] - t.s[i];
    double u = (x - t.s[i]) / h;
    double d00 = 6 * u * u - 6 * u, d10 = 3 * u * u - 4 * u + 1;
    double d01 = -6 * u * u + 6 * u, d11 = 3 * u * u - 2 * u;
    return (d00 * t.R[i] + d01 * t.R[i + 1]) / h + d10 * t.dR[i] + d11 * t.dR[i + 1];
}

double RevolutionProfile::d2R(double x) const
{
    if (!table_)
        return d2R_(x);
    const Table& t = *table_;
    int i = t.cell(x);
    double u = std::clamp((x - t.s[i]) / (t.s[i + 1] - t.s[i]), 0.0, 1.0);
    return (1 - u) * t.d2R[i] + u * t.d2R[i + 1];
}

RevolutionProfile make_profile(const std::string& kind, const std::map<std::string, double>& params)
{
    auto get = [&](const std::string& key, double def) {
        auto it = params.find(key);
        return it == params.end() ? def : it->second;
    };
    RevolutionProfile p;
    if (kind == "sphere") {
        p = RevolutionProfile::analytic(
            std::numbers::pi, [](double s) { return std::sin(s); },
            [](double s) { return std::cos(s); }, [](double s) { return -std::sin(s); },
            ProfileKind::sphere, "sphere");
    } else if (kind == "scaled-sphere") {
        double a = get("a", 2.0);
        if (!(a > 0.0))
            throw std::invalid_argument("scaled-sphere: a must be positive");
        p = RevolutionProfile::analytic(
            a * std::numbers::pi, [a](double s) { return a * std::sin(s / a); },
            [a](double s) { return std::cos(s / a); },
            [a](double s) { return -std::sin(s / a) / a; }, ProfileKind::custom_analytic,
            "scaled-sphere");
    } else if (kind == "perturbed-sphere") {
        double eps = get("eps", 0.05), c = get("center", 1.0), w = get("width", 0.5);
        if (!(w > 0.0))
            throw std::invalid_argument("perturbed-sphere: width must be positive");
        // b(s) = sin^4(s) exp(-(s-c)^2 / (2w^2)) vanishes to fourth order at both poles
        auto parts = [c, w](double s, double& b, double& b1, double& b2) {
            double sn = std::sin(s), cs = std::cos(s);
            double q = std::pow(sn, 4), q1 = 4 * std::pow(sn, 3) * cs;
            double q2 = 12 * sn * sn * cs * cs - 4 * std::pow(sn, 4);
            double g = std::exp(-(s - c) * (s - c) / (2 * w * w));
            double g1 = -(s - c) / (w * w) * g;
            double g2 = ((s - c) * (s - c) / (w * w * w * w) - 1.0 / (w * w)) * g;
            b = q * g;
            b1 = q1 * g + q * g1;
            b2 = q2 * g + 2 * q1 * g1 + q * g2;
        };
        p = RevolutionProfile::analytic(
            std::numbers::pi,
            [=](double s) {
                double b, b1, b2;
                parts(s, b, b1, b2);
                return std::sin(s) * (1 + eps * b);
            },
            [=](double s) {
                double b, b1, b2;
                parts(s, b, b1, b2);
                return std::cos(s) * (1 + eps * b) + std::sin(s) * eps * b1;
            },
            [=](double s) {
                double b, b1, b2;
                parts(s, b, b1, b2);
                return -std::sin(s) * (1 + eps * b) + 2 * std::cos(s) * eps * b1 +
                       std::sin(s) * eps * b2;
            },
            ProfileKind::custom_analytic, "perturbed-sphere");
    } else {
        throw std::invalid_argument("make_profile: unknown preset '" + kind + "'");
    }
    ValidationReport rep = validate_profile(p);
    if (!rep.pass) {
        std::string msg = "make_profile: preset '" + kind + "' fails validation:";
        for (const auto& c : rep.checks)
            if (!c.pass)
                msg += " " + c.name;
        throw std::invalid_argument(msg);
    }
    equator_data(p);
    return p;
}

RevolutionProfile load_profile_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_profile_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_profile_csv: empty file");
    std::vector<double> s, R;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        std::istringstream ls(line);
        ls.imbue(std::locale::classic());
        double a, b;
        char comma;
        if (!(ls >> a >> comma >> b) || comma != ',')
            throw std::runtime_error("load_profile_csv: malformed row '" + line + "'");
        s.push_back(a);
        R.push_back(b);
    }
    return RevolutionProfile::sampled(std::move(s), std::move(R), path);
}

ValidationReport validate_profile(const RevolutionProfile& p, int grid)
{
    ValidationReport rep;
    const double L = p.L();
    const bool tab = p.is_sampled();
    const double h = p.table_step();
    const double tol0 = tab ? 10 * h * h : 1e-10;
    const double tol1 = tab ? 10 * h : 1e-8;
    auto add = [&](std::string name, double res, double tol) {
        rep.checks.push_back({std::move(name), res, tol, res <= tol});
    };
    add("R(0)=0", std::abs(p.R(0.0)), tol0);
    add("R(L)=0", std::abs(p.R(L)), tol0);
    add("R'(0)=1", std::abs(p.dR(0.0) - 1.0), tol1);
    add("R'(L)=-1", std::abs(p.dR(L) + 1.0), tol1);

    double minR = std::numeric_limits<double>::infinity();
    for (int i = 1; i < grid; ++i)
        minR = std::min(minR, p.R(L * i / grid));
    add("R>0 inside", minR > 0.0 ? 0.0 : -minR + 1.0, 0.0);

    double maxres = 0.0;
    try {
        equator_data(p, grid);
    } catch (const std::exception&) {
        maxres = 1.0;
    }
    add("strict non-degenerate maximum", maxres, 0.0);

    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                           [](const ValidationCheck& c) { return c.pass; });
    return rep;
}

EquatorData equator_data(const RevolutionProfile& p, int grid)
{
    const double L = p.L();
    std::vector<double> s, R;
    for (int i = 0; i <= grid; ++i) {
        s.push_back(L * i / grid);
        R.push_back(p.R(s.back()));
    }
    const int n = static_cast<int>(s.size());
    int imax = static_cast<int>(std::max_element(R.begin() + 1, R.end() - 1) - R.begin());
    double h = L / grid;
    double lo = s[std::max(imax - 1, 0)], hi = s[std::min(imax + 1, n - 1)];
    double s0 = golden_max([&](double x) { return p.R(x); }, lo, hi, 1e-12 * L);
    if (!p.is_sampled()) {
        for (int it = 0; it < 20; ++it) {
            double d2 = p.d2R(s0);
            if (d2 == 0.0)
                break;
            double next = s0 - p.dR(s0) / d2;
            if (!(next > lo && next < hi))
                break;
            bool done = std::abs(next - s0) < 1e-15 * L;
            s0 = next;
            if (done)
                break;
        }
    }
    EquatorData eq;
    eq.s0 = s0;
    eq.Rmax = p.R(s0);
    eq.R2 = p.d2R(s0);
    if (!(eq.Rmax > 0.0))
        throw std::runtime_error("equator_data: nonpositive maximum");
    if (!(eq.R2 < -1e-5))
        throw std::runtime_error("equator_data: degenerate maximum (R''(s0) = " +
                                 std::to_string(eq.R2) + ")");
    // any other grid local maximum at the same height makes the maximum non-strict
    for (int i = 1; i < n - 1; ++i) {
        if (std::abs(s[i] - s0) <= 2 * h)
            continue;
        if (R[i] >= R[i - 1] && R[i] >= R[i + 1] && R[i] >= eq.Rmax * (1 - 1e-9))
            throw std::runtime_error("equator_data: non-strict maximum");
    }
    eq.c0 = std::abs(eq.R2) / (eq.Rmax * eq.Rmax * eq.Rmax);
    return eq;
}

} // namespace lab
