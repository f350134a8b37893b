// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [--expect-fail N]...   Exit status 0 iff the failing set equals the
// expected set.

#include "lab/agmon.hpp"
#include "lab/constants.hpp"
#include "lab/diskmodes.hpp"
#include "lab/experiments.hpp"
#include "lab/modes1d.hpp"
#include "lab/quadrature.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace lab;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

fs::path scratch()
{
    static fs::path p = [] {
        std::random_device rd;
        fs::path d = fs::temp_directory_path() / ("lab_acceptance_" + std::to_string(rd()));
        fs::create_directories(d);
        return d;
    }();
    return p;
}

ExperimentOutput experiment(const Json& cfg)
{
    fs::path dir = scratch() / cfg.at("experiment").get<std::string>();
    fs::create_directories(dir);
    std::mt19937_64 rng(1);
    return run_experiment(cfg, dir.string(), rng);
}

// ---------------------------------------------------------------------------

Outcome c1_sphere_exact()
{
    RevolutionProfile p = make_profile("sphere");
    int fails = 0;
    double worst = 0.0;  // |q - exact| / (exact * bound)
    for (int k : {5, 10, 20, 40}) {
        ModeFamily fam = solve_reduced(p, k, 0, 16000);
        for (double r : {0.3, 0.6, 1.2}) {
            SphereNorm ex = sphere_exact_norm(k, r);
            double err = std::abs(ball_norm_sq(fam.get(k, 0), r) - ex.value);
            worst = std::max(worst, err / (ex.value * ex.remainder_bound));
            fails += err > ex.value * ex.remainder_bound;
        }
    }
    return {fails == 0, fmt("12 (k, r) pairs, %d outside the remainder bound, worst err/bound %.3g",
                            fails, worst)};
}

Outcome c2_sphere_eigenvalues()
{
    ModeFamily fam = solve_family(make_profile("sphere"), 1, 20, 0, 4000);
    double worst = 0.0;
    for (int k = 1; k <= 20; ++k)
        worst = std::max(worst, std::abs(fam.get(k, 0).lambda - k * (k + 1.0)) / (k * (k + 1.0)));
    return {worst <= 1e-3, fmt("worst relative error %.3g (tol 1e-3)", worst)};
}

Outcome c3_harmonic()
{
    EquatorData eq = equator_data(make_profile("sphere"));
    double worst = 0.0;
    for (int k = 1; k <= 200; ++k) {
        double ex = k * (k + 1.0);
        worst = std::max(worst, std::abs(harmonic_prediction(eq, k) - ex) / ex);
    }
    const double tol = 4.0 * std::numeric_limits<double>::epsilon();
    return {worst <= tol, fmt("k = 1..200, worst relative error %.3g (tol %.3g)", worst, tol)};
}

Outcome c4_agmon()
{
    RevolutionProfile p = make_profile("sphere");
    EquatorData eq = equator_data(p);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> S(0.01, pi - 0.01), D(0.01, 1.0);
    double ws = 0.0, wd = 0.0;
    for (int i = 0; i < 100; ++i) {
        double s = S(rng);
        ws = std::max(ws, std::abs(agmon_distance(p, eq, s) - agmon_closed_sphere(s)));
        // disk: d_A(r) = int_r^1 sqrt(1/t^2 - 1) dt
        double r = D(rng);
        double q = integrate_adaptive([](double t) { return std::sqrt(std::max(0.0, 1.0 / (t * t) - 1.0)); },
                                      r, 1.0)
                       .value;
        wd = std::max(wd, std::abs(q - agmon_closed_disk(r)));
    }
    return {ws <= 1e-8 && wd <= 1e-8, fmt("worst |diff| sphere %.3g, disk %.3g (tol 1e-8)", ws, wd)};
}

Outcome c5_decay()
{
    RevolutionProfile p = make_profile("sphere");
    EquatorData eq = equator_data(p);
    ModeFamily fam = solve_family(p, 1, 40, 0, 16000);
    std::vector<double> radii = {0.3, 0.6};
    for (int j = 2; j <= 5; ++j)
        radii.push_back(std::ldexp(1.0, -j));
    DecayReport rep = agmon_decay_check(fam, p, eq, radii, 0.05);
    bool ok = true;
    std::ostringstream os;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const DecayRow& r = rep.rows[i];
        if (i < 2) {
            ok = ok && r.slope >= 0.95 * r.dA_Rmax;
            os << fmt("r=%.2f slope/dA %.3f; ", r.r, r.slope / r.dA_Rmax);
        } else {
            ok = ok && r.slope_over_log >= 0.8 && r.slope_over_log <= 1.2;
            os << fmt("2^-%zu slope/|log r| %.3f; ", i, r.slope_over_log);
        }
    }
    return {ok, os.str() + "(need >= 0.95 and [0.8, 1.2])"};
}

Outcome c6_bessel()
{
    int fails = 0, pairs = 0;
    double worst = 0.0;
    for (int n = 5; n <= 60; ++n)
        for (int i = 1; i <= 12; ++i) {
            double a = 0.25 * i;
            BoundPair bp = decay_bound_pair(n, a);
            fails += !(bp.value <= bp.bound);
            ++pairs;
            double z = n / std::cosh(a);
            double jm = bessel_j(n - 1, z), j0 = bessel_j(n, z), jp = bessel_j(n + 1, z);
            double scale = std::max({std::abs(jm), std::abs(j0), std::abs(jp)});
            worst = std::max(worst, std::abs(jm + jp - 2.0 * n / z * j0) / scale);
        }
    return {fails == 0 && worst <= 1e-8,
            fmt("%d pairs, %d violations, recurrence residual %.3g (tol 1e-8)", pairs, fails, worst)};
}

Outcome c7_disk()
{
    std::vector<int> ns;
    for (int n = 5; n <= 60; ++n)
        ns.push_back(n);
    DiskDecayReport rep = disk_decay_check(ns, 0.5, DiskDecayOptions{});
    const double target = 0.450933;
    double rel = std::abs(rep.row.slope - target) / target;
    return {rel <= 0.10, fmt("slope %.5f vs %.6f, relative deviation %.3f (tol 0.10)", rep.row.slope,
                             target, rel)};
}

// Random search over unit vectors, then locally optimal block descent: Rayleigh-Ritz on
// span{c, gradient, previous step}. Plain gradient steps stall when the two smallest
// eigenvalues sit 1e-8 apart.
double brute_force_loc(const Eigen::MatrixXd& A, std::mt19937_64& rng)
{
    const int m = static_cast<int>(A.rows());
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::VectorXd best(m);
    double bestq = INFINITY;
    for (int t = 0; t < 100000; ++t) {
        Eigen::VectorXd c(m);
        for (int i = 0; i < m; ++i)
            c(i) = N(rng);
        c.normalize();
        double q = c.dot(A * c);
        if (q < bestq) {
            bestq = q;
            best = c;
        }
    }
    if (m == 1)
        return std::sqrt(A(0, 0));
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(m);
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXd g = A * best - best.dot(A * best) * best;
        if (g.norm() <= 1e-300)
            break;
        Eigen::MatrixXd S(m, prev.norm() > 0.0 && m > 2 ? 3 : 2);
        S.col(0) = best;
        S.col(1) = g;
        if (S.cols() == 3)
            S.col(2) = prev;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(S);
        Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, S.cols());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q.transpose() * A * Q);
        Eigen::VectorXd next = (Q * es.eigenvectors().col(0)).normalized();
        double qn = next.dot(A * next);
        if (!(qn < bestq))
            break;
        prev = next - best;
        best = next;
        bestq = qn;
    }
    return std::sqrt(std::max(0.0, bestq));
}

Outcome c8_localization()
{
    std::mt19937_64 rng(8);
    std::ostringstream os;
    bool ok = true;

    SpectralBasis b6 = interval_sine_basis(6);
    double oracle_gap = 0.0;
    for (double a : {0.3, 0.5, 0.7}) {
        Region om = Region::interval(0.0, a);
        Eigen::MatrixXd A = gram(b6, om)[0].cast<double>();
        for (int N = 1; N <= 6; ++N) {
            double exact = loc_sigma(b6, om, N * N * pi * pi * (1.0 + 1e-12));
            double o = brute_force_loc(A.topLeftCorner(N, N), rng);
            oracle_gap = std::max(oracle_gap, std::abs(o - exact));
        }
    }
    ok = ok && oracle_gap <= 1e-6;
    os << fmt("oracle gap %.2g; ", oracle_gap);

    SpectralBasis b = interval_sine_basis(40);
    int mono_fail = 0;
    double whole = 0.0;
    for (double a : {0.2, 0.45, 0.8}) {
        double prev = INFINITY;
        for (int N = 1; N <= 40; ++N) {
            double v = loc_sigma(b, Region::interval(0.0, a), N * N * pi * pi * (1.0 + 1e-12));
            mono_fail += v > prev * (1.0 + 1e-12);
            prev = v;
        }
    }
    for (int N : {1, 10, 40})
        whole = std::max(whole, std::abs(loc_sigma(b, b.whole(), N * N * pi * pi * (1.0 + 1e-12)) - 1.0));
    ok = ok && mono_fail == 0 && whole <= 1e-12;
    os << fmt("monotonicity violations %d; |Loc(M) - 1| %.2g; ", mono_fail, whole);

    ExperimentOutput iv = experiment({{"experiment", "loc-constants"}, {"geometry", "interval"}});
    for (const Json& r : iv.report.at("rows")) {
        double a = r.at("a"), ks = r.at("sigma").at("K"), kh = r.at("heat").at("K");
        bool chain = r.at("chain").at("lower").get<bool>() && r.at("chain").at("upper").get<bool>();
        bool row = ks >= 0.95 * (1.0 - a) / 2.0 && kh >= 0.9 * (1.0 - a) * (1.0 - a) / 4.0 && chain;
        ok = ok && row;
        os << fmt("a=%.1f K_sigma %.3f K_heat %.3f chain %s; ", a, ks, kh, chain ? "ok" : "FAIL");
    }
    ExperimentOutput sp = experiment({{"experiment", "loc-constants"}, {"geometry", "sphere"}});
    for (const Json& r : sp.report.at("rows")) {
        bool chain = r.at("chain").at("lower").get<bool>() && r.at("chain").at("upper").get<bool>();
        ok = ok && chain;
        os << fmt("sphere r=%.1f chain %s; ", r.at("r").get<double>(), chain ? "ok" : "FAIL");
    }
    std::string d = os.str();
    return {ok, d.substr(0, d.size() - 2)};
}

Outcome c9_small_ball()
{
    std::vector<double> lams;
    for (int N = 4; N <= 8; ++N)
        lams.push_back(N * N * pi * pi * (1.0 + 1e-12));
    ScalingReport rep = small_ball_scaling(interval_sine_basis(16), 0.5, {0.0125, 0.025, 0.05, 0.1}, lams);
    return {rep.r2 >= 0.95, fmt("R^2 %.4f (tol 0.95), C1 %.3f, C2 %.3f", rep.r2, rep.C1, rep.C2)};
}

Outcome c10_algebra()
{
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto logu = [&](double lo, double hi) { return std::exp(std::log(lo) + U(rng) * std::log(hi / lo)); };
    double miller = 0.0;
    for (int i = 0; i < 1000; ++i)
        miller = std::max(miller, miller_identity_residual(logu(1e-3, 1e3), logu(1e-3, 1e3)));

    int stated = 0, corrected = 0;
    for (int i = 0; i < 1000; ++i) {
        double L = logu(0.1, 10.0), K = 3.0 * U(rng), mu0 = 5.0 * U(rng), a = logu(0.01, 10.0);
        std::vector<double> grid;
        for (int j = 1; j <= 4000; ++j) {
            double s = j / 4000.0;
            grid.push_back(mu0 + s * s * (50.0 + 10.0 * L));
        }
        if (K > 0.0) {
            double ms = 0.5 * L * (1.0 + std::sqrt(1.0 + 4.0 / (K * L)));
            if (ms > mu0)
                grid.push_back(ms);
        }
        double X = lambda_mu_min_X(L, K, grid) * (1.0 + 1e-12);
        stated += !lambda_mu_check(L, X, K, mu0, a);
        corrected += !lambda_mu_check(L, X, K, mu0, a, true);
    }
    int trans = 0;
    for (double x = 1.0; x <= 64.0 * (1.0 + 1e-12); x *= std::sqrt(2.0))
        trans += !transmutation_integral(1.0, x).holds;
    bool ok = miller <= 1e-12 && stated == 0 && trans == 0;
    return {ok, fmt("Miller residual %.2g (tol 1e-12); lambda-mu failures %d/1000 with the stated "
                    "factor, %d/1000 with the corrected factor; transmutation failures %d",
                    miller, stated, corrected, trans)};
}

Outcome c11_carleman()
{
    ExperimentOutput r = experiment({{"experiment", "carleman"}});
    const Json& u = r.report.at("uniformity");
    int flat_fail = r.report.at("flat_failures"), uni_fail = u.at("failures");
    int flat_inc = r.report.at("flat_inconclusive"), uni_inc = u.at("inconclusive");
    bool ok = r.pass && flat_fail == 0 && uni_fail == 0;
    return {ok, fmt("lambda* %.3f; flat %d checks, %d fail, %d inconclusive; %d metrics, %d checks, "
                    "%d fail, %d inconclusive",
                    r.report.at("lambda_star").get<double>(), r.report.at("flat_checks").get<int>(),
                    flat_fail, flat_inc, u.at("metrics").get<int>(), u.at("checks").get<int>(),
                    uni_fail, uni_inc)};
}

Outcome c12_heatpos()
{
    ExperimentOutput r = experiment({{"experiment", "heatpos"}});
    const Json& rep = r.report;
    const Json& nc = rep.at("negative_control");
    return {r.pass, fmt("mass drift %.2g (tol 1e-10), min u %.2g, Li-Yau %d/%d, observability at "
                        "T = 0.05, 0.1 %s, nodal control fails %s, shifted control passes %s",
                        rep.at("mass_drift").get<double>(), rep.at("min_u").get<double>(),
                        rep.at("li_yau_violations").get<int>(), rep.at("li_yau_trials").get<int>(),
                        r.pass ? "pass" : "see csv", nc.at("nodal_pass").get<bool>() ? "no" : "yes",
                        nc.at("shifted_pass").get<bool>() ? "yes" : "no")};
}

} // namespace

int main(int argc, char** argv)
{
    std::set<int> expected;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--expect-fail" && i + 1 < argc) {
            expected.insert(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: acceptance [--expect-fail N]...\n");
            return 1;
        }
    }

    const std::vector<Criterion> criteria = {
        {1, "sphere exact formula", 5, c1_sphere_exact},
        {2, "sphere eigenvalues", 30, c2_sphere_eigenvalues},
        {3, "harmonic prediction", 1, c3_harmonic},
        {4, "Agmon oracle", 5, c4_agmon},
        {5, "decay slopes", 120, c5_decay},
        {6, "Bessel bound", 10, c6_bessel},
        {7, "disk slope", 60, c7_disk},
        {8, "localization machinery", 180, c8_localization},
        {9, "small-ball scaling", 120, c9_small_ball},
        {10, "constant algebra", 30, c10_algebra},
        {11, "Carleman", 300, c11_carleman},
        {12, "positive solutions", 120, c12_heatpos},
    };

    std::set<int> failed;
    for (const Criterion& c : criteria) {
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = secs < c.limit_s;
        bool pass = o.pass && in_time;
        if (!pass)
            failed.insert(c.id);
        const char* verdict = pass ? "PASS" : (expected.count(c.id) ? "FAIL (expected)" : "FAIL");
        std::printf("[%s] %2d %s: %s; %.2fs (limit %.0fs%s)\n", verdict, c.id, c.name,
                    o.detail.c_str(), secs, c.limit_s, in_time ? "" : ", exceeded");
        std::fflush(stdout);
    }
    fs::remove_all(scratch());

    std::printf("%zu/%zu criteria pass\n", criteria.size() - failed.size(), criteria.size());
    if (failed == expected)
        return 0;
    for (int id : expected)
        if (!failed.count(id))
            std::printf("criterion %d was expected to fail but passed\n", id);
    return 2;
}
