#include "lab/constants.hpp"

#include "lab/agmon.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace lab;

namespace {

constexpr double pi = std::numbers::pi;

double lam(int N) { return N * N * pi * pi * (1.0 + 1e-12); }

// Custom block with an identity Gram on the whole coordinate range.
SpectralBasis diagonal_basis(std::vector<double> lambdas)
{
    SpectralBasis b;
    b.name = "diagonal";
    SpectralBlock blk;
    blk.lambda = lambdas;
    const int m = static_cast<int>(lambdas.size());
    blk.samples = [m](const Region&) { return MatrixL(MatrixL::Identity(m, m)); };
    b.blocks.push_back(blk);
    return b;
}

// Random search over unit coefficient vectors, then projected-gradient refinement.
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
    const double step = 1.0 / A.diagonal().sum();
    for (int it = 0; it < 200000; ++it) {
        Eigen::VectorXd g = A * best - best.dot(A * best) * best;
        best = (best - step * g).normalized();
    }
    return std::sqrt(std::max(0.0, best.dot(A * best)));
}

} // namespace

TEST_CASE("interval Gram matrix against the closed form")
{
    SpectralBasis b = interval_sine_basis(12);
    const double a = 0.37;
    MatrixL A = gram(b, Region::interval(0.0, a))[0];
    for (int i = 1; i <= 12; ++i)
        for (int j = 1; j <= 12; ++j) {
            double ex = i == j ? a - std::sin(2 * i * pi * a) / (2 * i * pi)
                               : std::sin((i - j) * pi * a) / ((i - j) * pi) -
                                     std::sin((i + j) * pi * a) / ((i + j) * pi);
            CHECK(double(A(i - 1, j - 1)) == doctest::Approx(ex).scale(1.0).epsilon(1e-14));
        }
    MatrixL I = gram(b, b.whole())[0];
    CHECK(double((I - MatrixL::Identity(12, 12)).cwiseAbs().maxCoeff()) <= 1e-14);
}

TEST_CASE("gram: parallel equals serial")
{
    SpectralBasis b = revolution_basis(make_profile("sphere"), 12, 300, 1500);
    auto p = gram(b, Region::interval(0.0, 0.6)), s = gram_serial(b, Region::interval(0.0, 0.6));
    REQUIRE(p.size() == s.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(p[i] == s[i]);
}

TEST_CASE("revolution basis is orthonormal on M")
{
    SpectralBasis b = revolution_basis(make_profile("sphere"), 10, 200, 2000);
    for (const MatrixL& A : gram(b, b.whole()))
        CHECK(double((A - MatrixL::Identity(A.rows(), A.cols())).cwiseAbs().maxCoeff()) <= 1e-8);
}

TEST_CASE("Loc_sigma trivial cases")
{
    SpectralBasis b = interval_sine_basis(20);
    for (int N : {1, 5, 20})
        CHECK(loc_sigma(b, b.whole(), lam(N)) == doctest::Approx(1.0).epsilon(1e-12));
    Region om = Region::interval(0.0, 0.4);
    // one mode in the window: the 1x1 Gram
    CHECK(loc_sigma(b, om, lam(1)) == doctest::Approx(loc_eig(b, om, lam(1))).epsilon(1e-14));
    CHECK(loc_sigma(b, om, lam(1)) ==
          doctest::Approx(std::sqrt(0.4 - std::sin(0.8 * pi) / (2 * pi))).epsilon(1e-13));
    CHECK_THROWS(loc_sigma(b, om, 1.0));
}

TEST_CASE("Loc_sigma against a brute-force oracle")
{
    std::mt19937_64 rng(17);
    SpectralBasis b = interval_sine_basis(6);
    for (double a : {0.5, 0.7}) {
        Region om = Region::interval(0.0, a);
        Eigen::MatrixXd A = gram(b, om)[0].cast<double>();
        for (int N : {3, 6}) {
            double exact = loc_sigma(b, om, lam(N));
            double oracle = brute_force_loc(A.topLeftCorner(N, N), rng);
            CHECK(oracle >= exact - 1e-12);
            CHECK(oracle - exact <= 1e-6);
        }
    }
    // sphere ground states, k <= 6 (block diagonal on a polar cap)
    RevolutionProfile p = make_profile("sphere");
    SpectralBasis s = ground_state_basis(solve_family(p, 1, 6, 0, 3000), p.L());
    Region cap = Region::interval(0.0, 0.6);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
    auto G = gram(s, cap);
    for (int k = 0; k < 6; ++k)
        A(k, k) = double(G[k](0, 0));
    double exact = loc_sigma(s, cap, 43.0);
    double oracle = brute_force_loc(A, rng);
    CHECK(oracle >= exact - 1e-12);
    CHECK(oracle - exact <= 1e-6);
}

TEST_CASE("Loc_sigma is nonincreasing in lambda and nondecreasing in omega (property)")
{
    SpectralBasis b = interval_sine_basis(30);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.05, 0.95);
    for (int t = 0; t < 40; ++t) {
        double a = U(rng), a2 = std::min(1.0, a + 0.1 * U(rng));
        Region om = Region::interval(0.0, a), big = Region::interval(0.0, a2);
        double prev = 1.0;
        for (int N = 1; N <= 12; ++N) {
            double v = loc_sigma(b, om, lam(N));
            CHECK(v <= prev * (1 + 1e-10));
            CHECK(loc_sigma(b, big, lam(N)) >= v * (1 - 1e-10));
            prev = v;
        }
    }
}

TEST_CASE("loc_heat closed forms")
{
    // single mode on M: sqrt((e^{2 l T} - 1)/(2 l))
    SpectralBasis one = diagonal_basis({100.0});
    for (double T : {0.1, 0.2, 0.4})
        CHECK(loc_heat(one, one.whole(), T) ==
              doctest::Approx(std::sqrt(std::expm1(200.0 * T) / 200.0)).epsilon(1e-13));
    // constant mode: sqrt(T)
    SpectralBasis two = diagonal_basis({0.0, 50.0});
    CHECK(loc_heat(two, two.whole(), 0.5) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));
    CHECK_THROWS(loc_heat(two, two.whole(), 0.1));  // lambda_max T < 10
    CHECK_THROWS(loc_heat(two, two.whole(), -1.0));
}

TEST_CASE("heat pencil: closed-form time integral against dense trapezoid")
{
    SpectralBasis b = interval_sine_basis(3);
    MatrixL A = gram(b, Region::interval(0.0, 0.4))[0];
    const double T = 5e-4;
    MatrixL H = heat_matrix(A, b.blocks[0].lambda, T);
    const int n = 401;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = b.blocks[0].lambda[i] + b.blocks[0].lambda[j], q = 0.0;
            for (int p = 0; p < n; ++p) {
                double w = (p == 0 || p == n - 1) ? 0.5 : 1.0;
                q += w * std::exp(s * T * p / (n - 1));
            }
            q *= T / (n - 1) * double(A(i, j));
            CHECK(std::abs(double(H(i, j)) - q) <= 1e-8 * std::abs(q) + 1e-15);
        }
}

TEST_CASE("time-sampled factor reproduces the heat pencil")
{
    SpectralBasis b = interval_sine_basis(4);
    Region om = Region::interval(0.0, 0.5);
    MatrixL A = gram(b, om)[0];
    for (double T : {0.08, 0.12}) {
        MatrixL H = heat_matrix(A, b.blocks[0].lambda, T);
        Eigen::SelfAdjointEigenSolver<MatrixL> es(H);
        double ref = std::sqrt(double(es.eigenvalues()(0)));
        CHECK(loc_heat(b, om, T) == doctest::Approx(ref).epsilon(1e-8));
    }
}

TEST_CASE("curves carry rounding bounds and log10 columns")
{
    SpectralBasis b = interval_sine_basis(40);
    std::vector<double> ls;
    for (int N = 4; N <= 40; N += 2)
        ls.push_back(lam(N));
    LocalizationCurve c = loc_sigma_curve(b, Region::interval(0.0, 0.3), ls);
    REQUIRE(c.floor.size() == ls.size());
    std::vector<double> l10 = c.log10_loc();
    for (std::size_t i = 0; i < ls.size(); ++i) {
        CHECK(c.loc[i] > 0.0);
        CHECK(c.loc[i] <= 1.0);
        CHECK(l10[i] == doctest::Approx(std::log10(c.loc[i])));
    }
    CurveFit f = fit_k_sigma(c);
    CHECK(f.K >= 0.95 * 0.7 / 2);
    LocalizationCurve tiny;
    tiny.param = {1, 2, 3};
    tiny.loc = {0.5, 0.4, 0.3};
    CHECK_THROWS(fit_k_sigma(tiny));
}

TEST_CASE("interval constants and the chain")
{
    SpectralBasis bs = interval_sine_basis(60), bh = interval_sine_basis(200);
    std::vector<double> ls, Ts;
    for (int N = 4; N <= 40; N += 2)
        ls.push_back(lam(N));
    for (double T = 0.02; T <= 0.2 * (1 + 1e-12); T *= 1.3)
        Ts.push_back(T);
    const double a = 0.5;
    Region om = Region::interval(0.0, a);
    CurveFit fs = fit_k_sigma(loc_sigma_curve(bs, om, ls));
    CurveFit fe = fit_k_sigma(loc_eig_curve(bs, om, ls));
    CurveFit fh = fit_k_heat(loc_heat_curve(bh, om, Ts));
    CHECK(fs.K >= 0.95 * (1 - a) / 2);
    CHECK(fh.K >= 0.9 * (1 - a) * (1 - a) / 4);
    CHECK(chain_check(fe, fh, fs).pass);
    // omega = M gives K = 0
    LocalizationCurve whole = loc_sigma_curve(bs, bs.whole(), ls);
    CHECK(fit_k_sigma(whole).K == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("Miller constant")
{
    CHECK(miller_cstar(0.0, 3.0) == doctest::Approx(3.0));
    CHECK(miller_cstar(1.0, 1.0) == doctest::Approx(7.0 + 4.0 * std::sqrt(3.0)).epsilon(1e-15));
    CHECK(miller_cstar(1.0, 0.0) == doctest::Approx(4.0));
    CHECK(miller_cstar(2.0, 9.0) == doctest::Approx(81.0));
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int t = 0; t < 1000; ++t)
        CHECK(miller_identity_residual(std::pow(10.0, U(rng)), std::pow(10.0, U(rng))) <= 1e-12);
}

TEST_CASE("Lambda-mu inequality: stated and corrected first branch")
{
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto logu = [&](double lo, double hi) { return std::exp(std::log(lo) + U(rng) * std::log(hi / lo)); };
    int stated_small = 0, stated_large = 0, corrected = 0, second = 0;
    for (int t = 0; t < 1000; ++t) {
        double L = logu(0.1, 10.0), K = 3.0 * U(rng), mu0 = 5.0 * U(rng), a = logu(0.01, 10.0);
        std::vector<double> grid;
        for (int j = 1; j <= 2000; ++j) {
            double s = j / 2000.0;
            grid.push_back(mu0 + s * s * (50.0 + 10.0 * L));
        }
        if (K > 0.0) {
            double ms = 0.5 * L * (1.0 + std::sqrt(1.0 + 4.0 / (K * L)));
            if (ms > mu0)
                grid.push_back(ms);
        }
        double X = lambda_mu_min_X(L, K, grid) * (1.0 + 1e-12);
        bool ok = lambda_mu_check(L, X, K, mu0, a);
        (mu0 <= 1.0 ? stated_small : stated_large) += !ok;
        corrected += !lambda_mu_check(L, X, K, mu0, a, true);
        second += L + a > mu0 && !ok;
    }
    CHECK(stated_small == 0);
    CHECK(second == 0);
    CHECK(corrected == 0);
    // the stated factor misses mu0: a counterexample with mu0 = 4
    const double L = 2.0, K = 3.0, mu0 = 4.0, a = 1.0;
    double X = (1.0 / L - 1.0 / mu0) * std::exp(-K * mu0) * (1.0 + 1e-12);
    CHECK(1.0 / L <= std::exp(K * 5.0) * X + 1.0 / 5.0);
    CHECK_FALSE(lambda_mu_check(L, X, K, mu0, a));
    CHECK(lambda_mu_check(L, X, K, mu0, a, true));
    CHECK(lambda_mu_check(1.0, 1e300, 1.0, 1.0, 0.5));
}

TEST_CASE("Lambda-mu converse")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 1000; ++t) {
        double K = 3.0 * U(rng), L = 1.0 + 9.0 * U(rng);
        auto F = [K](double mu) { return std::exp(K * mu); };
        double X = (1.0 + U(rng)) / F(L);
        CHECK(lambda_mu_converse(L, X, F, std::pow(10.0, 6.0 * U(rng) - 3.0)));
    }
    CHECK_THROWS(lambda_mu_converse(0.5, 10.0, [](double) { return 1.0; }, 1.0));
}

TEST_CASE("transmutation integral")
{
    CHECK(transmutation_constant() == doctest::Approx(0.383817263995834311).epsilon(1e-12));
    Transmutation t1 = transmutation_integral(1.0, 1.0);
    CHECK(t1.ratio >= t1.C);
    CHECK(t1.ratio <= 10.0 * t1.C);
    Transmutation t4 = transmutation_integral(1.0, 4.0), t16 = transmutation_integral(1.0, 16.0);
    CHECK(t16.ratio / t4.ratio <= 2.0);
    CHECK(t16.ratio / t4.ratio >= 0.5);
    // T int_0^1 e^{-(alpha/T)(1/s + 1/(1-s))} ds at alpha/T = 16
    CHECK(t16.value == doctest::Approx(1.75643863247586037e-29).epsilon(1e-9));
    for (double x = 1.0; x <= 64.0; x *= 1.5)
        for (double T : {0.1, 1.0, 3.0})
            CHECK(transmutation_integral(T, x * T).holds);
    Transmutation deep = transmutation_integral(1.0, 400.0);
    CHECK(std::isfinite(deep.log_value));
    CHECK(deep.log_value >= deep.log_lower_bound);
    CHECK_THROWS(transmutation_integral(1.0, 0.5));
}

TEST_CASE("kernel bound")
{
    CHECK(kernel_bound_eval(0.3, 0.0, 1.0, 2.0, 0.5) == 0.0);
    const double S = 1.5, d = 0.4;
    double alpha = S * S * (1 + d) / d;
    for (double s : {-1.5, -0.7, 0.2, 1.5})
        CHECK(kernel_bound_eval(0.4, s, 1.0, alpha, d) <= std::abs(s) * (1 + 1e-15));
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> U(0.01, 0.99);
    for (int t = 0; t < 200; ++t) {
        double tt = U(rng), s = 3 * U(rng), a = 10 * U(rng), dd = U(rng);
        CHECK(kernel_bound_eval(tt, s, 1.0, 2 * a, dd) <= kernel_bound_eval(tt, s, 1.0, a, dd));
    }
    CHECK_THROWS(kernel_bound_eval(1.5, 1.0, 1.0, 1.0, 0.5));
}

TEST_CASE("heat_from_wave_bound")
{
    CHECK(heat_from_wave_bound(2.0, 0.0, 3.0, 5.0) == doctest::Approx(12.0));
    CHECK(heat_from_wave_bound(1.0, 1.0, 1.0, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("small-ball scaling")
{
    SpectralBasis b = interval_sine_basis(16);
    std::vector<double> ls;
    for (int N = 4; N <= 8; ++N)
        ls.push_back(lam(N));
    ScalingReport r = small_ball_scaling(b, 0.5, {0.0125, 0.025, 0.05, 0.1}, ls);
    CHECK(r.r2 >= 0.95);
    CHECK(r.r2_log_r >= 0.999);
    CHECK(r.envelope >= 1.0);
    CHECK(r.C1 > 0.0);
    CHECK_THROWS(small_ball_scaling(b, 0.5, {0.05, 0.1}, ls));            // radii span < 8x
    CHECK_THROWS(small_ball_scaling(b, 0.5, {0.0125, 0.1}, {ls[0], ls[1]}));  // lambda span < 4x
}
