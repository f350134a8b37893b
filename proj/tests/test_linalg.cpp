#include "lab/linalg.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace lab;

TEST_CASE("Sturm bisection on the discrete Laplacian")
{
    const int n = 40;
    SymTridiag T;
    T.d.assign(n, 2.0);
    T.e.assign(n - 1, -1.0);
    for (int k = 0; k < n; ++k) {
        double exact = 2.0 - 2.0 * std::cos((k + 1) * std::numbers::pi / (n + 1));
        CHECK(T.eigenvalue(k) == doctest::Approx(exact).epsilon(1e-13));
    }
    CHECK(T.count_below(0.0) == 0);
    CHECK(T.count_below(4.0) == n);
    CHECK(T.count_below(2.0) == n / 2);
    double lo, hi;
    T.gershgorin(lo, hi);
    CHECK(lo <= 0.0);
    CHECK(hi >= 4.0);
}

TEST_CASE("Sturm counts match a dense solver (random tridiagonals)")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const int n = 5 + t;
        SymTridiag T;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            T.d.push_back(N(rng));
            A(i, i) = T.d.back();
        }
        for (int i = 0; i + 1 < n; ++i) {
            T.e.push_back(N(rng));
            A(i, i + 1) = A(i + 1, i) = T.e.back();
        }
        Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues();
        for (int k = 0; k < n; ++k)
            CHECK(T.eigenvalue(k) == doctest::Approx(ev(k)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("one-sided Jacobi singular values")
{
    std::mt19937_64 rng(9);
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXd G(12, 5);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 5; ++j)
            G(i, j) = N(rng);
    std::vector<double> s = jacobi_singular_values<double>(G);
    Eigen::VectorXd ref = Eigen::JacobiSVD<Eigen::MatrixXd>(G).singularValues();
    for (int j = 0; j < 5; ++j)
        CHECK(s[j] == doctest::Approx(ref(4 - j)).epsilon(1e-13));

    // column grading: relative accuracy of the tiny singular value
    Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(6, 3))
                            .householderQ() * Eigen::MatrixXd::Identity(6, 3);
    Eigen::Vector3d scale(1.0, 1e-20, 1e-40);
    Eigen::MatrixXd Gs = Q * scale.asDiagonal();
    std::vector<double> sg = jacobi_singular_values<double>(Gs);
    CHECK(sg[0] == doctest::Approx(1e-40).epsilon(1e-12));
    CHECK(sg[1] == doctest::Approx(1e-20).epsilon(1e-12));
    CHECK(sg[2] == doctest::Approx(1.0).epsilon(1e-12));
}
