#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace lab {

using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Symmetric tridiagonal matrix: diagonal d[0..n), off-diagonal e[0..n-1).
struct SymTridiag {
    std::vector<double> d;
    std::vector<double> e;

    int size() const { return static_cast<int>(d.size()); }
    // Number of eigenvalues strictly below x (Sturm sequence / LDL^T inertia).
    int count_below(double x) const;
    void gershgorin(double& lo, double& hi) const;
    // idx-th smallest eigenvalue (0-based) by bisection.
    double eigenvalue(int idx, double rel_tol = 4e-16) const;
};

// Singular values of G by one-sided (Hestenes) Jacobi, ascending.
// Relative accuracy is retained for column-graded G.
template <class T>
std::vector<T> jacobi_singular_values(Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> G,
                                      int max_sweeps = 60)
{
    const int n = static_cast<int>(G.cols());
    const T tol = std::numeric_limits<T>::epsilon() * T(G.rows());
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int i = 0; i < n - 1; ++i) {
            for (int j = i + 1; j < n; ++j) {
                T a = G.col(i).squaredNorm();
                T b = G.col(j).squaredNorm();
                T c = G.col(i).dot(G.col(j));
                if (c == T(0) || std::abs(c) <= tol * std::sqrt(a * b))
                    continue;
                rotated = true;
                T zeta = (b - a) / (T(2) * c);
                T t = (zeta >= T(0) ? T(1) : T(-1)) /
                      (std::abs(zeta) + std::sqrt(T(1) + zeta * zeta));
                T cs = T(1) / std::sqrt(T(1) + t * t);
                T sn = cs * t;
                for (int r = 0; r < G.rows(); ++r) {
                    T gi = G(r, i), gj = G(r, j);
                    G(r, i) = cs * gi - sn * gj;
                    G(r, j) = sn * gi + cs * gj;
                }
            }
        }
        if (!rotated)
            break;
    }
    std::vector<T> s(n);
    for (int j = 0; j < n; ++j)
        s[j] = G.col(j).norm();
    std::sort(s.begin(), s.end());
    return s;
}

} // namespace lab
