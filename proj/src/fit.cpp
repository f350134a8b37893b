#include "lab/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lab {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("fit_line: size mismatch");
    const int n = static_cast<int>(x.size());
    if (n < 2)
        throw std::invalid_argument("fit_line: need at least two points");
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0)
        throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = y[i] - f.slope * x[i] - f.intercept;
        sse += r * r;
    }
    if (n > 2) {
        double s2 = sse / (n - 2);
        f.slope_stderr = std::sqrt(s2 / sxx);
        f.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return f;
}

LsqFit fit_lsq(const std::vector<std::vector<double>>& cols,
               const std::vector<double>& y, bool centered)
{
    const int p = static_cast<int>(cols.size());
    const int n = static_cast<int>(y.size());
    if (p == 0 || n <= p)
        throw std::invalid_argument("fit_lsq: need more points than coefficients");
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        b(i) = y[i];
        for (int j = 0; j < p; ++j) {
            if (static_cast<int>(cols[j].size()) != n)
                throw std::invalid_argument("fit_lsq: column size mismatch");
            X(i, j) = cols[j][i];
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < p)
        throw std::runtime_error("fit_lsq: rank-deficient design");
    Eigen::VectorXd c = qr.solve(b);
    Eigen::VectorXd r = b - X * c;
    double sse = r.squaredNorm();
    double my = centered ? b.mean() : 0.0;
    double sst = (b.array() - my).square().sum();

    LsqFit f;
    f.n = n;
    f.coef.assign(c.data(), c.data() + p);
    Eigen::MatrixXd cov = (X.transpose() * X).inverse() * (sse / (n - p));
    for (int j = 0; j < p; ++j)
        f.stderr_.push_back(std::sqrt(std::max(0.0, cov(j, j))));
    f.r2 = sst > 0.0 ? 1.0 - sse / sst : 1.0;
    f.rms = std::sqrt(sse / n);
    return f;
}

std::vector<int> top_half(const std::vector<double>& x, int min_points)
{
    const int n = static_cast<int>(x.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return x[a] < x[b]; });
    int keep = std::max(std::min(min_points, n), (n + 1) / 2);
    std::vector<int> out(idx.end() - keep, idx.end());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace lab
