#include "lab/linalg.hpp"

#include <stdexcept>

namespace lab {

int SymTridiag::count_below(double x) const
{
    const int n = size();
    int count = 0;
    double q = d[0] - x;
    const double tiny = std::numeric_limits<double>::min();
    if (q == 0.0)
        q = -tiny;
    if (q < 0.0)
        ++count;
    for (int i = 1; i < n; ++i) {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if (q == 0.0)
            q = -tiny;
        if (q < 0.0)
            ++count;
    }
    return count;
}

void SymTridiag::gershgorin(double& lo, double& hi) const
{
    const int n = size();
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0)
            r += std::abs(e[i - 1]);
        if (i < n - 1)
            r += std::abs(e[i]);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
}

double SymTridiag::eigenvalue(int idx, double rel_tol) const
{
    if (idx < 0 || idx >= size())
        throw std::out_of_range("SymTridiag::eigenvalue: index");
    double lo, hi;
    gershgorin(lo, hi);
    double scale = std::max(std::abs(lo), std::abs(hi));
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (count_below(mid) > idx)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= rel_tol * std::max(std::abs(mid), 1e-3 * scale))
            break;
    }
    return 0.5 * (lo + hi);
}

} // namespace lab
