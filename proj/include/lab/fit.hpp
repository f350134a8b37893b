#pragma once

#include <vector>

namespace lab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
    double r2 = 0.0;
    int n = 0;
};

// Ordinary least squares y = slope*x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct LsqFit {
    std::vector<double> coef;
    std::vector<double> stderr_;
    double r2 = 0.0;
    double rms = 0.0;
    int n = 0;
};

// Least squares with design columns cols[j][i]; no implicit intercept.
// r2 is the centered coefficient of determination when `centered`, else uncentered.
LsqFit fit_lsq(const std::vector<std::vector<double>>& cols,
               const std::vector<double>& y, bool centered = true);

// Indices of the top half of x (largest values), at least min_points.
std::vector<int> top_half(const std::vector<double>& x, int min_points = 2);

template <class T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<int>& idx)
{
    std::vector<T> out;
    out.reserve(idx.size());
    for (int i : idx)
        out.push_back(v[i]);
    return out;
}

} // namespace lab
