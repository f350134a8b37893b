#pragma once

#include <functional>
#include <vector>

namespace lab {

using Fn = std::function<double(double)>;

struct GaussRule {
    std::vector<double> x;  // nodes on [-1,1]
    std::vector<double> w;
};

// Cached Gauss-Legendre rule of order n (Newton on the three-term recurrence).
const GaussRule& gauss_legendre(int n);

// Composite Gauss-Legendre with equal panels.
double integrate_gl(const Fn& f, double a, double b, int panels, int order = 16);

// Nodes/weights of the composite rule, appended to xs/ws.
void composite_nodes(double a, double b, int panels, int order,
                     std::vector<double>& xs, std::vector<double>& ws);

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int evals = 0;
    bool converged = true;
};

// Adaptive Gauss-Kronrod 7/15 with interval bisection.
QuadResult integrate_adaptive(const Fn& f, double a, double b,
                              double abs_tol = 1e-13, double rel_tol = 1e-13,
                              int max_intervals = 4000);

} // namespace lab
