#pragma once

#include "lab/geometry.hpp"

#include <string>
#include <vector>

namespace lab {

// d_A(s) = | int_{s0}^{s} sqrt(1/R(y)^2 - 1/R(s0)^2) dy |, s in (0, L).
double agmon_distance(const RevolutionProfile& p, const EquatorData& eq, double s,
                      double tol = 1e-13);
double agmon_distance(const RevolutionProfile& p, double s);

// |log sin s| on (0, pi).
double agmon_closed_sphere(double s);
// alpha - tanh(alpha) with alpha = arccosh(1/r), r in (0, 1].
double agmon_closed_disk(double r);
// -sqrt(1/r^2 - 1)
double agmon_closed_disk_derivative(double r);

// d_A(s) + log(s) for s < L/10, d_A(s) + log(L - s) for s > 9L/10.
double agmon_asymptote_residual(const RevolutionProfile& p, const EquatorData& eq, double s);

struct AgmonTable {
    std::vector<double> s;
    std::vector<double> dA;
    std::vector<double> dAprime;
    // d_A + log(s) left of s0, d_A + log(L - s) right of it
    std::vector<double> residual;
    double s0 = 0.0;
    double h = 0.0;
};

// Uniform interior grid s_i = L i / n, i = 1..n-1.
AgmonTable agmon_table(const RevolutionProfile& p, const EquatorData& eq, int n);
AgmonTable agmon_table_serial(const RevolutionProfile& p, const EquatorData& eq, int n);

void write_agmon_csv(const AgmonTable& t, const std::string& path);

} // namespace lab
