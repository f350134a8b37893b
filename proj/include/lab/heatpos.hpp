#pragma once

#include "lab/geometry.hpp"

#include <functional>
#include <string>
#include <vector>

namespace lab {

// Cell-centered 1D geometry: the interval (R = 1) or a meridian with weight R(s).
struct HeatGeometry {
    std::string name;
    double a = 0.0, b = 1.0;
    std::vector<double> x;       // cell centers
    std::vector<double> volume;  // cell measures int R ds
    std::vector<double> face;    // R at the n + 1 faces; zero flux at both ends
    double h() const { return (b - a) / static_cast<double>(x.size()); }
};

HeatGeometry interval_geometry(int cells, double L = 1.0);
// Measures carry the 2 pi of the rotation.
HeatGeometry meridian_geometry(const RevolutionProfile& p, int cells);

struct HeatTrajectory {
    HeatGeometry geom;
    std::string bc = "neumann";
    std::vector<double> t;
    std::vector<std::vector<double>> u;  // u[step][cell]

    double mass(int step) const;
    double norm2(int step) const;  // squared L2 norm
    // linear in time and space (clamped to the cell centers)
    double value(double time, double x) const;
    std::vector<double> at(double time) const;
};

// Implicit Euler with the Neumann M-matrix; stores every step.
HeatTrajectory solve_heat(const HeatGeometry& geom, const std::vector<double>& u0, double T,
                          double dt);

// RHS - LHS of the Li-Yau inequality at (t1, x), (t2, y).
double li_yau_check(const HeatTrajectory& traj, double alpha, double t1, double t2, double x,
                    double y, double K = 0.0, int n = 1);

struct ObservabilityReport {
    std::string variant;  // "l2" or "pointwise"
    double T = 0.0, eps = 0.0, eta = 0.0;
    double distance = 0.0;  // L(M, omega) or L(M, z0)
    double C_eta = 0.0;     // covering constant
    double lhs = 0.0;       // ||u(T)||^2
    double rhs = 0.0;
    double ratio = 0.0;     // rhs / lhs
    bool pass = false;
};

// ||u(T)||^2 <= C(eta) / (T eps^{2n+2}) e^{(1+eps)^3 (d + eta)^2 / (2T)} int_{(1-eps)T}^T obs
// with C(eta) from a covering by balls of radius eta/3; eta <= 0 selects 5h.
ObservabilityReport positive_observability_check(const HeatTrajectory& traj, double omega_lo,
                                                 double omega_hi, double T, double eps,
                                                 double eta = -1.0);
ObservabilityReport pointwise_observability_check(const HeatTrajectory& traj, double z0,
                                                  double T, double eps, double eta = -1.0);

struct NegativeControl {
    ObservabilityReport nodal;    // sign-changing data observed on its node
    ObservabilityReport shifted;  // same data made positive
    double max_abs_observation = 0.0;
    bool as_predicted = false;    // nodal fails and shifted passes
};

// sin(2 pi x / L) on the interval, observed at its central node.
NegativeControl negative_control_example(int cells, double T, double eps, double dt);

} // namespace lab
