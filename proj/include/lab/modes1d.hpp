#pragma once

#include "lab/geometry.hpp"

#include <string>
#include <vector>

namespace lab {

// One radial mode f(s) of -(1/R)(R f')' + k^2/R^2 f = lambda f.
struct Mode {
    int k = 0;
    int n = 0;
    double lambda = 0.0;
    double h = 0.0;
    std::vector<double> s;  // nodes, s[0] = delta, s.back() = L - delta
    std::vector<double> f;  // normalized: 2 pi sum_i w_i f_i^2 = 1
    std::vector<double> w;  // R(s_i) times trapezoid weight
    std::vector<double> R;  // R(s_i)
    std::vector<double> cum;  // cum[i] = 2 pi int_{s_0}^{s_i} f^2 R ds (trapezoid)

    // Cubic Lagrange interpolation of f, zero outside [s.front(), s.back()].
    double eval(double x) const;
};

struct ModeFamily {
    std::string profile;
    std::vector<Mode> modes;
    int grid_size = 0;
    double delta = 0.0;

    // Mode with given (k, n); throws if absent.
    const Mode& get(int k, int n) const;
};

double default_cutoff(double L, int grid_size);

// Lowest n_max + 1 eigenpairs for angular number k. delta <= 0 selects the default cutoff.
ModeFamily solve_reduced(const RevolutionProfile& p, int k, int n_max, int grid_size,
                         double delta = -1.0);

// All modes of angular number k with lambda < lambda_max (possibly none).
ModeFamily solve_reduced_below(const RevolutionProfile& p, int k, double lambda_max,
                               int grid_size);

// Relative eigenvalue shift of (k, n) when the pole cutoff is halved.
double cutoff_sensitivity(const RevolutionProfile& p, int k, int n, int grid_size);

// Modes for every k in [k_lo, k_hi]; solves run in parallel over k.
ModeFamily solve_family(const RevolutionProfile& p, int k_lo, int k_hi, int n_max,
                        int grid_size);
ModeFamily solve_family_serial(const RevolutionProfile& p, int k_lo, int k_hi, int n_max,
                               int grid_size);

// k^2/Rmax^2 + k sqrt(c0)
double harmonic_prediction(const EquatorData& eq, int k);

// 2 pi int_0^r |f|^2 R ds; the square root is the L^2(B(N, r)) norm.
double ball_norm_sq(const Mode& m, double r);
double ball_norm(const Mode& m, double r);

struct SphereNorm {
    double value = 0.0;            // (c_k^2 pi/(k+1)) sin(r)^{2k+2}/cos(r), squared norm
    double remainder_bound = 0.0;  // tan(r)^2/(2k+2)
    double ck2 = 0.0;
};

// c_k^2 = 1/(2 pi int_0^pi sin^{2k+1}), Wallis form.
double sphere_ck2(int k);
// k^{1/4} / (2^{1/2} pi^{3/4})
double sphere_ck_asymptotic(int k);
SphereNorm sphere_exact_norm(int k, double r);

struct DecayRow {
    double r = 0.0;
    double slope = 0.0;
    double stderr_ = 0.0;
    double dA_Rmax = 0.0;
    double slope_over_log = 0.0;  // slope / |log r|
    bool pass = false;
};

struct DecayReport {
    std::vector<DecayRow> rows;
    bool pass = false;
};

// Regresses -log ball_norm(mode_k, r) on sqrt(lambda_k) over the top half of the n = 0 modes.
DecayReport agmon_decay_check(const ModeFamily& family, const RevolutionProfile& p,
                              const EquatorData& eq, const std::vector<double>& radii,
                              double rel_tol = 0.05);

struct VanishingOrder {
    double D = 0.0;
    double stderr_ = 0.0;
    int order = 0;  // derivatives of order < order vanish
};

// Log-log slope of (r, ||f||_{L^2(B(0,r))}) and the implied vanishing order ceil(D - dim/2 - tol).
VanishingOrder vanishing_order(const std::vector<double>& r, const std::vector<double>& norms,
                               int dim, double tol = 0.1);

void write_family_csv(const ModeFamily& fam, const std::string& path,
                      const std::string& samples_path);

} // namespace lab
