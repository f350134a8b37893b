#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace lab {

// Uniform grid on [lo, hi]^dim, dim 1 or 2, n nodes per axis; node (i, j) has index i + n j.
struct Grid {
    int dim = 1;
    int n = 0;
    double lo = 0.0, hi = 1.0;

    Grid() = default;
    Grid(int dim, int n, double lo = 0.0, double hi = 1.0);
    double h() const { return (hi - lo) / (n - 1); }
    int size() const { return dim == 1 ? n : n * n; }
    Eigen::Vector2d point(int idx) const;
    int index(int i, int j = 0) const { return i + n * j; }
    // distance in nodes to the nearest boundary node
    int depth(int idx) const;
};

using Field = std::vector<double>;
using PointFn = std::function<double(const Eigen::Vector2d&)>;

Field sample(const Grid& g, const PointFn& fn);

// Nodal metric; in 1D only g(0, 0) is used.
struct MetricField {
    Grid grid;
    std::vector<Eigen::Matrix2d> g;
    double eps = 1.0;  // recorded class bounds
    double D = 1.0;

    static MetricField flat(const Grid& grid);
    // Identity plus a few random smooth modes; the class bounds are checked, not assumed.
    static MetricField perturbed(const Grid& grid, double amplitude, std::mt19937_64& rng,
                                 double eps = 0.8, double D = 1.25);
    static MetricField from_function(const Grid& grid,
                                     const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& fn,
                                     double eps, double D);

    double min_eigenvalue() const;
    double max_eigenvalue() const;
    // max over nodes and axes of |g(x + h e_k) - g(x)|_op / h
    double lipschitz() const;
    bool in_class() const;
};

// phi = e^{lambda Psi}, f = 2 lambda^2 e^{lambda Psi} |grad Psi|_g^2.
struct WeightPair {
    Field Psi;
    double lambda = 0.0;
    Field phi;
    Field f;
};

WeightPair convexify(const Field& Psi, const MetricField& metric, double lambda);

struct Subellipticity {
    double minB = 0.0;          // min over nodes of min_X B(X)/|X|^2, exact quadratic form
    double minB_sampled = 0.0;  // over the random directions
    double minE = 0.0;          // min of E/|grad phi|^2
    double boundB = 0.0;        // minima of the analytic lower bounds
    double boundE = 0.0;
    bool dominates = true;      // exact values >= bounds at every node and direction
    int band = 2;               // excluded boundary band, in nodes
};

Subellipticity subellipticity_minima(const WeightPair& w, const MetricField& metric,
                                     int directions, std::uint64_t seed = 1);
Subellipticity subellipticity_minima_serial(const WeightPair& w, const MetricField& metric,
                                            int directions, std::uint64_t seed = 1);

// Smallest lambda on the grid beyond which min(minB, minE) stays positive, refined by
// bisection to rel_tol; throws if the sweep never turns positive.
double critical_lambda(const Field& Psi, const MetricField& metric, double lambda_lo,
                       double lambda_hi, double rel_tol = 1e-4);

struct CarlemanSetup {
    double C0 = 0.0;
    double c_phi = 0.0;  // min{1, 1/min |grad phi|^2}
    double tau0 = 0.0;
    double f_minus_lap_phi = 0.0;  // sup norms on the working region
    double grad_f = 0.0;
};

CarlemanSetup carleman_setup(const WeightPair& w, const MetricField& metric,
                             const Subellipticity& s);

enum class MarginStatus { pass, inconclusive, fail };
std::string to_string(MarginStatus s);

struct CarlemanRow {
    double lambda = 0.0;
    double tau = 0.0;
    double lhs = 0.0;  // scaled by e^{-2 tau max phi}
    double rhs = 0.0;
    double margin = 0.0;
    double minB = 0.0, minE = 0.0;
    MarginStatus status = MarginStatus::fail;
};

// C0/3 (tau^3 ||e^{tau phi} v grad phi||^2 + tau ||e^{tau phi} grad v||^2)
//   <= ||e^{tau phi} Delta_g v||^2 + tau int_boundary e^{2 tau phi} d_nu phi |d_nu v|^2
CarlemanRow carleman_inequality_check(const WeightPair& w, const MetricField& metric,
                                      const CarlemanSetup& setup, const Subellipticity& s,
                                      const Field& v, double tau);

// Discrete L2 residual of e^{tau phi} Delta(e^{-tau phi} u) against its expansion.
double conjugation_identity_check(const Field& phi, const MetricField& metric, const Field& u,
                                  double tau);

// Divergence-form Laplace-Beltrami by centered differences; zero on the outer two layers.
Field laplace_beltrami(const Field& u, const MetricField& metric);

struct UniformityReport {
    double lambda = 0.0;
    double C0 = 0.0;    // half the flat value
    double tau0 = 0.0;  // shared across the sampled metrics
    double minB_flat = 0.0;
    double minB_worst = 0.0;  // over the sampled metrics
    double minE_worst = 0.0;
    int metrics = 0;
    int checks = 0;
    int inconclusive = 0;
    int failures = 0;
    bool pass = false;
};

// Certify (lambda, tau0) on the flat metric with 2x margin (C0 halved, tau0 doubled for
// that C0), then check bumps at tau in {1, 2, 4} x tau0 on random metrics of the class.
UniformityReport uniformity_check(const Grid& grid, const PointFn& Psi, double lambda,
                                  int n_metrics, double amplitude, int bumps_per_metric,
                                  std::mt19937_64& rng);

// Bump with random center and width, supported at least `margin` nodes inside the band.
Field random_bump(const Grid& grid, std::mt19937_64& rng, int margin = 6);

// exp(-1 / (1 - |x - c|^2 / w^2)) inside the ball, 0 outside.
double bump(const Eigen::Vector2d& x, const Eigen::Vector2d& c, double w);

} // namespace lab
