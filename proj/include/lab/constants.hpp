#pragma once

#include "lab/linalg.hpp"
#include "lab/modes1d.hpp"

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace lab {

// Observation region: union of coordinate intervals (meridian s, or x on an interval).
struct Region {
    std::vector<std::pair<double, double>> parts;

    static Region interval(double lo, double hi);
    // (x0 - r, x0 + r) clipped to [a, b]
    static Region ball(double x0, double r, double a, double b);
    double measure() const;
};

// Modes that a rotation-invariant region cannot couple to other blocks.
struct SpectralBlock {
    int label = 0;                // angular number for revolution bases
    std::vector<double> lambda;   // ascending
    // Square-root-weighted samples on a quadrature of the region: F^T F = Gram.
    std::function<MatrixL(const Region&)> samples;
};

struct SpectralBasis {
    std::string name;
    double a = 0.0, b = 1.0;  // coordinate range of M
    std::vector<SpectralBlock> blocks;

    Region whole() const { return Region::interval(a, b); }
    double lambda_max() const;
    int dimension() const;
};

// sqrt(2/L) sin(j pi x / L), j = 1..n, Dirichlet on (0, L).
SpectralBasis interval_sine_basis(int n_modes, double L = 1.0);
// Blocks by angular number k from solver modes on the meridian.
SpectralBasis revolution_basis(const RevolutionProfile& p, int k_max, double lambda_max,
                               int grid_size);
// Only the n = 0 modes (one per k), the sphere basis of the localization examples.
SpectralBasis ground_state_basis(const ModeFamily& fam, double L);

// Gram matrices A_ij = int_omega phi_i phi_j, one per block; parallel over blocks.
std::vector<MatrixL> gram(const SpectralBasis& basis, const Region& omega);
std::vector<MatrixL> gram_serial(const SpectralBasis& basis, const Region& omega);

// inf of ||u||_omega / ||u||_M over span{phi_j : lambda_j <= lambda}
double loc_sigma(const SpectralBasis& basis, const Region& omega, double lambda);
// inf of ||phi_j||_omega over single modes with lambda_j <= lambda
double loc_eig(const SpectralBasis& basis, const Region& omega, double lambda);
// inf of ||e^{t Delta} u0||_{L^2((0,T) x omega)} / ||e^{T Delta} u0||
// Computed from a time-sampled square-root factor; modes above lambda_cap are dropped.
double loc_heat(const SpectralBasis& basis, const Region& omega, double T,
                double lambda_cap = std::numeric_limits<double>::infinity());

// Heat pencil entries A_ij expm1((l_i + l_j) T)/(l_i + l_j) for one block.
MatrixL heat_matrix(const MatrixL& A, const std::vector<double>& lambda, double T);

struct CurveFit {
    double K = 0.0;
    double intercept = 0.0;
    double stderr_ = 0.0;
    int window = 0;
};

struct LocalizationCurve {
    enum class Kind { lambda, time };
    Kind kind = Kind::lambda;
    std::vector<double> param;
    std::vector<double> loc;
    // Rounding bound per point; the fits keep points above 10x this.
    std::vector<double> floor;
    CurveFit fit;

    std::vector<double> log10_loc() const;
};

LocalizationCurve loc_sigma_curve(const SpectralBasis& basis, const Region& omega,
                                  const std::vector<double>& lambdas);
LocalizationCurve loc_eig_curve(const SpectralBasis& basis, const Region& omega,
                                const std::vector<double>& lambdas);
LocalizationCurve loc_heat_curve(const SpectralBasis& basis, const Region& omega,
                                 const std::vector<double>& times, double cap_factor = 40.0);

// Slope of -log Loc against sqrt(lambda) over the top half of the lambda range.
// Points within 10x of their rounding bound are dropped first.
CurveFit fit_k_sigma(const LocalizationCurve& c);
// Slope of -log Loc against 1/T over the top half of the 1/T range.
CurveFit fit_k_heat(const LocalizationCurve& c);

struct ChainCheck {
    double K_eig = 0.0, K_heat = 0.0, K_sigma = 0.0;
    double slack = 0.0;  // 3 x combined standard error
    bool lower = false;  // K_eig^2/4 <= K_heat + slack
    bool upper = false;  // K_heat <= 4 K_sigma^2 + slack
    bool pass = false;
};

ChainCheck chain_check(const CurveFit& eig, const CurveFit& heat, const CurveFit& sigma);

// (a + sqrt b + sqrt(a^2 + 2 a sqrt b))^2
double miller_cstar(double a, double b);
// |4 b^2 (sqrt(a + 2 sqrt b) - sqrt a)^{-4} - c*| / c*, a > 0
double miller_identity_residual(double a, double b);

double heat_from_wave_bound(double S, double Kwave, double alpha1, double alpha2);

// Factor F with the conclusion 1 <= F X.
double lambda_mu_factor(double Lambda, double K, double mu0, double alpha);
// Same with the first branch taken at mu = mu0 exactly: mu0 (mu0 - alpha)/alpha e^{K mu0}.
// The stated factor misses the mu0 and fails once mu0 > 1.
double lambda_mu_factor_corrected(double Lambda, double K, double mu0, double alpha);
// Conclusion for given alpha, assuming the hypothesis holds for all mu > mu0.
bool lambda_mu_check(double Lambda, double X, double K, double mu0, double alpha,
                     bool corrected = false);
// Smallest X with 1/Lambda <= e^{K mu} X + 1/mu on the given mu grid.
double lambda_mu_min_X(double Lambda, double K, const std::vector<double>& mu_grid);
// Second part: Lambda >= 1 and 1 <= F(Lambda) X give 1/Lambda <= F(mu) X + 1/mu.
bool lambda_mu_converse(double Lambda, double X, const std::function<double(double)>& F,
                        double mu);

struct Transmutation {
    double value = 0.0;  // may underflow; log_value is authoritative
    double lower_bound = 0.0;
    double log_value = 0.0;
    double log_lower_bound = 0.0;
    double ratio = 0.0;  // value / (T (T/alpha)^{1/2} e^{-4 alpha/T})
    double C = 0.0;      // calibrated at (T, alpha) = (1, 1)
    bool holds = false;
};

Transmutation transmutation_integral(double T, double alpha);
double transmutation_constant();

double kernel_bound_eval(double t, double s, double T, double alpha, double delta);

struct ScalingReport {
    std::vector<double> r, lambda, minus_log_loc;
    double C1 = 0.0, C2 = 0.0;
    double r2 = 0.0;           // uncentered, the convention for a model without intercept
    double r2_centered = 0.0;
    double r2_log_r = 0.0;     // worst R^2 of -log Loc against log(1/r) at fixed lambda
    double envelope = 0.0;  // max data/model, the factor making the model an upper envelope
    double marginal_sqrt_lambda_slope = 0.0;  // at the smallest r
    double marginal_log_r_slope = 0.0;        // at the largest lambda
};

ScalingReport small_ball_scaling(const SpectralBasis& basis, double x0,
                                 const std::vector<double>& radii,
                                 const std::vector<double>& lambdas);

} // namespace lab
