#pragma once

#include "lab/modes1d.hpp"

#include <vector>

namespace lab {

// J_n(z), n >= 0, z >= 0. Power series for z < 1, Miller backward recurrence otherwise.
double bessel_j(int n, double z);
// Power series; accurate only while z^2/4 is not much larger than n.
double bessel_j_series(int n, double z);
// Periodic trapezoid on (1/pi) int_0^pi cos(n t - z sin t) dt with m points per period.
double bessel_j_trapezoid(int n, double z, int m = 0);

// First positive zero, bracketed in (n, n + 4(n+1)^{1/3} + 4] and bisected to 1e-12.
double bessel_first_zero(int n);

struct WhisperingMode {
    int n = 0;
    double z1 = 0.0;
    double lambda = 0.0;
    double norm2 = 0.0;  // int_0^1 J_n(z1 r)^2 r dr
};

WhisperingMode whispering_mode(int n);
std::vector<WhisperingMode> whispering_modes(int n_lo, int n_hi);
std::vector<WhisperingMode> whispering_modes_serial(int n_lo, int n_hi);

struct BoundPair {
    double value = 0.0;  // |J_n(n / cosh alpha)|
    double bound = 0.0;  // exp(n (tanh alpha - alpha))
};

BoundPair decay_bound_pair(int n, double alpha);

struct DiskDecayOptions {
    double beta = 0.5;            // admissibility r <= 1 - beta n^{-1/3}
    bool lambda_sixth_term = true;  // lambda^{1/6} regressor next to the intercept
    double rel_tol = 0.10;
};

struct DiskDecayReport {
    DecayRow row;
    double beta_max = 0.0;  // largest beta for which the n-range is admissible
    double sixth_coef = 0.0;
    int points = 0;
};

// Regresses -log(sup_{rho<=r}|J_n(z rho)| / ||psi_n||) on sqrt(lambda) = z_{n,1}.
DiskDecayReport disk_decay_check(const std::vector<int>& n_range, double r,
                                 const DiskDecayOptions& opt = {});

} // namespace lab
