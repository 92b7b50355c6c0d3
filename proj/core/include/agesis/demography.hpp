#pragma once

#include "agesis/network.hpp"

#include <vector>

namespace agesis {

/// Stationary state of the birth-death subsystem. Viable (b > mu) states carry
/// the positive fixed point Psi* and occupancies N*_k = b k Psi* / (mu + b k Psi*);
/// b <= mu is the extinction regime (Psi* = 0, N*_k = 0), a result rather than
/// an error.
struct DemographicEquilibrium {
    double b = 0.0;
    double mu = 0.0;
    double psi_star = 0.0;
    std::vector<double> n_star;
    bool viable = false;
};

/// Root of f(Psi) = 1 - (1/<k>) sum_i b i p(i) / (mu + b i Psi) on (0, 1],
/// by bisection plus one Newton polish. |f(Psi*)| <= tol.
DemographicEquilibrium solve_demography(const DegreeDistribution& dist, double b, double mu,
                                        double tol = 1e-13);

/// Independent route to Psi*: damped fixed-point iteration of
/// Psi <- (1/<k>) sum_i p(i) N_i(Psi). Cross-check oracle for solve_demography.
double solve_demography_fixed_point(const DegreeDistribution& dist, double b, double mu,
                                    double tol = 1e-14);

/// RK4 trajectory of dN_k/dt = b k [1 - N_k] Psi(t) - mu N_k with
/// Psi(t) = (1/<k>) sum_i p(i) N_i(t).
struct DemographyTrajectory {
    std::vector<double> times;
    /// n[m][k-1] = N_k(times[m])
    std::vector<std::vector<double>> n;
    /// largest excursion of any N_k outside [0, 1], reported not clipped
    double max_excursion = 0.0;
};

DemographyTrajectory integrate_demography(const DegreeDistribution& dist, double b, double mu,
                                          std::vector<double> n0, double dt, double t_end);

} // namespace agesis
