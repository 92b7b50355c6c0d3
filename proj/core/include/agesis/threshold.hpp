#pragma once

#include "agesis/demography.hpp"
#include "agesis/kernels.hpp"
#include "agesis/network.hpp"

#include <optional>
#include <vector>

namespace agesis {

/// Positive steady state: boundary incidences Z*_k, susceptibles S*_k, and
/// the age profile I*_k(tau_j) = Z*_k H(tau_j). w_star is the phi-weighted
/// incidence aggregate W = sum_i phi(i) p(i) Z*_i the scalar solve runs on.
struct EndemicEquilibrium {
    std::vector<double> s_star;
    std::vector<double> z_star;
    /// i_star_profile[k-1][j] = I*_k(tau_j)
    std::vector<std::vector<double>> i_star_profile;
    double w_star = 0.0;
    /// worst relative residual of the two steady-state relations
    double residual = 0.0;
};

struct EquilibriumReport {
    double r0 = 0.0;
    double k1_0 = 0.0;
    double k2_0 = 0.0;
    double psi_star = 0.0;
    std::vector<double> s0;
    std::optional<EndemicEquilibrium> endemic;
    std::optional<double> characteristic_root;
};

/// S0_k = b k (1 - N*_k) Psi* / mu; algebraically equal to N*_k.
std::vector<double> disease_free_equilibrium(const DemographicEquilibrium& dem,
                                             const DegreeDistribution& dist);

/// R0 = K1(0)/<k> * sum_i i phi(i) p(i) S0_i (ascending i).
double basic_reproduction_number(const DegreeDistribution& dist, const InfectivityFunction& phi,
                                 const KernelSet& ks, const std::vector<double>& s0);

/// Positive steady state when R0 > 1, absent otherwise. Solved by reducing
/// the coupled relations to one scalar unknown W and bracketed bisection.
std::optional<EndemicEquilibrium> endemic_equilibrium(const DegreeDistribution& dist,
                                                      const InfectivityFunction& phi,
                                                      const KernelSet& ks,
                                                      const DemographicEquilibrium& dem);

/// G(lambda) = K1(lambda)/<k> * sum_i i phi(i) p(i) S0_i; G(0) = R0.
double characteristic_g(const DegreeDistribution& dist, const InfectivityFunction& phi,
                        const KernelSet& ks, const std::vector<double>& s0, double lambda);

/// Unique real lambda* > 0 with G(lambda*) = 1 when G(0) > 1; absent when
/// G(0) < 1 (stability diagnostic).
std::optional<double> find_characteristic_root(const DegreeDistribution& dist,
                                               const InfectivityFunction& phi, const KernelSet& ks,
                                               const std::vector<double>& s0);

/// Convenience bundle used by the CLI.
EquilibriumReport make_equilibrium_report(const DegreeDistribution& dist,
                                          const InfectivityFunction& phi, const KernelSet& ks,
                                          const DemographicEquilibrium& dem);

} // namespace agesis
