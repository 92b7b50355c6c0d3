#pragma once

#include "agesis/demography.hpp"
#include "agesis/kernels.hpp"
#include "agesis/network.hpp"
#include "agesis/threshold.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace agesis {

/// Dense row-major (degree class x age node) matrix.
struct AgeMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    AgeMatrix() = default;
    AgeMatrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}
    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
};

enum class SimMode { full, limiting };

/// Initial data: susceptible level(s) plus an infected age profile.
struct InitialData {
    enum class I0Kind { zero, shifted_gaussian, table, profile };

    /// size 1 broadcasts over all degree classes, else one value per class
    std::vector<double> s0{0.6};
    I0Kind i0_kind = I0Kind::shifted_gaussian;
    /// i0_kind == table: values on the age grid, shared by every class
    std::vector<double> i0_table;
    /// i0_kind == profile: evaluated at the grid nodes, shared by every class
    std::function<double(double)> i0_profile;
};

struct SimulationConfig {
    DegreeDistribution dist;
    InfectivityFunction phi;
    KernelSet kernels;
    double b = 0.07;
    double mu = 0.06;
    double dt = 0.1;
    double t_end = 500.0;
    SimMode mode = SimMode::limiting;
    InitialData initial;
    /// observables recorded every output_stride steps (and at t = 0)
    int output_stride = 10;
    /// full states retained every state_stride steps; 0 disables retention
    int state_stride = 0;
    /// record Theta(tau) profiles alongside observables
    bool record_theta = false;

    /// CFL and consistency checks; throws invalid_parameter on violation.
    void validate() const;
};

struct EpidemicState {
    double t = 0.0;
    std::vector<double> S;
    /// I.at(k-1, j) = I_k(t, tau_j), density per unit age
    AgeMatrix I;
    /// total occupancy N_k(t); tracked in full mode only
    std::vector<double> N;
    /// boundary values Z_k(t) = I_k(t, 0)
    std::vector<double> Z;
    /// limiting mode: demographic fixed point Psi* the recruitment is pinned to
    double psi_star = 0.0;
};

struct ObservableSeries {
    std::vector<double> times;
    /// [record][k-1]
    std::vector<std::vector<double>> susceptible_by_degree;
    std::vector<std::vector<double>> prevalence_by_degree;
    std::vector<std::vector<double>> incidence_by_degree;
    /// population-weighted prevalence sum_k p(k) I_k(t)
    std::vector<double> total_prevalence;
    /// optional Theta(tau_j) snapshots, [record][j]
    std::vector<std::vector<double>> theta_profiles;
    /// retained full states (state_stride > 0), always including t = 0
    std::vector<EpidemicState> states;
    /// terminal state of the run
    EpidemicState final_state;
};

EpidemicState initialize(const SimulationConfig& config);

/// Advance one time step dt: aggregate -> transport -> S update -> boundary.
void step(EpidemicState& state, const SimulationConfig& config);

ObservableSeries run(const SimulationConfig& config);

/// Trapezoid age integral of one class's density: I_k(t) = int I_k(t,tau) dtau.
double prevalence_of(const EpidemicState& state, const SimulationConfig& config, int k);

/// Precomputed pieces of the Volterra functional for a constant-gamma
/// endemic configuration.
struct LyapunovContext {
    std::vector<double> s_star;
    std::vector<double> z_star;
    double w_star = 0.0;
    std::vector<double> pi;
    std::vector<double> h;
};

LyapunovContext make_lyapunov_context(const SimulationConfig& config, double gamma_const);

/// V(state) = sum_k [S*_k g(S_k/S*_k) + c_k int pi I*_k g(I_k/I*_k) dtau];
/// throws diagnostic_unavailable if any needed entry is non-positive.
double lyapunov_value(const EpidemicState& state, const SimulationConfig& config,
                      const LyapunovContext& ctx);

/// V at every retained state; time points where the functional is undefined
/// (non-positive entries) carry NaN.
std::vector<double> lyapunov_trace(const std::vector<EpidemicState>& states,
                                   const SimulationConfig& config, double gamma_const);

/// Per degree class: min over the trailing window of both I_k(t) and S_k(t)
/// exceeds epsilon.
std::vector<bool> persistence_check(const ObservableSeries& series, double epsilon,
                                    double window);

} // namespace agesis
