#pragma once

#include <vector>

namespace agesis {

/// Infection-age kernel: the transmission rate beta(tau) or recovery rate
/// gamma(tau). Closed-form families evaluate anywhere; tabulated kernels are
/// samples on the age grid (linearly interpolated between nodes).
class AgeKernel {
public:
    enum class Family { constant, rational_decay, parabolic, tabulated };

    static AgeKernel constant(double c);
    /// 1 / (1 + q tau), q > 0
    static AgeKernel rational_decay(double q);
    /// tau (T - tau) / s on [0, T], 0 outside
    static AgeKernel parabolic(double T, double s);
    /// samples on the age grid tau_j = j * dtau, j = 0..J
    static AgeKernel tabulated(std::vector<double> samples);

    Family family() const { return family_; }
    bool is_constant() const { return family_ == Family::constant; }
    double constant_value() const { return c_; }
    double q() const { return q_; }
    double T() const { return T_; }
    double s() const { return s_; }
    const std::vector<double>& samples() const { return samples_; }

    /// Closed-form families only; tabulated kernels are evaluated by
    /// KernelSet against its grid.
    double eval(double tau) const;

private:
    AgeKernel() = default;
    Family family_ = Family::constant;
    double c_ = 0.0, q_ = 0.0, T_ = 0.0, s_ = 0.0;
    std::vector<double> samples_;
};

/// Age grid together with beta, gamma, the survival function
/// H(tau) = exp(-mu tau - int_0^tau gamma) and the transforms
/// K1(lambda) = int beta e^{-lambda tau} H, K2(lambda) = int gamma e^{-lambda tau} H.
///
/// The grid is uniform with step dtau on [0, tau_max]. Transform quadratures
/// run on an internally refined copy of the grid (refine subcells per age
/// cell) so their error is well below the age-grid truncation of the
/// simulator; grid-level vectors are the restriction of the refined ones.
/// Immutable after construction.
class KernelSet {
public:
    KernelSet(AgeKernel beta, AgeKernel gamma, double mu, double tau_max, double dtau,
              int refine = 16);

    double mu() const { return mu_; }
    double dtau() const { return dtau_; }
    double tau_max() const { return tau_max_; }
    /// number of age cells J; grid nodes are 0..J
    int cells() const { return cells_; }
    double tau(int j) const { return dtau_ * j; }

    const AgeKernel& beta() const { return beta_; }
    const AgeKernel& gamma() const { return gamma_; }
    const std::vector<double>& beta_grid() const { return beta_grid_; }
    const std::vector<double>& gamma_grid() const { return gamma_grid_; }
    const std::vector<double>& survival() const { return H_grid_; }
    const std::vector<double>& cumulative_gamma() const { return cumgamma_grid_; }

    /// K1(lambda) = int_0^tau_max beta(tau) e^{-lambda tau} H(tau) dtau
    double k1(double lambda) const;
    /// K2(lambda) = int_0^tau_max gamma(tau) e^{-lambda tau} H(tau) dtau
    double k2(double lambda) const;

    /// pi(tau_j) = int_{tau_j}^{tau_max} beta(xi) e^{-(mu+gamma)(xi-tau_j)} dxi,
    /// defined for constant gamma only (reduced system diagnostic).
    std::vector<double> pi_kernel(double gamma_const) const;

private:
    double integrate_refined(const std::vector<double>& weight_fine, double lambda) const;

    AgeKernel beta_;
    AgeKernel gamma_;
    double mu_ = 0.0;
    double tau_max_ = 0.0;
    double dtau_ = 0.0;
    int cells_ = 0;
    int refine_ = 1;

    // age-grid restriction
    std::vector<double> beta_grid_, gamma_grid_, H_grid_, cumgamma_grid_;
    // refined grid (step dtau / refine), used by the transforms
    std::vector<double> beta_fine_, gamma_fine_, H_fine_;
};

} // namespace agesis
