#include "agesis/kernels.hpp"

#include "agesis/errors.hpp"

#include <cmath>
#include <string>

namespace agesis {

AgeKernel AgeKernel::constant(double c)
{
    if (!std::isfinite(c) || c < 0.0)
        throw invalid_parameter("constant kernel needs c >= 0");
    AgeKernel k;
    k.family_ = Family::constant;
    k.c_ = c;
    return k;
}

AgeKernel AgeKernel::rational_decay(double q)
{
    if (!std::isfinite(q) || q <= 0.0)
        throw invalid_parameter("rational decay kernel needs q > 0");
    AgeKernel k;
    k.family_ = Family::rational_decay;
    k.q_ = q;
    return k;
}

AgeKernel AgeKernel::parabolic(double T, double s)
{
    if (!(std::isfinite(T) && T > 0.0) || !(std::isfinite(s) && s > 0.0))
        throw invalid_parameter("parabolic kernel needs T, s > 0");
    AgeKernel k;
    k.family_ = Family::parabolic;
    k.T_ = T;
    k.s_ = s;
    return k;
}

AgeKernel AgeKernel::tabulated(std::vector<double> samples)
{
    if (samples.size() < 2)
        throw invalid_parameter("tabulated kernel needs at least two samples");
    for (double v : samples)
        if (!std::isfinite(v) || v < 0.0)
            throw invalid_parameter("tabulated kernel values must be finite and >= 0");
    AgeKernel k;
    k.family_ = Family::tabulated;
    k.samples_ = std::move(samples);
    return k;
}

double AgeKernel::eval(double tau) const
{
    switch (family_) {
    case Family::constant:
        return c_;
    case Family::rational_decay:
        return 1.0 / (1.0 + q_ * tau);
    case Family::parabolic:
        // rates cannot be negative; clamp outside [0, T]
        if (tau < 0.0 || tau > T_)
            return 0.0;
        return tau * (T_ - tau) / s_;
    case Family::tabulated:
        throw invalid_usage("tabulated kernels are evaluated via the kernel set grid");
    }
    return 0.0;
}

namespace {

// sample a kernel at refined node m (age cell m / refine); tabulated kernels
// interpolate linearly and hit their grid samples exactly at cell boundaries
double sample_kernel(const AgeKernel& k, int m, int refine, double dtau)
{
    if (k.family() != AgeKernel::Family::tabulated)
        return k.eval(dtau * m / refine);
    const auto& v = k.samples();
    const int j = m / refine;
    const int r = m % refine;
    if (r == 0)
        return v[static_cast<std::size_t>(j)];
    const double frac = static_cast<double>(r) / refine;
    return v[static_cast<std::size_t>(j)] * (1.0 - frac) + v[static_cast<std::size_t>(j + 1)] * frac;
}

} // namespace

KernelSet::KernelSet(AgeKernel beta, AgeKernel gamma, double mu, double tau_max, double dtau,
                     int refine)
    : beta_(std::move(beta)), gamma_(std::move(gamma)), mu_(mu), tau_max_(tau_max), dtau_(dtau),
      refine_(refine)
{
    if (!std::isfinite(mu_) || mu_ <= 0.0)
        throw invalid_parameter("kernel set needs mu > 0");
    if (!std::isfinite(dtau_) || dtau_ <= 0.0)
        throw invalid_parameter("kernel set needs dtau > 0");
    if (!std::isfinite(tau_max_) || tau_max_ < dtau_)
        throw invalid_parameter("kernel set needs tau_max >= dtau");
    const double cells_exact = tau_max_ / dtau_;
    cells_ = static_cast<int>(std::llround(cells_exact));
    if (std::abs(cells_exact - cells_) > 1e-9 * cells_exact)
        throw invalid_parameter("tau_max must be an integer multiple of dtau");
    if (refine_ < 1)
        throw invalid_parameter("refinement factor must be >= 1");

    for (const AgeKernel* k : {&beta_, &gamma_}) {
        if (k->family() == AgeKernel::Family::tabulated &&
            k->samples().size() != static_cast<std::size_t>(cells_ + 1))
            throw invalid_parameter("tabulated kernel has " + std::to_string(k->samples().size()) +
                                    " samples, grid has " + std::to_string(cells_ + 1) + " nodes");
    }

    const int fine_n = cells_ * refine_ + 1;
    const double h = dtau_ / refine_;
    beta_fine_.resize(fine_n);
    gamma_fine_.resize(fine_n);
    H_fine_.resize(fine_n);
    for (int m = 0; m < fine_n; ++m) {
        beta_fine_[m] = sample_kernel(beta_, m, refine_, dtau_);
        gamma_fine_[m] = sample_kernel(gamma_, m, refine_, dtau_);
        if (!std::isfinite(beta_fine_[m]) || beta_fine_[m] < 0.0 ||
            !std::isfinite(gamma_fine_[m]) || gamma_fine_[m] < 0.0)
            throw invalid_parameter("kernel values must be finite and >= 0 on the grid");
    }
    // cumulative trapezoid of gamma, then H = exp(-mu tau - int gamma)
    double cum = 0.0;
    H_fine_[0] = 1.0;
    beta_grid_.resize(cells_ + 1);
    gamma_grid_.resize(cells_ + 1);
    H_grid_.resize(cells_ + 1);
    cumgamma_grid_.resize(cells_ + 1);
    beta_grid_[0] = beta_fine_[0];
    gamma_grid_[0] = gamma_fine_[0];
    H_grid_[0] = 1.0;
    cumgamma_grid_[0] = 0.0;
    for (int m = 1; m < fine_n; ++m) {
        cum += 0.5 * (gamma_fine_[m - 1] + gamma_fine_[m]) * h;
        H_fine_[m] = std::exp(-mu_ * (h * m) - cum);
        if (m % refine_ == 0) {
            const int j = m / refine_;
            beta_grid_[j] = beta_fine_[m];
            gamma_grid_[j] = gamma_fine_[m];
            H_grid_[j] = H_fine_[m];
            cumgamma_grid_[j] = cum;
        }
    }
}

double KernelSet::integrate_refined(const std::vector<double>& weight_fine, double lambda) const
{
    const double h = dtau_ / refine_;
    const int fine_n = static_cast<int>(weight_fine.size());
    double acc = 0.0;
    double prev = weight_fine[0] * H_fine_[0]; // e^{-lambda*0} = 1
    for (int m = 1; m < fine_n; ++m) {
        const double cur = weight_fine[m] * std::exp(-lambda * h * m) * H_fine_[m];
        acc += 0.5 * (prev + cur) * h;
        prev = cur;
    }
    return acc;
}

double KernelSet::k1(double lambda) const
{
    return integrate_refined(beta_fine_, lambda);
}

double KernelSet::k2(double lambda) const
{
    return integrate_refined(gamma_fine_, lambda);
}

std::vector<double> KernelSet::pi_kernel(double gamma_const) const
{
    if (gamma_.family() != AgeKernel::Family::constant)
        throw invalid_usage("pi kernel is defined for constant gamma only");
    if (std::abs(gamma_.constant_value() - gamma_const) > 1e-12)
        throw invalid_usage("gamma_const does not match the kernel set's constant gamma");

    // backward accumulation on the refined grid:
    //   pi_m = e^{-d h} pi_{m+1} + (h/2)(beta_m + beta_{m+1} e^{-d h}),  d = mu + gamma
    const double d = mu_ + gamma_const;
    const double h = dtau_ / refine_;
    const double decay = std::exp(-d * h);
    const int fine_n = static_cast<int>(beta_fine_.size());
    std::vector<double> pi_fine(fine_n, 0.0);
    for (int m = fine_n - 2; m >= 0; --m)
        pi_fine[m] = decay * pi_fine[m + 1] + 0.5 * h * (beta_fine_[m] + beta_fine_[m + 1] * decay);

    std::vector<double> pi(cells_ + 1);
    for (int j = 0; j <= cells_; ++j)
        pi[static_cast<std::size_t>(j)] = pi_fine[static_cast<std::size_t>(j) * refine_];
    return pi;
}

} // namespace agesis
