#include "agesis/network.hpp"

#include "agesis/errors.hpp"

#include <cmath>
#include <string>

namespace agesis {

DegreeDistribution::DegreeDistribution(std::vector<double> probabilities,
                                       std::optional<double> exponent)
    : prob_(std::move(probabilities)), exponent_(exponent)
{
    if (prob_.empty())
        throw invalid_parameter("degree distribution needs at least one degree class");
    double total = 0.0;
    for (std::size_t i = 0; i < prob_.size(); ++i) {
        const double p = prob_[i];
        if (!std::isfinite(p) || p < 0.0)
            throw invalid_parameter("p(" + std::to_string(i + 1) + ") must be finite and >= 0");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw invalid_parameter("degree probabilities must sum to 1 (got " + std::to_string(total) + ")");
    double mean = 0.0;
    for (std::size_t i = 0; i < prob_.size(); ++i)
        mean += static_cast<double>(i + 1) * prob_[i];
    mean_degree_ = mean;
    if (!(mean_degree_ > 0.0))
        throw invalid_parameter("mean degree must be positive");
}

DegreeDistribution DegreeDistribution::power_law(double exponent, int max_degree)
{
    if (max_degree < 1)
        throw invalid_parameter("power law needs max_degree >= 1");
    if (!std::isfinite(exponent) || exponent <= 0.0)
        throw invalid_parameter("power law exponent must be finite and > 0");
    std::vector<double> p(static_cast<std::size_t>(max_degree));
    double norm = 0.0;
    for (int k = 1; k <= max_degree; ++k)
        norm += std::pow(static_cast<double>(k), -exponent);
    for (int k = 1; k <= max_degree; ++k)
        p[static_cast<std::size_t>(k - 1)] = std::pow(static_cast<double>(k), -exponent) / norm;
    return DegreeDistribution(std::move(p), exponent);
}

double DegreeDistribution::prob(int k) const
{
    if (k < 1 || k > max_degree())
        throw invalid_parameter("degree " + std::to_string(k) + " outside 1.." +
                                std::to_string(max_degree()));
    return prob_[static_cast<std::size_t>(k - 1)];
}

double DegreeDistribution::moment(const std::function<double(int)>& f) const
{
    double acc = 0.0;
    for (int k = 1; k <= max_degree(); ++k)
        acc += f(k) * prob_[static_cast<std::size_t>(k - 1)];
    return acc;
}

double DegreeDistribution::conditional_degree_prob(int i) const
{
    if (i < 1 || i > max_degree())
        throw invalid_parameter("degree " + std::to_string(i) + " outside 1.." +
                                std::to_string(max_degree()));
    return static_cast<double>(i) * prob_[static_cast<std::size_t>(i - 1)] / mean_degree_;
}

InfectivityFunction InfectivityFunction::linear()
{
    InfectivityFunction phi;
    phi.family_ = Family::linear;
    return phi;
}

InfectivityFunction InfectivityFunction::constant(double h)
{
    if (!std::isfinite(h) || h <= 0.0)
        throw invalid_parameter("constant infectivity needs h > 0");
    InfectivityFunction phi;
    phi.family_ = Family::constant;
    phi.h_ = h;
    return phi;
}

InfectivityFunction InfectivityFunction::saturated(double omega, double a, double nu)
{
    if (!(std::isfinite(omega) && omega >= 0.0) || !(std::isfinite(a) && a >= 0.0) ||
        !(std::isfinite(nu) && nu >= 0.0))
        throw invalid_parameter("saturated infectivity needs omega, a, nu >= 0");
    InfectivityFunction phi;
    phi.family_ = Family::saturated;
    phi.omega_ = omega;
    phi.a_ = a;
    phi.nu_ = nu;
    return phi;
}

double InfectivityFunction::operator()(int k) const
{
    switch (family_) {
    case Family::linear:
        return static_cast<double>(k);
    case Family::constant:
        return h_;
    case Family::saturated: {
        const double ka = std::pow(static_cast<double>(k), a_);
        return omega_ * ka / (1.0 + nu_ * ka);
    }
    }
    return 0.0;
}

} // namespace agesis
