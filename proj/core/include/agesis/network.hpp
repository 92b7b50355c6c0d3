#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace agesis {

/// Degree law p(k) on k = 1..n for an uncorrelated network, plus its moments.
/// Immutable after construction; summations run in ascending k so results are
/// bit-reproducible.
class DegreeDistribution {
public:
    /// Explicit probability vector, probabilities[i] = p(i+1). Must be
    /// nonnegative and sum to 1 within 1e-12.
    explicit DegreeDistribution(std::vector<double> probabilities,
                                std::optional<double> exponent = std::nullopt);

    /// p(k) = c k^{-r} with c normalising the n-term sum to 1.
    static DegreeDistribution power_law(double exponent, int max_degree);

    int max_degree() const { return static_cast<int>(prob_.size()); }
    /// p(k), k in 1..n.
    double prob(int k) const;
    double mean_degree() const { return mean_degree_; }
    std::optional<double> exponent() const { return exponent_; }
    const std::vector<double>& probabilities() const { return prob_; }

    /// <f(k)> = sum_k f(k) p(k), ascending k.
    double moment(const std::function<double(int)>& f) const;

    /// P(i|k) = i p(i) / <k>; independent of k on uncorrelated networks.
    double conditional_degree_prob(int i) const;

private:
    std::vector<double> prob_;
    double mean_degree_ = 0.0;
    std::optional<double> exponent_;
};

/// Infectivity phi(k): edges over which a degree-k node transmits per unit time.
class InfectivityFunction {
public:
    enum class Family { linear, constant, saturated };

    static InfectivityFunction linear();
    static InfectivityFunction constant(double h);
    /// phi(k) = omega k^a / (1 + nu k^a)
    static InfectivityFunction saturated(double omega, double a, double nu);

    double operator()(int k) const;
    Family family() const { return family_; }
    double h() const { return h_; }
    double omega() const { return omega_; }
    double a() const { return a_; }
    double nu() const { return nu_; }

private:
    InfectivityFunction() = default;
    Family family_ = Family::linear;
    double h_ = 0.0, omega_ = 0.0, a_ = 0.0, nu_ = 0.0;
};

} // namespace agesis
