#include "agesis/demography.hpp"

#include "agesis/errors.hpp"

#include <cmath>
#include <string>

namespace agesis {

namespace {

// f(Psi) = 1 - (1/<k>) sum_i b i p(i) / (mu + b i Psi); strictly increasing,
// f(0) = 1 - b/mu < 0 iff b > mu, f(1) > 0 always.
double f_of_psi(const DegreeDistribution& dist, double b, double mu, double psi)
{
    double acc = 0.0;
    for (int i = 1; i <= dist.max_degree(); ++i)
        acc += b * i * dist.prob(i) / (mu + b * i * psi);
    return 1.0 - acc / dist.mean_degree();
}

double fprime_of_psi(const DegreeDistribution& dist, double b, double mu, double psi)
{
    double acc = 0.0;
    for (int i = 1; i <= dist.max_degree(); ++i) {
        const double bi = b * i;
        const double den = mu + bi * psi;
        acc += bi * bi * dist.prob(i) / (den * den);
    }
    return acc / dist.mean_degree();
}

void check_rates(double b, double mu)
{
    if (!std::isfinite(b) || b <= 0.0 || !std::isfinite(mu) || mu <= 0.0)
        throw invalid_parameter("demography needs b > 0 and mu > 0");
}

} // namespace

DemographicEquilibrium solve_demography(const DegreeDistribution& dist, double b, double mu,
                                        double tol)
{
    check_rates(b, mu);
    if (!(tol > 0.0))
        throw invalid_parameter("tolerance must be positive");

    DemographicEquilibrium eq;
    eq.b = b;
    eq.mu = mu;
    eq.n_star.assign(static_cast<std::size_t>(dist.max_degree()), 0.0);

    if (b <= mu) {
        eq.viable = false;
        eq.psi_star = 0.0;
        return eq;
    }

    double lo = 1e-12, hi = 1.0;
    double flo = f_of_psi(dist, b, mu, lo);
    double fhi = f_of_psi(dist, b, mu, hi);
    if (flo * fhi > 0.0)
        throw numerical_failure("demography bracket failure: f(" + std::to_string(lo) + ")=" +
                                std::to_string(flo) + ", f(1)=" + std::to_string(fhi));
    for (int it = 0; it < 200 && (hi - lo) > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f_of_psi(dist, b, mu, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double psi = 0.5 * (lo + hi);
    // one Newton polish; f is smooth and monotone here
    const double fp = fprime_of_psi(dist, b, mu, psi);
    if (fp > 0.0)
        psi -= f_of_psi(dist, b, mu, psi) / fp;
    if (!(psi > 0.0 && psi <= 1.0) || std::abs(f_of_psi(dist, b, mu, psi)) > tol)
        throw numerical_failure("demography root did not converge: psi=" + std::to_string(psi) +
                                " residual=" + std::to_string(f_of_psi(dist, b, mu, psi)));

    eq.viable = true;
    eq.psi_star = psi;
    for (int k = 1; k <= dist.max_degree(); ++k) {
        const double bk = b * k * psi;
        eq.n_star[static_cast<std::size_t>(k - 1)] = bk / (mu + bk);
    }
    return eq;
}

double solve_demography_fixed_point(const DegreeDistribution& dist, double b, double mu,
                                    double tol)
{
    check_rates(b, mu);
    if (b <= mu)
        return 0.0;
    double psi = 0.5;
    const double damping = 0.5;
    for (int it = 0; it < 100000; ++it) {
        double next = 0.0;
        for (int i = 1; i <= dist.max_degree(); ++i) {
            const double bi = b * i * psi;
            next += dist.prob(i) * bi / (mu + bi);
        }
        next /= dist.mean_degree();
        const double updated = (1.0 - damping) * psi + damping * next;
        if (std::abs(updated - psi) < tol * std::max(1.0, std::abs(updated))) {
            return updated;
        }
        psi = updated;
    }
    throw numerical_failure("demography fixed-point iteration did not converge");
}

DemographyTrajectory integrate_demography(const DegreeDistribution& dist, double b, double mu,
                                          std::vector<double> n0, double dt, double t_end)
{
    check_rates(b, mu);
    if (!(dt > 0.0))
        throw invalid_parameter("dt must be positive");
    if (t_end < 0.0)
        throw invalid_parameter("t_end must be nonnegative");
    const int n = dist.max_degree();
    if (n0.size() == 1)
        n0.assign(static_cast<std::size_t>(n), n0[0]);
    if (static_cast<int>(n0.size()) != n)
        throw invalid_parameter("initial vector size does not match degree classes");
    for (double v : n0)
        if (!(v >= 0.0 && v <= 1.0))
            throw invalid_parameter("initial occupancies must lie in [0, 1]");

    auto rhs = [&](const std::vector<double>& nv, std::vector<double>& out) {
        double psi = 0.0;
        for (int i = 1; i <= n; ++i)
            psi += dist.prob(i) * nv[static_cast<std::size_t>(i - 1)];
        psi /= dist.mean_degree();
        for (int k = 1; k <= n; ++k) {
            const double nk = nv[static_cast<std::size_t>(k - 1)];
            out[static_cast<std::size_t>(k - 1)] = b * k * (1.0 - nk) * psi - mu * nk;
        }
    };

    DemographyTrajectory traj;
    const int steps = static_cast<int>(std::llround(t_end / dt));
    traj.times.reserve(static_cast<std::size_t>(steps) + 1);
    traj.n.reserve(static_cast<std::size_t>(steps) + 1);
    traj.times.push_back(0.0);
    traj.n.push_back(n0);

    std::vector<double> state = std::move(n0);
    std::vector<double> k1(state.size()), k2(state.size()), k3(state.size()), k4(state.size()),
        tmp(state.size());
    for (int s = 0; s < steps; ++s) {
        rhs(state, k1);
        for (std::size_t i = 0; i < state.size(); ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < state.size(); ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < state.size(); ++i) tmp[i] = state[i] + dt * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < state.size(); ++i) {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!std::isfinite(state[i]))
                throw numerical_failure("demography trajectory became non-finite at t=" +
                                        std::to_string(dt * (s + 1)) + "; reduce dt");
            const double exc = std::max(0.0 - state[i], state[i] - 1.0);
            if (exc > traj.max_excursion)
                traj.max_excursion = exc;
        }
        traj.times.push_back(dt * (s + 1));
        traj.n.push_back(state);
    }
    return traj;
}

} // namespace agesis
