#include "agesis/threshold.hpp"

#include "agesis/errors.hpp"

#include <cmath>
#include <string>

namespace agesis {

std::vector<double> disease_free_equilibrium(const DemographicEquilibrium& dem,
                                             const DegreeDistribution& dist)
{
    if (!dem.viable)
        throw invalid_usage("disease-free equilibrium needs a viable demography (b > mu)");
    if (static_cast<int>(dem.n_star.size()) != dist.max_degree())
        throw invalid_parameter("demography and degree distribution disagree on class count");
    std::vector<double> s0(dem.n_star.size());
    for (int k = 1; k <= dist.max_degree(); ++k) {
        const double nk = dem.n_star[static_cast<std::size_t>(k - 1)];
        s0[static_cast<std::size_t>(k - 1)] = dem.b * k * (1.0 - nk) * dem.psi_star / dem.mu;
    }
    return s0;
}

namespace {

double weighted_s0_sum(const DegreeDistribution& dist, const InfectivityFunction& phi,
                       const std::vector<double>& s0)
{
    if (static_cast<int>(s0.size()) != dist.max_degree())
        throw invalid_parameter("S0 vector size does not match degree classes");
    double acc = 0.0;
    for (int i = 1; i <= dist.max_degree(); ++i)
        acc += i * phi(i) * dist.prob(i) * s0[static_cast<std::size_t>(i - 1)];
    return acc;
}

} // namespace

double basic_reproduction_number(const DegreeDistribution& dist, const InfectivityFunction& phi,
                                 const KernelSet& ks, const std::vector<double>& s0)
{
    return ks.k1(0.0) / dist.mean_degree() * weighted_s0_sum(dist, phi, s0);
}

std::optional<EndemicEquilibrium> endemic_equilibrium(const DegreeDistribution& dist,
                                                      const InfectivityFunction& phi,
                                                      const KernelSet& ks,
                                                      const DemographicEquilibrium& dem)
{
    const std::vector<double> s0 = disease_free_equilibrium(dem, dist);
    const double r0 = basic_reproduction_number(dist, phi, ks, s0);
    if (r0 <= 1.0)
        return std::nullopt;

    const int n = dist.max_degree();
    const double kmean = dist.mean_degree();
    const double K1 = ks.k1(0.0);
    const double K2 = ks.k2(0.0);
    const double b = dem.b;
    const double mu = dem.mu;
    const double psi = dem.psi_star;

    // Z_k as a function of the aggregate W = sum_i phi(i) p(i) Z_i:
    // substituting S*_k into the Z*_k relation gives
    //   Z_k(W) = b k (1 - N*_k) Psi* / (1 - K2 + mu <k> / (k K1 W))
    auto z_of_w = [&](double w, std::vector<double>& z) {
        for (int k = 1; k <= n; ++k) {
            const double influx = b * k * (1.0 - dem.n_star[static_cast<std::size_t>(k - 1)]) * psi;
            z[static_cast<std::size_t>(k - 1)] =
                influx / ((1.0 - K2) + mu * kmean / (k * K1 * w));
        }
    };
    auto aggregate = [&](const std::vector<double>& z) {
        double acc = 0.0;
        for (int i = 1; i <= n; ++i)
            acc += phi(i) * dist.prob(i) * z[static_cast<std::size_t>(i - 1)];
        return acc;
    };

    std::vector<double> z(static_cast<std::size_t>(n));
    auto g = [&](double w) {
        z_of_w(w, z);
        return aggregate(z) - w;
    };

    // Bracket: g > 0 near 0 (slope R0 - 1), and W_hi from dropping the mu S* term.
    double w_lo = 1e-12;
    double w_hi = 0.0;
    for (int k = 1; k <= n; ++k)
        w_hi += phi(k) * dist.prob(k) * b * k * psi / (1.0 - K2);
    double g_lo = g(w_lo);
    double g_hi = g(w_hi);
    if (!(g_lo > 0.0) || !(g_hi < 0.0)) {
        std::string curve = "residual curve:";
        for (int s = 0; s <= 8; ++s) {
            const double w = w_lo * std::pow(w_hi / w_lo, s / 8.0);
            curve += " g(" + std::to_string(w) + ")=" + std::to_string(g(w));
        }
        throw numerical_failure("endemic aggregate lost its bracket; " + curve);
    }
    for (int it = 0; it < 500 && (w_hi - w_lo) > 1e-16 * w_hi; ++it) {
        const double mid = 0.5 * (w_lo + w_hi);
        if (g(mid) > 0.0)
            w_lo = mid;
        else
            w_hi = mid;
    }
    const double w_root = 0.5 * (w_lo + w_hi);

    EndemicEquilibrium eq;
    eq.z_star.assign(static_cast<std::size_t>(n), 0.0);
    z_of_w(w_root, eq.z_star);
    // re-aggregate so the S* relation holds exactly as written
    eq.w_star = aggregate(eq.z_star);
    eq.s_star.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k <= n; ++k)
        eq.s_star[static_cast<std::size_t>(k - 1)] =
            kmean * eq.z_star[static_cast<std::size_t>(k - 1)] / (k * K1 * eq.w_star);

    const auto& H = ks.survival();
    eq.i_star_profile.assign(static_cast<std::size_t>(n),
                             std::vector<double>(H.size(), 0.0));
    for (int k = 1; k <= n; ++k)
        for (std::size_t j = 0; j < H.size(); ++j)
            eq.i_star_profile[static_cast<std::size_t>(k - 1)][j] =
                eq.z_star[static_cast<std::size_t>(k - 1)] * H[j];

    // worst relative residual of Z*_k = (b k (1-N*_k) Psi* - mu S*_k) / (1 - K2)
    double worst = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double influx = b * k * (1.0 - dem.n_star[static_cast<std::size_t>(k - 1)]) * psi;
        const double rhs = (influx - mu * eq.s_star[static_cast<std::size_t>(k - 1)]) / (1.0 - K2);
        const double zk = eq.z_star[static_cast<std::size_t>(k - 1)];
        worst = std::max(worst, std::abs(zk - rhs) / zk);
    }
    eq.residual = worst;
    return eq;
}

double characteristic_g(const DegreeDistribution& dist, const InfectivityFunction& phi,
                        const KernelSet& ks, const std::vector<double>& s0, double lambda)
{
    return ks.k1(lambda) / dist.mean_degree() * weighted_s0_sum(dist, phi, s0);
}

std::optional<double> find_characteristic_root(const DegreeDistribution& dist,
                                               const InfectivityFunction& phi, const KernelSet& ks,
                                               const std::vector<double>& s0)
{
    const double g0 = characteristic_g(dist, phi, ks, s0, 0.0);
    if (g0 <= 1.0)
        return std::nullopt;
    // G is strictly decreasing with G -> 0, so double until we cross 1
    double hi = 1.0;
    while (characteristic_g(dist, phi, ks, s0, hi) > 1.0) {
        hi *= 2.0;
        if (hi > 1e9)
            throw numerical_failure("characteristic root exceeds search range");
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (characteristic_g(dist, phi, ks, s0, mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

EquilibriumReport make_equilibrium_report(const DegreeDistribution& dist,
                                          const InfectivityFunction& phi, const KernelSet& ks,
                                          const DemographicEquilibrium& dem)
{
    EquilibriumReport rep;
    rep.k1_0 = ks.k1(0.0);
    rep.k2_0 = ks.k2(0.0);
    rep.psi_star = dem.psi_star;
    rep.s0 = disease_free_equilibrium(dem, dist);
    rep.r0 = basic_reproduction_number(dist, phi, ks, rep.s0);
    rep.endemic = endemic_equilibrium(dist, phi, ks, dem);
    rep.characteristic_root = find_characteristic_root(dist, phi, ks, rep.s0);
    return rep;
}

} // namespace agesis
