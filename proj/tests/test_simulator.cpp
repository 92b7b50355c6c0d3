#include "agesis/errors.hpp"
#include "agesis/simulator.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace agesis;

namespace {

SimulationConfig reference_config(double gamma_q, double t_end, SimMode mode = SimMode::limiting)
{
    SimulationConfig cfg{DegreeDistribution::power_law(2.4, 40), InfectivityFunction::linear(),
                         KernelSet(AgeKernel::parabolic(200.0, 15000.0),
                                   AgeKernel::rational_decay(gamma_q), 0.06, 200.0, 0.2)};
    cfg.b = 0.07;
    cfg.mu = 0.06;
    cfg.dt = 0.1;
    cfg.t_end = t_end;
    cfg.mode = mode;
    return cfg;
}

} // namespace

TEST_CASE("initialize: default profile, tabulated echo, rejections")
{
    SimulationConfig cfg = reference_config(1.0, 10.0);
    const auto st = initialize(cfg);
    // direct evaluation of the stated initial profile at tau = 0
    const double expect0 = std::exp(-0.5 * 1.15 * 1.15) / std::sqrt(2.0 * M_PI);
    CHECK(st.I.at(0, 0) == doctest::Approx(expect0).epsilon(1e-14));
    CHECK(expect0 == doctest::Approx(0.2059).epsilon(5e-4));
    CHECK(st.S[0] == 0.6);
    CHECK(st.Z[0] == st.I.at(0, 0));
    // identical across degree classes
    CHECK(st.I.at(39, 57) == st.I.at(0, 57));

    std::vector<double> table(size_t(cfg.kernels.cells()) + 1, 0.0);
    table[3] = 0.25;
    cfg.initial.i0_kind = InitialData::I0Kind::table;
    cfg.initial.i0_table = table;
    const auto st2 = initialize(cfg);
    CHECK(st2.I.at(7, 3) == 0.25);
    CHECK(st2.I.at(7, 4) == 0.0);

    cfg.initial.i0_table[3] = -0.25;
    CHECK_THROWS_AS(initialize(cfg), agesis::invalid_parameter);
    cfg.initial.i0_table[3] = 0.25;
    cfg.initial.s0 = {-0.1};
    CHECK_THROWS_AS(initialize(cfg), agesis::invalid_parameter);
}

TEST_CASE("CFL violation is rejected at validation")
{
    SimulationConfig cfg = reference_config(1.0, 10.0);
    cfg.dt = 0.25; // > dtau = 0.2
    CHECK_THROWS_AS(cfg.validate(), agesis::invalid_parameter);
}

TEST_CASE("zero initial infection stays disease-free")
{
    SimulationConfig cfg = reference_config(1.0, 50.0);
    cfg.initial.i0_kind = InitialData::I0Kind::zero;
    const auto series = run(cfg);
    for (const auto& rec : series.prevalence_by_degree)
        for (double v : rec)
            CHECK(v == 0.0);
}

TEST_CASE("pure transport: decay along characteristics with zero beta")
{
    const double g = 0.12, mu = 0.06, dtau = 0.1, dt = 0.05, t = 4.0;
    SimulationConfig cfg{DegreeDistribution({1.0}), InfectivityFunction::linear(),
                         KernelSet(AgeKernel::constant(0.0), AgeKernel::constant(g), mu, 40.0,
                                   dtau)};
    cfg.b = 0.07;
    cfg.mu = mu;
    cfg.dt = dt;
    cfg.t_end = t;
    cfg.mode = SimMode::limiting;
    cfg.initial.i0_kind = InitialData::I0Kind::profile;
    cfg.initial.i0_profile = [](double tau) { return std::exp(-(tau - 5.0) * (tau - 5.0)); };

    const auto series = run(cfg);
    const auto& st = series.final_state;
    // exact solution: I(t, tau) = I0(tau - t) e^{-(mu+g) t}
    double worst = 0.0;
    for (int j = 0; j <= cfg.kernels.cells(); ++j) {
        const double tau = cfg.kernels.tau(j);
        if (tau <= t + 2.0 * dtau)
            continue; // skip the inflow side
        const double exact =
            std::exp(-(tau - t - 5.0) * (tau - t - 5.0)) * std::exp(-(mu + g) * t);
        worst = std::max(worst, std::abs(st.I.at(0, j) - exact));
    }
    // first-order scheme at this mesh: O(dtau + dt) smearing of a smooth bump
    CHECK(worst <= 0.08);
    CHECK(worst > 1e-6); // the bound is doing real work
}

TEST_CASE("fig3 run converges to the discrete fixed point of the scheme")
{
    SimulationConfig cfg = reference_config(10.0, 2500.0);
    const auto series = run(cfg);
    const auto dem = solve_demography(cfg.dist, cfg.b, cfg.mu);
    const auto ref = oracles::discrete_fixed_point(
        cfg.dist.probabilities(), [](int k) { return double(k); }, cfg.b, cfg.mu,
        cfg.kernels.beta_grid(), cfg.kernels.gamma_grid(), cfg.kernels.dtau(), dem.psi_star,
        dem.n_star);

    double worst = 0.0;
    for (int k = 1; k <= 40; ++k) {
        const double sim = prevalence_of(series.final_state, cfg, k);
        worst = std::max(worst, std::abs(sim / ref.prevalence[size_t(k - 1)] - 1.0));
    }
    CHECK(worst <= 1e-9);

    for (int k = 1; k <= 40; ++k)
        CHECK(series.final_state.S[size_t(k - 1)] ==
              doctest::Approx(ref.s[size_t(k - 1)]).epsilon(1e-9));

    // degree monotonicity at the steady state
    double prev = 0.0;
    for (int k = 1; k <= 40; ++k) {
        const double ik = prevalence_of(series.final_state, cfg, k);
        CHECK(ik > prev);
        prev = ik;
    }
}

TEST_CASE("state seeded at the discrete fixed point is stationary")
{
    SimulationConfig cfg = reference_config(10.0, 100.0);
    const auto dem = solve_demography(cfg.dist, cfg.b, cfg.mu);
    const auto ref = oracles::discrete_fixed_point(
        cfg.dist.probabilities(), [](int k) { return double(k); }, cfg.b, cfg.mu,
        cfg.kernels.beta_grid(), cfg.kernels.gamma_grid(), cfg.kernels.dtau(), dem.psi_star,
        dem.n_star);

    EpidemicState st = initialize(cfg);
    const int J = cfg.kernels.cells();
    for (int k = 1; k <= 40; ++k) {
        st.S[size_t(k - 1)] = ref.s[size_t(k - 1)];
        double htil = 1.0;
        st.I.at(k - 1, 0) = ref.z[size_t(k - 1)];
        for (int j = 1; j <= J; ++j) {
            htil /= 1.0 + cfg.kernels.dtau() * (cfg.mu + cfg.kernels.gamma_grid()[size_t(j)]);
            st.I.at(k - 1, j) = ref.z[size_t(k - 1)] * htil;
        }
    }
    const EpidemicState start = st;
    for (int s = 0; s < 1000; ++s)
        step(st, cfg);
    double worst = 0.0;
    for (int k = 0; k < 40; ++k) {
        worst = std::max(worst, std::abs(st.S[size_t(k)] - start.S[size_t(k)]));
        for (int j = 0; j <= J; ++j)
            worst = std::max(worst, std::abs(st.I.at(k, j) - start.I.at(k, j)));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("fig2 run dies out with decreasing prevalence")
{
    SimulationConfig cfg = reference_config(1.0, 500.0);
    const auto series = run(cfg);
    double maxp = 0.0;
    for (double v : series.prevalence_by_degree.back())
        maxp = std::max(maxp, v);
    CHECK(maxp < 1e-4);
    // strictly decreasing total prevalence over the second half
    const std::size_t half = series.times.size() / 2;
    for (std::size_t m = half + 1; m < series.times.size(); ++m)
        CHECK(series.total_prevalence[m] < series.total_prevalence[m - 1]);
}

TEST_CASE("limiting-mode conservation and full-mode consistency")
{
    SimulationConfig cfg = reference_config(10.0, 800.0);
    const auto series = run(cfg);
    const auto dem = solve_demography(cfg.dist, cfg.b, cfg.mu);
    double drift = 0.0;
    for (int k = 1; k <= 40; ++k) {
        const double q = series.final_state.S[size_t(k - 1)] +
                         prevalence_of(series.final_state, cfg, k);
        drift = std::max(drift, std::abs(q - dem.n_star[size_t(k - 1)]));
    }
    CHECK(drift < 1e-2);

    SimulationConfig full = reference_config(10.0, 200.0, SimMode::full);
    const auto fs = run(full);
    double gap = 0.0;
    for (int k = 1; k <= 40; ++k) {
        const double q = fs.final_state.S[size_t(k - 1)] +
                         prevalence_of(fs.final_state, full, k);
        gap = std::max(gap, std::abs(q - fs.final_state.N[size_t(k - 1)]));
    }
    CHECK(gap < 1e-2);
}

TEST_CASE("single degree class reproduces the independent scalar reference")
{
    const double dtau = 0.2, dt = 0.1, t_end = 200.0;
    SimulationConfig cfg{DegreeDistribution({1.0}), InfectivityFunction::linear(),
                         KernelSet(AgeKernel::constant(4.0), AgeKernel::constant(0.4), 0.06,
                                   100.0, dtau)};
    cfg.b = 0.07;
    cfg.mu = 0.06;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.mode = SimMode::limiting;
    const auto series = run(cfg);

    std::vector<double> beta(size_t(cfg.kernels.cells()) + 1, 4.0);
    std::vector<double> gamma(size_t(cfg.kernels.cells()) + 1, 0.4);
    std::vector<double> i0(size_t(cfg.kernels.cells()) + 1);
    for (int j = 0; j <= cfg.kernels.cells(); ++j) {
        const double x = dtau * j + 1.15;
        i0[size_t(j)] = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    }
    const auto ref = oracles::scalar_reference(0.07, 0.06, beta, gamma, dtau, dt, t_end, 0.6, i0);

    CHECK(std::abs(series.final_state.S[0] - ref.s_end) <= 1e-8);
    double worst = 0.0;
    for (int j = 0; j <= cfg.kernels.cells(); ++j)
        worst = std::max(worst, std::abs(series.final_state.I.at(0, j) - ref.i_end[size_t(j)]));
    CHECK(worst <= 1e-8);
}

TEST_CASE("lyapunov functional: zero at equilibrium, positive off it")
{
    SimulationConfig cfg = reference_config(10.0, 10.0);
    // constant-gamma endemic configuration
    cfg.kernels = KernelSet(AgeKernel::parabolic(200.0, 15000.0), AgeKernel::constant(0.1), 0.06,
                            200.0, 0.2);
    cfg.b = 0.3;
    const auto ctx = make_lyapunov_context(cfg, 0.1);

    EpidemicState st = initialize(cfg);
    const int J = cfg.kernels.cells();
    for (int k = 1; k <= 40; ++k) {
        st.S[size_t(k - 1)] = ctx.s_star[size_t(k - 1)];
        for (int j = 0; j <= J; ++j)
            st.I.at(k - 1, j) = ctx.z_star[size_t(k - 1)] * ctx.h[size_t(j)];
    }
    CHECK(lyapunov_value(st, cfg, ctx) == doctest::Approx(0.0).epsilon(1e-12));

    for (int k = 0; k < 40; ++k)
        st.S[size_t(k)] *= 1.1;
    CHECK(lyapunov_value(st, cfg, ctx) > 0.0);

    st.I.at(3, 5) = 0.0;
    CHECK_THROWS_AS(lyapunov_value(st, cfg, ctx), agesis::diagnostic_unavailable);
}

TEST_CASE("lyapunov context preconditions")
{
    SimulationConfig sub = reference_config(1.0, 10.0); // R0 < 1, non-constant gamma
    CHECK_THROWS_AS(make_lyapunov_context(sub, 1.0), agesis::invalid_usage);

    SimulationConfig cst = reference_config(1.0, 10.0);
    cst.kernels = KernelSet(AgeKernel::parabolic(200.0, 15000.0), AgeKernel::constant(0.1), 0.06,
                            200.0, 0.2);
    // b = 0.07 with gamma = 0.1 is subcritical: no endemic equilibrium
    CHECK_THROWS_AS(make_lyapunov_context(cst, 0.1), agesis::invalid_usage);

    SimulationConfig full = reference_config(10.0, 10.0, SimMode::full);
    CHECK_THROWS_AS(make_lyapunov_context(full, 0.1), agesis::invalid_usage);
}

TEST_CASE("lyapunov trace is non-increasing from an excess-infection start")
{
    SimulationConfig cfg = reference_config(10.0, 600.0);
    cfg.kernels = KernelSet(AgeKernel::parabolic(200.0, 15000.0), AgeKernel::constant(0.1), 0.06,
                            200.0, 0.2);
    cfg.b = 0.3;
    cfg.state_stride = 200;
    const auto ctx = make_lyapunov_context(cfg, 0.1);
    cfg.initial.s0.assign(40, 0.0);
    for (int k = 0; k < 40; ++k)
        cfg.initial.s0[size_t(k)] = 0.7 * ctx.s_star[size_t(k)];
    // same excess profile for every class keeps the config expressible
    cfg.initial.i0_kind = InitialData::I0Kind::profile;
    const double z40 = ctx.z_star[39];
    cfg.initial.i0_profile = [z40](double tau) {
        return 1.6 * z40 * std::exp(-0.16 * tau);
    };

    const auto series = run(cfg);
    const auto trace = lyapunov_trace(series.states, cfg, 0.1);
    REQUIRE(trace.size() >= 3);
    double last = std::numeric_limits<double>::quiet_NaN();
    for (double v : trace) {
        REQUIRE_FALSE(std::isnan(v));
        if (!std::isnan(last))
            CHECK(v <= last + 1e-6);
        last = v;
    }
    CHECK(trace.front() > trace.back());
}

TEST_CASE("persistence check behaviour")
{
    SimulationConfig fig3 = reference_config(10.0, 800.0);
    const auto s3 = run(fig3);
    for (bool p : persistence_check(s3, 1e-4, 100.0))
        CHECK(p);

    SimulationConfig fig2 = reference_config(1.0, 500.0);
    const auto s2 = run(fig2);
    bool any = false;
    for (bool p : persistence_check(s2, 1e-4, 100.0))
        any = any || p;
    CHECK_FALSE(any);

    SimulationConfig zero = reference_config(1.0, 50.0);
    zero.initial.i0_kind = InitialData::I0Kind::zero;
    const auto sz = run(zero);
    for (bool p : persistence_check(sz, 1e-4, 10.0))
        CHECK_FALSE(p);

    CHECK_THROWS_AS(persistence_check(sz, 1e-4, 1e4), agesis::invalid_parameter);
}

TEST_CASE("halving the mesh reduces the terminal-state error by >= 1.8")
{
    // reduced problem so three meshes stay cheap
    auto make = [](double dtau, double dt) {
        SimulationConfig cfg{DegreeDistribution::power_law(2.4, 10),
                             InfectivityFunction::linear(),
                             KernelSet(AgeKernel::parabolic(50.0, 1000.0),
                                       AgeKernel::rational_decay(10.0), 0.06, 50.0, dtau)};
        cfg.b = 0.07;
        cfg.mu = 0.06;
        cfg.dt = dt;
        cfg.t_end = 100.0;
        cfg.mode = SimMode::limiting;
        cfg.output_stride = 1000000; // terminal state only
        return cfg;
    };
    auto terminal_prevalence = [](const SimulationConfig& cfg) {
        const auto series = run(cfg);
        std::vector<double> out;
        for (int k = 1; k <= cfg.dist.max_degree(); ++k)
            out.push_back(prevalence_of(series.final_state, cfg, k));
        return out;
    };
    const auto coarse = terminal_prevalence(make(0.2, 0.1));
    const auto half = terminal_prevalence(make(0.1, 0.05));
    const auto fine = terminal_prevalence(make(0.0125, 0.00625));
    double err_coarse = 0.0, err_half = 0.0;
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        err_coarse = std::max(err_coarse, std::abs(coarse[k] - fine[k]));
        err_half = std::max(err_half, std::abs(half[k] - fine[k]));
    }
    CHECK(err_coarse / err_half >= 1.8);
}

TEST_CASE("instability is surfaced as an error, not clipped")
{
    SimulationConfig cfg = reference_config(1.0, 10.0);
    EpidemicState st = initialize(cfg);
    st.I.at(3, 7) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(step(st, cfg), agesis::numerical_failure);

    // forward Euler decay coefficient goes negative when dt (mu + gamma) is
    // too large for the kernel: gamma = 25 with dt = 0.1 flips the sign
    SimulationConfig wild{DegreeDistribution({1.0}), InfectivityFunction::linear(),
                          KernelSet(AgeKernel::constant(0.5), AgeKernel::constant(25.0), 0.06,
                                    10.0, 0.1)};
    wild.b = 0.07;
    wild.mu = 0.06;
    wild.dt = 0.1;
    wild.t_end = 5.0;
    wild.mode = SimMode::limiting;
    CHECK_THROWS_AS(run(wild), agesis::numerical_failure);
}

TEST_CASE("demography integration surfaces step-size instability")
{
    const auto dist = DegreeDistribution::power_law(2.4, 10);
    CHECK_THROWS_AS(agesis::integrate_demography(dist, 0.9, 0.06, {0.5}, 1e8, 3e8),
                    agesis::numerical_failure);
}

TEST_CASE("runs are deterministic")
{
    SimulationConfig cfg = reference_config(10.0, 50.0);
    const auto a = run(cfg);
    const auto b = run(cfg);
    REQUIRE(a.times.size() == b.times.size());
    for (std::size_t m = 0; m < a.times.size(); ++m) {
        CHECK(a.times[m] == b.times[m]);
        for (int k = 0; k < 40; ++k) {
            CHECK(a.prevalence_by_degree[m][size_t(k)] == b.prevalence_by_degree[m][size_t(k)]);
            CHECK(a.susceptible_by_degree[m][size_t(k)] == b.susceptible_by_degree[m][size_t(k)]);
        }
    }
}

TEST_CASE("t_end = 0 yields only the initial snapshot")
{
    SimulationConfig cfg = reference_config(1.0, 0.0);
    const auto series = run(cfg);
    CHECK(series.times.size() == 1);
    CHECK(series.times[0] == 0.0);
    CHECK(series.final_state.t == 0.0);
}

TEST_CASE("positivity across the fig2/fig3 runs")
{
    for (double q : {1.0, 10.0}) {
        SimulationConfig cfg = reference_config(q, 300.0);
        cfg.state_stride = 500;
        const auto series = run(cfg);
        for (const auto& st : series.states) {
            for (double v : st.S)
                CHECK(v >= 0.0);
            for (double v : st.I.v)
                CHECK(v >= 0.0);
        }
    }
}
