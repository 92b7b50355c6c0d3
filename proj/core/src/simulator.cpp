#include "agesis/simulator.hpp"

#include "agesis/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace agesis {

namespace {

constexpr double TWO_PI = 6.283185307179586476925286766559;

double default_initial_profile(double tau)
{
    const double x = tau + 1.15;
    return std::exp(-0.5 * x * x) / std::sqrt(TWO_PI);
}

} // namespace

void SimulationConfig::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw invalid_parameter("dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end))
        throw invalid_parameter("t_end must be nonnegative");
    if (t_end > 0.0 && t_end < dt)
        throw invalid_parameter("t_end must be at least dt");
    if (dt > kernels.dtau() + 1e-12)
        throw invalid_parameter("CFL violated: dt = " + std::to_string(dt) + " > dtau = " +
                                std::to_string(kernels.dtau()));
    if (output_stride < 1)
        throw invalid_parameter("output_stride must be >= 1");
    if (state_stride < 0)
        throw invalid_parameter("state_stride must be >= 0");
    if (!(b > 0.0) || !(mu > 0.0))
        throw invalid_parameter("b and mu must be positive");
    if (std::abs(mu - kernels.mu()) > 1e-12)
        throw invalid_parameter("config mu and kernel-set mu disagree");
    const std::size_t n = static_cast<std::size_t>(dist.max_degree());
    if (initial.s0.size() != 1 && initial.s0.size() != n)
        throw invalid_parameter("s0 must be scalar or one value per degree class");
}

EpidemicState initialize(const SimulationConfig& config)
{
    config.validate();
    const int n = config.dist.max_degree();
    const int J = config.kernels.cells();
    const double dtau = config.kernels.dtau();

    EpidemicState st;
    st.t = 0.0;
    st.S.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
        const double s = config.initial.s0.size() == 1 ? config.initial.s0[0]
                                                       : config.initial.s0[static_cast<std::size_t>(k)];
        if (!(s >= 0.0) || !std::isfinite(s))
            throw invalid_parameter("initial S must be finite and >= 0");
        st.S[static_cast<std::size_t>(k)] = s;
    }

    std::vector<double> profile(static_cast<std::size_t>(J) + 1, 0.0);
    switch (config.initial.i0_kind) {
    case InitialData::I0Kind::zero:
        break;
    case InitialData::I0Kind::shifted_gaussian:
        for (int j = 0; j <= J; ++j)
            profile[static_cast<std::size_t>(j)] = default_initial_profile(dtau * j);
        break;
    case InitialData::I0Kind::table:
        if (config.initial.i0_table.size() != profile.size())
            throw invalid_parameter("i0 table size does not match the age grid");
        profile = config.initial.i0_table;
        break;
    case InitialData::I0Kind::profile:
        if (!config.initial.i0_profile)
            throw invalid_parameter("i0 profile function not set");
        for (int j = 0; j <= J; ++j)
            profile[static_cast<std::size_t>(j)] = config.initial.i0_profile(dtau * j);
        break;
    }
    for (double v : profile)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw invalid_parameter("initial infected profile must be finite and >= 0");

    st.I = AgeMatrix(n, J + 1);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j <= J; ++j)
            st.I.at(k, j) = profile[static_cast<std::size_t>(j)];

    st.Z.assign(static_cast<std::size_t>(n), profile[0]);

    if (config.mode == SimMode::full) {
        st.N.assign(static_cast<std::size_t>(n), 0.0);
        for (int k = 0; k < n; ++k) {
            double acc = 0.5 * st.I.at(k, 0);
            for (int j = 1; j < J; ++j)
                acc += st.I.at(k, j);
            acc += 0.5 * st.I.at(k, J);
            st.N[static_cast<std::size_t>(k)] = st.S[static_cast<std::size_t>(k)] + acc * dtau;
        }
    } else {
        const auto dem = solve_demography(config.dist, config.b, config.mu);
        if (!dem.viable)
            throw invalid_usage("limiting mode needs a viable demography (b > mu)");
        st.psi_star = dem.psi_star;
    }
    return st;
}

double prevalence_of(const EpidemicState& state, const SimulationConfig& config, int k)
{
    const int J = config.kernels.cells();
    const double dtau = config.kernels.dtau();
    double acc = 0.5 * state.I.at(k - 1, 0);
    for (int j = 1; j < J; ++j)
        acc += state.I.at(k - 1, j);
    acc += 0.5 * state.I.at(k - 1, J);
    return acc * dtau;
}

namespace {

struct StepWorkspace {
    std::vector<double> theta;     // Theta(tau_j)
    std::vector<double> recovery;  // per class: int gamma I dtau (right sum)
    std::vector<double> s_next;
    std::vector<double> n_next;
};

// Shared aggregate Theta(tau_j) = (1/<k>) sum_i phi(i) p(i) I_i(tau_j),
// ascending i for reproducibility.
void compute_theta(const EpidemicState& st, const SimulationConfig& cfg,
                   std::vector<double>& theta)
{
    const int n = cfg.dist.max_degree();
    const int J = cfg.kernels.cells();
    theta.assign(static_cast<std::size_t>(J) + 1, 0.0);
    for (int i = 1; i <= n; ++i) {
        const double w = cfg.phi(i) * cfg.dist.prob(i);
        const double* row = st.I.row(i - 1);
        for (int j = 0; j <= J; ++j)
            theta[static_cast<std::size_t>(j)] += w * row[j];
    }
    const double inv_kmean = 1.0 / cfg.dist.mean_degree();
    for (double& v : theta)
        v *= inv_kmean;
}

} // namespace

void step(EpidemicState& state, const SimulationConfig& config)
{
    const int n = config.dist.max_degree();
    const int J = config.kernels.cells();
    const double dtau = config.kernels.dtau();
    const double dt = config.dt;
    const double nu = dt / dtau;
    const double mu = config.mu;
    const double b = config.b;
    const auto& beta = config.kernels.beta_grid();
    const auto& gamma = config.kernels.gamma_grid();

    static thread_local StepWorkspace ws;

    // (1) aggregates at the old time level
    compute_theta(state, config, ws.theta);
    double force_integral = 0.5 * beta[0] * ws.theta[0]; // trapezoid of beta * Theta
    for (int j = 1; j < J; ++j)
        force_integral += beta[static_cast<std::size_t>(j)] * ws.theta[static_cast<std::size_t>(j)];
    force_integral += 0.5 * beta[static_cast<std::size_t>(J)] * ws.theta[static_cast<std::size_t>(J)];
    force_integral *= dtau;

    // recovery return per class: right-Riemann sum over j >= 1, which returns
    // exactly the mass the transport stencil removes through gamma
    ws.recovery.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
        const double* row = state.I.row(k);
        double acc = 0.0;
        for (int j = 1; j <= J; ++j)
            acc += gamma[static_cast<std::size_t>(j)] * row[j];
        ws.recovery[static_cast<std::size_t>(k)] = acc * dtau;
    }

    // recruitment: limiting mode pins N*_k = b k Psi*/(mu + b k Psi*) through
    // the state's Psi*; full mode uses the current N_k(t) and Psi(t)
    ws.n_next.resize(static_cast<std::size_t>(n));
    std::vector<double>& occupancy = ws.n_next;
    double psi = 0.0;
    if (config.mode == SimMode::limiting) {
        if (!(state.psi_star > 0.0))
            throw invalid_usage("limiting-mode state lacks Psi*; build it with initialize()");
        psi = state.psi_star;
        for (int k = 1; k <= n; ++k) {
            const double bk = b * k * psi;
            occupancy[static_cast<std::size_t>(k - 1)] = bk / (mu + bk);
        }
    } else {
        double acc = 0.0;
        for (int i = 1; i <= n; ++i)
            acc += config.dist.prob(i) * state.N[static_cast<std::size_t>(i - 1)];
        psi = acc / config.dist.mean_degree();
        occupancy = state.N;
    }

    // (2) upwind transport with explicit Euler decay, old values on the RHS
    for (int k = 0; k < n; ++k) {
        double* row = state.I.row(k);
        double left = row[0];
        for (int j = 1; j <= J; ++j) {
            const double cur = row[j];
            row[j] = cur - nu * (cur - left) - dt * (mu + gamma[static_cast<std::size_t>(j)]) * cur;
            left = cur;
        }
    }

    // (4) S update: classical RK4 with Theta (and the recovery return) frozen;
    // the S equation is linear in S over the step
    ws.s_next.resize(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        const double recruit =
            b * k * (1.0 - occupancy[static_cast<std::size_t>(k - 1)]) * psi;
        const double cst = recruit + ws.recovery[static_cast<std::size_t>(k - 1)];
        const double rate = mu + k * force_integral;
        const double s_old = state.S[static_cast<std::size_t>(k - 1)];
        const double f1 = cst - rate * s_old;
        const double f2 = cst - rate * (s_old + 0.5 * dt * f1);
        const double f3 = cst - rate * (s_old + 0.5 * dt * f2);
        const double f4 = cst - rate * (s_old + dt * f3);
        ws.s_next[static_cast<std::size_t>(k - 1)] =
            s_old + dt / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    }

    // (5) full mode: advance the demographic ODE (vector RK4, Psi re-evaluated
    // at substage values)
    if (config.mode == SimMode::full) {
        auto rhs = [&](const std::vector<double>& nv, std::vector<double>& out) {
            double p = 0.0;
            for (int i = 1; i <= n; ++i)
                p += config.dist.prob(i) * nv[static_cast<std::size_t>(i - 1)];
            p /= config.dist.mean_degree();
            for (int k = 1; k <= n; ++k)
                out[static_cast<std::size_t>(k - 1)] =
                    b * k * (1.0 - nv[static_cast<std::size_t>(k - 1)]) * p -
                    mu * nv[static_cast<std::size_t>(k - 1)];
        };
        std::vector<double> f1(static_cast<std::size_t>(n)), f2(f1), f3(f1), f4(f1), tmp(f1);
        rhs(state.N, f1);
        for (int k = 0; k < n; ++k) tmp[static_cast<std::size_t>(k)] = state.N[static_cast<std::size_t>(k)] + 0.5 * dt * f1[static_cast<std::size_t>(k)];
        rhs(tmp, f2);
        for (int k = 0; k < n; ++k) tmp[static_cast<std::size_t>(k)] = state.N[static_cast<std::size_t>(k)] + 0.5 * dt * f2[static_cast<std::size_t>(k)];
        rhs(tmp, f3);
        for (int k = 0; k < n; ++k) tmp[static_cast<std::size_t>(k)] = state.N[static_cast<std::size_t>(k)] + dt * f3[static_cast<std::size_t>(k)];
        rhs(tmp, f4);
        for (int k = 0; k < n; ++k)
            state.N[static_cast<std::size_t>(k)] +=
                dt / 6.0 * (f1[static_cast<std::size_t>(k)] + 2.0 * f2[static_cast<std::size_t>(k)] +
                            2.0 * f3[static_cast<std::size_t>(k)] + f4[static_cast<std::size_t>(k)]);
    }

    // (3) boundary condition at the new time level: I_k(t+dt, 0) = k S A
    for (int k = 1; k <= n; ++k) {
        state.S[static_cast<std::size_t>(k - 1)] = ws.s_next[static_cast<std::size_t>(k - 1)];
        const double z = k * ws.s_next[static_cast<std::size_t>(k - 1)] * force_integral;
        state.I.at(k - 1, 0) = z;
        state.Z[static_cast<std::size_t>(k - 1)] = z;
    }

    state.t += dt;

    // positivity violations are surfaced, never clipped
    for (int k = 0; k < n; ++k) {
        const double s = state.S[static_cast<std::size_t>(k)];
        if (!std::isfinite(s) || s < 0.0)
            throw numerical_failure("unstable S = " + std::to_string(s) + " at k=" +
                                    std::to_string(k + 1) + ", t=" + std::to_string(state.t) +
                                    "; reduce dt");
        const double* row = state.I.row(k);
        for (int j = 0; j <= J; ++j)
            if (!std::isfinite(row[j]) || row[j] < 0.0)
                throw numerical_failure("unstable I = " + std::to_string(row[j]) + " at k=" +
                                        std::to_string(k + 1) + ", tau=" + std::to_string(dtau * j) +
                                        ", t=" + std::to_string(state.t) + "; reduce dt");
    }
}

namespace {

void record_observables(const EpidemicState& st, const SimulationConfig& cfg,
                        ObservableSeries& out)
{
    const int n = cfg.dist.max_degree();
    out.times.push_back(st.t);
    std::vector<double> prev(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k)
        prev[static_cast<std::size_t>(k - 1)] = prevalence_of(st, cfg, k);
    double total = 0.0;
    for (int k = 1; k <= n; ++k)
        total += cfg.dist.prob(k) * prev[static_cast<std::size_t>(k - 1)];
    out.susceptible_by_degree.push_back(st.S);
    out.prevalence_by_degree.push_back(std::move(prev));
    out.incidence_by_degree.push_back(st.Z);
    out.total_prevalence.push_back(total);
    if (cfg.record_theta) {
        std::vector<double> theta;
        compute_theta(st, cfg, theta);
        out.theta_profiles.push_back(std::move(theta));
    }
}

} // namespace

ObservableSeries run(const SimulationConfig& config)
{
    ObservableSeries out;
    EpidemicState st = initialize(config);
    record_observables(st, config, out);
    if (config.state_stride > 0)
        out.states.push_back(st);

    const long steps = std::lround(config.t_end / config.dt);
    for (long s = 1; s <= steps; ++s) {
        step(st, config);
        st.t = config.dt * static_cast<double>(s); // avoid accumulated roundoff in t
        if (s % config.output_stride == 0 || s == steps)
            if (out.times.empty() || out.times.back() != st.t)
                record_observables(st, config, out);
        if (config.state_stride > 0 && s % config.state_stride == 0)
            out.states.push_back(st);
    }
    out.final_state = std::move(st);
    return out;
}

LyapunovContext make_lyapunov_context(const SimulationConfig& config, double gamma_const)
{
    if (config.mode != SimMode::limiting)
        throw invalid_usage("Lyapunov diagnostic is defined for the limiting system");
    if (config.kernels.gamma().family() != AgeKernel::Family::constant)
        throw invalid_usage("Lyapunov diagnostic needs a constant gamma kernel");
    const auto dem = solve_demography(config.dist, config.b, config.mu);
    if (!dem.viable)
        throw invalid_usage("Lyapunov diagnostic needs a viable demography");
    auto endemic = endemic_equilibrium(config.dist, config.phi, config.kernels, dem);
    if (!endemic)
        throw invalid_usage("Lyapunov diagnostic needs R0 > 1 (endemic equilibrium)");

    LyapunovContext ctx;
    ctx.s_star = std::move(endemic->s_star);
    ctx.z_star = std::move(endemic->z_star);
    ctx.w_star = endemic->w_star;
    ctx.pi = config.kernels.pi_kernel(gamma_const);
    ctx.h = config.kernels.survival();
    return ctx;
}

double lyapunov_value(const EpidemicState& state, const SimulationConfig& config,
                      const LyapunovContext& ctx)
{
    const int n = config.dist.max_degree();
    const int J = config.kernels.cells();
    const double dtau = config.kernels.dtau();
    const double kmean = config.dist.mean_degree();
    auto g = [](double x) { return x - 1.0 - std::log(x); };

    double total = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double s = state.S[static_cast<std::size_t>(k - 1)];
        const double s_star = ctx.s_star[static_cast<std::size_t>(k - 1)];
        const double z_star = ctx.z_star[static_cast<std::size_t>(k - 1)];
        if (!(s > 0.0))
            throw diagnostic_unavailable("S_" + std::to_string(k) + " <= 0 at t=" +
                                         std::to_string(state.t));
        double v = s_star * g(s / s_star);

        // age integral of pi I* g(I/I*) by trapezoid
        double integral = 0.0;
        const double* row = state.I.row(k - 1);
        for (int j = 0; j <= J; ++j) {
            const double istar = z_star * ctx.h[static_cast<std::size_t>(j)];
            const double ij = row[j];
            if (!(ij > 0.0))
                throw diagnostic_unavailable("I_" + std::to_string(k) + "(tau=" +
                                             std::to_string(dtau * j) + ") <= 0 at t=" +
                                             std::to_string(state.t));
            const double w = (j == 0 || j == J) ? 0.5 : 1.0;
            integral += w * ctx.pi[static_cast<std::size_t>(j)] * istar * g(ij / istar);
        }
        integral *= dtau;
        v += (k * s_star / kmean) * (ctx.w_star / z_star) * integral;
        total += v; // c_k = 1
    }
    return total;
}

std::vector<double> lyapunov_trace(const std::vector<EpidemicState>& states,
                                   const SimulationConfig& config, double gamma_const)
{
    const LyapunovContext ctx = make_lyapunov_context(config, gamma_const);
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& st : states) {
        try {
            out.push_back(lyapunov_value(st, config, ctx));
        } catch (const diagnostic_unavailable&) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return out;
}

std::vector<bool> persistence_check(const ObservableSeries& series, double epsilon, double window)
{
    if (series.times.empty())
        throw invalid_parameter("empty series");
    if (!(window > 0.0))
        throw invalid_parameter("window must be positive");
    const double t_end = series.times.back();
    const double t_from = t_end - window;
    if (t_from < series.times.front())
        throw invalid_parameter("window longer than the recorded series");

    const std::size_t n = series.prevalence_by_degree.front().size();
    std::vector<bool> persistent(n, true);
    for (std::size_t m = 0; m < series.times.size(); ++m) {
        if (series.times[m] < t_from)
            continue;
        for (std::size_t k = 0; k < n; ++k) {
            if (series.prevalence_by_degree[m][k] <= epsilon ||
                series.susceptible_by_degree[m][k] <= epsilon)
                persistent[k] = false;
        }
    }
    return persistent;
}

} // namespace agesis
