#include "agesis/config.hpp"
#include "agesis/demography.hpp"
#include "agesis/errors.hpp"
#include "agesis/simulator.hpp"
#include "agesis/threshold.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 ok, 1 usage/config, 2 regime (extinction), 3 numerical failure
enum ExitCode { kOk = 0, kUsage = 1, kRegime = 2, kNumerical = 3 };

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

json meta_block(const agesis::ConfigBundle& bundle)
{
    const auto& sim = bundle.sim;
    json meta;
    meta["version"] = kVersion;
    meta["config_hash"] = bundle.config_hash;
    meta["dt"] = sim.dt;
    meta["dtau"] = sim.kernels.dtau();
    meta["tau_max"] = sim.kernels.tau_max();
    meta["t_end"] = sim.t_end;
    meta["mode"] = sim.mode == agesis::SimMode::full ? "full" : "limiting";
    meta["scheme"] = "first-order upwind + classical RK4";
    return meta;
}

void write_csv_meta(std::ofstream& out, const agesis::ConfigBundle& bundle)
{
    const auto& sim = bundle.sim;
    out << "# agesis " << kVersion << "\n";
    out << "# config_hash=" << bundle.config_hash << "\n";
    out << "# mesh dt=" << fmt(sim.dt) << " dtau=" << fmt(sim.kernels.dtau())
        << " tau_max=" << fmt(sim.kernels.tau_max()) << "\n";
    out << "# mode=" << (sim.mode == agesis::SimMode::full ? "full" : "limiting")
        << " t_end=" << fmt(sim.t_end) << " scheme=upwind+rk4\n";
}

std::ofstream open_out(const fs::path& dir, const std::string& name)
{
    fs::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out)
        throw agesis::invalid_parameter("cannot write " + (dir / name).string());
    return out;
}

void write_json(const fs::path& dir, const std::string& name, const json& j)
{
    auto out = open_out(dir, name);
    out << j.dump(2) << "\n";
}

agesis::DemographicEquilibrium require_viable(const agesis::ConfigBundle& bundle)
{
    auto dem = agesis::solve_demography(bundle.dist(), bundle.sim.b, bundle.sim.mu);
    if (!dem.viable) {
        std::cerr << "extinction regime: b = " << bundle.sim.b << " <= mu = " << bundle.sim.mu
                  << "; no demographic equilibrium to analyse\n";
        std::exit(kRegime);
    }
    return dem;
}

int cmd_r0(const agesis::ConfigBundle& bundle)
{
    const auto dem = require_viable(bundle);
    const auto s0 = agesis::disease_free_equilibrium(dem, bundle.dist());
    const double r0 = agesis::basic_reproduction_number(bundle.dist(), bundle.phi(),
                                                        bundle.kernels(), s0);
    json j;
    j["meta"] = meta_block(bundle);
    j["r0"] = r0;
    j["psi_star"] = dem.psi_star;
    j["k1_0"] = bundle.kernels().k1(0.0);
    j["k2_0"] = bundle.kernels().k2(0.0);
    j["s0"] = s0;
    write_json(bundle.output_dir, "r0.json", j);
    std::cout << "R0 = " << fmt(r0) << "\n";
    return kOk;
}

int cmd_equilibrium(const agesis::ConfigBundle& bundle)
{
    const auto dem = require_viable(bundle);
    const auto rep =
        agesis::make_equilibrium_report(bundle.dist(), bundle.phi(), bundle.kernels(), dem);
    json j;
    j["meta"] = meta_block(bundle);
    j["r0"] = rep.r0;
    j["k1_0"] = rep.k1_0;
    j["k2_0"] = rep.k2_0;
    j["psi_star"] = rep.psi_star;
    j["s0"] = rep.s0;
    if (rep.endemic) {
        json e;
        e["s_star"] = rep.endemic->s_star;
        e["z_star"] = rep.endemic->z_star;
        e["w_star"] = rep.endemic->w_star;
        e["residual"] = rep.endemic->residual;
        const auto& H = bundle.kernels().survival();
        double hsum = 0.5 * H.front() + 0.5 * H.back();
        for (std::size_t m = 1; m + 1 < H.size(); ++m)
            hsum += H[m];
        hsum *= bundle.kernels().dtau();
        std::vector<double> prevalence;
        for (const auto& z : rep.endemic->z_star)
            prevalence.push_back(z * hsum);
        e["i_star"] = prevalence;
        j["endemic"] = std::move(e);
    } else {
        j["endemic"] = nullptr;
    }
    if (rep.characteristic_root)
        j["characteristic_root"] = *rep.characteristic_root;
    else
        j["characteristic_root"] = nullptr;
    write_json(bundle.output_dir, "equilibrium.json", j);
    std::cout << "R0 = " << fmt(rep.r0) << ", endemic "
              << (rep.endemic ? "present" : "absent") << "\n";
    return kOk;
}

int cmd_demography(const agesis::ConfigBundle& bundle, bool trajectory, double n0)
{
    const auto dem = agesis::solve_demography(bundle.dist(), bundle.sim.b, bundle.sim.mu);
    json j;
    j["meta"] = meta_block(bundle);
    j["viable"] = dem.viable;
    j["psi_star"] = dem.psi_star;
    j["n_star"] = dem.n_star;
    write_json(bundle.output_dir, "demography.json", j);
    if (trajectory) {
        const auto traj = agesis::integrate_demography(bundle.dist(), bundle.sim.b, bundle.sim.mu,
                                                       {n0}, bundle.sim.dt, bundle.sim.t_end);
        auto out = open_out(bundle.output_dir, "demography_trajectory.csv");
        write_csv_meta(out, bundle);
        out << "t,k,N\n";
        for (std::size_t m = 0; m < traj.times.size(); ++m)
            for (std::size_t k = 0; k < traj.n[m].size(); ++k)
                out << fmt(traj.times[m]) << ',' << (k + 1) << ',' << fmt(traj.n[m][k]) << "\n";
        auto gp = open_out(bundle.output_dir, "plot_demography.gp");
        gp << "# gnuplot script for demography_trajectory.csv\n";
        gp << "# config_hash=" << bundle.config_hash << "\n";
        gp << "set datafile separator ','\nset datafile commentschars '#'\n";
        gp << "set xlabel 't'\nset ylabel 'N_k(t)'\nset key outside\n";
        const int n = bundle.dist().max_degree();
        gp << "plot 'demography_trajectory.csv' using 1:($2==1?$3:1/0) with lines title 'k=1'";
        if (n > 1)
            gp << ", \\\n     'demography_trajectory.csv' using 1:($2==" << n
               << "?$3:1/0) with lines title 'k=" << n << "'";
        gp << "\n";
    }
    std::cout << (dem.viable ? "viable" : "extinction") << ", psi_star = " << fmt(dem.psi_star)
              << "\n";
    return kOk;
}

void write_series_csv(const agesis::ConfigBundle& bundle, const agesis::ObservableSeries& series)
{
    auto out = open_out(bundle.output_dir, "series.csv");
    write_csv_meta(out, bundle);
    out << "t,k,S,I,Z\n";
    const int n = bundle.dist().max_degree();
    for (std::size_t m = 0; m < series.times.size(); ++m)
        for (int k = 0; k < n; ++k)
            out << fmt(series.times[m]) << ',' << (k + 1) << ','
                << fmt(series.susceptible_by_degree[m][static_cast<std::size_t>(k)]) << ','
                << fmt(series.prevalence_by_degree[m][static_cast<std::size_t>(k)]) << ','
                << fmt(series.incidence_by_degree[m][static_cast<std::size_t>(k)]) << "\n";
}

void write_plot_script(const agesis::ConfigBundle& bundle)
{
    auto out = open_out(bundle.output_dir, "plot_series.gp");
    const int n = bundle.dist().max_degree();
    std::vector<int> picks;
    for (int k : {n / 4, n / 2, 3 * n / 4, n})
        if (k >= 1 && (picks.empty() || picks.back() != k))
            picks.push_back(k);
    out << "# gnuplot script for series.csv (run: gnuplot -p plot_series.gp)\n";
    out << "# config_hash=" << bundle.config_hash << "\n";
    out << "set datafile separator ','\n";
    out << "set datafile commentschars '#'\n";
    out << "set xlabel 't'\n";
    out << "set ylabel 'I_k(t)'\n";
    out << "set key outside\n";
    out << "plot ";
    for (std::size_t i = 0; i < picks.size(); ++i) {
        if (i) out << ", \\\n     ";
        out << "'series.csv' using 1:($2==" << picks[i] << "?$4:1/0) with lines title 'k="
            << picks[i] << "'";
    }
    out << "\n";
}

json terminal_diagnostics(const agesis::ConfigBundle& bundle,
                          const agesis::ObservableSeries& series)
{
    const auto& sim = bundle.sim;
    const int n = bundle.dist().max_degree();
    const auto& st = series.final_state;
    json diag;
    diag["t"] = st.t;

    std::vector<double> prev(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k)
        prev[static_cast<std::size_t>(k - 1)] = agesis::prevalence_of(st, sim, k);
    double maxp = 0.0, total = 0.0;
    bool monotone = true;
    for (int k = 0; k < n; ++k) {
        maxp = std::max(maxp, prev[static_cast<std::size_t>(k)]);
        total += bundle.dist().prob(k + 1) * prev[static_cast<std::size_t>(k)];
        if (k > 0 && prev[static_cast<std::size_t>(k)] <= prev[static_cast<std::size_t>(k - 1)])
            monotone = false;
    }
    diag["max_prevalence"] = maxp;
    diag["total_prevalence"] = total;
    diag["prevalence_monotone_in_k"] = monotone;

    const auto dem = agesis::solve_demography(bundle.dist(), sim.b, sim.mu);
    if (dem.viable) {
        const auto s0 = agesis::disease_free_equilibrium(dem, bundle.dist());
        diag["r0"] = agesis::basic_reproduction_number(bundle.dist(), bundle.phi(),
                                                       bundle.kernels(), s0);
        if (sim.mode == agesis::SimMode::limiting) {
            double drift = 0.0;
            for (int k = 0; k < n; ++k) {
                const double q =
                    st.S[static_cast<std::size_t>(k)] + prev[static_cast<std::size_t>(k)];
                drift = std::max(drift, std::abs(q - dem.n_star[static_cast<std::size_t>(k)]));
            }
            diag["conservation_drift"] = drift;
        }
    }

    const double window = std::min(sim.t_end * 0.2, 100.0);
    if (window > 0.0 && series.times.back() - series.times.front() >= window) {
        const auto persistent = agesis::persistence_check(series, 1e-4, window);
        diag["persistent"] = std::vector<bool>(persistent.begin(), persistent.end());
    }
    return diag;
}

int cmd_simulate(const agesis::ConfigBundle& bundle)
{
    if (bundle.sim.mode == agesis::SimMode::limiting)
        (void)require_viable(bundle);
    const auto series = agesis::run(bundle.sim);
    write_series_csv(bundle, series);
    write_plot_script(bundle);
    json j;
    j["meta"] = meta_block(bundle);
    j["terminal"] = terminal_diagnostics(bundle, series);
    write_json(bundle.output_dir, "diagnostics.json", j);
    if (bundle.write_age_profile) {
        auto out = open_out(bundle.output_dir, "age_profile.csv");
        write_csv_meta(out, bundle);
        out << "t,tau,k,I\n";
        const auto& st = series.final_state;
        for (int j2 = 0; j2 <= bundle.kernels().cells(); ++j2)
            for (int k = 0; k < bundle.dist().max_degree(); ++k)
                out << fmt(st.t) << ',' << fmt(bundle.kernels().tau(j2)) << ',' << (k + 1) << ','
                    << fmt(st.I.at(k, j2)) << "\n";
        auto gp = open_out(bundle.output_dir, "plot_age_profile.gp");
        const int n = bundle.dist().max_degree();
        gp << "# gnuplot script for age_profile.csv (terminal snapshot)\n";
        gp << "# config_hash=" << bundle.config_hash << "\n";
        gp << "set datafile separator ','\nset datafile commentschars '#'\n";
        gp << "set xlabel 'tau'\nset ylabel 'I(t_end, tau)'\nset key outside\n";
        gp << "plot 'age_profile.csv' using 2:($3==" << n << "?$4:1/0) with lines title 'k="
           << n << "'\n";
    }
    std::cout << "simulated to t = " << fmt(series.final_state.t) << ", wrote "
              << (bundle.output_dir / "series.csv").string() << "\n";
    return kOk;
}

int cmd_sweep(const agesis::RawConfig& raw, const std::vector<std::string>& params,
              const std::vector<std::string>& value_lists, const fs::path& out_override)
{
    if (params.size() != value_lists.size())
        throw agesis::invalid_parameter("each --param needs a matching --values list");
    if (params.empty())
        throw agesis::invalid_parameter("sweep needs at least one --param");

    std::vector<std::vector<std::string>> grids;
    for (const auto& list : value_lists) {
        std::vector<std::string> grid;
        std::stringstream ss(list);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty())
                grid.push_back(item);
        grids.push_back(std::move(grid));
    }

    const agesis::ConfigBundle base = agesis::build_bundle(raw);
    const fs::path dir = out_override.empty() ? base.output_dir : out_override;
    auto out = open_out(dir, "sweep.csv");
    write_csv_meta(out, base);
    for (const auto& p : params)
        out << p << ',';
    out << "r0,endemic,w_star\n";

    bool empty = false;
    for (const auto& g : grids)
        if (g.empty())
            empty = true;

    // declared grid order, last parameter fastest
    std::vector<std::size_t> idx(params.size(), 0);
    while (!empty) {
        agesis::RawConfig point = raw;
        for (std::size_t i = 0; i < params.size(); ++i)
            point.set(params[i], grids[i][idx[i]]);
        const auto bundle = agesis::build_bundle(point);
        const auto dem = agesis::solve_demography(bundle.dist(), bundle.sim.b, bundle.sim.mu);
        std::string row;
        for (std::size_t i = 0; i < params.size(); ++i)
            row += grids[i][idx[i]] + ",";
        if (!dem.viable) {
            row += "0,0,";
        } else {
            const auto s0 = agesis::disease_free_equilibrium(dem, bundle.dist());
            const double r0 = agesis::basic_reproduction_number(bundle.dist(), bundle.phi(),
                                                                bundle.kernels(), s0);
            const auto endemic =
                agesis::endemic_equilibrium(bundle.dist(), bundle.phi(), bundle.kernels(), dem);
            row += fmt(r0);
            row += endemic ? ",1," + fmt(endemic->w_star) : ",0,";
        }
        out << row << "\n";

        std::size_t i = params.size();
        while (i > 0) {
            --i;
            if (++idx[i] < grids[i].size())
                break;
            idx[i] = 0;
            if (i == 0)
                empty = true;
        }
    }
    std::cout << "wrote " << (dir / "sweep.csv").string() << "\n";
    return kOk;
}

int cmd_validate(const agesis::ConfigBundle& bundle)
{
    if (bundle.sim.mode == agesis::SimMode::limiting)
        (void)require_viable(bundle);

    agesis::SimulationConfig sim = bundle.sim;
    sim.state_stride = std::max(1, static_cast<int>(std::lround(sim.t_end / sim.dt)) / 100);
    const auto series = agesis::run(sim);
    const auto dem = agesis::solve_demography(bundle.dist(), sim.b, sim.mu);
    const auto s0 = agesis::disease_free_equilibrium(dem, bundle.dist());
    const double r0 =
        agesis::basic_reproduction_number(bundle.dist(), bundle.phi(), bundle.kernels(), s0);
    const int n = bundle.dist().max_degree();

    json checks;
    bool all_ok = true;
    auto report = [&](const std::string& name, const std::string& status,
                      const std::string& detail) {
        std::cout << status << " " << name << ": " << detail << "\n";
        checks[name] = {{"status", status}, {"detail", detail}};
        if (status == "FAIL")
            all_ok = false;
    };

    // positivity over all recorded states
    double min_entry = 0.0;
    for (const auto& st : series.states) {
        for (double v : st.S)
            min_entry = std::min(min_entry, v);
        for (double v : st.I.v)
            min_entry = std::min(min_entry, v);
    }
    report("positivity", min_entry >= 0.0 ? "PASS" : "FAIL",
           "min state entry " + fmt(min_entry));

    if (sim.mode == agesis::SimMode::limiting) {
        double drift = 0.0;
        const auto& st = series.final_state;
        for (int k = 1; k <= n; ++k) {
            const double q = st.S[static_cast<std::size_t>(k - 1)] +
                             agesis::prevalence_of(st, sim, k);
            drift = std::max(drift, std::abs(q - dem.n_star[static_cast<std::size_t>(k - 1)]));
        }
        report("conservation", drift < 1e-2 ? "PASS" : "FAIL",
               "terminal max_k |S + int I - N*| = " + fmt(drift));
    } else {
        double gap = 0.0;
        const auto& st = series.final_state;
        for (int k = 1; k <= n; ++k) {
            const double q = st.S[static_cast<std::size_t>(k - 1)] +
                             agesis::prevalence_of(st, sim, k);
            gap = std::max(gap, std::abs(q - st.N[static_cast<std::size_t>(k - 1)]));
        }
        report("consistency", gap < 1e-2 ? "PASS" : "FAIL",
               "terminal max_k |S + int I - N| = " + fmt(gap));
    }

    if (bundle.kernels().gamma().family() == agesis::AgeKernel::Family::constant && r0 > 1.0 &&
        sim.mode == agesis::SimMode::limiting) {
        const auto trace = agesis::lyapunov_trace(series.states, sim,
                                                  bundle.kernels().gamma().constant_value());
        double worst = -std::numeric_limits<double>::infinity();
        double last = std::numeric_limits<double>::quiet_NaN();
        for (double v : trace) {
            if (std::isnan(v))
                continue;
            if (!std::isnan(last))
                worst = std::max(worst, v - last);
            last = v;
        }
        report("lyapunov", worst <= 1e-6 ? "PASS" : "FAIL",
               "max V increase between records " + fmt(worst));
    } else {
        report("lyapunov", "SKIP", "needs limiting mode, constant gamma and R0 > 1");
    }

    const double window = std::min(sim.t_end * 0.2, 100.0);
    bool all_persistent = true;
    for (bool p : agesis::persistence_check(series, 1e-4, window))
        all_persistent = all_persistent && p;
    const bool consistent = all_persistent == (r0 > 1.0);
    report("persistence", consistent ? "PASS" : "FAIL",
           std::string("persistent=") + (all_persistent ? "true" : "false") + " with R0 = " +
               fmt(r0) + (consistent ? " (consistent)" : " (inconsistent with threshold)"));

    json j;
    j["meta"] = meta_block(bundle);
    j["checks"] = checks;
    j["all_passed"] = all_ok;
    write_json(bundle.output_dir, "validate.json", j);
    return all_ok ? kOk : kNumerical;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"age-of-infection SIS dynamics on degree-heterogeneous networks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool seedless = false; // no RNG anywhere; flag documents the contract
    app.add_flag("--seedless", seedless, "deterministic outputs (always on; flag is informative)");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file")->required();
        cmd->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    };

    auto* c_r0 = app.add_subcommand("r0", "basic reproduction number");
    add_common(c_r0);
    auto* c_eq = app.add_subcommand("equilibrium", "disease-free and endemic equilibria");
    add_common(c_eq);
    auto* c_dem = app.add_subcommand("demography", "demographic equilibrium");
    add_common(c_dem);
    bool trajectory = false;
    double n0 = 0.5;
    c_dem->add_flag("--trajectory", trajectory, "also integrate the demographic ODE");
    c_dem->add_option("--n0", n0, "uniform initial occupancy for --trajectory");
    auto* c_sim = app.add_subcommand("simulate", "integrate the full or limiting system");
    add_common(c_sim);
    auto* c_sweep = app.add_subcommand("sweep", "parameter sweep (R0 and endemic summary)");
    add_common(c_sweep);
    std::vector<std::string> sweep_params, sweep_values;
    c_sweep->add_option("--param", sweep_params, "config key to sweep, e.g. phi.a")->take_all();
    c_sweep->add_option("--values", sweep_values, "comma list of grid values (one per --param)")
        ->take_all();
    auto* c_val = app.add_subcommand("validate", "run the built-in diagnostic suite");
    add_common(c_val);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the error message
        return code == 0 ? kOk : kUsage;
    }

    try {
        agesis::RawConfig raw = agesis::RawConfig::parse_file(config_path);

        if (app.got_subcommand(c_sweep))
            return cmd_sweep(raw, sweep_params, sweep_values,
                             out_dir.empty() ? fs::path() : fs::path(out_dir));

        agesis::ConfigBundle bundle = agesis::build_bundle(raw);
        if (!out_dir.empty())
            bundle.output_dir = out_dir;
        if (app.got_subcommand(c_r0))
            return cmd_r0(bundle);
        if (app.got_subcommand(c_eq))
            return cmd_equilibrium(bundle);
        if (app.got_subcommand(c_dem))
            return cmd_demography(bundle, trajectory, n0);
        if (app.got_subcommand(c_sim))
            return cmd_simulate(bundle);
        if (app.got_subcommand(c_val))
            return cmd_validate(bundle);
        return kUsage;
    } catch (const agesis::numerical_failure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
