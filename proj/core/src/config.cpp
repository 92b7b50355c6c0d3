#include "agesis/config.hpp"

#include "agesis/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace agesis {

namespace {

std::string trim(const std::string& s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& section, const std::string& key, const std::string& value)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw invalid_parameter("config " + section + "." + key + ": '" + value +
                                "' is not a number");
    }
    if (pos != value.size())
        throw invalid_parameter("config " + section + "." + key + ": trailing characters in '" +
                                value + "'");
    return v;
}

int parse_int(const std::string& section, const std::string& key, const std::string& value)
{
    const double v = parse_double(section, key, value);
    const int i = static_cast<int>(std::llround(v));
    if (std::abs(v - i) > 0.0)
        throw invalid_parameter("config " + section + "." + key + ": expected an integer");
    return i;
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw invalid_parameter("config " + section + "." + key + ": expected a boolean");
}

std::vector<double> parse_list(const std::string& section, const std::string& key,
                               const std::string& value)
{
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(parse_double(section, key, item));
    }
    return out;
}

std::vector<double> load_kernel_table(const std::filesystem::path& path, double dtau, int cells)
{
    std::ifstream in(path);
    if (!in)
        throw invalid_parameter("cannot open kernel table " + path.string());
    std::vector<double> values;
    std::string line;
    int j = 0;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double tau = 0.0, v = 0.0;
        if (!(ls >> tau >> v))
            throw invalid_parameter("kernel table " + path.string() + ": malformed line '" + line +
                                    "'");
        if (std::abs(tau - dtau * j) > 1e-9)
            throw invalid_parameter("kernel table " + path.string() + ": row " +
                                    std::to_string(j) + " has tau=" + std::to_string(tau) +
                                    ", grid expects " + std::to_string(dtau * j));
        values.push_back(v);
        ++j;
    }
    if (static_cast<int>(values.size()) != cells + 1)
        throw invalid_parameter("kernel table " + path.string() + " has " +
                                std::to_string(values.size()) + " rows, grid has " +
                                std::to_string(cells + 1) + " nodes");
    return values;
}

} // namespace

RawConfig RawConfig::parse_string(const std::string& text, const std::filesystem::path& base_dir)
{
    RawConfig cfg;
    cfg.base_dir_ = base_dir;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos)
            line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw invalid_parameter("config line " + std::to_string(lineno) +
                                        ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw invalid_parameter("config line " + std::to_string(lineno) +
                                        ": empty section name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw invalid_parameter("config line " + std::to_string(lineno) +
                                    ": expected key = value");
        if (section.empty())
            throw invalid_parameter("config line " + std::to_string(lineno) +
                                    ": key outside any [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw invalid_parameter("config line " + std::to_string(lineno) +
                                    ": empty key or value");
        for (const auto& e : cfg.entries_)
            if (e.section == section && e.key == key)
                throw invalid_parameter("config: duplicate key " + section + "." + key);
        cfg.entries_.push_back({section, key, value});
    }
    return cfg;
}

RawConfig RawConfig::parse_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw invalid_parameter("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path.has_parent_path() ? path.parent_path() : ".");
}

bool RawConfig::has(const std::string& section, const std::string& key) const
{
    for (const auto& e : entries_)
        if (e.section == section && e.key == key)
            return true;
    return false;
}

const std::string& RawConfig::get(const std::string& section, const std::string& key) const
{
    for (const auto& e : entries_)
        if (e.section == section && e.key == key)
            return e.value;
    throw invalid_parameter("config: missing required key " + section + "." + key);
}

std::string RawConfig::get_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const
{
    return has(section, key) ? get(section, key) : fallback;
}

void RawConfig::set(const std::string& dotted, const std::string& value)
{
    const std::size_t dot = dotted.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == dotted.size())
        throw invalid_parameter("parameter path must look like section.key, got '" + dotted + "'");
    const std::string section = dotted.substr(0, dot);
    const std::string key = dotted.substr(dot + 1);
    for (auto& e : entries_) {
        if (e.section == section && e.key == key) {
            e.value = value;
            return;
        }
    }
    entries_.push_back({section, key, value});
}

std::string RawConfig::hash() const
{
    std::vector<std::string> lines;
    lines.reserve(entries_.size());
    for (const auto& e : entries_)
        lines.push_back(e.section + "." + e.key + "=" + e.value);
    std::sort(lines.begin(), lines.end());
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& l : lines) {
        for (char c : l) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        h ^= static_cast<unsigned char>('\n');
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

const std::set<std::string> kSections = {"network", "phi",        "kernels",
                                         "demography", "simulation", "output"};
const std::set<std::string> kKeys = {
    "network.family",   "network.r",        "network.n",         "network.probabilities",
    "phi.family",       "phi.h",            "phi.omega",         "phi.a",
    "phi.nu",           "kernels.beta",     "kernels.beta_c",    "kernels.beta_q",
    "kernels.beta_T",   "kernels.beta_s",   "kernels.beta_table","kernels.gamma",
    "kernels.gamma_c",  "kernels.gamma_q",  "kernels.gamma_T",   "kernels.gamma_s",
    "kernels.gamma_table", "kernels.mu",    "kernels.tau_max",   "kernels.dtau",
    "demography.b",     "simulation.dt",    "simulation.t_end",  "simulation.mode",
    "simulation.s0",    "simulation.i0",    "simulation.output_stride",
    "output.directory", "output.age_profile"};

AgeKernel build_kernel(const RawConfig& raw, const std::string& which, double dtau, int cells)
{
    const std::string family = raw.get("kernels", which);
    if (family == "constant")
        return AgeKernel::constant(parse_double("kernels", which + "_c",
                                                raw.get("kernels", which + "_c")));
    if (family == "rational_decay")
        return AgeKernel::rational_decay(parse_double("kernels", which + "_q",
                                                      raw.get("kernels", which + "_q")));
    if (family == "parabolic")
        return AgeKernel::parabolic(
            parse_double("kernels", which + "_T", raw.get("kernels", which + "_T")),
            parse_double("kernels", which + "_s", raw.get("kernels", which + "_s")));
    if (family == "tabulated") {
        const std::filesystem::path p =
            raw.base_dir() / raw.get("kernels", which + "_table");
        return AgeKernel::tabulated(load_kernel_table(p, dtau, cells));
    }
    throw invalid_parameter("kernels." + which + ": unknown family '" + family + "'");
}

} // namespace

ConfigBundle build_bundle(const RawConfig& raw)
{
    for (const auto& e : raw.entries()) {
        if (!kSections.count(e.section))
            throw invalid_parameter("config: unknown section [" + e.section + "]");
        if (!kKeys.count(e.section + "." + e.key))
            throw invalid_parameter("config: unknown key " + e.section + "." + e.key);
    }

    // network
    const std::string net_family = raw.get("network", "family");
    std::optional<DegreeDistribution> dist;
    if (net_family == "power_law") {
        dist = DegreeDistribution::power_law(
            parse_double("network", "r", raw.get("network", "r")),
            parse_int("network", "n", raw.get("network", "n")));
    } else if (net_family == "explicit") {
        dist = DegreeDistribution(
            parse_list("network", "probabilities", raw.get("network", "probabilities")));
    } else {
        throw invalid_parameter("network.family: unknown value '" + net_family + "'");
    }

    // phi
    const std::string phi_family = raw.get_or("phi", "family", "linear");
    std::optional<InfectivityFunction> phi;
    if (phi_family == "linear")
        phi = InfectivityFunction::linear();
    else if (phi_family == "constant")
        phi = InfectivityFunction::constant(parse_double("phi", "h", raw.get("phi", "h")));
    else if (phi_family == "saturated")
        phi = InfectivityFunction::saturated(
            parse_double("phi", "omega", raw.get("phi", "omega")),
            parse_double("phi", "a", raw.get("phi", "a")),
            parse_double("phi", "nu", raw.get("phi", "nu")));
    else
        throw invalid_parameter("phi.family: unknown value '" + phi_family + "'");

    // kernels
    const double mu = parse_double("kernels", "mu", raw.get("kernels", "mu"));
    const double tau_max = parse_double("kernels", "tau_max", raw.get("kernels", "tau_max"));
    const double dtau = parse_double("kernels", "dtau", raw.get("kernels", "dtau"));
    if (!(dtau > 0.0))
        throw invalid_parameter("kernels.dtau must be positive");
    const int cells = static_cast<int>(std::llround(tau_max / dtau));
    AgeKernel beta = build_kernel(raw, "beta", dtau, cells);
    AgeKernel gamma = build_kernel(raw, "gamma", dtau, cells);
    KernelSet ks(std::move(beta), std::move(gamma), mu, tau_max, dtau);

    // simulation
    SimulationConfig sim{*dist, *phi, std::move(ks)};
    sim.b = parse_double("demography", "b", raw.get("demography", "b"));
    sim.mu = mu;
    sim.dt = parse_double("simulation", "dt", raw.get("simulation", "dt"));
    sim.t_end = parse_double("simulation", "t_end", raw.get("simulation", "t_end"));
    const std::string mode = raw.get_or("simulation", "mode", "limiting");
    if (mode == "full")
        sim.mode = SimMode::full;
    else if (mode == "limiting")
        sim.mode = SimMode::limiting;
    else
        throw invalid_parameter("simulation.mode: unknown value '" + mode + "'");
    sim.initial.s0 = parse_list("simulation", "s0", raw.get_or("simulation", "s0", "0.6"));
    const std::string i0 = raw.get_or("simulation", "i0", "shifted_gaussian");
    if (i0 == "shifted_gaussian")
        sim.initial.i0_kind = InitialData::I0Kind::shifted_gaussian;
    else if (i0 == "zero")
        sim.initial.i0_kind = InitialData::I0Kind::zero;
    else if (i0.rfind("table:", 0) == 0) {
        sim.initial.i0_kind = InitialData::I0Kind::table;
        std::vector<double> table =
            load_kernel_table(raw.base_dir() / i0.substr(6), dtau, cells);
        sim.initial.i0_table = std::move(table);
    } else
        throw invalid_parameter("simulation.i0: unknown value '" + i0 + "'");
    sim.output_stride =
        parse_int("simulation", "output_stride", raw.get_or("simulation", "output_stride", "10"));

    sim.validate(); // CFL and the rest, rejected at load time

    ConfigBundle bundle{std::move(sim)};
    bundle.output_dir = raw.get_or("output", "directory", "out");
    bundle.write_age_profile =
        raw.has("output", "age_profile") &&
        parse_bool("output", "age_profile", raw.get("output", "age_profile"));
    bundle.config_hash = raw.hash();
    return bundle;
}

} // namespace agesis
