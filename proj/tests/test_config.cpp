#include "agesis/config.hpp"
#include "agesis/errors.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace agesis;

namespace {

const char* kFigLike = R"(# comment line
[network]
family = power_law
r = 2.4
n = 40

[phi]
family = linear

[kernels]
beta = parabolic
beta_T = 200
beta_s = 15000
gamma = rational_decay
gamma_q = 1
mu = 0.06
tau_max = 200
dtau = 0.2

[demography]
b = 0.07

[simulation]
dt = 0.1
t_end = 500
mode = limiting
s0 = 0.6
i0 = shifted_gaussian
output_stride = 10

[output]
directory = out
)";

} // namespace

TEST_CASE("a full config round-trips into a bundle")
{
    const auto raw = RawConfig::parse_string(kFigLike);
    const auto bundle = build_bundle(raw);
    CHECK(bundle.dist().max_degree() == 40);
    CHECK(bundle.dist().exponent().has_value());
    CHECK(bundle.phi().family() == InfectivityFunction::Family::linear);
    CHECK(bundle.kernels().dtau() == 0.2);
    CHECK(bundle.kernels().tau_max() == 200.0);
    CHECK(bundle.sim.b == 0.07);
    CHECK(bundle.sim.dt == 0.1);
    CHECK(bundle.sim.mode == SimMode::limiting);
    CHECK(bundle.output_dir == std::filesystem::path("out"));
    CHECK(bundle.config_hash.size() == 16);
}

TEST_CASE("unknown keys, sections, duplicates and malformed lines are rejected")
{
    CHECK_THROWS_AS(build_bundle(RawConfig::parse_string(std::string(kFigLike) +
                                                         "\n[network]\ntypo_key = 3\n")),
                    agesis::invalid_parameter);
    CHECK_THROWS_AS(build_bundle(RawConfig::parse_string(std::string(kFigLike) +
                                                         "\n[mystery]\nx = 1\n")),
                    agesis::invalid_parameter);
    CHECK_THROWS_AS(RawConfig::parse_string("[a]\nx = 1\nx = 2\n"), agesis::invalid_parameter);
    CHECK_THROWS_AS(RawConfig::parse_string("x = 1\n"), agesis::invalid_parameter);
    CHECK_THROWS_AS(RawConfig::parse_string("[a\nx = 1\n"), agesis::invalid_parameter);
    CHECK_THROWS_AS(RawConfig::parse_string("[a]\nnovalue\n"), agesis::invalid_parameter);
}

TEST_CASE("CFL and physical-rate violations are rejected at load time")
{
    std::string bad = kFigLike;
    bad.replace(bad.find("dt = 0.1"), 8, "dt = 0.3");
    CHECK_THROWS_AS(build_bundle(RawConfig::parse_string(bad)), agesis::invalid_parameter);

    std::string negmu = kFigLike;
    negmu.replace(negmu.find("mu = 0.06"), 9, "mu = -0.1");
    CHECK_THROWS_AS(build_bundle(RawConfig::parse_string(negmu)), agesis::invalid_parameter);
}

TEST_CASE("config hash is order-independent and value-sensitive")
{
    const auto a = RawConfig::parse_string(kFigLike);
    // same keys, [phi] block moved to the end
    std::string reordered = kFigLike;
    const auto pos = reordered.find("[phi]");
    const auto end = reordered.find("[kernels]");
    const std::string phi_block = reordered.substr(pos, end - pos);
    reordered.erase(pos, end - pos);
    reordered += "\n" + phi_block;
    const auto b = RawConfig::parse_string(reordered);
    CHECK(a.hash() == b.hash());

    auto c = RawConfig::parse_string(kFigLike);
    c.set("demography.b", "0.08");
    CHECK(a.hash() != c.hash());
}

TEST_CASE("set() overrides feed parameter sweeps")
{
    auto raw = RawConfig::parse_string(kFigLike);
    raw.set("kernels.gamma_q", "10");
    const auto bundle = build_bundle(raw);
    // fig3-style gamma: slower recovery decay, much larger K1(0)
    CHECK(bundle.kernels().k1(0.0) > 1.0);
    CHECK_THROWS_AS(raw.set("noseparator", "1"), agesis::invalid_parameter);
}

TEST_CASE("explicit probabilities and scalar/vector s0")
{
    std::string text = kFigLike;
    text.replace(text.find("family = power_law"), 18, "family = explicit");
    text.replace(text.find("r = 2.4\nn = 40"), 14, "probabilities = 0.5, 0.3, 0.2");
    const auto bundle = build_bundle(RawConfig::parse_string(text));
    CHECK(bundle.dist().max_degree() == 3);
    CHECK(bundle.dist().prob(2) == 0.3);
}

TEST_CASE("tabulated kernels load from csv matching the grid")
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "agesis_cfg_test";
    fs::create_directories(dir);
    {
        std::ofstream t(dir / "beta.csv");
        for (int j = 0; j <= 1000; ++j)
            t << 0.2 * j << "," << 0.1 << "\n";
    }
    std::string text = kFigLike;
    text.replace(text.find("beta = parabolic\nbeta_T = 200\nbeta_s = 15000"), 44,
                 "beta = tabulated\nbeta_table = beta.csv");
    const auto raw = RawConfig::parse_string(text, dir);
    const auto bundle = build_bundle(raw);
    CHECK(bundle.kernels().beta_grid()[500] == 0.1);

    // wrong grid: too few rows
    {
        std::ofstream t(dir / "beta.csv");
        for (int j = 0; j <= 900; ++j)
            t << 0.2 * j << "," << 0.1 << "\n";
    }
    CHECK_THROWS_AS(build_bundle(RawConfig::parse_string(text, dir)), agesis::invalid_parameter);
    fs::remove_all(dir);
}
