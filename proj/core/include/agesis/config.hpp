#pragma once

#include "agesis/kernels.hpp"
#include "agesis/network.hpp"
#include "agesis/simulator.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace agesis {

/// Raw key/value view of a config file: [section] headers, 'key = value'
/// lines, '#' comments. Keys keep file order; lookups are by section.key.
class RawConfig {
public:
    static RawConfig parse_file(const std::filesystem::path& path);
    static RawConfig parse_string(const std::string& text,
                                  const std::filesystem::path& base_dir = ".");

    bool has(const std::string& section, const std::string& key) const;
    const std::string& get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;

    /// Replace (or add) one value; used by parameter sweeps. dotted = "section.key".
    void set(const std::string& dotted, const std::string& value);

    /// Directory relative file references resolve against.
    const std::filesystem::path& base_dir() const { return base_dir_; }

    /// FNV-1a over the canonical (sorted) key=value list, as 16 hex chars.
    std::string hash() const;

    struct Entry {
        std::string section, key, value;
    };
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;
    std::filesystem::path base_dir_ = ".";
};

/// Everything a run needs, built and validated from a RawConfig. The domain
/// objects live inside sim; dist()/phi()/kernels() are shorthands.
struct ConfigBundle {
    SimulationConfig sim;
    std::filesystem::path output_dir = "out";
    bool write_age_profile = false;
    std::string config_hash;

    const DegreeDistribution& dist() const { return sim.dist; }
    const InfectivityFunction& phi() const { return sim.phi; }
    const KernelSet& kernels() const { return sim.kernels; }
};

/// Validates the schema (unknown sections/keys rejected, CFL checked at load
/// time) and constructs the domain objects.
ConfigBundle build_bundle(const RawConfig& raw);

} // namespace agesis
