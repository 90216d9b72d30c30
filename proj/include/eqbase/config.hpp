#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "eqbase/etas.hpp"
#include "eqbase/experiments.hpp"

namespace eqbase {

inline constexpr const char* kConfigFormat = "eqbase-run/1";
inline constexpr const char* kToolVersion = EQBASE_VERSION;

/// Invalid configuration; the message names the offending key.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Everything a reproducible run needs. JSON keys mirror the field names.
struct RunConfig {
    std::string format = kConfigFormat;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    unsigned workers = 1;

    EtasParams etas = default_etas();
    SimConfig sim = default_sim();
    GridSpec grid;
    SmallSampleSpec small_sample;

    /// Reference parameter set with the normalized Omori kernel used by the
    /// experiments (see README).
    static EtasParams default_etas();
    /// Catalog settings for `simulate`: a = 5, the middle of the grid's a-range.
    static SimConfig default_sim();

    /// Grid and small-sample specs with seed, etas, rules and workers filled in.
    GridSpec grid_spec() const;
    SmallSampleSpec small_sample_spec() const;
    SimConfig sim_config() const;

    void validate() const;
};

/// Parses a config document. Missing keys keep their defaults; unknown keys
/// and ill-typed values raise ConfigError.
RunConfig parse_config(const std::string& json_text);

std::string config_to_json(const RunConfig& config, int indent = 2);

/// FNV-1a hash (hex) of the result-relevant part of the config: everything
/// except output_dir and workers.
std::string config_hash(const RunConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace eqbase
