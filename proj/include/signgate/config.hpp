#pragma once

#include "signgate/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace signgate {

/// Malformed configuration. `key()` names the offending key (dotted path)
/// when one is known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Parses the TOML subset used by scenario files: tables, dotted keys,
/// strings, integers, floats, booleans, arrays and inline tables. Array
/// tables and date-times are rejected.
nlohmann::json parse_toml(std::string_view text);

struct ScenarioOverrides {
    std::optional<std::size_t> replicates;
    std::optional<std::uint64_t> seed;         ///< wins over the file
    std::optional<std::uint64_t> default_seed; ///< used when the file has none
};

inline constexpr std::uint64_t kBuiltinSeed = 20190417;

/// Expands a scenario config into design points. Keys: name, m, replicates,
/// alpha_s, seed, effect{...}, procedures[...], and optionally tau_grid[...]
/// or auto_tau{q, m} to sweep the ALD (or spike) scale.
std::vector<Scenario> scenarios_from_json(const nlohmann::json& cfg, const ScenarioOverrides& overrides,
                                          std::string_view default_name = "scenario");

/// Reads `.toml` or `.json` scenario files.
std::vector<Scenario> load_scenario_file(const std::filesystem::path& path, const ScenarioOverrides& overrides);

} // namespace signgate
