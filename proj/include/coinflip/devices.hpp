#pragma once

// Parametric stochastic-device models. Every device is a Bernoulli source
// with a per-flip energy cost in femtojoules.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "coinflip/rng.hpp"

namespace coinflip {

/// Raised for malformed, unknown or invalid device configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Outcome-dependent cost: heads and tails each have their own energy.
struct LinearHeadsTails {
    double energy_heads_fj;
    double energy_tails_fj;
    friend bool operator==(const LinearHeadsTails&, const LinearHeadsTails&) = default;
};

/// Bias-dependent cost E0 + Ebias * |2p - 1|^gamma, paid on every flip.
struct BasePlusBias {
    double e0_fj;
    double e_bias_fj;
    double gamma;
    friend bool operator==(const BasePlusBias&, const BasePlusBias&) = default;
};

/// Fixed cost per flip.
struct ConstantEnergy {
    double e0_fj;
    friend bool operator==(const ConstantEnergy&, const ConstantEnergy&) = default;
};

using EnergyModel = std::variant<LinearHeadsTails, BasePlusBias, ConstantEnergy>;

std::string_view model_kind_name(const EnergyModel& model);

class DeviceSpec {
public:
    /// Throws ConfigError on an empty name or a negative/non-finite constant.
    DeviceSpec(std::string name, EnergyModel model);

    const std::string& name() const { return name_; }
    const EnergyModel& model() const { return model_; }

    friend bool operator==(const DeviceSpec&, const DeviceSpec&) = default;

private:
    std::string name_;
    EnergyModel model_;
};

struct FlipRecord {
    bool heads;
    double energy_fj;
};

struct Bitstream {
    std::vector<std::uint8_t> bits;  // 1 = heads
    double total_energy_fj = 0.0;
};

double expected_energy_per_flip(const DeviceSpec& device, double p);

/// One flip. For LinearHeadsTails the realized face sets the energy; the
/// other models charge the expected (bias) cost regardless of outcome.
FlipRecord flip(const DeviceSpec& device, double p, Rng& rng);

/// n independent flips. Throws std::invalid_argument for n == 0.
Bitstream generate_bitstream(const DeviceSpec& device, double p, std::size_t n, Rng& rng);

/// Parses a JSON device document:
///   {"name": "...", "model": "linear_heads_tails", "energy_heads_fj": ..,
///    "energy_tails_fj": ..}
///   {"name": "...", "model": "base_plus_bias", "e0_fj": .., "e_bias_fj": ..,
///    "gamma": ..}
///   {"name": "...", "model": "constant", "e0_fj": ..}
/// Missing or extra keys for the declared model are rejected.
DeviceSpec load_device_config(std::string_view document);
DeviceSpec load_device_file(const std::filesystem::path& path);

/// Serializes a device back to the config document format.
std::string device_to_json(const DeviceSpec& device);

/// Names of the shipped device documents: "td", "mtj_she", "mtj_vcma".
const std::vector<std::string>& builtin_device_names();

/// Text of a shipped device document. Throws ConfigError for unknown names.
std::string_view builtin_device_document(std::string_view name);

/// Resolves a shipped device name, otherwise treats the argument as a path.
DeviceSpec resolve_device(std::string_view name_or_path);

}  // namespace coinflip
