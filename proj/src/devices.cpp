#include "coinflip/devices.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "builtin_devices.hpp"
#include "coinflip/prob_core.hpp"

namespace coinflip {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void require_energy(double x, const char* what) {
    if (!std::isfinite(x) || x < 0.0) {
        throw ConfigError(std::string(what) + " must be a finite non-negative number");
    }
}

double number_field(const nlohmann::json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end()) throw ConfigError(std::string("missing field '") + key + "'");
    if (!it->is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

void require_exact_keys(const nlohmann::json& doc, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : doc.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError("unexpected field '" + key + "' for model '" +
                              doc.at("model").get<std::string>() + "'");
        }
    }
}

}  // namespace

std::string_view model_kind_name(const EnergyModel& model) {
    return std::visit(Overloaded{
                          [](const LinearHeadsTails&) { return std::string_view("linear_heads_tails"); },
                          [](const BasePlusBias&) { return std::string_view("base_plus_bias"); },
                          [](const ConstantEnergy&) { return std::string_view("constant"); },
                      },
                      model);
}

DeviceSpec::DeviceSpec(std::string name, EnergyModel model)
    : name_(std::move(name)), model_(model) {
    if (name_.empty()) throw ConfigError("device name must not be empty");
    std::visit(Overloaded{
                   [](const LinearHeadsTails& m) {
                       require_energy(m.energy_heads_fj, "energy_heads_fj");
                       require_energy(m.energy_tails_fj, "energy_tails_fj");
                   },
                   [](const BasePlusBias& m) {
                       require_energy(m.e0_fj, "e0_fj");
                       require_energy(m.e_bias_fj, "e_bias_fj");
                       require_energy(m.gamma, "gamma");
                   },
                   [](const ConstantEnergy& m) { require_energy(m.e0_fj, "e0_fj"); },
               },
               model_);
}

double expected_energy_per_flip(const DeviceSpec& device, double p) {
    require_probability(p, "p");
    return std::visit(
        Overloaded{
            [p](const LinearHeadsTails& m) {
                return m.energy_tails_fj + (m.energy_heads_fj - m.energy_tails_fj) * p;
            },
            [p](const BasePlusBias& m) {
                return m.e0_fj + m.e_bias_fj * std::pow(std::abs(2.0 * p - 1.0), m.gamma);
            },
            [](const ConstantEnergy& m) { return m.e0_fj; },
        },
        device.model());
}

FlipRecord flip(const DeviceSpec& device, double p, Rng& rng) {
    const bool heads = rng.bernoulli(p);
    if (const auto* m = std::get_if<LinearHeadsTails>(&device.model())) {
        return {heads, heads ? m->energy_heads_fj : m->energy_tails_fj};
    }
    return {heads, expected_energy_per_flip(device, p)};
}

Bitstream generate_bitstream(const DeviceSpec& device, double p, std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("bitstream length must be at least 1");
    require_probability(p, "p");
    Bitstream out;
    out.bits.reserve(n);
    long double energy = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const FlipRecord r = flip(device, p, rng);
        out.bits.push_back(r.heads ? 1 : 0);
        energy += r.energy_fj;
    }
    out.total_energy_fj = static_cast<double>(energy);
    return out;
}

DeviceSpec load_device_config(std::string_view document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("device config parse failure: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("device config must be a JSON object");
    if (!doc.contains("name") || !doc["name"].is_string()) {
        throw ConfigError("device config needs a string field 'name'");
    }
    if (!doc.contains("model") || !doc["model"].is_string()) {
        throw ConfigError("device config needs a string field 'model'");
    }
    const std::string name = doc["name"].get<std::string>();
    const std::string model = doc["model"].get<std::string>();

    if (model == "linear_heads_tails") {
        require_exact_keys(doc, {"name", "model", "energy_heads_fj", "energy_tails_fj"});
        return DeviceSpec(name, LinearHeadsTails{number_field(doc, "energy_heads_fj"),
                                                 number_field(doc, "energy_tails_fj")});
    }
    if (model == "base_plus_bias") {
        require_exact_keys(doc, {"name", "model", "e0_fj", "e_bias_fj", "gamma"});
        return DeviceSpec(name, BasePlusBias{number_field(doc, "e0_fj"),
                                             number_field(doc, "e_bias_fj"),
                                             number_field(doc, "gamma")});
    }
    if (model == "constant") {
        require_exact_keys(doc, {"name", "model", "e0_fj"});
        return DeviceSpec(name, ConstantEnergy{number_field(doc, "e0_fj")});
    }
    throw ConfigError("unknown device model '" + model + "'");
}

DeviceSpec load_device_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open device config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_device_config(buf.str());
}

std::string device_to_json(const DeviceSpec& device) {
    nlohmann::ordered_json doc;
    doc["name"] = device.name();
    doc["model"] = std::string(model_kind_name(device.model()));
    std::visit(Overloaded{
                   [&](const LinearHeadsTails& m) {
                       doc["energy_heads_fj"] = m.energy_heads_fj;
                       doc["energy_tails_fj"] = m.energy_tails_fj;
                   },
                   [&](const BasePlusBias& m) {
                       doc["e0_fj"] = m.e0_fj;
                       doc["e_bias_fj"] = m.e_bias_fj;
                       doc["gamma"] = m.gamma;
                   },
                   [&](const ConstantEnergy& m) { doc["e0_fj"] = m.e0_fj; },
               },
               device.model());
    return doc.dump();
}

const std::vector<std::string>& builtin_device_names() {
    static const std::vector<std::string> names{"td", "mtj_she", "mtj_vcma"};
    return names;
}

std::string_view builtin_device_document(std::string_view name) {
    if (name == "td") return detail::kTdDocument;
    if (name == "mtj_she") return detail::kMtjSheDocument;
    if (name == "mtj_vcma") return detail::kMtjVcmaDocument;
    throw ConfigError("unknown device '" + std::string(name) + "'");
}

DeviceSpec resolve_device(std::string_view name_or_path) {
    for (const auto& n : builtin_device_names()) {
        if (n == name_or_path) return load_device_config(builtin_device_document(n));
    }
    const std::filesystem::path path(name_or_path);
    if (!std::filesystem::exists(path)) {
        throw ConfigError("unknown device '" + std::string(name_or_path) +
                          "' (not a shipped device name or an existing file)");
    }
    return load_device_file(path);
}

}  // namespace coinflip
