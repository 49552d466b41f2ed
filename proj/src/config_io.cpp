#include "dfrc/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace dfrc {

using nlohmann::json;

namespace {

constexpr double kDeg = kPi / 180.0;

struct Field {
    std::function<void(SystemConfig&, const json&)> set;
    std::function<json(const SystemConfig&)> get;
};

template <class T>
Field plain(T SystemConfig::*m)
{
    return {[m](SystemConfig& c, const json& v) { c.*m = v.get<T>(); },
            [m](const SystemConfig& c) { return json(c.*m); }};
}

Field degrees(double SystemConfig::*m)
{
    return {[m](SystemConfig& c, const json& v) { c.*m = v.get<double>() * kDeg; },
            [m](const SystemConfig& c) { return json(c.*m / kDeg); }};
}

const std::map<std::string, Field>& fields()
{
    static const std::map<std::string, Field> table = {
        {"n_tx", plain(&SystemConfig::n_tx)},
        {"n_ty", plain(&SystemConfig::n_ty)},
        {"n_rx", plain(&SystemConfig::n_rx)},
        {"n_ry", plain(&SystemConfig::n_ry)},
        {"d_x", plain(&SystemConfig::d_x)},
        {"d_y", plain(&SystemConfig::d_y)},
        {"f_c", plain(&SystemConfig::f_c)},
        {"mu", plain(&SystemConfig::mu)},
        {"t_s", plain(&SystemConfig::t_s)},
        {"n_symbols", plain(&SystemConfig::n_symbols)},
        {"m_blocks", plain(&SystemConfig::m_blocks)},
        {"mask_order", plain(&SystemConfig::mask_order)},
        {"mod_index", plain(&SystemConfig::mod_index)},
        {"p_tot", plain(&SystemConfig::p_tot)},
        {"alpha", plain(&SystemConfig::alpha)},
        {"d_0", plain(&SystemConfig::d_0)},
        {"sigma_delta", plain(&SystemConfig::sigma_delta)},
        {"noise_power", plain(&SystemConfig::noise_power)},
        {"ue_noise_power", plain(&SystemConfig::ue_noise_power)},
        {"rho_user", plain(&SystemConfig::rho_user)},
        {"rho_target", plain(&SystemConfig::rho_target)},
        {"seed", plain(&SystemConfig::seed)},
        {"beamwidth_theta_deg", degrees(&SystemConfig::beamwidth_theta)},
        {"beamwidth_phi_deg", degrees(&SystemConfig::beamwidth_phi)},
        {"cell_radius", plain(&SystemConfig::cell_radius)},
        {"n_users", plain(&SystemConfig::n_users)},
        {"n_candidates", plain(&SystemConfig::n_candidates)},
        {"pulse",
         {[](SystemConfig& c, const json& v) { c.pulse = parse_pulse_kind(v.get<std::string>()); },
          [](const SystemConfig& c) { return json(to_string(c.pulse)); }}},
        {"rolloff", plain(&SystemConfig::rolloff)},
        {"samples_per_symbol", plain(&SystemConfig::samples_per_symbol)},
        {"radar_link_gain_db", plain(&SystemConfig::radar_link_gain_db)},
        {"target_range", plain(&SystemConfig::target_range)},
        {"target_velocity", plain(&SystemConfig::target_velocity)},
        {"target_rcs", plain(&SystemConfig::target_rcs)},
        {"target_theta_deg", degrees(&SystemConfig::target_theta)},
        {"target_phi_deg", degrees(&SystemConfig::target_phi)},
        {"n_drops", plain(&SystemConfig::n_drops)},
        {"nu_max", plain(&SystemConfig::nu_max)},
        {"epsilon", plain(&SystemConfig::epsilon)},
        {"target_power_fraction", plain(&SystemConfig::target_power_fraction)},
        {"snr_db", plain(&SystemConfig::snr_db)},
        {"precoder", plain(&SystemConfig::precoder)},
        {"ber_mode", plain(&SystemConfig::ber_mode)},
        {"ber_min_errors", plain(&SystemConfig::ber_min_errors)},
        {"ber_max_bits", plain(&SystemConfig::ber_max_bits)},
        {"ber_min_drops", plain(&SystemConfig::ber_min_drops)},
        {"ber_blocks_per_drop", plain(&SystemConfig::ber_blocks_per_drop)},
        {"tradeoff_ranges", plain(&SystemConfig::tradeoff_ranges)},
        {"tradeoff_users", plain(&SystemConfig::tradeoff_users)},
        {"tradeoff_rcs", plain(&SystemConfig::tradeoff_rcs)},
        {"selection_candidates", plain(&SystemConfig::selection_candidates)},
        {"af_tau_max", plain(&SystemConfig::af_tau_max)},
        {"af_tau_step", plain(&SystemConfig::af_tau_step)},
        {"af_fd_max", plain(&SystemConfig::af_fd_max)},
        {"af_fd_step", plain(&SystemConfig::af_fd_step)},
    };
    return table;
}

}  // namespace

SystemConfig parse_config(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidArgument("config: top level must be an object");

    SystemConfig cfg;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        auto f = fields().find(it.key());
        if (f == fields().end()) throw InvalidArgument("config: unknown key '" + it.key() + "'");
        try {
            f->second.set(cfg, it.value());
        } catch (const json::exception& e) {
            throw InvalidArgument("config: bad value for '" + it.key() + "': " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

SystemConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const SystemConfig& cfg)
{
    json out = json::object();
    for (const auto& [key, f] : fields()) out[key] = f.get(cfg);
    return out.dump();
}

std::string config_hash(const SystemConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config_to_json(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void set_config_field(SystemConfig& cfg, const std::string& key, double value)
{
    auto f = fields().find(key);
    if (f == fields().end()) throw InvalidArgument("cannot sweep unknown config key '" + key + "'");
    const json current = f->second.get(cfg);
    if (!current.is_number()) throw InvalidArgument("cannot sweep non-numeric config key '" + key + "'");
    if (current.is_number_integer() && value != std::floor(value))
        throw InvalidArgument("config key '" + key + "' takes integer values");
    f->second.set(cfg, current.is_number_integer() ? json(static_cast<long long>(value)) : json(value));
    cfg.validate();
}

}  // namespace dfrc
