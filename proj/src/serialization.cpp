#include "apdsim/serialization.hpp"

#include <algorithm>

#include "apdsim/errors.hpp"

namespace apdsim {

void check_keys(const nlohmann::json& obj, const std::string& where,
                const std::vector<std::string>& required,
                const std::vector<std::string>& optional) {
    if (!obj.is_object())
        throw ParseError(where + ": expected an object");
    for (const auto& key : required)
        if (!obj.contains(key))
            throw ParseError(where + ": missing key \"" + key + "\"");
    for (const auto& item : obj.items()) {
        const std::string& key = item.key();
        const bool known =
            std::find(required.begin(), required.end(), key) != required.end() ||
            std::find(optional.begin(), optional.end(), key) != optional.end();
        if (!known)
            throw ParseError(where + ": unknown key \"" + key + "\"");
    }
}

void to_json(nlohmann::json& j, const DetectorParams& p) {
    j = nlohmann::json{
        {"v_e_set", p.v_e_set},
        {"rc_time", p.rc_time},
        {"v_characteristic", p.v_characteristic},
        {"pulse_gain", p.pulse_gain},
        {"v_cld", p.v_cld},
        {"sigma_rel", p.sigma_rel},
        {"recovery_kind", to_string(p.recovery_kind)},
    };
    if (p.recovery_kind == RecoveryKind::stepwise_dead_time)
        j["dead_time"] = p.dead_time;
}

void from_json(const nlohmann::json& j, DetectorParams& p) {
    check_keys(j, "detector",
               {},
               {"v_e_set", "rc_time", "v_characteristic", "pulse_gain", "v_cld",
                "sigma_rel", "recovery_kind", "dead_time"});
    p = DetectorParams{};
    if (j.contains("v_e_set")) p.v_e_set = j.at("v_e_set").get<double>();
    if (j.contains("rc_time")) p.rc_time = j.at("rc_time").get<double>();
    if (j.contains("v_characteristic"))
        p.v_characteristic = j.at("v_characteristic").get<double>();
    if (j.contains("pulse_gain")) p.pulse_gain = j.at("pulse_gain").get<double>();
    if (j.contains("v_cld")) p.v_cld = j.at("v_cld").get<double>();
    if (j.contains("sigma_rel")) p.sigma_rel = j.at("sigma_rel").get<double>();
    if (j.contains("recovery_kind"))
        p.recovery_kind = recovery_kind_from_string(j.at("recovery_kind").get<std::string>());
    if (j.contains("dead_time")) p.dead_time = j.at("dead_time").get<double>();
}

} // namespace apdsim
