#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "apdsim/recovery_model.hpp"

namespace apdsim {

/// Throws ParseError when obj carries a key outside `allowed` or misses one
/// of `required`. `where` names the object in the message.
void check_keys(const nlohmann::json& obj, const std::string& where,
                const std::vector<std::string>& required,
                const std::vector<std::string>& optional = {});

void to_json(nlohmann::json& j, const DetectorParams& p);
void from_json(const nlohmann::json& j, DetectorParams& p);

} // namespace apdsim
