#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "risim/geometry.hpp"

namespace risim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace jsonu {

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& key,
                                     const std::string& context) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError("missing key '" + (context.empty() ? key : context + "." + key) + "'");
    return j.at(key);
}

template <typename T>
T get(const nlohmann::json& j, const std::string& key, const std::string& context) {
    const auto& v = require(j, key, context);
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("bad value for key '" +
                          (context.empty() ? key : context + "." + key) + "'");
    }
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

inline Vec3 get_vec3(const nlohmann::json& j, const std::string& key,
                     const std::string& context) {
    const auto& v = require(j, key, context);
    if (!v.is_array() || v.size() != 3)
        throw ConfigError("key '" + (context.empty() ? key : context + "." + key) +
                          "' must be a [x, y, z] array");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

inline Vec3 parse_vec3(const nlohmann::json& v, const std::string& context) {
    if (!v.is_array() || v.size() != 3)
        throw ConfigError("'" + context + "' must be a [x, y, z] array");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

} // namespace jsonu
} // namespace risim
