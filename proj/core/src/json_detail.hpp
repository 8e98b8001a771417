#pragma once

// JSON's number grammar has no non-finite values; trial logs, study
// reports, and protocol messages all ride them as the strings "nan",
// "inf", and "-inf". The decode side is templated on the error type so
// file parsing raises ConfigError while protocol parsing raises
// ProtocolError.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bbo::detail {

inline nlohmann::json num_to_json(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    if (std::isnan(v)) {
        return "nan";
    }
    return v > 0 ? "inf" : "-inf";
}

template <class Error>
double num_from_json(const nlohmann::json& j, const char* what) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "nan") {
            return std::numeric_limits<double>::quiet_NaN();
        }
        if (s == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
    }
    throw Error(std::string(what) +
                " must be a number or one of \"nan\", \"inf\", \"-inf\"");
}

inline nlohmann::json num_array_to_json(const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) {
        a.push_back(num_to_json(x));
    }
    return a;
}

template <class Error>
std::vector<double> num_array_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array()) {
        throw Error(std::string(what) + " must be an array");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        out.push_back(num_from_json<Error>(e, what));
    }
    return out;
}

} // namespace bbo::detail
