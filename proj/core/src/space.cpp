#include "bbo/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "bbo/errors.hpp"
#include "bbo/rng.hpp"

namespace bbo {

using nlohmann::json;

ParamSpec ParamSpec::real(std::string name, double low, double high, Scale scale) {
    if (!(low < high)) {
        throw ConfigError("real spec '" + name + "': low must be < high");
    }
    if (scale == Scale::Log && !(low > 0.0)) {
        throw ConfigError("real spec '" + name + "': log scale requires low > 0");
    }
    ParamSpec s;
    s.name = std::move(name);
    s.kind = ParamKind::Real;
    s.low = low;
    s.high = high;
    s.scale = scale;
    return s;
}

ParamSpec ParamSpec::integer(std::string name, std::int64_t low, std::int64_t high,
                             Scale scale) {
    if (low > high) {
        throw ConfigError("integer spec '" + name + "': low must be <= high");
    }
    if (scale == Scale::Log && low <= 0) {
        throw ConfigError("integer spec '" + name + "': log scale requires low > 0");
    }
    ParamSpec s;
    s.name = std::move(name);
    s.kind = ParamKind::Integer;
    s.low = static_cast<double>(low);
    s.high = static_cast<double>(high);
    s.scale = scale;
    return s;
}

ParamSpec ParamSpec::categorical(std::string name, std::vector<std::string> choices) {
    if (choices.size() < 2) {
        throw ConfigError("categorical spec '" + name + "': needs >= 2 choices");
    }
    std::set<std::string> uniq(choices.begin(), choices.end());
    if (uniq.size() != choices.size()) {
        throw ConfigError("categorical spec '" + name + "': duplicate choices");
    }
    ParamSpec s;
    s.name = std::move(name);
    s.kind = ParamKind::Categorical;
    s.choices = std::move(choices);
    return s;
}

ParamSpec ParamSpec::boolean(std::string name) {
    ParamSpec s;
    s.name = std::move(name);
    s.kind = ParamKind::Boolean;
    s.low = 0.0;
    s.high = 1.0;
    return s;
}

std::size_t ParamSpec::warped_width() const {
    return kind == ParamKind::Categorical ? choices.size() : 1;
}

SearchSpace::SearchSpace(std::vector<ParamSpec> specs) : specs_(std::move(specs)) {
    std::set<std::string> names;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        if (!names.insert(specs_[i].name).second) {
            throw ConfigError("duplicate parameter name '" + specs_[i].name + "'");
        }
        blocks_.push_back({i, warped_dim_, specs_[i].warped_width()});
        warped_dim_ += specs_[i].warped_width();
    }
}

namespace {

const ParamValue* find_value(const ParamVector& p, const std::string& name) {
    auto it = p.values.find(name);
    return it == p.values.end() ? nullptr : &it->second;
}

[[noreturn]] void bad_value(const ParamSpec& spec, const std::string& what) {
    throw DomainError("parameter '" + spec.name + "': " + what);
}

double numeric_of(const ParamSpec& spec, const ParamValue& v) {
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    if (std::holds_alternative<std::int64_t>(v)) {
        return static_cast<double>(std::get<std::int64_t>(v));
    }
    bad_value(spec, "expected a numeric value");
}

} // namespace

void SearchSpace::validate(const ParamVector& p) const {
    if (p.values.size() != specs_.size()) {
        throw DomainError("param vector has " + std::to_string(p.values.size()) +
                          " values, space has " + std::to_string(specs_.size()) +
                          " parameters");
    }
    for (const auto& spec : specs_) {
        const ParamValue* v = find_value(p, spec.name);
        if (v == nullptr) bad_value(spec, "missing value");
        switch (spec.kind) {
        case ParamKind::Real: {
            const double x = numeric_of(spec, *v);
            if (!std::isfinite(x) || x < spec.low || x > spec.high) {
                bad_value(spec, "value " + std::to_string(x) + " outside [" +
                                    std::to_string(spec.low) + ", " +
                                    std::to_string(spec.high) + "]");
            }
            break;
        }
        case ParamKind::Integer: {
            const double x = numeric_of(spec, *v);
            if (x != std::floor(x)) bad_value(spec, "expected an integral value");
            if (x < spec.low || x > spec.high) {
                bad_value(spec, "value " + std::to_string(x) + " outside bounds");
            }
            break;
        }
        case ParamKind::Categorical: {
            if (!std::holds_alternative<std::string>(*v)) {
                bad_value(spec, "expected a choice label");
            }
            const auto& label = std::get<std::string>(*v);
            if (std::find(spec.choices.begin(), spec.choices.end(), label) ==
                spec.choices.end()) {
                bad_value(spec, "unknown choice '" + label + "'");
            }
            break;
        }
        case ParamKind::Boolean:
            if (!std::holds_alternative<bool>(*v)) bad_value(spec, "expected a boolean");
            break;
        }
    }
}

namespace {

double warp_numeric(const ParamSpec& spec, double v) {
    if (spec.scale == Scale::Log) {
        return (std::log(v) - std::log(spec.low)) /
               (std::log(spec.high) - std::log(spec.low));
    }
    if (spec.high == spec.low) return 0.0; // single-value integer domain
    return (v - spec.low) / (spec.high - spec.low);
}

double unwarp_numeric(const ParamSpec& spec, double t) {
    if (spec.scale == Scale::Log) {
        return std::exp(std::log(spec.low) +
                        t * (std::log(spec.high) - std::log(spec.low)));
    }
    return spec.low + t * (spec.high - spec.low);
}

double round_half_up(double x) { return std::floor(x + 0.5); }

} // namespace

UnitVector warp(const SearchSpace& space, const ParamVector& p) {
    space.validate(p);
    UnitVector u;
    u.coords.assign(space.warped_dim(), 0.0);
    for (const auto& block : space.blocks()) {
        const ParamSpec& spec = space.specs()[block.spec_index];
        const ParamValue& v = *find_value(p, spec.name);
        switch (spec.kind) {
        case ParamKind::Real:
        case ParamKind::Integer: {
            double t = warp_numeric(spec, numeric_of(spec, v));
            u.coords[block.offset] = std::clamp(t, 0.0, 1.0);
            break;
        }
        case ParamKind::Boolean:
            u.coords[block.offset] = std::get<bool>(v) ? 1.0 : 0.0;
            break;
        case ParamKind::Categorical: {
            const auto& label = std::get<std::string>(v);
            const auto it = std::find(spec.choices.begin(), spec.choices.end(), label);
            u.coords[block.offset + static_cast<std::size_t>(
                                        it - spec.choices.begin())] = 1.0;
            break;
        }
        }
    }
    return u;
}

ParamVector unwarp(const SearchSpace& space, const UnitVector& u) {
    if (u.coords.size() != space.warped_dim()) {
        throw ShapeError("unit vector has " + std::to_string(u.coords.size()) +
                         " coords, space warps to " +
                         std::to_string(space.warped_dim()));
    }
    for (double c : u.coords) {
        if (!(c >= 0.0 && c <= 1.0)) {
            throw DomainError("unit vector coordinate " + std::to_string(c) +
                              " outside [0, 1]");
        }
    }
    ParamVector p;
    for (const auto& block : space.blocks()) {
        const ParamSpec& spec = space.specs()[block.spec_index];
        switch (spec.kind) {
        case ParamKind::Real:
            // exp/log round-trip error can poke past a bound at t = 0 or 1.
            p.values[spec.name] =
                std::clamp(unwarp_numeric(spec, u.coords[block.offset]), spec.low, spec.high);
            break;
        case ParamKind::Integer: {
            double v = round_half_up(unwarp_numeric(spec, u.coords[block.offset]));
            v = std::clamp(v, spec.low, spec.high);
            p.values[spec.name] = static_cast<std::int64_t>(v);
            break;
        }
        case ParamKind::Boolean:
            p.values[spec.name] = u.coords[block.offset] >= 0.5;
            break;
        case ParamKind::Categorical: {
            // argmax with lowest-index tie-break
            std::size_t best = 0;
            for (std::size_t j = 1; j < block.width; ++j) {
                if (u.coords[block.offset + j] > u.coords[block.offset + best]) {
                    best = j;
                }
            }
            p.values[spec.name] = spec.choices[best];
            break;
        }
        }
    }
    return p;
}

std::vector<UnitVector> sample_uniform_warped(const SearchSpace& space, std::size_t n,
                                              Rng& rng) {
    std::vector<UnitVector> out(n);
    for (auto& u : out) {
        u.coords.resize(space.warped_dim());
        for (auto& c : u.coords) c = rng.uniform();
    }
    return out;
}

std::vector<UnitVector> latin_hypercube_warped(const SearchSpace& space, std::size_t n,
                                               Rng& rng) {
    std::vector<UnitVector> out(n);
    for (auto& u : out) u.coords.assign(space.warped_dim(), 0.0);
    if (n == 0) return out;

    std::vector<std::size_t> perm(n);
    for (const auto& block : space.blocks()) {
        const ParamSpec& spec = space.specs()[block.spec_index];
        if (spec.kind == ParamKind::Categorical) {
            // one-hot blocks are sampled uniformly, not stratified
            for (auto& u : out) {
                u.coords[block.offset + rng.uniform_below(block.width)] = 1.0;
            }
            continue;
        }
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n - 1; i > 0; --i) {
            std::swap(perm[i], perm[rng.uniform_below(i + 1)]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double stratum = static_cast<double>(perm[i]);
            out[i].coords[block.offset] =
                (stratum + rng.uniform()) / static_cast<double>(n);
        }
    }
    return out;
}

std::vector<ParamVector> sample_uniform(const SearchSpace& space, std::size_t n,
                                        std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ParamVector> out;
    out.reserve(n);
    for (auto& u : sample_uniform_warped(space, n, rng)) {
        out.push_back(unwarp(space, u));
    }
    return out;
}

std::vector<ParamVector> latin_hypercube(const SearchSpace& space, std::size_t n,
                                         std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ParamVector> out;
    out.reserve(n);
    for (auto& u : latin_hypercube_warped(space, n, rng)) {
        out.push_back(unwarp(space, u));
    }
    return out;
}

namespace {

json spec_to_json_obj(const ParamSpec& spec) {
    json j;
    j["name"] = spec.name;
    switch (spec.kind) {
    case ParamKind::Real:
        j["kind"] = "real";
        j["low"] = spec.low;
        j["high"] = spec.high;
        j["scale"] = spec.scale == Scale::Log ? "log" : "linear";
        break;
    case ParamKind::Integer:
        j["kind"] = "integer";
        j["low"] = static_cast<std::int64_t>(spec.low);
        j["high"] = static_cast<std::int64_t>(spec.high);
        j["scale"] = spec.scale == Scale::Log ? "log" : "linear";
        break;
    case ParamKind::Categorical:
        j["kind"] = "categorical";
        j["choices"] = spec.choices;
        break;
    case ParamKind::Boolean:
        j["kind"] = "boolean";
        break;
    }
    return j;
}

ParamSpec spec_from_json_obj(const json& j) {
    if (!j.is_object() || !j.contains("name") || !j.contains("kind")) {
        throw ConfigError("space entry must be an object with 'name' and 'kind'");
    }
    const std::string name = j.at("name").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    Scale scale = Scale::Linear;
    if (j.contains("scale")) {
        const std::string s = j.at("scale").get<std::string>();
        if (s == "log") {
            scale = Scale::Log;
        } else if (s != "linear") {
            throw ConfigError("parameter '" + name + "': unknown scale '" + s + "'");
        }
    }
    if (kind == "real") {
        return ParamSpec::real(name, j.at("low").get<double>(),
                               j.at("high").get<double>(), scale);
    }
    if (kind == "integer") {
        return ParamSpec::integer(name, j.at("low").get<std::int64_t>(),
                                  j.at("high").get<std::int64_t>(), scale);
    }
    if (kind == "categorical") {
        return ParamSpec::categorical(
            name, j.at("choices").get<std::vector<std::string>>());
    }
    if (kind == "boolean") {
        return ParamSpec::boolean(name);
    }
    throw ConfigError("parameter '" + name + "': unknown kind '" + kind + "'");
}

} // namespace

std::string space_to_json(const SearchSpace& space) {
    json j;
    j["params"] = json::array();
    for (const auto& spec : space.specs()) {
        j["params"].push_back(spec_to_json_obj(spec));
    }
    return j.dump();
}

SearchSpace space_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("space file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("params") || !j.at("params").is_array()) {
        throw ConfigError("space file must be an object with a 'params' array");
    }
    std::vector<ParamSpec> specs;
    for (const auto& entry : j.at("params")) {
        specs.push_back(spec_from_json_obj(entry));
    }
    return SearchSpace(std::move(specs));
}

std::string params_to_json(const ParamVector& p) {
    json j = json::object();
    for (const auto& [name, value] : p.values) {
        std::visit([&](const auto& v) { j[name] = v; }, value);
    }
    return j.dump();
}

ParamVector params_from_json(const SearchSpace& space, const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("params are not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError("params must be a JSON object");
    ParamVector p;
    for (const auto& spec : space.specs()) {
        if (!j.contains(spec.name)) {
            throw DomainError("parameter '" + spec.name + "': missing value");
        }
        const json& v = j.at(spec.name);
        switch (spec.kind) {
        case ParamKind::Real:
            if (!v.is_number()) {
                throw DomainError("parameter '" + spec.name + "': expected a number");
            }
            p.values[spec.name] = v.get<double>();
            break;
        case ParamKind::Integer:
            if (v.is_number_integer()) {
                p.values[spec.name] = v.get<std::int64_t>();
            } else if (v.is_number_float()) {
                const double x = v.get<double>();
                if (x != std::floor(x)) {
                    throw DomainError("parameter '" + spec.name +
                                      "': expected an integral value");
                }
                p.values[spec.name] = static_cast<std::int64_t>(x);
            } else {
                throw DomainError("parameter '" + spec.name + "': expected a number");
            }
            break;
        case ParamKind::Categorical:
            if (!v.is_string()) {
                throw DomainError("parameter '" + spec.name + "': expected a string");
            }
            p.values[spec.name] = v.get<std::string>();
            break;
        case ParamKind::Boolean:
            if (!v.is_boolean()) {
                throw DomainError("parameter '" + spec.name + "': expected a boolean");
            }
            p.values[spec.name] = v.get<bool>();
            break;
        }
    }
    space.validate(p);
    return p;
}

} // namespace bbo
