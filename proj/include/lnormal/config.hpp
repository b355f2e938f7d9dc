#pragma once

// JSON configuration fragments for sequences and GLS systems.
//
//   {"kind":"luroth"}
//   {"kind":"geometric","ratio":"1/2"}
//   {"kind":"head_plus_geometric","head":["1/2","1/6"],"ratio":"1/3"}
//   {"kind":"product","systems":[{...}, {...}]}
//
// A GLS system is any of the above plus an optional "signs" array of 0/1
// flags for digits 1, 2, ... (digits past the end of the array use 0).
// Rationals are "p/q" strings.

#include "lnormal/gls.hpp"
#include "lnormal/multigls.hpp"
#include "lnormal/prob.hpp"
#include "lnormal/rational.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lnormal {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Rational rational_field(const json& j, const char* key)
{
    if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    const json& v = j.at(key);
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long>());
    throw ConfigError(std::string("field '") + key + "' must be a \"p/q\" string");
}

}  // namespace detail

inline std::vector<GlsSystem> systems_from_json(const json& j);

inline ProbabilitySequence sequence_from_json(const json& j)
{
    try {
        if (j.is_string()) return sequence_from_json(json{{"kind", j.get<std::string>()}});
        if (!j.is_object() || !j.contains("kind")) throw ConfigError("sequence config needs a \"kind\"");
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "luroth") return ProbabilitySequence::luroth();
        if (kind == "dyadic") return ProbabilitySequence::dyadic();
        if (kind == "geometric") return ProbabilitySequence::geometric(detail::rational_field(j, "ratio"));
        if (kind == "head_plus_geometric") {
            std::vector<Rational> head;
            if (!j.contains("head") || !j.at("head").is_array()) throw ConfigError("missing array field 'head'");
            for (const auto& h : j.at("head")) {
                if (!h.is_string()) throw ConfigError("head entries must be \"p/q\" strings");
                head.push_back(parse_rational(h.get<std::string>()));
            }
            return ProbabilitySequence::head_plus_geometric(std::move(head), detail::rational_field(j, "ratio"));
        }
        if (kind == "product") return ProductSystem(systems_from_json(j)).sequence();
        throw ConfigError("unknown sequence kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad sequence config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad sequence config: ") + e.what());
    }
}

inline GlsSystem system_from_json(const json& j)
{
    std::vector<bool> flips;
    if (j.is_object() && j.contains("signs")) {
        for (const auto& s : j.at("signs")) {
            if (!s.is_number_integer() || (s.get<int>() != 0 && s.get<int>() != 1))
                throw ConfigError("signs must be 0 or 1");
            flips.push_back(s.get<int>() == 1);
        }
    }
    return GlsSystem::right_to_left(sequence_from_json(j), std::move(flips));
}

/// Accepts {"systems":[...]} or a bare array.
inline std::vector<GlsSystem> systems_from_json(const json& j)
{
    const json& arr = j.is_object() ? j.at("systems") : j;
    if (!arr.is_array() || arr.empty()) throw ConfigError("\"systems\" must be a nonempty array");
    std::vector<GlsSystem> out;
    for (const auto& s : arr) out.push_back(system_from_json(s));
    return out;
}

/// 64-bit FNV-1a, used as a reproducibility tag for configs.
inline std::uint64_t fnv1a64(std::string_view text)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace lnormal
