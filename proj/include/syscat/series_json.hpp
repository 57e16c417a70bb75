#pragma once

// JSON form of a PolyLogSeries for golden-file tests and CLI artifacts:
//   {"mode": "exact"|"float", "base_exponent": a, "order": K,
//    "terms": [{"k":., "j":., "num":., "den":.} | {"k":., "j":., "value":.}]}
//
// Exact and float payloads are distinct modes; combining them without an
// explicit promotion is an error ("mode mismatch").

#include <json.hpp>
#include <variant>

#include "syscat/series.hpp"

namespace syscat {

using json = nlohmann::ordered_json;

inline json to_json(const SeriesQ& s) {
    json terms = json::array();
    for (const auto& [key, c] : s.terms())
        terms.push_back({{"k", key.first},
                         {"j", key.second},
                         {"num", boost::multiprecision::numerator(c).str()},
                         {"den", boost::multiprecision::denominator(c).str()}});
    return {{"mode", "exact"},
            {"base_exponent", s.base_exponent()},
            {"order", s.order() >= SeriesQ::unbounded ? -1 : s.order()},
            {"terms", terms}};
}

inline json to_json(const SeriesD& s) {
    json terms = json::array();
    for (const auto& [key, c] : s.terms())
        terms.push_back({{"k", key.first}, {"j", key.second}, {"value", c}});
    return {{"mode", "float"},
            {"base_exponent", s.base_exponent()},
            {"order", s.order() >= SeriesD::unbounded ? -1 : s.order()},
            {"terms", terms}};
}

/// Runtime-tagged series as read from files.
using DynSeries = std::variant<SeriesQ, SeriesD>;

inline DynSeries series_from_json(const json& j) {
    const std::string mode = j.at("mode").get<std::string>();
    int order = j.at("order").get<int>();
    if (order < 0) order = SeriesQ::unbounded;
    double base = j.at("base_exponent").get<double>();
    if (mode == "exact") {
        SeriesQ s;
        s.with_base(base);
        s = s.truncated(order);
        for (const auto& t : j.at("terms"))
            s.set(t.at("k").get<int>(), t.at("j").get<int>(),
                  Rational(BigInt(t.at("num").get<std::string>()),
                           BigInt(t.at("den").get<std::string>())));
        return s;
    }
    if (mode == "float") {
        SeriesD s;
        s.with_base(base);
        s = s.truncated(order);
        for (const auto& t : j.at("terms"))
            s.set(t.at("k").get<int>(), t.at("j").get<int>(), t.at("value").get<double>());
        return s;
    }
    throw std::invalid_argument("unknown series mode: " + mode);
}

/// Arithmetic on tagged series; exact*float without promotion is rejected.
inline DynSeries dyn_mul(const DynSeries& a, const DynSeries& b) {
    if (a.index() != b.index()) throw std::invalid_argument("mode mismatch");
    if (std::holds_alternative<SeriesQ>(a))
        return std::get<SeriesQ>(a) * std::get<SeriesQ>(b);
    return std::get<SeriesD>(a) * std::get<SeriesD>(b);
}

inline DynSeries dyn_add(const DynSeries& a, const DynSeries& b) {
    if (a.index() != b.index()) throw std::invalid_argument("mode mismatch");
    if (std::holds_alternative<SeriesQ>(a))
        return std::get<SeriesQ>(a) + std::get<SeriesQ>(b);
    return std::get<SeriesD>(a) + std::get<SeriesD>(b);
}

inline DynSeries dyn_promote(const DynSeries& a) {
    if (std::holds_alternative<SeriesQ>(a)) return promote(std::get<SeriesQ>(a));
    return a;
}

}  // namespace syscat
