#pragma once

#include "qbell/box.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <variant>

namespace qbell {

using json = nlohmann::json;

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using AnyBox = std::variant<Box<Rational>, Box<double>>;

template <class T>
json scalar_to_json(const T& v) {
    if constexpr (is_exact_v<T>)
        return to_string(v);
    else
        return v;
}

template <class T>
T scalar_from_json(const json& j) {
    if constexpr (is_exact_v<T>) {
        if (j.is_string()) return parse_rational(j.get<std::string>());
        if (j.is_number_integer()) return Rational(j.get<long>());
        if (j.is_number_float()) return Rational(j.get<double>());
        throw ParseError("expected a rational literal");
    } else {
        if (j.is_number()) return j.get<double>();
        if (j.is_string()) {
            const auto s = j.get<std::string>();
            if (s.find('/') != std::string::npos) return parse_rational(s).get_d();
            std::size_t pos = 0;
            double d = std::stod(s, &pos);
            if (pos != s.size()) throw ParseError("bad float literal: " + s);
            return d;
        }
        throw ParseError("expected a number");
    }
}

inline json scenario_to_json(const BellScenario& s) {
    return json{{"ma", s.ma}, {"mb", s.mb}, {"ka", s.ka}, {"kb", s.kb}};
}

inline BellScenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("scenario must be an object");
    try {
        return BellScenario(j.at("ma").get<int>(), j.at("mb").get<int>(), j.at("ka").get<int>(),
                            j.at("kb").get<int>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad scenario block: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("bad scenario block: ") + e.what());
    }
}

template <class T>
json box_to_json(const Box<T>& box) {
    json probs = json::array();
    for (const auto& p : box.probs) probs.push_back(scalar_to_json(p));
    return json{{"scenario", scenario_to_json(box.scenario)}, {"mode", mode_name<T>()}, {"probs", probs}};
}

template <class T>
Box<T> box_from_json_as(const json& j) {
    if (!j.is_object()) throw ParseError("box must be a JSON object");
    if (!j.contains("scenario") || !j.contains("probs")) throw ParseError("box needs scenario and probs");
    auto s = scenario_from_json(j.at("scenario"));
    const auto& arr = j.at("probs");
    if (!arr.is_array()) throw ParseError("probs must be an array");
    if (arr.size() != s.events())
        throw ParseError("probs length " + std::to_string(arr.size()) + " != " + std::to_string(s.events()));
    std::vector<T> probs;
    probs.reserve(arr.size());
    try {
        for (const auto& v : arr) probs.push_back(scalar_from_json<T>(v));
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    Box<T> box(s, std::move(probs));
    try {
        check_box(box);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return box;
}

inline AnyBox box_from_json(const json& j) {
    std::string mode = "rational";
    if (j.is_object() && j.contains("mode")) mode = j.at("mode").get<std::string>();
    if (mode == "rational") return box_from_json_as<Rational>(j);
    if (mode == "float") return box_from_json_as<double>(j);
    throw ParseError("unknown mode: " + mode);
}

inline AnyBox parse_box(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    return box_from_json(j);
}

template <class T>
std::string serialize_box(const Box<T>& box) {
    return box_to_json(box).dump();
}

}  // namespace qbell
