#pragma once

// JSON and CSV interchange. Polynomials are {"lo": int, "coeffs": [...]} with
// each coefficient a number or a [re, im] pair; filters are {"N": int, "m0": poly}.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ruelle/errors.hpp"
#include "ruelle/format.hpp"
#include "ruelle/keane.hpp"
#include "ruelle/laurent.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle::io {

using json = nlohmann::json;

/// A double carrying exactly the 12 significant digits that text output shows.
inline double rounded(double x) {
    if (!std::isfinite(x)) return x;
    return std::strtod(format_number(x).c_str(), nullptr);
}

namespace detail {
inline void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
    if (!j.is_object()) throw ContractError(what + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ContractError("unknown field '" + key + "' in " + what);
    }
}

inline double finite_number(const json& j, const std::string& what) {
    if (!j.is_number()) throw ContractError(what + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ContractError(what + " must be finite");
    return v;
}

inline int integer(const json& j, const std::string& what) {
    if (!j.is_number_integer()) throw ContractError(what + " must be an integer");
    return j.get<int>();
}
}  // namespace detail

inline LaurentPoly poly_from_json(const json& j) {
    detail::require_keys(j, {"lo", "coeffs"}, "polynomial");
    if (!j.contains("coeffs") || !j.at("coeffs").is_array() || j.at("coeffs").empty())
        throw ContractError("polynomial needs a nonempty 'coeffs' array");
    const int lo = j.contains("lo") ? detail::integer(j.at("lo"), "lo") : 0;
    std::vector<cplx> c;
    for (const auto& e : j.at("coeffs")) {
        if (e.is_array()) {
            if (e.size() != 2) throw ContractError("complex coefficient must be [re, im]");
            c.emplace_back(detail::finite_number(e[0], "coefficient"), detail::finite_number(e[1], "coefficient"));
        } else {
            c.emplace_back(detail::finite_number(e, "coefficient"), 0.0);
        }
    }
    return LaurentPoly(lo, std::move(c));
}

inline json to_json(const LaurentPoly& f) {
    json coeffs = json::array();
    for (const auto& a : f.coeffs()) coeffs.push_back({rounded(a.real()), rounded(a.imag())});
    return {{"lo", f.lo()}, {"coeffs", std::move(coeffs)}};
}

inline FilterSpec filter_from_json(const json& j) {
    detail::require_keys(j, {"N", "m0"}, "filter");
    if (!j.contains("N") || !j.contains("m0")) throw ContractError("filter needs 'N' and 'm0'");
    return make_filter(detail::integer(j.at("N"), "N"), poly_from_json(j.at("m0")));
}

inline json to_json(const FilterSpec& f) { return {{"N", f.scale}, {"m0", to_json(f.m0)}}; }

inline json to_json(const EigenReport& r) {
    json basis = json::array();
    for (const auto& b : r.basis) basis.push_back(to_json(b));
    json residuals = json::array();
    for (double x : r.residuals) residuals.push_back(rounded(x));
    return {{"dimension", r.dimension},
            {"pure", r.pure},
            {"window", r.window},
            {"spectral_radius_estimate", rounded(r.spectral_radius_estimate)},
            {"residuals", std::move(residuals)},
            {"basis", std::move(basis)}};
}

/// {"name": "doubling" | "tripling" | "two-branch", "gamma": g} or
/// {"pieces": [{"domain": [lo, hi], "image": [T(lo+), T(hi-)]}, ...]} for affine pieces.
inline MarkovMap markov_from_json(const json& j) {
    detail::require_keys(j, {"name", "gamma", "pieces"}, "map");
    if (j.contains("name") == j.contains("pieces")) throw ContractError("map needs exactly one of 'name' or 'pieces'");
    if (j.contains("name")) {
        const auto name = j.at("name").get<std::string>();
        if (name != "two-branch" && j.contains("gamma")) throw ContractError("'gamma' only applies to two-branch");
        if (name == "doubling") return MarkovMap::doubling();
        if (name == "tripling") return MarkovMap::tripling();
        if (name == "two-branch") {
            if (!j.contains("gamma")) throw ContractError("two-branch needs 'gamma'");
            return MarkovMap::two_branch(detail::finite_number(j.at("gamma"), "gamma"));
        }
        throw ContractError("unknown map name '" + name + "'");
    }
    std::vector<MarkovPiece> pieces;
    for (const auto& p : j.at("pieces")) {
        detail::require_keys(p, {"domain", "image"}, "piece");
        const auto& d = p.at("domain");
        const auto& im = p.at("image");
        if (!d.is_array() || d.size() != 2 || !im.is_array() || im.size() != 2)
            throw ContractError("piece 'domain' and 'image' must be pairs");
        pieces.push_back({detail::finite_number(d[0], "domain"), detail::finite_number(d[1], "domain"),
                          detail::finite_number(im[0], "image"), detail::finite_number(im[1], "image"), {}, {}});
    }
    return MarkovMap(std::move(pieces));
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ContractError("malformed JSON in '" + path + "': " + e.what());
    }
}

/// Comma-separated row of 12-digit numbers.
inline void csv_row(std::ostream& os, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) os << ',';
        os << format_number(v);
        first = false;
    }
    os << '\n';
}

}  // namespace ruelle::io
