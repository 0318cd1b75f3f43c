#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hybrid/calibration.hpp"
#include "hybrid/cds.hpp"
#include "hybrid/corrections.hpp"
#include "hybrid/errors.hpp"

namespace hybrid {

using json = nlohmann::json;

/// Everything needed to price: the parameter block of a calibration report.
struct ModelParams {
    VasicekParams vasicek{};
    std::optional<EquityParams> equity{};
    CreditParams credit{0.0, 0.0};
    CorrectionParams V{};
    Variant variant = Variant::seven_param;

    CreditModel credit_model() const { return {vasicek, credit, V}; }

    const EquityParams& require_equity() const {
        if (!equity) throw ValidationError("parameters have no equity block");
        return *equity;
    }
};

namespace detail {

inline double get_number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) throw ValidationError(where + ": '" + key + "' must be a number");
    return v.get<double>();
}

inline double get_number_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? get_number(j, key, where) : fallback;
}

}  // namespace detail

inline json to_json(const VasicekParams& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta}, {"eta", p.eta}, {"r", p.r}};
}

inline json to_json(const EquityParams& e) {
    json j = {{"x", e.x}, {"sigma2", e.sigma2}, {"rho1", e.rho1}, {"q", e.q}};
    j["sigma1"] = e.effective_sigma1();
    return j;
}

inline json to_json(const CreditParams& c) { return {{"l", c.l}, {"lambda", c.lambda}}; }

inline json to_json(const CorrectionParams& V) {
    return {{"V1e", V.V1e}, {"V2e", V.V2e}, {"V3e", V.V3e}, {"V4e", V.V4e},
            {"V5e", V.V5e}, {"V6e", V.V6e}, {"V1d", V.V1d}, {"V2d", V.V2d}};
}

inline json to_json(const ModelParams& m) {
    json j = {{"vasicek", to_json(m.vasicek)},
              {"credit", to_json(m.credit)},
              {"corrections", to_json(m.V)},
              {"variant", to_string(m.variant)}};
    if (m.equity) j["equity"] = to_json(*m.equity);
    return j;
}

inline VasicekParams vasicek_from_json(const json& j) {
    const std::string w = "vasicek";
    VasicekParams p{detail::get_number(j, "alpha", w), detail::get_number(j, "beta", w), detail::get_number(j, "eta", w),
                    detail::get_number(j, "r", w)};
    p.validate();
    return p;
}

inline EquityParams equity_from_json(const json& j) {
    const std::string w = "equity";
    EquityParams e{detail::get_number(j, "x", w), detail::get_number(j, "sigma2", w), detail::get_number(j, "rho1", w),
                   detail::get_number_or(j, "q", 0.0, w)};
    if (j.contains("sigma1")) e.sigma1 = detail::get_number(j, "sigma1", w);
    e.validate();
    return e;
}

inline CreditParams credit_from_json(const json& j) {
    const std::string w = "credit";
    CreditParams c{detail::get_number(j, "l", w), detail::get_number(j, "lambda", w)};
    c.validate();
    return c;
}

inline CorrectionParams corrections_from_json(const json& j) {
    const std::string w = "corrections";
    CorrectionParams V;
    V.V1e = detail::get_number_or(j, "V1e", 0, w);
    V.V2e = detail::get_number_or(j, "V2e", 0, w);
    V.V3e = detail::get_number_or(j, "V3e", 0, w);
    V.V4e = detail::get_number_or(j, "V4e", 0, w);
    V.V5e = detail::get_number_or(j, "V5e", 0, w);
    V.V6e = detail::get_number_or(j, "V6e", 0, w);
    V.V1d = detail::get_number_or(j, "V1d", 0, w);
    V.V2d = detail::get_number_or(j, "V2d", 0, w);
    V.validate();
    return V;
}

/// Accepts either a bare parameter block or a full report carrying one under "parameters".
inline ModelParams model_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("parameter document must be a JSON object");
    const json& j = doc.contains("parameters") ? doc.at("parameters") : doc;
    if (!j.contains("vasicek")) throw ValidationError("parameters: missing 'vasicek' block");
    ModelParams m;
    m.vasicek = vasicek_from_json(j.at("vasicek"));
    if (j.contains("equity")) m.equity = equity_from_json(j.at("equity"));
    if (j.contains("credit")) m.credit = credit_from_json(j.at("credit"));
    if (j.contains("corrections")) m.V = corrections_from_json(j.at("corrections"));
    if (j.contains("variant")) {
        if (!j.at("variant").is_string()) throw ValidationError("parameters: 'variant' must be a string");
        m.variant = parse_variant(j.at("variant").get<std::string>());
    }
    return m;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
}

inline ModelParams load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

/// 64-bit FNV-1a, hex encoded.
class Fnv1a {
  public:
    void update(std::string_view bytes) {
        for (unsigned char c : bytes) {
            hash_ ^= c;
            hash_ *= 0x100000001b3ULL;
        }
    }
    std::string hex() const {
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << hash_;
        return os.str();
    }

  private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline json to_json(const BondFit& f) {
    return {{"l_lambda", f.l_lambda}, {"l_V3", f.l_V3}, {"l_V2d", f.l_V2d}, {"residual", f.residual},
            {"grid_spacing", f.grid_spacing}};
}

inline json to_json(const OptionFit& f) {
    json trace = json::array();
    for (const auto& t : f.trace) trace.push_back({t.grid_value, t.residual});
    return {{"l", f.l},
            {"lambda", f.lambda},
            {"corrections", to_json(f.V)},
            {"weighted_residual", f.weighted_residual},
            {"condition_number", f.condition_number},
            {"grid_spacing", f.grid_spacing},
            {"variant", to_string(f.variant)},
            {"l_trace", trace}};
}

struct CalibrationReport {
    std::string date;
    std::string inputs_digest;
    ModelParams parameters;
    std::optional<BondFit> bond_fit;
    OptionFit option_fit;
};

inline json to_json(const CalibrationReport& r) {
    json j = {{"status", "ok"},
              {"date", r.date},
              {"variant", to_string(r.parameters.variant)},
              {"inputs_digest", r.inputs_digest},
              {"parameters", to_json(r.parameters)},
              {"option_fit", to_json(r.option_fit)}};
    j["bond_fit"] = r.bond_fit ? to_json(*r.bond_fit) : json(nullptr);
    return j;
}

}  // namespace hybrid
