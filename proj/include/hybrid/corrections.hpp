#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <string>

#include "hybrid/errors.hpp"
#include "hybrid/market_data.hpp"
#include "hybrid/pricing_core.hpp"

namespace hybrid {

enum class Instrument { call, put, bond };

inline std::string to_string(Instrument k) {
    switch (k) {
        case Instrument::call: return "call";
        case Instrument::put: return "put";
        case Instrument::bond: return "bond";
    }
    return "?";
}

inline Instrument parse_instrument(const std::string& s) {
    if (s == "call" || s == "c") return Instrument::call;
    if (s == "put" || s == "p") return Instrument::put;
    if (s == "bond") return Instrument::bond;
    throw ValidationError("unknown instrument '" + s + "' (expected call, put or bond)");
}

inline Instrument to_instrument(OptionKind k) { return k == OptionKind::call ? Instrument::call : Instrument::put; }

template <std::floating_point Real>
struct BasicCorrectionParams {
    Real V1e = 0, V2e = 0, V3e = 0, V4e = 0, V5e = 0, V6e = 0;
    Real V1d = 0, V2d = 0;

    void validate() const {
        for (Real v : {V1e, V2e, V3e, V4e, V5e, V6e, V1d, V2d})
            if (!std::isfinite(v)) throw ValidationError("correction coefficients must be finite");
    }
};

using CorrectionParams = BasicCorrectionParams<double>;

template <std::floating_point Real>
struct BasicGreekVector {
    std::array<Real, 8> g{};  // g[0] is g1

    Real& operator[](std::size_t i) { return g[i]; }
    Real operator[](std::size_t i) const { return g[i]; }
};

using GreekVector = BasicGreekVector<double>;

/// Raw sensitivities of P0 from which the Greek combinations are built.
/// X2 = x^2 P_xx, X3 = x d/dx(X2), Dx = x P_x, XPa = x P_xa, XPr = x P_xr,
/// X2a = x^2 P_xxa, XPeta = x P_x eta.
template <std::floating_point Real>
struct BasicSensitivities {
    Real P = 0, Dx = 0, X2 = 0, X3 = 0;
    Real Pa = 0, Pr = 0, XPa = 0, XPr = 0, X2a = 0, XPeta = 0;
};

namespace detail {

template <std::floating_point Real>
BasicSensitivities<Real> call_sensitivities(const BasicPricingInputs<Real>& in) {
    const OptionTerms<Real> t(in);
    const auto& vp = in.vasicek;
    const Real K = in.strike;
    const Real A = factor_a_dalpha(vp, in.tau);
    const Real E = factor_a_deta(vp, in.tau);
    const Real b = factor_b(vp.beta, in.tau);
    const Real v_eta = variance_v_deta(in);
    const Real n1 = norm_cdf(t.d1), n2 = norm_cdf(t.d2);
    const Real f1 = norm_pdf(t.d1);
    const Real xf1 = t.xe * f1;

    BasicSensitivities<Real> s;
    s.P = t.xe * n1 - K * t.D * n2;
    s.Dx = t.xe * n1;
    s.X2 = xf1 / t.sv;
    s.X3 = s.X2 * (1 - t.d1 / t.sv);
    s.Pa = -K * t.D * A * n2;
    s.Pr = K * t.D * b * n2;
    s.XPa = -xf1 * A / t.sv;
    s.XPr = xf1 * b / t.sv;
    s.X2a = xf1 * t.d1 * A / t.v;
    const Real log_moneyness = std::log(t.xe / K) - std::log(t.D);
    const Real dd1_deta = -E / t.sv + (-log_moneyness / (2 * t.v * t.sv) + 1 / (4 * t.sv)) * v_eta;
    s.XPeta = xf1 * dd1_deta;
    return s;
}

template <std::floating_point Real>
BasicSensitivities<Real> put_sensitivities(const BasicPricingInputs<Real>& in) {
    auto s = call_sensitivities(in);
    const Real xe = in.equity.x * std::exp(-in.equity.q * in.tau);
    const Real B = riskless_bond(in.vasicek, in.tau);
    const Real K = in.strike;
    s.P += K * B - xe;
    s.Dx -= xe;
    s.Pa += K * factor_a_dalpha(in.vasicek, in.tau) * B;
    s.Pr -= K * factor_b(in.vasicek.beta, in.tau) * B;
    return s;
}

template <std::floating_point Real>
BasicSensitivities<Real> bond_sensitivities(const BasicPricingInputs<Real>& in) {
    BasicSensitivities<Real> s;
    s.P = defaultable_bond_p0(in);
    s.Pa = factor_a_dalpha(in.vasicek, in.tau) * s.P;
    s.Pr = -factor_b(in.vasicek.beta, in.tau) * s.P;
    return s;
}

}  // namespace detail

template <std::floating_point Real>
BasicSensitivities<Real> sensitivities(const BasicPricingInputs<Real>& in, Instrument kind) {
    switch (kind) {
        case Instrument::call:
            in.validate(true);
            return detail::call_sensitivities(in);
        case Instrument::put:
            in.validate(true);
            return detail::put_sensitivities(in);
        case Instrument::bond:
            in.validate(false);
            return detail::bond_sensitivities(in);
    }
    throw ConfigError("unknown instrument");
}

template <std::floating_point Real>
BasicGreekVector<Real> greeks_from(const BasicSensitivities<Real>& s, Real tau, Real beta) {
    BasicGreekVector<Real> g;
    g[0] = -tau * s.X2;
    g[1] = -tau * s.X3;
    g[2] = s.XPa - s.Pa;
    g[3] = s.X2a;
    g[4] = s.XPeta;
    g[5] = s.XPa;
    g[6] = tau * tau / 2 * s.X2;
    g[7] = (s.XPa - s.Pa + tau * tau / 2 * (s.X2 - s.Dx + s.P) - tau * (s.XPr - s.Pr)) / beta;
    return g;
}

/// The Greek combinations g1..g8 of P0 for the given instrument.
template <std::floating_point Real>
BasicGreekVector<Real> greeks(const BasicPricingInputs<Real>& in, Instrument kind) {
    return greeks_from(sensitivities(in, kind), in.tau, in.vasicek.beta);
}

/// Greeks that carry the corrections. A put is the call less the stock plus a riskless
/// claim on K, and only the call part picks up corrections, so puts share the call basis.
template <std::floating_point Real>
BasicGreekVector<Real> correction_basis(const BasicPricingInputs<Real>& in, Instrument kind) {
    return greeks(in, kind == Instrument::put ? Instrument::call : kind);
}

namespace detail {

// Options pay nothing after default, which fixes their effective loss rate at one.
template <std::floating_point Real>
Real effective_loss(const BasicPricingInputs<Real>& in, Instrument kind) {
    return kind == Instrument::bond ? in.credit.l : Real(1);
}

template <std::floating_point Real>
Real fast_from(const BasicGreekVector<Real>& g, const BasicCorrectionParams<Real>& V, Real l) {
    return V.V1e * g[0] + V.V2e * g[1] - l * V.V3e * g[2] + V.V4e * g[3] + V.V5e * g[4] + V.V6e * g[5];
}

template <std::floating_point Real>
Real slow_from(const BasicGreekVector<Real>& g, const BasicCorrectionParams<Real>& V, Real l) {
    return V.V1d * g[6] + l * V.V2d * g[7];
}

}  // namespace detail

/// Fast-scale correction.
template <std::floating_point Real>
Real correction_fast(const BasicPricingInputs<Real>& in, const BasicCorrectionParams<Real>& V, Instrument kind) {
    return detail::fast_from(correction_basis(in, kind), V, detail::effective_loss(in, kind));
}

/// Slow-scale correction.
template <std::floating_point Real>
Real correction_slow(const BasicPricingInputs<Real>& in, const BasicCorrectionParams<Real>& V, Instrument kind) {
    return detail::slow_from(correction_basis(in, kind), V, detail::effective_loss(in, kind));
}

enum class Variant { seven_param, three_param, index };

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::seven_param: return "seven";
        case Variant::three_param: return "three";
        case Variant::index: return "index";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s) {
    if (s == "seven" || s == "seven_param") return Variant::seven_param;
    if (s == "three" || s == "three_param") return Variant::three_param;
    if (s == "index") return Variant::index;
    throw ValidationError("unknown variant '" + s + "' (expected seven, three or index)");
}

/// Coefficients actually used by a variant; throws on parameters the variant cannot carry.
template <std::floating_point Real>
BasicCorrectionParams<Real> variant_params(const BasicPricingInputs<Real>& in, BasicCorrectionParams<Real> V,
                                           Variant variant) {
    switch (variant) {
        case Variant::seven_param:
            return V;
        case Variant::three_param:
            if (V.V2e != 0 || V.V4e != 0 || V.V5e != 0 || V.V6e != 0)
                throw ConfigError("three_param variant accepts only V1e, V3e, V1d, V2d");
            if (in.equity.sigma1 && *in.equity.sigma1 != in.equity.sigma2)
                throw ConfigError("three_param variant requires sigma1 == sigma2");
            return V;
        case Variant::index:
            if (in.credit.lambda != 0) throw ConfigError("index variant requires zero intensity");
            V.V3e = 0;
            V.V1d = 0;
            V.V2d = 0;
            return V;
    }
    throw ConfigError("unknown variant");
}

/// P0 plus the corrections applicable to the variant.
template <std::floating_point Real>
Real price_full(const BasicPricingInputs<Real>& in, const BasicCorrectionParams<Real>& V, Instrument kind,
                Variant variant = Variant::seven_param) {
    V.validate();
    const auto W = variant_params(in, V, variant);
    const auto basis = correction_basis(in, kind);
    const Real l = detail::effective_loss(in, kind);
    Real p0;
    switch (kind) {
        case Instrument::call: p0 = call_p0(in); break;
        case Instrument::put: p0 = put_p0(in); break;
        default: p0 = defaultable_bond_p0(in); break;
    }
    return p0 + detail::fast_from(basis, W, l) + detail::slow_from(basis, W, l);
}

}  // namespace hybrid
