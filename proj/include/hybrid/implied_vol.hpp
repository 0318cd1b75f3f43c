#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "hybrid/errors.hpp"
#include "hybrid/market_data.hpp"
#include "hybrid/math.hpp"

namespace hybrid {

struct VolPoint {
    double maturity;
    double strike;
    double implied_vol;
};

/// Black-Scholes price with a flat continuously compounded rate.
inline double bs_price(double x, double K, double tau, double rate, double vol, OptionKind kind) {
    const double df = std::exp(-rate * tau);
    const double sd = vol * std::sqrt(tau);
    if (sd <= 0) {
        return kind == OptionKind::call ? std::max(x - K * df, 0.0) : std::max(K * df - x, 0.0);
    }
    const double d1 = (std::log(x / (K * df)) + sd * sd / 2) / sd;
    const double d2 = d1 - sd;
    if (kind == OptionKind::call) return x * norm_cdf(d1) - K * df * norm_cdf(d2);
    return K * df * norm_cdf(-d2) - x * norm_cdf(-d1);
}

inline double bs_vega(double x, double K, double tau, double rate, double vol) {
    const double sd = vol * std::sqrt(tau);
    if (sd <= 0) return 0.0;
    const double d1 = (std::log(x / K) + rate * tau + sd * sd / 2) / sd;
    return x * norm_pdf(d1) * std::sqrt(tau);
}

inline constexpr double kMinImpliedVol = 1e-6;
inline constexpr double kMaxImpliedVol = 5.0;

/// Black-Scholes implied volatility by safeguarded Newton on [1e-6, 5].
inline double implied_vol(double price, double x, double K, double tau, double rate, OptionKind kind) {
    if (!(x > 0 && K > 0 && tau > 0)) throw ValidationError("implied_vol needs positive spot, strike and maturity");
    if (!std::isfinite(price)) throw DomainError("option price is not finite");
    const double df = std::exp(-rate * tau);
    const double lower = kind == OptionKind::call ? std::max(x - K * df, 0.0) : std::max(K * df - x, 0.0);
    const double upper = kind == OptionKind::call ? x : K * df;
    auto describe = [&](const char* which, double bound) {
        std::ostringstream os;
        os.precision(12);
        os << "price " << price << " violates the " << which << " no-arbitrage bound " << bound << " for a "
           << to_string(kind);
        return os.str();
    };
    if (price < lower) throw DomainError(describe("lower", lower));
    if (price >= upper) throw DomainError(describe("upper", upper));

    auto f = [&](double s) { return bs_price(x, K, tau, rate, s, kind) - price; };
    double lo = kMinImpliedVol, hi = kMaxImpliedVol;
    const double f_lo = f(lo);
    if (f_lo >= 0) {
        if (f_lo <= 1e-10 * x) return lo;
        throw DomainError(describe("lower", bs_price(x, K, tau, rate, lo, kind)) + " at the minimum volatility");
    }
    if (f(hi) < 0) throw DomainError(describe("upper", bs_price(x, K, tau, rate, hi, kind)) + " at the maximum volatility");

    double s = std::clamp(std::sqrt(2 * std::abs(std::log(x / (K * df))) / tau), 0.1, 1.0);
    for (int iter = 0; iter < 200; ++iter) {
        const double fs = f(s);
        if (fs == 0) return s;
        if (fs > 0) hi = s; else lo = s;
        const double vega = bs_vega(x, K, tau, rate, s);
        double next = vega > 0 ? s - fs / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - s);
        s = next;
        if (step <= 1e-15 * std::max(1.0, s) || hi - lo <= 1e-15 * std::max(1.0, s)) break;
    }
    if (!(std::abs(f(s)) <= 1e-10 * x)) throw NumericalError("implied volatility solver did not converge");
    return s;
}

/// Continuously compounded zero rate at `tau`, interpolating log discount factors
/// linearly in maturity; flat yields beyond either end.
inline double zero_rate(const TreasuryCurve& curve, double tau) {
    const auto& pts = curve.points;
    if (pts.empty()) throw ValidationError("empty treasury curve");
    if (tau <= pts.front().maturity) return pts.front().yield;
    if (tau >= pts.back().maturity) return pts.back().yield;
    const auto it = std::upper_bound(pts.begin(), pts.end(), tau,
                                     [](double t, const CurvePoint& p) { return t < p.maturity; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double la = -a.yield * a.maturity;
    const double lb = -b.yield * b.maturity;
    const double w = (tau - a.maturity) / (b.maturity - a.maturity);
    return -(la + w * (lb - la)) / tau;
}

}  // namespace hybrid
