#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <vector>

#include "hybrid/errors.hpp"
#include "hybrid/math.hpp"
#include "hybrid/rates.hpp"

namespace hybrid {

template <std::floating_point Real>
struct BasicCreditParams {
    Real l;       // loss rate
    Real lambda;  // effective default intensity

    void validate() const {
        if (!(l >= 0 && l <= 1)) throw ValidationError("loss rate must lie in [0, 1]");
        if (!(std::isfinite(lambda) && lambda >= 0)) throw ValidationError("intensity must be non-negative");
    }
};

template <std::floating_point Real>
struct BasicPricingInputs {
    BasicVasicekParams<Real> vasicek;
    BasicEquityParams<Real> equity;
    BasicCreditParams<Real> credit;
    Real tau;
    Real strike = 0;

    // Bonds ignore the equity block and the strike.
    void validate(bool option) const {
        vasicek.validate();
        credit.validate();
        if (!(std::isfinite(tau) && tau >= 0)) throw ValidationError("time to maturity must be non-negative");
        if (option) {
            equity.validate();
            if (!(std::isfinite(strike) && strike > 0)) throw ValidationError("strike must be positive");
        }
    }
};

using CreditParams = BasicCreditParams<double>;
using PricingInputs = BasicPricingInputs<double>;

/// Variance of log F_T under the T-forward measure:
/// int_0^tau (sigma2^2 + 2 rho1 sigma2 eta b(s) + eta^2 b(s)^2) ds.
template <std::floating_point Real>
Real variance_v(const BasicPricingInputs<Real>& in) {
    const auto& p = in.vasicek;
    const Real s2 = in.equity.sigma2;
    const Real t = in.tau;
    const Real x = p.beta * t;
    const Real v = s2 * s2 * t + 2 * p.eta * in.equity.rho1 * s2 * t * t * detail::kernel_e2(x) +
                   2 * p.eta * p.eta * t * t * t * detail::kernel_h3(x);
    if (v < 0) throw DomainError("negative forward variance: inadmissible rho1/eta combination");
    return v;
}

/// dv/deta.
template <std::floating_point Real>
Real variance_v_deta(const BasicPricingInputs<Real>& in) {
    const auto& p = in.vasicek;
    const Real t = in.tau;
    const Real x = p.beta * t;
    return 2 * in.equity.rho1 * in.equity.sigma2 * t * t * detail::kernel_e2(x) +
           4 * p.eta * t * t * t * detail::kernel_h3(x);
}

/// B0c(l) = exp(-l lambda tau) B(tau), the leading-order defaultable zero-coupon bond.
template <std::floating_point Real>
Real defaultable_bond_p0(const BasicPricingInputs<Real>& in) {
    return std::exp(-in.credit.l * in.credit.lambda * in.tau) * riskless_bond(in.vasicek, in.tau);
}

namespace detail {

// Shared pieces of the call/put closed forms.
template <std::floating_point Real>
struct OptionTerms {
    Real xe;   // dividend-adjusted spot
    Real B;    // riskless bond
    Real D;    // defaultable bond with total loss
    Real v;
    Real sv;
    Real d1;
    Real d2;

    explicit OptionTerms(const BasicPricingInputs<Real>& in) {
        xe = in.equity.x * std::exp(-in.equity.q * in.tau);
        B = riskless_bond(in.vasicek, in.tau);
        D = B * std::exp(-in.credit.lambda * in.tau);
        v = variance_v(in);
        if (!(v > 0)) throw DomainError("forward variance must be positive for option pricing");
        sv = std::sqrt(v);
        d1 = (std::log(xe / in.strike) - std::log(D) + v / 2) / sv;
        d2 = d1 - sv;
    }
};

}  // namespace detail

/// x N(d1) - K B0c(1) N(d2).
template <std::floating_point Real>
Real call_p0(const BasicPricingInputs<Real>& in) {
    const detail::OptionTerms<Real> t(in);
    return t.xe * norm_cdf(t.d1) - in.strike * t.D * norm_cdf(t.d2);
}

/// The call less the stock plus a riskless claim on K.
template <std::floating_point Real>
Real put_p0(const BasicPricingInputs<Real>& in) {
    const detail::OptionTerms<Real> t(in);
    return t.xe * norm_cdf(t.d1) - in.strike * t.D * norm_cdf(t.d2) - t.xe + in.strike * t.B;
}

struct QuadratureOptions {
    std::size_t nodes = 128;
    // Payoff kinks or jumps, in price units. When present the integral is split there
    // and each panel is integrated with Gauss-Legendre (`nodes` per panel).
    std::vector<double> breakpoints{};
    double z_max = 12.0;
};

/// Mean of log F_T under the T-forward measure.
inline double forward_log_mean(const PricingInputs& in) {
    const double xe = in.equity.x * std::exp(-in.equity.q * in.tau);
    return std::log(xe) + in.credit.lambda * in.tau - factor_a(in.vasicek, in.tau) +
           factor_b(in.vasicek.beta, in.tau) * in.vasicek.r - variance_v(in) / 2;
}

/// B0c(l) E[h(exp(U))], U ~ N(m, v).
inline double generic_p0(const PricingInputs& in, const std::function<double(double)>& payoff,
                         const QuadratureOptions& opt = {}) {
    const double m = forward_log_mean(in);
    const double v = variance_v(in);
    const double sv = std::sqrt(v);
    const double disc = defaultable_bond_p0(in);
    auto eval = [&](double z) {
        const double h = payoff(std::exp(m + sv * z));
        if (!std::isfinite(h)) throw NumericalError("payoff returned a non-finite value");
        return h;
    };

    double sum = 0.0;
    if (sv == 0.0) {
        sum = eval(0.0);
    } else if (opt.breakpoints.empty()) {
        const auto& rule = normal_hermite_rule(opt.nodes);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * eval(rule.nodes[i]);
    } else {
        std::vector<double> cuts{-opt.z_max, opt.z_max};
        for (double k : opt.breakpoints) {
            if (!(k > 0)) continue;
            const double z = (std::log(k) - m) / sv;
            if (z > -opt.z_max && z < opt.z_max) cuts.push_back(z);
        }
        std::sort(cuts.begin(), cuts.end());
        const auto& rule = legendre_rule(opt.nodes);
        for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
            const double half = (cuts[p + 1] - cuts[p]) / 2;
            const double mid = (cuts[p + 1] + cuts[p]) / 2;
            if (half <= 0) continue;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double z = mid + half * rule.nodes[i];
                sum += half * rule.weights[i] * norm_pdf(z) * eval(z);
            }
        }
    }
    return disc * sum;
}

}  // namespace hybrid
