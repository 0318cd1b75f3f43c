#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "hybrid/errors.hpp"
#include "hybrid/market_data.hpp"

namespace hybrid {

// Vasicek short rate dr = (alpha - beta r) dt + eta dW.
template <std::floating_point Real>
struct BasicVasicekParams {
    Real alpha;
    Real beta;
    Real eta;
    Real r;

    void validate() const {
        if (!(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(eta) && std::isfinite(r)))
            throw ValidationError("Vasicek parameters must be finite");
        if (!(beta > 0)) throw ValidationError("Vasicek beta must be positive");
        if (!(eta >= 0)) throw ValidationError("Vasicek eta must be non-negative");
    }
};

// Effective equity dynamics. Only the product rho1 * sigma2 (the covariance of the
// stock with the short rate) enters the prices; sigma1 is kept for reporting.
template <std::floating_point Real>
struct BasicEquityParams {
    Real x;       // spot
    Real sigma2;  // effective (root-mean-square) volatility
    Real rho1;    // effective rate/stock correlation
    Real q = 0;   // continuous dividend yield
    std::optional<Real> sigma1{};

    Real effective_sigma1() const { return sigma1.value_or(sigma2); }

    void validate() const {
        if (!(std::isfinite(x) && x > 0)) throw ValidationError("spot must be positive");
        if (!(std::isfinite(sigma2) && sigma2 > 0)) throw ValidationError("sigma2 must be positive");
        if (!(std::abs(rho1) < 1)) throw ValidationError("rho1 must lie in (-1, 1)");
        if (!(std::isfinite(q) && q >= 0)) throw ValidationError("dividend yield must be non-negative");
        if (sigma1 && !(std::isfinite(*sigma1) && *sigma1 > 0)) throw ValidationError("sigma1 must be positive");
    }
};

using VasicekParams = BasicVasicekParams<double>;
using EquityParams = BasicEquityParams<double>;

namespace detail {

// Below this |beta*s| the closed forms lose digits to cancellation (h3 loses ~eps/x^2)
// and the kernels are summed from their Taylor series instead.
inline constexpr double kSeriesThreshold = 0.5;
inline constexpr int kSeriesTerms = 30;

// sum_{k>=0} c_k x^k with c_k = (-1)^k / (k+shift)!
template <std::floating_point Real>
Real exp_tail_series(Real x, int shift) {
    Real fact = 1;
    for (int i = 2; i <= shift; ++i) fact *= i;
    Real term = 1 / fact, sum = 0;
    for (int k = 0; k < kSeriesTerms; ++k) {
        sum += term;
        term *= -x / Real(k + shift + 1);
    }
    return sum;
}

// (1 - e^{-x}) / x
template <std::floating_point Real>
Real kernel_e1(Real x) {
    if (std::abs(x) < Real(kSeriesThreshold)) return exp_tail_series(x, 1);
    return -std::expm1(-x) / x;
}

// (x - 1 + e^{-x}) / x^2
template <std::floating_point Real>
Real kernel_e2(Real x) {
    if (std::abs(x) < Real(kSeriesThreshold)) return exp_tail_series(x, 2);
    return (x + std::expm1(-x)) / (x * x);
}

// (x/2 - (1 - e^{-x}) + (1 - e^{-2x})/4) / x^3; half the integral of b^2, scaled.
template <std::floating_point Real>
Real kernel_h3(Real x) {
    if (std::abs(x) < Real(kSeriesThreshold)) {
        // sum_{n>=3} (-1)^n (1 - 2^{n-2}) x^{n-3} / n!
        Real sum = 0, xn = 1, fact = 6, pow2 = 2;
        for (int n = 3; n < 3 + kSeriesTerms; ++n) {
            sum += (n % 2 ? -1 : 1) * (1 - pow2) * xn / fact;
            xn *= x;
            fact *= n + 1;
            pow2 *= 2;
        }
        return sum;
    }
    return (x / 2 + std::expm1(-x) - std::expm1(-2 * x) / 4) / (x * x * x);
}

}  // namespace detail

/// b(s) = (1 - e^{-beta s}) / beta.
template <std::floating_point Real>
Real factor_b(Real beta, Real s) {
    return s * detail::kernel_e1(beta * s);
}

/// a(s) = -alpha * int_0^s b + (eta^2 / 2) * int_0^s b^2, the Vasicek log-bond intercept.
template <std::floating_point Real>
Real factor_a(const BasicVasicekParams<Real>& p, Real s) {
    const Real x = p.beta * s;
    return -p.alpha * s * s * detail::kernel_e2(x) + p.eta * p.eta * s * s * s * detail::kernel_h3(x);
}

/// da/dalpha.
template <std::floating_point Real>
Real factor_a_dalpha(const BasicVasicekParams<Real>& p, Real s) {
    return -s * s * detail::kernel_e2(p.beta * s);
}

/// da/deta.
template <std::floating_point Real>
Real factor_a_deta(const BasicVasicekParams<Real>& p, Real s) {
    return 2 * p.eta * s * s * s * detail::kernel_h3(p.beta * s);
}

/// Riskless zero-coupon bond B(t, t+s) = exp(a(s) - b(s) r).
template <std::floating_point Real>
Real riskless_bond(const BasicVasicekParams<Real>& p, Real s) {
    if (s == 0) return Real(1);
    return std::exp(factor_a(p, s) - factor_b(p.beta, s) * p.r);
}

/// Continuously compounded zero yield -(a(s) - b(s) r) / s; the short rate at s = 0.
template <std::floating_point Real>
Real model_yield(const BasicVasicekParams<Real>& p, Real s) {
    const Real x = p.beta * s;
    return p.alpha * s * detail::kernel_e2(x) - p.eta * p.eta * s * s * detail::kernel_h3(x) +
           p.r * detail::kernel_e1(x);
}

struct VasicekFitOptions {
    double beta_min = 1e-4;
    double beta_max = 5.0;
    double alpha_min = -0.5;
    double alpha_max = 0.5;
    double eta_max = 1.0;
    int starts = 8;
    int scan_points = 128;
    std::uintmax_t max_iterations = 200;
};

struct VasicekFit {
    VasicekParams params;
    double residual;  // sum of squared yield errors
};

struct VasicekFitError : NumericalError {
    VasicekFitError(const std::string& what, VasicekFit best) : NumericalError(what), best(best) {}
    VasicekFit best;
};

namespace detail {

struct BoxedPair {
    double alpha;
    double w;  // eta^2
    double sse;
};

// min over alpha in [a_lo, a_hi], w in [0, w_hi] of |y - alpha*ca - w*cw|^2.
inline BoxedPair boxed_pair_lsq(const std::vector<double>& ca, const std::vector<double>& cw,
                                const std::vector<double>& y, double a_lo, double a_hi, double w_hi) {
    double saa = 0, sww = 0, saw = 0, say = 0, swy = 0, syy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        saa += ca[i] * ca[i];
        sww += cw[i] * cw[i];
        saw += ca[i] * cw[i];
        say += ca[i] * y[i];
        swy += cw[i] * y[i];
        syy += y[i] * y[i];
    }
    auto sse = [&](double a, double w) {
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double e = y[i] - a * ca[i] - w * cw[i];
            s += e * e;
        }
        return s;
    };
    std::vector<BoxedPair> candidates;
    const double det = saa * sww - saw * saw;
    if (det > 1e-14 * saa * sww) {
        const double a = (say * sww - swy * saw) / det;
        const double w = (swy * saa - say * saw) / det;
        if (a >= a_lo && a <= a_hi && w >= 0 && w <= w_hi) candidates.push_back({a, w, sse(a, w)});
    }
    for (double w : {0.0, w_hi}) {
        const double a = saa > 0 ? std::clamp((say - w * saw) / saa, a_lo, a_hi) : 0.0;
        candidates.push_back({a, w, sse(a, w)});
    }
    for (double a : {a_lo, a_hi}) {
        const double w = sww > 0 ? std::clamp((swy - a * saw) / sww, 0.0, w_hi) : 0.0;
        candidates.push_back({a, w, sse(a, w)});
    }
    return *std::min_element(candidates.begin(), candidates.end(),
                             [](const BoxedPair& l, const BoxedPair& r) { return l.sse < r.sse; });
}

}  // namespace detail

/// Least-squares fit of (alpha, beta, eta) to a zero-yield curve with the short rate
/// pinned at `r_proxy`. The model yield is linear in (alpha, eta^2) for fixed beta, so
/// beta is searched with Brent's method from several log-spaced brackets and the pair
/// is solved exactly inside its box at every trial beta.
inline VasicekFit fit_vasicek(const TreasuryCurve& curve, double r_proxy, const VasicekFitOptions& opt = {}) {
    curve.validate();
    if (!std::isfinite(r_proxy)) throw ValidationError("short-rate proxy must be finite");
    const auto n = curve.points.size();

    auto solve_at = [&](double beta) {
        std::vector<double> ca(n), cw(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = curve.points[i].maturity;
            const double x = beta * s;
            ca[i] = s * detail::kernel_e2(x);
            cw[i] = -s * s * detail::kernel_h3(x);
            y[i] = curve.points[i].yield - r_proxy * detail::kernel_e1(x);
        }
        return detail::boxed_pair_lsq(ca, cw, y, opt.alpha_min, opt.alpha_max, opt.eta_max * opt.eta_max);
    };

    // The profile in beta is not unimodal (the eta >= 0 bound creates kinks), so scan a
    // log grid first and refine the `starts` best local minima with Brent.
    const double lo = std::log(opt.beta_min);
    const double hi = std::log(opt.beta_max);
    const int m = std::max(opt.scan_points, 3);
    std::vector<double> grid(static_cast<std::size_t>(m)), prof(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (m - 1);
        prof[static_cast<std::size_t>(i)] = solve_at(std::exp(grid[static_cast<std::size_t>(i)])).sse;
    }
    std::vector<int> minima;
    for (int i = 0; i < m; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const bool left = i == 0 || prof[u] <= prof[u - 1];
        const bool right = i == m - 1 || prof[u] <= prof[u + 1];
        if (left && right) minima.push_back(i);
    }
    std::sort(minima.begin(), minima.end(),
              [&](int a, int b) { return prof[static_cast<std::size_t>(a)] < prof[static_cast<std::size_t>(b)]; });
    if (static_cast<int>(minima.size()) > opt.starts) minima.resize(static_cast<std::size_t>(std::max(opt.starts, 1)));

    std::optional<VasicekFit> best;
    int converged = 0;
    for (int i : minima) {
        const double a = grid[static_cast<std::size_t>(std::max(i - 1, 0))];
        const double b = grid[static_cast<std::size_t>(std::min(i + 1, m - 1))];
        std::uintmax_t iters = opt.max_iterations;
        const auto [log_beta, sse] = boost::math::tools::brent_find_minima(
            [&](double lb) { return solve_at(std::exp(lb)).sse; }, a, b, std::numeric_limits<double>::digits / 2,
            iters);
        if (iters < opt.max_iterations) ++converged;
        const double beta = std::exp(log_beta);
        const auto pair = solve_at(beta);
        VasicekFit fit{{pair.alpha, beta, std::sqrt(pair.w), r_proxy}, pair.sse};
        if (!best || fit.residual < best->residual) best = fit;
    }
    if (converged == 0) throw VasicekFitError("Vasicek curve fit did not converge", *best);
    return *best;
}

namespace detail {

inline std::vector<double> log_returns(const std::vector<double>& values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t i = 1; i < values.size(); ++i) out.push_back(std::log(values[i] / values[i - 1]));
    return out;
}

inline double sample_stdev(const std::vector<double>& xs) {
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

inline constexpr std::size_t kMinHistory = 30;
inline constexpr double kTradingDaysPerYear = 252.0;

/// Annualized standard deviation of daily log returns.
inline double estimate_sigma2(const PriceHistory& h) {
    h.validate();
    if (h.size() < kMinHistory)
        throw ValidationError("volatility estimate needs at least " + std::to_string(kMinHistory) +
                              " observations, got " + std::to_string(h.size()));
    std::vector<double> values;
    for (const auto& o : h.observations) values.push_back(o.value);
    return detail::sample_stdev(detail::log_returns(values)) * std::sqrt(kTradingDaysPerYear);
}

/// Sample correlation of stock log returns with spot-rate differences over the common
/// dates of both series, clamped to (-0.999, 0.999).
inline double estimate_rho1(const PriceHistory& stock, const PriceHistory& spot_rate) {
    stock.validate();
    spot_rate.validate();
    std::vector<double> s, r;
    auto i = stock.observations.begin();
    auto j = spot_rate.observations.begin();
    while (i != stock.observations.end() && j != spot_rate.observations.end()) {
        if (i->date < j->date) {
            ++i;
        } else if (j->date < i->date) {
            ++j;
        } else {
            s.push_back(i->value);
            r.push_back(j->value);
            ++i;
            ++j;
        }
    }
    if (s.size() < kMinHistory)
        throw ValidationError("correlation estimate needs at least " + std::to_string(kMinHistory) +
                              " common dates, got " + std::to_string(s.size()));
    const auto ret = detail::log_returns(s);
    std::vector<double> dr(r.size() - 1);
    for (std::size_t k = 1; k < r.size(); ++k) dr[k - 1] = r[k] - r[k - 1];
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < ret.size(); ++k) {
        mx += ret[k];
        my += dr[k];
    }
    mx /= static_cast<double>(ret.size());
    my /= static_cast<double>(dr.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < ret.size(); ++k) {
        sxy += (ret[k] - mx) * (dr[k] - my);
        sxx += (ret[k] - mx) * (ret[k] - mx);
        syy += (dr[k] - my) * (dr[k] - my);
    }
    if (!(sxx > 0 && syy > 0)) throw NumericalError("correlation undefined: a series has zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -0.999, 0.999);
}

}  // namespace hybrid
