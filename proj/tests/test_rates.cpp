#include <gtest/gtest.h>

#include <random>

#include "hybrid/rates.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace hybrid;

namespace {

TreasuryCurve model_curve(const VasicekParams& p, const std::vector<double>& tenors) {
    TreasuryCurve c;
    for (double s : tenors) c.points.push_back({s, model_yield(p, s)});
    return c;
}

PriceHistory history(const std::vector<double>& values, int start_offset = 0) {
    PriceHistory h;
    const std::chrono::sys_days d0{std::chrono::year{2006} / 1 / 2};
    for (std::size_t i = 0; i < values.size(); ++i)
        h.observations.push_back({Date{d0 + std::chrono::days{start_offset + static_cast<int>(i)}}, values[i]});
    return h;
}

}  // namespace

TEST(FactorB, Values) {
    EXPECT_NEAR(factor_b(0.1, 1.0), 0.951625819640404, 1e-12);
    EXPECT_NEAR(factor_b(2.0, 10.0), 0.49999999897, 1e-10);
    EXPECT_DOUBLE_EQ(factor_b(0.5, 0.0), 0.0);
}

TEST(FactorB, SeriesBranchIsSeamless) {
    for (double s : {0.01, 1.0, 5.0}) {
        EXPECT_NEAR(factor_b(1e-9, s), s - 1e-9 * s * s / 2, 1e-15 * s);
        const double beta_switch = detail::kSeriesThreshold / s;
        for (double beta : {beta_switch * (1 - 1e-9), beta_switch * (1 + 1e-9), beta_switch / 7})
            EXPECT_NEAR(factor_b(beta, s), static_cast<double>(oracle::b_direct(beta, s)), 2e-16 * s);
    }
}

TEST(Kernels, SeriesMatchesLongDoubleClosedForm) {
    for (double x : {1e-6, 1e-3, 0.1, 0.49, 0.51}) {
        const long double X = x;
        const long double h3 = (X / 2 + std::expm1(-X) - std::expm1(-2 * X) / 4) / (X * X * X);
        const long double e2 = (X + std::expm1(-X)) / (X * X);
        // Long double still cancels; only compare where it keeps enough digits.
        if (x >= 1e-3) {
            EXPECT_NEAR(detail::kernel_h3(x), static_cast<double>(h3), 1e-13);
            EXPECT_NEAR(detail::kernel_e2(x), static_cast<double>(e2), 1e-15);
        }
        EXPECT_NEAR(detail::kernel_h3(x), detail::kernel_h3(static_cast<long double>(x)), 1e-16);
    }
    EXPECT_DOUBLE_EQ(detail::kernel_h3(0.0), 1.0 / 6);
    EXPECT_DOUBLE_EQ(detail::kernel_e2(0.0), 0.5);
    EXPECT_DOUBLE_EQ(detail::kernel_e1(0.0), 1.0);
}

TEST(FactorB, AgreesWithDirectFormula) {
    for (double beta : {0.01, 0.0872, 0.5, 3.0})
        for (double s : {0.1, 1.0, 7.0, 20.0})
            EXPECT_NEAR(factor_b(beta, s), static_cast<double>(oracle::b_direct(beta, s)), 1e-13);
}

TEST(FactorA, MatchesRiccatiOde) {
    const std::vector<VasicekParams> sets{{0.0063, 0.1034, 0.012, 0.05},
                                          {0.0078, 0.1173, 0.0241, 0.0476},
                                          {-0.01, 0.8, 0.05, 0.03},
                                          {0.004, 1e-4, 0.01, 0.04}};
    for (const auto& p : sets)
        for (double s : {0.1, 1.0, 5.0, 20.0})
            EXPECT_NEAR(factor_a(p, s), static_cast<double>(oracle::a_by_ode(p, s)), 1e-12)
                << "beta=" << p.beta << " s=" << s;
}

TEST(FactorA, ZeroVolFormula) {
    const VasicekParams p{0.0063, 0.1034, 0.0, 0.05};
    for (double s : {0.5, 2.0, 10.0})
        EXPECT_NEAR(factor_a(p, s), -p.alpha / p.beta * (s - factor_b(p.beta, s)), 1e-14);
}

TEST(FactorA, Derivatives) {
    const VasicekParams p{0.0063, 0.1034, 0.012, 0.05};
    for (double s : {0.3, 3.0}) {
        const double h = 1e-6;
        auto shifted = [&](double da, double de) {
            VasicekParams q = p;
            q.alpha += da;
            q.eta += de;
            return factor_a(q, s);
        };
        EXPECT_NEAR(factor_a_dalpha(p, s), (shifted(h, 0) - shifted(-h, 0)) / (2 * h), 1e-8);
        EXPECT_NEAR(factor_a_deta(p, s), (shifted(0, h) - shifted(0, -h)) / (2 * h), 1e-8);
    }
}

TEST(RisklessBond, ShortMaturityLimit) {
    const VasicekParams p{0.0063, 0.1034, 0.012, 0.05};
    EXPECT_DOUBLE_EQ(riskless_bond(p, 0.0), 1.0);
    EXPECT_NEAR(model_yield(p, 1e-8), p.r, 1e-9);
    EXPECT_NEAR(riskless_bond(p, 2.0), std::exp(-2.0 * model_yield(p, 2.0)), 1e-15);
}

TEST(RisklessBond, RejectsBadParameters) {
    VasicekParams p{0.0063, -0.1, 0.012, 0.05};
    EXPECT_THROW(p.validate(), ValidationError);
    p = {0.0063, 0.1, -0.01, 0.05};
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(FitVasicek, RoundTrip) {
    const auto truth = fixtures::index_rates();
    const auto curve = model_curve(truth, fixtures::treasury_tenors());
    const auto fit = fit_vasicek(curve, truth.r);
    EXPECT_NEAR(fit.params.alpha, truth.alpha, 1e-4);
    EXPECT_NEAR(fit.params.beta, truth.beta, 1e-4);
    EXPECT_NEAR(fit.params.eta, truth.eta, 1e-4);
    EXPECT_LT(fit.residual, 1e-16);
}

TEST(FitVasicek, RoundTripOtherSets) {
    for (const auto& truth : {fixtures::surface_rates(), fixtures::early_rates(), VasicekParams{0.02, 0.5, 0.03, 0.01}}) {
        const auto fit = fit_vasicek(model_curve(truth, fixtures::treasury_tenors()), truth.r);
        EXPECT_LT(fit.residual, 1e-14);
        for (double s : fixtures::treasury_tenors())
            EXPECT_NEAR(model_yield(fit.params, s), model_yield(truth, s), 1e-8);
    }
}

TEST(FitVasicek, FlatCurve) {
    TreasuryCurve c;
    for (double s : fixtures::treasury_tenors()) c.points.push_back({s, 0.05});
    const auto fit = fit_vasicek(c, 0.05);
    EXPECT_GT(fit.params.beta, 0.0);
    EXPECT_LT(fit.residual, 1e-10);
    for (double s : fixtures::treasury_tenors()) EXPECT_NEAR(model_yield(fit.params, s), 0.05, 1e-5);
}

TEST(FitVasicek, ThreePointCurve) {
    TreasuryCurve c;
    c.points = {{0.25, 0.05}, {2, 0.048}, {10, 0.047}};
    const auto fit = fit_vasicek(c, c.short_rate_proxy());
    EXPECT_TRUE(std::isfinite(fit.residual));
    EXPECT_GT(fit.params.beta, 0.0);
    EXPECT_GE(fit.params.eta, 0.0);
}

TEST(FitVasicek, TooFewPoints) {
    TreasuryCurve c;
    c.points = {{0.25, 0.05}, {2, 0.048}};
    EXPECT_THROW(fit_vasicek(c, 0.05), ValidationError);
}

TEST(EstimateSigma2, GeometricBrownianMotion) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    const double sigma = 0.3827, dt = 1.0 / 252;
    std::vector<double> v{10.0};
    for (int i = 0; i < 2520; ++i) v.push_back(v.back() * std::exp(-sigma * sigma / 2 * dt + sigma * std::sqrt(dt) * n01(rng)));
    EXPECT_NEAR(estimate_sigma2(history(v)), sigma, 0.02);
}

TEST(EstimateSigma2, AlternatingReturns) {
    std::vector<double> v{100.0};
    for (int i = 0; i < 200; ++i) v.push_back(v.back() * (i % 2 ? 0.99 : 1.01));
    const auto r = detail::log_returns(v);
    EXPECT_NEAR(estimate_sigma2(history(v)), detail::sample_stdev(r) * std::sqrt(252.0), 1e-15);
    EXPECT_NEAR(estimate_sigma2(history(v)), 0.01 * std::sqrt(252.0), 2e-3);
}

TEST(EstimateSigma2, TooShort) {
    EXPECT_THROW(estimate_sigma2(history(std::vector<double>(29, 1.0))), ValidationError);
}

TEST(EstimateRho1, PerfectIndependentAnti) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    std::vector<double> s{10.0}, r_same{0.05}, r_anti{0.05}, r_ind{0.05};
    for (int i = 0; i < 2000; ++i) {
        const double z = n01(rng);
        s.push_back(s.back() * std::exp(0.01 * z));
        const double ds = std::log(s.back() / s[s.size() - 2]);
        r_same.push_back(r_same.back() + 0.1 * ds);
        r_anti.push_back(r_anti.back() - 0.1 * ds);
        r_ind.push_back(r_ind.back() + 1e-4 * n01(rng));
    }
    EXPECT_NEAR(estimate_rho1(history(s), history(r_same)), 0.999, 1e-12);
    EXPECT_NEAR(estimate_rho1(history(s), history(r_anti)), -0.999, 1e-12);
    EXPECT_NEAR(estimate_rho1(history(s), history(r_ind)), 0.0, 0.08);
}

TEST(EstimateRho1, UsesCommonDatesOnly) {
    std::vector<double> s, r;
    for (int i = 0; i < 80; ++i) {
        s.push_back(10.0 + 0.1 * std::sin(0.7 * i));
        r.push_back(0.05 + 0.001 * std::sin(0.7 * i));
    }
    // Rate series shifted by 20 days: 60 common dates, perfectly co-moving on them.
    std::vector<double> r_tail(r.begin() + 20, r.end());
    EXPECT_NEAR(estimate_rho1(history(s), history(r_tail, 20)), 0.999, 1e-12);
}

TEST(EstimateRho1, ZeroVarianceRejected) {
    std::vector<double> s(40), r(40, 0.05);
    for (int i = 0; i < 40; ++i) s[static_cast<std::size_t>(i)] = 10.0 + 0.1 * (i % 3);
    EXPECT_THROW(estimate_rho1(history(s), history(r)), NumericalError);
}
