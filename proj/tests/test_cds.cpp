#include <gtest/gtest.h>

#include "hybrid/cds.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace hybrid;

TEST(CdsSchedule, Regular) {
    const auto s = CdsSchedule::regular(3.5, 1.0);
    ASSERT_EQ(s.payment_times.size(), 4u);
    EXPECT_DOUBLE_EQ(s.payment_times[2], 3.0);
    EXPECT_DOUBLE_EQ(s.maturity(), 3.5);
    EXPECT_EQ(CdsSchedule::regular(5.0, 1.0).payment_times.size(), 5u);
    EXPECT_EQ(CdsSchedule::regular(0.01).payment_times.size(), 1u);
    EXPECT_THROW(CdsSchedule::regular(0.0), ValidationError);
    CdsSchedule bad{{1.0, 1.0}};
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(CdsSpread, ZeroLossIsZero) {
    auto m = fixtures::cds_case_a();
    m.credit.l = 0;
    for (double T : {0.5, 1.0, 5.0, 10.0}) EXPECT_EQ(cds_spread(m, CdsSchedule::regular(T)), 0.0);
}

TEST(CdsSpread, CreditTriangle) {
    for (auto m : {fixtures::cds_case_a(), fixtures::cds_case_b(), fixtures::cds_case_c()}) {
        m.V = {};
        const double target = m.credit.l * m.credit.lambda;
        EXPECT_NEAR(cds_spread(m, CdsSchedule::regular(0.01)), target, 0.01 * target);
    }
}

TEST(CdsSpread, MatchesDeterministicRateQuadrature) {
    for (auto m : {fixtures::cds_case_a(), fixtures::cds_case_b(), fixtures::cds_case_c()}) {
        m.V = {};
        m.vasicek.eta = 0;
        for (double T : {1.0, 2.5, 5.0, 10.0}) {
            const auto schedule = CdsSchedule::regular(T);
            const double oracle_value = static_cast<double>(
                oracle::cds_spread_deterministic(m.vasicek, m.credit.l, m.credit.lambda, schedule.payment_times));
            EXPECT_NEAR(cds_spread(m, schedule), oracle_value, 1e-6);
        }
    }
}

TEST(CdsSpread, CaptionCasesArePositive) {
    std::vector<double> maturities;
    for (int T = 1; T <= 10; ++T) maturities.push_back(T);
    for (const auto& m : {fixtures::cds_case_a(), fixtures::cds_case_b(), fixtures::cds_case_c()}) {
        const auto ts = cds_term_structure(m, maturities);
        ASSERT_EQ(ts.size(), 10u);
        for (const auto& [T, s] : ts) {
            EXPECT_TRUE(std::isfinite(s)) << "T=" << T;
            EXPECT_GT(s, 0.0) << "T=" << T;
            EXPECT_LT(s, 0.2) << "T=" << T;
        }
    }
}

TEST(CdsSpread, ScalesWithLossAtZeroCorrections) {
    auto m = fixtures::cds_case_b();
    m.V = {};
    const double full = cds_spread(m, CdsSchedule::regular(5));
    m.credit.l = 0.5;
    const double half = cds_spread(m, CdsSchedule::regular(5));
    EXPECT_LT(half, full);
    EXPECT_GT(half, 0.0);
}

TEST(CdsSpread, InvalidModel) {
    auto m = fixtures::cds_case_a();
    m.credit.l = 1.5;
    EXPECT_THROW(cds_spread(m, CdsSchedule::regular(5)), ValidationError);
}

TEST(CdsSeries, GapsStayGaps) {
    const auto d = [](const char* s) { return *parse_iso_date(s); };
    std::vector<DatedModel> days{{d("2007-06-06"), fixtures::cds_case_a()},
                                 {d("2007-06-07"), std::nullopt},
                                 {d("2007-06-08"), fixtures::cds_case_b()}};
    const auto series = cds_series(days, 5.0);
    ASSERT_EQ(series.size(), 3u);
    EXPECT_TRUE(series[0].spread.has_value());
    EXPECT_FALSE(series[1].spread.has_value());
    EXPECT_EQ(series[1].date, d("2007-06-07"));
    EXPECT_DOUBLE_EQ(*series[2].spread, cds_spread(fixtures::cds_case_b(), CdsSchedule::regular(5.0)));
    EXPECT_THROW(cds_series({}, 5.0), ValidationError);
}
