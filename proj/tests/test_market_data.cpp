#include <gtest/gtest.h>

#include <sstream>

#include "hybrid/market_data.hpp"

using namespace hybrid;

TEST(TreasuryCsv, ParsesThreePoints) {
    std::istringstream in("maturity_years,yield\n0.0833,0.05\n1,0.051\n5,0.052\n");
    const auto curve = parse_treasury_csv(in);
    ASSERT_EQ(curve.points.size(), 3u);
    EXPECT_DOUBLE_EQ(curve.points[0].maturity, 0.0833);
    EXPECT_DOUBLE_EQ(curve.points[2].yield, 0.052);
}

TEST(TreasuryCsv, DuplicateMaturityRejected) {
    std::istringstream in("maturity_years,yield\n0.5,0.05\n1,0.051\n1,0.052\n");
    EXPECT_THROW(parse_treasury_csv(in), ValidationError);
}

TEST(TreasuryCsv, TenPointCurve) {
    std::ostringstream csv;
    csv << "maturity_years,yield\n";
    const double tenors[] = {1.0 / 12, 0.25, 0.5, 1, 2, 3, 5, 7, 10, 20};
    for (double t : tenors) csv << t << "," << 0.05 + 0.001 * t << "\n";
    std::istringstream in(csv.str());
    EXPECT_EQ(parse_treasury_csv(in).points.size(), 10u);
}

TEST(TreasuryCsv, MalformedRowReportsLine) {
    std::istringstream in("maturity_years,yield\n0.5,0.05\n1,abc\n2,0.05\n");
    try {
        parse_treasury_csv(in, "t.csv");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 3u);
        EXPECT_NE(std::string(e.what()).find("t.csv:3"), std::string::npos);
    }
}

TEST(TreasuryCsv, WrongHeaderRejected) {
    std::istringstream in("tenor,yield\n0.5,0.05\n1,0.05\n2,0.05\n");
    EXPECT_THROW(parse_treasury_csv(in), ParseError);
}

TEST(TreasuryCsv, TooFewPoints) {
    std::istringstream in("maturity_years,yield\n0.5,0.05\n1,0.05\n");
    EXPECT_THROW(parse_treasury_csv(in), ValidationError);
}

TEST(BondsCsv, PriceRange) {
    std::istringstream ok("maturity_years,price\n1,0.97\n2,1.5\n");
    EXPECT_EQ(parse_bonds_csv(ok).size(), 2u);
    std::istringstream bad("maturity_years,price\n1,1.6\n");
    EXPECT_THROW(parse_bonds_csv(bad), ValidationError);
    std::istringstream zero("maturity_years,price\n1,0\n");
    EXPECT_THROW(parse_bonds_csv(zero), ValidationError);
}

TEST(OptionsCsv, KindsAndFields) {
    std::istringstream in("maturity_years,strike,kind,price,volume\n0.5,10,call,1.2,15\n0.5,10,put,0.8,0\n");
    const auto q = parse_options_csv(in);
    ASSERT_EQ(q.size(), 2u);
    EXPECT_EQ(q[0].kind, OptionKind::call);
    EXPECT_EQ(q[1].kind, OptionKind::put);
    EXPECT_DOUBLE_EQ(q[1].volume, 0.0);
    std::istringstream bad("maturity_years,strike,kind,price,volume\n0.5,10,straddle,1.2,15\n");
    EXPECT_THROW(parse_options_csv(bad), ParseError);
}

TEST(OptionsCsv, CallAboveSpotRejected) {
    std::vector<OptionQuote> q{{0.5, 10, OptionKind::call, 12, 1}};
    EXPECT_THROW(validate_against_spot(q, 11), ValidationError);
    EXPECT_NO_THROW(validate_against_spot(q, 13));
}

TEST(FilterOptions, ZeroVolumeExcluded) {
    std::vector<OptionQuote> q{{0.5, 10, OptionKind::call, 1, 0}, {0.5, 11, OptionKind::call, 1, 3}};
    const auto f = filter_options(q, kMinOptionMaturity);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_DOUBLE_EQ(f[0].strike, 11);
}

TEST(FilterOptions, ShortMaturityExcluded) {
    std::vector<OptionQuote> q{{8.0 / 365, 10, OptionKind::call, 1, 5}, {9.0 / 365, 10, OptionKind::call, 1, 5}};
    const auto f = filter_options(q, 9.0 / 365);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_DOUBLE_EQ(f[0].maturity, 9.0 / 365);
}

TEST(FilterOptions, EmptyAndIdempotent) {
    EXPECT_TRUE(filter_options({}, 0.1).empty());
    std::vector<OptionQuote> q;
    for (int i = 0; i < 20; ++i)
        q.push_back({0.01 * i, 10.0 + i, i % 2 ? OptionKind::put : OptionKind::call, 1.0, double(i % 3)});
    const auto once = filter_options(q, 0.05);
    const auto twice = filter_options(once, 0.05);
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_DOUBLE_EQ(once[i].strike, twice[i].strike);
    // Subset, order preserved.
    std::size_t j = 0;
    for (const auto& o : once) {
        while (j < q.size() && q[j].strike != o.strike) ++j;
        ASSERT_LT(j, q.size());
    }
}

TEST(HistoryCsv, DatesStrictlyIncreasing) {
    std::istringstream ok("date,value\n2007-01-02,10\n2007-01-03,10.5\n");
    EXPECT_EQ(parse_history_csv(ok).size(), 2u);
    std::istringstream bad("date,value\n2007-01-03,10\n2007-01-02,10.5\n");
    EXPECT_THROW(parse_history_csv(bad), ValidationError);
    std::istringstream baddate("date,value\n2007-13-03,10\n");
    EXPECT_THROW(parse_history_csv(baddate), ParseError);
    std::istringstream negative("date,value\n2007-01-03,-1\n");
    EXPECT_THROW(parse_history_csv(negative), ValidationError);
}

TEST(Dates, Act365) {
    const Date a = *parse_iso_date("2007-01-01");
    const Date b = *parse_iso_date("2008-01-01");
    EXPECT_DOUBLE_EQ(year_fraction_act365(a, b), 1.0);
    EXPECT_EQ(format_iso_date(a), "2007-01-01");
    EXPECT_FALSE(parse_iso_date("2007-02-30"));
}

TEST(RoundTrip, AllQuoteSets) {
    TreasuryCurve curve;
    curve.points = {{1.0 / 12, 0.0516123456789}, {0.5, 0.05011}, {2, 0.0489}, {10, 0.0477}};
    std::ostringstream t;
    write_treasury_csv(t, curve);
    std::istringstream t_in(t.str());
    const auto curve2 = parse_treasury_csv(t_in);
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        EXPECT_EQ(curve.points[i].maturity, curve2.points[i].maturity);
        EXPECT_EQ(curve.points[i].yield, curve2.points[i].yield);
    }

    std::vector<BondQuote> bonds{{0.60278, 0.9712345678901}, {9.5194, 0.71}};
    std::ostringstream b;
    write_bonds_csv(b, bonds);
    std::istringstream b_in(b.str());
    const auto bonds2 = parse_bonds_csv(b_in);
    for (std::size_t i = 0; i < bonds.size(); ++i) EXPECT_EQ(bonds[i].price, bonds2[i].price);

    std::vector<OptionQuote> opts{{17.0 / 365, 7.5, OptionKind::call, 0.6123456789, 12},
                                  {643.0 / 365, 10, OptionKind::put, 2.1, 0}};
    std::ostringstream o;
    write_options_csv(o, opts);
    std::istringstream o_in(o.str());
    const auto opts2 = parse_options_csv(o_in);
    for (std::size_t i = 0; i < opts.size(); ++i) {
        EXPECT_EQ(opts[i].maturity, opts2[i].maturity);
        EXPECT_EQ(opts[i].price, opts2[i].price);
        EXPECT_EQ(opts[i].kind, opts2[i].kind);
    }

    PriceHistory h;
    h.observations = {{*parse_iso_date("2007-04-02"), 8.04}, {*parse_iso_date("2007-04-03"), 8.1234567}};
    std::ostringstream hs;
    write_history_csv(hs, h);
    std::istringstream h_in(hs.str());
    const auto h2 = parse_history_csv(h_in);
    EXPECT_EQ(h2.observations[1].value, 8.1234567);
    EXPECT_EQ(h2.observations[1].date, h.observations[1].date);

    std::vector<CdsQuote> cds{{*parse_iso_date("2007-06-08"), 5, 345.25}};
    std::ostringstream c;
    write_cds_csv(c, cds);
    std::istringstream c_in(c.str());
    const auto cds2 = parse_cds_csv(c_in);
    EXPECT_EQ(cds2[0].spread_bps, 345.25);
    EXPECT_EQ(cds2[0].maturity, 5);
}
