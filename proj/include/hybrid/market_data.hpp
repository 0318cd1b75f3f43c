#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hybrid/errors.hpp"

namespace hybrid {

using Date = std::chrono::year_month_day;

inline constexpr double kDaysPerYear = 365.0;

// Options expiring in fewer than nine calendar days are dropped before calibration.
inline constexpr double kMinOptionMaturity = 9.0 / kDaysPerYear;

inline double days_to_years(double days) { return days / kDaysPerYear; }

inline double year_fraction_act365(const Date& from, const Date& to) {
    const auto days = (std::chrono::sys_days{to} - std::chrono::sys_days{from}).count();
    return static_cast<double>(days) / kDaysPerYear;
}

inline std::optional<Date> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
        if (ec != std::errc{} || ptr != text.data() + pos + len) return std::nullopt;
        return value;
    };
    const auto y = field(0, 4);
    const auto m = field(5, 2);
    const auto d = field(8, 2);
    if (!y || !m || !d) return std::nullopt;
    Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
              std::chrono::day{static_cast<unsigned>(*d)}};
    if (!date.ok()) return std::nullopt;
    return date;
}

inline std::string format_iso_date(const Date& date) {
    std::ostringstream out;
    out << std::setfill('0') << std::setw(4) << static_cast<int>(date.year()) << '-' << std::setw(2)
        << static_cast<unsigned>(date.month()) << '-' << std::setw(2)
        << static_cast<unsigned>(date.day());
    return out.str();
}

struct CurvePoint {
    double maturity;  // years
    double yield;     // continuously compounded, decimal
};

struct TreasuryCurve {
    std::optional<Date> asof;
    std::vector<CurvePoint> points;

    void validate() const {
        if (points.size() < 3) throw ValidationError("treasury curve needs at least 3 points");
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            if (!std::isfinite(p.maturity) || p.maturity <= 0.0)
                throw ValidationError("treasury maturity must be positive and finite");
            if (!std::isfinite(p.yield)) throw ValidationError("treasury yield must be finite");
            if (i > 0 && !(p.maturity > points[i - 1].maturity))
                throw ValidationError("treasury maturities must be strictly increasing (at " +
                                      std::to_string(p.maturity) + ")");
        }
    }

    // Shortest-maturity yield, used as the short-rate proxy.
    double short_rate_proxy() const { return points.front().yield; }
};

struct BondQuote {
    double maturity;  // years
    double price;     // per unit par

    void validate() const {
        if (!std::isfinite(maturity) || maturity <= 0.0)
            throw ValidationError("bond maturity must be positive");
        if (!std::isfinite(price) || price <= 0.0 || price > 1.5)
            throw ValidationError("bond price must lie in (0, 1.5] per unit par");
    }
};

enum class OptionKind { call, put };

inline std::string_view to_string(OptionKind kind) { return kind == OptionKind::call ? "call" : "put"; }

inline std::optional<OptionKind> parse_option_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "call" || lower == "c") return OptionKind::call;
    if (lower == "put" || lower == "p") return OptionKind::put;
    return std::nullopt;
}

struct OptionQuote {
    double maturity;  // years
    double strike;
    OptionKind kind;
    double price;
    double volume;

    void validate() const {
        if (!std::isfinite(maturity) || maturity <= 0.0)
            throw ValidationError("option maturity must be positive");
        if (!std::isfinite(strike) || strike <= 0.0) throw ValidationError("option strike must be positive");
        if (!std::isfinite(price) || price < 0.0) throw ValidationError("option price must be non-negative");
        if (!std::isfinite(volume) || volume < 0.0) throw ValidationError("option volume must be non-negative");
    }
};

struct Observation {
    Date date;
    double value;
};

struct PriceHistory {
    std::vector<Observation> observations;

    void validate() const {
        for (std::size_t i = 0; i < observations.size(); ++i) {
            const auto& o = observations[i];
            if (!std::isfinite(o.value) || o.value <= 0.0)
                throw ValidationError("history values must be positive, got " + std::to_string(o.value) +
                                      " on " + format_iso_date(o.date));
            if (i > 0 && !(observations[i - 1].date < o.date))
                throw ValidationError("history dates must be strictly increasing at " + format_iso_date(o.date));
        }
    }

    std::size_t size() const { return observations.size(); }
};

struct CdsQuote {
    Date date;
    double maturity;  // years
    double spread_bps;
};

/// Keeps quotes with volume strictly above `min_volume` and maturity of at least
/// `min_maturity` years; input order is preserved.
inline std::vector<OptionQuote> filter_options(const std::vector<OptionQuote>& quotes, double min_maturity,
                                               double min_volume = 0.0) {
    if (!(min_maturity >= 0.0)) throw ValidationError("min_maturity must be non-negative");
    std::vector<OptionQuote> kept;
    std::copy_if(quotes.begin(), quotes.end(), std::back_inserter(kept), [&](const OptionQuote& q) {
        return q.volume > min_volume && q.maturity >= min_maturity;
    });
    return kept;
}

inline void validate_against_spot(const std::vector<OptionQuote>& quotes, double spot) {
    for (const auto& q : quotes) {
        if (q.kind == OptionKind::call && q.price > spot)
            throw ValidationError("call price " + std::to_string(q.price) + " exceeds spot " +
                                  std::to_string(spot) + " (strike " + std::to_string(q.strike) + ")");
    }
}

namespace csv {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

struct Row {
    std::size_t line;
    std::vector<std::string> fields;
};

// Reads a headed CSV; blank lines are skipped, the header must match exactly.
inline std::vector<Row> read(std::istream& in, const std::string& source, std::string_view header) {
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    const auto expected = split(header);
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        const auto view = trim(line);
        if (view.empty()) continue;
        const auto fields = split(view);
        if (!seen_header) {
            if (fields != expected)
                throw ParseError(source, line_no, "expected header '" + std::string(header) + "'");
            seen_header = true;
            continue;
        }
        if (fields.size() != expected.size())
            throw ParseError(source, line_no,
                             "expected " + std::to_string(expected.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        Row row{line_no, {}};
        for (auto f : fields) row.fields.emplace_back(f);
        rows.push_back(std::move(row));
    }
    if (!seen_header) throw ParseError(source, line_no, "missing header '" + std::string(header) + "'");
    return rows;
}

inline double number(const Row& row, std::size_t index, const std::string& source) {
    const auto& text = row.fields[index];
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value))
        throw ParseError(source, row.line, "not a finite number: '" + text + "'");
    return value;
}

inline Date date(const Row& row, std::size_t index, const std::string& source) {
    const auto parsed = parse_iso_date(row.fields[index]);
    if (!parsed) throw ParseError(source, row.line, "not an ISO-8601 date: '" + row.fields[index] + "'");
    return *parsed;
}

inline std::ifstream open(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    return in;
}

inline std::ostream& precise(std::ostream& out) { return out << std::setprecision(17); }

}  // namespace csv

inline TreasuryCurve parse_treasury_csv(std::istream& in, const std::string& source = "treasury.csv") {
    TreasuryCurve curve;
    for (const auto& row : csv::read(in, source, "maturity_years,yield")) {
        curve.points.push_back({csv::number(row, 0, source), csv::number(row, 1, source)});
    }
    curve.validate();
    return curve;
}

inline std::vector<BondQuote> parse_bonds_csv(std::istream& in, const std::string& source = "bonds.csv") {
    std::vector<BondQuote> bonds;
    for (const auto& row : csv::read(in, source, "maturity_years,price")) {
        BondQuote q{csv::number(row, 0, source), csv::number(row, 1, source)};
        try {
            q.validate();
        } catch (const ValidationError& e) {
            throw ParseError(source, row.line, e.what());
        }
        bonds.push_back(q);
    }
    return bonds;
}

inline std::vector<OptionQuote> parse_options_csv(std::istream& in, const std::string& source = "options.csv") {
    std::vector<OptionQuote> options;
    for (const auto& row : csv::read(in, source, "maturity_years,strike,kind,price,volume")) {
        const auto kind = parse_option_kind(row.fields[2]);
        if (!kind) throw ParseError(source, row.line, "option kind must be call or put: '" + row.fields[2] + "'");
        OptionQuote q{csv::number(row, 0, source), csv::number(row, 1, source), *kind,
                      csv::number(row, 3, source), csv::number(row, 4, source)};
        try {
            q.validate();
        } catch (const ValidationError& e) {
            throw ParseError(source, row.line, e.what());
        }
        options.push_back(q);
    }
    return options;
}

inline PriceHistory parse_history_csv(std::istream& in, const std::string& source = "history.csv") {
    PriceHistory history;
    for (const auto& row : csv::read(in, source, "date,value")) {
        history.observations.push_back({csv::date(row, 0, source), csv::number(row, 1, source)});
    }
    history.validate();
    return history;
}

inline std::vector<CdsQuote> parse_cds_csv(std::istream& in, const std::string& source = "cds.csv") {
    std::vector<CdsQuote> quotes;
    for (const auto& row : csv::read(in, source, "date,maturity_years,spread_bps")) {
        CdsQuote q{csv::date(row, 0, source), csv::number(row, 1, source), csv::number(row, 2, source)};
        if (q.maturity <= 0.0) throw ParseError(source, row.line, "CDS maturity must be positive");
        quotes.push_back(q);
    }
    return quotes;
}

inline TreasuryCurve load_treasury_csv(const std::string& path) {
    auto in = csv::open(path);
    return parse_treasury_csv(in, path);
}

inline std::vector<BondQuote> load_bonds_csv(const std::string& path) {
    auto in = csv::open(path);
    return parse_bonds_csv(in, path);
}

inline std::vector<OptionQuote> load_options_csv(const std::string& path) {
    auto in = csv::open(path);
    return parse_options_csv(in, path);
}

inline PriceHistory load_history_csv(const std::string& path) {
    auto in = csv::open(path);
    return parse_history_csv(in, path);
}

inline std::vector<CdsQuote> load_cds_csv(const std::string& path) {
    auto in = csv::open(path);
    return parse_cds_csv(in, path);
}

inline void write_treasury_csv(std::ostream& out, const TreasuryCurve& curve) {
    csv::precise(out) << "maturity_years,yield\n";
    for (const auto& p : curve.points) out << p.maturity << ',' << p.yield << '\n';
}

inline void write_bonds_csv(std::ostream& out, const std::vector<BondQuote>& bonds) {
    csv::precise(out) << "maturity_years,price\n";
    for (const auto& b : bonds) out << b.maturity << ',' << b.price << '\n';
}

inline void write_options_csv(std::ostream& out, const std::vector<OptionQuote>& options) {
    csv::precise(out) << "maturity_years,strike,kind,price,volume\n";
    for (const auto& o : options)
        out << o.maturity << ',' << o.strike << ',' << to_string(o.kind) << ',' << o.price << ',' << o.volume
            << '\n';
}

inline void write_history_csv(std::ostream& out, const PriceHistory& history) {
    csv::precise(out) << "date,value\n";
    for (const auto& o : history.observations) out << format_iso_date(o.date) << ',' << o.value << '\n';
}

inline void write_cds_csv(std::ostream& out, const std::vector<CdsQuote>& quotes) {
    csv::precise(out) << "date,maturity_years,spread_bps\n";
    for (const auto& q : quotes) out << format_iso_date(q.date) << ',' << q.maturity << ',' << q.spread_bps << '\n';
}

}  // namespace hybrid
