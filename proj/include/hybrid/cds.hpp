#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hybrid/corrections.hpp"
#include "hybrid/errors.hpp"
#include "hybrid/market_data.hpp"
#include "hybrid/rates.hpp"

namespace hybrid {

/// Calibrated state needed for credit products.
struct CreditModel {
    VasicekParams vasicek;
    CreditParams credit;
    CorrectionParams V{};
};

struct CdsSchedule {
    std::vector<double> payment_times;

    /// Payments at delta, 2 delta, ... and a final (possibly short) one at maturity.
    static CdsSchedule regular(double maturity, double delta = 1.0) {
        if (!(maturity > 0)) throw ValidationError("CDS maturity must be positive");
        if (!(delta > 0)) throw ValidationError("CDS payment interval must be positive");
        CdsSchedule s;
        for (int k = 1;; ++k) {
            const double t = delta * k;
            if (t >= maturity * (1 - 1e-12)) break;
            s.payment_times.push_back(t);
        }
        s.payment_times.push_back(maturity);
        return s;
    }

    void validate() const {
        if (payment_times.empty()) throw ValidationError("CDS schedule needs at least one payment");
        if (!(payment_times.front() > 0)) throw ValidationError("first CDS payment must be after today");
        for (std::size_t i = 1; i < payment_times.size(); ++i)
            if (!(payment_times[i] > payment_times[i - 1]))
                throw ValidationError("CDS payment times must be strictly increasing");
    }

    double maturity() const { return payment_times.back(); }
};

/// Corrected defaultable bond at maturity s and loss rate l.
inline double corrected_bond(const CreditModel& m, double l, double s) {
    PricingInputs in{m.vasicek, EquityParams{1.0, 1.0, 0.0}, CreditParams{l, m.credit.lambda}, s, 0.0};
    return price_full(in, m.V, Instrument::bond);
}

/// Par spread: (B(T) - B~(T; l)) / sum_m accrual_m B~(T_m; 1).
inline double cds_spread(const CreditModel& m, const CdsSchedule& schedule) {
    m.vasicek.validate();
    m.credit.validate();
    m.V.validate();
    schedule.validate();
    const double T = schedule.maturity();
    const double protection = riskless_bond(m.vasicek, T) - corrected_bond(m, m.credit.l, T);
    double annuity = 0.0;
    double prev = 0.0;
    for (double t : schedule.payment_times) {
        annuity += (t - prev) * corrected_bond(m, 1.0, t);
        prev = t;
    }
    if (!(annuity > 0) || !std::isfinite(annuity))
        throw NumericalError("CDS premium annuity is not positive; the corrected survival bonds are degenerate");
    return protection / annuity;
}

inline std::vector<std::pair<double, double>> cds_term_structure(const CreditModel& m,
                                                                 const std::vector<double>& maturities,
                                                                 double delta = 1.0) {
    std::vector<std::pair<double, double>> out;
    out.reserve(maturities.size());
    for (double T : maturities) out.emplace_back(T, cds_spread(m, CdsSchedule::regular(T, delta)));
    return out;
}

struct DatedModel {
    Date date;
    std::optional<CreditModel> model;  // empty when that day's calibration failed
};

struct SeriesPoint {
    Date date;
    std::optional<double> spread;  // empty marks a gap
};

inline std::vector<SeriesPoint> cds_series(const std::vector<DatedModel>& days, double maturity, double delta = 1.0) {
    if (days.empty()) throw ValidationError("CDS series needs at least one day");
    const auto schedule = CdsSchedule::regular(maturity, delta);
    std::vector<SeriesPoint> out;
    out.reserve(days.size());
    for (const auto& d : days) {
        SeriesPoint p{d.date, std::nullopt};
        if (d.model) p.spread = cds_spread(*d.model, schedule);
        out.push_back(p);
    }
    return out;
}

}  // namespace hybrid
