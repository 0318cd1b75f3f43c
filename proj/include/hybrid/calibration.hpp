#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hybrid/corrections.hpp"
#include "hybrid/errors.hpp"
#include "hybrid/implied_vol.hpp"
#include "hybrid/market_data.hpp"
#include "hybrid/pricing_core.hpp"
#include "hybrid/rates.hpp"

namespace hybrid {

struct BondGrid {
    double M1 = 1.0;
    std::size_t n = 201;

    double spacing() const { return M1 / static_cast<double>(n - 1); }
    double at(std::size_t i) const { return M1 * static_cast<double>(i) / static_cast<double>(n - 1); }
};

struct BondFit {
    double l_lambda = 0;
    double l_V3 = 0;
    double l_V2d = 0;
    double residual = 0;  // sum of squared price errors
    double grid_spacing = 0;
};

struct GridTracePoint {
    double grid_value;
    double residual;
};

struct OptionFit {
    double l = 0;
    double lambda = 0;
    CorrectionParams V{};
    double weighted_residual = 0;
    double condition_number = 0;
    double grid_spacing = 0;
    Variant variant = Variant::seven_param;
    std::vector<GridTracePoint> trace{};
};

struct OptionFitConfig {
    double l_min = 0.05;
    std::size_t n_l_grid = 96;
    Variant variant = Variant::seven_param;
    // Curve used to quote market implied vols; the Vasicek zero yield when absent.
    std::optional<TreasuryCurve> quote_curve{};
    double vega_floor = 1e-4;  // fraction of spot

    double l_at(std::size_t i) const {
        if (n_l_grid == 1) return 1.0;
        return l_min + (1.0 - l_min) * static_cast<double>(i) / static_cast<double>(n_l_grid - 1);
    }
    double spacing() const { return n_l_grid > 1 ? (1.0 - l_min) / static_cast<double>(n_l_grid - 1) : 0.0; }
};

namespace detail {

struct LsqSolution {
    Eigen::VectorXd coef;
    double sse;
    Eigen::Index rank;
};

// Column-equilibrated, column-pivoted Householder least squares.
inline LsqSolution solve_lsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
    Eigen::VectorXd scale(A.cols());
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        const double n = A.col(j).norm();
        scale(j) = n > 0 ? 1.0 / n : 1.0;
    }
    const Eigen::MatrixXd As = A * scale.asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(As);
    qr.setThreshold(1e-10);
    Eigen::VectorXd c = qr.solve(y);
    c = scale.asDiagonal() * c;
    return {c, (y - A * c).squaredNorm(), qr.rank()};
}

inline double condition_number(const Eigen::MatrixXd& A) {
    Eigen::MatrixXd As = A;
    for (Eigen::Index j = 0; j < As.cols(); ++j) {
        const double n = As.col(j).norm();
        if (n > 0) As.col(j) /= n;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(As);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(s.size() - 1) == 0) return std::numeric_limits<double>::infinity();
    return s(0) / s(s.size() - 1);
}

}  // namespace detail

/// Bond model columns at maturity s for a given l*lambda: price, dB/dalpha, and the
/// slow-scale bracket.
struct BondColumns {
    double p0;
    double c_V3;
    double c_V2d;
};

inline BondColumns bond_columns(const VasicekParams& vp, double l_lambda, double s) {
    const double p0 = std::exp(-l_lambda * s) * riskless_bond(vp, s);
    const double pa = factor_a_dalpha(vp, s) * p0;
    const double pr = -factor_b(vp.beta, s) * p0;
    return {p0, pa, (-pa + s * s / 2 * p0 + s * pr) / vp.beta};
}

/// Step 1: grid over l*lambda, linear least squares in (l V3e, l V2d) at each node.
inline BondFit fit_bonds(const std::vector<BondQuote>& bonds, const VasicekParams& vp, const BondGrid& grid = {}) {
    vp.validate();
    if (bonds.size() < 3)
        throw ValidationError("bond fit needs at least 3 quotes, got " + std::to_string(bonds.size()));
    if (grid.n < 2 || !(grid.M1 > 0)) throw ConfigError("bond grid needs n >= 2 and M1 > 0");
    for (const auto& b : bonds) b.validate();

    const auto n = static_cast<Eigen::Index>(bonds.size());
    std::optional<BondFit> best;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double ll = grid.at(i);
        Eigen::MatrixXd A(n, 2);
        Eigen::VectorXd y(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto c = bond_columns(vp, ll, bonds[k].maturity);
            A(k, 0) = c.c_V3;
            A(k, 1) = c.c_V2d;
            y(k) = bonds[k].price - c.p0;
        }
        const auto sol = detail::solve_lsq(A, y);
        if (sol.rank < 2)
            throw ValidationError("bond design matrix is rank deficient (rank " + std::to_string(sol.rank) +
                                  " of 2): the maturities cannot separate lV3e from lV2d");
        if (!best || sol.sse < best->residual)
            best = BondFit{ll, sol.coef(0), sol.coef(1), sol.sse, grid.spacing()};
    }
    return *best;
}

namespace detail {

// Model-generated quotes may be negative, so only the contract terms are checked here.
inline void check_fit_quote(const OptionQuote& q) {
    if (!(std::isfinite(q.maturity) && q.maturity > 0)) throw ValidationError("option maturity must be positive");
    if (!(std::isfinite(q.strike) && q.strike > 0)) throw ValidationError("option strike must be positive");
    if (!std::isfinite(q.price)) throw ValidationError("option price must be finite");
}

inline PricingInputs option_inputs(const OptionQuote& q, const VasicekParams& vp, const EquityParams& eq,
                                   double l, double lambda) {
    return PricingInputs{vp, eq, CreditParams{l, lambda}, q.maturity, q.strike};
}

inline std::string describe_quote(const OptionQuote& q, std::size_t index) {
    std::ostringstream os;
    os.precision(10);
    os << "quote " << index << " (" << to_string(q.kind) << ", T=" << q.maturity << ", K=" << q.strike << ")";
    return os.str();
}

// 1 / max(market vega, floor); the floor also covers quotes with no implied vol.
inline std::vector<double> vega_weights(const std::vector<OptionQuote>& options, const VasicekParams& vp,
                                        const EquityParams& eq, const OptionFitConfig& cfg) {
    std::vector<double> w;
    w.reserve(options.size());
    for (const auto& q : options) {
        const double xe = eq.x * std::exp(-eq.q * q.maturity);
        const double rate = cfg.quote_curve ? zero_rate(*cfg.quote_curve, q.maturity) : model_yield(vp, q.maturity);
        const double floor = cfg.vega_floor * eq.x;
        double vega = floor;
        try {
            const double iv = implied_vol(q.price, xe, q.strike, q.maturity, rate, q.kind);
            vega = std::max(bs_vega(xe, q.strike, q.maturity, rate, iv), floor);
        } catch (const DomainError&) {
        } catch (const NumericalError&) {
        }
        w.push_back(1.0 / vega);
    }
    return w;
}

// Greek indices (0-based) of the free linear coefficients per variant.
inline std::vector<int> free_columns(Variant v) {
    switch (v) {
        case Variant::seven_param: return {0, 1, 3, 4, 5, 6};
        case Variant::three_param: return {0, 6};
        case Variant::index: return {0, 1, 3, 4, 5};
    }
    return {};
}

inline void assign(CorrectionParams& V, int greek, double value) {
    switch (greek) {
        case 0: V.V1e = value; break;
        case 1: V.V2e = value; break;
        case 3: V.V4e = value; break;
        case 4: V.V5e = value; break;
        case 5: V.V6e = value; break;
        case 6: V.V1d = value; break;
        default: break;
    }
}

struct OptionSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd y;
};

// Weighted design matrix and residual target at a given (l, lambda, V3e, V2d).
inline OptionSystem option_system(const std::vector<OptionQuote>& options, const std::vector<double>& w,
                                  const VasicekParams& vp, const EquityParams& eq, double l, double lambda,
                                  double V3e, double V2d, const std::vector<int>& cols) {
    const auto n = static_cast<Eigen::Index>(options.size());
    OptionSystem sys{Eigen::MatrixXd(n, static_cast<Eigen::Index>(cols.size())), Eigen::VectorXd(n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& q = options[static_cast<std::size_t>(k)];
        const auto in = option_inputs(q, vp, eq, l, lambda);
        const auto kind = to_instrument(q.kind);
        const auto g = correction_basis(in, kind);
        const double p0 = kind == Instrument::call ? call_p0(in) : put_p0(in);
        bool finite = std::isfinite(p0);
        for (double gi : g.g) finite = finite && std::isfinite(gi);
        if (!finite) throw NumericalError("non-finite price or Greek for " + describe_quote(q, static_cast<std::size_t>(k)));
        const double wk = w[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < cols.size(); ++j) sys.A(k, static_cast<Eigen::Index>(j)) = wk * g[cols[j]];
        sys.y(k) = wk * (q.price - p0 + V3e * g[2] - V2d * g[7]);
    }
    return sys;
}

inline OptionFit fit_linear_grid(const std::vector<OptionQuote>& options, const VasicekParams& vp,
                                 const EquityParams& eq, const std::vector<double>& w, const std::vector<int>& cols,
                                 Variant variant, const std::vector<double>& l_grid, const BondFit* bond_fit) {
    std::optional<OptionFit> best;
    std::optional<OptionSystem> best_sys;
    std::vector<GridTracePoint> trace;
    for (double l : l_grid) {
        const double lambda = bond_fit ? bond_fit->l_lambda / l : 0.0;
        const double V3e = bond_fit ? bond_fit->l_V3 / l : 0.0;
        const double V2d = bond_fit ? bond_fit->l_V2d / l : 0.0;
        auto sys = option_system(options, w, vp, eq, l, lambda, V3e, V2d, cols);
        const auto sol = solve_lsq(sys.A, sys.y);
        trace.push_back({l, sol.sse});
        if (!best || sol.sse < best->weighted_residual) {
            OptionFit f;
            f.l = l;
            f.lambda = lambda;
            f.V.V3e = V3e;
            f.V.V2d = V2d;
            for (std::size_t j = 0; j < cols.size(); ++j) assign(f.V, cols[j], sol.coef(static_cast<Eigen::Index>(j)));
            f.weighted_residual = sol.sse;
            f.variant = variant;
            best = f;
            best_sys = std::move(sys);
        }
    }
    best->condition_number = condition_number(best_sys->A);
    best->trace = std::move(trace);
    return *best;
}

}  // namespace detail

/// Step 2: grid over l, vega-weighted linear least squares in the option-side coefficients.
inline OptionFit fit_options(const std::vector<OptionQuote>& options, const BondFit& bond_fit,
                             const VasicekParams& vp, const EquityParams& eq, const OptionFitConfig& cfg = {}) {
    vp.validate();
    eq.validate();
    if (cfg.variant == Variant::index) throw ConfigError("use calibrate_index for the index variant");
    if (!(cfg.l_min > 0 && cfg.l_min <= 1) || cfg.n_l_grid == 0) throw ConfigError("l grid needs 0 < l_min <= 1");
    const auto cols = detail::free_columns(cfg.variant);
    if (options.size() < cols.size() + 1)
        throw ValidationError("option fit needs at least " + std::to_string(cols.size() + 1) + " quotes, got " +
                              std::to_string(options.size()));
    for (const auto& q : options) detail::check_fit_quote(q);
    const auto w = detail::vega_weights(options, vp, eq, cfg);
    std::vector<double> grid;
    for (std::size_t i = 0; i < cfg.n_l_grid; ++i) grid.push_back(cfg.l_at(i));
    auto fit = detail::fit_linear_grid(options, vp, eq, w, cols, cfg.variant, grid, &bond_fit);
    fit.grid_spacing = cfg.spacing();
    return fit;
}

/// Index options: zero intensity, single weighted least squares over the fast-scale set.
inline OptionFit calibrate_index(const std::vector<OptionQuote>& options, const VasicekParams& vp,
                                 const EquityParams& eq, const OptionFitConfig& cfg = {}) {
    vp.validate();
    eq.validate();
    const auto cols = detail::free_columns(Variant::index);
    if (options.size() < cols.size())
        throw ValidationError("index fit needs at least " + std::to_string(cols.size()) + " quotes, got " +
                              std::to_string(options.size()));
    for (const auto& q : options) detail::check_fit_quote(q);
    const auto w = detail::vega_weights(options, vp, eq, cfg);
    auto fit = detail::fit_linear_grid(options, vp, eq, w, cols, Variant::index, {0.0}, nullptr);
    fit.trace.clear();
    return fit;
}

}  // namespace hybrid
