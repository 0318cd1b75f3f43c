#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hybrid/hybrid.hpp"

namespace fs = std::filesystem;
using namespace hybrid;

namespace {

enum Exit { kOk = 0, kValidation = 2, kNumerical = 3 };

void fail_line(int code, const std::string& type, const std::string& message) {
    json j = {{"status", "error"}, {"code", code}, {"type", type}, {"message", message}};
    std::cerr << j.dump() << std::endl;
}

void emit(const json& j) { std::cout << j.dump(2) << std::endl; }

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// "1..10", "0.5..2:0.25" or "1,2,5".
std::vector<double> parse_list(const std::string& text, const std::string& what) {
    auto num = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ValidationError(what + ": '" + s + "' is not a number");
        }
    };
    std::vector<double> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const auto colon = text.find(':', dots);
        const double a = num(text.substr(0, dots));
        const double b = num(text.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
        const double step = colon == std::string::npos ? 1.0 : num(text.substr(colon + 1));
        if (!(step > 0) || b < a) throw ValidationError(what + ": bad range '" + text + "'");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) out.push_back(a + step * static_cast<double>(i));
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(num(item));
    if (out.empty()) throw ValidationError(what + ": empty list");
    return out;
}

double payment_interval(const std::string& freq) {
    static const std::map<std::string, double> table{
        {"annual", 1.0}, {"semiannual", 0.5}, {"quarterly", 0.25}, {"monthly", 1.0 / 12}};
    const auto it = table.find(freq);
    if (it == table.end()) throw ValidationError("unknown payment frequency '" + freq + "'");
    return it->second;
}

json parameter_block(const json& doc) {
    if (!doc.is_object()) throw ValidationError("parameter document must be a JSON object");
    return doc.contains("parameters") ? doc.at("parameters") : doc;
}

// Model parameters: --fit, then --config on top, then individual flags.
struct ModelFlags {
    std::vector<std::string> files;
    std::string config;
    std::map<std::string, std::optional<double>> values;
    std::string variant;

    void attach(CLI::App* app, bool equity) {
        app->add_option("--fit,--params", files, "parameter or report JSON (repeatable, later files win)");
        app->add_option("--config", config, "JSON overriding the --fit parameters");
        app->add_option("--variant", variant, "seven, three or index");
        const char* vasicek[] = {"alpha", "beta", "eta", "r"};
        for (const char* k : vasicek) app->add_option(std::string("--") + k, values[k], std::string("Vasicek ") + k);
        app->add_option("--l", values["l"], "loss rate");
        app->add_option("--lambda", values["lambda"], "effective intensity");
        if (equity) {
            app->add_option("--spot", values["x"], "spot price");
            app->add_option("--sigma2", values["sigma2"], "effective volatility");
            app->add_option("--rho1", values["rho1"], "effective rate correlation");
            app->add_option("--dividend", values["q"], "dividend yield");
        }
    }

    json merged() const {
        json p = json::object();
        for (const auto& f : files) p.merge_patch(parameter_block(read_json_file(f)));
        if (!config.empty()) p.merge_patch(parameter_block(read_json_file(config)));
        auto set = [&](const char* block, const char* key, const char* flag) {
            const auto it = values.find(flag);
            if (it != values.end() && it->second) p[block][key] = *it->second;
        };
        for (const char* k : {"alpha", "beta", "eta", "r"}) set("vasicek", k, k);
        set("credit", "l", "l");
        set("credit", "lambda", "lambda");
        for (const char* k : {"x", "sigma2", "rho1", "q"}) set("equity", k, k);
        if (p.contains("credit") && !p["credit"].contains("l")) p["credit"]["l"] = 1.0;
        if (p.contains("credit") && !p["credit"].contains("lambda")) p["credit"]["lambda"] = 0.0;
        if (!variant.empty()) p["variant"] = variant;
        return p;
    }

    ModelParams resolve() const { return model_from_json(merged()); }
};

// ---- fit-rates
struct FitRates {
    std::string treasury;
    std::optional<double> short_rate;

    int run() const {
        const auto curve = load_treasury_csv(treasury);
        const double r0 = short_rate.value_or(curve.short_rate_proxy());
        try {
            const auto fit = fit_vasicek(curve, r0);
            emit({{"status", "ok"}, {"vasicek", to_json(fit.params)}, {"residual", fit.residual}});
        } catch (const VasicekFitError& e) {
            fail_line(kNumerical, "numerical",
                      std::string(e.what()) + "; best residual " + std::to_string(e.best.residual));
            return kNumerical;
        }
        return kOk;
    }
};

// ---- estimate-equity
struct EstimateEquity {
    std::string stock, spot_rate;
    double dividend = 0;

    int run() const {
        const auto s = load_history_csv(stock);
        const auto r = load_history_csv(spot_rate);
        EquityParams e{s.observations.back().value, estimate_sigma2(s), estimate_rho1(s, r), dividend};
        e.validate();
        emit({{"status", "ok"}, {"equity", to_json(e)}, {"observations", s.size()}});
        return kOk;
    }
};

// ---- calibrate
struct Calibrate {
    std::string bonds, options, treasury, date, out;
    ModelFlags model;
    std::size_t bond_grid_n = 201;
    double bond_grid_max = 1.0;
    std::size_t l_grid_n = 96;
    double l_min = 0.05;
    double min_volume = 0;

    int run() const {
        auto params = model.resolve();
        const auto& eq = params.require_equity();
        Fnv1a digest;
        digest.update(read_bytes(options));
        auto quotes = filter_options(load_options_csv(options), kMinOptionMaturity, min_volume);
        validate_against_spot(quotes, eq.x);

        OptionFitConfig cfg;
        cfg.variant = params.variant;
        cfg.n_l_grid = l_grid_n;
        cfg.l_min = l_min;
        if (!treasury.empty()) {
            digest.update(read_bytes(treasury));
            cfg.quote_curve = load_treasury_csv(treasury);
        }

        CalibrationReport report;
        report.date = date;
        if (params.variant == Variant::index) {
            report.option_fit = calibrate_index(quotes, params.vasicek, eq, cfg);
            params.credit = {0.0, 0.0};
        } else {
            if (bonds.empty()) throw ConfigError("--bonds is required for the seven and three variants");
            digest.update(read_bytes(bonds));
            const auto bf = fit_bonds(load_bonds_csv(bonds), params.vasicek, BondGrid{bond_grid_max, bond_grid_n});
            report.bond_fit = bf;
            report.option_fit = fit_options(quotes, bf, params.vasicek, eq, cfg);
            params.credit = {report.option_fit.l, report.option_fit.lambda};
        }
        params.V = report.option_fit.V;
        report.parameters = params;
        report.inputs_digest = digest.hex();
        const auto j = to_json(report);
        if (out.empty()) {
            emit(j);
        } else {
            std::ofstream f(out);
            if (!f) throw ValidationError("cannot write " + out);
            f << j.dump(2) << '\n';
        }
        return kOk;
    }
};

// ---- price
struct Price {
    ModelFlags model;
    std::string kind = "call";
    std::optional<double> strike;
    double maturity = 0;

    int run() const {
        const auto m = model.resolve();
        const auto inst = parse_instrument(kind);
        PricingInputs in{m.vasicek, EquityParams{1.0, 1.0, 0.0}, m.credit, maturity, 0.0};
        if (inst != Instrument::bond) {
            if (!strike) throw ValidationError("--strike is required for options");
            in.equity = m.require_equity();
            in.strike = *strike;
        }
        in.validate(inst != Instrument::bond);
        const double p0 = price_full(in, CorrectionParams{}, inst, m.variant);
        const double full = price_full(in, m.V, inst, m.variant);
        const auto V = variant_params(in, m.V, m.variant);
        json j = {{"status", "ok"},
                  {"kind", to_string(inst)},
                  {"maturity", maturity},
                  {"p0", p0},
                  {"correction_fast", correction_fast(in, V, inst)},
                  {"correction_slow", correction_slow(in, V, inst)},
                  {"price", full}};
        if (inst != Instrument::bond) {
            j["strike"] = *strike;
            const auto ok = inst == Instrument::call ? OptionKind::call : OptionKind::put;
            try {
                const double xe = in.equity.x * std::exp(-in.equity.q * maturity);
                j["implied_vol"] = implied_vol(full, xe, *strike, maturity, model_yield(m.vasicek, maturity), ok);
            } catch (const DomainError& e) {
                j["implied_vol"] = nullptr;
                j["implied_vol_error"] = e.what();
            }
        }
        emit(j);
        return kOk;
    }
};

// ---- cds-curve
struct CdsCurve {
    ModelFlags model;
    std::string maturities = "1..10";
    std::string freq = "annual";

    int run() const {
        const auto m = model.resolve();
        const auto ts = cds_term_structure(m.credit_model(), parse_list(maturities, "--maturities"), payment_interval(freq));
        std::cout << "maturity_years,spread_bps\n" << std::setprecision(12);
        for (const auto& [T, s] : ts) std::cout << T << ',' << s * 1e4 << '\n';
        return kOk;
    }
};

// ---- cds-series
struct CdsSeries {
    std::string dir;
    double maturity = 5;
    std::string freq = "annual";

    int run() const {
        if (!fs::is_directory(dir)) throw ValidationError(dir + " is not a directory");
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
        std::vector<DatedModel> days;
        for (const auto& f : files) {
            const auto doc = read_json_file(f.string());
            const std::string text = doc.contains("date") && doc.at("date").is_string()
                                         ? doc.at("date").get<std::string>()
                                         : f.stem().string();
            const auto d = parse_iso_date(text);
            if (!d) throw ValidationError(f.string() + ": no ISO date in 'date' or the file name");
            DatedModel day{*d, std::nullopt};
            if (doc.value("status", "ok") == "ok") day.model = model_from_json(doc).credit_model();
            days.push_back(day);
        }
        std::sort(days.begin(), days.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
        const auto series = cds_series(days, maturity, payment_interval(freq));
        std::cout << "date,spread_bps\n" << std::setprecision(12);
        for (const auto& p : series) {
            std::cout << format_iso_date(p.date) << ',';
            if (p.spread) std::cout << *p.spread * 1e4; else std::cout << "NA";
            std::cout << '\n';
        }
        return kOk;
    }
};

// ---- ivol-surface
struct IvolSurface {
    ModelFlags model;
    std::string grid = "0.25,0.5,1,2/0.8..1.2:0.05";

    int run() const {
        const auto m = model.resolve();
        const auto& eq = m.require_equity();
        const auto slash = grid.find('/');
        if (slash == std::string::npos) throw ValidationError("--grid must look like MATURITIES/MONEYNESS");
        const auto taus = parse_list(grid.substr(0, slash), "grid maturities");
        const auto ks = parse_list(grid.substr(slash + 1), "grid moneyness");
        std::cout << "maturity_years,strike,moneyness,kind,price,implied_vol\n" << std::setprecision(12);
        for (double tau : taus)
            for (double k : ks) {
                const double K = k * eq.x;
                const auto kind = k < 1 ? OptionKind::put : OptionKind::call;
                PricingInputs in{m.vasicek, eq, m.credit, tau, K};
                const double p = price_full(in, m.V, to_instrument(kind), m.variant);
                std::cout << tau << ',' << K << ',' << k << ',' << to_string(kind) << ',' << p << ',';
                try {
                    const double xe = eq.x * std::exp(-eq.q * tau);
                    std::cout << implied_vol(p, xe, K, tau, model_yield(m.vasicek, tau), kind);
                } catch (const DomainError&) {
                    std::cout << "NA";
                }
                std::cout << '\n';
            }
        return kOk;
    }
};

// ---- oracle
struct Oracle {
    ModelFlags model;
    std::string kind = "call";
    double strike = 0, maturity = 0.5, cds_delta = 1.0;
    McConfig cfg;
    bool constant = false;

    int run() {
        const auto m = model.resolve();
        PricingInputs in{m.vasicek, m.require_equity(), m.credit, maturity, strike};
        if (constant) cfg.factors = FactorSpec::constant_factors();
        const McTarget target{parse_mc_instrument(kind), maturity, strike, cds_delta};
        const auto est = mc_price(cfg, target, in);
        emit({{"status", "ok"},
              {"kind", kind},
              {"maturity", maturity},
              {"strike", strike},
              {"estimate", est.estimate},
              {"std_error", est.std_error},
              {"n_paths", est.n_paths},
              {"seed", cfg.seed}});
        return kOk;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid equity/credit model: rate fit, calibration, pricing and CDS spreads"};
    app.require_subcommand(1);

    FitRates fit_rates;
    auto* s_fit = app.add_subcommand("fit-rates", "fit Vasicek parameters to a treasury zero curve");
    s_fit->add_option("--treasury", fit_rates.treasury, "treasury CSV")->required();
    s_fit->add_option("--short-rate", fit_rates.short_rate, "short-rate proxy (default: shortest yield)");

    EstimateEquity est;
    auto* s_est = app.add_subcommand("estimate-equity", "historical volatility and rate correlation");
    s_est->add_option("--stock", est.stock, "stock price history CSV")->required();
    s_est->add_option("--spot-rate", est.spot_rate, "short-rate history CSV")->required();
    s_est->add_option("--dividend", est.dividend, "continuous dividend yield");

    Calibrate cal;
    auto* s_cal = app.add_subcommand("calibrate", "two-step calibration to bonds and options");
    s_cal->add_option("--bonds", cal.bonds, "bond CSV (not used by the index variant)");
    s_cal->add_option("--options", cal.options, "option CSV")->required();
    s_cal->add_option("--treasury", cal.treasury, "treasury CSV used to quote implied vols");
    s_cal->add_option("--date", cal.date, "calibration date recorded in the report");
    s_cal->add_option("--out", cal.out, "write the report here instead of stdout");
    s_cal->add_option("--bond-grid-n", cal.bond_grid_n, "nodes of the l*lambda grid");
    s_cal->add_option("--bond-grid-max", cal.bond_grid_max, "upper end of the l*lambda grid");
    s_cal->add_option("--l-grid-n", cal.l_grid_n, "nodes of the loss-rate grid");
    s_cal->add_option("--l-min", cal.l_min, "smallest loss rate on the grid");
    s_cal->add_option("--min-volume", cal.min_volume, "drop quotes with volume at or below this");
    cal.model.attach(s_cal, true);

    Price price;
    auto* s_price = app.add_subcommand("price", "price a call, put or defaultable bond");
    s_price->add_option("--kind", price.kind, "call, put or bond");
    s_price->add_option("--strike", price.strike, "option strike");
    s_price->add_option("--maturity", price.maturity, "time to maturity in years")->required();
    price.model.attach(s_price, true);

    CdsCurve curve;
    auto* s_curve = app.add_subcommand("cds-curve", "model CDS spread term structure (CSV)");
    s_curve->add_option("--maturities", curve.maturities, "e.g. 1..10, 0.5..5:0.5 or 1,3,5");
    s_curve->add_option("--freq", curve.freq, "annual, semiannual, quarterly or monthly");
    curve.model.attach(s_curve, false);

    CdsSeries series;
    auto* s_series = app.add_subcommand("cds-series", "fixed-maturity CDS spread over a directory of reports");
    s_series->add_option("--fits-dir", series.dir, "directory of calibration reports")->required();
    s_series->add_option("--maturity", series.maturity, "CDS maturity in years");
    s_series->add_option("--freq", series.freq, "annual, semiannual, quarterly or monthly");

    IvolSurface surf;
    auto* s_surf = app.add_subcommand("ivol-surface", "model implied-volatility surface (CSV)");
    s_surf->add_option("--grid", surf.grid, "MATURITIES/MONEYNESS, e.g. 0.25,0.5,1,2/0.8..1.2:0.05");
    surf.model.attach(s_surf, true);

    Oracle orc;
    auto* s_orc = app.add_subcommand("oracle", "Monte-Carlo price under the latent-factor model");
    s_orc->add_option("--kind", orc.kind, "call, put, bond, stock, cds_protection or cds_annuity");
    s_orc->add_option("--strike", orc.strike, "option strike");
    s_orc->add_option("--maturity", orc.maturity, "time to maturity in years");
    s_orc->add_option("--cds-delta", orc.cds_delta, "premium interval for cds_annuity");
    s_orc->add_option("--paths", orc.cfg.n_paths, "number of paths (>= 10000)");
    s_orc->add_option("--steps-per-year", orc.cfg.steps_per_year, "time steps per year");
    s_orc->add_option("--seed", orc.cfg.seed, "random seed");
    s_orc->add_option("--threads", orc.cfg.threads, "worker threads (0 = all cores)");
    s_orc->add_option("--epsilon", orc.cfg.factors.epsilon, "fast time scale");
    s_orc->add_option("--delta", orc.cfg.factors.delta, "slow time scale");
    s_orc->add_flag("--constant-factors", orc.constant, "constant volatility and intensity");
    s_orc->add_flag("--control-variate", orc.cfg.control_variate, "use the constant-parameter control");
    orc.model.attach(s_orc, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        fail_line(kValidation, "usage", e.what());
        return kValidation;
    }

    try {
        if (*s_fit) return fit_rates.run();
        if (*s_est) return est.run();
        if (*s_cal) return cal.run();
        if (*s_price) return price.run();
        if (*s_curve) return curve.run();
        if (*s_series) return series.run();
        if (*s_surf) return surf.run();
        if (*s_orc) return orc.run();
    } catch (const ValidationError& e) {
        fail_line(kValidation, "validation", e.what());
        return kValidation;
    } catch (const ConfigError& e) {
        fail_line(kValidation, "config", e.what());
        return kValidation;
    } catch (const DomainError& e) {
        fail_line(kValidation, "domain", e.what());
        return kValidation;
    } catch (const NumericalError& e) {
        fail_line(kNumerical, "numerical", e.what());
        return kNumerical;
    } catch (const json::exception& e) {
        fail_line(kValidation, "validation", e.what());
        return kValidation;
    } catch (const std::exception& e) {
        fail_line(kNumerical, "internal", e.what());
        return kNumerical;
    }
    return kValidation;
}
