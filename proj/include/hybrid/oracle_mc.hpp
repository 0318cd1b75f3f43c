#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "hybrid/errors.hpp"
#include "hybrid/math.hpp"
#include "hybrid/pricing_core.hpp"

namespace hybrid {

// Concrete latent-factor model used only for validation.
//   lambda_t = f(Y_t, Z_t), sigma_t = sigma(Ytilde_t)
//   dY      = (m - Y)/eps dt + nu sqrt(2/eps) dW2
//   dYtilde = ((mt - Yt)/eps - nut sqrt(2/eps) Lambda) dt + nut sqrt(2/eps) dW4
//   dZ      = delta (z_mean - Z) dt + sqrt(delta) g dW3
struct FactorSpec {
    bool constant = false;  // constant sigma and intensity taken from the pricing inputs

    double epsilon = 0.01;
    double delta = 0.01;
    double m = 0.0, nu = 0.5;
    double m_tilde = 0.0, nu_tilde = 1.0;
    double Lambda = 0.0;  // market price of volatility risk
    double z_mean = 0.0, g = 0.5;
    double z0 = 0.0;
    double sigma_base = 0.2, sigma_amp = 0.1;
    double f_cap = 2.0;

    // Correlations of W0 with W1..W4, and among W1..W4 (row i, col j for W_{i+1}, W_{j+1}).
    std::array<double, 4> rho{-0.2, 0.3, 0.2, -0.5};
    std::array<std::array<double, 4>, 4> rho_ij{{{1.0, 0.0, 0.0, 0.0},
                                                 {0.0, 1.0, 0.0, 0.0},
                                                 {0.0, 0.0, 1.0, 0.0},
                                                 {0.0, 0.0, 0.0, 1.0}}};

    static FactorSpec constant_factors() {
        FactorSpec s;
        s.constant = true;
        return s;
    }

    double sigma(double yt) const { return sigma_base + sigma_amp * std::tanh(yt); }

    // E[exp(min(Y + z, cap))] with Y ~ N(m, nu^2).
    double f_normalizer(double z) const {
        const double mu = m + z;
        if (nu == 0) return std::exp(std::min(mu, f_cap));
        const double s2 = nu * nu;
        return std::exp(mu + s2 / 2) * norm_cdf((f_cap - mu - s2) / nu) +
               std::exp(f_cap) * norm_cdf(-(f_cap - mu) / nu);
    }

    Eigen::Matrix<double, 5, 5> correlation() const {
        Eigen::Matrix<double, 5, 5> c = Eigen::Matrix<double, 5, 5>::Identity();
        for (int i = 0; i < 4; ++i) {
            c(0, i + 1) = c(i + 1, 0) = rho[static_cast<std::size_t>(i)];
            for (int j = 0; j < 4; ++j)
                if (i != j) c(i + 1, j + 1) = rho_ij[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        return c;
    }
};

/// sigma1 = <sigma>, sigma2 = sqrt(<sigma^2>) over the invariant law N(m_tilde, nu_tilde^2);
/// rho1 is the effective correlation (sigma1 / sigma2) rho_1.
inline EquityParams effective_equity(const FactorSpec& spec, double x, double q) {
    const auto& rule = normal_hermite_rule(128);
    double s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double s = spec.sigma(spec.m_tilde + spec.nu_tilde * rule.nodes[i]);
        s1 += rule.weights[i] * s;
        s2 += rule.weights[i] * s * s;
    }
    const double sigma2 = std::sqrt(s2);
    return EquityParams{x, sigma2, s1 / sigma2 * spec.rho[0], q, s1};
}

struct McConfig {
    std::size_t n_paths = 100000;
    double steps_per_year = 252;
    std::uint64_t seed = 42;
    FactorSpec factors{};
    // Subtract a constant-parameter copy of each path (same shocks, sigma2 and lambda
    // fixed at their effective values) and add back its closed-form price.
    bool control_variate = false;
    std::size_t chunk_pairs = 2048;
    unsigned threads = 0;  // 0 = hardware concurrency
};

enum class McInstrument { call, put, bond, cds_protection, cds_annuity, stock };

inline McInstrument parse_mc_instrument(const std::string& s) {
    if (s == "call") return McInstrument::call;
    if (s == "put") return McInstrument::put;
    if (s == "bond") return McInstrument::bond;
    if (s == "cds_protection" || s == "cds-protection") return McInstrument::cds_protection;
    if (s == "cds_annuity" || s == "cds-annuity") return McInstrument::cds_annuity;
    if (s == "stock") return McInstrument::stock;
    throw ValidationError("unknown oracle instrument '" + s + "'");
}

struct McTarget {
    McInstrument kind;
    double tau;
    double strike = 0;
    double cds_delta = 1.0;  // premium interval for cds_annuity
};

struct McEstimate {
    double estimate;
    double std_error;
    std::size_t n_paths;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Exact OU step X' = mean + (X - mean) e^{-k h} + sd * shock, with stationary sd s.
struct OuStep {
    double decay = 1, sd = 0;
    OuStep() = default;
    OuStep(double k, double s_stationary, double h) {
        decay = std::exp(-k * h);
        sd = s_stationary * std::sqrt(-std::expm1(-2 * k * h));
    }
};

// Closed-form value of a target under constant sigma/intensity, used for the control.
inline double closed_form_target(const McTarget& t, const PricingInputs& base) {
    PricingInputs in = base;
    in.tau = t.tau;
    in.strike = t.strike;
    switch (t.kind) {
        case McInstrument::call: return call_p0(in);
        case McInstrument::put: return put_p0(in);
        case McInstrument::bond: return defaultable_bond_p0(in);
        case McInstrument::cds_protection: return riskless_bond(in.vasicek, in.tau) - defaultable_bond_p0(in);
        case McInstrument::cds_annuity: {
            double sum = 0, prev = 0;
            for (int k = 1;; ++k) {
                double tk = std::min(t.cds_delta * k, t.tau);
                if (tk >= t.tau * (1 - 1e-12)) tk = t.tau;
                PricingInputs s = in;
                s.tau = tk;
                s.credit.l = 1;
                sum += (tk - prev) * defaultable_bond_p0(s);
                prev = tk;
                if (tk == t.tau) break;
            }
            return sum;
        }
        case McInstrument::stock: return in.equity.x * std::exp(-in.equity.q * in.tau);
    }
    return 0;
}

}  // namespace detail

/// Monte-Carlo prices of several targets on common paths. Default is handled by
/// survival weighting: pre-default payoffs are discounted at r + lambda.
inline std::vector<McEstimate> mc_price_many(const McConfig& cfg, const PricingInputs& in,
                                             const std::vector<McTarget>& targets) {
    in.vasicek.validate();
    in.credit.validate();
    if (!(in.equity.x > 0)) throw ValidationError("oracle needs a positive spot");
    if (cfg.n_paths < 10000) throw ConfigError("oracle needs at least 10^4 paths");
    if (!(cfg.steps_per_year > 0)) throw ConfigError("oracle needs a positive step density");
    if (targets.empty()) throw ConfigError("no oracle targets");
    const auto& fs = cfg.factors;
    if (!fs.constant && !(fs.epsilon > 0 && fs.delta > 0)) throw ConfigError("epsilon and delta must be positive");

    double tau_max = 0;
    for (const auto& t : targets) {
        if (!(t.tau > 0)) throw ValidationError("oracle target maturity must be positive");
        if ((t.kind == McInstrument::call || t.kind == McInstrument::put) && !(t.strike > 0))
            throw ValidationError("oracle option target needs a positive strike");
        tau_max = std::max(tau_max, t.tau);
    }
    const auto n_steps = static_cast<std::size_t>(std::ceil(tau_max * cfg.steps_per_year - 1e-9));
    const double h = tau_max / static_cast<double>(n_steps);
    auto grid_index = [&](double t) {
        const double k = t / h;
        const double kr = std::round(k);
        if (std::abs(k - kr) > 1e-6) throw ConfigError("time " + std::to_string(t) + " is not on the oracle time grid");
        return static_cast<std::size_t>(kr);
    };

    // Per target, the steps at which it is evaluated and the weights (annuity accruals).
    struct Eval {
        std::vector<std::size_t> steps;
        std::vector<double> accruals;
    };
    std::vector<Eval> evals(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& t = targets[i];
        if (t.kind == McInstrument::cds_annuity) {
            if (!(t.cds_delta > 0)) throw ValidationError("CDS premium interval must be positive");
            double prev = 0;
            for (int k = 1;; ++k) {
                double tk = t.cds_delta * k;
                if (tk >= t.tau * (1 - 1e-12)) tk = t.tau;
                evals[i].steps.push_back(grid_index(tk));
                evals[i].accruals.push_back(tk - prev);
                prev = tk;
                if (tk == t.tau) break;
            }
        } else {
            evals[i].steps.push_back(grid_index(t.tau));
            evals[i].accruals.push_back(1.0);
        }
    }

    // Shock loading: 2 factors for constant parameters, 5 otherwise.
    const int dim = fs.constant ? 2 : 5;
    Eigen::MatrixXd corr;
    if (fs.constant) {
        corr = Eigen::Matrix2d::Identity();
        corr(0, 1) = corr(1, 0) = in.equity.rho1;
    } else {
        corr = fs.correlation();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
    if (es.eigenvalues().minCoeff() < -1e-12) throw ValidationError("oracle correlation matrix is not positive semidefinite");
    const Eigen::MatrixXd load =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    const auto& vp = in.vasicek;
    const detail::OuStep r_step(vp.beta, vp.beta > 0 ? vp.eta / std::sqrt(2 * vp.beta) : 0.0, h);
    const double r_mean = vp.alpha / vp.beta;
    detail::OuStep y_step, yt_step, z_step;
    double yt_mean = 0, f_scale = 0;
    EquityParams eff{};
    if (!fs.constant) {
        y_step = detail::OuStep(1 / fs.epsilon, fs.nu, h);
        yt_step = detail::OuStep(1 / fs.epsilon, fs.nu_tilde, h);
        z_step = detail::OuStep(fs.delta, fs.g / std::sqrt(2.0), h);
        yt_mean = fs.m_tilde - fs.nu_tilde * std::sqrt(2 * fs.epsilon) * fs.Lambda;
        f_scale = in.credit.lambda / fs.f_normalizer(fs.z0);
        eff = effective_equity(fs, in.equity.x, in.equity.q);
    }
    const bool control = cfg.control_variate && !fs.constant;
    const double sig_const = fs.constant ? in.equity.sigma2 : eff.sigma2;
    const double lam_const = in.credit.lambda;
    const double l = in.credit.l;
    const double q = in.equity.q;
    const double sqh = std::sqrt(h);

    const std::size_t n_pairs = (cfg.n_paths + 1) / 2;
    const std::size_t chunk = std::max<std::size_t>(1, cfg.chunk_pairs);
    const std::size_t n_chunks = (n_pairs + chunk - 1) / chunk;
    const std::size_t nt = targets.size();
    std::vector<std::vector<double>> chunk_sum(n_chunks, std::vector<double>(nt, 0.0));
    std::vector<std::vector<double>> chunk_sq(n_chunks, std::vector<double>(nt, 0.0));

    auto run_chunk = [&](std::size_t c) {
        std::mt19937_64 rng(detail::splitmix64(cfg.seed ^ detail::splitmix64(c)));
        std::normal_distribution<double> normal;
        std::vector<double> shocks(n_steps * static_cast<std::size_t>(dim));
        std::vector<double> value(nt), pair(nt);
        // Per-step discount factors at evaluation steps.
        std::vector<double> d_r(n_steps + 1), d_surv(n_steps + 1), d_loss(n_steps + 1), x_at(n_steps + 1);
        std::vector<double> c_surv(n_steps + 1), c_loss(n_steps + 1), cx_at(n_steps + 1);
        Eigen::VectorXd iid(dim), xi(dim);
        const std::size_t first = c * chunk;
        const std::size_t last = std::min(n_pairs, first + chunk);
        for (std::size_t p = first; p < last; ++p) {
            for (std::size_t k = 0; k < n_steps; ++k) {
                for (int j = 0; j < dim; ++j) iid(j) = normal(rng);
                xi.noalias() = load * iid;
                for (int j = 0; j < dim; ++j) shocks[k * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)] = xi(j);
            }
            std::fill(pair.begin(), pair.end(), 0.0);
            for (double sign : {1.0, -1.0}) {
                double r = vp.r, y = fs.m, yt = fs.m_tilde, z = fs.z0;
                double log_x = std::log(in.equity.x), log_cx = log_x;
                double int_r = 0, int_lam = 0;
                auto intensity = [&](double yy, double zz) {
                    return fs.constant ? lam_const : f_scale * std::exp(std::min(yy + zz, fs.f_cap));
                };
                double lam = intensity(y, z);
                d_r[0] = d_surv[0] = d_loss[0] = c_surv[0] = c_loss[0] = 1;
                x_at[0] = cx_at[0] = in.equity.x;
                for (std::size_t k = 0; k < n_steps; ++k) {
                    const double* s = &shocks[k * static_cast<std::size_t>(dim)];
                    const double sig = fs.constant ? sig_const : fs.sigma(yt);
                    const double r_new = r_mean + (r - r_mean) * r_step.decay + r_step.sd * sign * s[1];
                    double lam_new = lam;
                    if (!fs.constant) {
                        y = fs.m + (y - fs.m) * y_step.decay + y_step.sd * sign * s[2];
                        z = fs.z_mean + (z - fs.z_mean) * z_step.decay + z_step.sd * sign * s[3];
                        yt = yt_mean + (yt - yt_mean) * yt_step.decay + yt_step.sd * sign * s[4];
                        lam_new = intensity(y, z);
                    }
                    const double dr = 0.5 * (r + r_new) * h;
                    const double dl = 0.5 * (lam + lam_new) * h;
                    int_r += dr;
                    int_lam += dl;
                    log_x += dr + dl - q * h - 0.5 * sig * sig * h + sig * sqh * sign * s[0];
                    r = r_new;
                    lam = lam_new;
                    d_r[k + 1] = std::exp(-int_r);
                    d_surv[k + 1] = std::exp(-int_r - int_lam);
                    d_loss[k + 1] = std::exp(-int_r - l * int_lam);
                    x_at[k + 1] = std::exp(log_x);
                    if (control) {
                        const double cl = lam_const * h * static_cast<double>(k + 1);
                        log_cx += dr + lam_const * h - q * h - 0.5 * sig_const * sig_const * h +
                                  sig_const * sqh * sign * s[0];
                        c_surv[k + 1] = std::exp(-int_r - cl);
                        c_loss[k + 1] = std::exp(-int_r - l * cl);
                        cx_at[k + 1] = std::exp(log_cx);
                    }
                }
                auto payoff = [&](std::size_t i, const std::vector<double>& surv, const std::vector<double>& loss,
                                  const std::vector<double>& xs) {
                    const auto& t = targets[i];
                    const auto& e = evals[i];
                    const std::size_t k = e.steps.back();
                    switch (t.kind) {
                        case McInstrument::call: return surv[k] * std::max(xs[k] - t.strike, 0.0);
                        case McInstrument::put:
                            return surv[k] * std::max(t.strike - xs[k], 0.0) + t.strike * (d_r[k] - surv[k]);
                        case McInstrument::bond: return loss[k];
                        case McInstrument::cds_protection: return d_r[k] - loss[k];
                        case McInstrument::cds_annuity: {
                            double a = 0;
                            for (std::size_t j = 0; j < e.steps.size(); ++j) a += e.accruals[j] * surv[e.steps[j]];
                            return a;
                        }
                        case McInstrument::stock: return surv[k] * xs[k];
                    }
                    return 0.0;
                };
                for (std::size_t i = 0; i < nt; ++i) {
                    double v = payoff(i, d_surv, d_loss, x_at);
                    if (control) v -= payoff(i, c_surv, c_loss, cx_at);
                    pair[i] += 0.5 * v;
                }
            }
            for (std::size_t i = 0; i < nt; ++i) {
                chunk_sum[c][i] += pair[i];
                chunk_sq[c][i] += pair[i] * pair[i];
            }
        }
    };

    unsigned n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_chunks));
    if (n_threads <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_threads; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t c = w; c < n_chunks; c += n_threads) run_chunk(c);
            });
        for (auto& t : pool) t.join();
    }

    PricingInputs control_in = in;
    if (control) {
        control_in.equity.sigma2 = sig_const;
        control_in.equity.rho1 = fs.rho[0];
        control_in.equity.sigma1.reset();
    }
    std::vector<McEstimate> out;
    const double np = static_cast<double>(n_pairs);
    for (std::size_t i = 0; i < nt; ++i) {
        double s = 0, ss = 0;
        for (std::size_t c = 0; c < n_chunks; ++c) {
            s += chunk_sum[c][i];
            ss += chunk_sq[c][i];
        }
        const double mean = s / np;
        const double var = std::max(ss / np - mean * mean, 0.0) * np / std::max(np - 1, 1.0);
        double est = mean;
        if (control) est += detail::closed_form_target(targets[i], control_in);
        out.push_back({est, std::sqrt(var / np), 2 * n_pairs});
    }
    return out;
}

inline McEstimate mc_price(const McConfig& cfg, const McTarget& target, const PricingInputs& in) {
    return mc_price_many(cfg, in, {target}).front();
}

}  // namespace hybrid
