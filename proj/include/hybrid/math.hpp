#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "hybrid/errors.hpp"

namespace hybrid {

template <std::floating_point Real>
Real norm_pdf(Real x) {
    return std::exp(Real(-0.5) * x * x) / std::sqrt(Real(2) * std::numbers::pi_v<Real>);
}

template <std::floating_point Real>
Real norm_cdf(Real x) {
    return Real(0.5) * std::erfc(-x / std::numbers::sqrt2_v<Real>);
}

// Nodes and weights of an n-point rule; weights sum to the measure of the domain.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Newton iteration on the orthonormal Hermite recurrence, physicists' weight exp(-x^2).
inline QuadratureRule compute_gauss_hermite(std::size_t n) {
    constexpr double pim4 = 0.7511255444649425;  // pi^(-1/4)
    QuadratureRule rule{std::vector<double>(n), std::vector<double>(n)};
    const std::size_t m = (n + 1) / 2;
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double nn = static_cast<double>(n);
        if (i == 0) {
            z = std::sqrt(2.0 * nn + 1.0) - 1.85575 * std::pow(2.0 * nn + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(nn, 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[i - 2];
        }
        double pp = 0.0;
        bool converged = false;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jj = static_cast<double>(j);
                p1 = z * std::sqrt(2.0 / (jj + 1.0)) * p2 - std::sqrt(jj / (jj + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * nn) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged) throw NumericalError("Gauss-Hermite node iteration did not converge");
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

inline QuadratureRule compute_gauss_legendre(std::size_t n) {
    QuadratureRule rule{std::vector<double>(n), std::vector<double>(n)};
    const std::size_t m = (n + 1) / 2;
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nn + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jj = static_cast<double>(j);
                p1 = ((2.0 * jj + 1.0) * z * p2 - jj * p3) / (jj + 1.0);
            }
            pp = nn * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-16) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

// One cache per Compute type, i.e. per rule family.
template <class Compute>
const QuadratureRule& cached_rule(std::size_t n, Compute compute) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<QuadratureRule>(compute(n));
    return *slot;
}

}  // namespace detail

/// Gauss-Hermite rule for expectations under the standard normal law:
/// E[g(Z)] ~ sum_i w_i g(z_i), with sum_i w_i = 1.
inline const QuadratureRule& normal_hermite_rule(std::size_t n) {
    if (n == 0) throw ConfigError("quadrature needs at least one node");
    return detail::cached_rule(n, [](std::size_t k) {
        auto rule = detail::compute_gauss_hermite(k);
        for (auto& z : rule.nodes) z *= std::numbers::sqrt2;
        for (auto& w : rule.weights) w /= std::sqrt(std::numbers::pi);
        return rule;
    });
}

/// Gauss-Legendre rule on [-1, 1].
inline const QuadratureRule& legendre_rule(std::size_t n) {
    if (n == 0) throw ConfigError("quadrature needs at least one node");
    return detail::cached_rule(n, [](std::size_t k) { return detail::compute_gauss_legendre(k); });
}

}  // namespace hybrid
