#pragma once

#include <vector>

#include "hybrid/hybrid.hpp"

namespace fixtures {

using namespace hybrid;

// Calibrated single-name equity surface with its eight coefficients.
inline VasicekParams surface_rates() { return {0.0063, 0.1034, 0.012, 0.0476}; }
inline double surface_sigma2() { return 0.2576; }
inline double surface_lambda() { return 0.027; }
inline CorrectionParams surface_V() {
    CorrectionParams V;
    V.V1e = 0.9960;
    V.V2e = -0.0014;
    V.V3e = 0.0009;
    V.V4e = 0.0104;
    V.V5e = -0.6514;
    V.V6e = 0.3340;
    V.V1d = -0.1837;
    V.V2d = -0.0001;
    return V;
}
// Spot and rate correlation of the same name on an earlier date.
inline double name_spot() { return 8.04; }
inline double name_rho1() { return -0.0327; }
inline EquityParams surface_equity() { return {name_spot(), surface_sigma2(), name_rho1()}; }

// Short-dated fit of the same name.
inline VasicekParams early_rates() { return {0.0037, 0.0872, 0.0001, 0.0516}; }
inline double early_sigma2() { return 0.3827; }

// Three CDS parameter sets: low-loss hump and two total-loss curves.
inline CreditModel cds_case_a() {
    CreditModel m{{0.0037, 0.0872, 0.0001, 0.0516}, {0.283, 0.0459}, {}};
    m.V.V3e = 0.0425;
    m.V.V2d = 0.0036;
    return m;
}
inline CreditModel cds_case_b() {
    CreditModel m{{0.0045, 0.0983, 0.0002, 0.0516}, {1.0, 0.012}, {}};
    m.V.V3e = 0.0185;
    m.V.V2d = 0.0025;
    return m;
}
inline CreditModel cds_case_c() {
    CreditModel m{{0.0039, 0.0817, 0.0012, 0.0496}, {1.0, 0.017}, {}};
    m.V.V3e = 0.0067;
    m.V.V2d = 0.0005;
    return m;
}

// Index: rates and equity block.
inline VasicekParams index_rates() { return {0.0078, 0.1173, 0.0241, 0.0476}; }
inline EquityParams index_equity() { return {1507.67, 0.1124, 0.020454, 0.0190422}; }
inline std::vector<double> index_maturity_days() { return {30, 60, 91, 122, 152, 182, 273, 365, 547, 730}; }

// Corporate bond maturities observed on one day.
inline std::vector<double> bond_maturities() {
    return {0.60278, 1.0222, 1.1861, 1.3139, 1.4083, 1.5944, 2.3889, 2.6028,
            3.0194,  3.2694, 3.3972, 3.6472, 4.1722, 4.3806, 6.3139, 9.5194};
}

// Treasury tenors in years: 1m, 3m, 6m, 1y, 2y, 3y, 5y, 7y, 10y, 20y.
inline std::vector<double> treasury_tenors() { return {1.0 / 12, 0.25, 0.5, 1, 2, 3, 5, 7, 10, 20}; }

}  // namespace fixtures
