#pragma once

#include "hybrid/errors.hpp"
#include "hybrid/math.hpp"
#include "hybrid/market_data.hpp"
#include "hybrid/rates.hpp"
#include "hybrid/pricing_core.hpp"
#include "hybrid/corrections.hpp"
#include "hybrid/implied_vol.hpp"
#include "hybrid/calibration.hpp"
#include "hybrid/cds.hpp"
#include "hybrid/oracle_mc.hpp"
#include "hybrid/report.hpp"
