#pragma once

#include "erp/calarb.hpp"
#include "erp/carry.hpp"
#include "erp/gmm.hpp"
#include "erp/kappa.hpp"
#include "erp/measure.hpp"

#include <json.hpp>

namespace erp::json_io {

using nlohmann::ordered_json;

ordered_json to_json(const gmm::GmmDensity& d);
ordered_json to_json(const gmm::FitReport& r);
ordered_json to_json(const carry::CarryParams& c);
ordered_json to_json(const measure::ErpPoint& p);
ordered_json to_json(const measure::ErpTermStructure& ts);
ordered_json to_json(const kappa::KappaEstimate& k);
ordered_json to_json(const kappa::MomentReport& m);
ordered_json to_json(const calarb::ArbViolation& v);

/// Inverse of to_json(GmmDensity).
gmm::GmmDensity density_from_json(const ordered_json& j);

}  // namespace erp::json_io
