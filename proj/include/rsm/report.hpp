#pragma once

#include <string>

#include <json.hpp>

#include "rsm/bifurcation.hpp"

namespace rsm {

/// Shortest decimal text that reads back to the same double; "nan", "inf" and
/// "-inf" for non-finite values.
std::string format_number(double v);

nlohmann::json to_json(SystemParams const& p);
nlohmann::json to_json(DetectionConfig const& cfg);
nlohmann::json to_json(EquilibriumReport const& rep);
nlohmann::json to_json(BifurcationReport const& report);
nlohmann::json to_json(LiftAttractionResult const& result);

/// Flat table `a,system,count,positions,divergent,unsettled`, one row per
/// (a, system). Positions are joined with ';' inside one field.
std::string to_csv(BifurcationReport const& report);

}  // namespace rsm
