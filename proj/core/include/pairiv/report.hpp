#pragma once

#include <string>

#include "pairiv/delta.hpp"
#include "pairiv/oracle.hpp"
#include "pairiv/simulate.hpp"

namespace pairiv {

// JSON serializations. Numbers are emitted at 15 significant digits; output
// is deterministic for identical inputs (no timestamps).
std::string report_to_json(const EstimateReport& report);
std::string truth_to_json(const PopulationTruth& truth, const DgpSpec& spec);
std::string mc_report_to_json(const McReport& report);
std::string identity_report_to_json(const IdentityReport& report);

// Fixed-width human-readable table of an estimate report.
std::string report_to_table(const EstimateReport& report);

}  // namespace pairiv
