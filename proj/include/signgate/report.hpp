#pragma once

#include "signgate/simulation.hpp"

#include <ostream>
#include <span>
#include <string>

namespace signgate {

/// Real number with 17 significant digits and '.' as decimal separator.
std::string format_real(double v);

/// Header plus one row per (scenario, procedure):
/// scenario_id,procedure,mean_sep,se_sep,mean_signs,se_signs,replicates
void write_report_csv(std::ostream& out, std::span<const ScenarioReport> reports);

/// Two-panel SVG (mean SEP and mean signs per design point) with
/// +/- 1.96 Monte Carlo standard error bars. `target` draws a reference line
/// on the SEP panel when positive.
void write_report_svg(std::ostream& out, std::span<const ScenarioReport> reports, double target);

} // namespace signgate
