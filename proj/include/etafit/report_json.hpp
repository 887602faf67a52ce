#pragma once

#include "etafit/estimation.hpp"
#include "etafit/trace_tools.hpp"

#include "json.hpp"

namespace etafit {

// Non-finite numbers are written as the strings "inf", "-inf" and "nan".
nlohmann::json json_number(double value);
double number_from_json(const nlohmann::json& value);

nlohmann::json to_json(const TraceInterpolant& interp);
TraceInterpolant interpolant_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const SpectrumSummary& spec);
nlohmann::json to_json(const EstimationDiagnostics& diag);
// Everything except "timings" is deterministic for a fixed input and seed.
nlohmann::json to_json(const EstimationReport& report);

} // namespace etafit
