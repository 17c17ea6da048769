#pragma once

#include <string>

#include "coalsens/engine.hpp"

namespace coalsens {

/// The %.17g rendering used for every float in report files: enough digits
/// that a double round-trips bit-exactly through text.
std::string format_double(double value);

/// Serializes a report to the stable schema: fixed top-level keys
/// {meta, phi, psi, ratios, diagnostics, attribution?} in fixed order, all
/// floats via format_double. Thread count and wall time are deliberately
/// omitted so reruns of one config are byte-identical at any --threads.
std::string report_to_json(const DecompositionReport& report);

/// One CSV row per subset in ascending mask order (2^d rows plus header).
/// Scalar QoIs: subset,size,phi,phi_se,psi,psi_se,ratio. Matrix QoIs emit
/// per-entry column groups phi_p_q,... for p <= q and have no ratio.
std::string report_to_csv(const DecompositionReport& report);

/// Shapley share table (input,shapley). Requires report.attribution.
std::string attribution_to_csv(const DecompositionReport& report);

}  // namespace coalsens
