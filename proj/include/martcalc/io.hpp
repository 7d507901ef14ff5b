#pragma once

#include <string>

#include <json.hpp>

#include "martcalc/atomic.hpp"
#include "martcalc/dyadic_geometry.hpp"
#include "martcalc/measure_space.hpp"

namespace martcalc {

// Ordered JSON keeps key order stable so regenerated reports and artifacts
// compare byte-for-byte.
using Json = nlohmann::ordered_json;

Json load_json(const std::string& path);
void save_json(const std::string& path, const Json& j);

// space.json: {"kind": "probability"|"sigma_finite", "weights": [...]}
Json space_to_json(const MeasureSpace& space);
MeasureSpace space_from_json(const Json& j);

// filtration.json: {"k_min": k, "partitions": [[[ids], ...], ...]}
Json filtration_to_json(const Filtration& filt);
Filtration filtration_from_json(const Json& j);

// func.json: {"values": [...]}
Json func_to_json(const Func& f);
Func func_from_json(const Json& j);

// metric_space.json: {"weights": [...], "A0": a, "coordinates": [[x,..],..]}
// or {"weights": [...], "A0": a, "distances": [[..],..]}
Json metric_space_to_json(const QuasiMetricSpace& space);
QuasiMetricSpace metric_space_from_json(const Json& j);

// dyadic_system.json: parameters plus per-level cubes with centers, points
// and parent links.
Json dyadic_system_to_json(const DyadicSystem& system);
DyadicSystem dyadic_system_from_json(const Json& j);

Json adjacent_to_json(const AdjacentSystems& adjacent);
AdjacentSystems adjacent_from_json(const Json& j);

// decomposition.json: [{"lambda": l, "level": k, "block": [...], "values": [...]}]
Json decomposition_to_json(const AtomicDecomposition& dec);
AtomicDecomposition decomposition_from_json(const Json& j);

// 17 significant digits, enough to round-trip doubles exactly.
std::string format_double(double v);

}  // namespace martcalc
