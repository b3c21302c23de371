#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fepi/checks.hpp"
#include "fepi/freeentropy.hpp"
#include "fepi/geometry.hpp"
#include "fepi/lemma.hpp"
#include "fepi/measure.hpp"
#include "fepi/microstates.hpp"

namespace fepi::io {

using json = nlohmann::ordered_json;

/// Serializes with every floating-point number at 17 significant digits.
/// Non-finite numbers become null; callers add an explicit flag next to
/// them.
std::string dump(const json& value, int indent = 2);

/// Scalar leaves of an object as dotted paths, in document order. Arrays
/// are skipped.
std::vector<std::pair<std::string, json>> flatten(const json& value);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& text);

// Input specs. Errors are parameter errors whose message starts with the
// JSON pointer of the offending value.

/// {"family": name, "params": [...]}, {"point_mass": x},
/// {"mixture": [spec, ...], "weights": [...]} or an explicit
/// {"lo", "hi", "density", "atoms": [[x, w], ...]}.
Measure measure_from_json(const json& spec, const GridConfig& grid, const std::string& path);
/// {"kind": "ball", "n", "radius", "center"?}, {"kind": "box", "half_widths", "center"?},
/// {"kind": "ellipsoid", "semi_axes", "center"?}, {"kind": "intersection", "members"},
/// {"kind": "scaled", "base", "factor"}. `n` is the default dimension.
SetSpec set_from_json(const json& spec, std::size_t n, const std::string& path);
/// {"kind": "full" | "inner_product_leq" | "sum_norm_leq" | "complement_fraction" | "custom",
///  "value", "seed", "cell", "id"}.
ThetaSpec theta_from_json(const json& spec, const std::string& path);
/// {"quantile": measure spec, "nodes"?}, {"affine": [a, b]} or
/// {"t": [...], "values": [...]}.
StepFunctionSpec step_from_json(const json& spec, const GridConfig& grid, const std::string& path);

json to_json(const Measure& mu, bool with_density = true);
json to_json(const SetSpec& set);
json to_json(const ThetaSpec& theta);
json to_json(const VolumeEstimate& v);
json to_json(const GateReport& g);
json to_json(const CheckReport& r);
json to_json(const EntropyValue& v);
json to_json(const FreeConvolutionResult& r, bool with_density = true);
json to_json(const EntropyReport& r, bool with_density = false);
json to_json(const RestrictedSumResult& r);
json to_json(const BallExample& b);
json to_json(const CapFraction& c);
json to_json(const Lemma13Result& r);
json to_json(const Proportion& p);
json to_json(const ThetaFractionResult& r);
json to_json(const OmegaVolumeResult& r);
json to_json(const SumContainmentResult& r);

}  // namespace fepi::io
