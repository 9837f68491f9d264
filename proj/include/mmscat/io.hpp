#pragma once

#include <string>

#include <json.hpp>

#include "mmscat/direct.hpp"
#include "mmscat/inverse.hpp"
#include "mmscat/validate.hpp"

namespace mmscat::io {

using Json = nlohmann::ordered_json;

/// Complex numbers are [re, im]; matrices are row-major nested arrays of them.
Json to_json(Complex z);
Json to_json(const ComplexMatrix& m);
Complex complex_from_json(const Json& j, const std::string& what);
ComplexMatrix matrix_from_json(const Json& j, const std::string& what);

/// {"kind": "zero"|"sech2"|"exp_decay", "params": {...}} or
/// {"kind": "sampled", "x": [...], "v": [matrix, ...]}.
///   zero: {"n"}, sech2: {"n", "kappa"}, exp_decay: {"H", "rate"}
HermitianPotential potential_from_json(const Json& j);
Json potential_to_json(const HermitianPotential& v);

/// {"U": matrix} or {"phases": [alpha_1, ...]} for U = diag(e^{i alpha_j}).
ComplexMatrix boundary_from_json(const Json& j);
Json boundary_to_json(const ComplexMatrix& U);

Json grid_to_json(const GridSpec& g);
/// Missing fields keep the values of `base`.
GridSpec grid_from_json(const Json& j, GridSpec base = {});

Json dataset_to_json(const ScatteringDataset& d);
ScatteringDataset dataset_from_json(const Json& j);

/// The "potential" and "boundary" members are valid inputs of
/// potential_from_json and boundary_from_json.
Json model_to_json(const RecoveredModel& m);
Json conditions_to_json(const ConditionReport& r);
Json metrics_to_json(const RoundTripMetrics& r);

/// Throws InvalidInput naming the file, and line and column for syntax errors.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
/// Two-space indentation and a trailing newline.
std::string dump(const Json& j);

/// One row per k: k, S_ab_re, S_ab_im, ...
std::string dataset_csv(const ScatteringDataset& d);
/// One row per x: x, V_ab_re, V_ab_im, ...
std::string model_csv(const RecoveredModel& m);
/// One row per x: x, V_ab_re/im, Vrec_ab_re/im, err
std::string potential_comparison_csv(const HermitianPotential& v, const RecoveredModel& m);

} // namespace mmscat::io
