#pragma once

#include "greedylab/analysis.hpp"
#include "greedylab/dictionary.hpp"
#include "greedylab/greedy.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace greedylab::io {

using json = nlohmann::json;

/// Decimal with 17 significant digits, '.' separator; round-trips a double.
std::string format_double(double value);

/// "hilbert" or "lp:<p>", used in summaries.
std::string geometry_tag(const Geometry& geometry);

json to_json(const Geometry& geometry);
/// {kind, p}; `n` comes from the surrounding object.
Geometry geometry_from_json(const json& j, Index n);

/// {label, kind, p, n, atoms: [[...], ...]}, one row per atom.
json to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const json& j);

/// {kind, p, n, M, f, coeffs: [{index, value}, ...]}.
json to_json(const A1Target& target);
A1Target target_from_json(const json& j);

json to_json(const WeaknessSequence& ts);
WeaknessSequence weakness_from_json(const json& j);
std::string describe(const WeaknessSequence& ts);

/// {algorithm, geometry: {kind, p}, stop_reason, records: [...]} plus n,
/// target_norm, final_approx, and when known weakness and certified_M.
json to_json(const RunTrace& trace, std::optional<double> certified_M = std::nullopt);
RunTrace trace_from_json(const json& j);
/// certified_M stored alongside a trace, if any.
std::optional<double> trace_certified_M(const json& j);

/// Header row then one row per iteration:
/// m,atom_index,dual_value,lambda,s,error,sup_dual
std::string trace_to_csv(const RunTrace& trace);

json to_json(const BoundReport& report);
json to_json(const RateFit& fit);

std::string read_file(const std::filesystem::path& path);
json read_json_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace greedylab::io
