#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "coop/equilibrium.hpp"
#include "coop/experiments.hpp"
#include "coop/interdependence.hpp"
#include "coop/model.hpp"

namespace coop::io {

using json = nlohmann::json;

/// Carried by every machine-readable document the engine emits.
inline constexpr int kSchemaVersion = 1;

// Scenario interchange. Readers are strict: unknown keys and wrong types throw ParseError.
json to_json(const Scenario& s);
Scenario scenario_from_json(const json& j);
/// Syntax errors carry line/column.
Scenario parse_scenario(std::string_view text);
/// Parses and validates. Missing file -> NotFound; violations -> ValidationError.
Scenario load_scenario(const std::filesystem::path& path);
/// Parses only; structural errors throw, semantic violations are left to the caller.
Scenario read_scenario_file(const std::filesystem::path& path);

json to_json(const InterdependenceMatrix& m);
InterdependenceMatrix matrix_from_json(const json& j);
json to_json(const std::vector<AsymmetryRow>& rows);
json to_json(const ShareVector& shares, const std::vector<ActorId>& order);

json to_json(const SolveSettings& s);
/// Overrides fields of `base` with those present in `j`.
SolveSettings settings_from_json(const json& j, SolveSettings base = {});

json to_json(const EquilibriumResult& r);
json to_json(const SweepAxis& axis);
SweepAxis axis_from_json(const json& j);
json to_json(const SweepResult& r);

json to_json(const CounterfactualEdit& e);
CounterfactualEdit edit_from_json(const json& j);
json to_json(const CounterfactualReport& r);

json to_json(const ValidationRubric& r);
ValidationRubric rubric_from_json(const json& j);
json to_json(const ValidationScore& s);

json to_json(const std::vector<Violation>& violations);

json read_json_file(const std::filesystem::path& path);
json parse_json_text(std::string_view text);

/// Stable key order, integral numbers below 2^53 as integers, other numbers in
/// shortest round-trip form.
json canonicalize(const json& j);
std::string canonical_dump(const json& j);
/// Lowercase hex SHA-256 of canonical_dump(j).
std::string content_digest(const json& j);

}  // namespace coop::io
