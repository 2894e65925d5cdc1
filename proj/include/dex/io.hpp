#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include <json.hpp>

#include "dex/cutset_lp.hpp"
#include "dex/dual_solver.hpp"
#include "dex/instance.hpp"
#include "dex/network_code.hpp"

namespace dex {

inline constexpr int kFormatVersion = 1;

/// Command-line replacements for the instance's field.
struct FieldOverride {
  std::optional<std::uint32_t> characteristic;
  std::optional<unsigned> degree;
};

/// Errors are std::invalid_argument with a "path: message" diagnostic, e.g.
/// "terminals[2].rows[0]: entry 3 is not an element of GF(3)".
Instance instance_from_json(const nlohmann::json& doc, const FieldOverride& override_field = {});
Instance parse_instance(const std::filesystem::path& path, const FieldOverride& override_field = {});
nlohmann::json instance_to_json(const Instance& instance);

nlohmann::json field_to_json(const Field& field);
Field field_from_json(const nlohmann::json& doc, std::string_view where);

/// Rationals are written as "p/q" strings; readers also accept JSON numbers.
nlohmann::json rational_to_json(const Rational& value);
Rational rational_from_json(const nlohmann::json& value, std::string_view where);

/// "0,1/2,0.25" -> rationals.
RateVector parse_rate_list(std::string_view text);
std::vector<std::size_t> parse_index_list(std::string_view text);

nlohmann::json solution_to_json(const Solution& solution, const Instance& instance);
/// Reads the "rates" array of a solution document.
RateVector rates_from_solution_json(const nlohmann::json& doc);

nlohmann::json lp_to_json(const CutSetLP& lp, const LpSolution& solution);

nlohmann::json scheme_to_json(const TransmissionScheme& scheme);
/// Rebuilds a scheme against the instance it was designed for.
TransmissionScheme scheme_from_json(const nlohmann::json& doc, const Instance& instance);

nlohmann::json trace_to_json(const TraceRecord& record);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace dex
