#pragma once

// Deterministic tabular reports.
//
// A report is a manifest plus one table. CSV output prints numbers with four
// decimals (printf rounding of the exact binary value, which is
// round-half-even on exact ties) and carries the manifest as leading '#'
// lines. JSON output keeps full double precision.

#include "bsslca/engine.hpp"
#include "bsslca/inventory.hpp"
#include "bsslca/modeshift.hpp"
#include "bsslca/sweeps.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace bss {

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::string allocation;
  std::string format;
  std::string tool_version = BSSLCA_VERSION;
  /// FNV-1a 64 over every input's name and bytes, as 16 hex digits.
  std::string input_hash;

  bool operator==(const RunManifest&) const = default;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Hash of (name, content) pairs in the given order.
std::string hash_inputs(const std::vector<std::pair<std::string, std::string>>& inputs);

Json to_json(const RunManifest& manifest);

using Cell = std::variant<std::string, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  bool operator==(const Table&) const = default;
};

struct Report {
  RunManifest manifest;
  Table table;

  bool operator==(const Report&) const = default;
};

/// "%.4f", with negative zero printed as 0.0000.
std::string format_fixed4(double value);

std::string to_csv(const Report& report);
std::string to_json_text(const Report& report);

/// Inverse of to_csv. Numeric cells come back rounded to four decimals, so
/// to_csv(parse_report_csv(to_csv(r))) == to_csv(r).
Report parse_report_csv(std::string_view text);

struct NamedBreakdown {
  std::string system;
  EmissionBreakdown breakdown;
};

Table evaluate_table(const std::vector<NamedBreakdown>& rows);

/// Breakdowns back from an evaluate table.
std::vector<NamedBreakdown> breakdowns_from_table(const Table& table);

Table comparison_table(const std::vector<ComparisonReport>& comparisons, const std::vector<double>& baseline_totals,
                       const std::vector<double>& other_totals);

/// Long format: parameter, value, system, component, g_per_pkm, delta_pct.
/// Component deltas are the change of that component relative to the
/// system's nominal total, so they add up to the total's delta.
Table sweep_table(const SweepResult& result);

struct BreakevenRow {
  std::string moving;
  std::string target;
  double target_total = 0.0;
  double trips_per_bike_day = 0.0;
  double floor = 0.0;
};

Table breakeven_table(const std::vector<BreakevenRow>& rows);

/// One row per profile: share sum, displaced intensity per scenario, then delta,
/// reference and residual per system and scenario.
Table modeshift_report_table(const ModeShiftReport& report, std::span<const SystemKind> systems,
                             std::span<const Scenario> scenarios);

}  // namespace bss
