#pragma once

// One-at-a-time parameter sweeps over the engine and break-even utilization.
//
// Every grid point starts from a copy of the nominal system with exactly one
// parameter substituted, so untouched fields stay bit-identical.

#include "bsslca/calibration.hpp"
#include "bsslca/engine.hpp"
#include "bsslca/inventory.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bss {

/// How a utilization change propagates into the inventory.
///
/// fixed_trip_length: daily mileage scales with trips (trip length held at its
/// nominal value); per-pkm use, services and infrastructure stay constant.
/// station_term_scales: as above, and in addition the per-pkm infrastructure
/// burden scales with nominal_trips / trips (stations are shared by fewer or
/// more passenger-km).
enum class UtilizationScaling { fixed_trip_length, station_term_scales };

std::string_view to_string(UtilizationScaling scaling);
std::optional<UtilizationScaling> parse_utilization_scaling(std::string_view text);

struct SweepSpec {
  /// One of: lifetime_years, trips_per_bike_day, rebalancing_km_per_pkm,
  /// rebalancing_m_per_pkt, grid_and_vans, autonomy.
  std::string parameter;
  /// Numeric grid for numeric parameters.
  std::vector<double> values;
  /// Named scenarios for grid_and_vans and autonomy.
  std::vector<std::string> scenarios;
  /// System names (bundled nominal) or scenario file paths.
  std::vector<std::string> systems;
  UtilizationScaling utilization_scaling = UtilizationScaling::fixed_trip_length;
  /// Use the calibrated alternate autonomy split for autonomous systems.
  bool alternate_autonomy_split = false;
  /// Van intensity used by the zero_carbon_bev_vans scenario.
  double bev_van_gco2_per_km = 0.0;

  std::size_t size() const { return parameter == "grid_and_vans" || parameter == "autonomy" ? scenarios.size() : values.size(); }
};

/// Parses `{"sweep": {"parameter", "values", "systems", ...}}`.
/// Throws ValidationError on an empty grid or unknown parameter.
SweepSpec parse_sweep_spec(const Json& document);

struct SweepEntry {
  std::string system;
  SystemKind kind = SystemKind::station_based;
  EmissionBreakdown breakdown;
  EmissionBreakdown nominal;
  /// (total - nominal total) / nominal total * 100.
  double delta_pct = 0.0;
};

struct SweepPoint {
  /// Scenario name, or the numeric value formatted for display.
  std::string label;
  std::optional<double> value;
  std::vector<SweepEntry> entries;
  /// Autonomous entry as baseline against every other entry at this point.
  std::vector<ComparisonReport> comparisons;

  const SweepEntry& entry(SystemKind kind) const;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepPoint> points;

  const SweepPoint& at(std::string_view label) const;
  const SweepPoint& at(double value) const;
};

SweepResult sweep_lifetime(std::span<const SystemDefinition> systems, std::span<const double> years,
                           AllocationMode mode = AllocationMode::paper_convention);

/// Every system is moved to each utilization level.
SweepResult sweep_utilization(std::span<const SystemDefinition> systems, std::span<const double> trips_per_bike_day,
                              UtilizationScaling scaling = UtilizationScaling::fixed_trip_length,
                              AllocationMode mode = AllocationMode::paper_convention);

/// `system` with its utilization moved to `trips_per_bike_day`.
SystemDefinition with_utilization(const SystemDefinition& system, double trips_per_bike_day,
                                  UtilizationScaling scaling = UtilizationScaling::fixed_trip_length);

/// Asymptotic total as utilization grows without bound.
double utilization_floor(const SystemDefinition& system, AllocationMode mode,
                         UtilizationScaling scaling = UtilizationScaling::fixed_trip_length);

/// Utilization at which `moving` reaches `target_total`, by bisection to
/// 1e-6 g/pkm. Throws NoSolutionError (carrying the floor) when the target
/// does not exceed the asymptote.
///
/// Defaults to strict_pkm: the moving system's pkm are compared like for
/// like with the target's.
double breakeven_utilization(const SystemDefinition& moving, double target_total,
                             AllocationMode mode = AllocationMode::strict_pkm,
                             UtilizationScaling scaling = UtilizationScaling::fixed_trip_length);

/// Substitutes the rebalancing service distance of non-autonomous systems.
SweepResult sweep_rebalancing(std::span<const SystemDefinition> systems, std::span<const double> km_per_pkm,
                              AllocationMode mode = AllocationMode::paper_convention);

inline constexpr std::array<std::string_view, 3> kGridAndVanScenarios = {
    "us_grid_icev_vans", "zero_carbon_icev_vans", "zero_carbon_bev_vans"};

SweepResult sweep_grid_and_vans(std::span<const SystemDefinition> systems, std::span<const std::string> scenarios,
                                double bev_van_gco2_per_km = 0.0,
                                AllocationMode mode = AllocationMode::paper_convention);

struct AutonomyVariationSettings {
  double impact_variation = 0.25;
  double battery_variation = 0.25;
  /// Battery manufacturing intensity; required by battery_low/high.
  std::optional<double> battery_kg_per_kwh;
  double weight_low_kg = 30.8;
  double weight_high_kg = 50.0;
  /// Factors on the autonomous station rate.
  double infrastructure_low_factor = 0.5;
  double infrastructure_high_factor = 1.75;
};

inline constexpr std::array<std::string_view, 9> kAutonomyVariations = {
    "nominal",    "manuf_low",  "manuf_high",  "infra_low",  "infra_high",
    "weight_low", "weight_high", "battery_low", "battery_high"};

/// Applies one named variation to an autonomous system.
SystemDefinition apply_autonomy_variation(const SystemDefinition& base, std::string_view variation,
                                          const AutonomyVariationSettings& settings);

/// Varies the autonomous system only; other systems stay at nominal and
/// serve as comparison targets.
SweepResult sweep_autonomy_params(std::span<const SystemDefinition> systems, std::span<const std::string> variations,
                                  const AutonomyVariationSettings& settings,
                                  AllocationMode mode = AllocationMode::paper_convention);

/// Dispatches a parsed spec. `constants` supplies the alternate split and the
/// battery intensity when the spec needs them.
SweepResult run_sweep(const SweepSpec& spec, std::span<const SystemDefinition> systems,
                      const std::optional<Constants>& constants, AllocationMode mode);

}  // namespace bss
