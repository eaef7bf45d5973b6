#pragma once

// Back-solving unpublished model constants from published aggregates.
//
// Every constant comes from an explicit small inverse problem and carries
// the relative error with which it reproduces its anchor.

#include "bsslca/engine.hpp"
#include "bsslca/inventory.hpp"
#include "bsslca/modeshift.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bss {

struct Anchor {
  double value = 0.0;
  std::string source;
};

struct CalibrationResult {
  std::string parameter;
  double value = 0.0;
  std::string unit;
  /// Relative reproduction error of the anchor (exact solves), or the median
  /// absolute delta residual in percentage points (least-squares fits).
  double residual = 0.0;
  double tolerance = 1e-6;
  std::vector<Anchor> anchors;

  bool conforming() const { return residual <= tolerance; }
};

/// Relative error |reproduced - target| / |target|; absolute error when target is 0.
double relative_error(double reproduced, double target);

/// kWh per vehicle-km reproducing the use-phase anchor. Throws UndefinedRatioError for a zero-carbon grid.
CalibrationResult calibrate_energy_intensity(double target_use_g_per_pkm, const GridProfile& grid);

/// Service-vehicle intensity (g/km). Throws UndefinedRatioError when km_per_pkm is 0.
CalibrationResult calibrate_van_intensity(SystemKind system, double target_ops_g_per_pkm, double km_per_pkm);

/// Per-vehicle delivery impact (kg) reproducing a per-pkm delivery anchor.
CalibrationResult calibrate_delivery(double target_g_per_pkm, double lifetime_mileage_km);

/// Base (non-autonomy) manufacturing impact from a per-bike manufacturing total.
CalibrationResult calibrate_base_manufacturing(double per_bike_total_kg, double autonomy_kg);

struct InfrastructureAnchor {
  std::string system;
  double stations_per_pkm = 0.0;
  double road_weight_modulation = 1.0;
  double target_g_per_pkm = 0.0;
};

struct InfrastructureCalibration {
  CalibrationResult station_gco2;
  CalibrationResult road_gco2_per_pkm;
};

/// Solves stations_per_pkm * E + modulation * r = target for (E, r). Two
/// anchors give an exact 2x2 solve; more give a least-squares solution.
/// Throws RankDeficiencyError when fewer than two independent anchors exist.
InfrastructureCalibration calibrate_infrastructure(std::span<const InfrastructureAnchor> anchors);

/// Splits the autonomy impact of `system` into lifetime-scaling and fixed
/// parts such that shortening the lifetime to one year raises the total by
/// `target_delta_pct`.
struct AutonomySplitCalibration {
  AutonomyImpact split;
  CalibrationResult scaling;
};
AutonomySplitCalibration calibrate_autonomy_split(const SystemDefinition& system, double one_year_delta_pct);

/// Battery manufacturing intensity (kg/kWh) such that changing the battery
/// capacity by `variation` (fraction) moves the total by `delta_pct`.
CalibrationResult calibrate_battery_intensity(const SystemDefinition& system, double variation,
                                              double delta_pct);

struct RowResidual {
  std::string label;
  /// delta residuals (pp) indexed [system kind][scenario]; NaN for cells not fitted.
  ReferenceDeltas residual_pct{};
};

struct ModeShiftFit {
  std::vector<CalibrationResult> factors;
  /// Known factor sets with the fitted unknowns filled in.
  std::vector<DisplacedModeFactors> fitted;
  std::vector<RowResidual> rows;
  double median_abs_residual = 0.0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  /// Cost after every accepted step, starting with initial_cost.
  std::vector<double> cost_history;
  int iterations = 0;
};

/// Nonnegative least-squares fit of unknown displaced-mode factors against
/// reported deltas. Walking, own-bike and other non-electrifiable unknowns are
/// shared across scenarios; car, taxi and transit unknowns are fitted per
/// scenario. The search starts from zero and never leaves the nonnegative
/// orthant. Throws RankDeficiencyError when the unknowns are not identifiable.
ModeShiftFit fit_modeshift_factors(std::span<const ProfileRow> rows, std::span<const SystemTotal> systems,
                                   std::span<const DisplacedModeFactors> known, std::span<const Mode> unknown_modes);

// ---------------------------------------------------------------------------
// Whole-dataset calibration driven by an anchors document.

struct SystemAnchors {
  std::string name;
  SystemKind kind = SystemKind::station_based;
  double lifetime_years = 0.0;
  double daily_mileage_km = 0.0;
  double trips_per_bike_day = 0.0;
  double overhead_share = 0.0;
  double charging_share = 0.0;
  double weight_kg = 0.0;
  double battery_kwh = 0.0;
  double manufacturing_kg_per_bike = 0.0;
  double autonomy_kg = 0.0;
  std::optional<double> rebalancing_km_per_pkm;
  /// Itemized stations per pkm, or nullopt when the system reuses another
  /// system's infrastructure total (see infrastructure_same_as).
  std::optional<double> stations_per_pkm;
  std::string infrastructure_same_as;
  /// Published per-pkm results keyed by breakdown component name.
  std::map<std::string, double> targets;
  std::string comment;
};

struct AnchorSet {
  GridProfile grid;
  double reference_weight_kg = 0.0;
  std::vector<SystemAnchors> systems;
  std::string source;

  std::optional<double> autonomous_one_year_delta_pct;
  std::optional<double> battery_variation;
  std::optional<double> battery_delta_pct;

  std::vector<ProfileRow> profiles;
  std::vector<DisplacedModeFactors> known_factors;
  std::vector<Mode> unknown_modes;
};

/// Resolves the profiles table named in an anchors document.
using ProfileLoader = std::function<std::vector<ProfileRow>(const std::string& reference, ShareSumCheck check)>;

/// Parses an anchors document; throws ValidationError with a JSON pointer.
AnchorSet parse_anchors(const Json& document, const ProfileLoader& load_profiles);

/// Bundled anchors with the bundled profile table.
AnchorSet bundled_anchors();

struct CalibrationBundle {
  std::vector<CalibrationResult> results;
  /// Fully calibrated systems, in anchor order. Systems whose calibration
  /// failed are absent.
  std::vector<SystemDefinition> systems;
  std::optional<AutonomyImpact> alternate_autonomy_split;
  std::optional<double> battery_kg_per_kwh;
  std::optional<ModeShiftFit> modeshift;
  /// One message per failed sub-problem.
  std::vector<std::string> errors;

  bool complete() const;
};

CalibrationBundle calibrate_all(const AnchorSet& anchors);

/// Constants file: every CalibrationResult plus the schema fragments it patches.
Json constants_to_json(const CalibrationBundle& bundle);

/// The parts of a constants file consumed by sweeps and mode-shift analysis.
struct Constants {
  std::vector<DisplacedModeFactors> factor_sets;
  std::optional<double> battery_kg_per_kwh;
  std::optional<AutonomyImpact> alternate_autonomy_split;
};

/// Throws ValidationError when a required section is missing or malformed.
Constants parse_constants(const Json& document);

/// Bundled constants file.
Constants bundled_constants();

}  // namespace bss
