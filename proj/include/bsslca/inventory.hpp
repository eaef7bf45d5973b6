#pragma once

// Typed life-cycle inventory of a bicycle-sharing system.
//
// Units are fixed throughout: distances in km, vehicle-level impacts in
// kgCO2e per vehicle, rate impacts in gCO2e per km / per pkm / per kWh.
// Values are immutable after load and freely shareable across threads.

#include "json.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bss {

using Json = nlohmann::json;

inline constexpr double kDaysPerYear = 365.0;

enum class SystemKind { station_based, dockless, autonomous };

std::string_view to_string(SystemKind kind);
std::optional<SystemKind> parse_system_kind(std::string_view text);

/// Impact of the on-board autonomy hardware. The scaling part is amortized
/// over the vehicle lifetime like the rest of the bike; the fixed part is
/// amortized over a constant reference service life and so does not react to
/// lifetime changes.
struct AutonomyImpact {
  double lifetime_scaling_kg = 0.0;
  double fixed_kg = 0.0;

  double total_kg() const { return lifetime_scaling_kg + fixed_kg; }
};

struct VehicleSpec {
  double weight_kg = 0.0;
  double battery_kwh = 0.0;
  /// Frame and battery manufacture, assembly, maintenance and disposal.
  double base_manufacturing_kg = 0.0;
  AutonomyImpact autonomy;
  /// Delivery at point of purchase.
  double delivery_kg = 0.0;
  double lifetime_years = 0.0;
  /// Well-to-wheel electricity draw per vehicle-km.
  double energy_kwh_per_km = 0.0;
};

struct UsageProfile {
  /// Vehicle-km per day, including empty relocation km for autonomous bikes.
  double daily_mileage_km = 0.0;
  double trips_per_bike_day = 0.0;
  /// Share of mileage driven empty to pick up passengers.
  double overhead_share = 0.0;
  /// Share of mileage driven empty to reach chargers.
  double charging_share = 0.0;

  double empty_share() const { return overhead_share + charging_share; }
};

struct GridProfile {
  double gco2_per_kwh = 0.0;
  std::string label;
};

struct OperationalService {
  std::string name;
  double km_per_pkm = 0.0;
  double gco2_per_km = 0.0;
};

struct ItemizedInfrastructure {
  double stations_per_pkm = 0.0;
  double station_gco2 = 0.0;
  double road_gco2_per_pkm = 0.0;
  /// Multiplier on the road term; >1 for vehicles heavier than the reference.
  double road_weight_modulation = 1.0;
};

/// Aggregate infrastructure burden used when only a system total is known.
struct FixedInfrastructure {
  double gco2_per_pkm = 0.0;
};

using InfrastructureSpec = std::variant<ItemizedInfrastructure, FixedInfrastructure>;

struct SystemDefinition {
  std::string name;
  SystemKind kind = SystemKind::station_based;
  VehicleSpec vehicle;
  UsageProfile usage;
  std::vector<OperationalService> services;
  InfrastructureSpec infrastructure = ItemizedInfrastructure{};
  GridProfile grid;
  std::string comment;
};

/// Per-passenger-km emissions split into the five life-cycle components.
struct EmissionBreakdown {
  double vehicle_manufacturing = 0.0;
  double vehicle_delivery = 0.0;
  double vehicle_use = 0.0;
  double operational_services = 0.0;
  double infrastructure = 0.0;
  double total = 0.0;

  static EmissionBreakdown from_components(double manufacturing, double delivery, double use,
                                           double operational, double infrastructure);
};

inline constexpr std::array<std::string_view, 6> kBreakdownComponents = {
    "vehicle_manufacturing", "vehicle_delivery", "vehicle_use",
    "operational_services",  "infrastructure",   "total"};

/// Component by position in kBreakdownComponents.
double component(const EmissionBreakdown& b, std::size_t index);

/// Checks every invariant; throws ValidationError naming the offending path.
void validate(const SystemDefinition& system);

/// Parses and validates a scenario document. Unknown keys are rejected.
SystemDefinition load_system(const Json& document);

/// Reads a scenario file from disk. Throws IoError if unreadable.
SystemDefinition load_system_file(const std::string& path);

/// Inverse of load_system; keys follow the scenario schema.
Json to_json(const SystemDefinition& system);

/// Total vehicle-km driven by one bike over its lifetime.
double lifetime_mileage(const SystemDefinition& system);

/// The three bundled nominal systems: station_based, dockless, autonomous.
std::vector<SystemDefinition> nominal_datasets();

/// Bundled nominal system by kind.
SystemDefinition nominal_system(SystemKind kind);

/// Bundled file name holding the nominal document for `kind`.
std::string_view nominal_file_name(SystemKind kind);

}  // namespace bss
