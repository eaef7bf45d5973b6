#include "bsslca/engine.hpp"

#include "bsslca/error.hpp"

#include <numeric>

namespace bss {

std::string_view to_string(AllocationMode mode)
{
  return mode == AllocationMode::paper_convention ? "paper" : "strict";
}

std::optional<AllocationMode> parse_allocation_mode(std::string_view text)
{
  if (text == "paper" || text == "paper_convention") return AllocationMode::paper_convention;
  if (text == "strict" || text == "strict_pkm") return AllocationMode::strict_pkm;
  return std::nullopt;
}

namespace {

// Fraction of vehicle-km that carries a passenger under the given mode.
double loaded_fraction(const SystemDefinition& s, AllocationMode mode)
{
  return mode == AllocationMode::strict_pkm ? 1.0 - s.usage.empty_share() : 1.0;
}

}  // namespace

double allocation_distance_km(const SystemDefinition& s, AllocationMode mode)
{
  return lifetime_mileage(s) * loaded_fraction(s, mode);
}

double vehicle_manufacturing_component(const SystemDefinition& s, AllocationMode mode)
{
  const auto& v = s.vehicle;
  const double scaling = (v.base_manufacturing_kg + v.autonomy.lifetime_scaling_kg) * 1000.0 /
                         allocation_distance_km(s, mode);
  if (v.autonomy.fixed_kg == 0.0) return scaling;
  const double reference_km = s.usage.daily_mileage_km * kDaysPerYear * kAutonomyReferenceLifetimeYears *
                              loaded_fraction(s, mode);
  return scaling + v.autonomy.fixed_kg * 1000.0 / reference_km;
}

double vehicle_delivery_component(const SystemDefinition& s, AllocationMode mode)
{
  return s.vehicle.delivery_kg * 1000.0 / allocation_distance_km(s, mode);
}

double vehicle_use_component(const SystemDefinition& s, AllocationMode mode)
{
  return s.vehicle.energy_kwh_per_km * s.grid.gco2_per_kwh / loaded_fraction(s, mode);
}

double operational_component(const SystemDefinition& s)
{
  return std::accumulate(s.services.begin(), s.services.end(), 0.0,
                         [](double acc, const OperationalService& svc) {
                           return acc + svc.km_per_pkm * svc.gco2_per_km;
                         });
}

double infrastructure_component(const SystemDefinition& s)
{
  if (const auto* fixed = std::get_if<FixedInfrastructure>(&s.infrastructure)) return fixed->gco2_per_pkm;
  const auto& it = std::get<ItemizedInfrastructure>(s.infrastructure);
  return it.stations_per_pkm * it.station_gco2 + it.road_gco2_per_pkm * it.road_weight_modulation;
}

EmissionBreakdown evaluate(const SystemDefinition& s, AllocationMode mode)
{
  return EmissionBreakdown::from_components(vehicle_manufacturing_component(s, mode),
                                            vehicle_delivery_component(s, mode),
                                            vehicle_use_component(s, mode), operational_component(s),
                                            infrastructure_component(s));
}

ComparisonReport compare_totals(std::string baseline, double baseline_total, std::string other,
                                double other_total)
{
  if (other_total == 0.0) {
    throw UndefinedRatioError("cannot compare against '" + other + "': its total is zero");
  }
  ComparisonReport r;
  r.baseline = std::move(baseline);
  r.other = std::move(other);
  r.absolute_difference = other_total - baseline_total;
  r.relative_difference = r.absolute_difference / other_total;
  return r;
}

ComparisonReport compare(const SystemDefinition& baseline, const SystemDefinition& other, AllocationMode mode)
{
  return compare_totals(baseline.name, evaluate(baseline, mode).total, other.name, evaluate(other, mode).total);
}

}  // namespace bss
