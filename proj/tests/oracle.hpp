#pragma once

// Straight-line reference evaluation, written from the model equations
// without reusing any engine code. Used by the property suites.

#include "bsslca/inventory.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <variant>

namespace oracle {

struct Breakdown {
  double manufacturing, delivery, use, ops, infra, total;
};

// strict = divide by passenger-carrying km only
inline Breakdown evaluate(const bss::SystemDefinition& s, bool strict)
{
  const double loaded = strict ? 1.0 - (s.usage.overhead_share + s.usage.charging_share) : 1.0;
  const double km_per_year = s.usage.daily_mileage_km * 365.0;
  const double life_km = km_per_year * s.vehicle.lifetime_years * loaded;
  const double ref_km = km_per_year * 3.0 * loaded;

  Breakdown b{};
  b.manufacturing = 1000.0 * (s.vehicle.base_manufacturing_kg + s.vehicle.autonomy.lifetime_scaling_kg) / life_km +
                    1000.0 * s.vehicle.autonomy.fixed_kg / ref_km;
  b.delivery = 1000.0 * s.vehicle.delivery_kg / life_km;
  b.use = s.grid.gco2_per_kwh * s.vehicle.energy_kwh_per_km / loaded;
  b.ops = 0.0;
  for (const auto& svc : s.services) b.ops += svc.gco2_per_km * svc.km_per_pkm;
  if (std::holds_alternative<bss::FixedInfrastructure>(s.infrastructure)) {
    b.infra = std::get<bss::FixedInfrastructure>(s.infrastructure).gco2_per_pkm;
  } else {
    const auto& it = std::get<bss::ItemizedInfrastructure>(s.infrastructure);
    b.infra = it.station_gco2 * it.stations_per_pkm + it.road_weight_modulation * it.road_gco2_per_pkm;
  }
  b.total = b.manufacturing + b.delivery + b.use + b.ops + b.infra;
  return b;
}

// Random valid system. Kinds, infrastructure variants and autonomy splits
// are all exercised.
inline bss::SystemDefinition random_system(std::mt19937_64& rng)
{
  auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  bss::SystemDefinition s;
  const int kind = static_cast<int>(rng() % 3);
  s.kind = static_cast<bss::SystemKind>(kind);
  s.name = "random";
  s.vehicle.weight_kg = U(15, 60);
  s.vehicle.battery_kwh = U(0.2, 1.0);
  s.vehicle.base_manufacturing_kg = U(50, 400);
  s.vehicle.delivery_kg = U(1, 40);
  s.vehicle.lifetime_years = U(0.5, 8);
  s.vehicle.energy_kwh_per_km = U(0.005, 0.05);
  s.usage.daily_mileage_km = U(1, 60);
  s.usage.trips_per_bike_day = U(0.5, 12);
  s.grid = {U(0, 900), "random"};
  if (s.kind == bss::SystemKind::autonomous) {
    const double whole = U(100, 900);
    const double scaling = (rng() % 2) ? whole : U(0, whole);
    s.vehicle.autonomy = {scaling, whole - scaling};
    s.usage.overhead_share = U(0.01, 0.4);
    s.usage.charging_share = U(0, 0.05);
    if (rng() % 2) s.services.push_back({"supervision", U(0, 0.05), U(0, 300)});
  } else {
    s.services.push_back({"rebalancing", U(0, 0.2), U(0, 400)});
  }
  if (rng() % 4 == 0) {
    s.infrastructure = bss::FixedInfrastructure{U(0, 60)};
  } else {
    s.infrastructure = bss::ItemizedInfrastructure{U(1e-7, 1e-5), U(1e6, 2e7), U(0, 5), U(0.5, 2)};
  }
  return s;
}

inline double rel(double a, double b)
{
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace oracle
