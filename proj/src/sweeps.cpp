#include "bsslca/sweeps.hpp"

#include "bsslca/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace bss {

std::string_view to_string(UtilizationScaling scaling)
{
  return scaling == UtilizationScaling::fixed_trip_length ? "fixed_trip_length" : "station_term_scales";
}

std::optional<UtilizationScaling> parse_utilization_scaling(std::string_view text)
{
  if (text == "fixed_trip_length") return UtilizationScaling::fixed_trip_length;
  if (text == "station_term_scales") return UtilizationScaling::station_term_scales;
  return std::nullopt;
}

namespace {

const std::vector<std::string_view> kNumericParameters = {"lifetime_years", "trips_per_bike_day",
                                                         "rebalancing_km_per_pkm", "rebalancing_m_per_pkt"};

std::string format_value(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

template <class Fn>
SweepPoint make_point(std::span<const SystemDefinition> systems, std::string label, std::optional<double> value,
                      AllocationMode mode, Fn&& vary)
{
  SweepPoint p;
  p.label = std::move(label);
  p.value = value;
  for (const auto& nominal : systems) {
    SweepEntry e;
    e.system = nominal.name;
    e.kind = nominal.kind;
    e.nominal = evaluate(nominal, mode);
    e.breakdown = evaluate(vary(nominal), mode);
    e.delta_pct = (e.breakdown.total - e.nominal.total) / e.nominal.total * 100.0;
    p.entries.push_back(std::move(e));
  }
  const auto base = std::find_if(p.entries.begin(), p.entries.end(),
                                 [](const SweepEntry& e) { return e.kind == SystemKind::autonomous; });
  if (base != p.entries.end()) {
    for (const auto& e : p.entries) {
      if (&e == &*base) continue;
      p.comparisons.push_back(compare_totals(base->system, base->breakdown.total, e.system, e.breakdown.total));
    }
  }
  return p;
}

void require_grid(std::size_t n)
{
  if (n == 0) throw ValidationError("/sweep/values", "sweep grid is empty");
}

OperationalService* rebalancing_service(SystemDefinition& s)
{
  for (auto& svc : s.services) {
    if (svc.name == "rebalancing") return &svc;
  }
  return s.services.empty() ? nullptr : &s.services.front();
}

}  // namespace

const SweepEntry& SweepPoint::entry(SystemKind kind) const
{
  for (const auto& e : entries) {
    if (e.kind == kind) return e;
  }
  throw Error("sweep point '" + label + "' has no " + std::string(to_string(kind)) + " entry");
}

const SweepPoint& SweepResult::at(std::string_view label) const
{
  for (const auto& p : points) {
    if (p.label == label) return p;
  }
  throw Error("sweep has no point '" + std::string(label) + "'");
}

const SweepPoint& SweepResult::at(double value) const
{
  for (const auto& p : points) {
    if (p.value && *p.value == value) return p;
  }
  throw Error("sweep has no point at " + format_value(value));
}

SweepResult sweep_lifetime(std::span<const SystemDefinition> systems, std::span<const double> years,
                           AllocationMode mode)
{
  require_grid(years.size());
  SweepResult r{"lifetime_years", {}};
  for (double y : years) {
    if (!(y > 0.0)) throw ValidationError("/sweep/values", "lifetime must be > 0");
    r.points.push_back(make_point(systems, format_value(y), y, mode, [&](SystemDefinition s) {
      s.vehicle.lifetime_years = y;
      return s;
    }));
  }
  return r;
}

SystemDefinition with_utilization(const SystemDefinition& system, double trips, UtilizationScaling scaling)
{
  if (!(trips > 0.0)) throw ValidationError("/usage/trips_per_bike_day", "utilization must be > 0");
  SystemDefinition s = system;
  const double ratio = trips / system.usage.trips_per_bike_day;
  s.usage.trips_per_bike_day = trips;
  s.usage.daily_mileage_km = system.usage.daily_mileage_km * ratio;
  if (scaling == UtilizationScaling::station_term_scales) {
    if (auto* it = std::get_if<ItemizedInfrastructure>(&s.infrastructure)) {
      it->stations_per_pkm /= ratio;
    } else {
      std::get<FixedInfrastructure>(s.infrastructure).gco2_per_pkm /= ratio;
    }
  }
  return s;
}

SweepResult sweep_utilization(std::span<const SystemDefinition> systems, std::span<const double> trips,
                              UtilizationScaling scaling, AllocationMode mode)
{
  require_grid(trips.size());
  SweepResult r{"trips_per_bike_day", {}};
  for (double u : trips) {
    r.points.push_back(make_point(systems, format_value(u), u, mode,
                                  [&](const SystemDefinition& s) { return with_utilization(s, u, scaling); }));
  }
  return r;
}

double utilization_floor(const SystemDefinition& system, AllocationMode mode, UtilizationScaling scaling)
{
  const auto b = evaluate(system, mode);
  const double infra = scaling == UtilizationScaling::station_term_scales
                           ? [&] {
                               // only the road term survives unbounded utilization
                               if (const auto* it = std::get_if<ItemizedInfrastructure>(&system.infrastructure)) {
                                 return it->road_gco2_per_pkm * it->road_weight_modulation;
                               }
                               return 0.0;
                             }()
                           : b.infrastructure;
  return b.vehicle_use + b.operational_services + infra;
}

double breakeven_utilization(const SystemDefinition& moving, double target, AllocationMode mode,
                             UtilizationScaling scaling)
{
  const double floor = utilization_floor(moving, mode, scaling);
  if (!(target > floor)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "target %.6g g/pkm is not above the utilization floor %.6g g/pkm", target, floor);
    throw NoSolutionError(buf, floor);
  }
  auto f = [&](double u) { return evaluate(with_utilization(moving, u, scaling), mode).total - target; };

  double lo = moving.usage.trips_per_bike_day;
  double hi = lo;
  while (f(lo) < 0.0) lo *= 0.5;
  while (f(hi) > 0.0) hi *= 2.0;

  // total is strictly decreasing in u, so f(lo) >= 0 >= f(hi)
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    mid = 0.5 * (lo + hi);
    const double v = f(mid);
    if (std::abs(v) <= 1e-9) break;
    (v > 0.0 ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return mid;
}

SweepResult sweep_rebalancing(std::span<const SystemDefinition> systems, std::span<const double> km_per_pkm,
                              AllocationMode mode)
{
  require_grid(km_per_pkm.size());
  SweepResult r{"rebalancing_km_per_pkm", {}};
  for (double km : km_per_pkm) {
    if (!(km >= 0.0)) throw ValidationError("/sweep/values", "rebalancing distance must be >= 0");
    r.points.push_back(make_point(systems, format_value(km), km, mode, [&](SystemDefinition s) {
      if (s.kind != SystemKind::autonomous) {
        if (auto* svc = rebalancing_service(s)) svc->km_per_pkm = km;
      }
      return s;
    }));
  }
  return r;
}

SweepResult sweep_grid_and_vans(std::span<const SystemDefinition> systems, std::span<const std::string> scenarios,
                                double bev_van_gco2_per_km, AllocationMode mode)
{
  require_grid(scenarios.size());
  SweepResult r{"grid_and_vans", {}};
  for (const auto& name : scenarios) {
    if (std::find(kGridAndVanScenarios.begin(), kGridAndVanScenarios.end(), name) == kGridAndVanScenarios.end()) {
      throw ValidationError("/sweep/values", "unknown grid/van scenario '" + name + "'");
    }
    r.points.push_back(make_point(systems, name, std::nullopt, mode, [&](SystemDefinition s) {
      if (name == "us_grid_icev_vans") return s;
      s.grid.gco2_per_kwh = 0.0;
      s.grid.label = "zero-carbon";
      if (name == "zero_carbon_bev_vans") {
        if (auto* svc = rebalancing_service(s)) svc->gco2_per_km = bev_van_gco2_per_km;
      }
      return s;
    }));
  }
  return r;
}

SystemDefinition apply_autonomy_variation(const SystemDefinition& base, std::string_view v,
                                          const AutonomyVariationSettings& cfg)
{
  SystemDefinition s = base;
  auto itemized = [&]() -> ItemizedInfrastructure& {
    auto* it = std::get_if<ItemizedInfrastructure>(&s.infrastructure);
    if (!it) throw Error("infrastructure variations need itemized infrastructure");
    return *it;
  };
  auto scale_autonomy = [&](double f) {
    s.vehicle.autonomy.lifetime_scaling_kg *= f;
    s.vehicle.autonomy.fixed_kg *= f;
  };
  auto set_weight = [&](double w) {
    auto& it = itemized();
    it.road_weight_modulation *= w / base.vehicle.weight_kg;
    s.vehicle.weight_kg = w;
  };
  auto scale_battery = [&](double f) {
    if (!cfg.battery_kg_per_kwh) throw Error("battery variations need a calibrated battery intensity");
    const double delta_kwh = (f - 1.0) * base.vehicle.battery_kwh;
    s.vehicle.battery_kwh += delta_kwh;
    s.vehicle.base_manufacturing_kg += *cfg.battery_kg_per_kwh * delta_kwh;
  };

  if (v == "nominal") return s;
  if (v == "manuf_low") scale_autonomy(1.0 - cfg.impact_variation);
  else if (v == "manuf_high") scale_autonomy(1.0 + cfg.impact_variation);
  else if (v == "infra_low") itemized().stations_per_pkm *= cfg.infrastructure_low_factor;
  else if (v == "infra_high") itemized().stations_per_pkm *= cfg.infrastructure_high_factor;
  else if (v == "weight_low") set_weight(cfg.weight_low_kg);
  else if (v == "weight_high") set_weight(cfg.weight_high_kg);
  else if (v == "battery_low") scale_battery(1.0 - cfg.battery_variation);
  else if (v == "battery_high") scale_battery(1.0 + cfg.battery_variation);
  else throw ValidationError("/sweep/values", "unknown autonomy variation '" + std::string(v) + "'");
  return s;
}

SweepResult sweep_autonomy_params(std::span<const SystemDefinition> systems, std::span<const std::string> variations,
                                  const AutonomyVariationSettings& settings, AllocationMode mode)
{
  require_grid(variations.size());
  SweepResult r{"autonomy", {}};
  for (const auto& name : variations) {
    r.points.push_back(make_point(systems, name, std::nullopt, mode, [&](const SystemDefinition& s) {
      return s.kind == SystemKind::autonomous ? apply_autonomy_variation(s, name, settings) : s;
    }));
  }
  return r;
}

SweepSpec parse_sweep_spec(const Json& doc)
{
  if (!doc.is_object() || !doc.contains("sweep") || !doc.at("sweep").is_object()) {
    throw ValidationError("/sweep", "expected an object");
  }
  const auto& j = doc.at("sweep");
  static const std::vector<std::string> known = {"parameter", "values", "systems", "utilization_scaling",
                                                 "autonomy_split", "bev_van_gco2_per_km", "comment"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError("/sweep/" + key, "unknown key");
    }
  }
  SweepSpec s;
  if (!j.contains("parameter") || !j.at("parameter").is_string()) {
    throw ValidationError("/sweep/parameter", "expected a string");
  }
  s.parameter = j.at("parameter").get<std::string>();
  const bool numeric =
      std::find(kNumericParameters.begin(), kNumericParameters.end(), s.parameter) != kNumericParameters.end();
  if (!numeric && s.parameter != "grid_and_vans" && s.parameter != "autonomy") {
    throw ValidationError("/sweep/parameter", "unknown sweep parameter '" + s.parameter + "'");
  }
  if (!j.contains("values") || !j.at("values").is_array()) throw ValidationError("/sweep/values", "expected an array");
  const auto& values = j.at("values");
  if (values.empty()) throw ValidationError("/sweep/values", "sweep grid is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto path = "/sweep/values/" + std::to_string(i);
    if (numeric) {
      if (!values[i].is_number()) throw ValidationError(path, "expected a number");
      s.values.push_back(values[i].get<double>());
    } else {
      if (!values[i].is_string()) throw ValidationError(path, "expected a scenario name");
      s.scenarios.push_back(values[i].get<std::string>());
    }
  }
  if (j.contains("systems")) {
    if (!j.at("systems").is_array() || j.at("systems").empty()) {
      throw ValidationError("/sweep/systems", "expected a non-empty array");
    }
    for (const auto& v : j.at("systems")) {
      if (!v.is_string()) throw ValidationError("/sweep/systems", "expected system names");
      s.systems.push_back(v.get<std::string>());
    }
  } else {
    s.systems = {"station_based", "dockless", "autonomous"};
  }
  if (j.contains("utilization_scaling")) {
    const auto& v = j.at("utilization_scaling");
    const auto parsed = v.is_string() ? parse_utilization_scaling(v.get<std::string>()) : std::nullopt;
    if (!parsed) throw ValidationError("/sweep/utilization_scaling", "expected fixed_trip_length or station_term_scales");
    s.utilization_scaling = *parsed;
  }
  if (j.contains("autonomy_split")) {
    const auto& v = j.at("autonomy_split");
    if (v == "default") s.alternate_autonomy_split = false;
    else if (v == "alternate") s.alternate_autonomy_split = true;
    else throw ValidationError("/sweep/autonomy_split", "expected default or alternate");
  }
  if (j.contains("bev_van_gco2_per_km")) {
    const auto& v = j.at("bev_van_gco2_per_km");
    if (!v.is_number() || v.get<double>() < 0.0) throw ValidationError("/sweep/bev_van_gco2_per_km", "expected a number >= 0");
    s.bev_van_gco2_per_km = v.get<double>();
  }
  return s;
}

SweepResult run_sweep(const SweepSpec& spec, std::span<const SystemDefinition> input,
                      const std::optional<Constants>& constants, AllocationMode mode)
{
  std::vector<SystemDefinition> systems(input.begin(), input.end());
  if (spec.alternate_autonomy_split) {
    if (!constants || !constants->alternate_autonomy_split) {
      throw ValidationError("/sweep/autonomy_split", "no alternate split in constants; run `bsslca calibrate`");
    }
    for (auto& s : systems) {
      if (s.kind == SystemKind::autonomous) s.vehicle.autonomy = *constants->alternate_autonomy_split;
    }
  }

  if (spec.parameter == "lifetime_years") return sweep_lifetime(systems, spec.values, mode);
  if (spec.parameter == "trips_per_bike_day") {
    return sweep_utilization(systems, spec.values, spec.utilization_scaling, mode);
  }
  if (spec.parameter == "rebalancing_km_per_pkm") return sweep_rebalancing(systems, spec.values, mode);
  if (spec.parameter == "rebalancing_m_per_pkt") {
    // metres per passenger-trip-km equal 1e-3 km/pkm
    std::vector<double> km;
    for (double m : spec.values) km.push_back(m / 1000.0);
    auto r = sweep_rebalancing(systems, km, mode);
    r.parameter = spec.parameter;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      r.points[i].value = spec.values[i];
      r.points[i].label = format_value(spec.values[i]);
    }
    return r;
  }
  if (spec.parameter == "grid_and_vans") {
    return sweep_grid_and_vans(systems, spec.scenarios, spec.bev_van_gco2_per_km, mode);
  }
  AutonomyVariationSettings settings;
  if (constants) settings.battery_kg_per_kwh = constants->battery_kg_per_kwh;
  return sweep_autonomy_params(systems, spec.scenarios, settings, mode);
}

}  // namespace bss
