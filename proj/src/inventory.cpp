#include "bsslca/inventory.hpp"

#include "bsslca/bundled.hpp"
#include "bsslca/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace bss {

namespace {

// Unit annotations accepted in the optional "units" block. Units are fixed;
// the block exists so that a document written for other units fails loudly.
constexpr std::array<std::pair<std::string_view, std::string_view>, 5> kUnits = {{
    {"distance", "km"},
    {"mass", "kg"},
    {"energy", "kWh"},
    {"vehicle_impact", "kgCO2e"},
    {"rate_impact", "gCO2e"},
}};

std::string join(const std::string& path, std::string_view key)
{
  return path + "/" + std::string(key);
}

void require_object(const Json& j, const std::string& path,
                    std::initializer_list<std::string_view> required,
                    std::initializer_list<std::string_view> optional = {})
{
  if (!j.is_object()) throw ValidationError(path.empty() ? "/" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                       std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) throw ValidationError(join(path, key), "unknown key");
  }
  for (auto key : required) {
    if (!j.contains(std::string(key))) throw ValidationError(join(path, key), "missing required key");
  }
}

double number(const Json& j, std::string_view key, const std::string& path)
{
  const auto& v = j.at(std::string(key));
  if (!v.is_number()) throw ValidationError(join(path, key), "expected a number");
  return v.get<double>();
}

std::string text(const Json& j, std::string_view key, const std::string& path)
{
  const auto& v = j.at(std::string(key));
  if (!v.is_string()) throw ValidationError(join(path, key), "expected a string");
  return v.get<std::string>();
}

void check_positive(double v, const std::string& path)
{
  if (!std::isfinite(v) || v <= 0.0) throw ValidationError(path, "must be a finite value > 0");
}

void check_nonnegative(double v, const std::string& path)
{
  if (!std::isfinite(v) || v < 0.0) throw ValidationError(path, "must be a finite value >= 0");
}

void check_units(const Json& units)
{
  if (!units.is_object()) throw ValidationError("/units", "expected an object");
  for (const auto& [key, value] : units.items()) {
    auto it = std::find_if(kUnits.begin(), kUnits.end(), [&](const auto& u) { return u.first == key; });
    if (it == kUnits.end()) throw ValidationError("/units/" + key, "unknown unit dimension");
    if (!value.is_string() || value.get<std::string>() != it->second) {
      throw ValidationError("/units/" + key,
                            "unit mismatch: this schema uses '" + std::string(it->second) + "'");
    }
  }
}

VehicleSpec parse_vehicle(const Json& j)
{
  const std::string p = "/vehicle";
  require_object(j, p,
                 {"weight_kg", "battery_kwh", "base_manufacturing_kgco2", "autonomy_kgco2",
                  "delivery_kgco2", "lifetime_years", "energy_kwh_per_km"});
  VehicleSpec v;
  v.weight_kg = number(j, "weight_kg", p);
  v.battery_kwh = number(j, "battery_kwh", p);
  v.base_manufacturing_kg = number(j, "base_manufacturing_kgco2", p);
  const auto& a = j.at("autonomy_kgco2");
  require_object(a, p + "/autonomy_kgco2", {"scaling", "fixed"});
  v.autonomy.lifetime_scaling_kg = number(a, "scaling", p + "/autonomy_kgco2");
  v.autonomy.fixed_kg = number(a, "fixed", p + "/autonomy_kgco2");
  v.delivery_kg = number(j, "delivery_kgco2", p);
  v.lifetime_years = number(j, "lifetime_years", p);
  v.energy_kwh_per_km = number(j, "energy_kwh_per_km", p);
  return v;
}

UsageProfile parse_usage(const Json& j)
{
  const std::string p = "/usage";
  require_object(j, p, {"daily_mileage_km", "trips_per_bike_day", "overhead_share", "charging_share"});
  UsageProfile u;
  u.daily_mileage_km = number(j, "daily_mileage_km", p);
  u.trips_per_bike_day = number(j, "trips_per_bike_day", p);
  u.overhead_share = number(j, "overhead_share", p);
  u.charging_share = number(j, "charging_share", p);
  return u;
}

std::vector<OperationalService> parse_services(const Json& j)
{
  if (!j.is_array()) throw ValidationError("/services", "expected an array");
  std::vector<OperationalService> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = "/services/" + std::to_string(i);
    require_object(j[i], p, {"name", "km_per_pkm", "gco2_per_km"});
    out.push_back({text(j[i], "name", p), number(j[i], "km_per_pkm", p), number(j[i], "gco2_per_km", p)});
  }
  return out;
}

InfrastructureSpec parse_infrastructure(const Json& j)
{
  const std::string p = "/infrastructure";
  if (!j.is_object()) throw ValidationError(p, "expected an object");
  if (j.contains("fixed_gco2_per_pkm")) {
    if (j.size() != 1) {
      throw ValidationError(p, "fixed_gco2_per_pkm is exclusive with the itemized infrastructure fields");
    }
    return FixedInfrastructure{number(j, "fixed_gco2_per_pkm", p)};
  }
  require_object(j, p, {"stations_per_pkm", "station_gco2", "road_gco2_per_pkm", "road_weight_modulation"});
  ItemizedInfrastructure it;
  it.stations_per_pkm = number(j, "stations_per_pkm", p);
  it.station_gco2 = number(j, "station_gco2", p);
  it.road_gco2_per_pkm = number(j, "road_gco2_per_pkm", p);
  it.road_weight_modulation = number(j, "road_weight_modulation", p);
  return it;
}

GridProfile parse_grid(const Json& j)
{
  require_object(j, "/grid", {"gco2_per_kwh", "label"});
  return {number(j, "gco2_per_kwh", "/grid"), text(j, "label", "/grid")};
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(SystemKind kind)
{
  switch (kind) {
    case SystemKind::station_based: return "station_based";
    case SystemKind::dockless: return "dockless";
    case SystemKind::autonomous: return "autonomous";
  }
  return "unknown";
}

std::optional<SystemKind> parse_system_kind(std::string_view text)
{
  for (auto k : {SystemKind::station_based, SystemKind::dockless, SystemKind::autonomous}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

EmissionBreakdown EmissionBreakdown::from_components(double manufacturing, double delivery, double use,
                                                     double operational, double infrastructure)
{
  EmissionBreakdown b;
  b.vehicle_manufacturing = manufacturing;
  b.vehicle_delivery = delivery;
  b.vehicle_use = use;
  b.operational_services = operational;
  b.infrastructure = infrastructure;
  b.total = manufacturing + delivery + use + operational + infrastructure;
  return b;
}

double component(const EmissionBreakdown& b, std::size_t index)
{
  switch (index) {
    case 0: return b.vehicle_manufacturing;
    case 1: return b.vehicle_delivery;
    case 2: return b.vehicle_use;
    case 3: return b.operational_services;
    case 4: return b.infrastructure;
    case 5: return b.total;
  }
  throw Error("breakdown component index out of range");
}

void validate(const SystemDefinition& s)
{
  if (s.name.empty()) throw ValidationError("/name", "must not be empty");

  const auto& v = s.vehicle;
  check_positive(v.weight_kg, "/vehicle/weight_kg");
  check_positive(v.battery_kwh, "/vehicle/battery_kwh");
  check_positive(v.base_manufacturing_kg, "/vehicle/base_manufacturing_kgco2");
  check_nonnegative(v.autonomy.lifetime_scaling_kg, "/vehicle/autonomy_kgco2/scaling");
  check_nonnegative(v.autonomy.fixed_kg, "/vehicle/autonomy_kgco2/fixed");
  check_positive(v.delivery_kg, "/vehicle/delivery_kgco2");
  check_positive(v.lifetime_years, "/vehicle/lifetime_years");
  check_positive(v.energy_kwh_per_km, "/vehicle/energy_kwh_per_km");

  const auto& u = s.usage;
  check_positive(u.daily_mileage_km, "/usage/daily_mileage_km");
  check_positive(u.trips_per_bike_day, "/usage/trips_per_bike_day");
  check_nonnegative(u.overhead_share, "/usage/overhead_share");
  check_nonnegative(u.charging_share, "/usage/charging_share");
  if (u.empty_share() >= 1.0) {
    throw ValidationError("/usage", "overhead_share + charging_share must be < 1");
  }

  for (std::size_t i = 0; i < s.services.size(); ++i) {
    const std::string p = "/services/" + std::to_string(i);
    if (s.services[i].name.empty()) throw ValidationError(p + "/name", "must not be empty");
    check_nonnegative(s.services[i].km_per_pkm, p + "/km_per_pkm");
    check_nonnegative(s.services[i].gco2_per_km, p + "/gco2_per_km");
  }

  if (const auto* it = std::get_if<ItemizedInfrastructure>(&s.infrastructure)) {
    check_nonnegative(it->stations_per_pkm, "/infrastructure/stations_per_pkm");
    check_nonnegative(it->station_gco2, "/infrastructure/station_gco2");
    check_nonnegative(it->road_gco2_per_pkm, "/infrastructure/road_gco2_per_pkm");
    check_nonnegative(it->road_weight_modulation, "/infrastructure/road_weight_modulation");
  } else {
    check_nonnegative(std::get<FixedInfrastructure>(s.infrastructure).gco2_per_pkm,
                      "/infrastructure/fixed_gco2_per_pkm");
  }

  check_nonnegative(s.grid.gco2_per_kwh, "/grid/gco2_per_kwh");

  const bool autonomous = s.kind == SystemKind::autonomous;
  if (autonomous != (v.autonomy.total_kg() > 0.0)) {
    throw ValidationError("/vehicle/autonomy_kgco2",
                          autonomous ? "autonomous systems need a nonzero autonomy impact"
                                     : "only autonomous systems carry an autonomy impact");
  }
  if (autonomous != (u.empty_share() > 0.0)) {
    throw ValidationError("/usage", autonomous ? "autonomous systems need nonzero overhead/charging shares"
                                               : "overhead/charging shares must be 0 for non-autonomous systems");
  }
  if (!autonomous && s.services.empty()) {
    throw ValidationError("/services", "station-based and dockless systems need at least one service");
  }
}

SystemDefinition load_system(const Json& d)
{
  require_object(d, "", {"name", "kind", "vehicle", "usage", "services", "infrastructure", "grid"},
                 {"comment", "units"});
  if (d.contains("units")) check_units(d.at("units"));

  SystemDefinition s;
  s.name = text(d, "name", "");
  const auto kind = parse_system_kind(text(d, "kind", ""));
  if (!kind) throw ValidationError("/kind", "expected one of station_based, dockless, autonomous");
  s.kind = *kind;
  s.vehicle = parse_vehicle(d.at("vehicle"));
  s.usage = parse_usage(d.at("usage"));
  s.services = parse_services(d.at("services"));
  s.infrastructure = parse_infrastructure(d.at("infrastructure"));
  s.grid = parse_grid(d.at("grid"));
  if (d.contains("comment")) s.comment = text(d, "comment", "");
  validate(s);
  return s;
}

SystemDefinition load_system_file(const std::string& path)
{
  const std::string content = read_file(path);
  Json doc;
  try {
    doc = Json::parse(content);
  } catch (const Json::parse_error& e) {
    throw ValidationError("/", std::string("malformed JSON in '") + path + "': " + e.what());
  }
  return load_system(doc);
}

Json to_json(const SystemDefinition& s)
{
  Json units = Json::object();
  for (const auto& [dim, unit] : kUnits) units[std::string(dim)] = std::string(unit);

  Json services = Json::array();
  for (const auto& svc : s.services) {
    services.push_back({{"name", svc.name}, {"km_per_pkm", svc.km_per_pkm}, {"gco2_per_km", svc.gco2_per_km}});
  }

  Json infra;
  if (const auto* it = std::get_if<ItemizedInfrastructure>(&s.infrastructure)) {
    infra = {{"stations_per_pkm", it->stations_per_pkm},
             {"station_gco2", it->station_gco2},
             {"road_gco2_per_pkm", it->road_gco2_per_pkm},
             {"road_weight_modulation", it->road_weight_modulation}};
  } else {
    infra = {{"fixed_gco2_per_pkm", std::get<FixedInfrastructure>(s.infrastructure).gco2_per_pkm}};
  }

  const auto& v = s.vehicle;
  Json doc = {
      {"name", s.name},
      {"kind", std::string(to_string(s.kind))},
      {"units", units},
      {"vehicle",
       {{"weight_kg", v.weight_kg},
        {"battery_kwh", v.battery_kwh},
        {"base_manufacturing_kgco2", v.base_manufacturing_kg},
        {"autonomy_kgco2", {{"scaling", v.autonomy.lifetime_scaling_kg}, {"fixed", v.autonomy.fixed_kg}}},
        {"delivery_kgco2", v.delivery_kg},
        {"lifetime_years", v.lifetime_years},
        {"energy_kwh_per_km", v.energy_kwh_per_km}}},
      {"usage",
       {{"daily_mileage_km", s.usage.daily_mileage_km},
        {"trips_per_bike_day", s.usage.trips_per_bike_day},
        {"overhead_share", s.usage.overhead_share},
        {"charging_share", s.usage.charging_share}}},
      {"services", services},
      {"infrastructure", infra},
      {"grid", {{"gco2_per_kwh", s.grid.gco2_per_kwh}, {"label", s.grid.label}}},
  };
  if (!s.comment.empty()) doc["comment"] = s.comment;
  return doc;
}

double lifetime_mileage(const SystemDefinition& s)
{
  return s.usage.daily_mileage_km * kDaysPerYear * s.vehicle.lifetime_years;
}

std::string_view nominal_file_name(SystemKind kind)
{
  switch (kind) {
    case SystemKind::station_based: return "station_based_nominal.json";
    case SystemKind::dockless: return "dockless_nominal.json";
    case SystemKind::autonomous: return "autonomous_nominal.json";
  }
  return {};
}

SystemDefinition nominal_system(SystemKind kind)
{
  return load_system(Json::parse(bundled::text(nominal_file_name(kind))));
}

std::vector<SystemDefinition> nominal_datasets()
{
  return {nominal_system(SystemKind::station_based), nominal_system(SystemKind::dockless),
          nominal_system(SystemKind::autonomous)};
}

}  // namespace bss
