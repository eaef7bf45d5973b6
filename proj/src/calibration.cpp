#include "bsslca/calibration.hpp"

#include "bsslca/bundled.hpp"
#include "bsslca/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace bss {

double relative_error(double reproduced, double target)
{
  const double diff = std::abs(reproduced - target);
  return target == 0.0 ? diff : diff / std::abs(target);
}

CalibrationResult calibrate_energy_intensity(double target_use_g_per_pkm, const GridProfile& grid)
{
  if (grid.gco2_per_kwh <= 0.0) {
    throw UndefinedRatioError("grid '" + grid.label + "' has zero carbon intensity; energy intensity is not identifiable");
  }
  CalibrationResult r;
  r.parameter = "vehicle.energy_kwh_per_km";
  r.unit = "kWh/km";
  r.value = target_use_g_per_pkm / grid.gco2_per_kwh;
  r.residual = relative_error(r.value * grid.gco2_per_kwh, target_use_g_per_pkm);
  r.anchors = {{target_use_g_per_pkm, "vehicle use, g/pkm"}, {grid.gco2_per_kwh, "grid intensity " + grid.label}};
  return r;
}

CalibrationResult calibrate_van_intensity(SystemKind system, double target_ops_g_per_pkm, double km_per_pkm)
{
  if (km_per_pkm <= 0.0) {
    throw UndefinedRatioError("service km per pkm is zero for " + std::string(to_string(system)));
  }
  CalibrationResult r;
  r.parameter = "services.rebalancing.gco2_per_km";
  r.unit = "g/km";
  r.value = target_ops_g_per_pkm / km_per_pkm;
  r.residual = relative_error(r.value * km_per_pkm, target_ops_g_per_pkm);
  r.anchors = {{target_ops_g_per_pkm, "operational services, g/pkm"}, {km_per_pkm, "rebalancing km/pkm"}};
  return r;
}

CalibrationResult calibrate_delivery(double target_g_per_pkm, double lifetime_mileage_km)
{
  if (lifetime_mileage_km <= 0.0) throw UndefinedRatioError("lifetime mileage must be positive");
  CalibrationResult r;
  r.parameter = "vehicle.delivery_kgco2";
  r.unit = "kgCO2e";
  r.value = target_g_per_pkm * lifetime_mileage_km / 1000.0;
  r.residual = relative_error(r.value * 1000.0 / lifetime_mileage_km, target_g_per_pkm);
  r.anchors = {{target_g_per_pkm, "vehicle delivery, g/pkm"}, {lifetime_mileage_km, "lifetime mileage, km"}};
  return r;
}

CalibrationResult calibrate_base_manufacturing(double per_bike_total_kg, double autonomy_kg)
{
  CalibrationResult r;
  r.parameter = "vehicle.base_manufacturing_kgco2";
  r.unit = "kgCO2e";
  r.value = per_bike_total_kg - autonomy_kg;
  r.residual = relative_error(r.value + autonomy_kg, per_bike_total_kg);
  r.anchors = {{per_bike_total_kg, "manufacturing per bike, kgCO2e"}, {autonomy_kg, "autonomy components, kgCO2e"}};
  return r;
}

InfrastructureCalibration calibrate_infrastructure(std::span<const InfrastructureAnchor> anchors)
{
  if (anchors.size() < 2) {
    throw RankDeficiencyError("infrastructure calibration needs two anchors with itemized stations; got " +
                              std::to_string(anchors.size()));
  }
  // Normal equations of  rate * E + modulation * r = target.  With exactly two
  // anchors this is the 2x2 system itself, solved by elimination.
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  double scale_rate = 0, scale_mod = 0;
  if (anchors.size() == 2) {
    a11 = anchors[0].stations_per_pkm;
    a12 = anchors[0].road_weight_modulation;
    b1 = anchors[0].target_g_per_pkm;
    a22 = anchors[1].road_weight_modulation;
    const double a21 = anchors[1].stations_per_pkm;
    b2 = anchors[1].target_g_per_pkm;
    const double det = a11 * a22 - a12 * a21;
    scale_rate = std::max(std::abs(a11), std::abs(a21));
    scale_mod = std::max(std::abs(a12), std::abs(a22));
    if (std::abs(det) <= 1e-12 * scale_rate * scale_mod || scale_rate == 0.0) {
      throw RankDeficiencyError("infrastructure anchors are proportional; station and road terms are not separable");
    }
    const double station = (b1 * a22 - a12 * b2) / det;
    const double road = (a11 * b2 - b1 * a21) / det;
    a11 = station;  // reuse as outputs below
    a12 = road;
  } else {
    double s_rr = 0, s_rm = 0, s_mm = 0, s_rt = 0, s_mt = 0;
    for (const auto& a : anchors) {
      s_rr += a.stations_per_pkm * a.stations_per_pkm;
      s_rm += a.stations_per_pkm * a.road_weight_modulation;
      s_mm += a.road_weight_modulation * a.road_weight_modulation;
      s_rt += a.stations_per_pkm * a.target_g_per_pkm;
      s_mt += a.road_weight_modulation * a.target_g_per_pkm;
    }
    const double det = s_rr * s_mm - s_rm * s_rm;
    if (std::abs(det) <= 1e-12 * s_rr * s_mm || s_rr == 0.0) {
      throw RankDeficiencyError("infrastructure anchors are proportional; station and road terms are not separable");
    }
    a11 = (s_rt * s_mm - s_rm * s_mt) / det;
    a12 = (s_rr * s_mt - s_rm * s_rt) / det;
  }

  const double station = a11;
  const double road = a12;
  double worst = 0.0;
  std::vector<Anchor> used;
  for (const auto& a : anchors) {
    const double reproduced = a.stations_per_pkm * station + a.road_weight_modulation * road;
    worst = std::max(worst, relative_error(reproduced, a.target_g_per_pkm));
    used.push_back({a.target_g_per_pkm, "infrastructure, g/pkm, " + a.system});
  }

  InfrastructureCalibration out;
  out.station_gco2 = {"infrastructure.station_gco2", station, "gCO2e/station", worst, 1e-6, used};
  out.road_gco2_per_pkm = {"infrastructure.road_gco2_per_pkm", road, "g/pkm", worst, 1e-6, used};
  if (road < 0.0 || station < 0.0) {
    // Negative impacts are not physical; flag instead of clamping.
    out.station_gco2.residual = out.road_gco2_per_pkm.residual = std::numeric_limits<double>::infinity();
  }
  return out;
}

AutonomySplitCalibration calibrate_autonomy_split(const SystemDefinition& system, double one_year_delta_pct)
{
  const double whole = system.vehicle.autonomy.total_kg();
  if (whole <= 0.0) throw Error("system '" + system.name + "' has no autonomy impact to split");

  // total(1 yr) - (1 + t) * total(nominal) is affine in the scaling part.
  const double t = one_year_delta_pct / 100.0;
  auto mismatch = [&](double scaling) {
    SystemDefinition s = system;
    s.vehicle.autonomy = {scaling, whole - scaling};
    const double nominal = evaluate(s).total;
    s.vehicle.lifetime_years = 1.0;
    return evaluate(s).total - (1.0 + t) * nominal;
  };
  const double f0 = mismatch(0.0);
  const double f1 = mismatch(whole);
  if (f1 == f0) throw RankDeficiencyError("lifetime response does not depend on the autonomy split");
  const double scaling = -f0 / (f1 - f0) * whole;

  AutonomySplitCalibration out;
  out.split = {scaling, whole - scaling};
  SystemDefinition s = system;
  s.vehicle.autonomy = out.split;
  const double nominal = evaluate(s).total;
  s.vehicle.lifetime_years = 1.0;
  const double reproduced = (evaluate(s).total / nominal - 1.0) * 100.0;

  out.scaling.parameter = "vehicle.autonomy_kgco2.scaling (alternate split)";
  out.scaling.unit = "kgCO2e";
  out.scaling.value = scaling;
  out.scaling.residual = relative_error(reproduced, one_year_delta_pct);
  out.scaling.anchors = {{one_year_delta_pct, "total change at 1-year lifetime, %"},
                         {whole, "autonomy components, kgCO2e"}};
  if (scaling < 0.0 || scaling > whole) out.scaling.residual = std::numeric_limits<double>::infinity();
  return out;
}

CalibrationResult calibrate_battery_intensity(const SystemDefinition& system, double variation, double delta_pct)
{
  const double delta_kwh = variation * system.vehicle.battery_kwh;
  if (delta_kwh == 0.0) throw UndefinedRatioError("battery variation is zero");
  const double nominal = evaluate(system).total;
  const double delta_g_per_pkm = delta_pct / 100.0 * nominal;
  const double intensity = delta_g_per_pkm * lifetime_mileage(system) / 1000.0 / delta_kwh;

  SystemDefinition varied = system;
  varied.vehicle.battery_kwh += delta_kwh;
  varied.vehicle.base_manufacturing_kg += intensity * delta_kwh;
  const double reproduced = (evaluate(varied).total / nominal - 1.0) * 100.0;

  CalibrationResult r;
  r.parameter = "sensitivity.battery_kgco2_per_kwh";
  r.unit = "kgCO2e/kWh";
  r.value = intensity;
  r.residual = relative_error(reproduced, delta_pct);
  r.anchors = {{delta_pct, "total change for battery capacity variation, %"}, {variation, "capacity variation"}};
  return r;
}

// ---------------------------------------------------------------------------
// Mode-shift factor fit

namespace {

struct FitParameter {
  Mode mode;
  std::optional<Scenario> scenario;  // nullopt: shared across scenarios
};

struct FitCell {
  std::size_t row;
  std::size_t factor_set;
  SystemKind system;
  double total;
  double reference;
};

}  // namespace

ModeShiftFit fit_modeshift_factors(std::span<const ProfileRow> rows, std::span<const SystemTotal> systems,
                                   std::span<const DisplacedModeFactors> known, std::span<const Mode> unknown_modes)
{
  if (rows.size() < 2) throw RankDeficiencyError("mode-shift fit needs at least two profile rows");
  if (known.empty() || systems.empty()) throw RankDeficiencyError("mode-shift fit needs factor sets and systems");
  for (const auto& r : rows) {
    if (!r.reference) throw ValidationError(r.profile.label, "row has no reference deltas to fit against");
  }

  std::vector<FitParameter> params;
  for (auto m : unknown_modes) {
    if (m == Mode::new_trip) throw Error("the new_trip factor is fixed at zero and cannot be fitted");
    const auto used = std::count_if(rows.begin(), rows.end(), [&](const ProfileRow& r) { return r.profile.share(m) > 0; });
    if (used < 2) {
      throw RankDeficiencyError("mode '" + std::string(to_string(m)) + "' has nonzero shares in fewer than two rows");
    }
    if (is_electrifiable(m)) {
      for (const auto& f : known) params.push_back({m, f.scenario});
    } else {
      params.push_back({m, std::nullopt});
    }
  }
  const auto n = static_cast<Eigen::Index>(params.size());

  std::vector<FitCell> cells;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t f = 0; f < known.size(); ++f) {
      for (const auto& sys : systems) {
        const double ref = (*rows[r].reference)[static_cast<std::size_t>(sys.kind)]
                                               [static_cast<std::size_t>(known[f].scenario)];
        cells.push_back({r, f, sys.kind, sys.total, ref});
      }
    }
  }
  const auto m_cells = static_cast<Eigen::Index>(cells.size());

  auto applies = [&](const FitParameter& p, std::size_t factor_set) {
    return !p.scenario || *p.scenario == known[factor_set].scenario;
  };

  // Identifiability of the linear share structure.
  Eigen::MatrixXd shares(m_cells, n);
  for (Eigen::Index i = 0; i < m_cells; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& c = cells[static_cast<std::size_t>(i)];
      const auto& p = params[static_cast<std::size_t>(j)];
      shares(i, j) = applies(p, c.factor_set) ? rows[c.row].profile.share(p.mode) : 0.0;
    }
  }
  if (n > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(shares);
    qr.setThreshold(1e-10);
    if (qr.rank() < n) throw RankDeficiencyError("unknown mode factors are not identifiable from the given rows");
  }

  auto factor_sets_for = [&](const Eigen::VectorXd& x) {
    std::vector<DisplacedModeFactors> sets(known.begin(), known.end());
    for (std::size_t f = 0; f < sets.size(); ++f) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto& p = params[static_cast<std::size_t>(j)];
        if (applies(p, f)) sets[f].g_per_pkm[static_cast<std::size_t>(p.mode)] = x(j);
      }
    }
    return sets;
  };

  // Residuals (pp) and Jacobian at x.
  auto linearize = [&](const Eigen::VectorXd& x, Eigen::VectorXd& res, Eigen::MatrixXd* jac) {
    const auto sets = factor_sets_for(x);
    res.resize(m_cells);
    if (jac) jac->resize(m_cells, n);
    for (Eigen::Index i = 0; i < m_cells; ++i) {
      const auto& c = cells[static_cast<std::size_t>(i)];
      const double mix = displaced_intensity(rows[c.row].profile, sets[c.factor_set]);
      if (mix <= 0.0) throw UndefinedRatioError("displaced intensity vanished for '" + rows[c.row].profile.label + "'");
      res(i) = impact_delta(c.total, mix) - c.reference;
      if (jac) {
        for (Eigen::Index j = 0; j < n; ++j) (*jac)(i, j) = -100.0 * c.total / (mix * mix) * shares(i, j);
      }
    }
  };
  auto cost_of = [](const Eigen::VectorXd& r) { return 0.5 * r.squaredNorm(); };

  ModeShiftFit fit;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd res;
  Eigen::MatrixXd jac;
  linearize(x, res, &jac);
  double cost = cost_of(res);
  fit.initial_cost = cost;
  fit.cost_history.push_back(cost);

  // Projected Levenberg-Marquardt. Coordinates pinned at zero whose gradient
  // points outward are frozen for the step.
  double lambda = 1e-3;
  constexpr int kMaxIterations = 500;
  int iter = 0;
  bool converged = false;
  for (; iter < kMaxIterations && n > 0 && !converged; ++iter) {
    const Eigen::VectorXd grad = jac.transpose() * res;
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(x(j) <= 0.0 && grad(j) > 0.0)) free.push_back(j);
    }
    double projected_grad = 0.0;
    for (auto j : free) projected_grad = std::max(projected_grad, std::abs(grad(j)));
    if (free.empty() || projected_grad <= 1e-10 * (1.0 + cost)) break;

    const auto k = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd h(k, k);
    Eigen::VectorXd g(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      g(a) = grad(free[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b < k; ++b) {
        h(a, b) = jac.col(free[static_cast<std::size_t>(a)]).dot(jac.col(free[static_cast<std::size_t>(b)]));
      }
    }

    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd damped = h;
      for (Eigen::Index a = 0; a < k; ++a) damped(a, a) += lambda * std::max(h(a, a), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      Eigen::VectorXd candidate = x;
      for (Eigen::Index a = 0; a < k; ++a) {
        const auto j = free[static_cast<std::size_t>(a)];
        candidate(j) = std::max(0.0, x(j) + step(a));
      }
      Eigen::VectorXd cand_res;
      linearize(candidate, cand_res, nullptr);
      const double cand_cost = cost_of(cand_res);
      if (cand_cost < cost) {
        const double step_norm = (candidate - x).norm();
        x = candidate;
        const double improvement = cost - cand_cost;
        cost = cand_cost;
        linearize(x, res, &jac);
        fit.cost_history.push_back(cost);
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        converged = improvement <= 1e-13 * cost || step_norm <= 1e-11 * (1.0 + x.norm());
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) break;
  }
  fit.iterations = iter;
  fit.final_cost = cost;
  fit.fitted = factor_sets_for(x);

  // Diagnostics.
  std::vector<double> all;
  fit.rows.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    fit.rows[r].label = rows[r].profile.label;
    for (auto& per_system : fit.rows[r].residual_pct) per_system.fill(std::numeric_limits<double>::quiet_NaN());
  }
  for (Eigen::Index i = 0; i < m_cells; ++i) {
    const auto& c = cells[static_cast<std::size_t>(i)];
    fit.rows[c.row].residual_pct[static_cast<std::size_t>(c.system)]
                                [static_cast<std::size_t>(known[c.factor_set].scenario)] = res(i);
    all.push_back(res(i));
  }
  fit.median_abs_residual = median_abs(all);

  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& p = params[static_cast<std::size_t>(j)];
    CalibrationResult cr;
    cr.parameter = "modeshift." + std::string(to_string(p.mode));
    if (p.scenario) cr.parameter += "." + std::string(to_string(*p.scenario));
    cr.unit = "g/pkm";
    cr.value = x(j);
    cr.residual = fit.median_abs_residual;
    cr.tolerance = 5.0;
    cr.anchors.push_back({static_cast<double>(cells.size()), "reported net-impact deltas fitted (cells)"});
    fit.factors.push_back(std::move(cr));
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Anchors document

namespace {

double num(const Json& j, const std::string& key, const std::string& path)
{
  if (!j.is_object() || !j.contains(key)) throw ValidationError(path + "/" + key, "missing required key");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ValidationError(path + "/" + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(path + "/" + key, "must be finite");
  return d;
}

std::string str(const Json& j, const std::string& key, const std::string& path)
{
  if (!j.is_object() || !j.contains(key)) throw ValidationError(path + "/" + key, "missing required key");
  const auto& v = j.at(key);
  if (!v.is_string()) throw ValidationError(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

ModeVector parse_mode_map(const Json& j, const std::string& path)
{
  if (!j.is_object()) throw ValidationError(path, "expected an object");
  ModeVector v{};
  for (const auto& [key, value] : j.items()) {
    const auto m = parse_mode(key);
    if (!m) throw ValidationError(path + "/" + key, "unknown mode");
    if (!value.is_number()) throw ValidationError(path + "/" + key, "expected a number");
    v[static_cast<std::size_t>(*m)] = value.get<double>();
  }
  return v;
}

Json mode_map_to_json(const ModeVector& v)
{
  Json j = Json::object();
  for (auto m : kAllModes) j[std::string(to_string(m))] = v[static_cast<std::size_t>(m)];
  return j;
}

}  // namespace

AnchorSet parse_anchors(const Json& d, const ProfileLoader& load_profiles)
{
  if (!d.is_object()) throw ValidationError("/", "expected an object");
  AnchorSet a;
  if (d.contains("source")) a.source = str(d, "source", "");
  const auto& grid = d.contains("grid") ? d.at("grid") : throw ValidationError("/grid", "missing required key");
  a.grid = {num(grid, "gco2_per_kwh", "/grid"), str(grid, "label", "/grid")};
  a.reference_weight_kg = num(d, "reference_weight_kg", "");
  if (a.reference_weight_kg <= 0.0) throw ValidationError("/reference_weight_kg", "must be > 0");

  if (!d.contains("systems") || !d.at("systems").is_array()) throw ValidationError("/systems", "expected an array");
  const auto& systems = d.at("systems");
  for (std::size_t i = 0; i < systems.size(); ++i) {
    const std::string p = "/systems/" + std::to_string(i);
    const auto& s = systems[i];
    SystemAnchors sa;
    sa.name = str(s, "name", p);
    const auto kind = parse_system_kind(str(s, "kind", p));
    if (!kind) throw ValidationError(p + "/kind", "unknown system kind");
    sa.kind = *kind;
    sa.lifetime_years = num(s, "lifetime_years", p);
    sa.daily_mileage_km = num(s, "daily_mileage_km", p);
    sa.trips_per_bike_day = num(s, "trips_per_bike_day", p);
    sa.overhead_share = num(s, "overhead_share", p);
    sa.charging_share = num(s, "charging_share", p);
    sa.weight_kg = num(s, "weight_kg", p);
    sa.battery_kwh = num(s, "battery_kwh", p);
    sa.manufacturing_kg_per_bike = num(s, "manufacturing_kgco2_per_bike", p);
    sa.autonomy_kg = num(s, "autonomy_kgco2", p);
    if (s.contains("rebalancing_km_per_pkm")) sa.rebalancing_km_per_pkm = num(s, "rebalancing_km_per_pkm", p);
    if (!s.contains("infrastructure")) throw ValidationError(p + "/infrastructure", "missing required key");
    const auto& infra = s.at("infrastructure");
    if (infra.contains("stations_per_pkm")) {
      sa.stations_per_pkm = num(infra, "stations_per_pkm", p + "/infrastructure");
    } else {
      sa.infrastructure_same_as = str(infra, "same_total_as", p + "/infrastructure");
    }
    if (!s.contains("targets") || !s.at("targets").is_object()) {
      throw ValidationError(p + "/targets", "expected an object");
    }
    for (const auto& [key, value] : s.at("targets").items()) {
      if (std::find(kBreakdownComponents.begin(), kBreakdownComponents.end(), key) == kBreakdownComponents.end()) {
        throw ValidationError(p + "/targets/" + key, "unknown breakdown component");
      }
      sa.targets[key] = num(s.at("targets"), key, p + "/targets");
    }
    if (s.contains("comment")) sa.comment = str(s, "comment", p);
    a.systems.push_back(std::move(sa));
  }

  if (d.contains("sensitivity")) {
    const auto& s = d.at("sensitivity");
    if (s.contains("autonomous_one_year_delta_pct")) {
      a.autonomous_one_year_delta_pct = num(s, "autonomous_one_year_delta_pct", "/sensitivity");
    }
    if (s.contains("battery_variation")) {
      a.battery_variation = num(s, "battery_variation", "/sensitivity");
      a.battery_delta_pct = num(s, "battery_delta_pct", "/sensitivity");
    }
  }

  if (d.contains("modeshift")) {
    const auto& m = d.at("modeshift");
    auto check = ShareSumCheck::reject;
    if (m.contains("share_sum_check")) {
      const auto parsed = parse_share_sum_check(str(m, "share_sum_check", "/modeshift"));
      if (!parsed) throw ValidationError("/modeshift/share_sum_check", "expected reject or warn");
      check = *parsed;
    }
    a.profiles = load_profiles(str(m, "profiles", "/modeshift"), check);
    if (!m.contains("known") || !m.at("known").is_object()) {
      throw ValidationError("/modeshift/known", "expected an object");
    }
    for (const auto& [key, value] : m.at("known").items()) {
      const auto sc = parse_scenario(key);
      if (!sc) throw ValidationError("/modeshift/known/" + key, "unknown scenario");
      a.known_factors.push_back({*sc, parse_mode_map(value, "/modeshift/known/" + key)});
    }
    std::sort(a.known_factors.begin(), a.known_factors.end(),
              [](const auto& l, const auto& r) { return l.scenario < r.scenario; });
    if (m.contains("unknown_modes")) {
      for (const auto& u : m.at("unknown_modes")) {
        const auto mode = u.is_string() ? parse_mode(u.get<std::string>()) : std::nullopt;
        if (!mode) throw ValidationError("/modeshift/unknown_modes", "unknown mode");
        a.unknown_modes.push_back(*mode);
      }
    }
  }
  return a;
}

AnchorSet bundled_anchors()
{
  return parse_anchors(Json::parse(bundled::text("anchors.json")), [](const std::string& ref, ShareSumCheck check) {
    return parse_profiles_csv(bundled::text(ref), check);
  });
}

bool CalibrationBundle::complete() const
{
  if (!errors.empty()) return false;
  return std::all_of(results.begin(), results.end(), [](const CalibrationResult& r) { return r.conforming(); });
}

namespace {

CalibrationResult named(CalibrationResult r, const std::string& system)
{
  r.parameter = system + "." + r.parameter;
  return r;
}

double target_of(const SystemAnchors& s, const std::string& key)
{
  auto it = s.targets.find(key);
  if (it == s.targets.end()) throw ValidationError(s.name + "/targets/" + key, "missing anchor");
  return it->second;
}

}  // namespace

CalibrationBundle calibrate_all(const AnchorSet& anchors)
{
  CalibrationBundle out;

  // Infrastructure constants are shared by every itemized system.
  std::optional<InfrastructureCalibration> infra;
  {
    std::vector<InfrastructureAnchor> ia;
    for (const auto& s : anchors.systems) {
      if (!s.stations_per_pkm) continue;
      try {
        ia.push_back({s.name, *s.stations_per_pkm, s.weight_kg / anchors.reference_weight_kg,
                      target_of(s, "infrastructure")});
      } catch (const Error& e) {
        out.errors.push_back(e.what());
      }
    }
    try {
      infra = calibrate_infrastructure(ia);
      out.results.push_back(infra->station_gco2);
      out.results.push_back(infra->road_gco2_per_pkm);
    } catch (const Error& e) {
      out.errors.push_back(std::string("infrastructure: ") + e.what());
    }
  }

  std::map<std::string, double> infra_totals;
  std::vector<std::pair<const SystemAnchors*, SystemDefinition>> pending;
  for (const auto& sa : anchors.systems) {
    try {
      SystemDefinition s;
      s.name = sa.name;
      s.kind = sa.kind;
      s.comment = sa.comment;
      s.grid = anchors.grid;
      s.usage = {sa.daily_mileage_km, sa.trips_per_bike_day, sa.overhead_share, sa.charging_share};
      s.vehicle.weight_kg = sa.weight_kg;
      s.vehicle.battery_kwh = sa.battery_kwh;
      s.vehicle.lifetime_years = sa.lifetime_years;
      s.vehicle.autonomy = {sa.autonomy_kg, 0.0};

      const auto base = calibrate_base_manufacturing(sa.manufacturing_kg_per_bike, sa.autonomy_kg);
      s.vehicle.base_manufacturing_kg = base.value;
      out.results.push_back(named(base, sa.name));

      const auto delivery = calibrate_delivery(target_of(sa, "vehicle_delivery"), lifetime_mileage(s));
      s.vehicle.delivery_kg = delivery.value;
      out.results.push_back(named(delivery, sa.name));

      const auto energy = calibrate_energy_intensity(target_of(sa, "vehicle_use"), anchors.grid);
      s.vehicle.energy_kwh_per_km = energy.value;
      out.results.push_back(named(energy, sa.name));

      if (sa.rebalancing_km_per_pkm) {
        const auto van = calibrate_van_intensity(sa.kind, target_of(sa, "operational_services"),
                                                 *sa.rebalancing_km_per_pkm);
        s.services.push_back({"rebalancing", *sa.rebalancing_km_per_pkm, van.value});
        out.results.push_back(named(van, sa.name));
      }

      if (sa.stations_per_pkm) {
        if (!infra) throw Error(sa.name + ": infrastructure constants unavailable");
        s.infrastructure = ItemizedInfrastructure{*sa.stations_per_pkm, infra->station_gco2.value,
                                                  infra->road_gco2_per_pkm.value,
                                                  sa.weight_kg / anchors.reference_weight_kg};
        infra_totals[sa.name] = infrastructure_component(s);
      }
      pending.emplace_back(&sa, std::move(s));
    } catch (const Error& e) {
      out.errors.push_back(sa.name + ": " + e.what());
    }
  }

  for (auto& [sa, s] : pending) {
    if (!sa->stations_per_pkm) {
      auto it = infra_totals.find(sa->infrastructure_same_as);
      if (it == infra_totals.end()) {
        out.errors.push_back(sa->name + ": no itemized infrastructure for '" + sa->infrastructure_same_as + "'");
        continue;
      }
      s.infrastructure = FixedInfrastructure{it->second};
    }
    try {
      validate(s);
      out.systems.push_back(s);
    } catch (const Error& e) {
      out.errors.push_back(sa->name + ": " + e.what());
    }
  }

  const auto autonomous = std::find_if(out.systems.begin(), out.systems.end(),
                                       [](const SystemDefinition& s) { return s.kind == SystemKind::autonomous; });
  if (autonomous != out.systems.end()) {
    try {
      if (anchors.autonomous_one_year_delta_pct) {
        auto split = calibrate_autonomy_split(*autonomous, *anchors.autonomous_one_year_delta_pct);
        out.alternate_autonomy_split = split.split;
        out.results.push_back(named(split.scaling, autonomous->name));
      }
      if (anchors.battery_variation && anchors.battery_delta_pct) {
        auto battery = calibrate_battery_intensity(*autonomous, *anchors.battery_variation, *anchors.battery_delta_pct);
        out.battery_kg_per_kwh = battery.value;
        out.results.push_back(battery);
      }
    } catch (const Error& e) {
      out.errors.push_back(std::string("sensitivity: ") + e.what());
    }
  }

  if (!anchors.profiles.empty() && !anchors.known_factors.empty()) {
    try {
      std::vector<SystemTotal> totals;
      for (const auto& s : out.systems) totals.push_back({s.kind, evaluate(s).total});
      auto fit = fit_modeshift_factors(anchors.profiles, totals, anchors.known_factors, anchors.unknown_modes);
      for (const auto& r : fit.factors) out.results.push_back(r);
      out.modeshift = std::move(fit);
    } catch (const Error& e) {
      out.errors.push_back(std::string("modeshift: ") + e.what());
    }
  }
  return out;
}

Json constants_to_json(const CalibrationBundle& b)
{
  Json results = Json::array();
  for (const auto& r : b.results) {
    Json anchors = Json::array();
    for (const auto& a : r.anchors) anchors.push_back({{"value", a.value}, {"source", a.source}});
    results.push_back({{"parameter", r.parameter},
                       {"value", r.value},
                       {"unit", r.unit},
                       {"residual", std::isfinite(r.residual) ? Json(r.residual) : Json("inf")},
                       {"tolerance", r.tolerance},
                       {"conforming", r.conforming()},
                       {"anchors", anchors}});
  }

  Json systems = Json::object();
  for (const auto& s : b.systems) {
    const Json full = to_json(s);
    Json patch;
    patch["vehicle"] = {{"base_manufacturing_kgco2", s.vehicle.base_manufacturing_kg},
                        {"delivery_kgco2", s.vehicle.delivery_kg},
                        {"energy_kwh_per_km", s.vehicle.energy_kwh_per_km}};
    patch["services"] = full.at("services");
    patch["infrastructure"] = full.at("infrastructure");
    systems[s.name] = patch;
  }

  Json doc = {{"tool_version", BSSLCA_VERSION},
              {"complete", b.complete()},
              {"errors", b.errors},
              {"results", results},
              {"systems", systems}};
  if (b.alternate_autonomy_split) {
    doc["alternate_autonomy_split"] = {{"scaling", b.alternate_autonomy_split->lifetime_scaling_kg},
                                       {"fixed", b.alternate_autonomy_split->fixed_kg}};
  }
  if (b.battery_kg_per_kwh) doc["battery_kgco2_per_kwh"] = *b.battery_kg_per_kwh;
  if (b.modeshift) {
    const auto& fit = *b.modeshift;
    Json sets = Json::object();
    for (const auto& f : fit.fitted) sets[std::string(to_string(f.scenario))] = mode_map_to_json(f.g_per_pkm);
    Json rows = Json::array();
    for (const auto& r : fit.rows) {
      Json cells = Json::object();
      for (auto kind : {SystemKind::station_based, SystemKind::dockless, SystemKind::autonomous}) {
        for (auto sc : {Scenario::S1, Scenario::S2}) {
          const double v = r.residual_pct[static_cast<std::size_t>(kind)][static_cast<std::size_t>(sc)];
          if (std::isfinite(v)) cells[std::string(to_string(kind)) + "_" + std::string(to_string(sc))] = v;
        }
      }
      rows.push_back({{"label", r.label}, {"residual_pct", cells}});
    }
    doc["modeshift"] = {{"factor_sets", sets},
                        {"median_abs_residual_pp", fit.median_abs_residual},
                        {"initial_cost", fit.initial_cost},
                        {"final_cost", fit.final_cost},
                        {"iterations", fit.iterations},
                        {"rows", rows}};
  }
  return doc;
}

Constants parse_constants(const Json& d)
{
  if (!d.is_object()) throw ValidationError("/", "expected an object");
  Constants c;
  if (!d.contains("modeshift") || !d.at("modeshift").contains("factor_sets")) {
    throw ValidationError("/modeshift/factor_sets", "missing; run `bsslca calibrate` to produce a constants file");
  }
  for (const auto& [key, value] : d.at("modeshift").at("factor_sets").items()) {
    const auto sc = parse_scenario(key);
    if (!sc) throw ValidationError("/modeshift/factor_sets/" + key, "unknown scenario");
    DisplacedModeFactors f{*sc, parse_mode_map(value, "/modeshift/factor_sets/" + key)};
    validate(f);
    c.factor_sets.push_back(f);
  }
  std::sort(c.factor_sets.begin(), c.factor_sets.end(),
            [](const auto& l, const auto& r) { return l.scenario < r.scenario; });
  if (d.contains("battery_kgco2_per_kwh")) c.battery_kg_per_kwh = num(d, "battery_kgco2_per_kwh", "");
  if (d.contains("alternate_autonomy_split")) {
    const auto& s = d.at("alternate_autonomy_split");
    c.alternate_autonomy_split = AutonomyImpact{num(s, "scaling", "/alternate_autonomy_split"),
                                                num(s, "fixed", "/alternate_autonomy_split")};
  }
  return c;
}

Constants bundled_constants()
{
  return parse_constants(Json::parse(bundled::text("constants.json")));
}

}  // namespace bss
