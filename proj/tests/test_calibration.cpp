#include "doctest.h"

#include "bsslca/bundled.hpp"
#include "bsslca/calibration.hpp"
#include "bsslca/error.hpp"

#include <cmath>

using namespace bss;

TEST_SUITE("calibration") {

TEST_CASE("single-constant solves reproduce their anchors")
{
  const GridProfile grid{386.0, "placeholder"};
  const auto e = calibrate_energy_intensity(8.88, grid);
  CHECK(e.value == doctest::Approx(0.0230051813).epsilon(1e-9));
  CHECK(e.conforming());
  CHECK_THROWS_AS(calibrate_energy_intensity(8.88, {0.0, "clean"}), UndefinedRatioError);

  const auto v = calibrate_van_intensity(SystemKind::station_based, 6.62, 0.03);
  CHECK(v.value == doctest::Approx(220.6666667).epsilon(1e-9));
  CHECK_THROWS_AS(calibrate_van_intensity(SystemKind::dockless, 24.7, 0.0), UndefinedRatioError);

  const auto d = calibrate_delivery(1.73, 9603.15);
  CHECK(d.value == doctest::Approx(16.6134495).epsilon(1e-12));
  CHECK(d.residual <= 1e-6);

  const auto m = calibrate_base_manufacturing(826.9, 599.3);
  CHECK(m.value == doctest::Approx(227.6).epsilon(1e-12));
}

TEST_CASE("infrastructure 2x2 solve")
{
  const std::vector<InfrastructureAnchor> anchors = {
      {"station_based", 4.38e-6, 1.0, 39.77},
      {"autonomous", 2.5e-6, 40.4 / 30.8, 23.94},
  };
  const auto r = calibrate_infrastructure(anchors);
  CHECK(r.station_gco2.value == doctest::Approx(8697734.912758125).epsilon(1e-12));
  CHECK(r.road_gco2_per_pkm.value == doctest::Approx(1.6739210821194155).epsilon(1e-10));
  CHECK(r.station_gco2.conforming());
  CHECK(r.road_gco2_per_pkm.value >= 0.0);

  // over-determined: a consistent third anchor leaves the solution unchanged
  auto three = anchors;
  three.push_back({"third", 1e-6, 1.5, 1e-6 * r.station_gco2.value + 1.5 * r.road_gco2_per_pkm.value});
  const auto r3 = calibrate_infrastructure(three);
  CHECK(r3.station_gco2.value == doctest::Approx(r.station_gco2.value).epsilon(1e-9));
  CHECK(r3.road_gco2_per_pkm.conforming());
}

TEST_CASE("infrastructure rank deficiency")
{
  const std::vector<InfrastructureAnchor> one = {{"station_based", 4.38e-6, 1.0, 39.77}};
  CHECK_THROWS_AS(calibrate_infrastructure(one), RankDeficiencyError);
  const std::vector<InfrastructureAnchor> proportional = {{"a", 1e-6, 1.0, 10.0}, {"b", 2e-6, 2.0, 20.0}};
  CHECK_THROWS_AS(calibrate_infrastructure(proportional), RankDeficiencyError);
}

TEST_CASE("bundled anchors without the autonomous row report rank deficiency")
{
  auto anchors = bundled_anchors();
  std::erase_if(anchors.systems, [](const SystemAnchors& s) { return s.kind == SystemKind::autonomous; });
  const auto bundle = calibrate_all(anchors);
  CHECK_FALSE(bundle.complete());
  bool reported = false;
  for (const auto& e : bundle.errors) reported |= e.find("infrastructure") != std::string::npos;
  CHECK(reported);
}

TEST_CASE("autonomy split reproduces the one-year anchor")
{
  const auto s = nominal_system(SystemKind::autonomous);
  const auto r = calibrate_autonomy_split(s, 64.45);
  CHECK(r.split.total_kg() == doctest::Approx(599.3).epsilon(1e-12));
  CHECK(r.split.lifetime_scaling_kg == doctest::Approx(511.6366).epsilon(1e-6));
  CHECK(r.scaling.conforming());

  // a target beyond what any split can give is flagged, not clamped
  CHECK_FALSE(calibrate_autonomy_split(s, 90.0).scaling.conforming());
}

TEST_CASE("battery intensity")
{
  const auto s = nominal_system(SystemKind::autonomous);
  const auto r = calibrate_battery_intensity(s, 0.25, 0.6);
  CHECK(r.value == doctest::Approx(116.108).epsilon(1e-5));
  CHECK(r.conforming());
}

TEST_CASE("mode-shift fit over the bundled table")
{
  const auto anchors = bundled_anchors();
  std::vector<SystemTotal> totals;
  for (const auto& s : nominal_datasets()) totals.push_back({s.kind, evaluate(s).total});
  const auto fit = fit_modeshift_factors(anchors.profiles, totals, anchors.known_factors, anchors.unknown_modes);

  REQUIRE(fit.factors.size() == 2);
  const double walking = fit.fitted[0].factor(Mode::walking);
  const double own_bike = fit.fitted[0].factor(Mode::own_bike);
  CHECK(walking >= 0.0);
  CHECK(walking <= 5.0);
  CHECK(own_bike == doctest::Approx(12.510366763819198).epsilon(1e-6));
  CHECK(fit.fitted[1].factor(Mode::own_bike) == own_bike);
  CHECK(fit.final_cost < fit.initial_cost);
  CHECK(fit.final_cost == doctest::Approx(3446.7366880).epsilon(1e-8));
  CHECK(fit.median_abs_residual == doctest::Approx(2.4458).epsilon(1e-4));

  // cost never increases along the iteration history
  for (std::size_t i = 1; i < fit.cost_history.size(); ++i) CHECK(fit.cost_history[i] <= fit.cost_history[i - 1]);

  // every fitted row carries all six residuals
  REQUIRE(fit.rows.size() == 19);
  for (const auto& row : fit.rows) {
    for (const auto& sys : row.residual_pct) {
      for (double v : sys) CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("mode-shift fit identifiability")
{
  const auto anchors = bundled_anchors();
  std::vector<SystemTotal> totals;
  for (const auto& s : nominal_datasets()) totals.push_back({s.kind, evaluate(s).total});
  std::vector<ProfileRow> single(anchors.profiles.begin(), anchors.profiles.begin() + 1);
  CHECK_THROWS_AS(fit_modeshift_factors(single, totals, anchors.known_factors, anchors.unknown_modes),
                  RankDeficiencyError);
  const std::vector<Mode> new_trip = {Mode::new_trip};
  CHECK_THROWS_AS(fit_modeshift_factors(anchors.profiles, totals, anchors.known_factors, new_trip), Error);
}

TEST_CASE("whole-dataset calibration and the constants file")
{
  const auto bundle = calibrate_all(bundled_anchors());
  CHECK(bundle.complete());
  CHECK(bundle.errors.empty());
  for (const auto& r : bundle.results) {
    CAPTURE(r.parameter);
    CHECK(r.conforming());
  }
  const auto doc = constants_to_json(bundle);
  const auto c = parse_constants(doc);
  REQUIRE(c.factor_sets.size() == 2);
  CHECK(c.factor_sets[0].scenario == Scenario::S1);
  REQUIRE(c.battery_kg_per_kwh);
  REQUIRE(c.alternate_autonomy_split);
  CHECK(c.alternate_autonomy_split->total_kg() == doctest::Approx(599.3));

  // the bundled constants are this calibration's output
  const auto shipped = bundled_constants();
  CHECK(shipped.factor_sets[0].g_per_pkm == c.factor_sets[0].g_per_pkm);
  CHECK(*shipped.battery_kg_per_kwh == *c.battery_kg_per_kwh);

  Json broken = doc;
  broken.erase("modeshift");
  CHECK_THROWS_AS(parse_constants(broken), ValidationError);
}

TEST_CASE("anchors parsing errors carry paths")
{
  auto doc = Json::parse(bundled::text("anchors.json"));
  doc["systems"][0]["targets"]["colour"] = 1.0;
  auto loader = [](const std::string& ref, ShareSumCheck c) { return parse_profiles_csv(bundled::text(ref), c); };
  try {
    parse_anchors(doc, loader);
    FAIL("accepted unknown target");
  } catch (const ValidationError& e) {
    CHECK(e.path() == "/systems/0/targets/colour");
  }
}

}
