#include "doctest.h"

#include "cli_runner.hpp"

#include "bsslca/inventory.hpp"

#include <algorithm>

namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return "'" + (fs::path(BSSLCA_DATA_DIR) / name).string() + "'"; }

std::string tmp(const std::string& name) { return (cli::scratch_dir() / name).string(); }

std::size_t data_lines(const std::string& csv)
{
  std::size_t n = 0;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') ++n;
  }
  return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("evaluate prints the nominal breakdown")
{
  const auto r = cli::run("evaluate");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("station_based,19.5769,1.7300,8.8800,6.6200,39.7700,76.5769") != std::string::npos);
  CHECK(r.out.find("autonomous,17.8821,0.5200,8.8800,0.0000,23.9400,51.2221") != std::string::npos);
  CHECK(r.out.find("# input_hash: ") != std::string::npos);
}

TEST_CASE("json output has one object per system with five components and a total")
{
  const auto r = cli::run("evaluate --format json " + data("autonomous_nominal.json"));
  REQUIRE(r.code == 0);
  const auto doc = bss::Json::parse(r.out);
  REQUIRE(doc.at("data").size() == 1);
  const auto& row = doc.at("data")[0];
  CHECK(row.size() == 7);
  for (auto k : {"vehicle_manufacturing", "vehicle_delivery", "vehicle_use", "operational_services", "infrastructure",
                 "total"}) {
    CHECK(row.at(k).is_number());
  }
  CHECK(doc.at("manifest").at("tool_version") == BSSLCA_VERSION);
}

TEST_CASE("every command is byte-identical across repeated runs")
{
  for (const std::string args : {"evaluate", "compare", "sweep lifetime", "sweep autonomy", "sweep utilization",
                                 "breakeven --moving autonomous --target station_based --target dockless",
                                 "modeshift", "calibrate", "evaluate --format json"}) {
    CAPTURE(args);
    const auto a = cli::run(args);
    const auto b = cli::run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK_FALSE(a.out.empty());
  }
}

TEST_CASE("--out writes the same bytes as standard output")
{
  const auto path = tmp("eval.csv");
  REQUIRE(cli::run("evaluate --out '" + path + "'").code == 0);
  CHECK(cli::slurp(path) == cli::run("evaluate").out);
}

TEST_CASE("modeshift for one scenario covers 19 profiles and three systems")
{
  const auto r = cli::run("modeshift --scenario S2");
  REQUIRE(r.code == 0);
  CHECK(data_lines(r.out) == 20);
  const auto header = r.out.substr(r.out.find("label,"), r.out.find('\n', r.out.find("label,")) - r.out.find("label,"));
  for (auto s : {"station_based_S2,", "dockless_S2,", "autonomous_S2,"}) CHECK(header.find(s) != std::string::npos);
  CHECK(header.find("S1") == std::string::npos);
  CHECK(r.err.find("Barcelona") != std::string::npos);
}

TEST_CASE("malformed scenario file exits 2 naming the key")
{
  auto doc = bss::Json::parse(cli::slurp(fs::path(BSSLCA_DATA_DIR) / "station_based_nominal.json"));
  doc["vehicle"]["colour"] = "red";
  cli::write_file(tmp("bad.json"), doc.dump());
  const auto r = cli::run("evaluate '" + tmp("bad.json") + "'");
  CHECK(r.code == 2);
  CHECK(r.err.find("colour") != std::string::npos);

  doc["vehicle"].erase("colour");
  doc["vehicle"]["lifetime_years"] = -1;
  cli::write_file(tmp("bad2.json"), doc.dump());
  const auto r2 = cli::run("evaluate '" + tmp("bad2.json") + "'");
  CHECK(r2.code == 2);
  CHECK(r2.err.find("lifetime_years") != std::string::npos);

  cli::write_file(tmp("notjson.json"), "{ nope");
  CHECK(cli::run("evaluate '" + tmp("notjson.json") + "'").code == 2);
}

TEST_CASE("missing input file exits 1")
{
  CHECK(cli::run("evaluate '" + tmp("does_not_exist.json") + "'").code == 1);
  CHECK(cli::run("sweep '" + tmp("does_not_exist.json") + "'").code == 1);
  CHECK(cli::run("modeshift --profiles '" + tmp("nope.csv") + "'").code == 1);
}

TEST_CASE("empty sweep grid exits 2")
{
  cli::write_file(tmp("empty.json"), R"({"sweep": {"parameter": "lifetime_years", "values": []}})");
  const auto r = cli::run("sweep '" + tmp("empty.json") + "'");
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("missing constants path exits 2 and points at calibrate")
{
  const auto r = cli::run("--constants '" + tmp("no_constants.json") + "' modeshift");
  CHECK(r.code == 2);
  CHECK(r.err.find("bsslca calibrate") != std::string::npos);
  const auto e = cli::run("modeshift", "BSSLCA_CONSTANTS='" + tmp("no_constants.json") + "'");
  CHECK(e.code == 2);
}

TEST_CASE("unknown profile column exits 2")
{
  cli::write_file(tmp("profiles.csv"),
                  "label,car_motorcycle,taxi,public_transit,walking,hoverboard,new_trip\nX,50,,,50,,\n");
  const auto r = cli::run("modeshift --profiles '" + tmp("profiles.csv") + "'");
  CHECK(r.code == 2);
  CHECK(r.err.find("hoverboard") != std::string::npos);
}

TEST_CASE("user profile files are share-checked strictly unless asked otherwise")
{
  cli::write_file(tmp("short.csv"), "label,car_motorcycle,taxi,public_transit,walking,own_bike,new_trip\nX,50,,,40,,\n");
  CHECK(cli::run("modeshift --profiles '" + tmp("short.csv") + "'").code == 2);
  CHECK(cli::run("modeshift --share-sum-check warn --profiles '" + tmp("short.csv") + "'").code == 0);
}

TEST_CASE("calibrate refuses to overwrite without --force")
{
  const auto out = tmp("constants.json");
  fs::remove(out);
  REQUIRE(cli::run("calibrate --out '" + out + "'").code == 0);
  const auto first = cli::slurp(out);
  CHECK(cli::run("calibrate --out '" + out + "'").code == 2);
  CHECK(cli::run("calibrate --force --out '" + out + "'").code == 0);
  CHECK(cli::slurp(out) == first);

  // the freshly written constants drive modeshift exactly like the bundled ones
  const auto mine = cli::run("--constants '" + out + "' modeshift").out;
  const auto shipped = cli::run("modeshift").out;
  CHECK(mine.substr(mine.find("\nlabel,")) == shipped.substr(shipped.find("\nlabel,")));
}

TEST_CASE("anchors without the autonomous row exit 2")
{
  auto doc = bss::Json::parse(cli::slurp(fs::path(BSSLCA_DATA_DIR) / "anchors.json"));
  auto& systems = doc["systems"];
  systems.erase(std::remove_if(systems.begin(), systems.end(),
                               [](const bss::Json& s) { return s.at("kind") == "autonomous"; }),
                systems.end());
  doc["modeshift"]["profiles"] = (fs::path(BSSLCA_DATA_DIR) / "modeshift_profiles.csv").string();
  cli::write_file(tmp("anchors.json"), doc.dump());
  const auto r = cli::run("calibrate --anchors '" + tmp("anchors.json") + "' --force --out '" + tmp("partial.json") + "'");
  CHECK(r.code == 2);
  CHECK(r.err.find("infrastructure") != std::string::npos);
}

TEST_CASE("usage errors exit 2")
{
  CHECK(cli::run("evaluate --allocation loose").code == 2);
  CHECK(cli::run("frobnicate").code == 2);
  CHECK(cli::run("breakeven --moving colour_bike").code != 0);
  CHECK(cli::run("compare autonomous colour_bike").code != 0);
}

TEST_CASE("breakeven reports strict roots by default")
{
  const auto r = cli::run("breakeven --moving autonomous --target station_based --target dockless");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("# allocation: strict") != std::string::npos);
  CHECK(r.out.find("5.0443") != std::string::npos);
  CHECK(r.out.find("2.3996") != std::string::npos);
  const auto p = cli::run("--allocation paper breakeven --moving autonomous --target station_based");
  CHECK(p.out.find("3.7009") != std::string::npos);
  CHECK(cli::run("breakeven --moving autonomous --target-total 30").code == 2);
}

}
