#include "doctest.h"

#include "bsslca/report.hpp"

using namespace bss;

TEST_SUITE("report") {

TEST_CASE("fixed four-decimal formatting")
{
  CHECK(format_fixed4(76.57691) == "76.5769");
  CHECK(format_fixed4(0.00005) == "0.0001");  // binary value lies above the tie
  CHECK(format_fixed4(0.125) == "0.1250");
  CHECK(format_fixed4(0.00015) == "0.0001");  // binary value lies below the tie
  CHECK(format_fixed4(0.5 / 8192.0) == "0.0001");
  CHECK(format_fixed4(-1e-9) == "0.0000");
  CHECK(format_fixed4(-2.5) == "-2.5000");
}

TEST_CASE("exact ties round half to even")
{
  // 2^-14 * k values with five decimals that are exact in binary
  CHECK(format_fixed4(0.03125) == "0.0312");
  CHECK(format_fixed4(0.09375) == "0.0938");
}

TEST_CASE("FNV-1a reference vectors")
{
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hash_inputs({{"a", "1"}}) != hash_inputs({{"a1", ""}}));
  CHECK(hash_inputs({{"a", "1"}}).size() == 16);
}

TEST_CASE("evaluate report round-trips through CSV")
{
  std::vector<NamedBreakdown> rows;
  for (const auto& s : nominal_datasets()) rows.push_back({s.name, evaluate(s)});
  Report r{{"evaluate", {"bundled:x.json", "path, with comma.json"}, "paper", "csv", BSSLCA_VERSION, "0123456789abcdef"},
           evaluate_table(rows)};
  const auto csv = to_csv(r);
  const auto back = parse_report_csv(csv);
  CHECK(back.manifest == r.manifest);
  CHECK(to_csv(back) == csv);

  const auto b = breakdowns_from_table(back.table);
  REQUIRE(b.size() == 3);
  CHECK(b[0].system == "station_based");
  CHECK(b[0].breakdown.total == 76.5769);
  CHECK(b[2].breakdown.vehicle_manufacturing == 17.8821);
}

TEST_CASE("string cells that look numeric survive the round trip")
{
  Table t{{"label", "value"}, {{std::string("1.5"), 1.5}, {std::string("a,\"b\""), 2.0}, {std::string(""), 0.0}}};
  Report r{{}, t};
  const auto back = parse_report_csv(to_csv(r));
  CHECK(std::get<std::string>(back.table.rows[0][0]) == "1.5");
  CHECK(std::get<std::string>(back.table.rows[1][0]) == "a,\"b\"");
  CHECK(std::get<double>(back.table.rows[0][1]) == 1.5);
  CHECK(to_csv(back) == to_csv(r));
}

TEST_CASE("sweep table is long format and component deltas add up")
{
  const auto systems = nominal_datasets();
  const std::vector<double> years = {1, 5};
  const auto res = sweep_lifetime(systems, years);
  const auto t = sweep_table(res);
  CHECK(t.columns == std::vector<std::string>{"parameter", "value", "system", "component", "g_per_pkm", "delta_pct"});
  REQUIRE(t.rows.size() == 2 * 3 * 6);
  for (std::size_t i = 0; i < t.rows.size(); i += 6) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 5; ++c) sum += std::get<double>(t.rows[i + c][5]);
    CHECK(sum == doctest::Approx(std::get<double>(t.rows[i + 5][5])).epsilon(1e-12));
  }
  const Report r{{"sweep", {}, "paper", "csv", BSSLCA_VERSION, ""}, t};
  CHECK(to_csv(parse_report_csv(to_csv(r))) == to_csv(r));
}

TEST_CASE("json report keeps full precision and column order")
{
  std::vector<NamedBreakdown> rows = {{"autonomous", evaluate(nominal_system(SystemKind::autonomous))}};
  const auto text = to_json_text({{"evaluate", {}, "paper", "json", BSSLCA_VERSION, ""}, evaluate_table(rows)});
  const auto doc = Json::parse(text);
  CHECK(doc.at("data").size() == 1);
  CHECK(doc.at("data")[0].at("total").get<double>() == rows[0].breakdown.total);
  CHECK(doc.at("manifest").at("command") == "evaluate");
  CHECK(text.find("\"system\"") < text.find("\"vehicle_manufacturing\""));
  CHECK(text.find("\"vehicle_manufacturing\"") < text.find("\"total\""));
}

}
