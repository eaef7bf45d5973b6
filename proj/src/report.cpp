#include "bsslca/report.hpp"

#include "bsslca/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bss {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h)
{
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_inputs(const std::vector<std::pair<std::string, std::string>>& inputs)
{
  std::uint64_t h = fnv1a64("");
  for (const auto& [name, content] : inputs) {
    h = fnv1a64(name, h);
    h = fnv1a64(std::string_view("\0", 1), h);
    h = fnv1a64(content, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json to_json(const RunManifest& m)
{
  return {{"command", m.command},       {"inputs", m.inputs},         {"allocation", m.allocation},
          {"format", m.format},         {"tool_version", m.tool_version}, {"input_hash", m.input_hash}};
}

std::string format_fixed4(double v)
{
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

namespace {

bool parse_number(std::string_view s, double& out)
{
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string csv_field(const Cell& cell)
{
  if (const auto* d = std::get_if<double>(&cell)) return format_fixed4(*d);
  const auto& s = std::get<std::string>(cell);
  double dummy;
  const bool needs_quotes = s.find_first_of(",\"\n\r") != std::string::npos || parse_number(s, dummy) || s == "nan";
  if (!needs_quotes) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// Splits one CSV record; `quoted` flags fields that were enclosed in quotes.
std::vector<std::pair<std::string, bool>> split_record(std::string_view line, std::size_t line_no)
{
  std::vector<std::pair<std::string, bool>> out;
  std::size_t i = 0;
  while (true) {
    std::string field;
    bool quoted = false;
    if (i < line.size() && line[i] == '"') {
      quoted = true;
      ++i;
      while (true) {
        if (i >= line.size()) throw ValidationError("line " + std::to_string(line_no), "unterminated quote");
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += line[i++];
      }
    } else {
      while (i < line.size() && line[i] != ',') field += line[i++];
    }
    out.emplace_back(std::move(field), quoted);
    if (i >= line.size()) break;
    if (line[i] != ',') throw ValidationError("line " + std::to_string(line_no), "text after closing quote");
    ++i;
  }
  return out;
}

const char* kManifestKeys[] = {"command", "inputs", "allocation", "format", "tool_version", "input_hash"};

}  // namespace

std::string to_csv(const Report& r)
{
  std::string out;
  const Json m = to_json(r.manifest);
  for (const char* key : kManifestKeys) {
    out += "# ";
    out += key;
    out += ": ";
    out += m.at(key).is_string() ? m.at(key).get<std::string>() : m.at(key).dump();
    out += '\n';
  }
  for (std::size_t c = 0; c < r.table.columns.size(); ++c) {
    if (c) out += ',';
    out += csv_field(r.table.columns[c]);
  }
  out += '\n';
  for (const auto& row : r.table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_field(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json_text(const Report& r)
{
  using Ordered = nlohmann::ordered_json;
  Ordered data = Ordered::array();
  for (const auto& row : r.table.rows) {
    Ordered obj = Ordered::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto& cell = row[c];
      if (const auto* d = std::get_if<double>(&cell)) {
        obj[r.table.columns[c]] = std::isfinite(*d) ? Ordered(*d) : Ordered(nullptr);
      } else {
        obj[r.table.columns[c]] = std::get<std::string>(cell);
      }
    }
    data.push_back(std::move(obj));
  }
  Ordered doc = Ordered::object();
  doc["manifest"] = Ordered::parse(to_json(r.manifest).dump());
  doc["data"] = std::move(data);
  return doc.dump(2) + "\n";
}

Report parse_report_csv(std::string_view text)
{
  Report r;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') {
      const auto colon = line.find(": ");
      if (colon == std::string::npos || colon < 2) continue;
      const std::string key = line.substr(2, colon - 2);
      const std::string value = line.substr(colon + 2);
      if (key == "command") r.manifest.command = value;
      else if (key == "inputs") r.manifest.inputs = Json::parse(value).get<std::vector<std::string>>();
      else if (key == "allocation") r.manifest.allocation = value;
      else if (key == "format") r.manifest.format = value;
      else if (key == "tool_version") r.manifest.tool_version = value;
      else if (key == "input_hash") r.manifest.input_hash = value;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split_record(line, line_no);
    if (!header) {
      for (const auto& [f, q] : fields) r.table.columns.push_back(f);
      header = true;
      continue;
    }
    if (fields.size() != r.table.columns.size()) {
      throw ValidationError("line " + std::to_string(line_no), "expected " + std::to_string(r.table.columns.size()) +
                                                                   " fields, got " + std::to_string(fields.size()));
    }
    std::vector<Cell> row;
    for (const auto& [f, quoted] : fields) {
      double d;
      if (!quoted && f == "nan") row.emplace_back(std::nan(""));
      else if (!quoted && parse_number(f, d)) row.emplace_back(d);
      else row.emplace_back(f);
    }
    r.table.rows.push_back(std::move(row));
  }
  if (!header) throw ValidationError("line 1", "missing header row");
  return r;
}

Table evaluate_table(const std::vector<NamedBreakdown>& rows)
{
  Table t;
  t.columns.push_back("system");
  for (auto c : kBreakdownComponents) t.columns.emplace_back(c);
  for (const auto& r : rows) {
    std::vector<Cell> row{r.system};
    for (std::size_t i = 0; i < kBreakdownComponents.size(); ++i) row.emplace_back(component(r.breakdown, i));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<NamedBreakdown> breakdowns_from_table(const Table& t)
{
  if (t.columns.size() != kBreakdownComponents.size() + 1 || t.columns[0] != "system") {
    throw ValidationError("header", "not an evaluate table");
  }
  std::vector<NamedBreakdown> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto num = [&](std::size_t c) {
      const auto* d = std::get_if<double>(&row[c]);
      if (!d) throw ValidationError("row " + std::to_string(r + 1) + "/" + t.columns[c], "expected a number");
      return *d;
    };
    NamedBreakdown nb;
    nb.system = std::get<std::string>(row[0]);
    nb.breakdown.vehicle_manufacturing = num(1);
    nb.breakdown.vehicle_delivery = num(2);
    nb.breakdown.vehicle_use = num(3);
    nb.breakdown.operational_services = num(4);
    nb.breakdown.infrastructure = num(5);
    nb.breakdown.total = num(6);
    out.push_back(std::move(nb));
  }
  return out;
}

Table comparison_table(const std::vector<ComparisonReport>& comparisons, const std::vector<double>& baseline_totals,
                       const std::vector<double>& other_totals)
{
  Table t;
  t.columns = {"baseline", "other", "baseline_total", "other_total", "absolute_difference", "relative_difference_pct"};
  for (std::size_t i = 0; i < comparisons.size(); ++i) {
    const auto& c = comparisons[i];
    t.rows.push_back({c.baseline, c.other, baseline_totals[i], other_totals[i], c.absolute_difference,
                      c.relative_difference * 100.0});
  }
  return t;
}

Table sweep_table(const SweepResult& result)
{
  Table t;
  t.columns = {"parameter", "value", "system", "component", "g_per_pkm", "delta_pct"};
  for (const auto& p : result.points) {
    const Cell value = p.value ? Cell(*p.value) : Cell(p.label);
    for (const auto& e : p.entries) {
      for (std::size_t i = 0; i < kBreakdownComponents.size(); ++i) {
        const double v = component(e.breakdown, i);
        const double delta = (v - component(e.nominal, i)) / e.nominal.total * 100.0;
        t.rows.push_back({result.parameter, value, e.system, std::string(kBreakdownComponents[i]), v, delta});
      }
    }
  }
  return t;
}

Table breakeven_table(const std::vector<BreakevenRow>& rows)
{
  Table t;
  t.columns = {"moving", "target", "target_total", "trips_per_bike_day", "floor"};
  for (const auto& r : rows) t.rows.push_back({r.moving, r.target, r.target_total, r.trips_per_bike_day, r.floor});
  return t;
}

Table modeshift_report_table(const ModeShiftReport& report, std::span<const SystemKind> systems,
                             std::span<const Scenario> scenarios)
{
  Table t;
  t.columns.push_back("label");
  t.columns.push_back("share_sum");
  for (auto sc : scenarios) t.columns.push_back("displaced_" + std::string(to_string(sc)));
  for (auto k : systems) {
    for (auto sc : scenarios) {
      const std::string key = std::string(to_string(k)) + "_" + std::string(to_string(sc));
      t.columns.push_back(key);
      t.columns.push_back(key + "_reference");
      t.columns.push_back(key + "_residual");
    }
  }

  std::size_t n_rows = 0;
  for (const auto& c : report.cells) n_rows = std::max(n_rows, c.row + 1);
  auto find = [&](std::size_t row, SystemKind k, Scenario sc) -> const ModeShiftCell* {
    for (const auto& c : report.cells) {
      if (c.row == row && c.system == k && c.scenario == sc) return &c;
    }
    return nullptr;
  };

  for (std::size_t r = 0; r < n_rows; ++r) {
    std::vector<Cell> row;
    const ModeShiftCell* any = nullptr;
    for (const auto& c : report.cells) {
      if (c.row == r) {
        any = &c;
        break;
      }
    }
    if (!any) continue;
    row.emplace_back(any->label);
    row.emplace_back(any->share_sum);
    for (auto sc : scenarios) {
      const ModeShiftCell* c = nullptr;
      for (auto k : systems) {
        if ((c = find(r, k, sc))) break;
      }
      row.emplace_back(c ? Cell(c->displaced) : Cell(std::string()));
    }
    for (auto k : systems) {
      for (auto sc : scenarios) {
        const auto* c = find(r, k, sc);
        if (!c) {
          row.insert(row.end(), {std::string(), std::string(), std::string()});
          continue;
        }
        row.emplace_back(c->delta_pct);
        if (c->reference_pct) {
          row.emplace_back(*c->reference_pct);
          row.emplace_back(*c->residual_pct());
        } else {
          row.emplace_back(std::string());
          row.emplace_back(std::string());
        }
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace bss
