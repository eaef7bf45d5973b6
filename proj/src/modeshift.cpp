#include "bsslca/modeshift.hpp"

#include "bsslca/bundled.hpp"
#include "bsslca/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace bss {

std::string_view to_string(Mode mode)
{
  switch (mode) {
    case Mode::car_motorcycle: return "car_motorcycle";
    case Mode::taxi: return "taxi";
    case Mode::public_transit: return "public_transit";
    case Mode::walking: return "walking";
    case Mode::own_bike: return "own_bike";
    case Mode::new_trip: return "new_trip";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view text)
{
  for (auto m : kAllModes) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

bool is_electrifiable(Mode mode)
{
  return mode == Mode::car_motorcycle || mode == Mode::taxi || mode == Mode::public_transit;
}

std::string_view to_string(Scenario scenario)
{
  return scenario == Scenario::S1 ? "S1" : "S2";
}

std::optional<Scenario> parse_scenario(std::string_view text)
{
  if (text == "S1" || text == "s1") return Scenario::S1;
  if (text == "S2" || text == "s2") return Scenario::S2;
  return std::nullopt;
}

double ModeShareProfile::sum() const
{
  double s = 0.0;
  for (double v : shares) s += v;
  return s;
}

namespace {

void validate_shares(const ModeShareProfile& p)
{
  for (auto m : kAllModes) {
    const double v = p.share(m);
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ValidationError(p.label + "/" + std::string(to_string(m)), "share must lie in [0, 1]");
    }
  }
}

bool sum_in_band(const ModeShareProfile& p)
{
  const double s = p.sum();
  return s >= 0.95 - 1e-12 && s <= 1.05 + 1e-12;
}

}  // namespace

void validate(const ModeShareProfile& p)
{
  validate_shares(p);
  if (!sum_in_band(p)) throw ValidationError(p.label, "shares must sum to within [0.95, 1.05]");
}

std::optional<ShareSumCheck> parse_share_sum_check(std::string_view text)
{
  if (text == "reject") return ShareSumCheck::reject;
  if (text == "warn") return ShareSumCheck::warn;
  return std::nullopt;
}

void validate(const DisplacedModeFactors& f)
{
  for (auto m : kAllModes) {
    const double v = f.factor(m);
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError(std::string(to_string(f.scenario)) + "/" + std::string(to_string(m)),
                            "emission factor must be >= 0");
    }
  }
  if (f.factor(Mode::new_trip) != 0.0) {
    throw ValidationError(std::string(to_string(f.scenario)) + "/new_trip", "new trips displace nothing");
  }
}

namespace {

std::vector<std::string> split_line(std::string_view line)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string cell(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    // trim
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_cell(const std::string& cell, const std::string& where)
{
  if (cell.empty()) return 0.0;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw ValidationError(where, "not a number: '" + cell + "'");
  }
  return v;
}

constexpr std::array<std::string_view, 6> kReferenceColumns = {
    "station_based_s1", "station_based_s2", "dockless_s1", "dockless_s2", "autonomous_s1", "autonomous_s2"};

}  // namespace

std::vector<ProfileRow> parse_profiles_csv(std::string_view text, ShareSumCheck check)
{
  std::vector<ProfileRow> rows;
  std::vector<std::string> header;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::array<std::size_t, kModeCount> mode_col{};
  std::array<std::size_t, 6> ref_col{};
  bool has_reference = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line);
    const std::string where = "line " + std::to_string(line_no);

    if (header.empty()) {
      header = cells;
      if (header.empty() || header[0] != "label") throw ValidationError(where, "first column must be 'label'");
      std::array<bool, kModeCount> seen{};
      std::size_t refs_seen = 0;
      for (std::size_t c = 1; c < header.size(); ++c) {
        if (auto m = parse_mode(header[c])) {
          mode_col[static_cast<std::size_t>(*m)] = c;
          seen[static_cast<std::size_t>(*m)] = true;
          continue;
        }
        auto it = std::find(kReferenceColumns.begin(), kReferenceColumns.end(), header[c]);
        if (it == kReferenceColumns.end()) {
          throw ValidationError(where + ", column " + std::to_string(c + 1), "unknown column '" + header[c] + "'");
        }
        ref_col[static_cast<std::size_t>(it - kReferenceColumns.begin())] = c;
        ++refs_seen;
      }
      for (auto m : kAllModes) {
        if (!seen[static_cast<std::size_t>(m)]) {
          throw ValidationError(where, "missing mode column '" + std::string(to_string(m)) + "'");
        }
      }
      if (refs_seen != 0 && refs_seen != kReferenceColumns.size()) {
        throw ValidationError(where, "reference columns must be given for all systems and scenarios or none");
      }
      has_reference = refs_seen != 0;
      continue;
    }

    if (cells.size() != header.size()) {
      throw ValidationError(where, "expected " + std::to_string(header.size()) + " cells, got " +
                                       std::to_string(cells.size()));
    }
    ProfileRow row;
    row.profile.label = cells[0];
    for (auto m : kAllModes) {
      const auto c = mode_col[static_cast<std::size_t>(m)];
      row.profile.shares[static_cast<std::size_t>(m)] = parse_cell(cells[c], where + ", " + header[c]) / 100.0;
    }
    try {
      if (check == ShareSumCheck::reject) {
        validate(row.profile);
      } else {
        validate_shares(row.profile);
        row.share_sum_out_of_band = !sum_in_band(row.profile);
      }
    } catch (const ValidationError& e) {
      throw ValidationError(where, e.what());
    }
    if (has_reference) {
      ReferenceDeltas ref{};
      for (std::size_t k = 0; k < kReferenceColumns.size(); ++k) {
        const auto c = ref_col[k];
        ref[k / 2][k % 2] = parse_cell(cells[c], where + ", " + header[c]);
      }
      row.reference = ref;
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw ValidationError("line 1", "missing header row");
  return rows;
}

std::vector<ProfileRow> bundled_profiles()
{
  return parse_profiles_csv(bundled::text("modeshift_profiles.csv"), ShareSumCheck::warn);
}

double displaced_intensity(const ModeShareProfile& p, const DisplacedModeFactors& f, bool normalize)
{
  const double total_share = p.sum();
  if (total_share <= 0.0) throw Error("profile '" + p.label + "' has no displaced-mode shares");
  double mix = 0.0;
  for (auto m : kAllModes) {
    if (m == Mode::new_trip) continue;
    mix += p.share(m) * f.factor(m);
  }
  return normalize ? mix / total_share : mix;
}

double impact_delta(double system_total, double displaced)
{
  if (displaced == 0.0) throw UndefinedRatioError("displaced intensity is zero; the relative delta is undefined");
  return (system_total - displaced) / displaced * 100.0;
}

double breakeven_bss_intensity(std::span<const ModeShareProfile> profiles, const DisplacedModeFactors& factors,
                               double fraction, bool normalize)
{
  if (profiles.empty()) throw Error("breakeven_bss_intensity needs at least one profile");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("fraction must lie in (0, 1]");
  std::vector<double> mixes;
  mixes.reserve(profiles.size());
  for (const auto& p : profiles) mixes.push_back(displaced_intensity(p, factors, normalize));
  std::sort(mixes.begin(), mixes.end(), std::greater<>());
  // At least k profiles must have mix >= E.
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(mixes.size()) - 1e-12));
  return mixes[std::max<std::size_t>(k, 1) - 1];
}

double median_abs(std::span<const double> values)
{
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> a;
  a.reserve(values.size());
  for (double v : values) a.push_back(std::abs(v));
  std::sort(a.begin(), a.end());
  const auto n = a.size();
  return n % 2 == 1 ? a[n / 2] : 0.5 * (a[n / 2 - 1] + a[n / 2]);
}

ModeShiftReport modeshift_table(std::span<const SystemTotal> systems, std::span<const ProfileRow> rows,
                                std::span<const DisplacedModeFactors> factor_sets, bool normalize)
{
  for (const auto& f : factor_sets) validate(f);
  ModeShiftReport report;
  std::vector<double> residuals;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    for (const auto& sys : systems) {
      for (const auto& f : factor_sets) {
        ModeShiftCell cell;
        cell.row = r;
        cell.label = row.profile.label;
        cell.scenario = f.scenario;
        cell.system = sys.kind;
        cell.share_sum = row.profile.sum();
        cell.displaced = displaced_intensity(row.profile, f, normalize);
        cell.delta_pct = impact_delta(sys.total, cell.displaced);
        if (row.reference) {
          cell.reference_pct =
              (*row.reference)[static_cast<std::size_t>(sys.kind)][static_cast<std::size_t>(f.scenario)];
          residuals.push_back(*cell.residual_pct());
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  report.median_abs_residual = median_abs(residuals);
  return report;
}

}  // namespace bss
