#pragma once

// Net impact of a bicycle-sharing deployment given the modes its trips
// displace. A trip that would not otherwise have happened displaces nothing.

#include "bsslca/inventory.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bss {

enum class Mode { car_motorcycle, taxi, public_transit, walking, own_bike, new_trip };

inline constexpr std::size_t kModeCount = 6;
inline constexpr std::array<Mode, kModeCount> kAllModes = {Mode::car_motorcycle, Mode::taxi,
                                                           Mode::public_transit, Mode::walking,
                                                           Mode::own_bike,       Mode::new_trip};

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);

/// Modes whose emission factor depends on the vehicle electrification scenario.
bool is_electrifiable(Mode mode);

enum class Scenario { S1, S2 };

std::string_view to_string(Scenario scenario);
std::optional<Scenario> parse_scenario(std::string_view text);

using ModeVector = std::array<double, kModeCount>;

struct ModeShareProfile {
  std::string label;
  /// Fractions in [0, 1], indexed by Mode.
  ModeVector shares{};

  double share(Mode m) const { return shares[static_cast<std::size_t>(m)]; }
  double sum() const;
};

/// Emission factor of each displaced mode, gCO2e/pkm. new_trip is always 0.
struct DisplacedModeFactors {
  Scenario scenario = Scenario::S1;
  ModeVector g_per_pkm{};

  double factor(Mode m) const { return g_per_pkm[static_cast<std::size_t>(m)]; }
};

/// Throws ValidationError for shares outside [0, 1] or a sum outside [0.95, 1.05].
void validate(const ModeShareProfile& profile);
/// Throws ValidationError for negative factors or a nonzero new_trip factor.
void validate(const DisplacedModeFactors& factors);

/// Reported deltas (percent) indexed [system kind][scenario].
using ReferenceDeltas = std::array<std::array<double, 2>, 3>;

struct ProfileRow {
  ModeShareProfile profile;
  std::optional<ReferenceDeltas> reference;
  /// Set when the shares sum outside [0.95, 1.05] and the table was read
  /// with ShareSumCheck::warn.
  bool share_sum_out_of_band = false;
};

/// reject: a row whose shares sum outside [0.95, 1.05] is a ValidationError.
/// warn: such rows are kept and flagged (published tables contain them).
enum class ShareSumCheck { reject, warn };

std::optional<ShareSumCheck> parse_share_sum_check(std::string_view text);

/// Parses the displaced-mode table: a header row with the six mode columns
/// (percent, blank = 0) optionally followed by the six reference delta
/// columns `<system>_s1`, `<system>_s2`. Lines starting with '#' are comments.
std::vector<ProfileRow> parse_profiles_csv(std::string_view text, ShareSumCheck check = ShareSumCheck::reject);

/// Bundled displaced-mode table, read with ShareSumCheck::warn.
std::vector<ProfileRow> bundled_profiles();

/// Share-weighted displaced emission intensity, g/pkm.
double displaced_intensity(const ModeShareProfile& profile, const DisplacedModeFactors& factors,
                           bool normalize = false);

/// (system_total - displaced) / displaced * 100. Throws UndefinedRatioError if displaced is 0.
double impact_delta(double system_total, double displaced);

/// Largest BSS intensity for which at least `fraction` of the profiles see a
/// non-positive delta. fraction = 0.5 gives the median displaced intensity,
/// fraction = 1 the minimum.
double breakeven_bss_intensity(std::span<const ModeShareProfile> profiles,
                               const DisplacedModeFactors& factors, double fraction, bool normalize = false);

struct SystemTotal {
  SystemKind kind = SystemKind::station_based;
  double total = 0.0;
};

struct ModeShiftCell {
  std::size_t row = 0;
  std::string label;
  Scenario scenario = Scenario::S1;
  SystemKind system = SystemKind::station_based;
  /// Sum of the profile's shares; 1 for a complete profile.
  double share_sum = 1.0;
  double displaced = 0.0;
  double delta_pct = 0.0;
  std::optional<double> reference_pct;

  std::optional<double> residual_pct() const
  {
    if (!reference_pct) return std::nullopt;
    return delta_pct - *reference_pct;
  }
};

struct ModeShiftReport {
  /// Ordered by (row, system, scenario).
  std::vector<ModeShiftCell> cells;
  /// Median of |residual| over cells that carry a reference; NaN if none do.
  double median_abs_residual = 0.0;
};

/// Full grid of rows x systems x factor sets.
ModeShiftReport modeshift_table(std::span<const SystemTotal> systems, std::span<const ProfileRow> rows,
                                std::span<const DisplacedModeFactors> factor_sets, bool normalize = false);

/// Median of |x| (average of the two middle values for even counts).
double median_abs(std::span<const double> values);

}  // namespace bss
