#pragma once

// Evaluation of the five life-cycle components per passenger-km.
//
// All functions are pure: the same SystemDefinition always yields the same
// bits, and nothing is cached.

#include "bsslca/inventory.hpp"

#include <string>

namespace bss {

/// Denominator used to spread per-vehicle impacts over passenger-km.
///
/// paper_convention divides by every vehicle-km driven, including empty
/// relocation km, and treats use-phase energy per vehicle-km as per pkm.
/// strict_pkm divides by passenger-carrying km only.
/// Both agree for systems without empty km.
enum class AllocationMode { paper_convention, strict_pkm };

std::string_view to_string(AllocationMode mode);
std::optional<AllocationMode> parse_allocation_mode(std::string_view text);

/// Service life over which AutonomyImpact::fixed_kg is amortized.
inline constexpr double kAutonomyReferenceLifetimeYears = 3.0;

/// Passenger-km (or vehicle-km under paper_convention) one bike covers
/// over its lifetime.
double allocation_distance_km(const SystemDefinition& system, AllocationMode mode);

double vehicle_manufacturing_component(const SystemDefinition& system, AllocationMode mode);
double vehicle_delivery_component(const SystemDefinition& system, AllocationMode mode);
double vehicle_use_component(const SystemDefinition& system, AllocationMode mode);
double operational_component(const SystemDefinition& system);
double infrastructure_component(const SystemDefinition& system);

EmissionBreakdown evaluate(const SystemDefinition& system,
                           AllocationMode mode = AllocationMode::paper_convention);

/// `relative_difference` is (E_other - E_baseline) / E_other, i.e. the
/// fraction by which the baseline is lower than the other system.
struct ComparisonReport {
  std::string baseline;
  std::string other;
  double relative_difference = 0.0;
  double absolute_difference = 0.0;
};

/// Throws UndefinedRatioError when `other` evaluates to a zero total.
ComparisonReport compare(const SystemDefinition& baseline, const SystemDefinition& other,
                         AllocationMode mode = AllocationMode::paper_convention);

/// Same as compare() for already evaluated totals.
ComparisonReport compare_totals(std::string baseline, double baseline_total, std::string other,
                                double other_total);

}  // namespace bss
