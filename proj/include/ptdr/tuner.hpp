#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ptdr/errormodel.hpp"
#include "ptdr/mcsim.hpp"
#include "ptdr/stats.hpp"

namespace ptdr {

struct Constraint {
  double epsilon = 0.06;      // relative error bound
  double confidence = 0.99;   // CI level
  double percentile_y = 95;   // percentile the estimate targets

  void validate() const;
};

// Normal-quantile multiplier for the error bound. The four conventional CI
// levels map to the sigma-interval integers (0.68->1, 0.95->2, 0.99->3,
// 0.997->3); anything else uses the two-sided normal quantile.
double n_of_ci(double confidence);

struct LevelChoice {
  int level = 0;
  bool clamped = false;  // constraint unsatisfiable even at the max level
};

// Smallest level whose predicted error bound n(CI) * nu_hat fits epsilon.
LevelChoice select_level(const ErrorModel& model, double u, const Constraint& constraint);

struct StaticBaseline {
  int level = 0;
  bool flagged = false;  // no level reached the threshold; max level returned
};

// Offline worst-case tuning: smallest level whose empirical error CDF at
// epsilon reaches threshold_percentile/100 over a training error sample.
StaticBaseline static_baseline_level(const std::map<int, std::vector<double>>& errors_per_level,
                                     double epsilon, double threshold_percentile);

struct RouteEstimate {
  int selected_level = 0;
  bool clamped = false;
  double unpredictability = 0;
  SummaryStats stats;
  double tau_hat = 0;  // percentile_y of the merged sample set
  int total_samples = 0;
  int pilot_reused = 0;
  double pilot_ms = 0;
  double selection_ms = 0;
  double topup_ms = 0;
};

// Full adaptive query: 100-sample pilot, feature extraction, level
// selection, top-up of (level - 100) samples merged with the pilot, summary
// statistics. Deterministic in seed up to the *_ms timing fields.
RouteEstimate adaptive_route_query(const Network& net, const std::string& path_id,
                                   DepartureTime departure, const Constraint& constraint,
                                   const ErrorModel& model, std::uint64_t seed, int workers = 1);

}  // namespace ptdr
