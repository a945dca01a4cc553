#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ptdr/errormodel.hpp"
#include "ptdr/roadnet.hpp"
#include "ptdr/stats.hpp"
#include "ptdr/tuner.hpp"

namespace ptdr {

struct Request {
  std::string id;
  std::string path_id;
  DepartureTime departure;
};

// Departure-time weighting for request generation; weekday rush hours are
// favored. Weights are relative interval masses, emitted into every summary
// so a report documents its own workload.
struct RequestGenConfig {
  double weight_rush = 2.0;      // inside a weekday rush window
  double weight_shoulder = 1.5;  // within 1h of a window
  double weight_day = 1.2;       // weekday 06:00-22:00
  double weight_night = 0.5;     // 22:00-06:00
  double weight_weekend = 1.0;   // all weekend slots
  int morning_start_slot = 28;
  int morning_end_slot = 32;
  int evening_start_slot = 64;
  int evening_end_slot = 68;

  // Weighting used to build training corpora: concentrated on the congested
  // hours a static worst-case tuning has to cover.
  static RequestGenConfig worst_case() {
    RequestGenConfig cfg;
    cfg.weight_rush = 6.0;
    cfg.weight_shoulder = 3.0;
    cfg.weight_day = 1.5;
    return cfg;
  }

  // Everything-equal sampling of the week, for broad feature studies.
  static RequestGenConfig uniform() {
    RequestGenConfig cfg;
    cfg.weight_rush = cfg.weight_shoulder = cfg.weight_day = cfg.weight_night =
        cfg.weight_weekend = 1.0;
    return cfg;
  }
};

std::vector<Request> generate_requests(const Network& net, int count, const std::string& id_prefix,
                                       const RequestGenConfig& cfg, std::uint64_t seed,
                                       std::span<const std::string> path_subset = {});

// Paths ranked by a cheap pilot unpredictability scan at the Monday morning
// peak; returns the top `fraction` of ids. Training campaigns profile these
// congestion-prone corridors, the conditions a static tuning has to cover.
std::vector<std::string> congestion_prone_paths(const Network& net, double fraction,
                                                std::uint64_t seed);

// Summary statistics of a large fixed-size MCS run, memoized by
// (network hash, path, departure, N, seed) in memory and optionally on disk.
class GroundTruthCache {
 public:
  GroundTruthCache() = default;
  explicit GroundTruthCache(std::string cache_dir) : dir_(std::move(cache_dir)) {}

  SummaryStats get(const Network& net, const std::string& path_id, DepartureTime departure,
                   std::size_t n_samples, std::uint64_t seed, int workers = 1);

  int compute_count() const { return computes_; }

 private:
  std::string dir_;
  std::unordered_map<std::string, SummaryStats> memory_;
  std::mutex mutex_;
  int computes_ = 0;
};

// Convenience wrapper without persistent caching.
SummaryStats ground_truth(const Network& net, const std::string& path_id, DepartureTime departure,
                          std::size_t n_samples, std::uint64_t seed, int workers = 1);

struct ErrorBreakdown {
  double max_error = 0;
  std::array<double, 7> per_percentile{};
};

// Relative error per key percentile against the truth table; max over them.
ErrorBreakdown measure_error(const SummaryStats& estimate, const SummaryStats& truth);

struct ValidationRecord {
  Request request;
  double u = 0;
  int level = 0;
  bool clamped = false;
  double measured_error = 0;
  std::array<double, 7> per_percentile_errors{};
};

struct ValidationSummary {
  int request_count = 0;
  double violation_rate = 0;
  double avg_samples = 0;
  double clamp_rate = 0;
  std::map<int, int> level_histogram;
  Constraint constraint;
  std::size_t truth_samples = 0;
  std::uint64_t seed = 0;
};

struct ValidationReport {
  std::vector<ValidationRecord> records;
  ValidationSummary summary;
};

// Adaptive query + ground truth + error per request. `training_ids`, when
// non-empty, asserts the validation set is disjoint from the training set.
ValidationReport run_validation(const Network& net, std::span<const Request> requests,
                                const std::unordered_set<std::string>& training_ids,
                                const Constraint& constraint, const ErrorModel& model,
                                std::size_t truth_samples, std::uint64_t seed,
                                GroundTruthCache* cache = nullptr, int workers = 1);

struct ComparisonConfig {
  double epsilon = 0.06;
  double regression_quantile = 0.95;
};

struct ComparisonRow {
  double epsilon = 0;
  double regression_quantile = 0;
  int baseline_level = 0;
  bool baseline_flagged = false;
  double baseline_avg_samples = 0;
  double adaptive_avg_samples = 0;
  double savings = 0;  // 1 - adaptive/baseline
  double baseline_violation_rate = 0;
  double adaptive_violation_rate = 0;
  double adaptive_clamp_rate = 0;
  double speedup_estimate = 0;  // baseline/adaptive, sample-linear cost
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  int request_count = 0;
  std::size_t truth_samples = 0;
  std::uint64_t seed = 0;
};

// Row arithmetic shared by run_comparison and report fixtures: savings is
// 1 - adaptive/baseline, speedup the inverse ratio.
ComparisonRow make_comparison_row(double epsilon, double regression_quantile,
                                  const StaticBaseline& baseline, double adaptive_avg_samples);

// Static-baseline vs adaptive comparison over a validation request set. The
// static level per (epsilon, q) comes from the cumulative distribution of
// the expected training error n(CI)*nu at threshold q*100, mirroring how a
// deployment would be worst-case tuned offline.
ComparisonReport run_comparison(const Network& net, std::span<const Request> requests,
                                std::span<const ComparisonConfig> configs,
                                const std::map<double, ErrorModel>& model_per_quantile,
                                std::span<const ProfileRecord> training_records,
                                const Constraint& base_constraint, std::size_t truth_samples,
                                std::uint64_t seed, GroundTruthCache* cache = nullptr,
                                int workers = 1);

struct SweepEntry {
  int interval = 0;
  int departure_s = 0;
  double u = 0;
  int level = 0;
  bool clamped = false;
  double tau_hat = 0;
};

struct WeekSweep {
  std::string path_id;
  std::vector<SweepEntry> entries;  // one per 15-minute interval
};

WeekSweep run_week_sweep(const Network& net, const std::string& path_id,
                         const Constraint& constraint, const ErrorModel& model,
                         std::uint64_t seed);

struct OverheadRow {
  std::string path_id;
  int segments = 0;
  double feature_selection_us = 0;            // CoV of the pilot + level selection
  std::map<int, double> mcs_ms_per_level;     // wall time of a full MCS per level
  double overhead_vs_mcs100 = 0;              // feature_selection / MCS(100)
};

struct OverheadReport {
  std::vector<OverheadRow> rows;
  std::vector<int> levels;
};

// Wall-time accounting of the adaptivity layer against plain MCS runs.
OverheadReport run_overhead(const Network& net, std::span<const std::string> path_ids,
                            const ErrorModel& model, const Constraint& constraint,
                            std::uint64_t seed, int timing_repeats = 5);

// Report writers. Timing columns carry a _ms/_us suffix; everything else is
// deterministic in (inputs, seed).
void write_validation_csv(const ValidationReport& report, const std::string& file);
void write_validation_summary_json(const ValidationReport& report, const std::string& file);
void write_comparison_csv(const ComparisonReport& report, const std::string& file);
void write_comparison_summary_json(const ComparisonReport& report, const std::string& file);
void write_sweep_csv(const WeekSweep& sweep, const std::string& file);
void write_overhead_csv(const OverheadReport& report, const std::string& file);
void write_records_csv(std::span<const ProfileRecord> records, const std::string& file);
std::vector<ProfileRecord> read_records_csv(const std::string& file);
ComparisonReport read_comparison_csv(const std::string& file);

}  // namespace ptdr
