#include "ptdr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "ptdr/mcsim.hpp"

namespace ptdr {

namespace {

bool in_window(int slot, int start, int end) { return slot >= start && slot < end; }

double slot_weight(int day, int slot, const RequestGenConfig& cfg) {
  if (day >= 5) return cfg.weight_weekend;
  if (in_window(slot, cfg.morning_start_slot, cfg.morning_end_slot) ||
      in_window(slot, cfg.evening_start_slot, cfg.evening_end_slot)) {
    return cfg.weight_rush;
  }
  if (in_window(slot, cfg.morning_start_slot - 4, cfg.morning_end_slot + 4) ||
      in_window(slot, cfg.evening_start_slot - 4, cfg.evening_end_slot + 4)) {
    return cfg.weight_shoulder;
  }
  const bool daytime = slot >= 24 && slot < 88;
  return daytime ? cfg.weight_day : cfg.weight_night;
}

}  // namespace

std::vector<Request> generate_requests(const Network& net, int count, const std::string& id_prefix,
                                       const RequestGenConfig& cfg, std::uint64_t seed,
                                       std::span<const std::string> path_subset) {
  if (net.paths.empty()) throw DataError("generate_requests: network has no paths");
  std::vector<double> cumulative(kIntervalsPerWeek);
  double total = 0;
  for (int t = 0; t < kIntervalsPerWeek; ++t) {
    total += slot_weight(t / kSlotsPerDay, t % kSlotsPerDay, cfg);
    cumulative[static_cast<std::size_t>(t)] = total;
  }

  std::vector<std::string> pool(path_subset.begin(), path_subset.end());
  if (pool.empty()) {
    for (const auto& p : net.paths) pool.push_back(p.id);
  } else {
    for (const auto& id : pool) net.path(id);  // must resolve
  }

  std::vector<Request> requests;
  requests.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng = derive_stream(seed, {stream_key("request-gen"), fnv1a64(id_prefix),
                                   static_cast<std::uint64_t>(i)});
    const double pick = rng.next_unit() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const int interval = static_cast<int>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(), kIntervalsPerWeek - 1));
    Request req;
    req.id = id_prefix + std::to_string(i);
    req.path_id = pool[rng.next_below(pool.size())];
    req.departure.seconds_into_week =
        interval * kIntervalSeconds + static_cast<int>(rng.next_below(kIntervalSeconds));
    requests.push_back(std::move(req));
  }
  return requests;
}

std::vector<std::string> congestion_prone_paths(const Network& net, double fraction,
                                                std::uint64_t seed) {
  if (!(fraction > 0 && fraction <= 1)) {
    throw std::invalid_argument("congestion_prone_paths: fraction outside (0,1]");
  }
  const DepartureTime monday_peak{30 * kIntervalSeconds};  // Monday 07:30
  std::vector<std::pair<double, std::string>> ranked;
  ranked.reserve(net.paths.size());
  for (const auto& path : net.paths) {
    const std::uint64_t scan_seed =
        derive_stream(seed, {stream_key("corridor-scan"), fnv1a64(path.id)}).next_u64();
    SampleSet pilot = run_mcs(net, path, monday_peak, kPilotSamples, scan_seed);
    ranked.emplace_back(coeff_variation(pilot.samples), path.id);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  const std::size_t keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(ranked.size()))));
  std::vector<std::string> ids;
  ids.reserve(keep);
  for (std::size_t i = 0; i < keep && i < ranked.size(); ++i) ids.push_back(ranked[i].second);
  return ids;
}

SummaryStats GroundTruthCache::get(const Network& net, const std::string& path_id,
                                   DepartureTime departure, std::size_t n_samples,
                                   std::uint64_t seed, int workers) {
  if (n_samples < 100000) throw std::invalid_argument("ground_truth: need at least 1e5 samples");
  const std::string key = std::to_string(net.content_hash()) + "-" + path_id + "-" +
                          std::to_string(departure.seconds_into_week) + "-" +
                          std::to_string(n_samples) + "-" + std::to_string(seed);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memory_.find(key);
    if (it != memory_.end()) return it->second;
  }
  const std::string disk_file =
      dir_.empty() ? std::string{} : (std::filesystem::path(dir_) / (key + ".json")).string();
  if (!disk_file.empty() && std::filesystem::exists(disk_file)) {
    nlohmann::json doc = nlohmann::json::parse(read_text_file(disk_file));
    SummaryStats s;
    s.mean = doc.at("mean").get<double>();
    s.stddev = doc.at("stddev").get<double>();
    s.cov = doc.at("cov").get<double>();
    for (std::size_t i = 0; i < s.percentiles.size(); ++i) {
      s.percentiles[i] = doc.at("percentiles")[i].get<double>();
    }
    std::lock_guard<std::mutex> lock(mutex_);
    memory_.emplace(key, s);
    return s;
  }

  SampleSet run = run_mcs(net, path_id, departure, n_samples, seed, 0, workers);
  SummaryStats s = SummaryStats::from_samples(run.samples);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++computes_;
    memory_.emplace(key, s);
  }
  if (!disk_file.empty()) {
    std::filesystem::create_directories(dir_);
    nlohmann::json doc = {{"mean", s.mean},
                          {"stddev", s.stddev},
                          {"cov", s.cov},
                          {"percentiles", s.percentiles}};
    write_text_file(disk_file, doc.dump() + "\n");
  }
  return s;
}

SummaryStats ground_truth(const Network& net, const std::string& path_id, DepartureTime departure,
                          std::size_t n_samples, std::uint64_t seed, int workers) {
  GroundTruthCache cache;
  return cache.get(net, path_id, departure, n_samples, seed, workers);
}

ErrorBreakdown measure_error(const SummaryStats& estimate, const SummaryStats& truth) {
  ErrorBreakdown out;
  for (std::size_t i = 0; i < kKeyPercentiles.size(); ++i) {
    if (truth.percentiles[i] == 0) {
      throw std::invalid_argument("measure_error: zero truth percentile");
    }
    out.per_percentile[i] =
        std::abs(truth.percentiles[i] - estimate.percentiles[i]) / truth.percentiles[i];
    out.max_error = std::max(out.max_error, out.per_percentile[i]);
  }
  return out;
}

namespace {

std::uint64_t request_seed(std::uint64_t seed, const Request& req) {
  return derive_stream(seed, {stream_key("request-run"), fnv1a64(req.id)}).next_u64();
}

std::uint64_t truth_seed(std::uint64_t seed, const Request& req) {
  // distinct from the adaptive stream so truth noise is independent
  return derive_stream(seed, {stream_key("ground-truth"), fnv1a64(req.path_id),
                              static_cast<std::uint64_t>(req.departure.seconds_into_week)})
      .next_u64();
}

}  // namespace

ValidationReport run_validation(const Network& net, std::span<const Request> requests,
                                const std::unordered_set<std::string>& training_ids,
                                const Constraint& constraint, const ErrorModel& model,
                                std::size_t truth_samples, std::uint64_t seed,
                                GroundTruthCache* cache, int workers) {
  constraint.validate();
  for (const auto& req : requests) {
    if (training_ids.count(req.id) > 0) {
      throw std::invalid_argument("run_validation: request '" + req.id +
                                  "' overlaps the training set");
    }
  }
  GroundTruthCache local;
  GroundTruthCache& gt = cache != nullptr ? *cache : local;

  ValidationReport report;
  report.records.reserve(requests.size());
  int violations = 0;
  long total_samples = 0;
  int clamped = 0;
  for (const auto& req : requests) {
    RouteEstimate est = adaptive_route_query(net, req.path_id, req.departure, constraint, model,
                                             request_seed(seed, req), workers);
    const SummaryStats truth =
        gt.get(net, req.path_id, req.departure, truth_samples, truth_seed(seed, req), workers);
    const ErrorBreakdown err = measure_error(est.stats, truth);

    ValidationRecord rec;
    rec.request = req;
    rec.u = est.unpredictability;
    rec.level = est.selected_level;
    rec.clamped = est.clamped;
    rec.measured_error = err.max_error;
    rec.per_percentile_errors = err.per_percentile;
    report.records.push_back(std::move(rec));

    if (err.max_error > constraint.epsilon) ++violations;
    if (est.clamped) ++clamped;
    total_samples += est.selected_level;
    report.summary.level_histogram[est.selected_level] += 1;
  }
  report.summary.request_count = static_cast<int>(requests.size());
  report.summary.violation_rate =
      requests.empty() ? 0 : static_cast<double>(violations) / static_cast<double>(requests.size());
  report.summary.avg_samples =
      requests.empty() ? 0 : static_cast<double>(total_samples) / static_cast<double>(requests.size());
  report.summary.clamp_rate =
      requests.empty() ? 0 : static_cast<double>(clamped) / static_cast<double>(requests.size());
  report.summary.constraint = constraint;
  report.summary.truth_samples = truth_samples;
  report.summary.seed = seed;
  return report;
}

ComparisonRow make_comparison_row(double epsilon, double regression_quantile,
                                  const StaticBaseline& baseline, double adaptive_avg_samples) {
  ComparisonRow row;
  row.epsilon = epsilon;
  row.regression_quantile = regression_quantile;
  row.baseline_level = baseline.level;
  row.baseline_flagged = baseline.flagged;
  row.baseline_avg_samples = static_cast<double>(baseline.level);
  row.adaptive_avg_samples = adaptive_avg_samples;
  row.savings = 1.0 - row.adaptive_avg_samples / row.baseline_avg_samples;
  row.speedup_estimate =
      row.adaptive_avg_samples > 0 ? row.baseline_avg_samples / row.adaptive_avg_samples : 0;
  return row;
}

ComparisonReport run_comparison(const Network& net, std::span<const Request> requests,
                                std::span<const ComparisonConfig> configs,
                                const std::map<double, ErrorModel>& model_per_quantile,
                                std::span<const ProfileRecord> training_records,
                                const Constraint& base_constraint, std::size_t truth_samples,
                                std::uint64_t seed, GroundTruthCache* cache, int workers) {
  if (training_records.empty()) {
    throw std::invalid_argument("run_comparison: no training records for the static baseline");
  }
  GroundTruthCache local;
  GroundTruthCache& gt = cache != nullptr ? *cache : local;

  // Expected error per training record; the static tuning consumes its CDF.
  const double multiplier = n_of_ci(base_constraint.confidence);
  std::map<int, std::vector<double>> expected_errors;
  for (const auto& rec : training_records) {
    expected_errors[rec.level].push_back(multiplier * rec.nu);
  }

  ComparisonReport report;
  report.request_count = static_cast<int>(requests.size());
  report.truth_samples = truth_samples;
  report.seed = seed;

  for (const auto& cfg : configs) {
    auto model_it = model_per_quantile.find(cfg.regression_quantile);
    if (model_it == model_per_quantile.end()) {
      throw std::invalid_argument("run_comparison: no model for quantile " +
                                  format_double(cfg.regression_quantile));
    }
    const ErrorModel& model = model_it->second;

    Constraint constraint = base_constraint;
    constraint.epsilon = cfg.epsilon;

    const StaticBaseline baseline =
        static_baseline_level(expected_errors, cfg.epsilon, cfg.regression_quantile * 100.0);

    long adaptive_total = 0;
    int adaptive_violations = 0;
    int baseline_violations = 0;
    int clamped = 0;
    for (const auto& req : requests) {
      RouteEstimate est = adaptive_route_query(net, req.path_id, req.departure, constraint, model,
                                               request_seed(seed, req), workers);
      const SummaryStats truth =
          gt.get(net, req.path_id, req.departure, truth_samples, truth_seed(seed, req), workers);
      if (measure_error(est.stats, truth).max_error > cfg.epsilon) ++adaptive_violations;
      if (est.clamped) ++clamped;
      adaptive_total += est.selected_level;

      SampleSet fixed = run_mcs(net, req.path_id, req.departure,
                                static_cast<std::size_t>(baseline.level), request_seed(seed, req),
                                0, workers);
      const SummaryStats fixed_stats = SummaryStats::from_samples(fixed.samples);
      if (measure_error(fixed_stats, truth).max_error > cfg.epsilon) ++baseline_violations;
    }

    const double adaptive_avg =
        requests.empty() ? 0 : static_cast<double>(adaptive_total) / static_cast<double>(requests.size());
    ComparisonRow row = make_comparison_row(cfg.epsilon, cfg.regression_quantile, baseline, adaptive_avg);
    row.adaptive_violation_rate =
        requests.empty() ? 0
                         : static_cast<double>(adaptive_violations) / static_cast<double>(requests.size());
    row.baseline_violation_rate =
        requests.empty() ? 0
                         : static_cast<double>(baseline_violations) / static_cast<double>(requests.size());
    row.adaptive_clamp_rate =
        requests.empty() ? 0 : static_cast<double>(clamped) / static_cast<double>(requests.size());
    report.rows.push_back(row);
  }
  return report;
}

WeekSweep run_week_sweep(const Network& net, const std::string& path_id,
                         const Constraint& constraint, const ErrorModel& model,
                         std::uint64_t seed) {
  WeekSweep sweep;
  sweep.path_id = path_id;
  sweep.entries.reserve(kIntervalsPerWeek);
  for (int t = 0; t < kIntervalsPerWeek; ++t) {
    DepartureTime dep{t * kIntervalSeconds};
    const std::uint64_t q_seed =
        derive_stream(seed, {stream_key("week-sweep"), static_cast<std::uint64_t>(t)}).next_u64();
    RouteEstimate est = adaptive_route_query(net, path_id, dep, constraint, model, q_seed);
    SweepEntry e;
    e.interval = t;
    e.departure_s = dep.seconds_into_week;
    e.u = est.unpredictability;
    e.level = est.selected_level;
    e.clamped = est.clamped;
    e.tau_hat = est.tau_hat;
    sweep.entries.push_back(e);
  }
  return sweep;
}

OverheadReport run_overhead(const Network& net, std::span<const std::string> path_ids,
                            const ErrorModel& model, const Constraint& constraint,
                            std::uint64_t seed, int timing_repeats) {
  using clock = std::chrono::steady_clock;
  OverheadReport report;
  for (const auto& l : model.lines) report.levels.push_back(l.samples);

  for (const auto& path_id : path_ids) {
    const Path& path = net.path(path_id);
    OverheadRow row;
    row.path_id = path_id;
    row.segments = static_cast<int>(path.segment_indices.size());

    DepartureTime dep{8 * 3600 - 1800};  // Monday 07:30, inside the rush window
    const std::uint64_t run_seed =
        derive_stream(seed, {stream_key("overhead"), fnv1a64(path_id)}).next_u64();

    SampleSet pilot = run_mcs(net, path, dep, kPilotSamples, run_seed);
    double best_us = std::numeric_limits<double>::infinity();
    volatile int level_sink = 0;
    for (int r = 0; r < timing_repeats; ++r) {
      const auto t0 = clock::now();
      const double u = coeff_variation(pilot.samples);
      const LevelChoice choice = select_level(model, u, constraint);
      const auto t1 = clock::now();
      level_sink = choice.level;
      best_us = std::min(best_us, std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
    (void)level_sink;
    row.feature_selection_us = best_us;

    for (int level : report.levels) {
      double best_ms = std::numeric_limits<double>::infinity();
      for (int r = 0; r < timing_repeats; ++r) {
        const auto t0 = clock::now();
        SampleSet run = run_mcs(net, path, dep, static_cast<std::size_t>(level), run_seed);
        const auto t1 = clock::now();
        best_ms = std::min(best_ms, std::chrono::duration<double, std::milli>(t1 - t0).count());
      }
      row.mcs_ms_per_level[level] = best_ms;
    }
    row.overhead_vs_mcs100 = row.feature_selection_us / 1000.0 / row.mcs_ms_per_level.begin()->second;
    report.rows.push_back(std::move(row));
  }
  return report;
}

// --- report writers ---------------------------------------------------------

namespace {

std::string bool_str(bool b) { return b ? "1" : "0"; }

}  // namespace

void write_validation_csv(const ValidationReport& report, const std::string& file) {
  std::string out =
      "request_id,path_id,departure_s,u,level,clamped,measured_error";
  for (double y : kKeyPercentiles) out += ",err_p" + format_double(y);
  out += '\n';
  for (const auto& r : report.records) {
    out += r.request.id + ',' + r.request.path_id + ',' +
           std::to_string(r.request.departure.seconds_into_week) + ',' + format_double(r.u) + ',' +
           std::to_string(r.level) + ',' + bool_str(r.clamped) + ',' +
           format_double(r.measured_error);
    for (double e : r.per_percentile_errors) out += ',' + format_double(e);
    out += '\n';
  }
  write_text_file(file, out);
}

void write_validation_summary_json(const ValidationReport& report, const std::string& file) {
  const auto& s = report.summary;
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [level, n] : s.level_histogram) hist[std::to_string(level)] = n;
  nlohmann::json doc = {{"request_count", s.request_count},
                        {"violation_rate", s.violation_rate},
                        {"avg_samples", s.avg_samples},
                        {"clamp_rate", s.clamp_rate},
                        {"level_histogram", hist},
                        {"epsilon", s.constraint.epsilon},
                        {"confidence", s.constraint.confidence},
                        {"percentile_y", s.constraint.percentile_y},
                        {"truth_samples", s.truth_samples},
                        {"seed", s.seed}};
  write_text_file(file, doc.dump(2) + "\n");
}

void write_comparison_csv(const ComparisonReport& report, const std::string& file) {
  std::string out =
      "epsilon,regression_quantile,baseline_level,baseline_flagged,baseline_avg_samples,"
      "adaptive_avg_samples,savings,baseline_violation_rate,adaptive_violation_rate,"
      "adaptive_clamp_rate,speedup_estimate\n";
  for (const auto& r : report.rows) {
    out += format_double(r.epsilon) + ',' + format_double(r.regression_quantile) + ',' +
           std::to_string(r.baseline_level) + ',' + bool_str(r.baseline_flagged) + ',' +
           format_double(r.baseline_avg_samples) + ',' + format_double(r.adaptive_avg_samples) +
           ',' + format_double(r.savings) + ',' + format_double(r.baseline_violation_rate) + ',' +
           format_double(r.adaptive_violation_rate) + ',' + format_double(r.adaptive_clamp_rate) +
           ',' + format_double(r.speedup_estimate) + '\n';
  }
  write_text_file(file, out);
}

void write_comparison_summary_json(const ComparisonReport& report, const std::string& file) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"epsilon", r.epsilon},
                    {"regression_quantile", r.regression_quantile},
                    {"baseline_level", r.baseline_level},
                    {"baseline_flagged", r.baseline_flagged},
                    {"baseline_avg_samples", r.baseline_avg_samples},
                    {"adaptive_avg_samples", r.adaptive_avg_samples},
                    {"savings", r.savings},
                    {"baseline_violation_rate", r.baseline_violation_rate},
                    {"adaptive_violation_rate", r.adaptive_violation_rate},
                    {"adaptive_clamp_rate", r.adaptive_clamp_rate},
                    {"speedup_estimate", r.speedup_estimate}});
  }
  nlohmann::json doc = {{"rows", rows},
                        {"request_count", report.request_count},
                        {"truth_samples", report.truth_samples},
                        {"seed", report.seed}};
  write_text_file(file, doc.dump(2) + "\n");
}

void write_sweep_csv(const WeekSweep& sweep, const std::string& file) {
  std::string out = "interval,departure_s,u,level,clamped,tau_hat\n";
  for (const auto& e : sweep.entries) {
    out += std::to_string(e.interval) + ',' + std::to_string(e.departure_s) + ',' +
           format_double(e.u) + ',' + std::to_string(e.level) + ',' + bool_str(e.clamped) + ',' +
           format_double(e.tau_hat) + '\n';
  }
  write_text_file(file, out);
}

void write_overhead_csv(const OverheadReport& report, const std::string& file) {
  std::string out = "path_id,segments,feature_selection_us";
  for (int level : report.levels) out += ",mcs_ms_" + std::to_string(level);
  out += ",overhead_vs_mcs100\n";
  for (const auto& r : report.rows) {
    out += r.path_id + ',' + std::to_string(r.segments) + ',' +
           format_double(r.feature_selection_us);
    for (int level : report.levels) out += ',' + format_double(r.mcs_ms_per_level.at(level));
    out += ',' + format_double(r.overhead_vs_mcs100) + '\n';
  }
  write_text_file(file, out);
}

void write_records_csv(std::span<const ProfileRecord> records, const std::string& file) {
  std::string out = "request_id,path_id,departure_s,level,u,nu,repetitions,percentile_y\n";
  for (const auto& r : records) {
    out += r.request_id + ',' + r.path_id + ',' +
           std::to_string(r.departure.seconds_into_week) + ',' + std::to_string(r.level) + ',' +
           format_double(r.u) + ',' + format_double(r.nu) + ',' + std::to_string(r.repetitions) +
           ',' + format_double(r.percentile_y) + '\n';
  }
  write_text_file(file, out);
}

std::vector<ProfileRecord> read_records_csv(const std::string& file) {
  const std::string text = read_text_file(file);
  std::vector<ProfileRecord> records;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const std::string where = file + ":" + std::to_string(line_no);
    auto f = split_csv_line(line);
    if (f.size() != 8) throw DataError(where + ": expected 8 fields");
    ProfileRecord r;
    r.request_id = f[0];
    r.path_id = f[1];
    r.departure.seconds_into_week = static_cast<int>(parse_long(f[2], where));
    r.level = static_cast<int>(parse_long(f[3], where));
    r.u = parse_double(f[4], where);
    r.nu = parse_double(f[5], where);
    r.repetitions = static_cast<int>(parse_long(f[6], where));
    r.percentile_y = parse_double(f[7], where);
    records.push_back(std::move(r));
  }
  return records;
}

ComparisonReport read_comparison_csv(const std::string& file) {
  const std::string text = read_text_file(file);
  ComparisonReport report;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const std::string where = file + ":" + std::to_string(line_no);
    auto f = split_csv_line(line);
    if (f.size() != 11) throw DataError(where + ": expected 11 fields");
    ComparisonRow r;
    r.epsilon = parse_double(f[0], where);
    r.regression_quantile = parse_double(f[1], where);
    r.baseline_level = static_cast<int>(parse_long(f[2], where));
    r.baseline_flagged = f[3] == "1";
    r.baseline_avg_samples = parse_double(f[4], where);
    r.adaptive_avg_samples = parse_double(f[5], where);
    r.savings = parse_double(f[6], where);
    r.baseline_violation_rate = parse_double(f[7], where);
    r.adaptive_violation_rate = parse_double(f[8], where);
    r.adaptive_clamp_rate = parse_double(f[9], where);
    r.speedup_estimate = parse_double(f[10], where);
    report.rows.push_back(r);
  }
  return report;
}

}  // namespace ptdr
