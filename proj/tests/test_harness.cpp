#include <doctest.h>

#include <cmath>
#include <unordered_set>

#include "ptdr/harness.hpp"
#include "ptdr/mcsim.hpp"
#include "test_util.hpp"

using namespace ptdr;
using namespace ptdr::testing;

namespace {

ErrorModel fixture_model(double y = 95) {
  ErrorModel model;
  model.percentile_y = y;
  model.regression_quantile = 0.95;
  model.lines = {{100, {0.0, 0.38, 0.95, 100}},
                 {300, {0.0, 0.22, 0.95, 100}},
                 {1000, {0.0, 0.12, 0.95, 100}},
                 {3000, {0.0, 0.071, 0.95, 100}}};
  return model;
}

}  // namespace

TEST_CASE("generate_requests: deterministic, prefixed, in range") {
  SynthConfig cfg;
  cfg.segment_count = 20;
  cfg.path_count = 5;
  cfg.path_min_segments = 3;
  cfg.path_max_segments = 6;
  const Network net = synth_network(cfg);
  const auto a = generate_requests(net, 50, "val-", RequestGenConfig{}, 31);
  const auto b = generate_requests(net, 50, "val-", RequestGenConfig{}, 31);
  REQUIRE(a.size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].path_id == b[i].path_id);
    CHECK(a[i].departure.seconds_into_week == b[i].departure.seconds_into_week);
    CHECK(a[i].id.rfind("val-", 0) == 0);
    CHECK(a[i].departure.seconds_into_week >= 0);
    CHECK(a[i].departure.seconds_into_week < kWeekSeconds);
  }
}

TEST_CASE("generate_requests: rush weighting shifts mass into the windows") {
  SynthConfig cfg;
  cfg.segment_count = 20;
  cfg.path_count = 5;
  cfg.path_min_segments = 3;
  cfg.path_max_segments = 6;
  const Network net = synth_network(cfg);
  RequestGenConfig gen;
  const auto reqs = generate_requests(net, 4000, "w-", gen, 5);
  int rush = 0;
  for (const auto& r : reqs) {
    const int slot = (r.departure.seconds_into_week / kIntervalSeconds) % kSlotsPerDay;
    const int day = r.departure.seconds_into_week / (kSlotsPerDay * kIntervalSeconds);
    if (day < 5 && ((slot >= gen.morning_start_slot && slot < gen.morning_end_slot) ||
                    (slot >= gen.evening_start_slot && slot < gen.evening_end_slot))) {
      ++rush;
    }
  }
  // 40 weekday rush slots out of 672; uniform sampling would put ~6% there.
  CHECK(static_cast<double>(rush) / 4000.0 > 0.08);
}

TEST_CASE("ground_truth: deterministic network reproduces the exact time") {
  const Network net = tiny_network({{10, 1.0}});
  const SummaryStats truth = ground_truth(net, "path0", {0}, 100000, 3);
  for (double p : truth.percentiles) CHECK(p == doctest::Approx(100.0));
  CHECK(truth.mean == doctest::Approx(100.0));
}

TEST_CASE("ground_truth: percentiles near the exact oracle") {
  const Network net = make_network({uniform_profile("p0", {{10, 0.5}, {20, 0.5}})},
                                   {{"s0", 900, "p0"}, {"s1", 900, "p0"}}, {{"s0", "s1"}});
  const ExactDistribution exact = enumerate_exact(net, net.paths[0], {0});
  const SummaryStats truth = ground_truth(net, "path0", {0}, 200000, 17);
  for (std::size_t i = 0; i < kKeyPercentiles.size(); ++i) {
    const double y = kKeyPercentiles[i];
    CHECK(truth.percentiles[i] >= exact.percentile(std::max(1.0, y - 1)));
    CHECK(truth.percentiles[i] <= exact.percentile(std::min(99.0, y + 1)));
  }
}

TEST_CASE("GroundTruthCache: memory and disk hits skip recomputation") {
  const Network net = tiny_network({{10, 0.5}, {20, 0.5}});
  TempDir dir("gtcache");
  {
    GroundTruthCache cache(dir.file("cache"));
    cache.get(net, "path0", {0}, 100000, 9);
    CHECK(cache.compute_count() == 1);
    cache.get(net, "path0", {0}, 100000, 9);
    CHECK(cache.compute_count() == 1);  // memory hit
  }
  GroundTruthCache reopened(dir.file("cache"));
  const SummaryStats s = reopened.get(net, "path0", {0}, 100000, 9);
  CHECK(reopened.compute_count() == 0);  // disk hit
  CHECK(s.mean > 0);
  CHECK_THROWS_AS(reopened.get(net, "path0", {0}, 50, 9), std::invalid_argument);
}

TEST_CASE("measure_error: per-percentile relative errors and max rule") {
  SummaryStats truth;
  truth.mean = 100;
  truth.percentiles = {80, 85, 90, 95, 100, 105, 110};
  SummaryStats est = truth;
  CHECK(measure_error(est, truth).max_error == 0.0);

  est.percentiles[6] = 110 * 1.03;
  const ErrorBreakdown e = measure_error(est, truth);
  CHECK(e.max_error == doctest::Approx(0.03));
  CHECK(e.per_percentile[6] == doctest::Approx(0.03));
  CHECK(e.per_percentile[0] == 0.0);

  est.percentiles[0] = 80 * 1.05;
  CHECK(measure_error(est, truth).max_error == doctest::Approx(0.05));

  truth.percentiles[2] = 0;
  CHECK_THROWS_AS(measure_error(est, truth), std::invalid_argument);
}

TEST_CASE("run_validation: deterministic network has no violations") {
  const Network net = tiny_network({{10, 1.0}});
  std::vector<Request> requests;
  for (int i = 0; i < 5; ++i) requests.push_back({"val-" + std::to_string(i), "path0", {i * 900}});
  const Constraint c{0.06, 0.99, 95};
  const ValidationReport report =
      run_validation(net, requests, {}, c, fixture_model(), 100000, 3);
  CHECK(report.summary.violation_rate == 0.0);
  CHECK(report.summary.avg_samples == 100.0);
  for (const auto& r : report.records) CHECK(r.level == 100);
}

TEST_CASE("run_validation: training overlap rejected, reports deterministic") {
  const Network net = tiny_network({{10, 0.5}, {20, 0.5}});
  std::vector<Request> requests{{"val-0", "path0", {0}}, {"val-1", "path0", {1800}}};
  const Constraint c{0.06, 0.99, 95};

  std::unordered_set<std::string> training{{"val-1"}};
  CHECK_THROWS_AS(run_validation(net, requests, training, c, fixture_model(), 100000, 3),
                  std::invalid_argument);

  GroundTruthCache cache;
  const ValidationReport a = run_validation(net, requests, {}, c, fixture_model(), 100000, 3, &cache);
  const ValidationReport b = run_validation(net, requests, {}, c, fixture_model(), 100000, 3, &cache);
  TempDir dir("valdet");
  write_validation_csv(a, dir.file("a.csv"));
  write_validation_csv(b, dir.file("b.csv"));
  CHECK(read_text_file(dir.file("a.csv")) == read_text_file(dir.file("b.csv")));
}

TEST_CASE("run_validation: summary agrees with the per-record CSV") {
  const Network net = make_network({uniform_profile("p0", {{9, 0.3}, {14, 0.4}, {22, 0.3}})},
                                   {{"s0", 900, "p0"}, {"s1", 700, "p0"}}, {{"s0", "s1"}});
  std::vector<Request> requests;
  for (int i = 0; i < 8; ++i) requests.push_back({"val-" + std::to_string(i), "path0", {i * 7200}});
  const Constraint c{0.06, 0.99, 95};
  GroundTruthCache cache;
  const ValidationReport report =
      run_validation(net, requests, {}, c, fixture_model(), 100000, 12, &cache);

  int violations = 0;
  long samples = 0;
  for (const auto& r : report.records) {
    if (r.measured_error > c.epsilon) ++violations;
    samples += r.level;
    CHECK(r.measured_error ==
          *std::max_element(r.per_percentile_errors.begin(), r.per_percentile_errors.end()));
  }
  CHECK(report.summary.violation_rate ==
        doctest::Approx(static_cast<double>(violations) / 8.0));
  CHECK(report.summary.avg_samples == doctest::Approx(static_cast<double>(samples) / 8.0));
}

TEST_CASE("make_comparison_row: table arithmetic fixture") {
  // (baseline, adaptive) pairs as published: savings percentages follow
  // 1 - adaptive/baseline exactly.
  const StaticBaseline b1000{1000, false};
  const StaticBaseline b3000{3000, false};
  const StaticBaseline b300{300, false};
  CHECK(make_comparison_row(0.03, 0.50, b1000, 632).savings == doctest::Approx(0.368));
  CHECK(make_comparison_row(0.03, 0.75, b3000, 754).savings ==
        doctest::Approx(1.0 - 754.0 / 3000.0));
  CHECK(make_comparison_row(0.03, 0.95, b3000, 1131).savings ==
        doctest::Approx(1.0 - 1131.0 / 3000.0));
  CHECK(make_comparison_row(0.06, 0.50, b300, 153).savings == doctest::Approx(0.49));
  CHECK(make_comparison_row(0.06, 0.75, b1000, 186).savings == doctest::Approx(0.814));
  CHECK(make_comparison_row(0.06, 0.95, b1000, 283).savings == doctest::Approx(0.717));
  CHECK(make_comparison_row(0.06, 0.95, b1000, 283).speedup_estimate ==
        doctest::Approx(1000.0 / 283.0));
}

TEST_CASE("run_comparison: all-deterministic workload floors at the pilot level") {
  const Network net = tiny_network({{10, 1.0}});
  std::vector<Request> requests;
  for (int i = 0; i < 4; ++i) requests.push_back({"val-" + std::to_string(i), "path0", {i * 900}});

  std::vector<ProfileRecord> training;
  for (int level : {100, 300, 1000, 3000}) {
    for (int i = 0; i < 12; ++i) {
      ProfileRecord r;
      r.request_id = "t" + std::to_string(i);
      r.path_id = "path0";
      r.level = level;
      r.u = 0;
      r.nu = 0;
      r.repetitions = 30;
      r.percentile_y = 95;
      training.push_back(r);
    }
  }
  std::map<double, ErrorModel> models{{0.95, fixture_model()}};
  const std::vector<ComparisonConfig> configs{{0.06, 0.95}};
  const Constraint base{0.06, 0.99, 95};
  const ComparisonReport report =
      run_comparison(net, requests, configs, models, training, base, 100000, 5);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].baseline_level == 100);
  CHECK(report.rows[0].adaptive_avg_samples == 100.0);
  CHECK(report.rows[0].savings == 0.0);
}

TEST_CASE("comparison csv round trip") {
  ComparisonReport report;
  report.rows.push_back(make_comparison_row(0.06, 0.95, {1000, false}, 283));
  report.rows.push_back(make_comparison_row(0.03, 0.50, {1000, true}, 632));
  report.request_count = 42;
  TempDir dir("cmpcsv");
  write_comparison_csv(report, dir.file("cmp.csv"));
  const ComparisonReport loaded = read_comparison_csv(dir.file("cmp.csv"));
  REQUIRE(loaded.rows.size() == 2);
  CHECK(loaded.rows[0].savings == report.rows[0].savings);
  CHECK(loaded.rows[1].baseline_flagged == true);
  CHECK(loaded.rows[1].adaptive_avg_samples == 632.0);
}

TEST_CASE("run_week_sweep: flat on a deterministic network and reproducible") {
  const Network net = tiny_network({{10, 1.0}});
  const Constraint c{0.06, 0.99, 95};
  const WeekSweep sweep = run_week_sweep(net, "path0", c, fixture_model(), 13);
  REQUIRE(sweep.entries.size() == kIntervalsPerWeek);
  for (const auto& e : sweep.entries) {
    CHECK(e.level == 100);
    CHECK(e.u == 0.0);
  }
  const WeekSweep again = run_week_sweep(net, "path0", c, fixture_model(), 13);
  TempDir dir("sweepdet");
  write_sweep_csv(sweep, dir.file("a.csv"));
  write_sweep_csv(again, dir.file("b.csv"));
  CHECK(read_text_file(dir.file("a.csv")) == read_text_file(dir.file("b.csv")));
}

TEST_CASE("records csv round trip") {
  std::vector<ProfileRecord> records;
  ProfileRecord r;
  r.request_id = "t0";
  r.path_id = "path0";
  r.departure = {12345};
  r.level = 300;
  r.u = 0.123456789;
  r.nu = 0.0345;
  r.repetitions = 30;
  r.percentile_y = 95;
  records.push_back(r);
  TempDir dir("reccsv");
  write_records_csv(records, dir.file("rec.csv"));
  const auto loaded = read_records_csv(dir.file("rec.csv"));
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].u == r.u);
  CHECK(loaded[0].nu == r.nu);
  CHECK(loaded[0].departure.seconds_into_week == 12345);
}

TEST_CASE("run_overhead: reports timing fields for each level") {
  SynthConfig cfg;
  cfg.segment_count = 60;
  cfg.path_count = 2;
  cfg.path_min_segments = 40;
  cfg.path_max_segments = 50;
  const Network net = synth_network(cfg);
  const Constraint c{0.06, 0.99, 95};
  std::vector<std::string> ids{net.paths[0].id};
  const OverheadReport report = run_overhead(net, ids, fixture_model(), c, 3, 3);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].segments >= 40);
  CHECK(report.rows[0].feature_selection_us > 0);
  for (int level : report.levels) CHECK(report.rows[0].mcs_ms_per_level.at(level) > 0);
}
