#include <doctest.h>

#include <cmath>

#include "ptdr/errormodel.hpp"
#include "ptdr/rng.hpp"
#include "test_util.hpp"

using namespace ptdr;
using namespace ptdr::testing;

namespace {

std::vector<TrainingRequest> repeated_requests(const Network& net, int count) {
  std::vector<TrainingRequest> reqs;
  for (int i = 0; i < count; ++i) {
    reqs.push_back({"t" + std::to_string(i), net.paths[0].id, {i * 1800}});
  }
  return reqs;
}

// Records lying exactly on nu = intercept + slope * u per level.
std::vector<ProfileRecord> synthetic_records(const std::vector<std::pair<int, double>>& slopes,
                                             int per_level) {
  std::vector<ProfileRecord> records;
  for (const auto& [level, slope] : slopes) {
    for (int i = 0; i < per_level; ++i) {
      ProfileRecord r;
      r.request_id = "t" + std::to_string(i);
      r.path_id = "path0";
      r.departure = {0};
      r.level = level;
      r.u = 0.02 + 0.01 * i;
      r.nu = slope * r.u;
      r.repetitions = 30;
      r.percentile_y = 95;
      records.push_back(r);
    }
  }
  return records;
}

}  // namespace

TEST_CASE("collect_profile_data: deterministic network gives zero feature and error") {
  const Network net = tiny_network({{10, 1.0}});
  const auto requests = repeated_requests(net, 30);
  const auto records = collect_profile_data(net, requests, SamplingLevels{{100, 300}}, 10, 95, 42);
  REQUIRE(records.size() == 60);
  for (const auto& r : records) {
    CHECK(r.u == 0.0);
    CHECK(r.nu == 0.0);
  }
}

TEST_CASE("collect_profile_data: deterministic in seed") {
  const Network net = tiny_network({{10, 0.5}, {20, 0.5}});
  const auto requests = repeated_requests(net, 30);
  const auto a = collect_profile_data(net, requests, SamplingLevels{{100, 300}}, 10, 95, 9);
  const auto b = collect_profile_data(net, requests, SamplingLevels{{100, 300}}, 10, 95, 9);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].u == b[i].u);
    CHECK(a[i].nu == b[i].nu);
    CHECK(a[i].request_id == b[i].request_id);
  }
  // worker count must not change the records either
  const auto c = collect_profile_data(net, requests, SamplingLevels{{100, 300}}, 10, 95, 9, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].u == c[i].u);
    CHECK(a[i].nu == c[i].nu);
  }
}

TEST_CASE("collect_profile_data: estimator dispersion shrinks with the level") {
  // several two-level segments so the travel-time distribution has enough
  // distinct outcomes for the percentile estimator to wobble
  std::vector<SegmentSpec> segs;
  std::vector<std::string> path;
  for (int i = 0; i < 6; ++i) {
    segs.push_back({"s" + std::to_string(i), 600.0 + 130.0 * i, "p0"});
    path.push_back("s" + std::to_string(i));
  }
  const Network net =
      make_network({uniform_profile("p0", {{10, 0.5}, {20, 0.5}})}, segs, {path});
  const auto requests = repeated_requests(net, 30);
  const auto records =
      collect_profile_data(net, requests, SamplingLevels{{100, 3000}}, 30, 95, 1234);
  double nu100 = 0, nu3000 = 0;
  for (const auto& r : records) {
    if (r.level == 100) nu100 += r.nu;
    if (r.level == 3000) nu3000 += r.nu;
  }
  CHECK(nu100 > 3.0 * nu3000);  // expected ratio is sqrt(30) ~ 5.5
}

TEST_CASE("collect_profile_data: input validation") {
  const Network net = tiny_network({{10, 1.0}});
  const auto few = repeated_requests(net, 5);
  CHECK_THROWS_AS(collect_profile_data(net, few, SamplingLevels::standard(), 30, 95, 1),
                  std::invalid_argument);
  const auto enough = repeated_requests(net, 30);
  CHECK_THROWS_AS(collect_profile_data(net, enough, SamplingLevels::standard(), 5, 95, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(collect_profile_data(net, enough, SamplingLevels{{50, 100}}, 30, 95, 1),
                  std::invalid_argument);
}

TEST_CASE("train: recovers exact per-level lines") {
  const auto records =
      synthetic_records({{100, 0.38}, {300, 0.22}, {1000, 0.12}, {3000, 0.071}}, 12);
  const ErrorModel model = train_error_model(records, 0.95);
  REQUIRE(model.lines.size() == 4);
  CHECK(model.lines[0].line.slope == doctest::Approx(0.38).epsilon(1e-9));
  CHECK(model.lines[0].line.intercept == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(model.lines[3].line.slope == doctest::Approx(0.071).epsilon(1e-9));
  CHECK(model.lines[3].line.intercept == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("train: conservative quantile dominates the median fit") {
  Rng rng = derive_stream(5, {55});
  std::vector<ProfileRecord> records;
  for (int level : {100, 300}) {
    for (int i = 0; i < 40; ++i) {
      ProfileRecord r;
      r.request_id = "t" + std::to_string(i);
      r.level = level;
      r.u = rng.next_range(0.02, 0.3);
      r.nu = (level == 100 ? 0.3 : 0.17) * r.u * rng.next_range(0.6, 1.4);
      r.repetitions = 30;
      r.percentile_y = 95;
      records.push_back(r);
    }
  }
  const ErrorModel m95 = train_error_model(records, 0.95);
  const ErrorModel m50 = train_error_model(records, 0.50);
  for (const auto& r : records) {
    CHECK(predict_nu(m95, r.u, r.level) >= predict_nu(m50, r.u, r.level) - 1e-12);
  }
}

TEST_CASE("train: rejects thin levels and broken ordering") {
  auto thin = synthetic_records({{100, 0.38}}, 5);
  CHECK_THROWS_AS(train_error_model(thin, 0.75), DataError);

  // inverted: more samples predict a larger error
  auto inverted = synthetic_records({{100, 0.05}, {3000, 0.4}}, 12);
  CHECK_THROWS_AS(train_error_model(inverted, 0.75), DataError);
}

TEST_CASE("predict_nu: evaluation and clamping") {
  ErrorModel model;
  model.percentile_y = 95;
  model.regression_quantile = 0.75;
  model.lines = {{100, {0.0, 0.38, 0.75, 12}}};
  CHECK(predict_nu(model, 0.1, 100) == doctest::Approx(0.038));
  CHECK_THROWS_AS(predict_nu(model, 0.1, 500), std::invalid_argument);
  CHECK_THROWS_AS(predict_nu(model, -1.0, 100), std::invalid_argument);

  // negative predictions clamp to zero
  ErrorModel flat;
  flat.percentile_y = 95;
  flat.regression_quantile = 0.75;
  flat.lines = {{3000, {0.01, -0.001, 0.75, 12}}};
  CHECK(predict_nu(flat, 0.0, 3000) == doctest::Approx(0.01));
  CHECK(predict_nu(flat, 50.0, 3000) == 0.0);

  // across levels the prediction never rises with more samples, even when
  // noisy per-level fits cross
  ErrorModel crossed;
  crossed.percentile_y = 95;
  crossed.regression_quantile = 0.75;
  crossed.lines = {{100, {0.001, 0.38, 0.75, 12}}, {300, {0.002, 0.2, 0.75, 12}}};
  CHECK(predict_nu(crossed, 0.0, 300) == doctest::Approx(0.001));  // level-100 line is lower
  CHECK(predict_nu(crossed, 0.1, 300) == doctest::Approx(0.022));
}

TEST_CASE("model persistence: round trip and schema errors") {
  const auto records =
      synthetic_records({{100, 0.38}, {300, 0.22}, {1000, 0.12}, {3000, 0.071}}, 12);
  ErrorModel model = train_error_model(records, 0.75);
  model.metadata.seed = 777;

  TempDir dir("model");
  save_model(model, dir.file("model.json"));
  const ErrorModel loaded = load_model(dir.file("model.json"));
  CHECK(loaded == model);

  // unknown version tag
  std::string text = read_text_file(dir.file("model.json"));
  write_text_file(dir.file("bad_version.json"),
                  std::string(text).replace(text.find("\"version\": 1"), 12, "\"version\": 9"));
  CHECK_THROWS_WITH_AS(load_model(dir.file("bad_version.json")), doctest::Contains("version"),
                       DataError);

  // a level without its line is a schema violation
  std::string levels_broken = text;
  const auto pos = levels_broken.find("\"intercept\"");
  levels_broken.replace(pos, 11, "\"misnamed\"");
  write_text_file(dir.file("bad_schema.json"), levels_broken);
  CHECK_THROWS_WITH_AS(load_model(dir.file("bad_schema.json")), doctest::Contains("schema"),
                       DataError);
}
