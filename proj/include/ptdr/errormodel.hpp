#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ptdr/roadnet.hpp"
#include "ptdr/stats.hpp"

namespace ptdr {

inline constexpr int kPilotSamples = 100;

struct SamplingLevels {
  std::vector<int> counts;

  static SamplingLevels standard() { return SamplingLevels{{100, 300, 1000, 3000}}; }
  void validate() const;
};

struct TrainingRequest {
  std::string id;
  std::string path_id;
  DepartureTime departure;
};

// One profiling observation: feature u and estimator dispersion nu for a
// (request, level) pair, measured over `repetitions` independent runs.
struct ProfileRecord {
  std::string request_id;
  std::string path_id;
  DepartureTime departure;
  int level = 0;
  double u = 0;   // mean pilot coefficient of variation
  double nu = 0;  // coefficient of variation of the percentile estimate
  int repetitions = 0;
  double percentile_y = 0;
};

// For each request and sampling level, runs `repetitions` independent MCS
// runs; nu is the CoV of the y-th percentile across runs, u the mean CoV of
// each run's first 100 samples. Deterministic in `seed`.
std::vector<ProfileRecord> collect_profile_data(const Network& net,
                                                std::span<const TrainingRequest> requests,
                                                const SamplingLevels& levels, int repetitions,
                                                double percentile_y, std::uint64_t seed,
                                                int workers = 1);

struct LevelLine {
  int samples = 0;
  RegressionLine line;
};

struct ErrorModel {
  double percentile_y = 95;
  double regression_quantile = 0.75;
  std::vector<LevelLine> lines;  // ascending by samples
  struct Metadata {
    std::uint64_t seed = 0;
    int repetitions = 0;
    int record_count = 0;
  } metadata;

  const RegressionLine* find(int level) const;
  int max_level() const;
};

// Per-level quantile regression of nu on u. Fails if any level has fewer
// than 10 records or if the fitted lines are not strictly decreasing in
// level when evaluated at the median training u.
ErrorModel train_error_model(std::span<const ProfileRecord> records, double regression_quantile);

// Predicted estimator CoV, clamped at zero.
double predict_nu(const ErrorModel& model, double u, int level);

void save_model(const ErrorModel& model, const std::string& file);
ErrorModel load_model(const std::string& file);

bool operator==(const ErrorModel& a, const ErrorModel& b);

}  // namespace ptdr
