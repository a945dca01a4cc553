#include "ptdr/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace ptdr {

void Constraint::validate() const {
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("constraint: epsilon outside (0,1)");
  if (!(confidence > 0 && confidence < 1)) {
    throw std::invalid_argument("constraint: confidence outside (0,1)");
  }
  if (!(percentile_y > 0 && percentile_y < 100)) {
    throw std::invalid_argument("constraint: percentile outside (0,100)");
  }
}

double n_of_ci(double confidence) {
  if (!(confidence > 0 && confidence < 1)) {
    throw std::invalid_argument("n_of_ci: confidence outside (0,1)");
  }
  if (confidence == 0.68) return 1.0;
  if (confidence == 0.95) return 2.0;
  if (confidence == 0.99) return 3.0;
  if (confidence == 0.997) return 3.0;
  return normal_quantile((1.0 + confidence) / 2.0);
}

LevelChoice select_level(const ErrorModel& model, double u, const Constraint& constraint) {
  constraint.validate();
  if (u < 0) throw std::invalid_argument("select_level: u must be >= 0");
  if (model.percentile_y != constraint.percentile_y) {
    throw std::invalid_argument("select_level: model percentile does not match constraint");
  }
  const double multiplier = n_of_ci(constraint.confidence);
  for (const auto& l : model.lines) {
    if (multiplier * predict_nu(model, u, l.samples) <= constraint.epsilon) {
      return {l.samples, false};
    }
  }
  return {model.max_level(), true};
}

StaticBaseline static_baseline_level(const std::map<int, std::vector<double>>& errors_per_level,
                                     double epsilon, double threshold_percentile) {
  if (errors_per_level.empty()) throw std::invalid_argument("static baseline: no levels");
  const double threshold = threshold_percentile / 100.0;
  for (const auto& [level, errors] : errors_per_level) {
    if (errors.empty()) {
      throw std::invalid_argument("static baseline: empty error list for level " +
                                  std::to_string(level));
    }
    std::size_t within = 0;
    for (double e : errors) {
      if (e <= epsilon) ++within;
    }
    const double cdf = static_cast<double>(within) / static_cast<double>(errors.size());
    if (cdf >= threshold) return {level, false};
  }
  return {errors_per_level.rbegin()->first, true};
}

RouteEstimate adaptive_route_query(const Network& net, const std::string& path_id,
                                   DepartureTime departure, const Constraint& constraint,
                                   const ErrorModel& model, std::uint64_t seed, int workers) {
  using clock = std::chrono::steady_clock;
  const Path& path = net.path(path_id);

  const auto t0 = clock::now();
  SampleSet merged = run_mcs(net, path, departure, kPilotSamples, seed, 0, workers);
  const auto t1 = clock::now();

  RouteEstimate est;
  est.unpredictability = coeff_variation(merged.samples);
  const LevelChoice choice = select_level(model, est.unpredictability, constraint);
  const auto t2 = clock::now();

  if (choice.level > kPilotSamples) {
    SampleSet topup = run_mcs(net, path, departure,
                              static_cast<std::size_t>(choice.level - kPilotSamples), seed,
                              kPilotSamples, workers);
    merged.samples.insert(merged.samples.end(), topup.samples.begin(), topup.samples.end());
  }
  const auto t3 = clock::now();

  est.selected_level = choice.level;
  est.clamped = choice.clamped;
  est.stats = SummaryStats::from_samples(merged.samples);
  est.tau_hat = percentile(merged.samples, constraint.percentile_y);
  est.total_samples = static_cast<int>(merged.samples.size());
  est.pilot_reused = kPilotSamples;
  const auto ms = [](auto a, auto b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  est.pilot_ms = ms(t0, t1);
  est.selection_ms = ms(t1, t2);
  est.topup_ms = ms(t2, t3);
  return est;
}

}  // namespace ptdr
