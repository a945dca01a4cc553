#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ptdr {

enum class ServiceDist { Exponential, Deterministic };

struct StageConfig {
  std::string name;
  int servers = 1;
  double service_mean_s = 0;
  ServiceDist dist = ServiceDist::Exponential;
  // >1 forks each request into fork_k parallel tasks at this stage and joins
  // on all of them before the next stage.
  int fork_k = 1;
};

struct PipelineConfig {
  double arrival_rate = 1.0;  // Poisson arrivals per second
  double horizon_s = 1000;
  double warmup_s = 100;
  double series_stride_s = 0;  // >0 samples queue states on this grid
  std::vector<StageConfig> stages;

  void validate() const;
};

struct StageStats {
  std::string name;
  double offered_load = 0;    // lambda * fork_k * mean_service / servers
  double utilization = 0;     // busy server time / (servers * observed time)
  double mean_queue_len = 0;  // waiting tasks, time average
  double mean_in_station = 0; // waiting + in service, time average
  double mean_response_s = 0; // per task: queue + service
  double throughput = 0;      // task completions per second
  double little_residual = 0; // |L - lambda_eff * W| / (lambda_eff * W)
  bool unstable = false;
};

struct SeriesPoint {
  double time_s = 0;
  std::vector<int> in_station;  // waiting + in service, per stage
};

struct CapacityReport {
  std::vector<StageStats> stages;
  double end_to_end_mean_s = 0;
  double end_to_end_p95_s = 0;
  double throughput = 0;  // completed requests per second
  int completed_requests = 0;
  bool any_unstable = false;
  bool insufficient_samples = false;
  std::vector<SeriesPoint> series;
};

// Event-driven simulation of the navigation pipeline: Poisson arrivals flow
// through the configured stages; a stage with fork_k > 1 behaves as a
// fork-join unit around one multi-server station. Deterministic in seed.
CapacityReport simulate_pipeline(const PipelineConfig& config, std::uint64_t seed);

// Smallest server count keeping offered utilization under the cap.
int size_stage(double arrival_rate, double mean_service_s, double utilization_cap);

struct ReferenceCase {
  double utilization_cap = 1.0;
  int total_static_target = 0;  // published total core count, static tuning
  int ptdr_static_target = 0;   // published cores of the PTDR station
};

struct ReferenceOutcome {
  double utilization_cap = 0;
  int ptdr_static = 0;
  int ptdr_adaptive = 0;
  int non_ptdr = 0;
  int total_static = 0;
  int total_adaptive = 0;
  double reduction = 0;  // 1 - total_adaptive / total_static
};

// Sizing study against published deployment totals. The PTDR service mean is
// calibrated from the first case's static PTDR allocation; non-PTDR stages
// are taken as the published remainder per case; the adaptive variant scales
// the PTDR service mean by `adaptive_service_scale` (the measured adaptive /
// static execution-time ratio of the PTDR stage).
std::vector<ReferenceOutcome> reference_sizing_experiment(double arrival_rate, int k_branches,
                                                          double adaptive_service_scale,
                                                          std::span<const ReferenceCase> cases);

// Loads a pipeline description from a flat TOML-style file: top-level
// `key = value` lines plus one `[stage.<name>]` section per station, in
// pipeline order. See README for the key list.
PipelineConfig load_pipeline_config(const std::string& file);

void write_capacity_json(const CapacityReport& report, const std::string& file);
void write_capacity_series_csv(const CapacityReport& report, const std::string& file);

}  // namespace ptdr
