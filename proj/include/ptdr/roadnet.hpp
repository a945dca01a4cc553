#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ptdr/util.hpp"

namespace ptdr {

// Weekly time grid: 15-minute intervals, week origin Monday 00:00.
inline constexpr int kIntervalSeconds = 900;
inline constexpr int kIntervalsPerWeek = 672;  // 7 days * 96 slots
inline constexpr int kWeekSeconds = 604800;
inline constexpr int kSlotsPerDay = 96;

struct SpeedLevel {
  double speed_mps = 0;
  double probability = 0;
};

// Discrete speed distribution per 15-minute interval of a week. Speed values
// are fixed per interval list and strictly ascending; probabilities may be
// zero (an interval can collapse onto one effective level).
struct SpeedProfile {
  std::string id;
  std::vector<std::vector<SpeedLevel>> intervals;  // size kIntervalsPerWeek
};

struct Segment {
  std::string id;
  double length_m = 0;
  std::string profile_id;
  int profile_index = -1;  // resolved on load/generation
};

struct Path {
  std::string id;
  std::vector<std::string> segment_ids;
  std::vector<int> segment_indices;  // resolved on load/generation
};

struct DepartureTime {
  int seconds_into_week = 0;
  int interval() const { return seconds_into_week / kIntervalSeconds; }
};

// Interval index for an elapsed time measured in seconds from the week
// origin; wraps at the week boundary.
int interval_of(double elapsed_seconds);

struct Network {
  std::vector<SpeedProfile> profiles;
  std::vector<Segment> segments;
  std::vector<Path> paths;

  std::unordered_map<std::string, int> profile_by_id;
  std::unordered_map<std::string, int> segment_by_id;
  std::unordered_map<std::string, int> path_by_id;

  void rebuild_index();

  int segment_index(const std::string& id) const;  // -1 if unknown
  int path_index(const std::string& id) const;
  const Path& path(const std::string& id) const;  // throws DataError if unknown

  // FNV-1a over the canonical serialization; used as a cache key.
  std::uint64_t content_hash() const;
};

// Speed distribution seen when entering `segment_id` at `elapsed_time`
// seconds into the week (wraps modulo one week).
const std::vector<SpeedLevel>& profile_at(const Network& net, const std::string& segment_id,
                                          double elapsed_time);
const std::vector<SpeedLevel>& profile_at_index(const Network& net, int segment_index,
                                                double elapsed_time);

// Checks every type invariant; throws DataError with a description on the
// first violation.
void validate_network(const Network& net);

Network load_network(const std::string& segments_csv, const std::string& profiles_csv,
                     const std::string& paths_json);

// Writes segments.csv / profiles.csv / paths.json into `dir`.
void save_network(const Network& net, const std::string& dir);

struct SynthConfig {
  int segment_count = 600;
  int path_count = 400;
  int path_min_segments = 12;
  int path_max_segments = 72;
  double base_speed_min_kmh = 45.0;
  double base_speed_max_kmh = 115.0;
  // Speed multiplier reached by the slowest level (drawn per profile).
  double rush_depression_min = 0.22;
  double rush_depression_max = 0.30;
  // Weekday rush windows as day-slot ranges, half-open [start, end).
  int morning_start_slot = 28;  // 07:00
  int morning_end_slot = 32;    // 08:00
  int evening_start_slot = 64;  // 16:00
  int evening_end_slot = 68;    // 17:00
  int window_ramp_slots = 4;    // shoulder width on each side of a window
  // 0 disables all dispersion (every interval becomes single-level).
  double congestion_amplitude = 1.0;
  // Residual dispersion fraction outside rush windows.
  double night_dispersion = 0.02;
  int profile_count = 0;  // 0: derived from segment_count
  std::uint64_t seed = 1;

  void validate() const;
};

// Deterministic synthetic network: same config (including seed) produces a
// byte-identical save. Profiles carry two weekday rush peaks and quiet
// nights; dispersion magnitude varies per profile so paths differ in
// predictability.
Network synth_network(const SynthConfig& cfg);

}  // namespace ptdr
