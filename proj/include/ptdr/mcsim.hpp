#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptdr/rng.hpp"
#include "ptdr/roadnet.hpp"

namespace ptdr {

struct SampleSet {
  std::vector<double> samples;  // travel times, seconds
  DepartureTime departure;
  std::string path_id;
  std::uint64_t seed = 0;

  std::size_t count() const { return samples.size(); }
};

// One random traversal of the path. Speeds are looked up at the accumulated
// elapsed time (departure + partial travel time), one uniform draw per
// segment; a draw landing exactly on a cumulative boundary selects the
// higher-index level.
double simulate_traversal(const Network& net, const Path& path, DepartureTime departure, Rng& rng);

// x independent traversals. Sample i is produced from a sub-stream derived
// from (seed, sample_offset + i), so the result is identical for any worker
// count and a later run with a higher offset extends an earlier one.
SampleSet run_mcs(const Network& net, const Path& path, DepartureTime departure, std::size_t x,
                  std::uint64_t seed, std::size_t sample_offset = 0, int workers = 1);
SampleSet run_mcs(const Network& net, const std::string& path_id, DepartureTime departure,
                  std::size_t x, std::uint64_t seed, std::size_t sample_offset = 0,
                  int workers = 1);

struct ExactOutcome {
  double travel_time = 0;
  double probability = 0;
};

struct ExactDistribution {
  std::vector<ExactOutcome> outcomes;  // sorted by travel time
  bool time_variant_encountered = false;

  // Smallest travel time whose cumulative probability reaches y/100.
  double percentile(double y) const;
  double mean() const;
  double stddev() const;
};

// Exhaustive enumeration of the traversal outcome tree; intended for short
// paths. Outcomes with equal travel time are merged. The tree-size guard
// bounds the product of per-segment effective level counts.
ExactDistribution enumerate_exact(const Network& net, const Path& path, DepartureTime departure,
                                  std::size_t guard = 10'000'000);

}  // namespace ptdr
