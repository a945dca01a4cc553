#include "ptdr/mcsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace ptdr {

namespace {

const std::uint64_t kMcsKey = stream_key("mcs-sample");

double pick_speed(const std::vector<SpeedLevel>& levels, double u) {
  double cum = 0;
  for (const auto& lv : levels) {
    cum += lv.probability;
    if (u < cum) return lv.speed_mps;
  }
  return levels.back().speed_mps;  // guards the 1e-9 slack in probability sums
}

}  // namespace

double simulate_traversal(const Network& net, const Path& path, DepartureTime departure, Rng& rng) {
  double elapsed = static_cast<double>(departure.seconds_into_week);
  for (int seg_idx : path.segment_indices) {
    const auto& levels = profile_at_index(net, seg_idx, elapsed);
    const double speed = pick_speed(levels, rng.next_unit());
    elapsed += net.segments[static_cast<std::size_t>(seg_idx)].length_m / speed;
  }
  return elapsed - static_cast<double>(departure.seconds_into_week);
}

SampleSet run_mcs(const Network& net, const Path& path, DepartureTime departure, std::size_t x,
                  std::uint64_t seed, std::size_t sample_offset, int workers) {
  if (x == 0) throw std::invalid_argument("run_mcs: sample count must be >= 1");
  SampleSet set;
  set.samples.resize(x);
  set.departure = departure;
  set.path_id = path.id;
  set.seed = seed;

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = derive_stream(seed, {kMcsKey, static_cast<std::uint64_t>(sample_offset + i)});
      set.samples[i] = simulate_traversal(net, path, departure, rng);
    }
  };

  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(x)));
  if (n_workers == 1) {
    worker(0, x);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    const std::size_t chunk = (x + static_cast<std::size_t>(n_workers) - 1) / static_cast<std::size_t>(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      const std::size_t begin = static_cast<std::size_t>(w) * chunk;
      const std::size_t end = std::min(x, begin + chunk);
      if (begin >= end) break;
      threads.emplace_back(worker, begin, end);
    }
    for (auto& t : threads) t.join();
  }
  return set;
}

SampleSet run_mcs(const Network& net, const std::string& path_id, DepartureTime departure,
                  std::size_t x, std::uint64_t seed, std::size_t sample_offset, int workers) {
  return run_mcs(net, net.path(path_id), departure, x, seed, sample_offset, workers);
}

double ExactDistribution::percentile(double y) const {
  if (outcomes.empty()) throw std::invalid_argument("ExactDistribution: empty");
  if (!(y > 0 && y < 100)) throw std::invalid_argument("ExactDistribution: y outside (0,100)");
  const double target = y / 100.0;
  double cum = 0;
  for (const auto& o : outcomes) {
    cum += o.probability;
    if (cum >= target - 1e-12) return o.travel_time;
  }
  return outcomes.back().travel_time;
}

double ExactDistribution::mean() const {
  double m = 0;
  for (const auto& o : outcomes) m += o.travel_time * o.probability;
  return m;
}

double ExactDistribution::stddev() const {
  const double m = mean();
  double v = 0;
  for (const auto& o : outcomes) v += (o.travel_time - m) * (o.travel_time - m) * o.probability;
  return std::sqrt(v);
}

ExactDistribution enumerate_exact(const Network& net, const Path& path, DepartureTime departure,
                                  std::size_t guard) {
  // Guard on the worst-case leaf count before descending.
  double worst = 1;
  for (int seg_idx : path.segment_indices) {
    std::size_t max_effective = 1;
    const auto& prof =
        net.profiles[static_cast<std::size_t>(net.segments[static_cast<std::size_t>(seg_idx)].profile_index)];
    for (const auto& iv : prof.intervals) {
      std::size_t effective = 0;
      for (const auto& lv : iv) {
        if (lv.probability > 0) ++effective;
      }
      max_effective = std::max(max_effective, effective);
    }
    worst *= static_cast<double>(max_effective);
    if (worst > static_cast<double>(guard)) {
      throw std::invalid_argument("enumerate_exact: outcome tree exceeds guard of " +
                                  std::to_string(guard) + " leaves");
    }
  }

  ExactDistribution dist;
  std::vector<ExactOutcome> leaves;
  leaves.reserve(static_cast<std::size_t>(worst));

  // First interval index used at each position; a second value flags time
  // variance (sibling branches observing different profiles).
  std::vector<int> first_interval(path.segment_indices.size(), -1);

  struct Frame {
    std::size_t pos;
    double elapsed;
    double probability;
  };
  std::vector<Frame> stack;
  stack.push_back({0, static_cast<double>(departure.seconds_into_week), 1.0});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.pos == path.segment_indices.size()) {
      leaves.push_back({f.elapsed - static_cast<double>(departure.seconds_into_week), f.probability});
      continue;
    }
    const int seg_idx = path.segment_indices[f.pos];
    const int iv = interval_of(f.elapsed);
    if (first_interval[f.pos] == -1) {
      first_interval[f.pos] = iv;
    } else if (first_interval[f.pos] != iv) {
      dist.time_variant_encountered = true;
    }
    const auto& levels = profile_at_index(net, seg_idx, f.elapsed);
    const double length = net.segments[static_cast<std::size_t>(seg_idx)].length_m;
    for (const auto& lv : levels) {
      if (lv.probability <= 0) continue;
      stack.push_back({f.pos + 1, f.elapsed + length / lv.speed_mps, f.probability * lv.probability});
    }
  }

  std::sort(leaves.begin(), leaves.end(),
            [](const ExactOutcome& a, const ExactOutcome& b) { return a.travel_time < b.travel_time; });
  for (const auto& leaf : leaves) {
    if (!dist.outcomes.empty() &&
        std::abs(leaf.travel_time - dist.outcomes.back().travel_time) <=
            1e-9 * std::max(1.0, leaf.travel_time)) {
      dist.outcomes.back().probability += leaf.probability;
    } else {
      dist.outcomes.push_back(leaf);
    }
  }
  return dist;
}

}  // namespace ptdr
