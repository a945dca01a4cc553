#include "ptdr/roadnet.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ptdr/rng.hpp"

namespace ptdr {

namespace {

constexpr double kProbSumTolerance = 1e-9;

std::string zero_pad(std::size_t value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

double quantize(double v, double step) { return std::round(v / step) * step; }

// km/h column value whose /3.6 reproduces the in-memory m/s exactly. Values
// that entered through the loader or the generator always have one; for
// arbitrary hand-built speeds fall back to the rounded product.
double kmh_for_mps(double mps) {
  double k = mps * 3.6;
  if (k / 3.6 == mps) return k;
  double up = k, down = k;
  for (int step = 0; step < 2; ++step) {
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    if (up / 3.6 == mps) return up;
    down = std::nextafter(down, -std::numeric_limits<double>::infinity());
    if (down / 3.6 == mps) return down;
  }
  return k;
}

}  // namespace

int interval_of(double elapsed_seconds) {
  double e = std::fmod(elapsed_seconds, static_cast<double>(kWeekSeconds));
  if (e < 0) e += kWeekSeconds;
  int idx = static_cast<int>(e / kIntervalSeconds);
  return idx >= kIntervalsPerWeek ? kIntervalsPerWeek - 1 : idx;
}

void Network::rebuild_index() {
  profile_by_id.clear();
  segment_by_id.clear();
  path_by_id.clear();
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (!profile_by_id.emplace(profiles[i].id, static_cast<int>(i)).second) {
      throw DataError("duplicate profile id '" + profiles[i].id + "'");
    }
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!segment_by_id.emplace(segments[i].id, static_cast<int>(i)).second) {
      throw DataError("duplicate segment id '" + segments[i].id + "'");
    }
    auto it = profile_by_id.find(segments[i].profile_id);
    if (it == profile_by_id.end()) {
      throw DataError("dangling profile reference '" + segments[i].profile_id + "' in segment '" +
                      segments[i].id + "'");
    }
    segments[i].profile_index = it->second;
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!path_by_id.emplace(paths[i].id, static_cast<int>(i)).second) {
      throw DataError("duplicate path id '" + paths[i].id + "'");
    }
    paths[i].segment_indices.clear();
    paths[i].segment_indices.reserve(paths[i].segment_ids.size());
    for (const auto& sid : paths[i].segment_ids) {
      auto it = segment_by_id.find(sid);
      if (it == segment_by_id.end()) {
        throw DataError("dangling segment reference '" + sid + "' in path '" + paths[i].id + "'");
      }
      paths[i].segment_indices.push_back(it->second);
    }
  }
}

int Network::segment_index(const std::string& id) const {
  auto it = segment_by_id.find(id);
  return it == segment_by_id.end() ? -1 : it->second;
}

int Network::path_index(const std::string& id) const {
  auto it = path_by_id.find(id);
  return it == path_by_id.end() ? -1 : it->second;
}

const Path& Network::path(const std::string& id) const {
  int idx = path_index(id);
  if (idx < 0) throw DataError("unknown path '" + id + "'");
  return paths[static_cast<std::size_t>(idx)];
}

std::uint64_t Network::content_hash() const {
  std::string buf;
  buf.reserve(1 << 20);
  for (const auto& p : profiles) {
    buf += p.id;
    buf += '\n';
    for (const auto& iv : p.intervals) {
      for (const auto& lv : iv) {
        buf += format_double(lv.speed_mps);
        buf += ',';
        buf += format_double(lv.probability);
        buf += ';';
      }
      buf += '\n';
    }
  }
  for (const auto& s : segments) {
    buf += s.id;
    buf += ',';
    buf += format_double(s.length_m);
    buf += ',';
    buf += s.profile_id;
    buf += '\n';
  }
  for (const auto& p : paths) {
    buf += p.id;
    buf += ':';
    for (const auto& sid : p.segment_ids) {
      buf += sid;
      buf += ',';
    }
    buf += '\n';
  }
  return fnv1a64(buf);
}

const std::vector<SpeedLevel>& profile_at_index(const Network& net, int segment_index,
                                                double elapsed_time) {
  const Segment& seg = net.segments[static_cast<std::size_t>(segment_index)];
  const SpeedProfile& prof = net.profiles[static_cast<std::size_t>(seg.profile_index)];
  return prof.intervals[static_cast<std::size_t>(interval_of(elapsed_time))];
}

const std::vector<SpeedLevel>& profile_at(const Network& net, const std::string& segment_id,
                                          double elapsed_time) {
  int idx = net.segment_index(segment_id);
  if (idx < 0) throw DataError("unknown segment '" + segment_id + "'");
  return profile_at_index(net, idx, elapsed_time);
}

void validate_network(const Network& net) {
  for (const auto& p : net.profiles) {
    if (p.intervals.size() != kIntervalsPerWeek) {
      throw DataError("profile '" + p.id + "': expected " + std::to_string(kIntervalsPerWeek) +
                      " intervals, got " + std::to_string(p.intervals.size()));
    }
    for (std::size_t k = 0; k < p.intervals.size(); ++k) {
      const auto& levels = p.intervals[k];
      const std::string where = "profile '" + p.id + "' interval " + std::to_string(k);
      if (levels.empty() || levels.size() > 8) {
        throw DataError(where + ": level count " + std::to_string(levels.size()) +
                        " outside [1,8]");
      }
      double sum = 0;
      for (std::size_t j = 0; j < levels.size(); ++j) {
        if (!(levels[j].speed_mps > 0)) throw DataError(where + ": non-positive speed");
        if (levels[j].probability < 0 || levels[j].probability > 1) {
          throw DataError(where + ": probability outside [0,1]");
        }
        if (j > 0 && !(levels[j].speed_mps > levels[j - 1].speed_mps)) {
          throw DataError(where + ": speeds not strictly ascending");
        }
        sum += levels[j].probability;
      }
      if (std::abs(sum - 1.0) > kProbSumTolerance) {
        throw DataError(where + ": probability sum " + format_double(sum) + " != 1");
      }
    }
  }
  for (const auto& s : net.segments) {
    if (!(s.length_m > 0)) throw DataError("segment '" + s.id + "': non-positive length");
    if (s.profile_index < 0 || s.profile_index >= static_cast<int>(net.profiles.size())) {
      throw DataError("segment '" + s.id + "': unresolved profile reference");
    }
  }
  for (const auto& p : net.paths) {
    if (p.segment_ids.empty()) throw DataError("path '" + p.id + "': empty segment list");
    if (p.segment_indices.size() != p.segment_ids.size()) {
      throw DataError("path '" + p.id + "': unresolved segment references");
    }
  }
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::string text = read_text_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

void load_segments(Network& net, const std::string& file) {
  auto lines = read_lines(file);
  if (lines.empty()) throw DataError(file + ": empty file");
  auto header = split_csv_line(lines[0]);
  if (header != std::vector<std::string>{"segment_id", "length_m", "profile_id"}) {
    throw DataError(file + ":1: bad header, expected segment_id,length_m,profile_id");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = file + ":" + std::to_string(i + 1);
    auto f = split_csv_line(lines[i]);
    if (f.size() != 3) throw DataError(where + ": expected 3 fields, got " + std::to_string(f.size()));
    Segment s;
    s.id = f[0];
    s.length_m = parse_double(f[1], where);
    if (!(s.length_m > 0)) throw DataError(where + ": non-positive length " + f[1]);
    s.profile_id = f[2];
    net.segments.push_back(std::move(s));
  }
}

void load_profiles(Network& net, const std::string& file) {
  auto lines = read_lines(file);
  if (lines.empty()) throw DataError(file + ": empty file");
  auto header = split_csv_line(lines[0]);
  if (header.size() < 4 || header.size() % 2 != 0 || header[0] != "profile_id" ||
      header[1] != "interval") {
    throw DataError(file + ":1: bad header, expected profile_id,interval,speed_kmh_1,prob_1,...");
  }
  const std::size_t level_width = (header.size() - 2) / 2;
  for (std::size_t j = 0; j < level_width; ++j) {
    const std::string sp = "speed_kmh_" + std::to_string(j + 1);
    const std::string pr = "prob_" + std::to_string(j + 1);
    if (header[2 + 2 * j] != sp || header[3 + 2 * j] != pr) {
      throw DataError(file + ":1: bad header column " + std::to_string(3 + 2 * j));
    }
  }

  // profile id -> (interval -> levels); "*" rows fill all intervals
  struct Pending {
    std::vector<std::vector<SpeedLevel>> intervals{kIntervalsPerWeek};
    std::vector<bool> seen = std::vector<bool>(kIntervalsPerWeek, false);
    bool star = false;
    bool rows = false;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Pending> pending;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = file + ":" + std::to_string(i + 1);
    auto f = split_csv_line(lines[i]);
    if (f.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(f.size()));
    }
    std::vector<SpeedLevel> levels;
    double sum = 0;
    for (std::size_t j = 0; j < level_width; ++j) {
      const std::string& sp = f[2 + 2 * j];
      const std::string& pr = f[3 + 2 * j];
      if (sp.empty() && pr.empty()) continue;  // rectangular padding for narrower rows
      if (sp.empty() || pr.empty()) throw DataError(where + ": half-empty level column");
      SpeedLevel lv;
      const double kmh = parse_double(sp, where);
      if (!(kmh > 0)) throw DataError(where + ": non-positive speed " + sp);
      lv.speed_mps = kmh / 3.6;
      lv.probability = parse_double(pr, where);
      if (lv.probability < 0 || lv.probability > 1) {
        throw DataError(where + ": probability outside [0,1]: " + pr);
      }
      if (!levels.empty() && !(lv.speed_mps > levels.back().speed_mps)) {
        throw DataError(where + ": speeds not strictly ascending");
      }
      sum += lv.probability;
      levels.push_back(lv);
    }
    if (levels.empty()) throw DataError(where + ": no levels");
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
      throw DataError(where + ": probability sum " + format_double(sum) + " != 1");
    }

    auto [it, inserted] = pending.try_emplace(f[0]);
    if (inserted) order.push_back(f[0]);
    Pending& p = it->second;
    if (f[1] == "*") {
      if (p.star || p.rows) throw DataError(where + ": '*' row conflicts with other rows");
      p.star = true;
      for (auto& iv : p.intervals) iv = levels;
      std::fill(p.seen.begin(), p.seen.end(), true);
    } else {
      const long interval = parse_long(f[1], where);
      if (interval < 0 || interval >= kIntervalsPerWeek) {
        throw DataError(where + ": interval " + f[1] + " outside [0," +
                        std::to_string(kIntervalsPerWeek) + ")");
      }
      if (p.star) throw DataError(where + ": row conflicts with earlier '*' row");
      if (p.seen[static_cast<std::size_t>(interval)]) {
        throw DataError(where + ": duplicate interval " + f[1]);
      }
      p.rows = true;
      p.seen[static_cast<std::size_t>(interval)] = true;
      p.intervals[static_cast<std::size_t>(interval)] = std::move(levels);
    }
  }

  for (const auto& id : order) {
    Pending& p = pending.at(id);
    for (int k = 0; k < kIntervalsPerWeek; ++k) {
      if (!p.seen[static_cast<std::size_t>(k)]) {
        throw DataError(file + ": profile '" + id + "' missing interval " + std::to_string(k));
      }
    }
    SpeedProfile prof;
    prof.id = id;
    prof.intervals = std::move(p.intervals);
    net.profiles.push_back(std::move(prof));
  }
}

void load_paths(Network& net, const std::string& file) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file + ": " + e.what());
  }
  if (!doc.is_array()) throw DataError(file + ": expected a JSON array");
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("path_id") || !item.contains("segments")) {
      throw DataError(file + ": each entry needs path_id and segments");
    }
    Path p;
    p.id = item.at("path_id").get<std::string>();
    for (const auto& sid : item.at("segments")) p.segment_ids.push_back(sid.get<std::string>());
    if (p.segment_ids.empty()) throw DataError(file + ": path '" + p.id + "' has no segments");
    net.paths.push_back(std::move(p));
  }
}

}  // namespace

Network load_network(const std::string& segments_csv, const std::string& profiles_csv,
                     const std::string& paths_json) {
  Network net;
  load_profiles(net, profiles_csv);
  load_segments(net, segments_csv);
  load_paths(net, paths_json);
  net.rebuild_index();
  validate_network(net);
  return net;
}

void save_network(const Network& net, const std::string& dir) {
  std::filesystem::create_directories(dir);

  std::size_t width = 1;
  for (const auto& p : net.profiles) {
    for (const auto& iv : p.intervals) width = std::max(width, iv.size());
  }

  std::string profiles = "profile_id,interval";
  for (std::size_t j = 0; j < width; ++j) {
    profiles += ",speed_kmh_" + std::to_string(j + 1) + ",prob_" + std::to_string(j + 1);
  }
  profiles += '\n';
  for (const auto& p : net.profiles) {
    for (int k = 0; k < kIntervalsPerWeek; ++k) {
      profiles += p.id;
      profiles += ',';
      profiles += std::to_string(k);
      const auto& levels = p.intervals[static_cast<std::size_t>(k)];
      for (std::size_t j = 0; j < width; ++j) {
        if (j < levels.size()) {
          profiles += ',';
          profiles += format_double(kmh_for_mps(levels[j].speed_mps));
          profiles += ',';
          profiles += format_double(levels[j].probability);
        } else {
          profiles += ",,";
        }
      }
      profiles += '\n';
    }
  }
  write_text_file((std::filesystem::path(dir) / "profiles.csv").string(), profiles);

  std::string segments = "segment_id,length_m,profile_id\n";
  for (const auto& s : net.segments) {
    segments += s.id;
    segments += ',';
    segments += format_double(s.length_m);
    segments += ',';
    segments += s.profile_id;
    segments += '\n';
  }
  write_text_file((std::filesystem::path(dir) / "segments.csv").string(), segments);

  nlohmann::json paths = nlohmann::json::array();
  for (const auto& p : net.paths) {
    paths.push_back({{"path_id", p.id}, {"segments", p.segment_ids}});
  }
  write_text_file((std::filesystem::path(dir) / "paths.json").string(), paths.dump(2) + "\n");
}

void SynthConfig::validate() const {
  if (segment_count < 1 || path_count < 1) throw DataError("synth: counts must be positive");
  if (path_min_segments < 1 || path_min_segments > path_max_segments) {
    throw DataError("synth: degenerate path length range");
  }
  if (path_max_segments > segment_count) {
    throw DataError("synth: path_max_segments exceeds segment_count");
  }
  if (!(base_speed_min_kmh > 0) || !(base_speed_min_kmh < base_speed_max_kmh)) {
    throw DataError("synth: degenerate base speed range");
  }
  if (!(rush_depression_min > 0) || rush_depression_min > rush_depression_max ||
      rush_depression_max > 1.0) {
    throw DataError("synth: depression factors must lie in (0,1]");
  }
  auto window_ok = [](int s, int e) { return s >= 0 && s < e && e <= kSlotsPerDay; };
  if (!window_ok(morning_start_slot, morning_end_slot) ||
      !window_ok(evening_start_slot, evening_end_slot)) {
    throw DataError("synth: bad rush window slots");
  }
  if (window_ramp_slots < 1) throw DataError("synth: window ramp must be >= 1 slot");
  if (congestion_amplitude < 0 || congestion_amplitude > 1) {
    throw DataError("synth: congestion amplitude outside [0,1]");
  }
  if (night_dispersion < 0 || night_dispersion > 0.5) {
    throw DataError("synth: night dispersion outside [0,0.5]");
  }
  if (profile_count < 0) throw DataError("synth: negative profile count");
}

namespace {

// Ramped indicator of a [start, end) slot window: 1 inside, linear shoulders.
double window_bump(int slot, int start, int end, int ramp) {
  if (slot >= start && slot < end) return 1.0;
  if (slot >= start - ramp && slot < start) {
    return 1.0 - static_cast<double>(start - slot) / (ramp + 1);
  }
  if (slot >= end && slot < end + ramp) {
    return 1.0 - static_cast<double>(slot - end + 1) / (ramp + 1);
  }
  return 0.0;
}

}  // namespace

Network synth_network(const SynthConfig& cfg) {
  cfg.validate();
  Network net;

  const int profile_count =
      cfg.profile_count > 0 ? cfg.profile_count
                            : std::clamp(cfg.segment_count / 8, 4, 64);

  for (int p = 0; p < profile_count; ++p) {
    Rng rng = derive_stream(cfg.seed, {stream_key("synth-profile"), static_cast<std::uint64_t>(p)});
    const double base_kmh = quantize(rng.next_range(cfg.base_speed_min_kmh, cfg.base_speed_max_kmh), 0.1);
    const double depression = rng.next_range(cfg.rush_depression_min, cfg.rush_depression_max);
    // Amplitude ramps across the profile table: low indices behave like calm
    // suburban corridors, high ones like congestion-prone arterials. Segments
    // pick profiles near their own position, so contiguous paths are coherent.
    const double ramp = profile_count > 1 ? static_cast<double>(p) / (profile_count - 1) : 1.0;
    const double amplitude =
        cfg.congestion_amplitude * (0.20 + 0.80 * ramp) * rng.next_range(0.9, 1.0);
    const double night = std::min(0.5, cfg.night_dispersion * rng.next_range(0.5, 1.5));

    // Fixed speed values per profile; time variation lives in the weights.
    // Two near-free-flow levels keep the distribution smooth when traffic is
    // light; the bottom level is a heavy jam that only appears under real
    // daytime congestion.
    const double fracs[5] = {depression, depression + 0.38 * (1 - depression),
                             depression + 0.70 * (1 - depression), 0.93, 1.0};
    double speeds_mps[5];
    for (int j = 0; j < 5; ++j) speeds_mps[j] = quantize(base_kmh * fracs[j], 0.01) / 3.6;

    SpeedProfile prof;
    prof.id = "p" + zero_pad(static_cast<std::size_t>(p), 3);
    prof.intervals.resize(kIntervalsPerWeek);
    for (int t = 0; t < kIntervalsPerWeek; ++t) {
      const int day = t / kSlotsPerDay;
      const int slot = t % kSlotsPerDay;
      const bool weekday = day < 5;
      double bump = 0;
      const int ramp = cfg.window_ramp_slots;
      if (weekday) {
        bump += window_bump(slot, cfg.morning_start_slot, cfg.morning_end_slot, ramp);
        bump += 0.92 * window_bump(slot, cfg.evening_start_slot, cfg.evening_end_slot, ramp);
      } else {
        bump += 0.42 * window_bump(slot, cfg.morning_start_slot + 8, cfg.morning_end_slot + 8,
                                    ramp + 2);
        bump += 0.12 * window_bump(slot, cfg.evening_start_slot, cfg.evening_end_slot, ramp + 2);
      }
      const bool daytime = slot >= 24 && slot < 88;  // 06:00-22:00
      const double intensity = std::min(1.0, (daytime ? 0.11 : 0.02) + bump);
      const double d = amplitude * (night + (1.0 - night) * intensity);

      // Congested mass d is split over {jam, slow, medium}. The jam share
      // fades with the congestion intensity: overnight there is no
      // stop-and-go mode, so quiet hours keep a mild two-level congestion
      // mixture and no sparse far tail.
      const double jam_ramp = std::clamp((intensity - 0.03) / 0.10, 0.0, 1.0);
      const double w_jam = 0.50 * jam_ramp;
      const double w_slow = 0.28 + 0.50 * (1.0 - jam_ramp) * 0.55;
      const double w_med = 0.22 + 0.50 * (1.0 - jam_ramp) * 0.45;
      const double free_mass = 1.0 - d;
      // the near-free level's share collapses with the amplitude so a
      // zero-amplitude profile is exactly single-level
      const double pair_share = 0.45 * std::min(1.0, amplitude / 0.05);

      double probs[5];
      probs[0] = quantize(d * w_jam, 1e-6);
      probs[1] = quantize(d * w_slow, 1e-6);
      probs[2] = quantize(d * w_med, 1e-6);
      probs[3] = quantize(free_mass * pair_share, 1e-6);
      probs[4] = 1.0 - probs[0] - probs[1] - probs[2] - probs[3];

      auto& levels = prof.intervals[static_cast<std::size_t>(t)];
      levels.resize(5);
      for (int j = 0; j < 5; ++j) {
        levels[static_cast<std::size_t>(j)] = SpeedLevel{speeds_mps[j], probs[j]};
      }
    }
    net.profiles.push_back(std::move(prof));
  }

  for (int s = 0; s < cfg.segment_count; ++s) {
    Rng rng = derive_stream(cfg.seed, {stream_key("synth-segment"), static_cast<std::uint64_t>(s)});
    Segment seg;
    seg.id = "s" + zero_pad(static_cast<std::size_t>(s), 5);
    // neighborhood assignment: segment position maps onto the profile ramp
    const double frac = cfg.segment_count > 1
                            ? static_cast<double>(s) / (cfg.segment_count - 1)
                            : 0.0;
    const int center = static_cast<int>(frac * (profile_count - 1));
    const int jitter = static_cast<int>(rng.next_below(5)) - 2;
    const int pick = std::clamp(center + jitter, 0, profile_count - 1);
    seg.profile_id = net.profiles[static_cast<std::size_t>(pick)].id;
    seg.length_m = quantize(rng.next_range(450.0, 1250.0), 0.1);
    net.segments.push_back(std::move(seg));
  }

  // Paths are contiguous segment runs, like real routes through one part of
  // the network; their congestion character follows the local profiles.
  for (int r = 0; r < cfg.path_count; ++r) {
    Rng rng = derive_stream(cfg.seed, {stream_key("synth-path"), static_cast<std::uint64_t>(r)});
    Path path;
    path.id = "r" + zero_pad(static_cast<std::size_t>(r), 4);
    const int span = cfg.path_max_segments - cfg.path_min_segments + 1;
    const int n = cfg.path_min_segments + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(span)));
    const int start =
        static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.segment_count - n + 1)));
    for (int k = 0; k < n; ++k) {
      path.segment_ids.push_back(net.segments[static_cast<std::size_t>(start + k)].id);
    }
    net.paths.push_back(std::move(path));
  }

  net.rebuild_index();
  validate_network(net);
  return net;
}

}  // namespace ptdr
