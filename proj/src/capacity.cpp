#include "ptdr/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "ptdr/rng.hpp"
#include "ptdr/stats.hpp"
#include "ptdr/util.hpp"

namespace ptdr {

void PipelineConfig::validate() const {
  if (!(arrival_rate > 0)) throw std::invalid_argument("pipeline: arrival rate must be positive");
  if (!(horizon_s > warmup_s) || warmup_s < 0) {
    throw std::invalid_argument("pipeline: horizon must exceed warmup");
  }
  if (stages.empty()) throw std::invalid_argument("pipeline: no stages");
  for (const auto& s : stages) {
    if (s.servers < 1) throw std::invalid_argument("pipeline: server count must be >= 1");
    if (!(s.service_mean_s > 0)) throw std::invalid_argument("pipeline: service mean must be positive");
    if (s.fork_k < 1) throw std::invalid_argument("pipeline: fork_k must be >= 1");
  }
}

int size_stage(double arrival_rate, double mean_service_s, double utilization_cap) {
  if (!(utilization_cap > 0 && utilization_cap <= 1)) {
    throw std::invalid_argument("size_stage: cap outside (0,1]");
  }
  const double demand = arrival_rate * mean_service_s / utilization_cap;
  if (demand <= 0) return 1;
  return std::max(1, static_cast<int>(std::ceil(demand - 1e-9)));
}

namespace {

struct StageAccum {
  double busy_area = 0;      // integral of busy servers
  double queue_area = 0;     // integral of waiting tasks
  double station_area = 0;   // integral of waiting + in service
  long completions = 0;
  double response_sum = 0;
  int busy = 0;
  std::deque<std::pair<std::uint64_t, int>> waiting;  // (request, branch)
  std::vector<double> wait_arrival;                   // parallel to waiting: stage arrival time
};

struct Event {
  double time;
  std::uint64_t seq;
  int kind;  // 0 arrival, 1 service completion
  int stage;
  std::uint64_t request;
  int branch;
  double task_arrival;  // stage arrival time of the completing task

  bool operator>(const Event& o) const {
    return time > o.time || (time == o.time && seq > o.seq);
  }
};

double sample_service(const StageConfig& cfg, std::uint64_t seed, std::uint64_t request, int stage,
                      int branch) {
  if (cfg.dist == ServiceDist::Deterministic) return cfg.service_mean_s;
  Rng rng = derive_stream(seed, {stream_key("service"), request, static_cast<std::uint64_t>(stage),
                                 static_cast<std::uint64_t>(branch)});
  double u = rng.next_unit();
  return -cfg.service_mean_s * std::log(1.0 - u);
}

}  // namespace

CapacityReport simulate_pipeline(const PipelineConfig& config, std::uint64_t seed) {
  config.validate();
  const int n_stages = static_cast<int>(config.stages.size());

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
  std::uint64_t seq = 0;
  auto push = [&](Event e) {
    e.seq = seq++;
    events.push(e);
  };

  // request -> remaining branches at its current fork-join stage
  std::unordered_map<std::uint64_t, int> join_remaining;
  std::unordered_map<std::uint64_t, double> request_arrival;
  std::vector<double> end_to_end;

  std::vector<StageAccum> acc(static_cast<std::size_t>(n_stages));
  double last_time = 0;
  std::vector<SeriesPoint> series;
  double next_sample = config.series_stride_s > 0 ? 0.0 : std::numeric_limits<double>::infinity();

  auto integrate_to = [&](double now) {
    while (next_sample <= std::min(now, config.horizon_s)) {
      SeriesPoint pt;
      pt.time_s = next_sample;
      for (int s = 0; s < n_stages; ++s) {
        const auto& a = acc[static_cast<std::size_t>(s)];
        pt.in_station.push_back(a.busy + static_cast<int>(a.waiting.size()));
      }
      series.push_back(std::move(pt));
      next_sample += config.series_stride_s;
    }
    const double from = std::max(last_time, config.warmup_s);
    const double to = std::min(now, config.horizon_s);
    if (to > from) {
      for (int s = 0; s < n_stages; ++s) {
        auto& a = acc[static_cast<std::size_t>(s)];
        const double dt = to - from;
        a.busy_area += a.busy * dt;
        a.queue_area += static_cast<double>(a.waiting.size()) * dt;
        a.station_area += (a.busy + static_cast<double>(a.waiting.size())) * dt;
      }
    }
    last_time = now;
  };

  auto enter_stage = [&](int stage, std::uint64_t request, int branch, double now) {
    auto& a = acc[static_cast<std::size_t>(stage)];
    const StageConfig& cfg = config.stages[static_cast<std::size_t>(stage)];
    if (a.busy < cfg.servers) {
      ++a.busy;
      const double service = sample_service(cfg, seed, request, stage, branch);
      push({now + service, 0, 1, stage, request, branch, now});
    } else {
      a.waiting.emplace_back(request, branch);
      a.wait_arrival.push_back(now);
    }
  };

  auto start_stage_visit = [&](int stage, std::uint64_t request, double now) {
    const StageConfig& cfg = config.stages[static_cast<std::size_t>(stage)];
    join_remaining[request] = cfg.fork_k;
    for (int b = 0; b < cfg.fork_k; ++b) enter_stage(stage, request, b, now);
  };

  // Poisson arrival process
  Rng arrivals = derive_stream(seed, {stream_key("arrivals")});
  double next_arrival = -std::log(1.0 - arrivals.next_unit()) / config.arrival_rate;
  std::uint64_t next_request = 0;
  if (next_arrival <= config.horizon_s) {
    push({next_arrival, 0, 0, 0, next_request, 0, next_arrival});
  }

  while (!events.empty()) {
    Event e = events.top();
    events.pop();
    if (e.time > config.horizon_s) break;
    integrate_to(e.time);

    if (e.kind == 0) {
      request_arrival[e.request] = e.time;
      start_stage_visit(0, e.request, e.time);
      ++next_request;
      next_arrival = e.time - std::log(1.0 - arrivals.next_unit()) / config.arrival_rate;
      if (next_arrival <= config.horizon_s) {
        push({next_arrival, 0, 0, 0, next_request, 0, next_arrival});
      }
    } else {
      auto& a = acc[static_cast<std::size_t>(e.stage)];
      if (e.task_arrival >= config.warmup_s) {
        ++a.completions;
        a.response_sum += e.time - e.task_arrival;
      }
      --a.busy;
      if (!a.waiting.empty()) {
        auto [req, br] = a.waiting.front();
        a.waiting.pop_front();
        const double arrived = a.wait_arrival.front();
        a.wait_arrival.erase(a.wait_arrival.begin());
        ++a.busy;
        const StageConfig& cfg = config.stages[static_cast<std::size_t>(e.stage)];
        const double service = sample_service(cfg, seed, req, e.stage, br);
        push({e.time + service, 0, 1, e.stage, req, br, arrived});
      }
      if (--join_remaining[e.request] == 0) {
        join_remaining.erase(e.request);
        if (e.stage + 1 < n_stages) {
          start_stage_visit(e.stage + 1, e.request, e.time);
        } else {
          const double arrived = request_arrival[e.request];
          request_arrival.erase(e.request);
          if (arrived >= config.warmup_s) end_to_end.push_back(e.time - arrived);
        }
      }
    }
  }
  integrate_to(config.horizon_s);

  const double observed = config.horizon_s - config.warmup_s;
  CapacityReport report;
  for (int s = 0; s < n_stages; ++s) {
    const auto& a = acc[static_cast<std::size_t>(s)];
    const StageConfig& cfg = config.stages[static_cast<std::size_t>(s)];
    StageStats st;
    st.name = cfg.name;
    st.offered_load = config.arrival_rate * cfg.fork_k * cfg.service_mean_s / cfg.servers;
    st.unstable = st.offered_load >= 1.0;
    st.utilization = a.busy_area / (static_cast<double>(cfg.servers) * observed);
    st.mean_queue_len = a.queue_area / observed;
    st.mean_in_station = a.station_area / observed;
    st.throughput = static_cast<double>(a.completions) / observed;
    st.mean_response_s =
        a.completions > 0 ? a.response_sum / static_cast<double>(a.completions) : 0;
    const double lw = st.throughput * st.mean_response_s;
    st.little_residual = lw > 0 ? std::abs(st.mean_in_station - lw) / lw : 0;
    report.any_unstable = report.any_unstable || st.unstable;
    report.stages.push_back(std::move(st));
  }
  report.completed_requests = static_cast<int>(end_to_end.size());
  report.throughput = static_cast<double>(end_to_end.size()) / observed;
  if (!end_to_end.empty()) {
    double sum = 0;
    for (double r : end_to_end) sum += r;
    report.end_to_end_mean_s = sum / static_cast<double>(end_to_end.size());
    report.end_to_end_p95_s = percentile(end_to_end, 95);
  }
  report.insufficient_samples = end_to_end.size() < 1000;
  report.series = std::move(series);
  return report;
}

namespace {

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& file) {
  PipelineConfig cfg;
  cfg.stages.clear();
  const std::string text = read_text_file(file);

  StageConfig* current = nullptr;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = strip(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    const std::string where = file + ":" + std::to_string(line_no);
    if (std::size_t hash = line.find('#'); hash != std::string::npos) {
      line = strip(line.substr(0, hash));
    }
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw DataError(where + ": unterminated section header");
      const std::string section = line.substr(1, line.size() - 2);
      if (section.rfind("stage.", 0) != 0) {
        throw DataError(where + ": unknown section [" + section + "]");
      }
      cfg.stages.emplace_back();
      current = &cfg.stages.back();
      current->name = section.substr(6);
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw DataError(where + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = unquote(strip(line.substr(eq + 1)));

    if (current == nullptr) {
      if (key == "arrival_rate") cfg.arrival_rate = parse_double(value, where);
      else if (key == "horizon_s") cfg.horizon_s = parse_double(value, where);
      else if (key == "warmup_s") cfg.warmup_s = parse_double(value, where);
      else if (key == "series_stride_s") cfg.series_stride_s = parse_double(value, where);
      else throw DataError(where + ": unknown key '" + key + "'");
    } else {
      if (key == "servers") current->servers = static_cast<int>(parse_long(value, where));
      else if (key == "service_mean_s") current->service_mean_s = parse_double(value, where);
      else if (key == "fork_k") current->fork_k = static_cast<int>(parse_long(value, where));
      else if (key == "dist") {
        if (value == "exponential") current->dist = ServiceDist::Exponential;
        else if (value == "deterministic") current->dist = ServiceDist::Deterministic;
        else throw DataError(where + ": unknown service distribution '" + value + "'");
      } else {
        throw DataError(where + ": unknown stage key '" + key + "'");
      }
    }
  }
  cfg.validate();
  return cfg;
}

void write_capacity_json(const CapacityReport& report, const std::string& file) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : report.stages) {
    stages.push_back({{"name", s.name},
                      {"offered_load", s.offered_load},
                      {"utilization", s.utilization},
                      {"mean_queue_len", s.mean_queue_len},
                      {"mean_in_station", s.mean_in_station},
                      {"mean_response_s", s.mean_response_s},
                      {"throughput", s.throughput},
                      {"little_residual", s.little_residual},
                      {"unstable", s.unstable}});
  }
  nlohmann::json doc = {{"stages", stages},
                        {"end_to_end_mean_s", report.end_to_end_mean_s},
                        {"end_to_end_p95_s", report.end_to_end_p95_s},
                        {"throughput", report.throughput},
                        {"completed_requests", report.completed_requests},
                        {"any_unstable", report.any_unstable},
                        {"insufficient_samples", report.insufficient_samples}};
  write_text_file(file, doc.dump(2) + "\n");
}

void write_capacity_series_csv(const CapacityReport& report, const std::string& file) {
  std::string out = "time_s";
  for (const auto& s : report.stages) out += "," + s.name + "_in_station";
  out += '\n';
  for (const auto& pt : report.series) {
    out += format_double(pt.time_s);
    for (int n : pt.in_station) out += ',' + std::to_string(n);
    out += '\n';
  }
  write_text_file(file, out);
}

std::vector<ReferenceOutcome> reference_sizing_experiment(double arrival_rate, int k_branches,
                                                          double adaptive_service_scale,
                                                          std::span<const ReferenceCase> cases) {
  if (cases.empty()) throw std::invalid_argument("reference sizing: no cases");
  if (!(adaptive_service_scale > 0 && adaptive_service_scale <= 1)) {
    throw std::invalid_argument("reference sizing: scale outside (0,1]");
  }
  const double task_rate = arrival_rate * k_branches;
  // Calibrate the per-branch service mean so the first case's static PTDR
  // sizing reproduces its published allocation exactly.
  const double service_mean =
      cases[0].utilization_cap * static_cast<double>(cases[0].ptdr_static_target) / task_rate;

  std::vector<ReferenceOutcome> outcomes;
  for (const auto& c : cases) {
    ReferenceOutcome o;
    o.utilization_cap = c.utilization_cap;
    o.ptdr_static = size_stage(task_rate, service_mean, c.utilization_cap);
    o.ptdr_adaptive = size_stage(task_rate, service_mean * adaptive_service_scale, c.utilization_cap);
    o.non_ptdr = c.total_static_target - o.ptdr_static;
    if (o.non_ptdr < 0) throw std::invalid_argument("reference sizing: PTDR exceeds total target");
    o.total_static = c.total_static_target;
    o.total_adaptive = o.non_ptdr + o.ptdr_adaptive;
    o.reduction = 1.0 - static_cast<double>(o.total_adaptive) / static_cast<double>(o.total_static);
    outcomes.push_back(o);
  }
  return outcomes;
}

}  // namespace ptdr
