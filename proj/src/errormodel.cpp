#include "ptdr/errormodel.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ptdr/mcsim.hpp"

namespace ptdr {

void SamplingLevels::validate() const {
  if (counts.empty()) throw std::invalid_argument("sampling levels: empty");
  if (counts.front() < kPilotSamples) {
    throw std::invalid_argument("sampling levels: minimum level below pilot size");
  }
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] <= counts[i - 1]) {
      throw std::invalid_argument("sampling levels: not strictly ascending");
    }
  }
}

std::vector<ProfileRecord> collect_profile_data(const Network& net,
                                                std::span<const TrainingRequest> requests,
                                                const SamplingLevels& levels, int repetitions,
                                                double percentile_y, std::uint64_t seed,
                                                int workers) {
  levels.validate();
  if (requests.size() < 30) {
    throw std::invalid_argument("collect_profile_data: need at least 30 training requests");
  }
  if (repetitions < 10) {
    throw std::invalid_argument("collect_profile_data: need at least 10 repetitions");
  }

  const std::uint64_t collect_key = stream_key("profile-collect");
  std::vector<ProfileRecord> records(requests.size() * levels.counts.size());

  auto run_request = [&](std::size_t req_idx) {
    const TrainingRequest& req = requests[req_idx];
    const Path& path = net.path(req.path_id);
    for (std::size_t li = 0; li < levels.counts.size(); ++li) {
      const int level = levels.counts[li];
      std::vector<double> tau_hat(static_cast<std::size_t>(repetitions));
      std::vector<double> pilot_cov(static_cast<std::size_t>(repetitions));
      for (int rep = 0; rep < repetitions; ++rep) {
        const std::uint64_t run_seed =
            derive_stream(seed, {collect_key, static_cast<std::uint64_t>(req_idx),
                                 static_cast<std::uint64_t>(li), static_cast<std::uint64_t>(rep)})
                .next_u64();
        SampleSet run = run_mcs(net, path, req.departure, static_cast<std::size_t>(level), run_seed);
        tau_hat[static_cast<std::size_t>(rep)] = percentile(run.samples, percentile_y);
        pilot_cov[static_cast<std::size_t>(rep)] = coeff_variation(
            std::span<const double>(run.samples.data(), static_cast<std::size_t>(kPilotSamples)));
      }
      ProfileRecord rec;
      rec.request_id = req.id;
      rec.path_id = req.path_id;
      rec.departure = req.departure;
      rec.level = level;
      double u_sum = 0;
      for (double c : pilot_cov) u_sum += c;
      rec.u = u_sum / static_cast<double>(repetitions);
      const double tau_mean =
          std::accumulate(tau_hat.begin(), tau_hat.end(), 0.0) / static_cast<double>(repetitions);
      double ss = 0;
      for (double t : tau_hat) ss += (t - tau_mean) * (t - tau_mean);
      const double tau_sd = std::sqrt(ss / static_cast<double>(repetitions - 1));
      rec.nu = tau_sd / tau_mean;
      rec.repetitions = repetitions;
      rec.percentile_y = percentile_y;
      records[req_idx * levels.counts.size() + li] = std::move(rec);
    }
  };

  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(requests.size())));
  if (n_workers == 1) {
    for (std::size_t i = 0; i < requests.size(); ++i) run_request(i);
  } else {
    std::vector<std::thread> threads;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < n_workers; ++w) {
      threads.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= requests.size()) break;
          run_request(i);
        }
      });
    }
    for (auto& t : threads) t.join();
  }
  return records;
}

const RegressionLine* ErrorModel::find(int level) const {
  for (const auto& l : lines) {
    if (l.samples == level) return &l.line;
  }
  return nullptr;
}

int ErrorModel::max_level() const {
  if (lines.empty()) throw std::logic_error("ErrorModel: no levels");
  return lines.back().samples;
}

ErrorModel train_error_model(std::span<const ProfileRecord> records, double regression_quantile) {
  if (records.empty()) throw std::invalid_argument("train: no records");

  std::map<int, std::vector<PointXY>> by_level;
  std::vector<double> all_u;
  double percentile_y = records.front().percentile_y;
  int repetitions = records.front().repetitions;
  for (const auto& r : records) {
    if (r.percentile_y != percentile_y) {
      throw std::invalid_argument("train: records mix percentile settings");
    }
    by_level[r.level].push_back({r.u, r.nu});
    all_u.push_back(r.u);
  }
  for (const auto& [level, pts] : by_level) {
    if (pts.size() < 10) {
      throw DataError("train: level " + std::to_string(level) + " has only " +
                      std::to_string(pts.size()) + " records (need 10)");
    }
  }

  ErrorModel model;
  model.percentile_y = percentile_y;
  model.regression_quantile = regression_quantile;
  model.metadata.repetitions = repetitions;
  model.metadata.record_count = static_cast<int>(records.size());
  for (const auto& [level, pts] : by_level) {
    LevelLine ll;
    ll.samples = level;
    ll.line = quantile_regression(pts, regression_quantile);
    model.lines.push_back(ll);
  }

  // Lines must decrease strictly with the level at the median training u and
  // may not slope downward; either violation signals a broken training set.
  // Residual line crossings away from the median are absorbed by predict_nu,
  // which is isotone in the level dimension by construction.
  const double u_med = percentile(all_u, 50);
  for (std::size_t i = 0; i < model.lines.size(); ++i) {
    if (model.lines[i].line.slope < 0) {
      throw DataError("train: negative slope at level " +
                      std::to_string(model.lines[i].samples));
    }
    if (i == 0) continue;
    if (!(model.lines[i].line.at(u_med) < model.lines[i - 1].line.at(u_med))) {
      throw DataError("train: predicted nu not decreasing from level " +
                      std::to_string(model.lines[i - 1].samples) + " to " +
                      std::to_string(model.lines[i].samples) + " at median u");
    }
  }
  return model;
}

double predict_nu(const ErrorModel& model, double u, int level) {
  if (u < 0) throw std::invalid_argument("predict_nu: u must be >= 0");
  if (model.find(level) == nullptr) {
    throw std::invalid_argument("predict_nu: unknown level " + std::to_string(level));
  }
  // Running minimum over the smaller levels: more samples never predict a
  // larger error, even where noisy per-level fits cross.
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : model.lines) {
    if (l.samples > level) break;
    best = std::min(best, std::max(0.0, l.line.at(u)));
  }
  return best;
}

namespace {
constexpr int kModelVersion = 1;
}

void save_model(const ErrorModel& model, const std::string& file) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : model.lines) {
    levels.push_back({{"samples", l.samples},
                      {"intercept", l.line.intercept},
                      {"slope", l.line.slope},
                      {"points", l.line.point_count}});
  }
  nlohmann::json doc = {{"version", kModelVersion},
                        {"percentile_y", model.percentile_y},
                        {"regression_quantile", model.regression_quantile},
                        {"levels", levels},
                        {"metadata",
                         {{"seed", model.metadata.seed},
                          {"repetitions", model.metadata.repetitions},
                          {"record_count", model.metadata.record_count}}}};
  write_text_file(file, doc.dump(2) + "\n");
}

ErrorModel load_model(const std::string& file) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file + ": " + e.what());
  }
  if (!doc.contains("version") || !doc.at("version").is_number_integer()) {
    throw DataError(file + ": missing version tag");
  }
  if (doc.at("version").get<int>() != kModelVersion) {
    throw DataError(file + ": unsupported model version " + doc.at("version").dump());
  }
  ErrorModel model;
  try {
    model.percentile_y = doc.at("percentile_y").get<double>();
    model.regression_quantile = doc.at("regression_quantile").get<double>();
    for (const auto& l : doc.at("levels")) {
      LevelLine ll;
      ll.samples = l.at("samples").get<int>();
      ll.line.intercept = l.at("intercept").get<double>();
      ll.line.slope = l.at("slope").get<double>();
      ll.line.point_count = l.at("points").get<int>();
      ll.line.quantile = model.regression_quantile;
      model.lines.push_back(ll);
    }
    model.metadata.seed = doc.at("metadata").at("seed").get<std::uint64_t>();
    model.metadata.repetitions = doc.at("metadata").at("repetitions").get<int>();
    model.metadata.record_count = doc.at("metadata").at("record_count").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file + ": schema violation: " + e.what());
  }
  if (model.lines.empty()) throw DataError(file + ": schema violation: no levels");
  for (std::size_t i = 1; i < model.lines.size(); ++i) {
    if (model.lines[i].samples <= model.lines[i - 1].samples) {
      throw DataError(file + ": schema violation: levels not strictly ascending");
    }
  }
  return model;
}

bool operator==(const ErrorModel& a, const ErrorModel& b) {
  if (a.percentile_y != b.percentile_y || a.regression_quantile != b.regression_quantile ||
      a.lines.size() != b.lines.size() || a.metadata.seed != b.metadata.seed ||
      a.metadata.repetitions != b.metadata.repetitions ||
      a.metadata.record_count != b.metadata.record_count) {
    return false;
  }
  for (std::size_t i = 0; i < a.lines.size(); ++i) {
    if (a.lines[i].samples != b.lines[i].samples ||
        a.lines[i].line.intercept != b.lines[i].line.intercept ||
        a.lines[i].line.slope != b.lines[i].line.slope ||
        a.lines[i].line.point_count != b.lines[i].line.point_count) {
      return false;
    }
  }
  return true;
}

}  // namespace ptdr
