// ptdr: adaptive Monte Carlo travel-time estimation toolkit.
//
// Subcommands cover the full workflow: synthetic network generation (gen),
// error-model training (train), constraint validation campaigns (validate),
// adaptive-vs-static comparison (compare), week sweeps (sweep), overhead
// measurement (overhead), single route queries (route) and queueing-based
// capacity planning (capacity).
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 constraint infeasible on every
// request (clamped everywhere).

#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ptdr/capacity.hpp"
#include "ptdr/errormodel.hpp"
#include "ptdr/harness.hpp"
#include "ptdr/mcsim.hpp"
#include "ptdr/roadnet.hpp"
#include "ptdr/tuner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDataError = 2;
constexpr int kExitInfeasible = 3;

ptdr::Network load_network_dir(const std::string& dir) {
  return ptdr::load_network((fs::path(dir) / "segments.csv").string(),
                            (fs::path(dir) / "profiles.csv").string(),
                            (fs::path(dir) / "paths.json").string());
}

std::vector<int> parse_levels(const std::string& csv) {
  std::vector<int> levels;
  for (const auto& tok : ptdr::split_csv_line(csv)) {
    levels.push_back(static_cast<int>(ptdr::parse_long(tok, "--levels")));
  }
  return levels;
}

std::vector<double> parse_doubles(const std::string& csv, const std::string& flag) {
  std::vector<double> out;
  for (const auto& tok : ptdr::split_csv_line(csv)) out.push_back(ptdr::parse_double(tok, flag));
  return out;
}

json departure_weights_json(const ptdr::RequestGenConfig& cfg) {
  return {{"rush", cfg.weight_rush},
          {"shoulder", cfg.weight_shoulder},
          {"day", cfg.weight_day},
          {"night", cfg.weight_night},
          {"weekend", cfg.weight_weekend}};
}

struct GenArgs {
  std::string out;
  ptdr::SynthConfig cfg;
};

int cmd_gen(const GenArgs& args) {
  const ptdr::Network net = ptdr::synth_network(args.cfg);
  ptdr::save_network(net, args.out);
  json summary = {{"segments", net.segments.size()},
                  {"paths", net.paths.size()},
                  {"profiles", net.profiles.size()},
                  {"seed", args.cfg.seed},
                  {"out", args.out}};
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string network_dir;
  std::string out;
  std::string records_out;
  std::string levels = "100,300,1000,3000";
  int requests = 120;
  int repetitions = 30;
  double percentile = 95;
  double quantile = 0.75;
  double corridor_fraction = 1.0;
  std::uint64_t seed = 1;
  int workers = 1;
};

int cmd_train(const TrainArgs& args) {
  const ptdr::Network net = load_network_dir(args.network_dir);
  // Profile the congestion-prone half of the paths: the static worst-case
  // tuning this model is compared against has to cover exactly these.
  const auto corridors = ptdr::congestion_prone_paths(net, args.corridor_fraction, args.seed);
  const auto requests = ptdr::generate_requests(
      net, args.requests, "train-", ptdr::RequestGenConfig::worst_case(), args.seed, corridors);
  std::vector<ptdr::TrainingRequest> training;
  training.reserve(requests.size());
  for (const auto& r : requests) training.push_back({r.id, r.path_id, r.departure});

  ptdr::SamplingLevels levels{parse_levels(args.levels)};
  const auto records = ptdr::collect_profile_data(net, training, levels, args.repetitions,
                                                  args.percentile, args.seed, args.workers);
  ptdr::ErrorModel model = ptdr::train_error_model(records, args.quantile);
  model.metadata.seed = args.seed;
  ptdr::save_model(model, args.out);
  if (!args.records_out.empty()) ptdr::write_records_csv(records, args.records_out);

  // feature validity per level: rank correlation of (u, nu)
  json level_stats = json::array();
  for (int level : levels.counts) {
    std::vector<double> us, nus;
    for (const auto& rec : records) {
      if (rec.level == level) {
        us.push_back(rec.u);
        nus.push_back(rec.nu);
      }
    }
    const double rho = ptdr::spearman(us, nus);
    const double p = ptdr::spearman_permutation_pvalue(us, nus, 999, args.seed);
    const ptdr::RegressionLine* line = model.find(level);
    level_stats.push_back({{"level", level},
                           {"spearman", rho},
                           {"permutation_p", p},
                           {"intercept", line->intercept},
                           {"slope", line->slope}});
  }
  json summary = {{"model", args.out},
                  {"records", records.size()},
                  {"requests", requests.size()},
                  {"repetitions", args.repetitions},
                  {"percentile_y", args.percentile},
                  {"regression_quantile", args.quantile},
                  {"seed", args.seed},
                  {"departure_weights", departure_weights_json(ptdr::RequestGenConfig::worst_case())},
                  {"levels", level_stats}};
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

struct ValidateArgs {
  std::string network_dir;
  std::string model;
  std::string out;
  std::string train_records;
  std::string cache_dir;
  int requests = 500;
  double epsilon = 0.06;
  double ci = 0.99;
  std::size_t truth_samples = 200000;
  std::uint64_t seed = 2;
  int workers = 1;
};

int cmd_validate(const ValidateArgs& args) {
  const ptdr::Network net = load_network_dir(args.network_dir);
  const ptdr::ErrorModel model = ptdr::load_model(args.model);
  const auto requests =
      ptdr::generate_requests(net, args.requests, "val-", ptdr::RequestGenConfig{}, args.seed);

  std::unordered_set<std::string> training_ids;
  if (!args.train_records.empty()) {
    for (const auto& rec : ptdr::read_records_csv(args.train_records)) {
      training_ids.insert(rec.request_id);
    }
  }

  ptdr::Constraint constraint{args.epsilon, args.ci, model.percentile_y};
  ptdr::GroundTruthCache cache(args.cache_dir);
  const ptdr::ValidationReport report =
      ptdr::run_validation(net, requests, training_ids, constraint, model, args.truth_samples,
                           args.seed, &cache, args.workers);

  fs::create_directories(args.out);
  ptdr::write_validation_csv(report, (fs::path(args.out) / "validation.csv").string());
  ptdr::write_validation_summary_json(report, (fs::path(args.out) / "summary.json").string());
  std::cout << "validation: " << report.records.size() << " requests, violation rate "
            << report.summary.violation_rate << ", avg samples " << report.summary.avg_samples
            << "\n";
  return report.summary.clamp_rate >= 1.0 ? kExitInfeasible : kExitOk;
}

struct CompareArgs {
  std::string network_dir;
  std::vector<std::string> model_q;  // "0.95=model.json"
  std::string train_records;
  std::string out;
  std::string cache_dir;
  std::string epsilons = "0.03,0.06";
  int requests = 200;
  double ci = 0.99;
  std::size_t truth_samples = 200000;
  std::uint64_t seed = 3;
  int workers = 1;
};

int cmd_compare(const CompareArgs& args) {
  const ptdr::Network net = load_network_dir(args.network_dir);
  std::map<double, ptdr::ErrorModel> models;
  for (const auto& entry : args.model_q) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--model-q", "expected Q=FILE, got '" + entry + "'");
    }
    const double q = ptdr::parse_double(entry.substr(0, eq), "--model-q");
    models.emplace(q, ptdr::load_model(entry.substr(eq + 1)));
  }

  const auto training_records = ptdr::read_records_csv(args.train_records);
  const auto requests =
      ptdr::generate_requests(net, args.requests, "val-", ptdr::RequestGenConfig{}, args.seed);

  std::vector<ptdr::ComparisonConfig> configs;
  for (double eps : parse_doubles(args.epsilons, "--epsilons")) {
    for (const auto& [q, model] : models) configs.push_back({eps, q});
  }

  const double percentile_y = models.begin()->second.percentile_y;
  ptdr::Constraint base{0.06, args.ci, percentile_y};
  ptdr::GroundTruthCache cache(args.cache_dir);
  const ptdr::ComparisonReport report =
      ptdr::run_comparison(net, requests, configs, models, training_records, base,
                           args.truth_samples, args.seed, &cache, args.workers);

  fs::create_directories(args.out);
  ptdr::write_comparison_csv(report, (fs::path(args.out) / "comparison.csv").string());
  ptdr::write_comparison_summary_json(report, (fs::path(args.out) / "summary.json").string());
  for (const auto& row : report.rows) {
    std::cout << "eps=" << row.epsilon << " q=" << row.regression_quantile << ": baseline "
              << row.baseline_level << ", adaptive " << row.adaptive_avg_samples << " ("
              << row.savings * 100 << "% saved)\n";
  }
  bool all_clamped = !report.rows.empty();
  for (const auto& row : report.rows) all_clamped = all_clamped && row.adaptive_clamp_rate >= 1.0;
  return all_clamped ? kExitInfeasible : kExitOk;
}

struct SweepArgs {
  std::string network_dir;
  std::string model;
  std::string path;
  std::string out;
  double epsilon = 0.06;
  double ci = 0.99;
  std::uint64_t seed = 4;
};

int cmd_sweep(const SweepArgs& args) {
  const ptdr::Network net = load_network_dir(args.network_dir);
  const ptdr::ErrorModel model = ptdr::load_model(args.model);
  ptdr::Constraint constraint{args.epsilon, args.ci, model.percentile_y};
  const ptdr::WeekSweep sweep = ptdr::run_week_sweep(net, args.path, constraint, model, args.seed);
  ptdr::write_sweep_csv(sweep, args.out);
  bool all_clamped = true;
  for (const auto& e : sweep.entries) all_clamped = all_clamped && e.clamped;
  std::cout << "sweep: " << sweep.entries.size() << " intervals written to " << args.out << "\n";
  return all_clamped ? kExitInfeasible : kExitOk;
}

struct OverheadArgs {
  std::string network_dir;  // a long-path network is generated when empty
  std::string model;
  std::string out;
  double epsilon = 0.06;
  double ci = 0.99;
  std::uint64_t seed = 5;
};

int cmd_overhead(const OverheadArgs& args) {
  ptdr::Network net;
  if (args.network_dir.empty()) {
    ptdr::SynthConfig cfg;
    cfg.segment_count = 1200;
    cfg.path_count = 3;
    cfg.path_min_segments = 300;
    cfg.path_max_segments = 800;
    cfg.seed = args.seed;
    net = ptdr::synth_network(cfg);
  } else {
    net = load_network_dir(args.network_dir);
  }
  const ptdr::ErrorModel model = ptdr::load_model(args.model);
  ptdr::Constraint constraint{args.epsilon, args.ci, model.percentile_y};

  // longest paths first, up to five
  std::vector<const ptdr::Path*> paths;
  for (const auto& p : net.paths) paths.push_back(&p);
  std::sort(paths.begin(), paths.end(), [](const ptdr::Path* a, const ptdr::Path* b) {
    return a->segment_ids.size() > b->segment_ids.size();
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < std::min<std::size_t>(5, paths.size()); ++i) {
    ids.push_back(paths[i]->id);
  }

  const ptdr::OverheadReport report = ptdr::run_overhead(net, ids, model, constraint, args.seed);
  ptdr::write_overhead_csv(report, args.out);
  for (const auto& row : report.rows) {
    std::cout << row.path_id << " (" << row.segments
              << " segments): overhead/MCS100 = " << row.overhead_vs_mcs100 << "\n";
  }
  return kExitOk;
}

struct RouteArgs {
  std::string network_dir;
  std::string model;
  std::string path;
  std::string out;
  int departure = 0;
  double epsilon = 0.06;
  double ci = 0.99;
  std::uint64_t seed = 6;
};

int cmd_route(const RouteArgs& args) {
  const ptdr::Network net = load_network_dir(args.network_dir);
  const ptdr::ErrorModel model = ptdr::load_model(args.model);
  ptdr::Constraint constraint{args.epsilon, args.ci, model.percentile_y};
  const ptdr::RouteEstimate est =
      ptdr::adaptive_route_query(net, args.path, {args.departure}, constraint, model, args.seed);

  json percentiles = json::object();
  for (std::size_t i = 0; i < ptdr::kKeyPercentiles.size(); ++i) {
    percentiles[ptdr::format_double(ptdr::kKeyPercentiles[i])] = est.stats.percentiles[i];
  }
  json doc = {{"path", args.path},
              {"departure_s", args.departure},
              {"unpredictability", est.unpredictability},
              {"selected_level", est.selected_level},
              {"clamped", est.clamped},
              {"tau_hat", est.tau_hat},
              {"percentile_y", constraint.percentile_y},
              {"mean", est.stats.mean},
              {"cov", est.stats.cov},
              {"percentiles", percentiles},
              {"total_samples", est.total_samples},
              {"pilot_reused", est.pilot_reused},
              {"timing_ms",
               {{"pilot", est.pilot_ms}, {"selection", est.selection_ms}, {"topup", est.topup_ms}}}};
  const std::string text = doc.dump(2) + "\n";
  if (!args.out.empty()) ptdr::write_text_file(args.out, text);
  std::cout << text;
  return est.clamped ? kExitInfeasible : kExitOk;
}

struct CapacityArgs {
  std::string config;
  std::string out;
  std::string comparison;
  double epsilon = 0.06;
  double quantile = 0.95;
  std::uint64_t seed = 7;
  bool reference = false;
  double rate = 100000.0 / 120.0;
  int k_branches = 10;
  double scale = 0.30;
  std::string cases = "1.0:777:400,0.7:1010:572";
};

int cmd_capacity(const CapacityArgs& args) {
  fs::create_directories(args.out);

  if (args.reference) {
    std::vector<ptdr::ReferenceCase> cases;
    for (const auto& tok : ptdr::split_csv_line(args.cases)) {
      const auto a = tok.find(':');
      const auto b = tok.find(':', a + 1);
      if (a == std::string::npos || b == std::string::npos) {
        throw CLI::ValidationError("--cases", "expected CAP:TOTAL:PTDR");
      }
      cases.push_back({ptdr::parse_double(tok.substr(0, a), "--cases"),
                       static_cast<int>(ptdr::parse_long(tok.substr(a + 1, b - a - 1), "--cases")),
                       static_cast<int>(ptdr::parse_long(tok.substr(b + 1), "--cases"))});
    }
    const auto outcomes =
        ptdr::reference_sizing_experiment(args.rate, args.k_branches, args.scale, cases);
    json rows = json::array();
    for (const auto& o : outcomes) {
      rows.push_back({{"utilization_cap", o.utilization_cap},
                      {"ptdr_static", o.ptdr_static},
                      {"ptdr_adaptive", o.ptdr_adaptive},
                      {"non_ptdr", o.non_ptdr},
                      {"total_static", o.total_static},
                      {"total_adaptive", o.total_adaptive},
                      {"reduction", o.reduction}});
    }
    json doc = {{"arrival_rate", args.rate},
                {"k_branches", args.k_branches},
                {"adaptive_service_scale", args.scale},
                {"note", "absolute core counts follow the documented service-time calibration"},
                {"cases", rows}};
    const std::string file = (fs::path(args.out) / "reference_sizing.json").string();
    ptdr::write_text_file(file, doc.dump(2) + "\n");
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
  }

  if (args.config.empty()) throw CLI::ValidationError("--config", "required unless --reference");
  ptdr::PipelineConfig config = ptdr::load_pipeline_config(args.config);
  const ptdr::CapacityReport static_report = ptdr::simulate_pipeline(config, args.seed);
  ptdr::write_capacity_json(static_report, (fs::path(args.out) / "capacity_static.json").string());
  if (!static_report.series.empty()) {
    ptdr::write_capacity_series_csv(static_report,
                                    (fs::path(args.out) / "capacity_static_series.csv").string());
  }

  if (!args.comparison.empty()) {
    const ptdr::ComparisonReport cmp = ptdr::read_comparison_csv(args.comparison);
    const ptdr::ComparisonRow* row = nullptr;
    for (const auto& r : cmp.rows) {
      if (r.epsilon == args.epsilon && r.regression_quantile == args.quantile) row = &r;
    }
    if (row == nullptr) {
      throw ptdr::DataError("no comparison row for epsilon=" + ptdr::format_double(args.epsilon) +
                            " quantile=" + ptdr::format_double(args.quantile));
    }
    const double scale = row->adaptive_avg_samples / row->baseline_avg_samples;
    ptdr::PipelineConfig adaptive = config;
    bool scaled = false;
    for (auto& stage : adaptive.stages) {
      if (stage.fork_k > 1) {
        stage.service_mean_s *= scale;
        scaled = true;
      }
    }
    if (!scaled) throw ptdr::DataError("no fork-join stage to scale in " + args.config);
    const ptdr::CapacityReport adaptive_report = ptdr::simulate_pipeline(adaptive, args.seed);
    ptdr::write_capacity_json(adaptive_report,
                              (fs::path(args.out) / "capacity_adaptive.json").string());
    if (!adaptive_report.series.empty()) {
      ptdr::write_capacity_series_csv(
          adaptive_report, (fs::path(args.out) / "capacity_adaptive_series.csv").string());
    }
    std::cout << "static end-to-end mean " << static_report.end_to_end_mean_s
              << " s, adaptive (scale " << scale << ") " << adaptive_report.end_to_end_mean_s
              << " s\n";
  } else {
    std::cout << "end-to-end mean " << static_report.end_to_end_mean_s << " s, p95 "
              << static_report.end_to_end_p95_s << " s\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive Monte Carlo travel-time estimation toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* cgen = app.add_subcommand("gen", "generate a synthetic network");
  cgen->add_option("--out", gen.out, "output directory")->required();
  cgen->add_option("--segments", gen.cfg.segment_count, "segment count");
  cgen->add_option("--paths", gen.cfg.path_count, "path count");
  cgen->add_option("--min-path", gen.cfg.path_min_segments, "min segments per path");
  cgen->add_option("--max-path", gen.cfg.path_max_segments, "max segments per path");
  cgen->add_option("--amplitude", gen.cfg.congestion_amplitude, "congestion amplitude [0,1]");
  cgen->add_option("--ramp-slots", gen.cfg.window_ramp_slots, "rush window shoulder width (slots)");
  cgen->add_option("--profiles", gen.cfg.profile_count, "profile count (0 = auto)");
  cgen->add_option("--seed", gen.cfg.seed, "rng seed");

  TrainArgs train;
  auto* ctrain = app.add_subcommand("train", "profile the simulator and fit the error model");
  ctrain->add_option("--network-dir", train.network_dir, "network directory")->required();
  ctrain->add_option("--out", train.out, "model.json output")->required();
  ctrain->add_option("--records-out", train.records_out, "training records CSV output");
  ctrain->add_option("--requests", train.requests, "training request count");
  ctrain->add_option("--levels", train.levels, "comma-separated sampling levels");
  ctrain->add_option("--repetitions", train.repetitions, "MCS repetitions per (request, level)");
  ctrain->add_option("--percentile", train.percentile, "target percentile y");
  ctrain->add_option("--quantile", train.quantile, "regression quantile q");
  ctrain->add_option("--corridor-fraction", train.corridor_fraction,
                     "fraction of paths (noisiest first) profiled for training");
  ctrain->add_option("--seed", train.seed, "rng seed");
  ctrain->add_option("--workers", train.workers, "worker threads");

  ValidateArgs val;
  auto* cval = app.add_subcommand("validate", "validate the error constraint on fresh requests");
  cval->add_option("--network-dir", val.network_dir, "network directory")->required();
  cval->add_option("--model", val.model, "model.json")->required();
  cval->add_option("--out", val.out, "report directory")->required();
  cval->add_option("--train-records", val.train_records,
                   "training records CSV (disjointness check)");
  cval->add_option("--cache-dir", val.cache_dir, "ground-truth cache directory");
  cval->add_option("--requests", val.requests, "validation request count");
  cval->add_option("--epsilon", val.epsilon, "relative error bound");
  cval->add_option("--ci", val.ci, "confidence level");
  cval->add_option("--truth-samples", val.truth_samples, "ground-truth sample count");
  cval->add_option("--seed", val.seed, "rng seed");
  cval->add_option("--workers", val.workers, "worker threads");

  CompareArgs cmp;
  auto* ccmp = app.add_subcommand("compare", "adaptive vs static baseline over a validation set");
  ccmp->add_option("--network-dir", cmp.network_dir, "network directory")->required();
  ccmp->add_option("--model-q", cmp.model_q, "Q=FILE model per regression quantile")->required();
  ccmp->add_option("--train-records", cmp.train_records, "training records CSV")->required();
  ccmp->add_option("--out", cmp.out, "report directory")->required();
  ccmp->add_option("--cache-dir", cmp.cache_dir, "ground-truth cache directory");
  ccmp->add_option("--epsilons", cmp.epsilons, "comma-separated error bounds");
  ccmp->add_option("--requests", cmp.requests, "validation request count");
  ccmp->add_option("--ci", cmp.ci, "confidence level");
  ccmp->add_option("--truth-samples", cmp.truth_samples, "ground-truth sample count");
  ccmp->add_option("--seed", cmp.seed, "rng seed");
  ccmp->add_option("--workers", cmp.workers, "worker threads");

  SweepArgs sweep;
  auto* csweep = app.add_subcommand("sweep", "adaptive query per 15-minute interval of a week");
  csweep->add_option("--network-dir", sweep.network_dir, "network directory")->required();
  csweep->add_option("--model", sweep.model, "model.json")->required();
  csweep->add_option("--path", sweep.path, "path id")->required();
  csweep->add_option("--out", sweep.out, "CSV output file")->required();
  csweep->add_option("--epsilon", sweep.epsilon, "relative error bound");
  csweep->add_option("--ci", sweep.ci, "confidence level");
  csweep->add_option("--seed", sweep.seed, "rng seed");

  OverheadArgs ovh;
  auto* covh = app.add_subcommand("overhead", "measure the adaptivity overhead on long paths");
  covh->add_option("--model", ovh.model, "model.json")->required();
  covh->add_option("--out", ovh.out, "CSV output file")->required();
  covh->add_option("--network-dir", ovh.network_dir, "network directory (default: generated)");
  covh->add_option("--epsilon", ovh.epsilon, "relative error bound");
  covh->add_option("--ci", ovh.ci, "confidence level");
  covh->add_option("--seed", ovh.seed, "rng seed");

  RouteArgs route;
  auto* croute = app.add_subcommand("route", "single adaptive route query");
  croute->add_option("--network-dir", route.network_dir, "network directory")->required();
  croute->add_option("--model", route.model, "model.json")->required();
  croute->add_option("--path", route.path, "path id")->required();
  croute->add_option("--departure", route.departure, "departure, seconds into the week")
      ->required();
  croute->add_option("--out", route.out, "optional JSON output file");
  croute->add_option("--epsilon", route.epsilon, "relative error bound");
  croute->add_option("--ci", route.ci, "confidence level");
  croute->add_option("--seed", route.seed, "rng seed");

  CapacityArgs cap;
  auto* ccap = app.add_subcommand("capacity", "fork-join pipeline simulation and sizing");
  ccap->add_option("--config", cap.config, "pipeline config (toml)");
  ccap->add_option("--out", cap.out, "report directory")->required();
  ccap->add_option("--comparison", cap.comparison, "comparison.csv for the adaptive level mix");
  ccap->add_option("--epsilon", cap.epsilon, "comparison row selector");
  ccap->add_option("--quantile", cap.quantile, "comparison row selector");
  ccap->add_option("--seed", cap.seed, "rng seed");
  ccap->add_flag("--reference", cap.reference, "run the published-deployment sizing study");
  ccap->add_option("--rate", cap.rate, "reference: request arrival rate per second");
  ccap->add_option("--k", cap.k_branches, "reference: parallel branches per request");
  ccap->add_option("--scale", cap.scale, "reference: adaptive/static PTDR service-time ratio");
  ccap->add_option("--cases", cap.cases, "reference: CAP:TOTAL:PTDR, comma separated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cgen->parsed()) return cmd_gen(gen);
    if (ctrain->parsed()) return cmd_train(train);
    if (cval->parsed()) return cmd_validate(val);
    if (ccmp->parsed()) return cmd_compare(cmp);
    if (csweep->parsed()) return cmd_sweep(sweep);
    if (covh->parsed()) return cmd_overhead(ovh);
    if (croute->parsed()) return cmd_route(route);
    if (ccap->parsed()) return cmd_capacity(cap);
  } catch (const ptdr::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}
