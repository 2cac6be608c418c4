#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "cli/manifest.hpp"
#include "risktube/error.hpp"
#include "risktube/gate.hpp"
#include "risktube/pipeline.hpp"
#include "risktube/scenario_io.hpp"
#include "risktube/stfa.hpp"

namespace fs = std::filesystem;

namespace risktube::cli {

namespace {

constexpr const char* kCalibrationRunSchema = "risktube/calibration-run/v1";

void setup_logging() {
  auto logger = spdlog::get("risktube");
  if (!logger) {
    logger = spdlog::stderr_color_mt("risktube");
    logger->set_pattern("[%l] %v");
  }
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("RISKTUBE_LOG")) {
    const std::string v = env;
    if (v == "error") spdlog::set_level(spdlog::level::err);
    else if (v == "warn") spdlog::set_level(spdlog::level::warn);
    else if (v == "info") spdlog::set_level(spdlog::level::info);
    else if (v == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("ignoring RISKTUBE_LOG='{}' (expected error, warn, info or debug)", v);
  }
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError("config field '" + key + "': expected a number, got '" + v + "'");
  }
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  const double d = parse_number(key, v);
  if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
    throw ValidationError("config field '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(d);
}

std::vector<ScenarioConfig> configs_from_json(const nlohmann::json& j, std::size_t& n_per_cfg) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  static const std::set<std::string> known = {"n_per_cfg", "preset", "configs", "box_noise", "clip_length", "horizon", "noise"};
  for (const auto& [k, v] : j.items()) {
    if (known.count(k) == 0) throw ValidationError("config field '" + k + "': unknown field");
  }
  try {
    n_per_cfg = j.value("n_per_cfg", std::size_t{25});
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config field 'n_per_cfg': expected a non-negative integer");
  }
  if (n_per_cfg == 0) throw ValidationError("config field 'n_per_cfg': must be at least 1");
  std::vector<ScenarioConfig> cfgs;
  if (j.contains("configs")) {
    if (j.contains("preset")) throw ValidationError("config field 'preset': cannot be combined with 'configs'");
    const auto& list = j.at("configs");
    if (!list.is_array() || list.empty()) throw ValidationError("config field 'configs': expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      nlohmann::json c = list[i];
      for (const char* k : {"box_noise", "clip_length", "horizon", "noise"}) {
        if (j.contains(k) && !c.contains(k)) c[k] = j.at(k);
      }
      try {
        cfgs.push_back(ScenarioConfig::from_json(c));
      } catch (const ValidationError& e) {
        throw ValidationError("config field 'configs[" + std::to_string(i) + "]': " + e.what());
      }
    }
    return cfgs;
  }
  const auto preset = j.value("preset", std::string("default"));
  if (preset != "default" && preset != "single") {
    throw ValidationError("config field 'preset': expected 'default' or 'single', got '" + preset + "'");
  }
  for (auto cfg : default_configs()) {
    if (preset == "single" && cfg.multi_risk()) continue;
    nlohmann::json c = cfg.to_json();
    for (const char* k : {"box_noise", "clip_length", "horizon"}) {
      if (j.contains(k)) c[k] = j.at(k);
    }
    if (j.contains("noise")) {
      for (const auto& [k, v] : j.at("noise").items()) c["noise"][k] = v;
    }
    try {
      cfgs.push_back(ScenarioConfig::from_json(c));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("config: ") + e.what());
    }
  }
  return cfgs;
}

struct CalibrationRun {
  CategoryCalibrator calibrator;
  std::uint64_t split_seed = 0;
  std::string dataset_sha256;
  std::vector<std::string> calibration_ids;
};

CalibrationRun load_calibration_run(const fs::path& path) {
  const auto text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("calibrator file: " + std::string(e.what()));
  }
  if (!j.is_object() || j.value("schema", std::string{}) != kCalibrationRunSchema) {
    throw ValidationError("calibrator file: unsupported schema");
  }
  try {
    const auto& split = j.at("split");
    return CalibrationRun{CategoryCalibrator::from_json(j.at("calibrator")), split.at("seed").get<std::uint64_t>(),
                          split.at("dataset_sha256").get<std::string>(),
                          split.at("calibration_ids").get<std::vector<std::string>>()};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("calibrator file: " + std::string(e.what()));
  }
}

// Test scenarios for this seed, refusing any that calibrated the calibrator.
std::vector<Scenario> test_split(const std::vector<Scenario>& data, std::uint64_t seed, const CalibrationRun* run) {
  const auto split = split_dataset(data, SplitRatios{}, seed);
  if (run != nullptr) {
    const std::set<std::string> cal_ids(run->calibration_ids.begin(), run->calibration_ids.end());
    std::size_t overlap = 0;
    for (const auto& id : split.test) overlap += cal_ids.count(id);
    if (overlap > 0) {
      throw SplitOverlapError(std::to_string(overlap) +
                              " test scenario(s) were used to fit the calibrator; check --seed and the dataset");
    }
  }
  return select(data, split.test);
}

fs::path sibling(const fs::path& p, const std::string& ext) {
  auto q = p;
  q.replace_extension(ext);
  if (q == p) q += ext;
  return q;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct Common {
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const std::string& config_path, const Common& c) {
  const auto text = read_file(config_path);
  const auto cfg_json = parse_simulate_config(text);
  std::size_t n_per_cfg = 0;
  const auto cfgs = configs_from_json(cfg_json, n_per_cfg);
  const auto data = generate_dataset(cfgs, n_per_cfg, c.seed);
  std::ostringstream os;
  write_scenarios(os, data);
  atomic_write(c.out, os.str());

  RunManifest m;
  m.command = "simulate";
  m.config = cfg_json;
  m.seed = c.seed;
  m.has_seed = true;
  m.add_input(config_path);
  m.add_output(c.out);
  const bool multi = std::any_of(cfgs.begin(), cfgs.end(), [](const auto& x) { return x.multi_risk(); });
  m.tags.push_back(multi ? "multi" : "single");
  m.write(c.out);
  spdlog::info("wrote {} scenarios to {}", data.size(), c.out);
  return kOk;
}

int cmd_calibrate(const std::string& dataset, const CalibratorSettings& settings, const Common& c) {
  const auto digest = sha256_file(dataset);
  const auto data = read_scenarios(fs::path(dataset));
  const auto split = split_dataset(data, SplitRatios{}, c.seed);
  const auto cal_set = select(data, split.calibration);
  const auto horizon = cal_set.front().config.horizon;
  const auto cal = calibrate(cal_set, settings, horizon);
  if (const auto empty = cal.empty_groups(); !empty.empty()) {
    std::string groups;
    for (const auto& [cat, step] : empty) {
      groups += (groups.empty() ? "" : ", ") + std::string(to_string(cat)) + "/" + std::to_string(step);
    }
    spdlog::warn("no calibration samples for {} category/step group(s), using the conservative cap: {}", empty.size(),
                 groups);
  }
  nlohmann::json j{{"schema", kCalibrationRunSchema},
                   {"calibrator", cal.to_json()},
                   {"split",
                    {{"seed", c.seed},
                     {"dataset_sha256", digest},
                     {"calibration_ids", split.calibration},
                     {"test_ids", split.test}}}};
  atomic_write(c.out, dump_json(j));

  RunManifest m;
  m.command = "calibrate";
  m.config = {{"alpha", settings.alpha}, {"gamma", settings.gamma}};
  m.seed = c.seed;
  m.has_seed = true;
  m.add_input(dataset);
  m.add_output(c.out);
  m.write(c.out);
  spdlog::info("fitted calibrator on {} scenarios", cal_set.size());
  return kOk;
}

int cmd_evaluate(const std::string& dataset, const std::string& cal_path, const PipelineOptions& opts, double tau,
                 const Common& c) {
  const auto data = read_scenarios(fs::path(dataset));
  std::optional<CalibrationRun> run;
  if (!cal_path.empty()) run = load_calibration_run(cal_path);
  if (opts.method == Method::Ours && !run) throw ValidationError("--calibrator is required for method 'ours'");
  const auto test = test_split(data, c.seed, run ? &*run : nullptr);
  const auto horizon = test.front().config.horizon;
  MetricConfig mc;
  mc.boundary.tau = tau;
  mc.policy = opts.policy;
  const auto res = evaluate_dataset(test, opts, run ? &run->calibrator : nullptr, mc, horizon);

  nlohmann::json j{{"schema", "risktube/report/v1"},
                   {"method", std::string(to_string(opts.method))},
                   {"online", opts.online},
                   {"ambiguity", std::string(to_string(opts.policy))},
                   {"tau", tau},
                   {"n_scenarios", test.size()},
                   {"metrics", res.report.to_json()}};
  if (opts.method == Method::Ours) j["step_coverage"] = res.step_coverage.rate();
  atomic_write(c.out, dump_json(j));
  const auto csv_path = sibling(c.out, ".csv");
  atomic_write(csv_path, MetricReport::csv_header() + "\n" + res.report.csv_row(std::string(to_string(opts.method)), "test") + "\n");

  RunManifest m;
  m.command = "evaluate";
  m.config = {{"method", std::string(to_string(opts.method))},
              {"online", opts.online},
              {"ambiguity", std::string(to_string(opts.policy))},
              {"tau", tau}};
  m.seed = c.seed;
  m.has_seed = true;
  m.add_input(dataset);
  if (!cal_path.empty()) m.add_input(cal_path);
  m.add_output(c.out);
  m.add_output(csv_path);
  m.write(c.out);
  return kOk;
}

int cmd_brake_eval(const std::string& dataset, const std::string& cal_path, const GateConfig& gate,
                   const std::string& trace_dir, const Common& c) {
  const auto data = read_scenarios(fs::path(dataset));
  const auto run = load_calibration_run(cal_path);
  const auto test = test_split(data, c.seed, &run);
  const auto horizon = test.front().config.horizon;
  const auto report = brake_evaluation(test, run.calibrator, gate, horizon);
  atomic_write(c.out, report.to_csv());
  const auto json_path = sibling(c.out, ".json");
  atomic_write(json_path, dump_json({{"schema", "risktube/brake-report/v1"}, {"rows", report.to_json()}}));

  RunManifest m;
  m.command = "brake-eval";
  m.config = {{"distance_threshold", gate.distance_threshold},
              {"ambiguity", std::string(to_string(gate.policy))},
              {"anticipatory", gate.anticipatory}};
  m.seed = c.seed;
  m.has_seed = true;
  m.add_input(dataset);
  m.add_input(cal_path);
  m.add_output(c.out);
  m.add_output(json_path);

  if (!trace_dir.empty()) {
    fs::create_directories(trace_dir);
    PipelineOptions opts;
    opts.policy = gate.policy;
    CategoryCalibrator working = run.calibrator;
    for (const auto& s : test) {
      const auto tubes = build_tubes(s, opts, &working, horizon);
      const auto pred = brake_sequence(s, tubes.pred, gate);
      const auto gt = brake_sequence(s, tubes.gt, gate);
      std::ostringstream os;
      write_brake_trace(os, pred, gt, proximity_mask(s, horizon, gate));
      const auto p = fs::path(trace_dir) / (s.id + ".csv");
      atomic_write(p, os.str());
      m.add_output(p);
    }
  }
  m.write(c.out);
  return kOk;
}

int cmd_align(const std::string& features, double epsilon, const std::string& out) {
  const auto tracks = read_feature_tracks(fs::path(features));
  AlignmentOptions opt;
  opt.epsilon = epsilon;
  const double loss = alignment_loss(tracks, opt);
  const auto n = valid_triplets(tracks).size();
  atomic_write(out, dump_json({{"loss", loss}, {"n_triplets", n}, {"n_tracks", tracks.size()}, {"epsilon", epsilon}}));
  RunManifest m;
  m.command = "align";
  m.config = {{"epsilon", epsilon}};
  m.add_input(features);
  m.add_output(out);
  m.write(out);
  return kOk;
}

}  // namespace

nlohmann::json parse_simulate_config(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("config: " + std::string(e.what()));
    }
  }
  nlohmann::json j = nlohmann::json::object();
  nlohmann::json custom = nlohmann::json::object();
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("config line '" + line + "': expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));
    if (key == "preset") {
      j["preset"] = val;
    } else if (key == "n_per_cfg" || key == "clip_length" || key == "horizon") {
      j[key] = parse_count(key, val);
    } else if (key == "box_noise") {
      j[key] = parse_number(key, val);
    } else if (key.rfind("noise.", 0) == 0) {
      const auto cat = key.substr(6);
      (void)category_from_string(cat);
      j["noise"][cat] = parse_number(key, val);
    } else if (key == "categories") {
      nlohmann::json cats = nlohmann::json::array();
      std::istringstream parts(val);
      std::string part;
      while (std::getline(parts, part, ',')) cats.push_back(trim(part));
      custom["categories"] = cats;
    } else if (key == "n_objects") {
      custom[key] = parse_count(key, val);
    } else if (key == "topology" || key == "name") {
      custom[key] = val;
    } else if (key == "distractor_noise") {
      custom[key] = parse_number(key, val);
    } else {
      throw ValidationError("config field '" + key + "': unknown field");
    }
  }
  if (!custom.empty()) {
    if (j.contains("preset")) throw ValidationError("config field 'preset': cannot be combined with 'categories'");
    if (!custom.contains("categories")) throw ValidationError("config field 'categories': required for a custom scenario");
    j["configs"] = nlohmann::json::array({custom});
  }
  return j;
}

int run(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Risk-tube calibration and evaluation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  CalibratorSettings settings;
  std::string config_path, dataset, cal_path, method = "ours", ambiguity = "include", trace_dir, features;
  double tau = 1.0;
  double distance = 10.0;
  double epsilon = 0.0;
  bool online = false;
  bool anticipatory = false;

  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", common.seed, "Master seed")->required(); };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", common.out, "Output path")->required(); };

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic scenario dataset (JSON Lines)");
  sim->add_option("--config", config_path, "Config file (JSON or key = value)")->required()->check(CLI::ExistingFile);
  add_seed(sim);
  add_out(sim);

  auto* cal = app.add_subcommand("calibrate", "Split a dataset and fit category-aware calibrators");
  cal->add_option("dataset", dataset, "Scenario JSON Lines file")->required()->check(CLI::ExistingFile);
  cal->add_option("--alpha", settings.alpha, "Miscoverage level")->capture_default_str();
  cal->add_option("--gamma", settings.gamma, "Online update step")->capture_default_str();
  add_seed(cal);
  add_out(cal);

  auto* ev = app.add_subcommand("evaluate", "Evaluate a method on the test split");
  ev->add_option("dataset", dataset, "Scenario JSON Lines file")->required()->check(CLI::ExistingFile);
  ev->add_option("--calibrator", cal_path, "Calibrator from 'calibrate'")->check(CLI::ExistingFile);
  ev->add_option("--method", method, "ours, hd or rule")->capture_default_str();
  ev->add_flag("--online", online, "Update quantiles online during the sweep");
  ev->add_option("--ambiguity", ambiguity, "include or exclude")->capture_default_str();
  ev->add_option("--tau", tau, "Boundary alignment decay")->capture_default_str();
  add_seed(ev);
  add_out(ev);

  auto* br = app.add_subcommand("brake-eval", "Brake gating metrics on the test split");
  br->add_option("dataset", dataset, "Scenario JSON Lines file")->required()->check(CLI::ExistingFile);
  br->add_option("--calibrator", cal_path, "Calibrator from 'calibrate'")->required()->check(CLI::ExistingFile);
  br->add_option("--ambiguity", ambiguity, "include or exclude")->capture_default_str();
  br->add_option("--distance", distance, "Brake distance threshold in meters")->capture_default_str();
  br->add_flag("--anticipatory", anticipatory, "Brake on risk at any horizon step");
  br->add_option("--trace-dir", trace_dir, "Write per-clip brake traces here");
  add_seed(br);
  add_out(br);

  auto* al = app.add_subcommand("align", "Alignment loss of feature tracks (JSON Lines)");
  al->add_option("features", features, "Feature JSON Lines file")->required()->check(CLI::ExistingFile);
  al->add_option("--epsilon", epsilon, "Norm smoothing; 0 rejects zero vectors")->capture_default_str();
  add_out(al);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, common);
    if (cal->parsed()) {
      settings.validate();
      return cmd_calibrate(dataset, settings, common);
    }
    if (ev->parsed()) {
      PipelineOptions opts;
      opts.method = method_from_string(method);
      opts.policy = ambiguity_policy_from_string(ambiguity);
      opts.online = online;
      if (!(tau > 0.0)) throw ValidationError("--tau must be positive");
      return cmd_evaluate(dataset, cal_path, opts, tau, common);
    }
    if (br->parsed()) {
      GateConfig gate;
      gate.distance_threshold = distance;
      gate.policy = ambiguity_policy_from_string(ambiguity);
      gate.anticipatory = anticipatory;
      gate.validate();
      return cmd_brake_eval(dataset, cal_path, gate, trace_dir, common);
    }
    if (al->parsed()) {
      if (epsilon < 0.0) throw ValidationError("--epsilon must be non-negative");
      return cmd_align(features, epsilon, common.out);
    }
  } catch (const SplitOverlapError& e) {
    spdlog::error("split overlap: {}", e.what());
    return kSplitOverlap;
  } catch (const IoError& e) {
    spdlog::error("I/O error: {}", e.what());
    return kIo;
  } catch (const ValidationError& e) {
    spdlog::error("invalid input: {}", e.what());
    return kValidation;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("I/O error: {}", e.what());
    return kIo;
  }
  return kValidation;
}

}  // namespace risktube::cli
