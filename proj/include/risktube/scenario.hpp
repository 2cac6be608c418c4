#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "risktube/conformal.hpp"
#include "risktube/core.hpp"

namespace risktube {

enum class Topology { Straight, TJunction, FourWay };

std::string_view to_string(Topology t) noexcept;
Topology topology_from_string(std::string_view name);

inline constexpr std::array<double, 4> kDefaultNoise = {0.10, 0.05, 0.25, 0.08};

struct ScenarioConfig {
  std::string name = "scenario";
  std::size_t n_objects = 2;
  std::vector<RiskCategory> categories{RiskCategory::Interaction};
  Topology topology = Topology::Straight;
  Horizon horizon;
  std::size_t clip_length = 40;
  std::array<double, 4> noise = kDefaultNoise;  // per-category score noise sigma
  double distractor_noise = 0.08;
  double box_noise = 0.0;  // perception-noise level in [0, 1]

  void validate() const;
  bool multi_risk() const;
  nlohmann::json to_json() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
};

struct Frame {
  bool gt_risk = false;
  double score = 0.0;
  double distance_m = 0.0;
  bool dropped = false;
};

struct ScenarioObject {
  std::string id;
  std::optional<RiskCategory> category;
  std::vector<Frame> frames;
};

struct Scenario {
  std::string id;
  std::uint64_t seed = 0;
  ScenarioConfig config;
  std::vector<ScenarioObject> objects;

  std::size_t clip_length() const noexcept { return config.clip_length; }
};

// Noise-free score of a frame for a GT interval [start, end]: a linear ramp
// inside the interval, 1 in its interior and 0 outside.
double clean_score(RiskCategory c, std::size_t start, std::size_t end, std::size_t frame);

Scenario generate_scenario(const ScenarioConfig& cfg, std::uint64_t seed, std::string id = {});

// Seed of instance i of config c: derive_seed({master_seed, c, i}).
std::uint64_t scenario_seed(std::uint64_t master_seed, std::size_t cfg_index, std::size_t instance);

std::vector<Scenario> generate_dataset(std::span<const ScenarioConfig> cfgs, std::size_t n_per_cfg,
                                       std::uint64_t master_seed);

// Four single-category configs followed by {Interaction, Collision} and
// {Occlusion, Obstacle}; every config carries one distractor.
std::vector<ScenarioConfig> default_configs(double box_noise = 0.0);

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> calibration;
  std::vector<std::string> test;
};

struct SplitRatios {
  std::size_t train = 8;
  std::size_t calibration = 1;
  std::size_t test = 1;
};

// Seeded shuffle then contiguous cut. Throws ValidationError below 3 scenarios.
DatasetSplit split_dataset(std::span<const Scenario> scenarios, SplitRatios ratios, std::uint64_t seed);

struct WindowObject {
  std::string id;
  std::optional<RiskCategory> category;
  DecisionSeq gt;
  ScoreTube scores;
  double distance_now = 0.0;  // distance at the window's first frame
  bool dropped = false;       // perception missed the object at the window's first frame
};

struct Window {
  std::size_t start = 0;
  std::vector<WindowObject> objects;
};

std::vector<Window> windows(const Scenario& scenario, const Horizon& horizon);

// Subset of scenarios whose ids are listed, in dataset order.
std::vector<Scenario> select(std::span<const Scenario> scenarios, std::span<const std::string> ids);

}  // namespace risktube
