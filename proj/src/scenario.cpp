#include "risktube/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "risktube/error.hpp"
#include "risktube/rng.hpp"

namespace risktube {

namespace {

constexpr std::array<std::size_t, 4> kRampWidth = {2, 1, 2, 1};
constexpr double kApproachSpeed = 1.2;  // m per frame
constexpr double kCrossing = 10.0;      // m, crossed during the GT interval
constexpr double kMinDistance = 0.5;
constexpr double kDistractorNear = 15.0;
constexpr double kDistractorSpread = 20.0;
constexpr double kBoxShrink = 1.5;
constexpr double kBoxJitter = 0.5;
constexpr double kBoxDrop = 0.1;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double topology_speed(Topology t) {
  switch (t) {
    case Topology::TJunction:
      return 0.9 * kApproachSpeed;
    case Topology::FourWay:
      return 1.1 * kApproachSpeed;
    case Topology::Straight:
      break;
  }
  return kApproachSpeed;
}

std::int64_t draw(Rng& rng, std::int64_t lo, std::int64_t hi_exclusive) {
  return rng.uniform_int(lo, std::max(lo, hi_exclusive - 1));
}

// Category templates for the GT interval within a clip of length L.
RiskInterval place_interval(RiskCategory c, std::size_t clip, Rng& rng) {
  const auto L = static_cast<std::int64_t>(clip);
  std::int64_t len = 0;
  std::int64_t s = 0;
  switch (c) {
    case RiskCategory::Interaction:
      len = rng.uniform_int(L / 4, L / 3);
      s = draw(rng, L / 3 - 2, L / 2 - 2);
      break;
    case RiskCategory::Collision:
      len = rng.uniform_int(L / 5, L / 4);
      s = L - len - rng.uniform_int(0, 2);
      break;
    case RiskCategory::Obstacle:
      len = rng.uniform_int(L / 2, 2 * L / 3);
      s = draw(rng, 2, L - len - 1);
      break;
    case RiskCategory::Occlusion:
      len = rng.uniform_int(L / 4, L / 3);
      s = draw(rng, 3, L - len - 3);
      break;
  }
  len = std::clamp<std::int64_t>(len, 1, L);
  s = std::clamp<std::int64_t>(s, 0, L - len);
  return {static_cast<std::size_t>(s), static_cast<std::size_t>(s + len - 1)};
}

}  // namespace

std::string_view to_string(Topology t) noexcept {
  switch (t) {
    case Topology::Straight:
      return "Straight";
    case Topology::TJunction:
      return "TJunction";
    case Topology::FourWay:
      return "FourWay";
  }
  return "Straight";
}

Topology topology_from_string(std::string_view name) {
  for (auto t : {Topology::Straight, Topology::TJunction, Topology::FourWay}) {
    if (to_string(t) == name) return t;
  }
  throw ValidationError("unknown topology '" + std::string(name) + "'");
}

void ScenarioConfig::validate() const {
  if (categories.empty()) throw ValidationError("config '" + name + "': categories must not be empty");
  if (n_objects < categories.size()) {
    throw ValidationError("config '" + name + "': n_objects must be at least the number of categories");
  }
  if (clip_length < horizon.length()) {
    throw ValidationError("config '" + name + "': clip_length must be >= horizon");
  }
  if (clip_length < 12) throw ValidationError("config '" + name + "': clip_length must be >= 12");
  for (double s : noise) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("config '" + name + "': noise must be >= 0");
  }
  if (!(distractor_noise >= 0.0) || !std::isfinite(distractor_noise)) {
    throw ValidationError("config '" + name + "': distractor_noise must be >= 0");
  }
  if (!(box_noise >= 0.0 && box_noise <= 1.0)) {
    throw ValidationError("config '" + name + "': box_noise must be in [0, 1]");
  }
}

bool ScenarioConfig::multi_risk() const {
  std::set<RiskCategory> distinct(categories.begin(), categories.end());
  return distinct.size() > 1;
}

nlohmann::json ScenarioConfig::to_json() const {
  nlohmann::json cats = nlohmann::json::array();
  for (auto c : categories) cats.push_back(std::string(to_string(c)));
  nlohmann::json sig = nlohmann::json::object();
  for (auto c : kAllCategories) sig[std::string(to_string(c))] = noise[index_of(c)];
  return {{"name", name},
          {"n_objects", n_objects},
          {"categories", cats},
          {"topology", std::string(to_string(topology))},
          {"horizon", horizon.length()},
          {"clip_length", clip_length},
          {"noise", sig},
          {"distractor_noise", distractor_noise},
          {"box_noise", box_noise}};
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("scenario config must be a JSON object");
  ScenarioConfig cfg;
  try {
    cfg.name = j.value("name", cfg.name);
    if (j.contains("categories")) {
      cfg.categories.clear();
      for (const auto& c : j.at("categories")) cfg.categories.push_back(category_from_string(c.get<std::string>()));
    }
    cfg.n_objects = j.value("n_objects", cfg.categories.size() + 1);
    if (j.contains("topology")) cfg.topology = topology_from_string(j.at("topology").get<std::string>());
    if (j.contains("horizon")) cfg.horizon = Horizon(j.at("horizon").get<std::size_t>());
    cfg.clip_length = j.value("clip_length", cfg.clip_length);
    if (j.contains("noise")) {
      for (const auto& [k, v] : j.at("noise").items()) cfg.noise[index_of(category_from_string(k))] = v.get<double>();
    }
    cfg.distractor_noise = j.value("distractor_noise", cfg.distractor_noise);
    cfg.box_noise = j.value("box_noise", cfg.box_noise);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config '" + cfg.name + "': " + e.what());
  }
  cfg.validate();
  return cfg;
}

double clean_score(RiskCategory c, std::size_t start, std::size_t end, std::size_t frame) {
  if (frame < start || frame > end) return 0.0;
  const double w = static_cast<double>(kRampWidth[index_of(c)]);
  const double depth = static_cast<double>(std::min(frame - start + 1, end - frame + 1));
  return std::min(1.0, depth / (w + 1.0));
}

Scenario generate_scenario(const ScenarioConfig& cfg, std::uint64_t seed, std::string id) {
  cfg.validate();
  const std::size_t L = cfg.clip_length;
  Scenario sc;
  sc.seed = seed;
  sc.config = cfg;
  if (id.empty()) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(seed));
    id = buf;
  }
  sc.id = std::move(id);

  // Scenario content and perception noise come from separate streams so that a
  // noisy scenario shares its clean content with the noise-free one.
  Rng rng(derive_seed({seed, 0}));
  Rng perception(derive_seed({seed, 1}));
  const double speed = topology_speed(cfg.topology);

  for (std::size_t k = 0; k < cfg.n_objects; ++k) {
    ScenarioObject obj;
    obj.id = "o" + std::to_string(k);
    obj.frames.resize(L);
    if (k < cfg.categories.size()) {
      const auto c = cfg.categories[k];
      obj.category = c;
      const auto iv = place_interval(c, L, rng);
      const double sigma = cfg.noise[index_of(c)];
      for (std::size_t f = 0; f < L; ++f) {
        obj.frames[f].gt_risk = f >= iv.start && f <= iv.end;
        obj.frames[f].score = clamp01(clean_score(c, iv.start, iv.end, f) + rng.normal(0.0, sigma));
      }
      const double crossing = static_cast<double>(iv.start) + rng.uniform(0.0, 0.3) * static_cast<double>(iv.end - iv.start);
      for (std::size_t f = 0; f < L; ++f) {
        obj.frames[f].distance_m = std::max(kMinDistance, kCrossing + speed * (crossing - static_cast<double>(f)));
      }
    } else {
      for (std::size_t f = 0; f < L; ++f) obj.frames[f].score = clamp01(rng.normal(0.0, cfg.distractor_noise));
      const double d = kDistractorNear + rng.uniform(0.0, kDistractorSpread);
      for (auto& fr : obj.frames) fr.distance_m = d;
    }

    // Detection errors pull scores toward 0.5, add jitter and drop frames.
    const double b = cfg.box_noise;
    for (auto& fr : obj.frames) {
      const double u = perception.uniform();
      const double jitter = perception.normal();
      const double drop = perception.uniform();
      if (b > 0.0) {
        fr.score = clamp01(fr.score + b * kBoxShrink * (0.5 - fr.score) * 2.0 * u + jitter * kBoxJitter * b);
        fr.dropped = drop < kBoxDrop * b;
      }
    }
    sc.objects.push_back(std::move(obj));
  }
  return sc;
}

std::uint64_t scenario_seed(std::uint64_t master_seed, std::size_t cfg_index, std::size_t instance) {
  return derive_seed({master_seed, cfg_index, instance});
}

std::vector<Scenario> generate_dataset(std::span<const ScenarioConfig> cfgs, std::size_t n_per_cfg,
                                       std::uint64_t master_seed) {
  if (n_per_cfg == 0) throw ValidationError("n_per_cfg must be at least 1");
  if (cfgs.empty()) throw ValidationError("at least one scenario config is required");
  std::vector<Scenario> out;
  out.reserve(cfgs.size() * n_per_cfg);
  for (std::size_t c = 0; c < cfgs.size(); ++c) {
    for (std::size_t i = 0; i < n_per_cfg; ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "c%zu-%05zu", c, i);
      out.push_back(generate_scenario(cfgs[c], scenario_seed(master_seed, c, i), buf));
    }
  }
  return out;
}

std::vector<ScenarioConfig> default_configs(double box_noise) {
  std::vector<ScenarioConfig> cfgs;
  const char* names[] = {"interaction", "collision", "occlusion", "obstacle"};
  const Topology topo[] = {Topology::FourWay, Topology::Straight, Topology::TJunction, Topology::Straight};
  for (auto c : kAllCategories) {
    ScenarioConfig cfg;
    cfg.name = names[index_of(c)];
    cfg.categories = {c};
    cfg.n_objects = 2;
    cfg.topology = topo[index_of(c)];
    cfg.box_noise = box_noise;
    cfgs.push_back(cfg);
  }
  ScenarioConfig a;
  a.name = "multi-interaction-collision";
  a.categories = {RiskCategory::Interaction, RiskCategory::Collision};
  a.n_objects = 3;
  a.topology = Topology::FourWay;
  a.box_noise = box_noise;
  cfgs.push_back(a);
  ScenarioConfig b = a;
  b.name = "multi-occlusion-obstacle";
  b.categories = {RiskCategory::Occlusion, RiskCategory::Obstacle};
  b.topology = Topology::TJunction;
  cfgs.push_back(b);
  return cfgs;
}

DatasetSplit split_dataset(std::span<const Scenario> scenarios, SplitRatios ratios, std::uint64_t seed) {
  const std::size_t n = scenarios.size();
  if (n < 3) throw ValidationError("splitting needs at least 3 scenarios");
  const std::size_t total = ratios.train + ratios.calibration + ratios.test;
  if (ratios.train == 0 || ratios.calibration == 0 || ratios.test == 0) {
    throw ValidationError("split ratios must be positive");
  }
  std::vector<std::string> ids;
  ids.reserve(n);
  std::unordered_set<std::string> seen;
  for (const auto& s : scenarios) {
    if (!seen.insert(s.id).second) throw ValidationError("duplicate scenario id '" + s.id + "'");
    ids.push_back(s.id);
  }
  Rng rng(derive_seed({seed, 0x53504C4954ULL}));
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(ids[i], ids[j]);
  }
  auto share = [&](std::size_t r) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(n * r) / static_cast<double>(total)));
  };
  std::size_t n_cal = std::max<std::size_t>(1, share(ratios.calibration));
  std::size_t n_test = std::max<std::size_t>(1, share(ratios.test));
  while (n_cal + n_test > n - 1) {
    if (n_test > 1) --n_test;
    else --n_cal;
  }
  const std::size_t n_train = n - n_cal - n_test;
  DatasetSplit split;
  split.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.calibration.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                           ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal));
  split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal), ids.end());
  return split;
}

std::vector<Window> windows(const Scenario& scenario, const Horizon& horizon) {
  const std::size_t L = scenario.clip_length();
  const std::size_t H = horizon.length();
  if (L < H) throw ValidationError("scenario '" + scenario.id + "' is shorter than the horizon");
  std::vector<Window> out;
  out.reserve(L - H + 1);
  for (std::size_t T = 0; T + H <= L; ++T) {
    Window w;
    w.start = T;
    for (const auto& obj : scenario.objects) {
      if (obj.frames.size() != L) throw ValidationError("object '" + obj.id + "' has the wrong frame count");
      std::vector<Decision> gt(H);
      ScoreTube tube;
      tube.scores.resize(H);
      tube.category_hint = obj.category;
      for (std::size_t t = 0; t < H; ++t) {
        const auto& fr = obj.frames[T + t];
        gt[t] = fr.gt_risk ? Decision::Risk : Decision::NoRisk;
        tube.scores[t] = fr.score;
      }
      w.objects.push_back(WindowObject{obj.id, obj.category, DecisionSeq(std::move(gt), DecisionOrigin::GroundTruth),
                                       std::move(tube), obj.frames[T].distance_m, obj.frames[T].dropped});
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<Scenario> select(std::span<const Scenario> scenarios, std::span<const std::string> ids) {
  std::unordered_set<std::string> wanted(ids.begin(), ids.end());
  std::vector<Scenario> out;
  for (const auto& s : scenarios) {
    if (wanted.count(s.id) != 0) out.push_back(s);
  }
  return out;
}

}  // namespace risktube
