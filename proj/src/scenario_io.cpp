#include "risktube/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "risktube/error.hpp"

namespace risktube {

nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : s.objects) {
    nlohmann::json frames = nlohmann::json::array();
    for (std::size_t t = 0; t < o.frames.size(); ++t) {
      const auto& f = o.frames[t];
      frames.push_back({{"t", t},
                        {"gt_risk", f.gt_risk ? 1 : 0},
                        {"score", f.score},
                        {"distance_m", f.distance_m},
                        {"dropped", f.dropped}});
    }
    objects.push_back({{"id", o.id},
                       {"category", o.category ? nlohmann::json(std::string(to_string(*o.category))) : nlohmann::json()},
                       {"frames", std::move(frames)}});
  }
  return {{"schema", kScenarioSchema},
          {"id", s.id},
          {"seed", s.seed},
          {"config", s.config.to_json()},
          {"objects", std::move(objects)}};
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    if (!j.is_object()) throw ValidationError("scenario record must be a JSON object");
    const auto schema = j.value("schema", std::string{});
    if (schema != kScenarioSchema) throw ValidationError("unsupported scenario schema '" + schema + "'");
    s.id = j.at("id").get<std::string>();
    s.seed = j.value("seed", std::uint64_t{0});
    s.config = ScenarioConfig::from_json(j.at("config"));
    for (const auto& jo : j.at("objects")) {
      ScenarioObject o;
      o.id = jo.at("id").get<std::string>();
      if (!jo.at("category").is_null()) o.category = category_from_string(jo.at("category").get<std::string>());
      for (const auto& jf : jo.at("frames")) {
        const auto t = jf.at("t").get<std::size_t>();
        if (t != o.frames.size()) throw ValidationError("object '" + o.id + "': frames must be listed in order from t=0");
        Frame f;
        const auto g = jf.at("gt_risk");
        f.gt_risk = g.is_boolean() ? g.get<bool>() : g.get<int>() != 0;
        f.score = jf.at("score").get<double>();
        if (!(f.score >= 0.0 && f.score <= 1.0)) throw ValidationError("object '" + o.id + "': score outside [0,1]");
        if (!jf.contains("distance_m")) throw ValidationError("object '" + o.id + "': missing distance_m");
        f.distance_m = jf.at("distance_m").get<double>();
        if (!(f.distance_m > 0.0) || !std::isfinite(f.distance_m)) {
          throw ValidationError("object '" + o.id + "': distance_m must be positive");
        }
        f.dropped = jf.value("dropped", false);
        o.frames.push_back(f);
      }
      if (o.frames.size() != s.config.clip_length) {
        throw ValidationError("object '" + o.id + "': frame count differs from clip_length");
      }
      s.objects.push_back(std::move(o));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario '" + s.id + "': " + e.what());
  }
  return s;
}

void write_scenarios(std::ostream& os, const std::vector<Scenario>& scenarios) {
  for (const auto& s : scenarios) os << scenario_to_json(s).dump() << '\n';
}

std::vector<Scenario> read_scenarios(std::istream& is) {
  std::vector<Scenario> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(scenario_from_json(j));
  }
  return out;
}

std::vector<Scenario> read_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_scenarios(in);
}

}  // namespace risktube
