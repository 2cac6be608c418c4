#include <functional>
#include <string>

#include "risktube/conformal.hpp"
#include "risktube/error.hpp"

namespace risktube {

namespace {

constexpr const char* kSchema = "risktube/calibrator/v1";

nlohmann::json step_to_json(std::size_t t, const StepCalibration& s) {
  return {{"step", t},
          {"scores", s.scores},
          {"quantile", s.quantile},
          {"effective_alpha", s.effective_alpha},
          {"flagged", s.flagged}};
}

StepCalibration step_from_json(const nlohmann::json& j) {
  StepCalibration s;
  s.scores = j.at("scores").get<std::vector<double>>();
  s.quantile = j.at("quantile").get<double>();
  s.effective_alpha = j.at("effective_alpha").get<double>();
  s.flagged = j.at("flagged").get<bool>();
  for (std::size_t i = 1; i < s.scores.size(); ++i) {
    if (s.scores[i] < s.scores[i - 1]) throw ValidationError("calibrator scores must be sorted ascending");
  }
  if (!(s.quantile >= 0.0 && s.quantile <= 1.0)) throw ValidationError("calibrator quantile outside [0,1]");
  return s;
}

void read_table(const nlohmann::json& arr, std::size_t horizon, const char* name,
                const std::function<StepCalibration&(std::size_t)>& slot) {
  if (!arr.is_array() || arr.size() != horizon) {
    throw ValidationError(std::string("calibrator table '") + name + "' must have one entry per step");
  }
  for (const auto& e : arr) {
    const auto t = e.at("step").get<std::size_t>();
    if (t >= horizon) throw ValidationError("calibrator step outside horizon");
    slot(t) = step_from_json(e);
  }
}

}  // namespace

nlohmann::json CategoryCalibrator::to_json() const {
  nlohmann::json cats = nlohmann::json::object();
  for (auto c : kAllCategories) {
    auto arr = nlohmann::json::array();
    for (std::size_t t = 0; t < horizon_.length(); ++t) arr.push_back(step_to_json(t, step(c, t)));
    cats[std::string(to_string(c))] = std::move(arr);
  }
  auto pooled = nlohmann::json::array();
  for (std::size_t t = 0; t < horizon_.length(); ++t) pooled.push_back(step_to_json(t, pooled_step(t)));
  return {{"schema", kSchema},
          {"alpha", settings_.alpha},
          {"gamma", settings_.gamma},
          {"alpha_min", settings_.alpha_min},
          {"alpha_max", settings_.alpha_max},
          {"horizon", horizon_.length()},
          {"categories", std::move(cats)},
          {"pooled", std::move(pooled)}};
}

CategoryCalibrator CategoryCalibrator::from_json(const nlohmann::json& j) {
  try {
    if (j.value("schema", std::string{}) != kSchema) {
      throw ValidationError(std::string("calibrator schema must be ") + kSchema);
    }
    CalibratorSettings s;
    s.alpha = j.at("alpha").get<double>();
    s.gamma = j.at("gamma").get<double>();
    s.alpha_min = j.at("alpha_min").get<double>();
    s.alpha_max = j.at("alpha_max").get<double>();
    CategoryCalibrator cal(s, Horizon(j.at("horizon").get<std::size_t>()));
    const std::size_t h = cal.horizon_.length();
    for (auto c : kAllCategories) {
      const std::string name(to_string(c));
      read_table(j.at("categories").at(name), h, name.c_str(),
                 [&](std::size_t t) -> StepCalibration& { return cal.step(c, t); });
    }
    read_table(j.at("pooled"), h, "pooled", [&](std::size_t t) -> StepCalibration& { return cal.pooled_step(t); });
    return cal;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed calibrator: ") + e.what());
  }
}

}  // namespace risktube
