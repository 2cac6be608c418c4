#include "risktube/pipeline.hpp"

#include <cmath>
#include <sstream>

#include "risktube/error.hpp"

namespace risktube {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Ours:
      return "ours";
    case Method::HardThreshold:
      return "hd";
    case Method::RuleBased:
      return "rule";
  }
  return "ours";
}

Method method_from_string(std::string_view name) {
  for (auto m : {Method::Ours, Method::HardThreshold, Method::RuleBased}) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown method '" + std::string(name) + "' (expected ours, hd or rule)");
}

std::vector<NonconformityRecord> collect_records(std::span<const Scenario> scenarios, const Horizon& horizon) {
  std::vector<NonconformityRecord> out;
  for (const auto& sc : scenarios) {
    for (const auto& w : windows(sc, horizon)) {
      for (const auto& o : w.objects) {
        if (o.dropped) continue;
        for (std::size_t t = 0; t < horizon.length(); ++t) {
          out.push_back({o.category, t, nonconformity(o.gt.is_risky(t) ? 1 : 0, o.scores.scores[t])});
        }
      }
    }
  }
  return out;
}

CategoryCalibrator calibrate(std::span<const Scenario> scenarios, const CalibratorSettings& settings,
                             const Horizon& horizon) {
  const auto records = collect_records(scenarios, horizon);
  return fit_category_calibrators(records, settings, horizon);
}

namespace {

std::optional<RiskCategory> category_for(const WindowObject& o, const PipelineOptions& opts) {
  if (!opts.classifier || opts.classifier->mode() == CategoryClassifier::Mode::Oracle) return o.category;
  return opts.classifier->classify(o.scores);
}

struct Observed {
  std::optional<RiskCategory> category;
  const WindowObject* object;
};

}  // namespace

ScenarioTubes build_tubes(const Scenario& scenario, const PipelineOptions& opts, CategoryCalibrator* cal,
                          const Horizon& horizon, StepCoverage* coverage) {
  if (opts.method == Method::Ours && cal == nullptr) throw ValidationError("the calibrated method needs a calibrator");
  if (cal != nullptr && !(cal->horizon() == horizon)) throw ValidationError("calibrator horizon differs from the data");
  ScenarioTubes out;
  for (const auto& w : windows(scenario, horizon)) {
    RiskTube pred(horizon, opts.policy);
    RiskTube gt(horizon, opts.policy);
    std::vector<Observed> seen;
    for (const auto& o : w.objects) {
      gt.insert(o.id, o.gt, o.category);
      if (o.dropped) continue;
      switch (opts.method) {
        case Method::Ours: {
          const auto c = category_for(o, opts);
          pred.insert(o.id, calibrate_tube(o.scores, c, *cal, opts.mode), o.category);
          seen.push_back({c, &o});
          if (coverage != nullptr) {
            for (std::size_t t = 0; t < horizon.length(); ++t) {
              const double q = cal->quantile(c, t, opts.mode);
              const bool in = nonconformity(o.gt.is_risky(t) ? 1 : 0, o.scores.scores[t]) <= q;
              coverage->covered += in ? 1 : 0;
              ++coverage->total;
              if (o.category) {
                coverage->covered_by_category[index_of(*o.category)] += in ? 1 : 0;
                ++coverage->total_by_category[index_of(*o.category)];
              }
            }
          }
          break;
        }
        case Method::HardThreshold:
          pred.insert(o.id, hard_decision(o.scores, opts.hd_threshold), o.category);
          break;
        case Method::RuleBased:
          pred.insert(o.id, rule_based(o.scores), o.category);
          break;
      }
    }
    if (opts.online && cal != nullptr) {
      for (const auto& [c, o] : seen) {
        for (std::size_t t = 0; t < horizon.length(); ++t) {
          const double q = cal->quantile(c, t, opts.mode);
          const int err = nonconformity(o->gt.is_risky(t) ? 1 : 0, o->scores.scores[t]) > q ? 1 : 0;
          cal->apply_online_update(c, t, err, opts.mode);
        }
      }
    }
    out.pred.push_back(std::move(pred));
    out.gt.push_back(std::move(gt));
  }
  return out;
}

double StepCoverage::rate() const {
  return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
}

double StepCoverage::rate(RiskCategory c) const {
  const auto i = index_of(c);
  return total_by_category[i] == 0 ? 0.0
                                   : static_cast<double>(covered_by_category[i]) / static_cast<double>(total_by_category[i]);
}

EvaluationResult evaluate_dataset(std::span<const Scenario> scenarios, const PipelineOptions& opts,
                                  const CategoryCalibrator* cal, const MetricConfig& metric_cfg,
                                  const Horizon& horizon) {
  std::optional<CategoryCalibrator> working;
  if (cal != nullptr) working = *cal;
  MetricConfig mc = metric_cfg;
  mc.policy = opts.policy;
  MetricAccumulator acc(mc);
  StepCoverage sc;
  for (const auto& s : scenarios) {
    auto tubes = build_tubes(s, opts, working ? &*working : nullptr, horizon, &sc);
    for (std::size_t i = 0; i < tubes.pred.size(); ++i) acc.add(tubes.pred[i], tubes.gt[i]);
  }
  return EvaluationResult{acc.report(), sc, working};
}

const BrakeRow& BrakeReport::row(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw ValidationError("no brake row named '" + std::string(name) + "'");
}

nlohmann::json BrakeReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"method", r.name},
                 {"average_brake_count", r.average_brake_count},
                 {"mbc", r.mbc ? nlohmann::json(*r.mbc) : nlohmann::json()}});
  }
  return j;
}

std::string BrakeReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "method,average_brake_count,mbc\n";
  for (const auto& r : rows) {
    os << r.name << ',' << r.average_brake_count << ',';
    if (r.mbc) os << *r.mbc;
    os << '\n';
  }
  return os.str();
}

BrakeReport brake_evaluation(std::span<const Scenario> scenarios, const CategoryCalibrator& cal,
                             const GateConfig& gate, const Horizon& horizon) {
  if (scenarios.empty()) throw ValidationError("brake evaluation needs at least one scenario");
  const char* names[] = {"gt", "distance", "hd", "ours"};
  std::array<std::vector<BrakeSequence>, 4> seqs;
  std::array<double, 4> mbc{};
  PipelineOptions opts;
  opts.policy = gate.policy;
  CategoryCalibrator working = cal;
  for (const auto& s : scenarios) {
    opts.method = Method::Ours;
    const auto ours = build_tubes(s, opts, &working, horizon);
    opts.method = Method::HardThreshold;
    const auto hd = build_tubes(s, opts, nullptr, horizon);
    opts.method = Method::RuleBased;
    const auto rule = build_tubes(s, opts, nullptr, horizon);
    const auto gt = brake_sequence(s, ours.gt, gate);
    seqs[0].push_back(gt);
    seqs[1].push_back(brake_sequence(s, rule.pred, gate));
    seqs[2].push_back(brake_sequence(s, hd.pred, gate));
    seqs[3].push_back(brake_sequence(s, ours.pred, gate));
    for (std::size_t m = 1; m < 4; ++m) mbc[m] += static_cast<double>(misaligned_brake_count(seqs[m].back(), gt));
  }
  BrakeReport report;
  for (std::size_t m = 0; m < 4; ++m) {
    BrakeRow row{names[m], average_brake_count(seqs[m]), std::nullopt};
    if (m > 0) row.mbc = mbc[m] / static_cast<double>(scenarios.size());
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace risktube
