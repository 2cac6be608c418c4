#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "risktube/conformal.hpp"
#include "risktube/core.hpp"
#include "risktube/gate.hpp"
#include "risktube/metrics.hpp"
#include "risktube/scenario.hpp"

namespace risktube {

enum class Method { Ours, HardThreshold, RuleBased };

std::string_view to_string(Method m) noexcept;
// Accepts "ours", "hd" and "rule".
Method method_from_string(std::string_view name);

struct PipelineOptions {
  Method method = Method::Ours;
  CalibrationMode mode = CalibrationMode::CategoryAware;
  AmbiguityPolicy policy = AmbiguityPolicy::Include;
  bool online = false;  // adapt the calibrator while sweeping the test scenarios
  double hd_threshold = 0.5;
  // Category source for calibrated tubes; the oracle when unset.
  std::optional<CategoryClassifier> classifier;
};

// Per-step nonconformity records from every window and detected object.
std::vector<NonconformityRecord> collect_records(std::span<const Scenario> scenarios, const Horizon& horizon);

CategoryCalibrator calibrate(std::span<const Scenario> scenarios, const CalibratorSettings& settings,
                             const Horizon& horizon = Horizon{});

struct StepCoverage {
  std::size_t covered = 0;
  std::size_t total = 0;
  std::array<std::size_t, 4> covered_by_category{};
  std::array<std::size_t, 4> total_by_category{};

  double rate() const;
  double rate(RiskCategory c) const;
};

struct ScenarioTubes {
  std::vector<RiskTube> pred;  // one per window
  std::vector<RiskTube> gt;    // every object, including ones never risky
};

// cal may be null for the baselines. With opts.online the calibrator is updated
// in place after each window using that window's labels. Step coverage of the
// calibrated method is added to coverage when given.
ScenarioTubes build_tubes(const Scenario& scenario, const PipelineOptions& opts, CategoryCalibrator* cal,
                          const Horizon& horizon = Horizon{}, StepCoverage* coverage = nullptr);

struct EvaluationResult {
  MetricReport report;
  // Fraction of steps whose label lies in the conformal prediction set
  // {y : |y - score| <= q}. Only filled for the calibrated method.
  StepCoverage step_coverage;
  std::optional<CategoryCalibrator> final_calibrator;  // after online updates
};

EvaluationResult evaluate_dataset(std::span<const Scenario> scenarios, const PipelineOptions& opts,
                                  const CategoryCalibrator* cal, const MetricConfig& metric_cfg = {},
                                  const Horizon& horizon = Horizon{});

struct BrakeRow {
  std::string name;
  double average_brake_count = 0.0;
  std::optional<double> mbc;  // undefined for the GT row
};

struct BrakeReport {
  std::vector<BrakeRow> rows;  // gt, distance, hd, ours

  const BrakeRow& row(std::string_view name) const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

BrakeReport brake_evaluation(std::span<const Scenario> scenarios, const CategoryCalibrator& cal,
                             const GateConfig& gate = {}, const Horizon& horizon = Horizon{});

}  // namespace risktube
