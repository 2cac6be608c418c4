#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include <json.hpp>

#include "risktube/core.hpp"

namespace risktube {

struct BoundaryConfig {
  double tau = 1.0;  // decay constant of exp(-|t - theta| / tau), in steps
};

struct MetricConfig {
  BoundaryConfig boundary;
  AmbiguityPolicy policy = AmbiguityPolicy::Include;
};

// Fraction of GT risk objects whose risky steps are a subset of the predicted
// risky steps. GT objects missing from the prediction count as uncovered.
double coverage(const RiskTube& pred_tube, const RiskTube& gt_tube);

// Mean number of risky steps per predicted object.
double tube_volume(const RiskTube& pred_tube);

double temporal_consistency(const DecisionSeq& pred, const DecisionSeq& gt,
                            AmbiguityPolicy policy = AmbiguityPolicy::Include);

// Mean of the exponentially weighted match rates around the first and last
// risky GT step. Throws ValidationError when gt has no risky step.
double boundary_alignment(const DecisionSeq& pred, const DecisionSeq& gt, const BoundaryConfig& cfg,
                          AmbiguityPolicy policy = AmbiguityPolicy::Include);

// interval IoU x (TC + BA) / 2.
double risk_iou(const DecisionSeq& pred, const DecisionSeq& gt, const BoundaryConfig& cfg,
                AmbiguityPolicy policy = AmbiguityPolicy::Include);

struct MetricValues {
  double coverage = 0.0;
  double tube_volume = 0.0;
  double tc = 0.0;
  double ba = 0.0;
  double risk_iou = 0.0;
  std::size_t n_objects = 0;    // GT risk objects behind coverage/TC/BA/Risk-IoU
  std::size_t n_predicted = 0;  // predicted objects behind TV
};

struct MetricReport {
  MetricValues overall;
  std::array<MetricValues, 4> per_category{};

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row(const std::string& method, const std::string& scenario_set) const;
};

// Accumulates per-object metrics across many (prediction, GT) tube pairs.
// Per-object values are computed first and averaged afterwards.
class MetricAccumulator {
 public:
  explicit MetricAccumulator(MetricConfig cfg = {}) : cfg_(cfg) {}

  void add(const RiskTube& pred_tube, const RiskTube& gt_tube);
  std::size_t n_objects() const noexcept { return overall_.n_gt; }
  // Throws ValidationError when no GT risk object was seen.
  MetricReport report() const;

 private:
  struct Sums {
    double covered = 0, tc = 0, ba = 0, iou = 0, volume = 0;
    std::size_t n_gt = 0, n_pred = 0;
  };
  static MetricValues finish(const Sums& s);

  MetricConfig cfg_;
  Sums overall_;
  std::array<Sums, 4> per_category_{};
};

MetricReport evaluate(std::span<const RiskTube> pred_tubes, std::span<const RiskTube> gt_tubes,
                      const MetricConfig& cfg = {});

}  // namespace risktube
