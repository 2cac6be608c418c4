#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "risktube/core.hpp"

namespace risktube {

// Raw per-step risk scores for one object over one horizon window.
struct ScoreTube {
  std::vector<double> scores;
  std::optional<RiskCategory> category_hint;
};

struct NonconformityRecord {
  // nullopt marks objects without a category; they feed only the pooled table.
  std::optional<RiskCategory> category;
  std::size_t step = 0;
  double score = 0.0;
};

// |gt_label - pred_score|. Throws ValidationError if the score is outside [0,1]
// or the label is not 0/1.
double nonconformity(int gt_label, double pred_score);

// k-th smallest score with k = ceil((n+1)(1-alpha)); 1.0 when k > n.
// Throws UncalibratableError on an empty list.
double fit_quantile(std::span<const double> scores, double alpha);

// Same rule on an already ascending list; no copy.
double quantile_from_sorted(std::span<const double> sorted_scores, double alpha);

// True when k = ceil((n+1)(1-alpha)) exceeds n, i.e. the quantile is capped.
bool quantile_is_capped(std::size_t n, double alpha);

struct CalibratorSettings {
  double alpha = 0.1;
  double gamma = 0.01;
  double alpha_min = 0.01;
  double alpha_max = 0.5;

  void validate() const;
};

struct StepCalibration {
  std::vector<double> scores;  // ascending
  double quantile = 1.0;
  double effective_alpha = 0.1;
  // Set when the quantile is the conservative cap (no records or k > n).
  bool flagged = true;
};

// Which quantile table a tube is calibrated against.
enum class CalibrationMode { CategoryAware, Pooled };

// Per-category, per-step conformal quantiles plus a pooled table fitted on all
// records. Objects without a category are always calibrated with the pooled
// table.
class CategoryCalibrator {
 public:
  CategoryCalibrator(CalibratorSettings settings, Horizon horizon);

  const CalibratorSettings& settings() const noexcept { return settings_; }
  const Horizon& horizon() const noexcept { return horizon_; }

  const StepCalibration& step(RiskCategory c, std::size_t t) const;
  const StepCalibration& pooled_step(std::size_t t) const;
  StepCalibration& step(RiskCategory c, std::size_t t);
  StepCalibration& pooled_step(std::size_t t);

  const StepCalibration& lookup(std::optional<RiskCategory> c, std::size_t t,
                                CalibrationMode mode = CalibrationMode::CategoryAware) const;
  double quantile(std::optional<RiskCategory> c, std::size_t t,
                  CalibrationMode mode = CalibrationMode::CategoryAware) const {
    return lookup(c, t, mode).quantile;
  }

  // Adaptive update in place; see online_update.
  void apply_online_update(std::optional<RiskCategory> c, std::size_t t, int err,
                           CalibrationMode mode = CalibrationMode::CategoryAware);

  // (category, step) groups fitted from no records.
  std::vector<std::pair<RiskCategory, std::size_t>> empty_groups() const;

  nlohmann::json to_json() const;
  static CategoryCalibrator from_json(const nlohmann::json& j);

 private:
  StepCalibration& mutable_lookup(std::optional<RiskCategory> c, std::size_t t, CalibrationMode mode);

  CalibratorSettings settings_;
  Horizon horizon_;
  std::array<std::vector<StepCalibration>, 4> per_category_;
  std::vector<StepCalibration> pooled_;
};

CategoryCalibrator fit_category_calibrators(std::span<const NonconformityRecord> records,
                                            const CalibratorSettings& settings,
                                            const Horizon& horizon = Horizon{});

// Buffer-zone rule. Risk when pred >= 1-q, NoRisk when pred <= q, Ambiguous in
// between. For q >= 0.5 the zone collapses to thresholding at 0.5.
Decision calibrate_step(double pred_score, double quantile);

DecisionSeq calibrate_tube(const ScoreTube& raw, std::optional<RiskCategory> category,
                           const CategoryCalibrator& cal,
                           CalibrationMode mode = CalibrationMode::CategoryAware);

// alpha_t <- clamp(alpha_t + gamma (alpha - err), alpha_min, alpha_max), then the
// quantile is recomputed from the retained scores at level 1 - alpha_t.
CategoryCalibrator online_update(const CategoryCalibrator& cal, std::optional<RiskCategory> category,
                                 std::size_t step, int err);

DecisionSeq hard_decision(const ScoreTube& raw, double threshold = 0.5);
DecisionSeq rule_based(const ScoreTube& raw);

// Features used by the nearest-centroid stub: mean score, population variance,
// switch count of the 0.5-thresholded scores, first argmax step.
using TrackFeatures = std::array<double, 4>;
TrackFeatures track_features(const ScoreTube& track);

class CategoryClassifier {
 public:
  enum class Mode { Oracle, Stub };

  static CategoryClassifier oracle();
  static CategoryClassifier stub(std::array<TrackFeatures, 4> centroids);
  // Centroids are per-category feature means over the labelled tracks.
  // Categories without tracks get an infinitely distant centroid.
  static CategoryClassifier fit_stub(std::span<const ScoreTube> labelled_tracks);

  Mode mode() const noexcept { return mode_; }
  const std::array<TrackFeatures, 4>& centroids() const noexcept { return centroids_; }

  // Oracle: the hint, or ValidationError when absent. Stub: nearest centroid,
  // ties to the lowest enum value.
  RiskCategory classify(const ScoreTube& track) const;

 private:
  Mode mode_ = Mode::Oracle;
  std::array<TrackFeatures, 4> centroids_{};
};

}  // namespace risktube
