#include "risktube/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "risktube/error.hpp"

namespace risktube {

namespace {

// ceil((n+1)(1-alpha)) computed on the integer grid. A tiny slack absorbs the
// rounding of (1-alpha) so that e.g. n=9, alpha=0.1 gives exactly 9.
std::size_t quantile_rank(std::size_t n, double alpha) {
  const double raw = static_cast<double>(n + 1) * (1.0 - alpha);
  const double k = std::ceil(raw - 1e-9);
  return k <= 1.0 ? 1 : static_cast<std::size_t>(k);
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError(std::string(what) + " must lie in [0,1], got " + std::to_string(v));
  }
}

StepCalibration fit_step(std::vector<double> scores, double alpha) {
  StepCalibration s;
  std::ranges::sort(scores);
  s.scores = std::move(scores);
  s.effective_alpha = alpha;
  if (s.scores.empty()) {
    s.quantile = 1.0;
    s.flagged = true;
  } else {
    s.quantile = quantile_from_sorted(s.scores, alpha);
    s.flagged = quantile_is_capped(s.scores.size(), alpha);
  }
  return s;
}

}  // namespace

double nonconformity(int gt_label, double pred_score) {
  if (gt_label != 0 && gt_label != 1) throw ValidationError("ground-truth label must be 0 or 1");
  check_unit(pred_score, "prediction score");
  return std::fabs(static_cast<double>(gt_label) - pred_score);
}

bool quantile_is_capped(std::size_t n, double alpha) { return quantile_rank(n, alpha) > n; }

double quantile_from_sorted(std::span<const double> sorted_scores, double alpha) {
  if (sorted_scores.empty()) throw UncalibratableError("cannot fit a quantile to an empty score list");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  const std::size_t k = quantile_rank(sorted_scores.size(), alpha);
  if (k > sorted_scores.size()) return 1.0;
  return sorted_scores[k - 1];
}

double fit_quantile(std::span<const double> scores, double alpha) {
  std::vector<double> sorted(scores.begin(), scores.end());
  std::ranges::sort(sorted);
  return quantile_from_sorted(sorted, alpha);
}

void CalibratorSettings::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  if (!(gamma >= 0.0)) throw ValidationError("gamma must be non-negative");
  if (!(alpha_min > 0.0 && alpha_max < 1.0 && alpha_min <= alpha && alpha <= alpha_max)) {
    throw ValidationError("need 0 < alpha_min <= alpha <= alpha_max < 1");
  }
}

CategoryCalibrator::CategoryCalibrator(CalibratorSettings settings, Horizon horizon)
    : settings_(settings), horizon_(horizon) {
  settings_.validate();
  StepCalibration blank;
  blank.effective_alpha = settings_.alpha;
  for (auto& v : per_category_) v.assign(horizon_.length(), blank);
  pooled_.assign(horizon_.length(), blank);
}

const StepCalibration& CategoryCalibrator::step(RiskCategory c, std::size_t t) const {
  return per_category_.at(index_of(c)).at(t);
}
const StepCalibration& CategoryCalibrator::pooled_step(std::size_t t) const { return pooled_.at(t); }
StepCalibration& CategoryCalibrator::step(RiskCategory c, std::size_t t) {
  return per_category_.at(index_of(c)).at(t);
}
StepCalibration& CategoryCalibrator::pooled_step(std::size_t t) { return pooled_.at(t); }

const StepCalibration& CategoryCalibrator::lookup(std::optional<RiskCategory> c, std::size_t t,
                                                  CalibrationMode mode) const {
  if (mode == CalibrationMode::Pooled || !c) return pooled_step(t);
  return step(*c, t);
}

StepCalibration& CategoryCalibrator::mutable_lookup(std::optional<RiskCategory> c, std::size_t t,
                                                    CalibrationMode mode) {
  if (mode == CalibrationMode::Pooled || !c) return pooled_step(t);
  return step(*c, t);
}

void CategoryCalibrator::apply_online_update(std::optional<RiskCategory> c, std::size_t t, int err,
                                             CalibrationMode mode) {
  if (err != 0 && err != 1) throw ValidationError("miscoverage indicator must be 0 or 1");
  if (settings_.gamma == 0.0) return;
  auto& s = mutable_lookup(c, t, mode);
  const double next = s.effective_alpha + settings_.gamma * (settings_.alpha - static_cast<double>(err));
  s.effective_alpha = std::clamp(next, settings_.alpha_min, settings_.alpha_max);
  if (s.scores.empty()) return;
  s.quantile = quantile_from_sorted(s.scores, s.effective_alpha);
  s.flagged = quantile_is_capped(s.scores.size(), s.effective_alpha);
}

std::vector<std::pair<RiskCategory, std::size_t>> CategoryCalibrator::empty_groups() const {
  std::vector<std::pair<RiskCategory, std::size_t>> out;
  for (auto c : kAllCategories) {
    for (std::size_t t = 0; t < horizon_.length(); ++t) {
      if (step(c, t).scores.empty()) out.emplace_back(c, t);
    }
  }
  return out;
}

CategoryCalibrator fit_category_calibrators(std::span<const NonconformityRecord> records,
                                            const CalibratorSettings& settings, const Horizon& horizon) {
  CategoryCalibrator cal(settings, horizon);
  const std::size_t h = horizon.length();
  std::array<std::vector<std::vector<double>>, 4> grouped;
  for (auto& g : grouped) g.resize(h);
  std::vector<std::vector<double>> pooled(h);
  for (const auto& r : records) {
    if (r.step >= h) throw ValidationError("nonconformity record step outside horizon");
    check_unit(r.score, "nonconformity score");
    if (r.category) grouped[index_of(*r.category)][r.step].push_back(r.score);
    pooled[r.step].push_back(r.score);
  }
  for (auto c : kAllCategories) {
    for (std::size_t t = 0; t < h; ++t) {
      cal.step(c, t) = fit_step(std::move(grouped[index_of(c)][t]), settings.alpha);
    }
  }
  for (std::size_t t = 0; t < h; ++t) cal.pooled_step(t) = fit_step(std::move(pooled[t]), settings.alpha);
  return cal;
}

Decision calibrate_step(double pred_score, double quantile) {
  if (quantile >= 0.5) return pred_score >= 0.5 ? Decision::Risk : Decision::NoRisk;
  if (pred_score >= 1.0 - quantile) return Decision::Risk;
  if (pred_score <= quantile) return Decision::NoRisk;
  return Decision::Ambiguous;
}

DecisionSeq calibrate_tube(const ScoreTube& raw, std::optional<RiskCategory> category,
                           const CategoryCalibrator& cal, CalibrationMode mode) {
  if (raw.scores.size() != cal.horizon().length()) {
    throw ValidationError("score tube length does not match calibrator horizon");
  }
  std::vector<Decision> d(raw.scores.size());
  for (std::size_t t = 0; t < d.size(); ++t) {
    d[t] = calibrate_step(raw.scores[t], cal.quantile(category, t, mode));
  }
  return DecisionSeq(std::move(d), DecisionOrigin::Calibrated);
}

CategoryCalibrator online_update(const CategoryCalibrator& cal, std::optional<RiskCategory> category,
                                 std::size_t step, int err) {
  CategoryCalibrator next = cal;
  next.apply_online_update(category, step, err);
  return next;
}

DecisionSeq hard_decision(const ScoreTube& raw, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("threshold must lie in (0,1)");
  std::vector<Decision> d(raw.scores.size());
  for (std::size_t t = 0; t < d.size(); ++t) {
    d[t] = raw.scores[t] >= threshold ? Decision::Risk : Decision::NoRisk;
  }
  return DecisionSeq(std::move(d), DecisionOrigin::HardThreshold);
}

DecisionSeq rule_based(const ScoreTube& raw) {
  return DecisionSeq(std::vector<Decision>(raw.scores.size(), Decision::Risk), DecisionOrigin::RuleBased);
}

TrackFeatures track_features(const ScoreTube& track) {
  const auto& s = track.scores;
  if (s.empty()) throw ValidationError("cannot summarise an empty score track");
  const double n = static_cast<double>(s.size());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  var /= n;
  std::vector<int> bits(s.size());
  for (std::size_t t = 0; t < s.size(); ++t) bits[t] = s[t] >= 0.5 ? 1 : 0;
  const auto argmax = static_cast<double>(std::distance(s.begin(), std::ranges::max_element(s)));
  return {mean, var, static_cast<double>(switch_count(bits)), argmax};
}

CategoryClassifier CategoryClassifier::oracle() { return CategoryClassifier{}; }

CategoryClassifier CategoryClassifier::stub(std::array<TrackFeatures, 4> centroids) {
  CategoryClassifier c;
  c.mode_ = Mode::Stub;
  c.centroids_ = centroids;
  return c;
}

CategoryClassifier CategoryClassifier::fit_stub(std::span<const ScoreTube> labelled_tracks) {
  std::array<TrackFeatures, 4> sums{};
  std::array<std::size_t, 4> counts{};
  for (const auto& tr : labelled_tracks) {
    if (!tr.category_hint) continue;
    const auto f = track_features(tr);
    const auto i = index_of(*tr.category_hint);
    for (std::size_t k = 0; k < f.size(); ++k) sums[i][k] += f[k];
    ++counts[i];
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (auto& v : sums[i]) {
      v = counts[i] == 0 ? std::numeric_limits<double>::infinity() : v / static_cast<double>(counts[i]);
    }
  }
  return stub(sums);
}

RiskCategory CategoryClassifier::classify(const ScoreTube& track) const {
  if (mode_ == Mode::Oracle) {
    if (!track.category_hint) throw ValidationError("oracle classification requires a category hint");
    return *track.category_hint;
  }
  const auto f = track_features(track);
  RiskCategory best = RiskCategory::Interaction;
  double best_d = std::numeric_limits<double>::infinity();
  for (auto c : kAllCategories) {
    double d = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double diff = f[k] - centroids_[index_of(c)][k];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace risktube
