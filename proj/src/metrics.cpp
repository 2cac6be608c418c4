#include "risktube/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "risktube/error.hpp"

namespace risktube {

namespace {

void check_lengths(const DecisionSeq& pred, const DecisionSeq& gt) {
  if (pred.size() != gt.size()) throw ValidationError("prediction and GT horizons differ");
  if (gt.size() < 2) throw ValidationError("horizon must have at least two steps");
}

bool covers(const DecisionSeq& pred, const DecisionSeq& gt, AmbiguityPolicy policy) {
  for (std::size_t t = 0; t < gt.size(); ++t) {
    if (gt.is_risky(t) && !pred.is_risky(t, policy)) return false;
  }
  return true;
}

double weighted_match(const std::vector<int>& p, const std::vector<int>& g, double theta, double tau) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < g.size(); ++t) {
    const double w = std::exp(-std::fabs(static_cast<double>(t) - theta) / tau);
    den += w;
    if (p[t] != g[t]) num += w;
  }
  return 1.0 - num / den;
}

DecisionSeq all_clear(std::size_t n) {
  return DecisionSeq(std::vector<Decision>(n, Decision::NoRisk), DecisionOrigin::Calibrated);
}

}  // namespace

double coverage(const RiskTube& pred_tube, const RiskTube& gt_tube) {
  if (gt_tube.empty()) throw ValidationError("coverage is undefined without GT risk objects");
  std::size_t covered = 0;
  for (const auto& [id, gt] : gt_tube.entries()) {
    if (!gt.decisions.any_risky()) throw ValidationError("GT tube entry '" + id + "' has no risky step");
    const auto* p = pred_tube.find(id);
    if (p != nullptr && covers(p->decisions, gt.decisions, pred_tube.policy())) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(gt_tube.size());
}

double tube_volume(const RiskTube& pred_tube) {
  if (pred_tube.empty()) throw ValidationError("tube volume is undefined for an empty tube");
  double total = 0.0;
  for (const auto& [id, e] : pred_tube.entries()) {
    total += static_cast<double>(e.decisions.risky_steps(pred_tube.policy()).size());
  }
  return total / static_cast<double>(pred_tube.size());
}

double temporal_consistency(const DecisionSeq& pred, const DecisionSeq& gt, AmbiguityPolicy policy) {
  check_lengths(pred, gt);
  const auto sp = static_cast<double>(switch_count(pred.resolved(policy)));
  const auto sg = static_cast<double>(switch_count(gt.resolved(policy)));
  return 1.0 - std::fabs(sp - sg) / static_cast<double>(gt.size() - 1);
}

double boundary_alignment(const DecisionSeq& pred, const DecisionSeq& gt, const BoundaryConfig& cfg,
                          AmbiguityPolicy policy) {
  check_lengths(pred, gt);
  if (!(cfg.tau > 0.0)) throw ValidationError("tau must be positive");
  const auto steps = gt.risky_steps();
  if (steps.empty()) throw ValidationError("boundary alignment needs at least one risky GT step");
  const auto p = pred.resolved(policy);
  const auto g = gt.resolved(policy);
  const double start = weighted_match(p, g, static_cast<double>(steps.front()), cfg.tau);
  const double end = weighted_match(p, g, static_cast<double>(steps.back()), cfg.tau);
  return 0.5 * (start + end);
}

double risk_iou(const DecisionSeq& pred, const DecisionSeq& gt, const BoundaryConfig& cfg,
                AmbiguityPolicy policy) {
  const double ba = boundary_alignment(pred, gt, cfg, policy);
  const double tc = temporal_consistency(pred, gt, policy);
  const auto ps = pred.risky_steps(policy);
  const auto gs = gt.risky_steps();
  return interval_iou(ps, gs) * 0.5 * (tc + ba);
}

void MetricAccumulator::add(const RiskTube& pred_tube, const RiskTube& gt_tube) {
  const auto policy = cfg_.policy;
  for (const auto& [id, e] : pred_tube.entries()) {
    const double v = static_cast<double>(e.decisions.risky_steps(policy).size());
    overall_.volume += v;
    ++overall_.n_pred;
    if (e.category) {
      auto& s = per_category_[index_of(*e.category)];
      s.volume += v;
      ++s.n_pred;
    }
  }
  for (const auto& [id, gt] : gt_tube.entries()) {
    if (!gt.decisions.any_risky()) continue;
    const auto* p = pred_tube.find(id);
    const DecisionSeq pred = p != nullptr ? p->decisions : all_clear(gt.decisions.size());
    const double cov = covers(pred, gt.decisions, policy) ? 1.0 : 0.0;
    const double tc = temporal_consistency(pred, gt.decisions, policy);
    const double ba = boundary_alignment(pred, gt.decisions, cfg_.boundary, policy);
    const auto ps = pred.risky_steps(policy);
    const auto gs = gt.decisions.risky_steps();
    const double iou = interval_iou(ps, gs) * 0.5 * (tc + ba);
    auto bump = [&](Sums& s) {
      s.covered += cov;
      s.tc += tc;
      s.ba += ba;
      s.iou += iou;
      ++s.n_gt;
    };
    bump(overall_);
    if (gt.category) bump(per_category_[index_of(*gt.category)]);
  }
}

MetricValues MetricAccumulator::finish(const Sums& s) {
  MetricValues v;
  v.n_objects = s.n_gt;
  v.n_predicted = s.n_pred;
  if (s.n_gt > 0) {
    const auto n = static_cast<double>(s.n_gt);
    v.coverage = s.covered / n;
    v.tc = s.tc / n;
    v.ba = s.ba / n;
    v.risk_iou = s.iou / n;
  }
  if (s.n_pred > 0) v.tube_volume = s.volume / static_cast<double>(s.n_pred);
  return v;
}

MetricReport MetricAccumulator::report() const {
  if (overall_.n_gt == 0) throw ValidationError("no GT risk objects to evaluate");
  MetricReport r;
  r.overall = finish(overall_);
  for (std::size_t i = 0; i < 4; ++i) r.per_category[i] = finish(per_category_[i]);
  return r;
}

MetricReport evaluate(std::span<const RiskTube> pred_tubes, std::span<const RiskTube> gt_tubes,
                      const MetricConfig& cfg) {
  if (pred_tubes.size() != gt_tubes.size()) {
    throw ValidationError("prediction and GT tube lists must be aligned");
  }
  MetricAccumulator acc(cfg);
  for (std::size_t i = 0; i < pred_tubes.size(); ++i) acc.add(pred_tubes[i], gt_tubes[i]);
  return acc.report();
}

namespace {

nlohmann::json values_json(const MetricValues& v) {
  return {{"coverage", v.coverage}, {"tube_volume", v.tube_volume}, {"tc", v.tc},
          {"ba", v.ba},             {"risk_iou", v.risk_iou},       {"n_objects", v.n_objects},
          {"n_predicted", v.n_predicted}};
}

void csv_values(std::ostringstream& os, const MetricValues& v) {
  os << ',' << v.n_objects << ',' << v.n_predicted << ',' << v.coverage << ',' << v.tube_volume << ','
     << v.tc << ',' << v.ba << ',' << v.risk_iou;
}

}  // namespace

nlohmann::json MetricReport::to_json() const {
  nlohmann::json cats = nlohmann::json::object();
  for (auto c : kAllCategories) cats[std::string(to_string(c))] = values_json(per_category[index_of(c)]);
  auto j = values_json(overall);
  j["per_category"] = std::move(cats);
  return j;
}

std::string MetricReport::csv_header() {
  std::ostringstream os;
  const char* fields[] = {"n_objects", "n_predicted", "coverage", "tube_volume", "tc", "ba", "risk_iou"};
  os << "method,scenario_set";
  for (const char* f : fields) os << ',' << f;
  for (auto c : kAllCategories) {
    for (const char* f : fields) os << ',' << to_string(c) << '_' << f;
  }
  return os.str();
}

std::string MetricReport::csv_row(const std::string& method, const std::string& scenario_set) const {
  std::ostringstream os;
  os.precision(17);
  os << method << ',' << scenario_set;
  csv_values(os, overall);
  for (const auto& v : per_category) csv_values(os, v);
  return os.str();
}

}  // namespace risktube
