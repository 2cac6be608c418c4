#include "risktube/core.hpp"

#include <algorithm>
#include <iterator>

#include "risktube/error.hpp"

namespace risktube {

Horizon::Horizon(std::size_t length) : length_(length) {
  if (length < 2) {
    throw ValidationError("horizon length must be at least 2, got " + std::to_string(length));
  }
}

std::string_view to_string(RiskCategory c) noexcept {
  switch (c) {
    case RiskCategory::Interaction: return "Interaction";
    case RiskCategory::Collision: return "Collision";
    case RiskCategory::Occlusion: return "Occlusion";
    case RiskCategory::Obstacle: return "Obstacle";
  }
  return "Unknown";
}

RiskCategory category_from_string(std::string_view name) {
  for (auto c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  throw ValidationError("unknown risk category '" + std::string(name) + "'");
}

std::string_view to_string(AmbiguityPolicy p) noexcept {
  return p == AmbiguityPolicy::Include ? "include" : "exclude";
}

AmbiguityPolicy ambiguity_policy_from_string(std::string_view name) {
  if (name == "include") return AmbiguityPolicy::Include;
  if (name == "exclude") return AmbiguityPolicy::Exclude;
  throw ValidationError("ambiguity policy must be include or exclude, got '" + std::string(name) + "'");
}

DecisionSeq::DecisionSeq(std::vector<Decision> decisions, DecisionOrigin origin)
    : decisions_(std::move(decisions)), origin_(origin) {
  if (origin_ == DecisionOrigin::GroundTruth &&
      std::ranges::find(decisions_, Decision::Ambiguous) != decisions_.end()) {
    throw ValidationError("ground-truth decisions cannot be Ambiguous");
  }
}

DecisionSeq DecisionSeq::ground_truth(const Horizon& horizon, std::span<const std::size_t> risky_steps) {
  std::vector<Decision> d(horizon.length(), Decision::NoRisk);
  for (auto t : risky_steps) {
    if (t >= d.size()) throw ValidationError("risky step outside horizon");
    d[t] = Decision::Risk;
  }
  return DecisionSeq(std::move(d), DecisionOrigin::GroundTruth);
}

DecisionSeq DecisionSeq::from_bits(std::span<const int> bits, DecisionOrigin origin) {
  std::vector<Decision> d;
  d.reserve(bits.size());
  for (int b : bits) d.push_back(b != 0 ? Decision::Risk : Decision::NoRisk);
  return DecisionSeq(std::move(d), origin);
}

bool DecisionSeq::is_risky(std::size_t t, AmbiguityPolicy policy) const {
  switch (decisions_[t]) {
    case Decision::Risk: return true;
    case Decision::NoRisk: return false;
    case Decision::Ambiguous: return policy == AmbiguityPolicy::Include;
  }
  return false;
}

std::vector<int> DecisionSeq::resolved(AmbiguityPolicy policy) const {
  std::vector<int> out(decisions_.size());
  for (std::size_t t = 0; t < decisions_.size(); ++t) out[t] = is_risky(t, policy) ? 1 : 0;
  return out;
}

std::vector<std::size_t> DecisionSeq::risky_steps(AmbiguityPolicy policy) const {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < decisions_.size(); ++t) {
    if (is_risky(t, policy)) out.push_back(t);
  }
  return out;
}

bool DecisionSeq::any_risky(AmbiguityPolicy policy) const {
  for (std::size_t t = 0; t < decisions_.size(); ++t) {
    if (is_risky(t, policy)) return true;
  }
  return false;
}

std::vector<RiskInterval> intervals_from_decisions(const DecisionSeq& seq, AmbiguityPolicy policy) {
  std::vector<RiskInterval> out;
  std::size_t t = 0;
  const std::size_t n = seq.size();
  while (t < n) {
    if (!seq.is_risky(t, policy)) {
      ++t;
      continue;
    }
    const std::size_t start = t;
    while (t + 1 < n && seq.is_risky(t + 1, policy)) ++t;
    out.push_back({start, t});
    ++t;
  }
  return out;
}

double interval_iou(std::span<const std::size_t> pred, std::span<const std::size_t> gt) {
  std::vector<std::size_t> a(pred.begin(), pred.end());
  std::vector<std::size_t> b(gt.begin(), gt.end());
  std::ranges::sort(a);
  std::ranges::sort(b);
  a.erase(std::unique(a.begin(), a.end()), a.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  std::vector<std::size_t> inter;
  std::vector<std::size_t> uni;
  std::ranges::set_intersection(a, b, std::back_inserter(inter));
  std::ranges::set_union(a, b, std::back_inserter(uni));
  if (uni.empty()) return 1.0;
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

std::size_t switch_count(std::span<const int> seq) {
  std::size_t n = 0;
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    if (seq[t] != seq[t + 1]) ++n;
  }
  return n;
}

void RiskTube::insert(std::string object_id, DecisionSeq seq, std::optional<RiskCategory> category) {
  if (seq.size() != horizon_.length()) {
    throw ValidationError("decision sequence length " + std::to_string(seq.size()) +
                          " does not match horizon " + std::to_string(horizon_.length()));
  }
  auto intervals = intervals_from_decisions(seq, policy_);
  entries_.insert_or_assign(std::move(object_id),
                            TubeEntry{std::move(seq), std::move(intervals), category});
}

const TubeEntry* RiskTube::find(const std::string& object_id) const {
  auto it = entries_.find(object_id);
  return it == entries_.end() ? nullptr : &it->second;
}

}  // namespace risktube
