#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace risktube {

// Number of future timesteps covered by a tube. Step indices are relative to
// the current frame: 0 is "now", length-1 is the furthest prediction.
class Horizon {
 public:
  static constexpr std::size_t kDefaultLength = 8;

  Horizon() = default;
  explicit Horizon(std::size_t length);

  std::size_t length() const noexcept { return length_; }
  bool operator==(const Horizon&) const = default;

 private:
  std::size_t length_ = kDefaultLength;
};

enum class RiskCategory { Interaction = 0, Collision = 1, Occlusion = 2, Obstacle = 3 };

inline constexpr std::array<RiskCategory, 4> kAllCategories = {
    RiskCategory::Interaction, RiskCategory::Collision, RiskCategory::Occlusion,
    RiskCategory::Obstacle};

constexpr std::size_t index_of(RiskCategory c) noexcept { return static_cast<std::size_t>(c); }
std::string_view to_string(RiskCategory c) noexcept;
// Throws ValidationError for unknown names.
RiskCategory category_from_string(std::string_view name);

enum class Decision { NoRisk = 0, Risk = 1, Ambiguous = 2 };

enum class DecisionOrigin { GroundTruth, Calibrated, HardThreshold, RuleBased };

// How Ambiguous steps are counted when a tube is reduced to a set of risky steps.
enum class AmbiguityPolicy { Include, Exclude };

std::string_view to_string(AmbiguityPolicy p) noexcept;
AmbiguityPolicy ambiguity_policy_from_string(std::string_view name);

// Per-step decisions over one horizon. GroundTruth sequences never contain
// Ambiguous; the constructor enforces it.
class DecisionSeq {
 public:
  DecisionSeq(std::vector<Decision> decisions, DecisionOrigin origin);

  // Ground-truth sequence from a set of risky step indices.
  static DecisionSeq ground_truth(const Horizon& horizon, std::span<const std::size_t> risky_steps);
  static DecisionSeq from_bits(std::span<const int> bits, DecisionOrigin origin);

  std::size_t size() const noexcept { return decisions_.size(); }
  Decision operator[](std::size_t t) const { return decisions_[t]; }
  const std::vector<Decision>& decisions() const noexcept { return decisions_; }
  DecisionOrigin origin() const noexcept { return origin_; }

  bool is_risky(std::size_t t, AmbiguityPolicy policy = AmbiguityPolicy::Include) const;
  // 0/1 view with Ambiguous resolved by the policy.
  std::vector<int> resolved(AmbiguityPolicy policy = AmbiguityPolicy::Include) const;
  std::vector<std::size_t> risky_steps(AmbiguityPolicy policy = AmbiguityPolicy::Include) const;
  bool any_risky(AmbiguityPolicy policy = AmbiguityPolicy::Include) const;

 private:
  std::vector<Decision> decisions_;
  DecisionOrigin origin_;
};

// Inclusive on both ends.
struct RiskInterval {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start + 1; }
  bool operator==(const RiskInterval&) const = default;
};

std::vector<RiskInterval> intervals_from_decisions(const DecisionSeq& seq, AmbiguityPolicy policy);

// |pred ∩ gt| / |pred ∪ gt| over step-index sets; 1 when both are empty.
double interval_iou(std::span<const std::size_t> pred, std::span<const std::size_t> gt);

// Number of adjacent unequal pairs in a resolved 0/1 sequence.
std::size_t switch_count(std::span<const int> seq);

struct TubeEntry {
  DecisionSeq decisions;
  std::vector<RiskInterval> intervals;
  std::optional<RiskCategory> category;
};

// Object id -> per-object decisions over one horizon window.
class RiskTube {
 public:
  RiskTube() = default;
  RiskTube(Horizon horizon, AmbiguityPolicy policy) : horizon_(horizon), policy_(policy) {}

  void insert(std::string object_id, DecisionSeq seq, std::optional<RiskCategory> category);

  const Horizon& horizon() const noexcept { return horizon_; }
  AmbiguityPolicy policy() const noexcept { return policy_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const TubeEntry* find(const std::string& object_id) const;
  const std::map<std::string, TubeEntry>& entries() const noexcept { return entries_; }

 private:
  Horizon horizon_;
  AmbiguityPolicy policy_ = AmbiguityPolicy::Include;
  std::map<std::string, TubeEntry> entries_;
};

}  // namespace risktube
