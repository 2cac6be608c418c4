#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "risktube/core.hpp"
#include "risktube/scenario.hpp"

namespace risktube {

// One 0/1 brake decision per windowed frame of a clip.
using BrakeSequence = std::vector<int>;

struct GateConfig {
  double distance_threshold = 10.0;  // meters
  AmbiguityPolicy policy = AmbiguityPolicy::Include;
  // Brake on a risky flag at any horizon step instead of step 0 only.
  bool anticipatory = false;

  void validate() const;
};

// tubes[T] is the tube of the window starting at frame T. Frame T brakes when
// an object is flagged risky at step 0 of that window and is closer than the
// threshold at frame T. Throws ValidationError when the window count differs
// from the scenario's.
BrakeSequence brake_sequence(const Scenario& scenario, std::span<const RiskTube> tubes, const GateConfig& cfg = {});

// Frames where any object is within the threshold.
BrakeSequence proximity_mask(const Scenario& scenario, const Horizon& horizon, const GateConfig& cfg = {});

// Hamming distance.
std::size_t misaligned_brake_count(std::span<const int> pred, std::span<const int> gt);

double average_brake_count(std::span<const BrakeSequence> seqs);

// CSV with columns frame,pred,gt,any_object_within_threshold.
void write_brake_trace(std::ostream& os, std::span<const int> pred, std::span<const int> gt,
                       std::span<const int> proximity);

}  // namespace risktube
