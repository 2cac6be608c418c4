#include "risktube/gate.hpp"

#include <ostream>

#include "risktube/error.hpp"

namespace risktube {

void GateConfig::validate() const {
  if (!(distance_threshold > 0.0)) throw ValidationError("distance_threshold must be positive");
}

BrakeSequence brake_sequence(const Scenario& scenario, std::span<const RiskTube> tubes, const GateConfig& cfg) {
  cfg.validate();
  const std::size_t L = scenario.clip_length();
  if (tubes.empty()) throw ValidationError("scenario '" + scenario.id + "': no tubes supplied");
  const std::size_t H = tubes.front().horizon().length();
  if (L < H || tubes.size() != L - H + 1) {
    throw ValidationError("scenario '" + scenario.id + "': tubes must cover every window of the clip");
  }
  BrakeSequence out(tubes.size(), 0);
  for (std::size_t T = 0; T < tubes.size(); ++T) {
    for (const auto& obj : scenario.objects) {
      if (!(obj.frames.at(T).distance_m < cfg.distance_threshold)) continue;
      const auto* e = tubes[T].find(obj.id);
      if (e == nullptr) continue;
      const bool flagged = cfg.anticipatory ? e->decisions.any_risky(cfg.policy) : e->decisions.is_risky(0, cfg.policy);
      if (flagged) {
        out[T] = 1;
        break;
      }
    }
  }
  return out;
}

BrakeSequence proximity_mask(const Scenario& scenario, const Horizon& horizon, const GateConfig& cfg) {
  cfg.validate();
  const std::size_t L = scenario.clip_length();
  const std::size_t H = horizon.length();
  if (L < H) throw ValidationError("scenario '" + scenario.id + "' is shorter than the horizon");
  BrakeSequence out(L - H + 1, 0);
  for (std::size_t T = 0; T < out.size(); ++T) {
    for (const auto& obj : scenario.objects) {
      if (obj.frames.at(T).distance_m < cfg.distance_threshold) out[T] = 1;
    }
  }
  return out;
}

std::size_t misaligned_brake_count(std::span<const int> pred, std::span<const int> gt) {
  if (pred.size() != gt.size()) throw ValidationError("brake sequences differ in length");
  std::size_t n = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) n += (pred[t] != 0) != (gt[t] != 0) ? 1 : 0;
  return n;
}

double average_brake_count(std::span<const BrakeSequence> seqs) {
  if (seqs.empty()) throw ValidationError("average brake count needs at least one clip");
  double total = 0.0;
  for (const auto& s : seqs) {
    for (int b : s) total += b != 0 ? 1.0 : 0.0;
  }
  return total / static_cast<double>(seqs.size());
}

void write_brake_trace(std::ostream& os, std::span<const int> pred, std::span<const int> gt,
                       std::span<const int> proximity) {
  if (pred.size() != gt.size() || pred.size() != proximity.size()) {
    throw ValidationError("brake trace columns differ in length");
  }
  os << "frame,pred,gt,any_object_within_threshold\n";
  for (std::size_t t = 0; t < pred.size(); ++t) {
    os << t << ',' << pred[t] << ',' << gt[t] << ',' << proximity[t] << '\n';
  }
}

}  // namespace risktube
