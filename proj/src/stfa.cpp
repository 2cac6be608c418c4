#include "risktube/stfa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <unordered_map>

#include <json.hpp>

#include "risktube/error.hpp"

namespace risktube {

double spatial_similarity(std::span<const double> a, std::span<const double> b, const AlignmentOptions& opt) {
  if (a.size() != b.size()) throw ValidationError("feature vectors differ in dimension");
  if (a.empty()) throw ValidationError("feature vectors must not be empty");
  double dot = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    dot += a[d] * b[d];
    saa += a[d] * a[d];
    sbb += b[d] * b[d];
  }
  double c = 0.0;
  if (opt.epsilon > 0.0) {
    c = dot / ((std::sqrt(saa) + opt.epsilon) * (std::sqrt(sbb) + opt.epsilon));
  } else {
    if (saa == 0.0 || sbb == 0.0) throw ValidationError("zero feature vector in cosine similarity");
    // sqrt(saa * sbb) is exactly saa when a == b, so identical vectors give 1.
    c = dot / std::sqrt(saa * sbb);
  }
  return std::clamp(c, -1.0, 1.0);
}

double temporal_delta(std::span<const double> fi_t, std::span<const double> fi_t1, std::span<const double> fk_t,
                      std::span<const double> fk_t1, const AlignmentOptions& opt) {
  return spatial_similarity(fi_t, fi_t1, opt) - spatial_similarity(fk_t, fk_t1, opt);
}

std::vector<Triplet> valid_triplets(std::span<const FeatureTrack> tracks) {
  std::map<long, std::vector<std::size_t>> present;  // t -> tracks with features at t and t+1
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (const auto& [t, v] : tracks[i].features) {
      if (tracks[i].features.count(t + 1) != 0) present[t].push_back(i);
    }
  }
  std::vector<Triplet> out;
  for (const auto& [t, idx] : present) {
    for (std::size_t i : idx) {
      for (std::size_t k : idx) {
        if (i != k && tracks[i].category == tracks[k].category) out.push_back({t, i, k});
      }
    }
  }
  return out;
}

double pairwise_sum(std::span<const double> terms) {
  if (terms.size() <= 8) {
    double s = 0.0;
    for (double x : terms) s += x;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

double alignment_loss(std::span<const FeatureTrack> tracks, const AlignmentOptions& opt) {
  std::size_t dim = 0;
  for (const auto& tr : tracks) {
    for (const auto& [t, v] : tr.features) {
      if (dim == 0) dim = v.size();
      if (v.size() != dim || v.empty()) throw ValidationError("feature vectors must share one non-zero dimension");
    }
  }
  const auto triplets = valid_triplets(tracks);
  if (triplets.empty()) throw NoValidTripletsError("no same-category pair has features at consecutive times");
  std::vector<double> terms;
  terms.reserve(triplets.size());
  for (const auto& [t, i, k] : triplets) {
    const auto& fi = tracks[i].features;
    const auto& fk = tracks[k].features;
    const double spat = spatial_similarity(fi.at(t), fk.at(t), opt);
    const double delta = temporal_delta(fi.at(t), fi.at(t + 1), fk.at(t), fk.at(t + 1), opt);
    const double r = spat - delta;
    terms.push_back(r * r);
  }
  return pairwise_sum(terms) / static_cast<double>(terms.size());
}

std::vector<FeatureTrack> read_feature_tracks(std::istream& is) {
  std::vector<FeatureTrack> tracks;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      const auto id = j.at("object").get<std::string>();
      const auto cat = category_from_string(j.at("category").get<std::string>());
      const auto t = j.at("t").get<long>();
      auto vec = j.at("vector").get<std::vector<double>>();
      auto [it, inserted] = index.try_emplace(id, tracks.size());
      if (inserted) tracks.push_back(FeatureTrack{id, cat, {}});
      auto& tr = tracks[it->second];
      if (tr.category != cat) throw ValidationError(where + "object '" + id + "' changes category");
      if (!tr.features.emplace(t, std::move(vec)).second) {
        throw ValidationError(where + "duplicate time for object '" + id + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + e.what());
    }
  }
  return tracks;
}

std::vector<FeatureTrack> read_feature_tracks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_feature_tracks(in);
}

}  // namespace risktube
