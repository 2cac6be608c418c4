#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "risktube/core.hpp"

namespace risktube {

struct FeatureTrack {
  std::string object_id;
  RiskCategory category = RiskCategory::Interaction;
  std::map<long, std::vector<double>> features;  // time -> latent vector
};

struct Triplet {
  long t = 0;
  std::size_t i = 0;  // indices into the track list
  std::size_t k = 0;
};

struct AlignmentOptions {
  // Added to every norm when positive. Zero vectors are rejected otherwise.
  double epsilon = 0.0;
};

inline constexpr double kGradientEpsilon = 1e-8;

double spatial_similarity(std::span<const double> a, std::span<const double> b, const AlignmentOptions& opt = {});

// cos(F_i(t), F_i(t+1)) - cos(F_k(t), F_k(t+1)).
double temporal_delta(std::span<const double> fi_t, std::span<const double> fi_t1, std::span<const double> fk_t,
                      std::span<const double> fk_t1, const AlignmentOptions& opt = {});

// Every ordered (t, i, k) with i != k, equal categories, and features of both
// objects at t and t+1. Sorted by t, then i, then k.
std::vector<Triplet> valid_triplets(std::span<const FeatureTrack> tracks);

// Mean of (cos_spat - delta_temp)^2 over valid_triplets. Throws
// NoValidTripletsError when there is none.
double alignment_loss(std::span<const FeatureTrack> tracks, const AlignmentOptions& opt = {});

// Sum with a fixed pairwise reduction tree so the result does not depend on
// how the terms were produced.
double pairwise_sum(std::span<const double> terms);

// JSON Lines records {object, category, t, vector}; tracks are returned in
// order of first appearance.
std::vector<FeatureTrack> read_feature_tracks(std::istream& is);
std::vector<FeatureTrack> read_feature_tracks(const std::filesystem::path& path);

}  // namespace risktube
