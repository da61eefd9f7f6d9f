// Copyright 2026 The MILD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/** \file dataset_io.hpp
 *  \brief Descriptor files, ground-truth pair lists and synthetic datasets.
 *
 *  Descriptor file (all integers little-endian u32):
 *
 *      "MILD" version=1 descriptor_bytes=32 n_images
 *      repeated n_images times: n_features, then n_features * 32 bytes
 *
 *  Descriptor bytes follow the bit order in descriptor.hpp. See
 *  docs/FORMATS.md for the ground-truth text format.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mild/analysis.hpp"
#include "mild/descriptor.hpp"

namespace mild {

inline constexpr char kDatasetMagic[4] = {'M', 'I', 'L', 'D'};
inline constexpr std::uint32_t kDatasetVersion = 1;

struct DescriptorDataset {
  std::string name;
  /// images[k] is F_k; the position defines the image id.
  std::vector<std::vector<BinaryDescriptor>> images;

  std::size_t total_features() const;
  friend bool operator==(const DescriptorDataset&, const DescriptorDataset&) = default;
};

void write_dataset(const DescriptorDataset& ds, std::ostream& out);
/// Throws IoError if the file cannot be written.
void write_dataset(const DescriptorDataset& ds, const std::filesystem::path& path);
/// Throws ParseError (kind and byte offset set) on malformed input.
DescriptorDataset read_dataset(std::istream& in, std::string name = {});
/// Throws IoError if the file cannot be opened. The name is the file stem.
DescriptorDataset read_dataset(const std::filesystem::path& path);

/// Loop-closure pairs, stored as (query_id, candidate_id) with candidate < query.
struct GroundTruth {
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;

  bool contains(std::uint32_t query, std::uint32_t candidate) const {
    return pairs.count({query, candidate}) != 0;
  }
  /// Inserts the pair in normalized order. Throws InvalidInput on a self-pair.
  void add(std::uint32_t a, std::uint32_t b);
  std::size_t size() const { return pairs.size(); }
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// One pair per line, two whitespace-separated image ids; `#` starts a
/// comment. Pairs are normalized and deduplicated. When n_images is given,
/// ids >= n_images are rejected. Errors carry the 1-based line number.
GroundTruth parse_ground_truth(std::istream& in,
                               std::optional<std::size_t> n_images = std::nullopt);
GroundTruth load_ground_truth(const std::filesystem::path& path,
                              std::optional<std::size_t> n_images = std::nullopt);
void write_ground_truth(const GroundTruth& gt, std::ostream& out);
void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);

/// Converts a dense N x N text matrix (rows on lines, entries separated by
/// whitespace or commas) into pairs: every nonzero off-diagonal entry (i, j)
/// becomes the pair (max, min). Throws ParseError on ragged rows or bad tokens.
GroundTruth matrix_to_pairs(std::istream& in);

struct LoopPair {
  std::uint32_t query = 0;
  std::uint32_t candidate = 0;
  /// Overrides SyntheticSpec::inlier_fraction when set.
  std::optional<double> inlier_fraction;
};

struct SyntheticSpec {
  std::size_t n_images = 100;
  std::size_t features_per_image = 200;
  std::vector<LoopPair> loop_pairs;
  double inlier_fraction = 0.5;
  /// Flip count distribution for copied features. stddev 0 means "always mean".
  DistanceModel inlier_model = kInlierDistanceModel;
  /// Reference outlier model. Non-copied features are uniform random bits.
  DistanceModel outlier_model = kOutlierDistanceModel;
  /// Flip counts are truncated to [0, max_flips] by rejection.
  int max_flips = 60;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Deterministic for a given spec. For every loop pair (q, c), a random
/// subset of round(inlier_fraction * |F|) of q's features are replaced by
/// copies of c's features (same positions) with k distinct bits flipped.
std::pair<DescriptorDataset, GroundTruth> generate_synthetic(const SyntheticSpec& spec);

/// The standard loop benchmark: 100 images x 200 features, frames 60..70
/// revisit frames 10..20 with half of their features copied.
SyntheticSpec loop_benchmark_spec(std::uint64_t seed = 1);

BinaryDescriptor random_descriptor(std::mt19937_64& rng);

/// Flips `count` distinct uniformly chosen bits.
BinaryDescriptor flip_random_bits(const BinaryDescriptor& d, int count, std::mt19937_64& rng);

/// Flips `count` bits chosen by the balls-in-bins model: each error picks a
/// substring uniformly, then distinct bits are flipped inside each substring.
/// Placements that overfill a substring are redrawn. Throws InvalidInput when
/// count exceeds the descriptor length.
BinaryDescriptor flip_bits_binned(const BinaryDescriptor& d, int count,
                                  const SubstringConfig& cfg, std::mt19937_64& rng);

/// Draws a flip count from `model`, rounded and truncated to [0, max_flips].
int sample_flip_count(const DistanceModel& model, int max_flips, std::mt19937_64& rng);

}  // namespace mild
