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

/** \file similarity.hpp
 *  \brief Feature and image similarity: exact double loop and the
 *         multi-index-hashing approximation.
 *
 *  Image similarity is the mean feature similarity over all cross pairs,
 *  where a pair at Hamming distance d scores exp(-d^2 / sigma^2) when
 *  d <= d0 and 0 otherwise. The approximation only sums pairs that share a
 *  substring bucket, so it never exceeds the exact value.
 */

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mild/descriptor.hpp"
#include "mild/mih_index.hpp"

namespace mild {

struct SimilarityParams {
  int d0 = 60;
  /// Width of the Gaussian weight, in bits. A tunable, not a published constant.
  double sigma = 16.0;

  /// Throws InvalidInput unless 0 <= d0 <= 256 and sigma > 0.
  void validate() const;
};

/// Similarity scores indexed by candidate image id.
using ScoreVector = std::vector<double>;

/// Throws InvalidInput for d outside [0, 256].
double feature_similarity(int d, const SimilarityParams& p);

/// feature_similarity tabulated for every distance 0..256.
class SimilarityKernel {
 public:
  explicit SimilarityKernel(const SimilarityParams& p);
  double operator()(int d) const { return weights_[static_cast<std::size_t>(d)]; }
  const SimilarityParams& params() const { return params_; }

 private:
  SimilarityParams params_;
  std::array<double, kDescriptorBits + 1> weights_{};
};

/// Full double loop over both feature sets. Throws InvalidInput if either is empty.
double exact_image_similarity(std::span<const BinaryDescriptor> fp,
                              std::span<const BinaryDescriptor> fq,
                              const SimilarityParams& p);

struct ApproxOptions {
  /// Only images with id < candidate_limit are scored; the result has
  /// min(candidate_limit, image_count) entries.
  std::size_t candidate_limit = std::numeric_limits<std::size_t>::max();
  /// Worker threads over query features. 1 runs inline.
  unsigned workers = 1;
};

struct QueryStats {
  /// Full-length Hamming distances evaluated (one per retrieved eligible candidate).
  std::uint64_t distance_computations = 0;
};

/// One pass over `query`: retrieve each feature's candidates from `tables`,
/// accumulate their weights per image, then divide image k's sum by
/// |query| * |F_k|. Images with no features score 0, as does an empty query.
ScoreVector approx_similarity(const MultiIndexTables& tables,
                              std::span<const BinaryDescriptor> query,
                              const SimilarityParams& p, const ApproxOptions& options = {},
                              QueryStats* stats = nullptr);

}  // namespace mild
