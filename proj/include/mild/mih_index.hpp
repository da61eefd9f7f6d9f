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

/** \file mih_index.hpp
 *  \brief Multi-index hash tables over binary descriptors.
 *
 *  Each stored descriptor is split into m disjoint substrings; substring k is
 *  the bucket key in table k. Two descriptors at Hamming distance below m
 *  share at least one substring, so they always meet in some bucket.
 *
 *  Storage is append-only. Every feature gets a dense "slot" number in insert
 *  order; buckets hold 4-byte slots, and slots map back to (image, feature)
 *  references and to the stored descriptor.
 *
 *  Thread-safety: const member functions may run concurrently with each
 *  other; insert_image must not overlap any other call.
 */

#include <cstddef>
#include <cstdint>
#include <compare>
#include <limits>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "mild/descriptor.hpp"

namespace mild {

struct FeatureRef {
  std::uint32_t image_id = 0;
  std::uint32_t feature_id = 0;

  friend auto operator<=>(const FeatureRef&, const FeatureRef&) = default;
};

inline constexpr std::size_t kDefaultBucketCap = 128;
inline constexpr std::size_t kUnboundedBucket = std::numeric_limits<std::size_t>::max();

/// Per-query dedup state. One instance per concurrent query thread; reusing
/// it across queries avoids reallocating.
class QueryScratch {
 public:
  /// Starts a new visited set sized for `slots` stored features.
  void reset(std::size_t slots);
  /// True the first time `slot` is seen since the last reset/next_query.
  bool visit(std::uint32_t slot) {
    if (stamp_[slot] == epoch_) return false;
    stamp_[slot] = epoch_;
    return true;
  }
  void next_query();

 private:
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

class MultiIndexTables {
 public:
  using Slot = std::uint32_t;

  /// Throws InvalidInput when `cfg` is not indexable (l > 64) or bucket_cap is 0.
  explicit MultiIndexTables(SubstringConfig cfg = SubstringConfig{},
                            std::size_t bucket_cap = kDefaultBucketCap);
  ~MultiIndexTables();
  MultiIndexTables(MultiIndexTables&&) noexcept;
  MultiIndexTables& operator=(MultiIndexTables&&) noexcept;

  /// Appends image `image_id`, which must equal image_count() (ProtocolError
  /// otherwise). A bucket already holding bucket_cap refs is frozen: the
  /// feature skips that table only and still enters its other buckets.
  void insert_image(std::uint32_t image_id, std::span<const BinaryDescriptor> descriptors);

  /// Deduplicated union of the query's m buckets (the candidate set).
  std::vector<FeatureRef> query_candidates(const BinaryDescriptor& q) const;

  /// Calls `fn(slot)` once for every distinct slot sharing a bucket with `q`.
  /// `scratch` must have been reset for at least total_features() slots.
  template <typename Fn>
  void for_each_candidate(const BinaryDescriptor& q, QueryScratch& scratch, Fn&& fn) const {
    const std::size_t l = cfg_.length();
    for (std::size_t k = 0; k < cfg_.count(); ++k) {
      for (Slot s : bucket(k, detail::slice_unchecked(q, k, l))) {
        if (scratch.visit(s)) fn(s);
      }
    }
  }

  /// Contents of bucket `key` in table `k`, as slots. Empty for unused keys.
  std::span<const Slot> bucket(std::size_t k, std::uint64_t key) const;

  const SubstringConfig& config() const { return cfg_; }
  std::size_t bucket_cap() const { return bucket_cap_; }
  std::size_t image_count() const { return image_offsets_.size() - 1; }
  std::size_t total_features() const { return store_.size(); }
  /// |F_k|; throws InvalidInput for an unknown image.
  std::size_t feature_count(std::uint32_t image_id) const;
  /// Number of (feature, table) insertions dropped because a bucket was full.
  std::size_t skipped_insertions() const { return skipped_; }

  const BinaryDescriptor& descriptor(Slot s) const { return store_[s]; }
  const BinaryDescriptor& descriptor(FeatureRef ref) const;
  std::uint32_t image_of(Slot s) const { return slot_image_[s]; }
  FeatureRef ref_of(Slot s) const;

  /// Accounting model of the index footprint in bytes:
  /// N * (32 + 4m) + m * 2^l * pointer_size. Not an allocator measurement.
  double memory_footprint(std::size_t pointer_size = 8) const;

 private:
  class Table;

  SubstringConfig cfg_;
  std::size_t bucket_cap_;
  std::vector<std::unique_ptr<Table>> tables_;
  std::vector<BinaryDescriptor> store_;
  std::vector<std::uint32_t> slot_image_;
  std::vector<std::size_t> image_offsets_{0};
  std::size_t skipped_ = 0;
};

/// Memory model figure for a database of `n_features` features.
double mih_memory_model(std::size_t n_features, const SubstringConfig& cfg,
                        std::size_t pointer_size = 8);

}  // namespace mild
