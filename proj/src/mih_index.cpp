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

#include "mild/mih_index.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mild/error.hpp"

namespace mild {

namespace {

// Widest substring stored as a flat array of 2^l buckets.
constexpr std::size_t kMaxDenseBits = 20;

}  // namespace

void QueryScratch::reset(std::size_t slots) {
  if (stamp_.size() < slots) stamp_.resize(slots, 0);
  next_query();
}

void QueryScratch::next_query() {
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
}

// One hash table: dense for short substrings, hashed for long ones.
class MultiIndexTables::Table {
 public:
  explicit Table(std::size_t l) {
    if (l <= kMaxDenseBits) dense_.resize(std::size_t{1} << l);
  }

  std::span<const Slot> find(std::uint64_t key) const {
    if (!dense_.empty()) return dense_[key];
    auto it = sparse_.find(key);
    if (it == sparse_.end()) return {};
    return it->second;
  }

  std::vector<Slot>& slot_list(std::uint64_t key) {
    return dense_.empty() ? sparse_[key] : dense_[key];
  }

 private:
  std::vector<std::vector<Slot>> dense_;
  std::unordered_map<std::uint64_t, std::vector<Slot>> sparse_;
};

MultiIndexTables::MultiIndexTables(SubstringConfig cfg, std::size_t bucket_cap)
    : cfg_(cfg), bucket_cap_(bucket_cap) {
  if (!cfg_.indexable()) {
    throw InvalidInput("substring length " + std::to_string(cfg_.length()) +
                       " bits is too wide to index (max 64)");
  }
  if (bucket_cap_ == 0) throw InvalidInput("bucket_cap must be positive");
  tables_.reserve(cfg_.count());
  for (std::size_t k = 0; k < cfg_.count(); ++k) {
    tables_.push_back(std::make_unique<Table>(cfg_.length()));
  }
}

MultiIndexTables::~MultiIndexTables() = default;
MultiIndexTables::MultiIndexTables(MultiIndexTables&&) noexcept = default;
MultiIndexTables& MultiIndexTables::operator=(MultiIndexTables&&) noexcept = default;

void MultiIndexTables::insert_image(std::uint32_t image_id,
                                    std::span<const BinaryDescriptor> descriptors) {
  if (image_id != image_count()) {
    throw ProtocolError("insert_image: expected image " + std::to_string(image_count()) +
                        ", got " + std::to_string(image_id));
  }
  if (store_.size() + descriptors.size() > std::numeric_limits<Slot>::max()) {
    throw ProtocolError("insert_image: slot space exhausted");
  }
  const std::size_t l = cfg_.length();
  for (const BinaryDescriptor& d : descriptors) {
    const auto slot = static_cast<Slot>(store_.size());
    store_.push_back(d);
    slot_image_.push_back(image_id);
    for (std::size_t k = 0; k < cfg_.count(); ++k) {
      auto& list = tables_[k]->slot_list(detail::slice_unchecked(d, k, l));
      if (list.size() >= bucket_cap_) {
        ++skipped_;
        continue;
      }
      list.push_back(slot);
    }
  }
  image_offsets_.push_back(store_.size());
}

std::vector<FeatureRef> MultiIndexTables::query_candidates(const BinaryDescriptor& q) const {
  QueryScratch scratch;
  scratch.reset(total_features());
  std::vector<FeatureRef> out;
  for_each_candidate(q, scratch, [&](Slot s) { out.push_back(ref_of(s)); });
  return out;
}

std::span<const MultiIndexTables::Slot> MultiIndexTables::bucket(std::size_t k,
                                                                 std::uint64_t key) const {
  return tables_[k]->find(key);
}

std::size_t MultiIndexTables::feature_count(std::uint32_t image_id) const {
  if (image_id >= image_count()) {
    throw InvalidInput("unknown image " + std::to_string(image_id));
  }
  return image_offsets_[image_id + 1] - image_offsets_[image_id];
}

const BinaryDescriptor& MultiIndexTables::descriptor(FeatureRef ref) const {
  if (ref.feature_id >= feature_count(ref.image_id)) {
    throw InvalidInput("unknown feature " + std::to_string(ref.feature_id) + " in image " +
                       std::to_string(ref.image_id));
  }
  return store_[image_offsets_[ref.image_id] + ref.feature_id];
}

FeatureRef MultiIndexTables::ref_of(Slot s) const {
  const std::uint32_t image = slot_image_[s];
  return {image, static_cast<std::uint32_t>(s - image_offsets_[image])};
}

double MultiIndexTables::memory_footprint(std::size_t pointer_size) const {
  return mih_memory_model(total_features(), cfg_, pointer_size);
}

double mih_memory_model(std::size_t n_features, const SubstringConfig& cfg,
                        std::size_t pointer_size) {
  const double m = static_cast<double>(cfg.count());
  const double per_feature = static_cast<double>(kDescriptorBytes) + 4.0 * m;
  const double fixed = m * std::ldexp(1.0, static_cast<int>(cfg.length())) *
                       static_cast<double>(pointer_size);
  return static_cast<double>(n_features) * per_feature + fixed;
}

}  // namespace mild
