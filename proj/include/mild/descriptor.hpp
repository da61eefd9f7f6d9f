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

/** \file descriptor.hpp
 *  \brief 256-bit binary feature descriptors and their substring decomposition.
 *
 *  Bit order: bit i lives in byte i / 8 at position i % 8 (least significant
 *  bit first). Substring k of a descriptor split into m pieces of l bits
 *  covers bits [k*l, (k+1)*l), read as an unsigned integer whose bit j is
 *  descriptor bit k*l + j. With this convention, a descriptor whose only set
 *  bit is bit 0 has substring 0 equal to 1.
 *
 *  The on-disk descriptor format and the extraction tool use the same byte
 *  layout, so `from_bytes(to_bytes(x)) == x` on every platform.
 */

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>

namespace mild {

inline constexpr std::size_t kDescriptorBits = 256;
inline constexpr std::size_t kDescriptorBytes = kDescriptorBits / 8;

class BinaryDescriptor {
 public:
  static constexpr std::size_t kWords = kDescriptorBits / 64;

  /// All-zero descriptor.
  constexpr BinaryDescriptor() = default;

  /// Throws InvalidInput unless `bytes.size() == kDescriptorBytes`.
  static BinaryDescriptor from_bytes(std::span<const std::uint8_t> bytes);
  static BinaryDescriptor all_ones();

  void to_bytes(std::span<std::uint8_t, kDescriptorBytes> out) const;
  std::array<std::uint8_t, kDescriptorBytes> bytes() const;

  bool bit(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set_bit(std::size_t i, bool value);
  void flip_bit(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  /// Word w holds bits [64w, 64w + 64).
  const std::array<std::uint64_t, kWords>& words() const { return words_; }

  BinaryDescriptor operator~() const;
  BinaryDescriptor operator^(const BinaryDescriptor& other) const;

  friend bool operator==(const BinaryDescriptor&, const BinaryDescriptor&) = default;

 private:
  std::array<std::uint64_t, kWords> words_{};
};

inline int hamming_distance(const BinaryDescriptor& a, const BinaryDescriptor& b) {
  const auto& x = a.words();
  const auto& y = b.words();
  return std::popcount(x[0] ^ y[0]) + std::popcount(x[1] ^ y[1]) +
         std::popcount(x[2] ^ y[2]) + std::popcount(x[3] ^ y[3]);
}

/// Distance between two raw descriptor byte strings. Throws InvalidInput when
/// the lengths differ.
int hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Partition of a descriptor into `m` disjoint substrings of `l` bits.
class SubstringConfig {
 public:
  static constexpr std::size_t kDefaultCount = 16;

  /// Throws InvalidInput unless 1 <= m <= 256 and m divides 256.
  explicit SubstringConfig(std::size_t m = kDefaultCount);
  /// Throws InvalidInput unless m * l == 256.
  static SubstringConfig from_count_and_length(std::size_t m, std::size_t l);

  std::size_t count() const { return m_; }
  std::size_t length() const { return l_; }
  /// True when substrings fit a 64-bit key, i.e. the config is usable for indexing.
  bool indexable() const { return l_ <= 64; }

  friend bool operator==(const SubstringConfig&, const SubstringConfig&) = default;

 private:
  std::size_t m_;
  std::size_t l_;
};

/// The k-th l-bit slice of `desc`. Throws InvalidInput for k >= m or l > 64.
std::uint64_t substring_index(const BinaryDescriptor& desc, std::size_t k,
                              const SubstringConfig& cfg);

namespace detail {

// Unchecked: caller guarantees k < m and l <= 64. Since l is a power of two,
// a slice never straddles two words.
inline std::uint64_t slice_unchecked(const BinaryDescriptor& desc, std::size_t k,
                                     std::size_t l) {
  const std::size_t first = k * l;
  const std::uint64_t word = desc.words()[first / 64] >> (first % 64);
  return l == 64 ? word : word & ((std::uint64_t{1} << l) - 1);
}

}  // namespace detail

}  // namespace mild
