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

#include <gtest/gtest.h>

#include <bit>
#include <random>
#include <vector>

#include "mild/dataset_io.hpp"
#include "mild/descriptor.hpp"
#include "mild/error.hpp"
#include "oracles.hpp"

using namespace mild;

namespace {

const std::vector<std::size_t> kIndexableCounts = {4, 8, 16, 32, 64, 128, 256};

}  // namespace

TEST(HammingDistance, IdentityIsZero) {
  std::mt19937_64 rng(1);
  const auto x = random_descriptor(rng);
  EXPECT_EQ(hamming_distance(x, x), 0);
}

TEST(HammingDistance, ComplementIsFullLength) {
  std::mt19937_64 rng(2);
  const auto x = random_descriptor(rng);
  EXPECT_EQ(hamming_distance(x, ~x), 256);
}

TEST(HammingDistance, SingleBitFlip) {
  std::mt19937_64 rng(3);
  const auto x = random_descriptor(rng);
  auto y = x;
  y.flip_bit(7);
  EXPECT_EQ(hamming_distance(x, y), 1);
}

TEST(HammingDistance, ByteSpanLengthMismatchThrows) {
  std::vector<std::uint8_t> a(32, 0), b(31, 0);
  EXPECT_THROW(hamming_distance(std::span<const std::uint8_t>(a), std::span<const std::uint8_t>(b)),
               InvalidInput);
  b.push_back(0xff);
  EXPECT_EQ(hamming_distance(std::span<const std::uint8_t>(a), std::span<const std::uint8_t>(b)), 8);
}

TEST(HammingDistance, MetricPropertiesOnRandomTriples) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_descriptor(rng);
    const auto b = flip_random_bits(a, static_cast<int>(rng() % 80), rng);
    const auto c = random_descriptor(rng);
    EXPECT_EQ(hamming_distance(a, b), oracle::reference_distance(a, b));
    EXPECT_EQ(hamming_distance(a, b), hamming_distance(b, a));
    EXPECT_LE(hamming_distance(a, c), hamming_distance(a, b) + hamming_distance(b, c));
  }
}

TEST(BinaryDescriptor, ByteLayoutIsLsbFirst) {
  BinaryDescriptor d;
  d.set_bit(0, true);
  d.set_bit(9, true);
  d.set_bit(255, true);
  const auto b = d.bytes();
  EXPECT_EQ(b[0], 0x01);
  EXPECT_EQ(b[1], 0x02);
  EXPECT_EQ(b[31], 0x80);
  EXPECT_EQ(BinaryDescriptor::from_bytes(b), d);
}

TEST(BinaryDescriptor, FromBytesRejectsWrongLength) {
  std::vector<std::uint8_t> bytes(33, 0);
  EXPECT_THROW(BinaryDescriptor::from_bytes(bytes), InvalidInput);
}

TEST(BinaryDescriptor, BytesRoundTripRandom) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto d = random_descriptor(rng);
    EXPECT_EQ(BinaryDescriptor::from_bytes(d.bytes()), d);
  }
}

TEST(SubstringConfig, Validation) {
  EXPECT_NO_THROW(SubstringConfig(16));
  EXPECT_EQ(SubstringConfig(16).length(), 16u);
  EXPECT_EQ(SubstringConfig::from_count_and_length(32, 8).count(), 32u);
  EXPECT_THROW(SubstringConfig(0), InvalidInput);
  EXPECT_THROW(SubstringConfig(3), InvalidInput);
  EXPECT_THROW(SubstringConfig(257), InvalidInput);
  EXPECT_THROW(SubstringConfig::from_count_and_length(16, 15), InvalidInput);
  EXPECT_TRUE(SubstringConfig(4).indexable());
  EXPECT_FALSE(SubstringConfig(2).indexable());
}

TEST(SubstringIndex, AllZeroIsZero) {
  const SubstringConfig cfg(16);
  for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(substring_index(BinaryDescriptor{}, k, cfg), 0u);
}

TEST(SubstringIndex, AllOnesIsMaxKey) {
  const SubstringConfig cfg(16);
  for (std::size_t k = 0; k < 16; ++k) {
    EXPECT_EQ(substring_index(BinaryDescriptor::all_ones(), k, cfg), 65535u);
  }
  EXPECT_EQ(substring_index(BinaryDescriptor::all_ones(), 0, SubstringConfig(4)),
            ~std::uint64_t{0});
}

TEST(SubstringIndex, BitZeroLandsInFirstSlice) {
  const SubstringConfig cfg(16);
  BinaryDescriptor d;
  d.set_bit(0, true);
  EXPECT_EQ(substring_index(d, 0, cfg), 1u);
  EXPECT_EQ(oracle::reference_slice(d, 0, 16), 1u);
  for (std::size_t k = 1; k < 16; ++k) EXPECT_EQ(substring_index(d, k, cfg), 0u);
}

TEST(SubstringIndex, OutOfRangeAndUnindexableThrow) {
  EXPECT_THROW(substring_index(BinaryDescriptor{}, 16, SubstringConfig(16)), InvalidInput);
  EXPECT_THROW(substring_index(BinaryDescriptor{}, 0, SubstringConfig(2)), InvalidInput);
}

TEST(SubstringIndex, MatchesReferenceSlicing) {
  std::mt19937_64 rng(6);
  for (std::size_t m : kIndexableCounts) {
    const SubstringConfig cfg(m);
    for (int i = 0; i < 50; ++i) {
      const auto d = random_descriptor(rng);
      for (std::size_t k = 0; k < m; ++k) {
        ASSERT_EQ(substring_index(d, k, cfg), oracle::reference_slice(d, k, cfg.length()))
            << "m=" << m << " k=" << k;
      }
    }
  }
}

TEST(SubstringIndex, DependsOnlyOnItsOwnBits) {
  std::mt19937_64 rng(7);
  const SubstringConfig cfg(16);
  const auto d = random_descriptor(rng);
  for (std::size_t bit = 0; bit < kDescriptorBits; ++bit) {
    auto e = d;
    e.flip_bit(bit);
    for (std::size_t k = 0; k < 16; ++k) {
      const bool inside = bit / 16 == k;
      EXPECT_EQ(substring_index(d, k, cfg) != substring_index(e, k, cfg), inside);
    }
  }
}

TEST(SubstringIndex, SliceDistancesSumToTotal) {
  std::mt19937_64 rng(8);
  for (std::size_t m : kIndexableCounts) {
    const SubstringConfig cfg(m);
    for (int i = 0; i < 100; ++i) {
      const auto a = random_descriptor(rng);
      const auto b = flip_random_bits(a, static_cast<int>(rng() % 257), rng);
      int sum = 0;
      for (std::size_t k = 0; k < m; ++k) {
        sum += std::popcount(substring_index(a, k, cfg) ^ substring_index(b, k, cfg));
      }
      EXPECT_EQ(sum, hamming_distance(a, b));
    }
  }
}

TEST(SubstringIndex, PigeonholeForCloseDescriptors) {
  std::mt19937_64 rng(9);
  for (std::size_t m : kIndexableCounts) {
    const SubstringConfig cfg(m);
    for (int i = 0; i < 500; ++i) {
      const auto a = random_descriptor(rng);
      const int d = static_cast<int>(rng() % m);
      const auto b = flip_random_bits(a, d, rng);
      bool shared = false;
      for (std::size_t k = 0; k < m && !shared; ++k) {
        shared = substring_index(a, k, cfg) == substring_index(b, k, cfg);
      }
      ASSERT_TRUE(shared) << "m=" << m << " d=" << d;
    }
  }
}
