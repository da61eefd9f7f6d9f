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

#include "mild/descriptor.hpp"

#include <string>

#include "mild/error.hpp"

namespace mild {

BinaryDescriptor BinaryDescriptor::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kDescriptorBytes) {
    throw InvalidInput("descriptor must be " + std::to_string(kDescriptorBytes) +
                       " bytes, got " + std::to_string(bytes.size()));
  }
  BinaryDescriptor d;
  for (std::size_t w = 0; w < kWords; ++w) {
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < 8; ++b) {
      v |= std::uint64_t{bytes[w * 8 + b]} << (8 * b);
    }
    d.words_[w] = v;
  }
  return d;
}

BinaryDescriptor BinaryDescriptor::all_ones() { return ~BinaryDescriptor{}; }

void BinaryDescriptor::to_bytes(std::span<std::uint8_t, kDescriptorBytes> out) const {
  for (std::size_t w = 0; w < kWords; ++w) {
    for (std::size_t b = 0; b < 8; ++b) {
      out[w * 8 + b] = static_cast<std::uint8_t>(words_[w] >> (8 * b));
    }
  }
}

std::array<std::uint8_t, kDescriptorBytes> BinaryDescriptor::bytes() const {
  std::array<std::uint8_t, kDescriptorBytes> out{};
  to_bytes(out);
  return out;
}

void BinaryDescriptor::set_bit(std::size_t i, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (value) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

BinaryDescriptor BinaryDescriptor::operator~() const {
  BinaryDescriptor r;
  for (std::size_t w = 0; w < kWords; ++w) r.words_[w] = ~words_[w];
  return r;
}

BinaryDescriptor BinaryDescriptor::operator^(const BinaryDescriptor& other) const {
  BinaryDescriptor r;
  for (std::size_t w = 0; w < kWords; ++w) r.words_[w] = words_[w] ^ other.words_[w];
  return r;
}

int hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) {
    throw InvalidInput("hamming_distance: length mismatch (" + std::to_string(a.size()) +
                       " vs " + std::to_string(b.size()) + " bytes)");
  }
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += std::popcount(static_cast<unsigned>(a[i] ^ b[i]));
  }
  return d;
}

SubstringConfig::SubstringConfig(std::size_t m) : m_(m), l_(0) {
  if (m == 0 || m > kDescriptorBits || kDescriptorBits % m != 0) {
    throw InvalidInput("substring count must divide " + std::to_string(kDescriptorBits) +
                       ", got " + std::to_string(m));
  }
  l_ = kDescriptorBits / m;
}

SubstringConfig SubstringConfig::from_count_and_length(std::size_t m, std::size_t l) {
  if (m * l != kDescriptorBits) {
    throw InvalidInput("substring count x length must equal " +
                       std::to_string(kDescriptorBits) + ", got " + std::to_string(m) +
                       " x " + std::to_string(l));
  }
  return SubstringConfig(m);
}

std::uint64_t substring_index(const BinaryDescriptor& desc, std::size_t k,
                              const SubstringConfig& cfg) {
  if (k >= cfg.count()) {
    throw InvalidInput("substring index " + std::to_string(k) + " out of range [0, " +
                       std::to_string(cfg.count()) + ")");
  }
  if (!cfg.indexable()) {
    throw InvalidInput("substring length " + std::to_string(cfg.length()) +
                       " exceeds the 64-bit key width");
  }
  return detail::slice_unchecked(desc, k, cfg.length());
}

}  // namespace mild
