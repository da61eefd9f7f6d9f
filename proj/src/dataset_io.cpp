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

#include "mild/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mild/error.hpp"

namespace mild {

std::size_t DescriptorDataset::total_features() const {
  std::size_t n = 0;
  for (const auto& img : images) n += img.size();
  return n;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint64_t offset() const { return offset_; }

  void read(void* dst, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != n) {
      throw ParseError(ParseError::Kind::Truncated, offset_ + got,
                       std::string("truncated file: expected ") + what + " at byte offset " +
                           std::to_string(offset_));
    }
    offset_ += n;
  }

  std::uint32_t u32(const char* what) {
    std::uint8_t b[4];
    read(b, 4, what);
    return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 |
           std::uint32_t{b[3]} << 24;
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

std::uint32_t parse_id(const std::string& tok, std::uint64_t line) {
  std::uint32_t v = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(ParseError::Kind::BadToken, line,
                     "line " + std::to_string(line) + ": invalid image id '" + tok + "'");
  }
  return v;
}

}  // namespace

void write_dataset(const DescriptorDataset& ds, std::ostream& out) {
  out.write(kDatasetMagic, 4);
  put_u32(out, kDatasetVersion);
  put_u32(out, static_cast<std::uint32_t>(kDescriptorBytes));
  put_u32(out, static_cast<std::uint32_t>(ds.images.size()));
  std::array<std::uint8_t, kDescriptorBytes> buf{};
  for (const auto& img : ds.images) {
    put_u32(out, static_cast<std::uint32_t>(img.size()));
    for (const auto& d : img) {
      d.to_bytes(buf);
      out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
    }
  }
}

void write_dataset(const DescriptorDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_dataset(ds, out);
  if (!out.flush()) throw IoError("write failed: " + path.string());
}

DescriptorDataset read_dataset(std::istream& in, std::string name) {
  Reader r(in);
  char magic[4];
  r.read(magic, 4, "magic");
  if (std::memcmp(magic, kDatasetMagic, 4) != 0) {
    throw ParseError(ParseError::Kind::BadMagic, 0, "bad magic at byte offset 0");
  }
  const std::uint64_t version_at = r.offset();
  if (const auto v = r.u32("version"); v != kDatasetVersion) {
    throw ParseError(ParseError::Kind::VersionMismatch, version_at,
                     "unsupported version " + std::to_string(v) + " at byte offset " +
                         std::to_string(version_at));
  }
  const std::uint64_t size_at = r.offset();
  if (const auto b = r.u32("descriptor size"); b != kDescriptorBytes) {
    throw ParseError(ParseError::Kind::DescriptorSize, size_at,
                     "descriptor size " + std::to_string(b) + " != 32 at byte offset " +
                         std::to_string(size_at));
  }
  const std::uint32_t n_images = r.u32("image count");

  DescriptorDataset ds;
  ds.name = std::move(name);
  ds.images.reserve(std::min<std::uint32_t>(n_images, 1u << 20));
  std::array<std::uint8_t, kDescriptorBytes> buf{};
  for (std::uint32_t i = 0; i < n_images; ++i) {
    const std::uint32_t n = r.u32("feature count");
    auto& img = ds.images.emplace_back();
    img.reserve(std::min<std::uint32_t>(n, 1u << 16));
    for (std::uint32_t f = 0; f < n; ++f) {
      r.read(buf.data(), buf.size(), "descriptor");
      img.push_back(BinaryDescriptor::from_bytes(buf));
    }
  }
  if (!r.at_end()) {
    throw ParseError(ParseError::Kind::TrailingData, r.offset(),
                     "trailing data at byte offset " + std::to_string(r.offset()));
  }
  return ds;
}

DescriptorDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_dataset(in, path.stem().string());
}

void GroundTruth::add(std::uint32_t a, std::uint32_t b) {
  if (a == b) throw InvalidInput("self-pair " + std::to_string(a));
  pairs.emplace(std::max(a, b), std::min(a, b));
}

GroundTruth parse_ground_truth(std::istream& in, std::optional<std::size_t> n_images) {
  GroundTruth gt;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(strip_comment(line));
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) {
      throw ParseError(ParseError::Kind::BadToken, line_no,
                       "line " + std::to_string(line_no) + ": expected two image ids");
    }
    const std::uint32_t a = parse_id(tokens[0], line_no);
    const std::uint32_t b = parse_id(tokens[1], line_no);
    if (n_images && (a >= *n_images || b >= *n_images)) {
      throw ParseError(ParseError::Kind::OutOfRange, line_no,
                       "line " + std::to_string(line_no) + ": image id out of range [0, " +
                           std::to_string(*n_images) + ")");
    }
    if (a == b) {
      throw ParseError(ParseError::Kind::SelfPair, line_no,
                       "line " + std::to_string(line_no) + ": self-pair " + std::to_string(a));
    }
    gt.add(a, b);
  }
  return gt;
}

GroundTruth load_ground_truth(const std::filesystem::path& path,
                              std::optional<std::size_t> n_images) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_ground_truth(in, n_images);
}

void write_ground_truth(const GroundTruth& gt, std::ostream& out) {
  out << "# query candidate\n";
  for (const auto& [q, c] : gt.pairs) out << q << ' ' << c << '\n';
}

void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_ground_truth(gt, out);
  if (!out.flush()) throw IoError("write failed: " + path.string());
}

GroundTruth matrix_to_pairs(std::istream& in) {
  GroundTruth gt;
  std::string line;
  std::uint64_t line_no = 0;
  std::uint32_t row = 0;
  std::optional<std::size_t> width;
  while (std::getline(in, line)) {
    ++line_no;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(strip_comment(line));
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (width && tokens.size() != *width) {
      throw ParseError(ParseError::Kind::BadToken, line_no,
                       "line " + std::to_string(line_no) + ": row has " +
                           std::to_string(tokens.size()) + " entries, expected " +
                           std::to_string(*width));
    }
    width = tokens.size();
    for (std::uint32_t col = 0; col < tokens.size(); ++col) {
      double v = 0.0;
      const auto& tok = tokens[col];
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError(ParseError::Kind::BadToken, line_no,
                         "line " + std::to_string(line_no) + ": bad matrix entry '" + tok + "'");
      }
      if (v != 0.0 && col != row) gt.add(row, col);
    }
    ++row;
  }
  if (width && *width != row) {
    throw ParseError(ParseError::Kind::BadToken, line_no,
                     "matrix is " + std::to_string(row) + " x " + std::to_string(*width) +
                         ", expected square");
  }
  return gt;
}

void SyntheticSpec::validate() const {
  if (!(inlier_fraction >= 0.0 && inlier_fraction <= 1.0)) {
    throw InvalidInput("inlier_fraction must lie in [0, 1]");
  }
  if (max_flips < 0 || max_flips > static_cast<int>(kDescriptorBits)) {
    throw InvalidInput("max_flips must lie in [0, 256]");
  }
  if (inlier_model.stddev < 0.0) throw InvalidInput("inlier stddev must be >= 0");
  for (const auto& lp : loop_pairs) {
    if (lp.query <= lp.candidate) {
      throw InvalidInput("loop pair (" + std::to_string(lp.query) + ", " +
                         std::to_string(lp.candidate) + ") must have query > candidate");
    }
    if (lp.query >= n_images) {
      throw InvalidInput("loop pair query " + std::to_string(lp.query) + " out of range");
    }
    if (lp.inlier_fraction && !(*lp.inlier_fraction >= 0.0 && *lp.inlier_fraction <= 1.0)) {
      throw InvalidInput("loop pair inlier_fraction must lie in [0, 1]");
    }
  }
}

SyntheticSpec loop_benchmark_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_images = 100;
  spec.features_per_image = 200;
  spec.inlier_fraction = 0.5;
  spec.rng_seed = seed;
  for (std::uint32_t i = 0; i <= 10; ++i) spec.loop_pairs.push_back({60 + i, 10 + i, std::nullopt});
  return spec;
}

BinaryDescriptor random_descriptor(std::mt19937_64& rng) {
  std::array<std::uint8_t, kDescriptorBytes> bytes{};
  for (std::size_t w = 0; w < BinaryDescriptor::kWords; ++w) {
    const std::uint64_t v = rng();
    for (std::size_t b = 0; b < 8; ++b) bytes[w * 8 + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return BinaryDescriptor::from_bytes(bytes);
}

BinaryDescriptor flip_random_bits(const BinaryDescriptor& d, int count, std::mt19937_64& rng) {
  if (count < 0 || count > static_cast<int>(kDescriptorBits)) {
    throw InvalidInput("flip count out of range: " + std::to_string(count));
  }
  std::array<std::uint16_t, kDescriptorBits> positions{};
  std::iota(positions.begin(), positions.end(), std::uint16_t{0});
  BinaryDescriptor out = d;
  // Partial Fisher-Yates: the first `count` entries become a uniform sample.
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, static_cast<int>(kDescriptorBits) - 1);
    std::swap(positions[i], positions[pick(rng)]);
    out.flip_bit(positions[i]);
  }
  return out;
}

BinaryDescriptor flip_bits_binned(const BinaryDescriptor& d, int count,
                                  const SubstringConfig& cfg, std::mt19937_64& rng) {
  if (count < 0 || count > static_cast<int>(kDescriptorBits)) {
    throw InvalidInput("flip count out of range: " + std::to_string(count));
  }
  const int m = static_cast<int>(cfg.count());
  const int l = static_cast<int>(cfg.length());
  std::uniform_int_distribution<int> bin(0, m - 1);
  std::vector<int> per_bin(static_cast<std::size_t>(m));
  bool fits = false;
  while (!fits) {
    std::fill(per_bin.begin(), per_bin.end(), 0);
    for (int i = 0; i < count; ++i) ++per_bin[bin(rng)];
    fits = std::all_of(per_bin.begin(), per_bin.end(), [l](int c) { return c <= l; });
  }
  BinaryDescriptor out = d;
  std::vector<int> offsets(static_cast<std::size_t>(l));
  for (int k = 0; k < m; ++k) {
    std::iota(offsets.begin(), offsets.end(), 0);
    for (int i = 0; i < per_bin[k]; ++i) {
      std::uniform_int_distribution<int> pick(i, l - 1);
      std::swap(offsets[i], offsets[pick(rng)]);
      out.flip_bit(static_cast<std::size_t>(k * l + offsets[i]));
    }
  }
  return out;
}

int sample_flip_count(const DistanceModel& model, int max_flips, std::mt19937_64& rng) {
  if (model.stddev <= 0.0) {
    return std::clamp(static_cast<int>(std::lround(model.mean)), 0, max_flips);
  }
  std::normal_distribution<double> normal(model.mean, model.stddev);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const long k = std::lround(normal(rng));
    if (k >= 0 && k <= max_flips) return static_cast<int>(k);
  }
  throw InvalidInput("distance model has negligible mass on [0, max_flips]");
}

std::pair<DescriptorDataset, GroundTruth> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.rng_seed);

  DescriptorDataset ds;
  ds.name = "synthetic";
  ds.images.resize(spec.n_images);
  for (auto& img : ds.images) {
    img.reserve(spec.features_per_image);
    for (std::size_t f = 0; f < spec.features_per_image; ++f) img.push_back(random_descriptor(rng));
  }

  GroundTruth gt;
  std::vector<std::size_t> order(spec.features_per_image);
  for (const auto& lp : spec.loop_pairs) {
    gt.add(lp.query, lp.candidate);
    const double fraction = lp.inlier_fraction.value_or(spec.inlier_fraction);
    const auto n_copy = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(spec.features_per_image)));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    auto& query = ds.images[lp.query];
    const auto& source = ds.images[lp.candidate];
    for (std::size_t i = 0; i < n_copy; ++i) {
      const std::size_t f = order[i];
      const int k = sample_flip_count(spec.inlier_model, spec.max_flips, rng);
      query[f] = flip_random_bits(source[f], k, rng);
    }
  }
  return {std::move(ds), std::move(gt)};
}

}  // namespace mild
