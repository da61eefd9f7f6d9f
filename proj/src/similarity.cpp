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

#include "mild/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "mild/error.hpp"

namespace mild {

void SimilarityParams::validate() const {
  if (d0 < 0 || d0 > static_cast<int>(kDescriptorBits)) {
    throw InvalidInput("d0 must lie in [0, 256], got " + std::to_string(d0));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidInput("sigma must be positive, got " + std::to_string(sigma));
  }
}

double feature_similarity(int d, const SimilarityParams& p) {
  if (d < 0 || d > static_cast<int>(kDescriptorBits)) {
    throw InvalidInput("Hamming distance out of range: " + std::to_string(d));
  }
  if (d > p.d0) return 0.0;
  const double x = static_cast<double>(d) / p.sigma;
  return std::exp(-x * x);
}

SimilarityKernel::SimilarityKernel(const SimilarityParams& p) : params_(p) {
  p.validate();
  for (int d = 0; d <= static_cast<int>(kDescriptorBits); ++d) {
    weights_[static_cast<std::size_t>(d)] = feature_similarity(d, p);
  }
}

double exact_image_similarity(std::span<const BinaryDescriptor> fp,
                              std::span<const BinaryDescriptor> fq,
                              const SimilarityParams& p) {
  if (fp.empty() || fq.empty()) {
    throw InvalidInput("exact_image_similarity: empty feature set");
  }
  const SimilarityKernel phi(p);
  double sum = 0.0;
  for (const auto& a : fp) {
    for (const auto& b : fq) sum += phi(hamming_distance(a, b));
  }
  return sum / (static_cast<double>(fp.size()) * static_cast<double>(fq.size()));
}

namespace {

// Accumulates raw weight sums for query features [begin, end) into `acc`.
std::uint64_t accumulate(const MultiIndexTables& tables,
                         std::span<const BinaryDescriptor> query, std::size_t begin,
                         std::size_t end, std::size_t limit, const SimilarityKernel& phi,
                         std::vector<double>& acc) {
  QueryScratch scratch;
  scratch.reset(tables.total_features());
  std::uint64_t computed = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const BinaryDescriptor& q = query[i];
    tables.for_each_candidate(q, scratch, [&](MultiIndexTables::Slot s) {
      const std::uint32_t image = tables.image_of(s);
      if (image >= limit) return;
      ++computed;
      acc[image] += phi(hamming_distance(q, tables.descriptor(s)));
    });
    scratch.next_query();
  }
  return computed;
}

}  // namespace

ScoreVector approx_similarity(const MultiIndexTables& tables,
                              std::span<const BinaryDescriptor> query,
                              const SimilarityParams& p, const ApproxOptions& options,
                              QueryStats* stats) {
  const SimilarityKernel phi(p);
  const std::size_t limit = std::min(options.candidate_limit, tables.image_count());
  ScoreVector scores(limit, 0.0);
  if (limit == 0 || query.empty()) return scores;

  const std::size_t workers =
      std::clamp<std::size_t>(options.workers, 1, query.size());
  std::uint64_t computed = 0;
  if (workers == 1) {
    computed = accumulate(tables, query, 0, query.size(), limit, phi, scores);
  } else {
    std::vector<std::vector<double>> partial(workers, std::vector<double>(limit, 0.0));
    std::vector<std::uint64_t> counts(workers, 0);
    {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (query.size() + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(query.size(), w * chunk);
        const std::size_t end = std::min(query.size(), begin + chunk);
        pool.emplace_back([&, w, begin, end] {
          counts[w] = accumulate(tables, query, begin, end, limit, phi, partial[w]);
        });
      }
    }
    for (std::size_t w = 0; w < workers; ++w) {
      for (std::size_t k = 0; k < limit; ++k) scores[k] += partial[w][k];
      computed += counts[w];
    }
  }

  const double nq = static_cast<double>(query.size());
  for (std::size_t k = 0; k < limit; ++k) {
    const std::size_t nk = tables.feature_count(static_cast<std::uint32_t>(k));
    scores[k] = nk == 0 ? 0.0 : scores[k] / (nq * static_cast<double>(nk));
  }
  if (stats) stats->distance_computations += computed;
  return scores;
}

}  // namespace mild
