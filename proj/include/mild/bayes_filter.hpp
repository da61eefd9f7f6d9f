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

/** \file bayes_filter.hpp
 *  \brief Per-candidate loop-closure posteriors with temporal coherence.
 *
 *  Every candidate image i carries an independent binary hypothesis "the
 *  current frame closes a loop with image i". Each frame:
 *
 *   1. p_nbr  = combined previous posterior over candidates [i-w, i+w]
 *   2. B(1)   = p_stay * p_nbr + p_leak * (1 - p_nbr), B(0) = 1 - B(1)
 *   3. L(1)   = score-derived likelihood, L(0) = fixed null likelihood
 *   4. P(i)   = L(1) B(1) / (L(1) B(1) + L(0) B(0))
 *
 *  Candidates whose posterior exceeds the threshold are reported; several
 *  may fire in one frame.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mild {

enum class LikelihoodOrientation {
  /// (s - sd) / mean for scores at or above mean + sd, 1 otherwise.
  kAboveMean,
  /// The inverted branch, (s - sd) / mean for scores at or below mean + sd.
  /// Clamped at 0 so posteriors stay in [0, 1]; no candidate can then beat
  /// the null hypothesis. Kept for comparison runs only.
  kLiteral,
};

enum class NeighborhoodCombiner {
  kMax,
  /// 1 - prod(1 - p_j).
  kNoisyOr,
};

struct BayesParams {
  double p_stay = 0.9;
  double p_leak = 0.1;
  std::size_t window = 2;
  /// L(S = 0).
  double null_likelihood = 1.0;
  /// Detection threshold P0 (strict).
  double threshold = 0.7;
  /// Stand-in previous posterior for candidates that just became eligible.
  double prior_new = 0.1;
  LikelihoodOrientation orientation = LikelihoodOrientation::kAboveMean;
  NeighborhoodCombiner combiner = NeighborhoodCombiner::kMax;

  void validate() const;
};

struct BeliefState {
  /// P(S_t^i = 1), indexed by candidate image id.
  std::vector<double> posterior;
  /// Frame index of the last update; -1 before the first one.
  std::int64_t t = -1;
};

struct Belief {
  double no_loop = 0.0;  // B(0)
  double loop = 0.0;     // B(1)
};

/// Combined previous posterior over the clipped window around i.
/// Returns prior_new when `prev` is empty or the window misses it entirely.
double neighborhood_prob(const BeliefState& prev, std::size_t i, const BayesParams& params);

Belief belief(double p_nbr, const BayesParams& params);

/// L(S^i = 1) for each score. All ones when there are fewer than two scores,
/// the mean is 0, or the standard deviation (population form) is 0.
std::vector<double> likelihood(std::span<const double> scores, const BayesParams& params = {});

/// L(1) B(1) / (L(1) B(1) + L(0) B(0)); 0 when the denominator vanishes.
double posterior_probability(double loop_likelihood, const Belief& b, double null_likelihood);

/// One filter step. `scores` may be longer than prev.posterior (new
/// candidates are appended); shorter throws InvalidInput.
BeliefState posterior_update(const BeliefState& prev, std::span<const double> scores,
                             const BayesParams& params);

/// Same step with caller-supplied likelihoods (one per candidate).
BeliefState posterior_update_with_likelihood(const BeliefState& prev,
                                             std::span<const double> loop_likelihood,
                                             const BayesParams& params);

/// Candidate ids whose posterior is strictly above params.threshold.
std::vector<std::uint32_t> detect(const BeliefState& state, const BayesParams& params);

}  // namespace mild
