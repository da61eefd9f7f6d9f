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

#include "mild/bayes_filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mild/error.hpp"

namespace mild {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void BayesParams::validate() const {
  if (!is_probability(p_stay) || !is_probability(p_leak) ||
      std::abs(p_stay + p_leak - 1.0) > 1e-12) {
    throw InvalidInput("p_stay and p_leak must be probabilities summing to 1");
  }
  if (!is_probability(threshold) || !is_probability(prior_new)) {
    throw InvalidInput("threshold and prior_new must lie in [0, 1]");
  }
  if (!(null_likelihood > 0.0) || !std::isfinite(null_likelihood)) {
    throw InvalidInput("null likelihood must be positive");
  }
}

double neighborhood_prob(const BeliefState& prev, std::size_t i, const BayesParams& params) {
  const auto& p = prev.posterior;
  const std::size_t lo = i > params.window ? i - params.window : 0;
  if (p.empty() || lo >= p.size()) return params.prior_new;
  const std::size_t hi = std::min(p.size() - 1, i + params.window);

  if (params.combiner == NeighborhoodCombiner::kMax) {
    return *std::max_element(p.begin() + static_cast<std::ptrdiff_t>(lo),
                             p.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
  }
  double none = 1.0;
  for (std::size_t j = lo; j <= hi; ++j) none *= 1.0 - p[j];
  return 1.0 - none;
}

Belief belief(double p_nbr, const BayesParams& params) {
  if (!is_probability(p_nbr)) {
    throw InvalidInput("neighborhood probability out of [0, 1]: " + std::to_string(p_nbr));
  }
  Belief b;
  b.loop = params.p_stay * p_nbr + params.p_leak * (1.0 - p_nbr);
  b.no_loop = params.p_leak * p_nbr + params.p_stay * (1.0 - p_nbr);
  return b;
}

std::vector<double> likelihood(std::span<const double> scores, const BayesParams& params) {
  std::vector<double> out(scores.size(), 1.0);
  if (scores.size() < 2) return out;

  const double n = static_cast<double>(scores.size());
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  const double sd = std::sqrt(var / n);
  if (mean <= 0.0 || sd <= 0.0) return out;

  const double boundary = mean + sd;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    if (params.orientation == LikelihoodOrientation::kAboveMean) {
      if (s >= boundary) out[i] = (s - sd) / mean;
    } else if (s <= boundary) {
      out[i] = std::max(0.0, (s - sd) / mean);
    }
  }
  return out;
}

double posterior_probability(double loop_likelihood, const Belief& b, double null_likelihood) {
  const double num = loop_likelihood * b.loop;
  const double den = num + null_likelihood * b.no_loop;
  return den > 0.0 ? num / den : 0.0;
}

BeliefState posterior_update_with_likelihood(const BeliefState& prev,
                                             std::span<const double> loop_likelihood,
                                             const BayesParams& params) {
  const std::size_t n = loop_likelihood.size();
  if (n < prev.posterior.size()) {
    throw InvalidInput("posterior_update: candidate set shrank from " +
                       std::to_string(prev.posterior.size()) + " to " + std::to_string(n));
  }
  BeliefState extended;
  extended.posterior = prev.posterior;
  extended.posterior.resize(n, params.prior_new);

  BeliefState next;
  next.t = prev.t + 1;
  next.posterior.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Belief b = belief(neighborhood_prob(extended, i, params), params);
    next.posterior[i] = posterior_probability(loop_likelihood[i], b, params.null_likelihood);
  }
  return next;
}

BeliefState posterior_update(const BeliefState& prev, std::span<const double> scores,
                             const BayesParams& params) {
  const std::vector<double> lik = likelihood(scores, params);
  return posterior_update_with_likelihood(prev, lik, params);
}

std::vector<std::uint32_t> detect(const BeliefState& state, const BayesParams& params) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < state.posterior.size(); ++i) {
    if (state.posterior[i] > params.threshold) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

}  // namespace mild
