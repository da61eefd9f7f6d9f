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

/** \file analysis.hpp
 *  \brief Accuracy/complexity model of multi-index hashing.
 *
 *  A pair at Hamming distance d is retrieved when at least one of the m
 *  substrings is error free. Modelling each error as a ball dropped into one
 *  of m bins uniformly at random, the retrieval ("recall") probability is
 *
 *      P_recall(m, d) = 1 - m! S(d, m) / m^d
 *
 *  with S the Stirling number of the second kind. Weighting P_recall by a
 *  Gaussian distance model for true matches (inliers) gives the accuracy
 *  R(m); weighting by the model for unrelated pairs (outliers) gives the
 *  complexity E(m), both summed over d = 0..L.
 */

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace mild {

/// P_recall(m, d). Exactly 1 for d < m; computed through the distribution of
/// occupied bins, which involves no cancellation. Throws InvalidInput for
/// m < 1 or d < 0.
double recall_probability(int m, int d);

/// P_recall(m, d) for every d in [0, d_max].
std::vector<double> recall_curve(int m, int d_max);

/// The same quantity by inclusion-exclusion,
/// sum_{k=1..m} (-1)^{k+1} C(m,k) (1 - k/m)^d, with compensated summation.
/// Alternating terms cancel badly for m above ~30.
double recall_probability_inclusion_exclusion(int m, int d);

/// Retrieval probability when the d differing bits are distinct positions
/// chosen uniformly among m*l (sampling without replacement), which is how
/// real bit flips behave. Approaches P_recall as l grows.
double recall_probability_distinct_positions(int m, int l, int d);

struct DistanceModel {
  double mean = 0.0;
  double stddev = 1.0;
};

inline constexpr DistanceModel kInlierDistanceModel{32.0, 10.0};
inline constexpr DistanceModel kOutlierDistanceModel{128.0, 20.0};

/// Gaussian density at d = 0..256, renormalized to sum to 1.
/// Throws InvalidInput unless stddev > 0.
std::vector<double> distance_pmf(const DistanceModel& model);

/// R(m) = sum_{d=0..L} P_recall(m, d) * P_inlier(d).
double accuracy_R(int m, int L, const DistanceModel& inlier = kInlierDistanceModel);
/// E(m) = sum_{d=0..L} P_recall(m, d) * P_outlier(d).
double complexity_E(int m, int L, const DistanceModel& outlier = kOutlierDistanceModel);

struct TradeoffPoint {
  int m = 0;
  double R = 0.0;
  double E = 0.0;
};

std::vector<TradeoffPoint> tradeoff_curve(std::span<const int> m_values, int L,
                                          const DistanceModel& inlier = kInlierDistanceModel,
                                          const DistanceModel& outlier = kOutlierDistanceModel);

/// Header `m,d,p_recall`, one row per (m, d) with d in [0, d_max].
void write_recall_csv(std::ostream& out, std::span<const int> m_values, int d_max);
/// Header `m,R,E`.
void write_tradeoff_csv(std::ostream& out, std::span<const TradeoffPoint> points);

struct CurveFiles {
  std::filesystem::path recall;
  std::filesystem::path tradeoff;
};

/// Writes recall.csv and tradeoff.csv into `dir` (created if missing).
/// Throws IoError when the files cannot be written.
CurveFiles emit_curves(const std::filesystem::path& dir, std::span<const int> m_values,
                       int d_max, int L, const DistanceModel& inlier = kInlierDistanceModel,
                       const DistanceModel& outlier = kOutlierDistanceModel);

}  // namespace mild
