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

#include "mild/analysis.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>

#include "mild/descriptor.hpp"
#include "mild/error.hpp"

namespace mild {

namespace {

void check_m_d(int m, int d) {
  if (m < 1) throw InvalidInput("substring count must be >= 1, got " + std::to_string(m));
  if (d < 0) throw InvalidInput("distance must be >= 0, got " + std::to_string(d));
}

void check_L(int L) {
  if (L < 0 || L > static_cast<int>(kDescriptorBits)) {
    throw InvalidInput("L must lie in [0, 256], got " + std::to_string(L));
  }
}

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double weighted_recall(int m, int L, const DistanceModel& model) {
  check_L(L);
  const std::vector<double> pmf = distance_pmf(model);
  const std::vector<double> recall = recall_curve(m, L);
  double sum = 0.0;
  for (int d = 0; d <= L; ++d) sum += recall[d] * pmf[d];
  return sum;
}

}  // namespace

std::vector<double> recall_curve(int m, int d_max) {
  check_m_d(m, d_max);
  // occupied[j]: probability that exactly j bins hold at least one ball.
  // A new ball lands in an occupied bin with probability j/m.
  std::vector<double> occupied(static_cast<std::size_t>(m) + 1, 0.0);
  occupied[0] = 1.0;
  std::vector<double> curve(static_cast<std::size_t>(d_max) + 1, 1.0);
  const double bins = m;
  for (int d = 1; d <= d_max; ++d) {
    for (int j = std::min(d, m); j >= 1; --j) {
      occupied[j] = occupied[j] * (j / bins) + occupied[j - 1] * ((m - j + 1) / bins);
    }
    occupied[0] = 0.0;
    if (d < m) continue;  // pigeonhole: some bin is still empty
    // Near 1, use the complement: occupied[m] only grows by non-negative
    // terms, so the curve cannot tick upward by an ulp. In the tail, summing
    // the incomplete states keeps relative accuracy.
    if (occupied[m] <= 0.5) {
      curve[d] = 1.0 - occupied[m];
    } else {
      double some_empty = 0.0;
      for (int j = 0; j < m; ++j) some_empty += occupied[j];
      curve[d] = some_empty;
    }
  }
  return curve;
}

double recall_probability(int m, int d) {
  check_m_d(m, d);
  if (d < m) return 1.0;
  return recall_curve(m, d)[d];
}

double recall_probability_inclusion_exclusion(int m, int d) {
  check_m_d(m, d);
  if (d < m) return 1.0;
  double sum = 0.0;
  double carry = 0.0;
  double binom = 1.0;
  for (int k = 1; k <= m; ++k) {
    binom = binom * (m - k + 1) / k;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    const double term = sign * binom * std::pow(1.0 - static_cast<double>(k) / m, d);
    const double y = term - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double recall_probability_distinct_positions(int m, int l, int d) {
  check_m_d(m, d);
  if (l < 1) throw InvalidInput("substring length must be >= 1");
  const int total = m * l;
  if (d > total) throw InvalidInput("more differing bits than descriptor bits");
  if (d < m) return 1.0;

  // all_hit[r]: probability that the groups processed so far each received
  // at least one error, with r errors left for the remaining groups.
  std::vector<double> all_hit(static_cast<std::size_t>(d) + 1, 0.0);
  all_hit[d] = 1.0;
  for (int g = 0; g < m; ++g) {
    const int slots = total - g * l;  // positions not yet assigned to a group
    std::vector<double> next(all_hit.size(), 0.0);
    for (int r = 1; r <= d; ++r) {
      if (all_hit[r] == 0.0) continue;
      for (int j = 1; j <= std::min(l, r); ++j) {
        if (r - j > slots - l) continue;
        const double log_p = log_choose(l, j) + log_choose(slots - l, r - j) -
                             log_choose(slots, r);
        next[r - j] += all_hit[r] * std::exp(log_p);
      }
    }
    all_hit.swap(next);
  }
  return 1.0 - all_hit[0];
}

std::vector<double> distance_pmf(const DistanceModel& model) {
  if (!(model.stddev > 0.0)) {
    throw InvalidInput("distance model stddev must be positive");
  }
  std::vector<double> pmf(kDescriptorBits + 1);
  double total = 0.0;
  for (std::size_t d = 0; d < pmf.size(); ++d) {
    const double z = (static_cast<double>(d) - model.mean) / model.stddev;
    pmf[d] = std::exp(-0.5 * z * z);
    total += pmf[d];
  }
  if (!(total > 0.0)) {
    throw InvalidInput("distance model has no mass on [0, 256]");
  }
  for (double& p : pmf) p /= total;
  return pmf;
}

double accuracy_R(int m, int L, const DistanceModel& inlier) {
  return weighted_recall(m, L, inlier);
}

double complexity_E(int m, int L, const DistanceModel& outlier) {
  return weighted_recall(m, L, outlier);
}

std::vector<TradeoffPoint> tradeoff_curve(std::span<const int> m_values, int L,
                                          const DistanceModel& inlier,
                                          const DistanceModel& outlier) {
  std::vector<TradeoffPoint> out;
  out.reserve(m_values.size());
  for (int m : m_values) {
    out.push_back({m, accuracy_R(m, L, inlier), complexity_E(m, L, outlier)});
  }
  return out;
}

void write_recall_csv(std::ostream& out, std::span<const int> m_values, int d_max) {
  out << "m,d,p_recall\n";
  out.precision(17);
  for (int m : m_values) {
    const std::vector<double> curve = recall_curve(m, d_max);
    for (int d = 0; d <= d_max; ++d) out << m << ',' << d << ',' << curve[d] << '\n';
  }
}

void write_tradeoff_csv(std::ostream& out, std::span<const TradeoffPoint> points) {
  out << "m,R,E\n";
  out.precision(17);
  for (const auto& p : points) out << p.m << ',' << p.R << ',' << p.E << '\n';
}

CurveFiles emit_curves(const std::filesystem::path& dir, std::span<const int> m_values,
                       int d_max, int L, const DistanceModel& inlier,
                       const DistanceModel& outlier) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  CurveFiles files{dir / "recall.csv", dir / "tradeoff.csv"};
  const auto points = tradeoff_curve(m_values, L, inlier, outlier);

  std::ofstream recall(files.recall);
  if (!recall) throw IoError("cannot open " + files.recall.string());
  write_recall_csv(recall, m_values, d_max);
  std::ofstream tradeoff(files.tradeoff);
  if (!tradeoff) throw IoError("cannot open " + files.tradeoff.string());
  write_tradeoff_csv(tradeoff, points);
  if (!recall.flush() || !tradeoff.flush()) throw IoError("write failed in " + dir.string());
  return files;
}

}  // namespace mild
