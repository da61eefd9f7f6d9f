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

/** \file pipeline.hpp
 *  \brief Online loop-closure detection driver and its evaluation metrics.
 *
 *  For each frame n, in order: score it against images 0 .. n-1-W (the W
 *  most recent frames are not eligible), update the per-candidate
 *  posteriors, record detections, then insert frame n into the index.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mild/bayes_filter.hpp"
#include "mild/dataset_io.hpp"
#include "mild/descriptor.hpp"
#include "mild/mih_index.hpp"
#include "mild/similarity.hpp"

namespace mild {

struct RunConfig {
  std::size_t substring_count = SubstringConfig::kDefaultCount;
  SimilarityParams similarity;
  BayesParams bayes;
  /// Number of most recent frames excluded from scoring and detection.
  std::size_t exclusion_window = 10;
  std::size_t bucket_cap = kDefaultBucketCap;
  unsigned workers = 1;
  /// Score with the exact double loop instead of the index.
  bool brute_force = false;
  /// Pointer size used by the memory model.
  std::size_t pointer_size = 8;

  std::string dataset_path;
  std::string ground_truth_path;
  std::string output_dir;

  /// Throws InvalidInput when a component invariant is violated.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults. Throws InvalidInput on unknown enum names.
RunConfig run_config_from_json(const nlohmann::json& j);

struct FrameTiming {
  double similarity_ms = 0.0;
  double inference_ms = 0.0;
  double insert_ms = 0.0;
  double total_ms = 0.0;
};

struct FrameRecord {
  ScoreVector scores;
  std::vector<double> posterior;
  std::vector<std::uint32_t> detections;
  FrameTiming timing;
  std::uint64_t distance_computations = 0;
};

struct RunReport {
  RunConfig config;
  std::vector<FrameRecord> frames;
  double memory_model_bytes = 0.0;
  std::size_t skipped_insertions = 0;

  std::vector<std::vector<std::uint32_t>> detections() const;
};

RunReport run_lcd(const DescriptorDataset& ds, const RunConfig& cfg);

enum class Granularity {
  /// Each (query, candidate) pair is scored separately.
  kPair,
  /// Each query frame is one event: a frame with detections is a true
  /// positive when any detected pair is in the ground truth; recall is over
  /// frames that have at least one ground-truth pair.
  kEvent,
};

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
};

/// `detections[n]` lists the candidate ids detected at frame n. Precision is
/// 1 when nothing is detected; recall is 0 for an empty ground truth.
PrecisionRecall precision_recall(const std::vector<std::vector<std::uint32_t>>& detections,
                                 const GroundTruth& gt,
                                 Granularity granularity = Granularity::kPair);

/// Highest recall over posterior thresholds that keep precision at 1.
double recall_at_full_precision(const RunReport& report, const GroundTruth& gt);

struct SweepRow {
  double threshold = 0.0;
  PrecisionRecall pr;
};

/// Precision/recall when detecting posterior > threshold, per threshold.
std::vector<SweepRow> precision_recall_sweep(const RunReport& report, const GroundTruth& gt,
                                             const std::vector<double>& thresholds);

struct TimingSummary {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double max_ms = 0.0;
  std::size_t frames = 0;
};

/// Per-frame totals, first (warm-up) frame excluded.
TimingSummary summarize_timing(const RunReport& report);

/// Writes similarity.csv, posterior.csv and detections.csv: n x n matrices
/// whose entry (i, j) is candidate i against query frame j. Throws IoError.
void export_matrices(const RunReport& report, const std::filesystem::path& dir);

/// Summary JSON: config, timing, counters, memory model, detections and,
/// when `gt` is given, metrics and a threshold sweep.
nlohmann::json report_to_json(const RunReport& report, const GroundTruth* gt = nullptr);

}  // namespace mild
