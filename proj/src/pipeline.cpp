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

#include "mild/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <set>
#include <system_error>
#include <utility>

#include "mild/error.hpp"

namespace mild {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double, std::milli>(to - from).count();
}

const char* to_string(LikelihoodOrientation o) {
  return o == LikelihoodOrientation::kAboveMean ? "above_mean" : "literal";
}

const char* to_string(NeighborhoodCombiner c) {
  return c == NeighborhoodCombiner::kMax ? "max" : "noisy_or";
}

LikelihoodOrientation orientation_from(const std::string& s) {
  if (s == "above_mean") return LikelihoodOrientation::kAboveMean;
  if (s == "literal") return LikelihoodOrientation::kLiteral;
  throw InvalidInput("unknown likelihood orientation '" + s + "'");
}

NeighborhoodCombiner combiner_from(const std::string& s) {
  if (s == "max") return NeighborhoodCombiner::kMax;
  if (s == "noisy_or") return NeighborhoodCombiner::kNoisyOr;
  throw InvalidInput("unknown neighborhood combiner '" + s + "'");
}

ScoreVector brute_force_scores(const DescriptorDataset& ds, std::size_t n, std::size_t limit,
                               const SimilarityParams& p) {
  ScoreVector scores(limit, 0.0);
  const auto& query = ds.images[n];
  if (query.empty()) return scores;
  for (std::size_t k = 0; k < limit; ++k) {
    if (!ds.images[k].empty()) scores[k] = exact_image_similarity(query, ds.images[k], p);
  }
  return scores;
}

void write_matrix(const std::filesystem::path& path, std::size_t n,
                  const std::function<double(std::size_t, std::size_t)>& entry) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(10);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out << ',';
      out << entry(i, j);
    }
    out << '\n';
  }
  if (!out.flush()) throw IoError("write failed: " + path.string());
}

}  // namespace

void RunConfig::validate() const {
  SubstringConfig cfg(substring_count);
  if (!cfg.indexable()) throw InvalidInput("substring count too small to index (need m >= 4)");
  similarity.validate();
  bayes.validate();
  if (bucket_cap == 0) throw InvalidInput("bucket_cap must be positive");
  if (workers == 0) throw InvalidInput("workers must be positive");
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["substring_count"] = cfg.substring_count;
  j["substring_length"] = kDescriptorBits / cfg.substring_count;
  j["d0"] = cfg.similarity.d0;
  j["sigma"] = cfg.similarity.sigma;
  j["p_stay"] = cfg.bayes.p_stay;
  j["p_leak"] = cfg.bayes.p_leak;
  j["neighborhood_window"] = cfg.bayes.window;
  j["null_likelihood"] = cfg.bayes.null_likelihood;
  j["threshold"] = cfg.bayes.threshold;
  j["prior_new"] = cfg.bayes.prior_new;
  j["likelihood"] = to_string(cfg.bayes.orientation);
  j["neighborhood"] = to_string(cfg.bayes.combiner);
  j["exclusion_window"] = cfg.exclusion_window;
  j["bucket_cap"] = cfg.bucket_cap == kUnboundedBucket ? nlohmann::json(nullptr)
                                                        : nlohmann::json(cfg.bucket_cap);
  j["workers"] = cfg.workers;
  j["brute_force"] = cfg.brute_force;
  j["pointer_size"] = cfg.pointer_size;
  j["dataset"] = cfg.dataset_path;
  j["ground_truth"] = cfg.ground_truth_path;
  j["output_dir"] = cfg.output_dir;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.substring_count = j.value("substring_count", c.substring_count);
  c.similarity.d0 = j.value("d0", c.similarity.d0);
  c.similarity.sigma = j.value("sigma", c.similarity.sigma);
  c.bayes.p_stay = j.value("p_stay", c.bayes.p_stay);
  c.bayes.p_leak = j.value("p_leak", c.bayes.p_leak);
  c.bayes.window = j.value("neighborhood_window", c.bayes.window);
  c.bayes.null_likelihood = j.value("null_likelihood", c.bayes.null_likelihood);
  c.bayes.threshold = j.value("threshold", c.bayes.threshold);
  c.bayes.prior_new = j.value("prior_new", c.bayes.prior_new);
  if (j.contains("likelihood")) c.bayes.orientation = orientation_from(j["likelihood"]);
  if (j.contains("neighborhood")) c.bayes.combiner = combiner_from(j["neighborhood"]);
  c.exclusion_window = j.value("exclusion_window", c.exclusion_window);
  if (j.contains("bucket_cap")) {
    c.bucket_cap = j["bucket_cap"].is_null() ? kUnboundedBucket
                                              : j["bucket_cap"].get<std::size_t>();
  }
  c.workers = j.value("workers", c.workers);
  c.brute_force = j.value("brute_force", c.brute_force);
  c.pointer_size = j.value("pointer_size", c.pointer_size);
  c.dataset_path = j.value("dataset", c.dataset_path);
  c.ground_truth_path = j.value("ground_truth", c.ground_truth_path);
  c.output_dir = j.value("output_dir", c.output_dir);
  return c;
}

std::vector<std::vector<std::uint32_t>> RunReport::detections() const {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.detections);
  return out;
}

RunReport run_lcd(const DescriptorDataset& ds, const RunConfig& cfg) {
  cfg.validate();
  MultiIndexTables index(SubstringConfig(cfg.substring_count), cfg.bucket_cap);
  RunReport report;
  report.config = cfg;
  report.frames.reserve(ds.images.size());

  BeliefState state;
  const ApproxOptions base{.candidate_limit = 0, .workers = cfg.workers};
  for (std::size_t n = 0; n < ds.images.size(); ++n) {
    FrameRecord rec;
    const auto t0 = Clock::now();
    const std::size_t limit = n > cfg.exclusion_window ? n - cfg.exclusion_window : 0;
    if (cfg.brute_force) {
      rec.scores = brute_force_scores(ds, n, limit, cfg.similarity);
    } else {
      ApproxOptions opts = base;
      opts.candidate_limit = limit;
      QueryStats stats;
      rec.scores = approx_similarity(index, ds.images[n], cfg.similarity, opts, &stats);
      rec.distance_computations = stats.distance_computations;
    }
    const auto t1 = Clock::now();
    if (limit > 0) {
      state = posterior_update(state, rec.scores, cfg.bayes);
      rec.detections = detect(state, cfg.bayes);
    }
    state.t = static_cast<std::int64_t>(n);
    rec.posterior = state.posterior;
    const auto t2 = Clock::now();
    index.insert_image(static_cast<std::uint32_t>(n), ds.images[n]);
    const auto t3 = Clock::now();

    rec.timing = {elapsed_ms(t0, t1), elapsed_ms(t1, t2), elapsed_ms(t2, t3), elapsed_ms(t0, t3)};
    report.frames.push_back(std::move(rec));
  }
  report.memory_model_bytes = index.memory_footprint(cfg.pointer_size);
  report.skipped_insertions = index.skipped_insertions();
  return report;
}

PrecisionRecall precision_recall(const std::vector<std::vector<std::uint32_t>>& detections,
                                 const GroundTruth& gt, Granularity granularity) {
  PrecisionRecall pr;
  std::size_t relevant = 0;
  if (granularity == Granularity::kPair) {
    relevant = gt.size();
    for (std::size_t n = 0; n < detections.size(); ++n) {
      for (std::uint32_t k : detections[n]) {
        if (gt.contains(static_cast<std::uint32_t>(n), k)) {
          ++pr.true_positives;
        } else {
          ++pr.false_positives;
        }
      }
    }
  } else {
    std::set<std::uint32_t> loop_frames;
    for (const auto& [q, c] : gt.pairs) loop_frames.insert(q);
    relevant = loop_frames.size();
    for (std::size_t n = 0; n < detections.size(); ++n) {
      if (detections[n].empty()) continue;
      const bool hit = std::any_of(detections[n].begin(), detections[n].end(), [&](auto k) {
        return gt.contains(static_cast<std::uint32_t>(n), k);
      });
      ++(hit ? pr.true_positives : pr.false_positives);
    }
  }
  const std::size_t positives = pr.true_positives + pr.false_positives;
  pr.precision = positives == 0 ? 1.0
                                 : static_cast<double>(pr.true_positives) /
                                       static_cast<double>(positives);
  pr.recall = relevant == 0 ? 0.0
                            : static_cast<double>(pr.true_positives) /
                                  static_cast<double>(relevant);
  return pr;
}

double recall_at_full_precision(const RunReport& report, const GroundTruth& gt) {
  if (gt.size() == 0) return 0.0;
  std::vector<std::pair<double, bool>> scored;
  for (std::size_t n = 0; n < report.frames.size(); ++n) {
    const auto& post = report.frames[n].posterior;
    for (std::size_t k = 0; k < post.size(); ++k) {
      scored.emplace_back(post[k], gt.contains(static_cast<std::uint32_t>(n),
                                               static_cast<std::uint32_t>(k)));
    }
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  // Lower the threshold one distinct posterior value at a time; stop at the
  // first value shared with a false pair.
  std::size_t tp = 0;
  for (std::size_t i = 0; i < scored.size();) {
    std::size_t j = i;
    bool has_false = false;
    std::size_t group_tp = 0;
    for (; j < scored.size() && scored[j].first == scored[i].first; ++j) {
      if (scored[j].second) {
        ++group_tp;
      } else {
        has_false = true;
      }
    }
    if (has_false) break;
    tp += group_tp;
    i = j;
  }
  return static_cast<double>(tp) / static_cast<double>(gt.size());
}

std::vector<SweepRow> precision_recall_sweep(const RunReport& report, const GroundTruth& gt,
                                             const std::vector<double>& thresholds) {
  std::vector<SweepRow> rows;
  rows.reserve(thresholds.size());
  std::vector<std::vector<std::uint32_t>> dets(report.frames.size());
  for (double th : thresholds) {
    for (std::size_t n = 0; n < report.frames.size(); ++n) {
      dets[n].clear();
      const auto& post = report.frames[n].posterior;
      for (std::size_t k = 0; k < post.size(); ++k) {
        if (post[k] > th) dets[n].push_back(static_cast<std::uint32_t>(k));
      }
    }
    rows.push_back({th, precision_recall(dets, gt)});
  }
  return rows;
}

TimingSummary summarize_timing(const RunReport& report) {
  TimingSummary s;
  if (report.frames.size() < 2) return s;
  std::vector<double> totals;
  totals.reserve(report.frames.size() - 1);
  for (std::size_t n = 1; n < report.frames.size(); ++n) {
    totals.push_back(report.frames[n].timing.total_ms);
  }
  s.frames = totals.size();
  double sum = 0.0;
  for (double t : totals) sum += t;
  s.mean_ms = sum / static_cast<double>(totals.size());
  s.max_ms = *std::max_element(totals.begin(), totals.end());
  std::sort(totals.begin(), totals.end());
  const std::size_t mid = totals.size() / 2;
  s.median_ms = totals.size() % 2 ? totals[mid] : 0.5 * (totals[mid - 1] + totals[mid]);
  return s;
}

void export_matrices(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto& frames = report.frames;
  const std::size_t n = frames.size();

  write_matrix(dir / "similarity.csv", n, [&](std::size_t i, std::size_t j) {
    const auto& s = frames[j].scores;
    return i < s.size() ? s[i] : 0.0;
  });
  write_matrix(dir / "posterior.csv", n, [&](std::size_t i, std::size_t j) {
    const auto& p = frames[j].posterior;
    return i < p.size() ? p[i] : 0.0;
  });
  write_matrix(dir / "detections.csv", n, [&](std::size_t i, std::size_t j) {
    const auto& d = frames[j].detections;
    return std::find(d.begin(), d.end(), i) != d.end() ? 1.0 : 0.0;
  });
}

nlohmann::json report_to_json(const RunReport& report, const GroundTruth* gt) {
  nlohmann::json j;
  j["config"] = to_json(report.config);
  j["frames"] = report.frames.size();

  const TimingSummary t = summarize_timing(report);
  double sim = 0.0, inf = 0.0, ins = 0.0;
  for (std::size_t n = 1; n < report.frames.size(); ++n) {
    sim += report.frames[n].timing.similarity_ms;
    inf += report.frames[n].timing.inference_ms;
    ins += report.frames[n].timing.insert_ms;
  }
  const double denom = t.frames ? static_cast<double>(t.frames) : 1.0;
  j["timing_ms"] = {{"scope", "index query + inference + insert, extraction excluded"},
                    {"frames_measured", t.frames},
                    {"mean_total", t.mean_ms},
                    {"median_total", t.median_ms},
                    {"max_total", t.max_ms},
                    {"mean_similarity", sim / denom},
                    {"mean_inference", inf / denom},
                    {"mean_insert", ins / denom}};

  std::uint64_t distances = 0;
  for (const auto& f : report.frames) distances += f.distance_computations;
  j["distance_computations"] = {
      {"total", distances},
      {"mean_per_frame",
       report.frames.empty() ? 0.0
                             : static_cast<double>(distances) /
                                   static_cast<double>(report.frames.size())}};
  j["memory_model"] = {{"bytes", report.memory_model_bytes},
                       {"mib", report.memory_model_bytes / (1024.0 * 1024.0)},
                       {"pointer_size", report.config.pointer_size}};
  j["skipped_insertions"] = report.skipped_insertions;

  nlohmann::json dets = nlohmann::json::array();
  for (std::size_t n = 0; n < report.frames.size(); ++n) {
    for (auto k : report.frames[n].detections) dets.push_back({n, k});
  }
  j["detections"] = std::move(dets);

  if (gt) {
    const auto all = report.detections();
    const auto pair = precision_recall(all, *gt, Granularity::kPair);
    const auto event = precision_recall(all, *gt, Granularity::kEvent);
    j["metrics"] = {{"ground_truth_pairs", gt->size()},
                    {"precision", pair.precision},
                    {"recall", pair.recall},
                    {"true_positives", pair.true_positives},
                    {"false_positives", pair.false_positives},
                    {"event_precision", event.precision},
                    {"event_recall", event.recall},
                    {"recall_at_full_precision", recall_at_full_precision(report, *gt)}};
    std::vector<double> thresholds;
    for (int i = 1; i < 20; ++i) thresholds.push_back(i * 0.05);
    nlohmann::json sweep = nlohmann::json::array();
    for (const auto& row : precision_recall_sweep(report, *gt, thresholds)) {
      sweep.push_back({{"threshold", row.threshold},
                       {"precision", row.pr.precision},
                       {"recall", row.pr.recall}});
    }
    j["sweep"] = std::move(sweep);
  }
  return j;
}

}  // namespace mild
