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

// `mild` command-line driver.
//
//   mild run DATASET --out DIR [--gt PAIRS] [flags]   loop-closure detection
//   mild synth --out FILE [--spec JSON | --preset loop] synthetic dataset
//   mild analyze --out DIR                            recall / tradeoff curves
//   mild gt-convert MATRIX --out PAIRS                dense matrix -> pair list
//   mild bench [flags]                                synthetic timing harness
//
// `--config FILE` reads TOML/INI; keys under a [run] or [bench] section are
// the long flag names. Command-line flags override the file.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mild/analysis.hpp"
#include "mild/dataset_io.hpp"
#include "mild/error.hpp"
#include "mild/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunFlags {
  mild::RunConfig cfg;
  std::string likelihood = "above_mean";
  std::string neighborhood = "max";
  std::size_t bucket_cap = mild::kDefaultBucketCap;

  mild::RunConfig resolve() const {
    mild::RunConfig c = cfg;
    c.bucket_cap = bucket_cap == 0 ? mild::kUnboundedBucket : bucket_cap;
    // Reuse the JSON enum parsing so names stay in one place.
    const auto enums = mild::run_config_from_json({{"likelihood", likelihood},
                                                   {"neighborhood", neighborhood}});
    c.bayes.orientation = enums.bayes.orientation;
    c.bayes.combiner = enums.bayes.combiner;
    c.validate();
    return c;
  }
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  auto& c = f.cfg;
  app->add_option("--substrings,-m", c.substring_count, "Substring count m (divides 256, >= 4)")
      ->capture_default_str();
  app->add_option("--d0", c.similarity.d0, "Hamming cutoff for feature similarity")
      ->capture_default_str();
  app->add_option("--sigma", c.similarity.sigma, "Similarity bandwidth")->capture_default_str();
  app->add_option("--p-stay", c.bayes.p_stay, "Loop persistence probability")->capture_default_str();
  app->add_option("--p-leak", c.bayes.p_leak, "Loop onset probability")->capture_default_str();
  app->add_option("--window", c.bayes.window, "Neighborhood half-width")->capture_default_str();
  app->add_option("--null-likelihood", c.bayes.null_likelihood, "No-loop likelihood L0")
      ->capture_default_str();
  app->add_option("--threshold", c.bayes.threshold, "Detection threshold P0 (strict >)")
      ->capture_default_str();
  app->add_option("--prior-new", c.bayes.prior_new, "Prior for newly eligible candidates")
      ->capture_default_str();
  app->add_option("--likelihood", f.likelihood, "Likelihood orientation")
      ->check(CLI::IsMember({"above_mean", "literal"}))
      ->capture_default_str();
  app->add_option("--neighborhood", f.neighborhood, "Neighborhood combiner")
      ->check(CLI::IsMember({"max", "noisy_or"}))
      ->capture_default_str();
  app->add_option("--exclusion-window,-W", c.exclusion_window, "Recent frames excluded")
      ->capture_default_str();
  app->add_option("--bucket-cap", f.bucket_cap, "Bucket capacity, 0 = unbounded")
      ->capture_default_str();
  app->add_option("--workers,-j", c.workers, "Threads for similarity scoring")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_flag("--brute-force", c.brute_force, "Score with the exact all-pairs loop");
  app->add_option("--pointer-size", c.pointer_size, "Bytes per bucket pointer in the memory model")
      ->capture_default_str();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw mild::IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw mild::IoError("cannot open " + path.string());
  return json::parse(in);
}

mild::DistanceModel model_from(const json& j, const char* key, mild::DistanceModel def) {
  if (!j.contains(key)) return def;
  const auto& m = j.at(key);
  return {m.value("mean", def.mean), m.value("stddev", def.stddev)};
}

mild::SyntheticSpec spec_from_json(const json& j) {
  mild::SyntheticSpec s;
  s.n_images = j.value("n_images", s.n_images);
  s.features_per_image = j.value("features_per_image", s.features_per_image);
  s.inlier_fraction = j.value("inlier_fraction", s.inlier_fraction);
  s.inlier_model = model_from(j, "inlier_model", s.inlier_model);
  s.outlier_model = model_from(j, "outlier_model", s.outlier_model);
  s.max_flips = j.value("max_flips", s.max_flips);
  s.rng_seed = j.value("seed", s.rng_seed);
  for (const auto& lp : j.value("loop_pairs", json::array())) {
    mild::LoopPair pair{lp.at(0).get<std::uint32_t>(), lp.at(1).get<std::uint32_t>(), {}};
    if (lp.size() > 2) pair.inlier_fraction = lp.at(2).get<double>();
    s.loop_pairs.push_back(pair);
  }
  return s;
}

json spec_to_json(const mild::SyntheticSpec& s) {
  json pairs = json::array();
  for (const auto& lp : s.loop_pairs) {
    json p = {lp.query, lp.candidate};
    if (lp.inlier_fraction) p.push_back(*lp.inlier_fraction);
    pairs.push_back(p);
  }
  return {{"n_images", s.n_images},
          {"features_per_image", s.features_per_image},
          {"inlier_fraction", s.inlier_fraction},
          {"inlier_model", {{"mean", s.inlier_model.mean}, {"stddev", s.inlier_model.stddev}}},
          {"outlier_model", {{"mean", s.outlier_model.mean}, {"stddev", s.outlier_model.stddev}}},
          {"max_flips", s.max_flips},
          {"seed", s.rng_seed},
          {"loop_pairs", pairs}};
}

const std::vector<int> kCurveSubstringCounts = {1, 2, 4, 8, 16, 32, 64};

int cmd_run(const RunFlags& flags, const std::string& dataset, const std::string& gt_path,
            const std::string& out_dir) {
  auto cfg = flags.resolve();
  cfg.dataset_path = dataset;
  cfg.ground_truth_path = gt_path;
  cfg.output_dir = out_dir;

  const auto ds = mild::read_dataset(fs::path(dataset));
  if (ds.images.empty()) throw mild::InvalidInput("dataset " + dataset + " has no images");
  std::optional<mild::GroundTruth> gt;
  if (!gt_path.empty()) gt = mild::load_ground_truth(gt_path, ds.images.size());

  fs::create_directories(out_dir);
  write_json(fs::path(out_dir) / "config.json", mild::to_json(cfg));
  const auto report = mild::run_lcd(ds, cfg);
  mild::export_matrices(report, out_dir);
  const auto summary = mild::report_to_json(report, gt ? &*gt : nullptr);
  write_json(fs::path(out_dir) / "report.json", summary);
  mild::emit_curves(out_dir, kCurveSubstringCounts, 256, cfg.similarity.d0);

  const auto& t = summary["timing_ms"];
  std::printf("%zu frames, %zu detections, mean %.3f ms/frame (median %.3f)\n",
              report.frames.size(), summary["detections"].size(),
              t["mean_total"].get<double>(), t["median_total"].get<double>());
  if (gt) {
    const auto& m = summary["metrics"];
    std::printf("precision %.4f recall %.4f recall@100%%P %.4f\n", m["precision"].get<double>(),
                m["recall"].get<double>(), m["recall_at_full_precision"].get<double>());
  }
  std::printf("wrote %s\n", out_dir.c_str());
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& preset, std::optional<std::uint64_t> seed,
              const std::string& out, std::string gt_out) {
  mild::SyntheticSpec spec;
  if (!spec_path.empty()) {
    spec = spec_from_json(read_json(spec_path));
  } else if (preset == "loop") {
    spec = mild::loop_benchmark_spec();
  }
  if (seed) spec.rng_seed = *seed;
  const auto [ds, gt] = mild::generate_synthetic(spec);
  mild::write_dataset(ds, fs::path(out));
  if (gt_out.empty()) gt_out = fs::path(out).replace_extension(".pairs.txt").string();
  mild::write_ground_truth(gt, fs::path(gt_out));
  write_json(fs::path(out).replace_extension(".spec.json"), spec_to_json(spec));
  std::printf("%zu images x %zu features, %zu loop pairs -> %s, %s\n", ds.images.size(),
              spec.features_per_image, gt.size(), out.c_str(), gt_out.c_str());
  return 0;
}

int cmd_analyze(const std::string& out_dir, std::vector<int> ms, int d_max, int L,
                const mild::DistanceModel& inlier, const mild::DistanceModel& outlier) {
  const auto files = mild::emit_curves(out_dir, ms, d_max, L, inlier, outlier);
  for (const auto& p : mild::tradeoff_curve(ms, L, inlier, outlier)) {
    std::printf("m=%-3d R=%.6f E=%.6g\n", p.m, p.R, p.E);
  }
  std::printf("wrote %s, %s\n", files.recall.c_str(), files.tradeoff.c_str());
  return 0;
}

int cmd_gt_convert(const std::string& matrix, const std::string& out) {
  std::ifstream in(matrix);
  if (!in) throw mild::IoError("cannot open " + matrix);
  const auto gt = mild::matrix_to_pairs(in);
  mild::write_ground_truth(gt, fs::path(out));
  std::printf("%zu pairs -> %s\n", gt.size(), out.c_str());
  return 0;
}

int cmd_bench(const RunFlags& flags, std::size_t images, std::size_t features, std::uint64_t seed,
              std::size_t brute_frames, const std::string& out) {
  const auto cfg = flags.resolve();
  mild::SyntheticSpec spec;
  spec.n_images = images;
  spec.features_per_image = features;
  spec.rng_seed = seed;
  const auto [ds, gt] = mild::generate_synthetic(spec);
  const auto report = mild::run_lcd(ds, cfg);
  const auto t = mild::summarize_timing(report);

  json result = {{"images", images},
                 {"features_per_image", features},
                 {"workers", cfg.workers},
                 {"scope", "index query + inference + insert, extraction excluded"},
                 {"mean_ms", t.mean_ms},
                 {"median_ms", t.median_ms},
                 {"max_ms", t.max_ms},
                 {"memory_model_mib", report.memory_model_bytes / (1024.0 * 1024.0)}};

  // Exact all-pairs scoring of the final frames for a speedup figure.
  brute_frames = std::min(brute_frames, ds.images.size());
  if (brute_frames > 0) {
    using Clock = std::chrono::steady_clock;
    double brute_ms = 0.0, index_ms = 0.0;
    for (std::size_t n = ds.images.size() - brute_frames; n < ds.images.size(); ++n) {
      const std::size_t limit = n > cfg.exclusion_window ? n - cfg.exclusion_window : 0;
      const auto t0 = Clock::now();
      double sink = 0.0;
      for (std::size_t k = 0; k < limit; ++k) {
        sink += mild::exact_image_similarity(ds.images[n], ds.images[k], cfg.similarity);
      }
      brute_ms += std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      index_ms += report.frames[n].timing.similarity_ms;
      if (sink < 0) std::printf("unreachable\n");
    }
    result["brute_force_frames"] = brute_frames;
    result["brute_force_similarity_ms"] = brute_ms / static_cast<double>(brute_frames);
    result["index_similarity_ms"] = index_ms / static_cast<double>(brute_frames);
    result["speedup"] = index_ms > 0 ? brute_ms / index_ms : 0.0;
  }
  std::cout << result.dump(2) << '\n';
  if (!out.empty()) write_json(out, result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MILD: multi-index hashing loop-closure detection"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file; keys under [run] or [bench] mirror the flags");
  app.fallthrough();

  RunFlags run_flags;
  std::string dataset, gt_path, out_dir;
  auto* run = app.add_subcommand("run", "Run loop-closure detection on a descriptor file");
  add_run_flags(run, run_flags);
  run->add_option("dataset", dataset, "Descriptor file")->required()->check(CLI::ExistingFile);
  run->add_option("--gt", gt_path, "Ground-truth pair list")->check(CLI::ExistingFile);
  run->add_option("--out,-o", out_dir, "Run directory")->required();

  std::string spec_path, preset, synth_out, synth_gt;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic descriptor file");
  auto* spec_opt = synth->add_option("--spec", spec_path, "JSON generator spec")
                       ->check(CLI::ExistingFile);
  synth->add_option("--preset", preset, "Built-in spec")
      ->check(CLI::IsMember({"loop"}))
      ->excludes(spec_opt);
  synth->add_option("--seed", synth_seed, "Override the spec's RNG seed");
  synth->add_option("--out,-o", synth_out, "Output descriptor file")->required();
  synth->add_option("--gt", synth_gt, "Output pair list (default OUT.pairs.txt)");

  std::string analyze_out;
  std::vector<int> analyze_ms = kCurveSubstringCounts;
  int d_max = 256, L = 60;
  mild::DistanceModel inlier = mild::kInlierDistanceModel, outlier = mild::kOutlierDistanceModel;
  auto* analyze = app.add_subcommand("analyze", "Write recall-probability and tradeoff curves");
  analyze->add_option("--out,-o", analyze_out, "Output directory")->required();
  analyze->add_option("--m", analyze_ms, "Substring counts")->capture_default_str();
  analyze->add_option("--d-max", d_max, "Largest distance in recall.csv")
      ->check(CLI::Range(0, 256))
      ->capture_default_str();
  analyze->add_option("--L", L, "Distance threshold for R and E")
      ->check(CLI::Range(0, 256))
      ->capture_default_str();
  analyze->add_option("--inlier-mean", inlier.mean)->capture_default_str();
  analyze->add_option("--inlier-stddev", inlier.stddev)->capture_default_str();
  analyze->add_option("--outlier-mean", outlier.mean)->capture_default_str();
  analyze->add_option("--outlier-stddev", outlier.stddev)->capture_default_str();

  std::string matrix_path, pairs_out;
  auto* convert = app.add_subcommand("gt-convert", "Convert an N x N ground-truth matrix to pairs");
  convert->add_option("matrix", matrix_path, "Text matrix")->required()->check(CLI::ExistingFile);
  convert->add_option("--out,-o", pairs_out, "Output pair list")->required();

  RunFlags bench_flags;
  std::size_t bench_images = 1000, bench_features = 800, brute_frames = 3;
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Time the pipeline on a synthetic database");
  add_run_flags(bench, bench_flags);
  bench->add_option("--images", bench_images)->capture_default_str();
  bench->add_option("--features", bench_features)->capture_default_str();
  bench->add_option("--seed", bench_seed)->capture_default_str();
  bench->add_option("--brute-force-frames", brute_frames, "Final frames re-scored exactly")
      ->capture_default_str();
  bench->add_option("--out,-o", bench_out, "Also write the result JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags, dataset, gt_path, out_dir);
    if (synth->parsed()) {
      if (spec_path.empty() && preset.empty()) {
        std::fprintf(stderr, "synth: one of --spec or --preset is required\n");
        return 2;
      }
      return cmd_synth(spec_path, preset, synth_seed, synth_out, synth_gt);
    }
    if (analyze->parsed()) return cmd_analyze(analyze_out, analyze_ms, d_max, L, inlier, outlier);
    if (convert->parsed()) return cmd_gt_convert(matrix_path, pairs_out);
    if (bench->parsed()) {
      return cmd_bench(bench_flags, bench_images, bench_features, bench_seed, brute_frames,
                       bench_out);
    }
  } catch (const mild::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
