/* Copyright 2026 The framecorr Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
// Command-line front end. Subcommands:
//
//   filter  frames + detections -> filtered detections (with origin field)
//   eval    detections + ground truth -> evaluation report
//   ssim    two frames -> SSIM score
//   synth   scenario description -> frames, detections, ground truth
//   bench   frames + detections (or synthetic input) -> processing time
//   sweep   evaluation at several half-window sizes
//
// Exit status: 0 success, 1 bad input or usage, 2 internal error.

#ifndef FRAMECORR_CLI_HPP_
#define FRAMECORR_CLI_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "framecorr/config.hpp"
#include "framecorr/correlator.hpp"
#include "framecorr/errors.hpp"
#include "framecorr/metrics.hpp"
#include "framecorr/netpbm.hpp"
#include "framecorr/pipeline.hpp"
#include "framecorr/records.hpp"
#include "framecorr/serialize.hpp"
#include "framecorr/similarity.hpp"
#include "framecorr/synth.hpp"

namespace framecorr {
namespace cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kInternalError = 2 };

namespace internal {

// Config file, then dedicated flags, then --set overrides.
class RunFlags {
 public:
  void Attach(CLI::App* app, bool with_groundtruth, bool with_output,
              bool with_half_window = true) {
    app->add_option("--config", config_file_, "Run configuration file (key = value)");
    app->add_option("--set", assignments_, "Override a configuration key: key=value");
    Add(app, "--frames", "frames", "Directory of frame images (000.pgm, 001.pgm, ...)");
    Add(app, "--detections", "detections", "Detection records");
    if (with_groundtruth) Add(app, "--groundtruth", "groundtruth", "Ground truth records");
    if (with_output) Add(app, "--output,-o", "output", "Output file (default: stdout)");
    if (with_half_window) {
      Add(app, "--half-window", "half_window", "Neighbor frames on each side");
    }
    Add(app, "--similarity-threshold", "similarity_threshold", "SSIM gate");
    Add(app, "--confidence-gate", "confidence_gate", "Minimum detector confidence (exclusive)");
    Add(app, "--fc-quorum", "fc_quorum", "Fixed-correlation quorum");
    Add(app, "--fill-quorum", "fill_quorum", "Frames needed to fill a missed detection");
    Add(app, "--fill-iou", "fill_iou", "IoU defining a missed-detection cluster");
    Add(app, "--correlation", "correlation", "similarity | fixed");
    Add(app, "--ssim-mode", "ssim_mode", "global | windowed");
  }

  RunConfig Build() const {
    RunConfig rc;
    if (!config_file_.empty()) {
      std::ifstream in(config_file_);
      if (!in) throw InputError(config_file_ + ": cannot open");
      rc.Load(in, config_file_);
    }
    for (const auto& [opt, key] : options_) {
      if (opt->count() > 0) rc.Set(key, values_.at(key), opt->get_name());
    }
    for (const std::string& a : assignments_) rc.SetAssignment(a, "--set");
    return rc;
  }

 private:
  void Add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    options_.emplace_back(app->add_option(flag, values_[key], help), key);
  }

  std::string config_file_;
  std::vector<std::string> assignments_;
  std::map<std::string, std::string> values_;
  std::vector<std::pair<CLI::Option*, std::string>> options_;
};

inline std::string Require(const std::string& value, const char* what) {
  if (value.empty()) throw InputError(std::string("missing ") + what);
  return value;
}

inline std::vector<std::vector<ScoredBox>> LoadDetections(
    const std::string& path, std::optional<std::int64_t> num_frames) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  return records::ParseDetections(in, path, num_frames);
}

inline std::vector<std::vector<GroundTruthBox>> LoadGroundTruth(
    const std::string& path, std::optional<std::int64_t> num_frames) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  return records::ParseGroundTruth(in, path, num_frames);
}

// Output file or the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw InputError(path + ": cannot open for writing");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

inline void WriteJsonFile(const std::string& path, const nlohmann::json& j,
                          std::ostream& fallback) {
  if (path.empty()) return;
  Sink sink(path, fallback);
  sink.get() << j.dump(2) << '\n';
}

inline void WriteFiltered(std::ostream& out, const FilteredFrame& f) {
  for (const ScoredBox& b : f.kept) records::WriteDetection(out, f.meta.frame_index, b, true);
  for (const ScoredBox& b : f.added) records::WriteDetection(out, f.meta.frame_index, b, true);
}

inline int RunFilter(const RunConfig& rc, std::ostream& out) {
  const IscuConfig cfg = rc.Resolve();
  const auto paths = netpbm::ListFrames(Require(rc.frames, "--frames"));
  const auto dets = LoadDetections(Require(rc.detections, "--detections"),
                                   static_cast<std::int64_t>(paths.size()));
  Sink sink(rc.output, out);
  Correlator correlator(cfg);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const GrayFrame frame = netpbm::ReadFile(paths[i]);
    const FrameMeta meta{frame.width, frame.height, std::int64_t(i)};
    try {
      if (auto r = correlator.Push(frame, MakeFrameDetections(meta, dets[i]))) {
        WriteFiltered(sink.get(), *r);
      }
    } catch (const InputError& e) {
      throw InputError(paths[i].string() + ": " + e.what());
    }
  }
  for (const FilteredFrame& f : correlator.Flush()) WriteFiltered(sink.get(), f);
  return kOk;
}

struct EvalOptions {
  std::vector<std::string> detections;
  std::vector<std::string> groundtruth;
  std::int64_t num_frames = 0;
  double iou = 0.5;
  double min_confidence = 0.0;
  std::optional<double> mpt_ms;
  std::string json;
};

inline int RunEval(const EvalOptions& o, std::ostream& out) {
  if (o.detections.size() != o.groundtruth.size() || o.detections.empty()) {
    throw InputError("eval needs one --groundtruth per --detections");
  }
  if (o.num_frames > 0 && o.detections.size() != 1) {
    throw InputError("--num-frames applies to a single sequence only");
  }
  Evaluator ev(o.iou);
  for (std::size_t s = 0; s < o.detections.size(); ++s) {
    std::optional<std::int64_t> n;
    if (o.num_frames > 0) n = o.num_frames;
    auto dets = LoadDetections(o.detections[s], n);
    auto gts = LoadGroundTruth(o.groundtruth[s], n);
    const std::size_t frames = std::max(dets.size(), gts.size());
    dets.resize(frames);
    gts.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
      std::vector<ScoredBox> kept;
      for (const ScoredBox& b : dets[i]) {
        if (b.confidence >= o.min_confidence) kept.push_back(b);
      }
      ev.AddFrame(o.groundtruth[s], kept, gts[i]);
    }
  }
  if (ev.frames() == 0) throw InputError("no frames to evaluate");
  if (o.mpt_ms) ev.SetMeanProcessingTime(*o.mpt_ms);
  const EvalReport report = ev.Report();
  WriteReportText(out, report);
  WriteJsonFile(o.json, ReportToJson(report), out);
  return kOk;
}

struct SsimOptions {
  std::string a, b;
  std::string mode = "global";
  bool full_resolution = false;
};

inline int RunSsim(const SsimOptions& o, std::ostream& out) {
  SsimParams p;
  if (o.mode == "windowed") {
    p.mode = SsimMode::kWindowed;
  } else if (o.mode != "global") {
    throw InputError("--mode must be 'global' or 'windowed'");
  }
  const GrayFrame a = netpbm::ReadFile(o.a);
  const GrayFrame b = netpbm::ReadFile(o.b);
  double score = 0.0;
  if (o.full_resolution) {
    score = Ssim(a, b, p);
  } else {
    if (a.width != b.width || a.height != b.height) {
      throw InputError(o.b + ": size differs from " + o.a);
    }
    score = Ssim(SsimSignature::Of(a, p), SsimSignature::Of(b, p), p);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f\n", score);
  out << buf;
  return kOk;
}

struct SynthOptions {
  std::string config;
  bool standard = false;
  std::uint64_t seed = 1;
  int num_frames = 1000;
  std::string out_dir;
  bool rgb = false;
};

inline ScenarioConfig LoadScenarioConfig(const SynthOptions& o) {
  if (o.standard == !o.config.empty()) {
    throw InputError("synth needs exactly one of --config or --standard");
  }
  if (o.standard) return StandardNoiseScenario(o.seed, o.num_frames);
  std::ifstream in(o.config);
  if (!in) throw InputError(o.config + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(o.config + ": " + e.what());
  }
  return ScenarioFromJson(j, o.config);
}

inline std::string FrameFileName(std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.%s", index, ext);
  return buf;
}

// Writes DIR/frames/NNNNNN.pgm (or .ppm), DIR/detections.txt,
// DIR/groundtruth.txt and DIR/scenario.json.
inline void WriteScenario(const std::filesystem::path& dir,
                          const ScenarioConfig& cfg, const Scenario& s,
                          bool rgb) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "frames");
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    const fs::path p = dir / "frames" / FrameFileName(i, rgb ? "ppm" : "pgm");
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InputError(p.string() + ": cannot open for writing");
    if (rgb) {
      netpbm::WritePpm(f, ToRgb(s.frames[i]));
    } else {
      netpbm::WritePgm(f, s.frames[i]);
    }
  }
  std::vector<std::vector<ScoredBox>> dets;
  for (const FrameDetections& fd : s.raw_detections) dets.push_back(fd.boxes);
  std::ofstream d(dir / "detections.txt");
  records::WriteDetections(d, dets);
  std::ofstream g(dir / "groundtruth.txt");
  records::WriteGroundTruth(g, s.ground_truth);
  std::ofstream j(dir / "scenario.json");
  j << ScenarioToJson(cfg).dump(2) << '\n';
}

inline int RunSynth(const SynthOptions& o, std::ostream& out) {
  const ScenarioConfig cfg = LoadScenarioConfig(o);
  const Scenario s = GenerateScenario(cfg);
  WriteScenario(Require(o.out_dir, "--out"), cfg, s, o.rgb);
  out << "wrote " << s.frames.size() << " frames to " << o.out_dir << '\n';
  return kOk;
}

struct BenchOptions {
  int synthetic = 0;
  int width = 1280;
  int height = 1080;
  std::uint64_t seed = 1;
  std::string json;
};

inline nlohmann::json BenchToJson(const BenchResult& r) {
  return {{"frames", r.frames},
          {"total_ms", r.total_ms},
          {"mpt_ms", r.mpt_ms},
          {"max_push_ms", r.max_push_ms},
          {"boxes_out", r.boxes_out}};
}

inline BenchResult Bench(const RunConfig& rc, const BenchOptions& o) {
  const IscuConfig cfg = rc.Resolve();
  if (o.synthetic > 0) {
    const ScenarioConfig sc = BenchScenario(o.seed, o.synthetic, o.width, o.height);
    const auto gt = TrackGroundTruth(sc);
    const auto dets = SimulateDetector(gt, sc).detections;
    FrameRenderer renderer(sc);
    int k = 0;
    return TimeCorrelator(cfg, [&](GrayFrame& frame, FrameDetections& fd) {
      if (k >= sc.n_frames) return false;
      frame = renderer.Render(k, gt[k]);
      fd = dets[k];
      ++k;
      return true;
    });
  }
  const auto paths = netpbm::ListFrames(Require(rc.frames, "--frames"));
  const auto dets = LoadDetections(Require(rc.detections, "--detections"),
                                   static_cast<std::int64_t>(paths.size()));
  std::size_t k = 0;
  return TimeCorrelator(cfg, [&](GrayFrame& frame, FrameDetections& fd) {
    if (k >= paths.size()) return false;
    frame = netpbm::ReadFile(paths[k]);
    fd = MakeFrameDetections({frame.width, frame.height, std::int64_t(k)}, dets[k]);
    ++k;
    return true;
  });
}

inline int RunBench(const RunConfig& rc, const BenchOptions& o, std::ostream& out) {
  const BenchResult r = Bench(rc, o);
  out << "frames = " << r.frames << '\n'
      << "total_ms = " << records::FormatReal(r.total_ms) << '\n'
      << "mpt_ms = " << records::FormatReal(r.mpt_ms) << '\n'
      << "max_push_ms = " << records::FormatReal(r.max_push_ms) << '\n';
  WriteJsonFile(o.json, BenchToJson(r), out);
  return kOk;
}

struct SweepOptions {
  std::vector<int> half_windows{1, 2, 3, 4};
  bool standard = false;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int num_frames = 1000;
  std::string json;
};

inline int RunSweep(const RunConfig& rc, const SweepOptions& o, std::ostream& out) {
  std::vector<Scenario> scenarios;
  if (o.standard) {
    for (std::uint64_t seed : o.seeds) {
      scenarios.push_back(GenerateScenario(StandardNoiseScenario(seed, o.num_frames)));
    }
  } else {
    Scenario s;
    s.frames = netpbm::ReadFrames(Require(rc.frames, "--frames"));
    const auto n = static_cast<std::int64_t>(s.frames.size());
    const auto dets = LoadDetections(Require(rc.detections, "--detections"), n);
    s.ground_truth = LoadGroundTruth(Require(rc.groundtruth, "--groundtruth"), n);
    for (std::int64_t i = 0; i < n; ++i) {
      const GrayFrame& f = s.frames[std::size_t(i)];
      s.raw_detections.push_back(MakeFrameDetections({f.width, f.height, i}, dets[std::size_t(i)]));
    }
    scenarios.push_back(std::move(s));
  }
  const auto points = SweepHalfWindow(scenarios, o.half_windows, rc);
  nlohmann::json j = nlohmann::json::array();
  for (const SweepPoint& p : points) {
    out << "half_window = " << p.half_window
        << "  sen = " << framecorr::internal::Fixed2(p.mean_sen)
        << "  pre = " << framecorr::internal::Fixed2(p.mean_pre)
        << "  f1 = " << framecorr::internal::Fixed2(p.mean_f1) << '\n';
    nlohmann::json reports = nlohmann::json::array();
    for (const EvalReport& r : p.reports) reports.push_back(ReportToJson(r));
    j.push_back({{"half_window", p.half_window},
                 {"mean_sen", p.mean_sen},
                 {"mean_pre", p.mean_pre},
                 {"mean_f1", p.mean_f1},
                 {"reports", reports}});
  }
  WriteJsonFile(o.json, j, out);
  return kOk;
}

}  // namespace internal

inline int RunCli(int argc, const char* const* argv, std::ostream& out,
                  std::ostream& err) {
  CLI::App app{"Temporal filtering and evaluation of video detections", "framecorr"};
  app.require_subcommand(1);

  internal::RunFlags filter_flags, bench_flags, sweep_flags;
  internal::EvalOptions eval_opts;
  internal::SsimOptions ssim_opts;
  internal::SynthOptions synth_opts;
  internal::BenchOptions bench_opts;
  internal::SweepOptions sweep_opts;

  CLI::App* filter = app.add_subcommand("filter", "Filter detections over a frame sequence");
  filter_flags.Attach(filter, false, true);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate detections against ground truth");
  eval->add_option("--detections", eval_opts.detections, "Detection records (repeatable)")->required();
  eval->add_option("--groundtruth", eval_opts.groundtruth, "Ground truth records (repeatable)")->required();
  eval->add_option("--num-frames", eval_opts.num_frames, "Sequence length (single sequence)");
  eval->add_option("--iou", eval_opts.iou, "IoU above which a detection matches");
  eval->add_option("--min-confidence", eval_opts.min_confidence, "Ignore detections below this score");
  eval->add_option("--mpt-ms", eval_opts.mpt_ms, "Mean processing time to include in the report");
  eval->add_option("--json", eval_opts.json, "Also write the report as JSON");

  CLI::App* ssim = app.add_subcommand("ssim", "SSIM between two frames");
  ssim->add_option("first", ssim_opts.a, "First frame")->required();
  ssim->add_option("second", ssim_opts.b, "Second frame")->required();
  ssim->add_option("--mode", ssim_opts.mode, "global | windowed");
  ssim->add_flag("--full-resolution", ssim_opts.full_resolution, "Skip downsampling");

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  synth->add_option("--config", synth_opts.config, "Scenario JSON");
  synth->add_flag("--standard", synth_opts.standard, "Use the standard noise scenario");
  synth->add_option("--seed", synth_opts.seed, "Seed for --standard");
  synth->add_option("--num-frames", synth_opts.num_frames, "Length for --standard");
  synth->add_option("--out", synth_opts.out_dir, "Output directory")->required();
  synth->add_flag("--rgb", synth_opts.rgb, "Write PPM frames instead of PGM");

  CLI::App* bench = app.add_subcommand("bench", "Measure correlator processing time per frame");
  bench_flags.Attach(bench, false, false);
  bench->add_option("--synthetic", bench_opts.synthetic, "Generate this many frames in memory");
  bench->add_option("--width", bench_opts.width, "Synthetic frame width");
  bench->add_option("--height", bench_opts.height, "Synthetic frame height");
  bench->add_option("--seed", bench_opts.seed, "Synthetic content seed");
  bench->add_option("--json", bench_opts.json, "Also write the result as JSON");

  CLI::App* sweep = app.add_subcommand("sweep", "Evaluate at several half-window sizes");
  sweep_flags.Attach(sweep, true, false, /*with_half_window=*/false);
  sweep->add_option("--half-window,--half-windows", sweep_opts.half_windows, "Sizes to try, comma separated")->delimiter(',');
  sweep->add_flag("--standard", sweep_opts.standard, "Use standard noise scenarios");
  sweep->add_option("--seeds", sweep_opts.seeds, "Seeds for --standard")->delimiter(',');
  sweep->add_option("--num-frames", sweep_opts.num_frames, "Length for --standard");
  sweep->add_option("--json", sweep_opts.json, "Also write the reports as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kInputError;
  }

  try {
    if (*filter) return internal::RunFilter(filter_flags.Build(), out);
    if (*eval) return internal::RunEval(eval_opts, out);
    if (*ssim) return internal::RunSsim(ssim_opts, out);
    if (*synth) return internal::RunSynth(synth_opts, out);
    if (*bench) return internal::RunBench(bench_flags.Build(), bench_opts, out);
    if (*sweep) return internal::RunSweep(sweep_flags.Build(), sweep_opts, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace cli
}  // namespace framecorr

#endif  // FRAMECORR_CLI_HPP_
