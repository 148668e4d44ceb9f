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
// Glue between the correlator, the evaluator and scenarios: raw vs filtered
// evaluation, window-size sweeps, and the timing harness.

#ifndef FRAMECORR_PIPELINE_HPP_
#define FRAMECORR_PIPELINE_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "framecorr/config.hpp"
#include "framecorr/correlator.hpp"
#include "framecorr/metrics.hpp"
#include "framecorr/synth.hpp"

namespace framecorr {

// Detector boxes with confidence strictly above the gate.
inline std::vector<std::vector<ScoredBox>> GatedBoxes(
    std::span<const FrameDetections> frames, double gate) {
  std::vector<std::vector<ScoredBox>> out(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (const ScoredBox& b : frames[i].boxes) {
      if (b.confidence > gate) out[i].push_back(b);
    }
  }
  return out;
}

inline std::vector<std::vector<ScoredBox>> OutputBoxes(
    std::span<const FilteredFrame> frames) {
  std::vector<std::vector<ScoredBox>> out;
  out.reserve(frames.size());
  for (const FilteredFrame& f : frames) out.push_back(f.AllBoxes());
  return out;
}

inline EvalReport Evaluate(
    std::span<const std::vector<ScoredBox>> dets,
    std::span<const std::vector<GroundTruthBox>> gts,
    const std::string& sequence = "seq") {
  if (dets.size() != gts.size()) {
    throw InputError("detections and ground truth cover different frame counts");
  }
  Evaluator ev;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    ev.AddFrame(sequence, dets[i], gts[i]);
  }
  return ev.Report();
}

struct RawVsFiltered {
  EvalReport raw;
  EvalReport filtered;
};

inline RawVsFiltered CompareOnScenario(const Scenario& s, const IscuConfig& cfg) {
  const auto filtered = ProcessSequence(s.frames, s.raw_detections, cfg);
  RawVsFiltered out;
  out.raw = Evaluate(GatedBoxes(s.raw_detections, cfg.confidence_gate),
                     s.ground_truth);
  out.filtered = Evaluate(OutputBoxes(filtered), s.ground_truth);
  return out;
}

struct SweepPoint {
  int half_window = 0;
  std::vector<EvalReport> reports;  // one per scenario
  double mean_sen = 0.0;
  double mean_pre = 0.0;
  double mean_f1 = 0.0;
};

// Runs the correlator at each half-window size over every scenario. Unset
// quorums in base follow the window size.
inline std::vector<SweepPoint> SweepHalfWindow(
    std::span<const Scenario> scenarios, std::span<const int> half_windows,
    const RunConfig& base) {
  std::vector<SweepPoint> out;
  for (int hw : half_windows) {
    RunConfig rc = base;
    rc.iscu.half_window = hw;
    const IscuConfig cfg = rc.Resolve();
    SweepPoint point;
    point.half_window = hw;
    for (const Scenario& s : scenarios) {
      const auto filtered = ProcessSequence(s.frames, s.raw_detections, cfg);
      point.reports.push_back(Evaluate(OutputBoxes(filtered), s.ground_truth));
    }
    for (const EvalReport& r : point.reports) {
      point.mean_sen += r.sen.value_or(0.0);
      point.mean_pre += r.pre.value_or(0.0);
      point.mean_f1 += r.f1.value_or(0.0);
    }
    const double n = std::max<std::size_t>(1, point.reports.size());
    point.mean_sen /= n;
    point.mean_pre /= n;
    point.mean_f1 /= n;
    out.push_back(std::move(point));
  }
  return out;
}

struct BenchResult {
  std::int64_t frames = 0;
  double total_ms = 0.0;
  double mpt_ms = 0.0;
  double max_push_ms = 0.0;
  std::int64_t boxes_out = 0;
};

// Times the correlator only: next() supplies each frame and its detections
// outside the timed region. Returns false from next() to stop.
inline BenchResult TimeCorrelator(
    const IscuConfig& cfg,
    const std::function<bool(GrayFrame&, FrameDetections&)>& next) {
  using Clock = std::chrono::steady_clock;
  Correlator correlator(cfg);
  BenchResult r;
  GrayFrame frame;
  FrameDetections dets;
  Clock::duration total{};
  while (next(frame, dets)) {
    const auto t0 = Clock::now();
    auto out = correlator.Push(frame, dets);
    const auto dt = Clock::now() - t0;
    total += dt;
    r.max_push_ms = std::max(
        r.max_push_ms, std::chrono::duration<double, std::milli>(dt).count());
    if (out) r.boxes_out += static_cast<std::int64_t>(out->kept.size() + out->added.size());
    ++r.frames;
  }
  const auto t0 = Clock::now();
  for (const FilteredFrame& f : correlator.Flush()) {
    r.boxes_out += static_cast<std::int64_t>(f.kept.size() + f.added.size());
  }
  total += Clock::now() - t0;
  r.total_ms = std::chrono::duration<double, std::milli>(total).count();
  r.mpt_ms = MeanProcessingTime(r.total_ms, std::max<std::int64_t>(1, r.frames));
  return r;
}

// One polyp drifting across a frame of the given size, with transient
// spurious boxes; content for timing runs.
inline ScenarioConfig BenchScenario(std::uint64_t seed, int n_frames, int width,
                                    int height) {
  ScenarioConfig cfg;
  cfg.frame_width = width;
  cfg.frame_height = height;
  cfg.n_frames = n_frames;
  cfg.rng_seed = seed;
  cfg.transient_fp_rate = 0.25;
  cfg.tp_dropout_rate = 0.05;
  const double size = std::min(width, height) / 6.0;
  TrackSpec t;
  t.polyp_id = "p1";
  t.start = BoundingBox{std::round(width * 0.1), std::round(height * 0.3),
                        std::round(width * 0.1 + size),
                        std::round(height * 0.3 + size)};
  t.vx = (width * 0.7) / std::max(1, n_frames);
  t.vy = 0.0;
  t.wobble_amplitude = size * 0.05;
  cfg.tracks.push_back(t);
  return cfg;
}

}  // namespace framecorr

#endif  // FRAMECORR_PIPELINE_HPP_
