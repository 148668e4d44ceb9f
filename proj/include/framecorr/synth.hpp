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
// Deterministic synthetic scenarios: rendered luma frames, exact ground
// truth, and a simulated detector with transient false positives and missed
// detections.
//
// Randomness comes from std::mt19937_64 (fully specified by the C++
// standard) with the transforms in SplitRng below; std distributions are
// not used because their output is implementation-defined.

#ifndef FRAMECORR_SYNTH_HPP_
#define FRAMECORR_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "framecorr/errors.hpp"
#include "framecorr/geometry.hpp"
#include "framecorr/similarity.hpp"

namespace framecorr {

// mt19937_64 plus portable transforms. Uniform draws use the top 53 bits;
// normals use Box-Muller without caching.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  double Uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  bool Bernoulli(double p) { return Uniform() < p; }
  // Integer in [lo, hi].
  int UniformInt(int lo, int hi) {
    const double span = double(hi) - double(lo) + 1.0;
    return std::min(hi, lo + static_cast<int>(std::floor(Uniform() * span)));
  }
  double Normal() {
    const double u1 = 1.0 - Uniform();  // (0, 1]
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

struct TrackSpec {
  std::string polyp_id;
  BoundingBox start;          // box at first_frame
  double vx = 0.0;            // pixels per frame
  double vy = 0.0;
  double wobble_amplitude = 0.0;  // pixels, circular
  double wobble_period = 60.0;    // frames
  int first_frame = 0;
  int last_frame = -1;  // inclusive; -1 means the last frame
};

struct ScenarioConfig {
  int frame_width = 320;
  int frame_height = 240;
  int n_frames = 100;
  std::uint64_t rng_seed = 0;
  std::vector<TrackSpec> tracks;

  double transient_fp_rate = 0.0;  // new spurious boxes per frame, <= 1
  int fp_lifetime = 1;             // frames a spurious box persists
  int fp_lifetime_max = 0;         // > fp_lifetime draws uniformly in range
  int fp_clearance = 3;            // frames around a new FP kept free of overlap
  double fp_min_size = 0.05;       // fraction of frame dims
  double fp_max_size = 0.2;
  double tp_dropout_rate = 0.0;
  double box_jitter = 0.0;  // max coordinate offset, fraction of frame dims
  std::set<int> scene_breaks;

  double tp_confidence_mean = 0.8;
  double fp_confidence_mean = 0.5;
  double confidence_jitter = 0.1;  // standard deviation before clipping

  int LifetimeMax() const { return std::max(fp_lifetime, fp_lifetime_max); }

  void Validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (frame_width <= 0 || frame_height <= 0) {
      throw InputError("scenario frame dimensions must be positive");
    }
    if (n_frames < 0) throw InputError("n_frames must be non-negative");
    if (!unit(transient_fp_rate) || !unit(tp_dropout_rate)) {
      throw InputError("scenario rates must lie in [0, 1]");
    }
    if (!unit(tp_confidence_mean) || !unit(fp_confidence_mean) ||
        !(confidence_jitter >= 0.0)) {
      throw InputError("invalid confidence model");
    }
    if (!(box_jitter >= 0.0 && box_jitter <= 0.02)) {
      throw InputError("box_jitter must lie in [0, 0.02]");
    }
    if (fp_lifetime < 1) throw InputError("fp_lifetime must be >= 1");
    if (fp_clearance < 0) throw InputError("fp_clearance must be >= 0");
    if (!(fp_min_size > 0.0 && fp_min_size <= fp_max_size && fp_max_size <= 1.0)) {
      throw InputError("invalid spurious box size range");
    }
    for (const TrackSpec& t : tracks) {
      if (!t.start.IsValid()) {
        throw InputError("track " + t.polyp_id + " has an invalid start box");
      }
      if (!(t.wobble_period > 0.0)) {
        throw InputError("track " + t.polyp_id + " needs a positive wobble period");
      }
    }
  }
};

enum class BoxSource : std::uint8_t { kTrack, kSpurious };

struct Scenario {
  std::vector<GrayFrame> frames;
  std::vector<std::vector<GroundTruthBox>> ground_truth;
  std::vector<FrameDetections> raw_detections;
  // Parallel to raw_detections[i].boxes.
  std::vector<std::vector<BoxSource>> sources;
};

namespace internal {

constexpr std::uint64_t kRenderStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kDetectorStream = 0xc2b2ae3d27d4eb4fULL;

// Separable low-frequency background: base + f(x) + g(y), drifting slowly.
struct SceneStyle {
  double base;
  double ax[2], fx[2], px[2];
  double ay[2], fy[2], py[2];
  double drift;  // radians per frame

  static SceneStyle Draw(SplitRng& rng) {
    SceneStyle s;
    s.base = rng.Uniform(70.0, 150.0);
    for (int i = 0; i < 2; ++i) {
      s.ax[i] = rng.Uniform(12.0, 30.0);
      s.fx[i] = rng.Uniform(0.5, 3.0);
      s.px[i] = rng.Uniform(0.0, 2.0 * std::numbers::pi);
      s.ay[i] = rng.Uniform(12.0, 30.0);
      s.fy[i] = rng.Uniform(0.5, 3.0);
      s.py[i] = rng.Uniform(0.0, 2.0 * std::numbers::pi);
    }
    s.drift = rng.Uniform(0.005, 0.02);
    return s;
  }
};

inline GrayFrame RenderFrame(int w, int h, const SceneStyle& s, int t,
                             std::span<const BoundingBox> discs) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<double> col(w), row(h);
  const double phase = s.drift * t;
  for (int x = 0; x < w; ++x) {
    const double u = double(x) / w;
    col[x] = s.ax[0] * std::sin(kTwoPi * s.fx[0] * u + s.px[0] + phase) +
             s.ax[1] * std::sin(kTwoPi * s.fx[1] * u + s.px[1] - phase);
  }
  for (int y = 0; y < h; ++y) {
    const double v = double(y) / h;
    row[y] = s.base +
             s.ay[0] * std::sin(kTwoPi * s.fy[0] * v + s.py[0] + phase) +
             s.ay[1] * std::sin(kTwoPi * s.fy[1] * v + s.py[1] - phase);
  }
  GrayFrame f(w, h);
  for (int y = 0; y < h; ++y) {
    std::uint8_t* out = f.samples.data() + std::size_t(y) * w;
    for (int x = 0; x < w; ++x) {
      out[x] = static_cast<std::uint8_t>(
          std::clamp(std::lround(row[y] + col[x]), 0L, 255L));
    }
  }
  // Bright disc inscribed in each polyp box.
  for (const BoundingBox& b : discs) {
    const double cx = (b.x_min + b.x_max) / 2.0;
    const double cy = (b.y_min + b.y_max) / 2.0;
    const double r = std::min(b.Width(), b.Height()) / 2.0;
    const int x0 = std::max(0, int(std::floor(b.x_min)));
    const int x1 = std::min(w, int(std::ceil(b.x_max)));
    const int y0 = std::max(0, int(std::floor(b.y_min)));
    const int y1 = std::min(h, int(std::ceil(b.y_max)));
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= r * r) {
          f.at(x, y) = static_cast<std::uint8_t>(std::min(255, f.at(x, y) + 70));
        }
      }
    }
  }
  return f;
}

inline bool TrackActive(const TrackSpec& t, int frame, int n_frames) {
  const int last = t.last_frame < 0 ? n_frames - 1 : t.last_frame;
  return frame >= t.first_frame && frame <= last;
}

// Track box at a frame, on the integer pixel grid, clipped to the frame.
inline BoundingBox TrackBox(const TrackSpec& t, int frame, const FrameMeta& meta) {
  const double k = frame - t.first_frame;
  const double phase = 2.0 * std::numbers::pi * k / t.wobble_period;
  const double dx = std::round(t.vx * k + t.wobble_amplitude * std::sin(phase));
  const double dy = std::round(t.vy * k + t.wobble_amplitude * (1.0 - std::cos(phase)));
  const BoundingBox moved{t.start.x_min + dx, t.start.y_min + dy,
                          t.start.x_max + dx, t.start.y_max + dy};
  auto clipped = ClipToFrame(moved, meta);
  if (!clipped) {
    throw InputError("track " + t.polyp_id + " leaves the frame at frame " +
                     std::to_string(frame));
  }
  return *clipped;
}

inline double ClippedConfidence(SplitRng& rng, double mean, double jitter) {
  return std::clamp(mean + jitter * rng.Normal(), 0.0, 1.0);
}

}  // namespace internal

// Exact ground truth of every track, per frame, in track order.
inline std::vector<std::vector<GroundTruthBox>> TrackGroundTruth(
    const ScenarioConfig& cfg) {
  const FrameMeta meta{cfg.frame_width, cfg.frame_height, 0};
  std::vector<std::vector<GroundTruthBox>> gt(cfg.n_frames);
  for (int k = 0; k < cfg.n_frames; ++k) {
    for (const TrackSpec& t : cfg.tracks) {
      if (!internal::TrackActive(t, k, cfg.n_frames)) continue;
      gt[k].push_back(CornersToCentroid(internal::TrackBox(t, k, meta), t.polyp_id));
    }
  }
  return gt;
}

struct SimulatedDetections {
  std::vector<FrameDetections> detections;
  std::vector<std::vector<BoxSource>> sources;
};

// Jittered, occasionally dropped copies of the ground truth plus spurious
// boxes. A new spurious box never overlaps any ground truth box or any other
// spurious box within fp_clearance frames of its lifetime; candidates that
// cannot be placed after a fixed number of attempts are skipped.
inline SimulatedDetections SimulateDetector(
    const std::vector<std::vector<GroundTruthBox>>& ground_truth,
    const ScenarioConfig& cfg) {
  constexpr int kPlacementAttempts = 64;
  SplitRng rng(cfg.rng_seed ^ internal::kDetectorStream);
  const int n = static_cast<int>(ground_truth.size());
  const double fw = cfg.frame_width;
  const double fh = cfg.frame_height;

  struct Spurious {
    BoundingBox box;
    double confidence;
    int first, last;  // inclusive
  };
  std::vector<Spurious> spurious;

  SimulatedDetections out;
  out.detections.resize(n);
  out.sources.resize(n);
  for (int k = 0; k < n; ++k) {
    const FrameMeta meta{cfg.frame_width, cfg.frame_height, k};
    FrameDetections& fd = out.detections[k];
    fd.meta = meta;

    for (const GroundTruthBox& g : ground_truth[k]) {
      const bool dropped = rng.Bernoulli(cfg.tp_dropout_rate);
      BoundingBox box = CentroidToCorners(g);
      if (cfg.box_jitter > 0.0) {
        const double jx = cfg.box_jitter * fw;
        const double jy = cfg.box_jitter * fh;
        const BoundingBox moved{box.x_min + rng.Uniform(-jx, jx),
                                box.y_min + rng.Uniform(-jy, jy),
                                box.x_max + rng.Uniform(-jx, jx),
                                box.y_max + rng.Uniform(-jy, jy)};
        if (auto clipped = ClipToFrame(moved, meta)) box = *clipped;
      }
      const double conf = internal::ClippedConfidence(
          rng, cfg.tp_confidence_mean, cfg.confidence_jitter);
      if (dropped) continue;
      fd.boxes.push_back(ScoredBox{box, conf, BoxOrigin::kDetector});
      out.sources[k].push_back(BoxSource::kTrack);
    }

    if (rng.Bernoulli(cfg.transient_fp_rate)) {
      const int lifetime = rng.UniformInt(cfg.fp_lifetime, cfg.LifetimeMax());
      const double conf = internal::ClippedConfidence(
          rng, cfg.fp_confidence_mean, cfg.confidence_jitter);
      const int lo = std::max(0, k - cfg.fp_clearance);
      const int hi = std::min(n - 1, k + lifetime - 1 + cfg.fp_clearance);
      for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
        const double w = rng.Uniform(cfg.fp_min_size, cfg.fp_max_size) * fw;
        const double h = rng.Uniform(cfg.fp_min_size, cfg.fp_max_size) * fh;
        const double x = rng.Uniform(0.0, fw - w);
        const double y = rng.Uniform(0.0, fh - h);
        const BoundingBox cand{x, y, x + w, y + h};
        bool clear = true;
        for (int j = lo; j <= hi && clear; ++j) {
          for (const GroundTruthBox& g : ground_truth[j]) {
            if (Iou(cand, CentroidToCorners(g)) > 0.0) clear = false;
          }
        }
        for (const Spurious& s : spurious) {
          if (!clear) break;
          if (s.last < lo || s.first > hi) continue;
          if (Iou(cand, s.box) > 0.0) clear = false;
        }
        if (clear) {
          spurious.push_back({cand, conf, k, k + lifetime - 1});
          break;
        }
      }
    }
    for (const Spurious& s : spurious) {
      if (k < s.first || k > s.last) continue;
      fd.boxes.push_back(ScoredBox{s.box, s.confidence, BoxOrigin::kDetector});
      out.sources[k].push_back(BoxSource::kSpurious);
    }
  }
  return out;
}

// Renders a scenario's frames one at a time, in order. At a scene break the
// background is redrawn until its SSIM with the previous frame falls below
// 0.5, so cuts are unmistakable.
class FrameRenderer {
 public:
  explicit FrameRenderer(const ScenarioConfig& cfg)
      : cfg_(cfg), rng_(cfg.rng_seed ^ internal::kRenderStream),
        style_(internal::SceneStyle::Draw(rng_)) {}

  // Frames must be requested with consecutive indices starting at 0.
  GrayFrame Render(int k, std::span<const GroundTruthBox> ground_truth) {
    constexpr int kSceneAttempts = 16;
    constexpr double kBreakSimilarityCeiling = 0.5;
    if (k != next_) throw InvariantError("frames must be rendered in order");
    ++next_;
    std::vector<BoundingBox> discs;
    for (const GroundTruthBox& g : ground_truth) {
      discs.push_back(CentroidToCorners(g));
    }
    GrayFrame frame = internal::RenderFrame(cfg_.frame_width, cfg_.frame_height,
                                            style_, k, discs);
    if (k > 0 && cfg_.scene_breaks.count(k)) {
      const SsimParams params;
      const auto before = SsimSignature::Of(previous_, params);
      for (int attempt = 0; attempt < kSceneAttempts; ++attempt) {
        style_ = internal::SceneStyle::Draw(rng_);
        frame = internal::RenderFrame(cfg_.frame_width, cfg_.frame_height,
                                      style_, k, discs);
        if (Ssim(before, SsimSignature::Of(frame, params), params) <
            kBreakSimilarityCeiling) {
          break;
        }
      }
    }
    if (!cfg_.scene_breaks.empty()) previous_ = frame;
    return frame;
  }

 private:
  ScenarioConfig cfg_;
  SplitRng rng_;
  internal::SceneStyle style_;
  GrayFrame previous_;
  int next_ = 0;
};

inline std::vector<GrayFrame> RenderFrames(
    const ScenarioConfig& cfg,
    const std::vector<std::vector<GroundTruthBox>>& ground_truth) {
  FrameRenderer renderer(cfg);
  std::vector<GrayFrame> frames;
  frames.reserve(cfg.n_frames);
  for (int k = 0; k < cfg.n_frames; ++k) {
    frames.push_back(renderer.Render(k, ground_truth[k]));
  }
  return frames;
}

inline Scenario GenerateScenario(const ScenarioConfig& cfg) {
  cfg.Validate();
  Scenario s;
  s.ground_truth = TrackGroundTruth(cfg);
  s.frames = RenderFrames(cfg, s.ground_truth);
  SimulatedDetections sim = SimulateDetector(s.ground_truth, cfg);
  s.raw_detections = std::move(sim.detections);
  s.sources = std::move(sim.sources);
  return s;
}

// Gray RGB copy of a luma frame; ToLuma maps it back exactly.
inline RgbFrame ToRgb(const GrayFrame& g) {
  RgbFrame out{g.width, g.height, std::vector<std::uint8_t>(g.samples.size() * 3)};
  for (std::size_t i = 0; i < g.samples.size(); ++i) {
    out.rgb[3 * i] = g.samples[i];
    out.rgb[3 * i + 1] = g.samples[i];
    out.rgb[3 * i + 2] = g.samples[i];
  }
  return out;
}

// The scenario used for end-to-end and window-size checks: three polyps,
// each visible over one contiguous segment, drifting between random
// endpoints with a slow wobble; one spurious box every four frames on
// average, living one to three frames; 5% missed detections; two cuts.
inline ScenarioConfig StandardNoiseScenario(std::uint64_t seed,
                                            int n_frames = 1000) {
  ScenarioConfig cfg;
  cfg.frame_width = 320;
  cfg.frame_height = 240;
  cfg.n_frames = n_frames;
  cfg.rng_seed = seed;
  cfg.transient_fp_rate = 0.25;
  cfg.fp_lifetime = 1;
  cfg.fp_lifetime_max = 3;
  cfg.tp_dropout_rate = 0.05;
  cfg.box_jitter = 0.005;

  SplitRng rng(seed ^ 0x5851f42d4c957f2dULL);
  for (int i = 0; i < 3; ++i) {
    TrackSpec t;
    t.polyp_id = "p" + std::to_string(i + 1);
    const int length = std::min(n_frames, rng.UniformInt(150, 300));
    t.first_frame = rng.UniformInt(0, std::max(0, n_frames - length));
    t.last_frame = t.first_frame + length - 1;
    const double size = rng.UniformInt(30, 60);
    const double margin = 10.0;
    const double x0 = rng.Uniform(margin, cfg.frame_width - size - margin);
    const double y0 = rng.Uniform(margin, cfg.frame_height - size - margin);
    const double x1 = rng.Uniform(margin, cfg.frame_width - size - margin);
    const double y1 = rng.Uniform(margin, cfg.frame_height - size - margin);
    t.start = BoundingBox{std::round(x0), std::round(y0), std::round(x0) + size,
                          std::round(y0) + size};
    t.vx = (x1 - x0) / length;
    t.vy = (y1 - y0) / length;
    t.wobble_amplitude = rng.Uniform(0.0, 4.0);
    t.wobble_period = rng.Uniform(40.0, 120.0);
    cfg.tracks.push_back(t);
  }
  for (int i = 0; i < 2 && n_frames > 2; ++i) {
    cfg.scene_breaks.insert(rng.UniformInt(1, n_frames - 1));
  }
  return cfg;
}

}  // namespace framecorr

#endif  // FRAMECORR_SYNTH_HPP_
