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
// Streaming inter-frame correlation of detector output.
//
// Every frame t is judged against up to half_window frames on each side.
// A detection in t survives if it reappears (IoU above the adaptive
// threshold) in more than half of the neighbors whose SSIM with t exceeds the
// similarity threshold. When no neighbor is similar, it survives if it
// reappears in at least fc_quorum neighbors regardless of similarity.
// Independently, a box seen at a consistent location in enough neighbors on
// both sides of t, but absent from t, is added back as their mean.
//
// Results for frame t are emitted once frame t + half_window has arrived.

#ifndef FRAMECORR_CORRELATOR_HPP_
#define FRAMECORR_CORRELATOR_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "framecorr/errors.hpp"
#include "framecorr/geometry.hpp"
#include "framecorr/similarity.hpp"

namespace framecorr {

enum class CorrelationMode : std::uint8_t {
  kSimilarity,  // SSIM-gated majority vote, FC fallback when nothing is similar
  kFixed,       // FC for every frame
};

struct IscuConfig {
  int half_window = 3;
  double confidence_gate = 0.3;
  int fc_quorum = 3;
  int fill_quorum = 3;
  double fill_iou = 0.5;
  CorrelationMode mode = CorrelationMode::kSimilarity;
  SsimParams ssim;

  void Validate() const {
    if (half_window < 1) throw InputError("half_window must be >= 1");
    if (fc_quorum < 1 || fc_quorum > 2 * half_window) {
      throw InputError("fc_quorum must lie in [1, 2 * half_window]");
    }
    if (fill_quorum < 1 || fill_quorum > 2 * half_window) {
      throw InputError("fill_quorum must lie in [1, 2 * half_window]");
    }
    if (!(confidence_gate >= 0.0 && confidence_gate <= 1.0)) {
      throw InputError("confidence_gate must lie in [0, 1]");
    }
    if (!(fill_iou >= 0.0 && fill_iou <= 1.0)) {
      throw InputError("fill_iou must lie in [0, 1]");
    }
    ssim.Validate();
  }

  // Defaults for a window of half_window frames per side. Quorums stay at
  // half of the neighbors (3 of 6 at the default size); filling needs at
  // least two frames so that both sides can be represented.
  static IscuConfig ForHalfWindow(int half_window) {
    IscuConfig cfg;
    cfg.half_window = half_window;
    cfg.fc_quorum = std::max(1, half_window);
    cfg.fill_quorum = std::max(2, half_window);
    return cfg;
  }
};

// One neighbor of the frame under decision, as seen from that frame.
struct WindowNeighbor {
  int offset = 0;           // signed distance in frames, never 0
  double similarity = 0.0;  // SSIM with the center frame
  std::span<const ScoredBox> boxes;
};

// Materialized window around one center frame. Neighbors are ordered by
// offset; near sequence ends fewer than 2 * half_window are present.
struct CorrelationWindow {
  FrameMeta meta;
  std::span<const ScoredBox> center;
  std::vector<WindowNeighbor> neighbors;
};

struct FilteredFrame {
  FrameMeta meta;
  std::vector<ScoredBox> kept;   // surviving detector boxes, input order
  std::vector<ScoredBox> added;  // interpolated boxes
  std::size_t removed_count = 0;

  std::vector<ScoredBox> AllBoxes() const {
    std::vector<ScoredBox> all = kept;
    all.insert(all.end(), added.begin(), added.end());
    return all;
  }

  friend bool operator==(const FilteredFrame&, const FilteredFrame&) = default;
};

namespace internal {

inline bool HasOverlap(std::span<const ScoredBox> boxes,
                       const BoundingBox& target, double threshold) {
  return std::any_of(boxes.begin(), boxes.end(), [&](const ScoredBox& b) {
    return Iou(b.box, target) > threshold;
  });
}

// FC quorum for a window with only some of its neighbors available,
// proportional to the full-window quorum and rounded up.
inline int ScaledQuorum(int quorum, int available, int full) {
  if (available >= full) return quorum;
  return static_cast<int>((std::int64_t(quorum) * available + full - 1) / full);
}

}  // namespace internal

// Returns the center boxes confirmed by their neighbors, in input order.
inline std::vector<ScoredBox> EliminateNoise(const CorrelationWindow& window,
                                             const IscuConfig& cfg) {
  std::vector<ScoredBox> kept;
  if (window.neighbors.empty()) {
    kept.assign(window.center.begin(), window.center.end());
    return kept;
  }

  std::vector<const WindowNeighbor*> similar;
  if (cfg.mode == CorrelationMode::kSimilarity) {
    for (const WindowNeighbor& n : window.neighbors) {
      if (n.similarity > cfg.ssim.similarity_threshold) similar.push_back(&n);
    }
  }

  const int available = static_cast<int>(window.neighbors.size());
  const int fc_quorum =
      internal::ScaledQuorum(cfg.fc_quorum, available, 2 * cfg.half_window);

  for (const ScoredBox& c : window.center) {
    const double threshold = AdaptiveIouThreshold(c.box, window.meta);
    bool keep = false;
    if (!similar.empty()) {
      const auto hits = std::count_if(
          similar.begin(), similar.end(), [&](const WindowNeighbor* n) {
            return internal::HasOverlap(n->boxes, c.box, threshold);
          });
      keep = 2 * hits > static_cast<std::ptrdiff_t>(similar.size());
    } else {
      const auto hits = std::count_if(
          window.neighbors.begin(), window.neighbors.end(),
          [&](const WindowNeighbor& n) {
            return internal::HasOverlap(n.boxes, c.box, threshold);
          });
      keep = hits >= fc_quorum;
    }
    if (keep) kept.push_back(c);
  }
  return kept;
}

// Boxes to add to the center frame: mean boxes of neighbor clusters that
// span both sides of the center and have no counterpart in it. Works on the
// unfiltered detections of every frame.
inline std::vector<ScoredBox> CorrectMissed(const CorrelationWindow& window,
                                            const IscuConfig& cfg) {
  struct Member {
    int offset;
    const ScoredBox* box;
  };
  struct Cluster {
    const ScoredBox* seed;
    std::vector<Member> members;
  };

  // Nearest frames first; at equal distance the earlier frame first.
  std::vector<const WindowNeighbor*> order;
  for (const WindowNeighbor& n : window.neighbors) order.push_back(&n);
  std::stable_sort(order.begin(), order.end(),
                   [](const WindowNeighbor* a, const WindowNeighbor* b) {
                     const int da = std::abs(a->offset);
                     const int db = std::abs(b->offset);
                     if (da != db) return da < db;
                     return a->offset < b->offset;
                   });

  std::vector<Cluster> clusters;
  std::vector<bool> claimed;
  for (const WindowNeighbor* n : order) {
    claimed.assign(n->boxes.size(), false);
    for (Cluster& cl : clusters) {
      std::ptrdiff_t best = -1;
      double best_iou = cfg.fill_iou;
      for (std::size_t i = 0; i < n->boxes.size(); ++i) {
        if (claimed[i]) continue;
        const double iou = Iou(cl.seed->box, n->boxes[i].box);
        if (iou > best_iou) {
          best_iou = iou;
          best = static_cast<std::ptrdiff_t>(i);
        }
      }
      if (best >= 0) {
        claimed[best] = true;
        cl.members.push_back({n->offset, &n->boxes[best]});
      }
    }
    for (std::size_t i = 0; i < n->boxes.size(); ++i) {
      if (!claimed[i]) {
        clusters.push_back({&n->boxes[i], {{n->offset, &n->boxes[i]}}});
      }
    }
  }

  std::vector<ScoredBox> added;
  for (Cluster& cl : clusters) {
    if (static_cast<int>(cl.members.size()) < cfg.fill_quorum) continue;
    const bool has_past = std::any_of(cl.members.begin(), cl.members.end(),
                                      [](const Member& m) { return m.offset < 0; });
    const bool has_future = std::any_of(
        cl.members.begin(), cl.members.end(),
        [](const Member& m) { return m.offset > 0; });
    if (!has_past || !has_future) continue;

    std::sort(cl.members.begin(), cl.members.end(),
              [](const Member& a, const Member& b) { return a.offset < b.offset; });
    BoundingBox sum{0.0, 0.0, 0.0, 0.0};
    double confidence = 0.0;
    for (const Member& m : cl.members) {
      sum.x_min += m.box->box.x_min;
      sum.y_min += m.box->box.y_min;
      sum.x_max += m.box->box.x_max;
      sum.y_max += m.box->box.y_max;
      confidence += m.box->confidence;
    }
    const double n = static_cast<double>(cl.members.size());
    const BoundingBox mean{sum.x_min / n, sum.y_min / n, sum.x_max / n,
                           sum.y_max / n};

    if (internal::HasOverlap(window.center, mean, cfg.fill_iou)) continue;
    if (internal::HasOverlap(added, mean, cfg.fill_iou)) continue;
    added.push_back(ScoredBox{mean, confidence / n, BoxOrigin::kInterpolated});
  }
  return added;
}

// Stateful 2 * half_window + 1 frame correlator. Single producer.
class Correlator {
 public:
  explicit Correlator(IscuConfig config) : config_(std::move(config)) {
    config_.Validate();
  }

  const IscuConfig& config() const { return config_; }

  // Ingests one frame. Returns the result for the frame half_window
  // positions back once it has all of its future neighbors.
  std::optional<FilteredFrame> Push(const GrayFrame& frame,
                                    const FrameDetections& dets) {
    const FrameMeta& meta = dets.meta;
    if (frame.width != meta.width || frame.height != meta.height) {
      throw InputError("frame " + std::to_string(meta.frame_index) +
                       ": raster is " + std::to_string(frame.width) + "x" +
                       std::to_string(frame.height) + " but detections say " +
                       std::to_string(meta.width) + "x" +
                       std::to_string(meta.height));
    }
    if (last_meta_) {
      if (meta.frame_index <= last_meta_->frame_index) {
        throw SequenceError("frame index " + std::to_string(meta.frame_index) +
                            " does not follow " +
                            std::to_string(last_meta_->frame_index));
      }
      if (meta.width != last_meta_->width ||
          meta.height != last_meta_->height) {
        throw InputError("frame " + std::to_string(meta.frame_index) +
                         " changes dimensions mid-stream");
      }
    }
    last_meta_ = meta;

    Slot slot;
    slot.meta = meta;
    for (const ScoredBox& sb : dets.boxes) {
      if (!(sb.confidence > config_.confidence_gate)) continue;
      if (auto clipped = ClipToFrame(sb.box, meta)) {
        slot.boxes.push_back(ScoredBox{*clipped, sb.confidence, sb.origin});
      }
    }
    if (config_.mode == CorrelationMode::kSimilarity) {
      slot.signature = SsimSignature::Of(frame, config_.ssim);
      const std::size_t back =
          std::min<std::size_t>(config_.half_window, slots_.size());
      slot.ssim_back.reserve(back);
      for (std::size_t k = 1; k <= back; ++k) {
        slot.ssim_back.push_back(Ssim(slots_[slots_.size() - k].signature,
                                      slot.signature, config_.ssim));
      }
    }
    slots_.push_back(std::move(slot));

    std::optional<FilteredFrame> out;
    if (slots_.size() - 1 - next_ >= std::size_t(config_.half_window)) {
      out = Decide(next_++);
    }
    while (next_ > std::size_t(config_.half_window)) {
      slots_.pop_front();
      --next_;
    }
    return out;
  }

  // Emits every pending frame with a truncated future and resets the stream.
  std::vector<FilteredFrame> Flush() {
    std::vector<FilteredFrame> out;
    while (next_ < slots_.size()) out.push_back(Decide(next_++));
    slots_.clear();
    next_ = 0;
    last_meta_.reset();
    return out;
  }

 private:
  struct Slot {
    FrameMeta meta;
    SsimSignature signature;
    std::vector<ScoredBox> boxes;
    std::vector<double> ssim_back;  // [k-1] = SSIM with the frame k back
  };

  FilteredFrame Decide(std::size_t center) const {
    const Slot& c = slots_[center];
    CorrelationWindow window{c.meta, c.boxes, {}};
    const std::size_t hw = std::size_t(config_.half_window);
    for (std::size_t k = std::min(hw, center); k >= 1; --k) {
      const double sim = c.ssim_back.empty() ? 0.0 : c.ssim_back[k - 1];
      window.neighbors.push_back(
          {-static_cast<int>(k), sim, slots_[center - k].boxes});
    }
    for (std::size_t k = 1; k <= hw && center + k < slots_.size(); ++k) {
      const Slot& f = slots_[center + k];
      const double sim = f.ssim_back.empty() ? 0.0 : f.ssim_back[k - 1];
      window.neighbors.push_back({static_cast<int>(k), sim, f.boxes});
    }

    FilteredFrame out;
    out.meta = c.meta;
    out.kept = EliminateNoise(window, config_);
    out.added = CorrectMissed(window, config_);
    out.removed_count = c.boxes.size() - out.kept.size();
    return out;
  }

  IscuConfig config_;
  std::deque<Slot> slots_;
  std::size_t next_ = 0;
  std::optional<FrameMeta> last_meta_;
};

// Batch form of Correlator: one result per input frame.
inline std::vector<FilteredFrame> ProcessSequence(
    std::span<const GrayFrame> frames,
    std::span<const FrameDetections> detections, const IscuConfig& cfg) {
  if (frames.size() != detections.size()) {
    throw InputError("got " + std::to_string(frames.size()) + " frames but " +
                     std::to_string(detections.size()) + " detection sets");
  }
  Correlator correlator(cfg);
  std::vector<FilteredFrame> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (auto f = correlator.Push(frames[i], detections[i])) {
      out.push_back(std::move(*f));
    }
  }
  for (FilteredFrame& f : correlator.Flush()) out.push_back(std::move(f));
  return out;
}

}  // namespace framecorr

#endif  // FRAMECORR_CORRELATOR_HPP_
