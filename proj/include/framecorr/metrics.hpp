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
#ifndef FRAMECORR_METRICS_HPP_
#define FRAMECORR_METRICS_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "framecorr/errors.hpp"
#include "framecorr/geometry.hpp"

namespace framecorr {

// Polyp-level outcome of one frame. tn is frame-level: 1 for a frame with
// neither ground truth nor detections.
struct FrameOutcome {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  friend bool operator==(const FrameOutcome&, const FrameOutcome&) = default;
};

enum class DetectionLabel : std::uint8_t {
  kTruePositive,
  kFalsePositive,
  kDuplicate,  // overlaps a ground truth some other detection already claimed
};

struct FrameMatch {
  FrameOutcome outcome;
  std::vector<DetectionLabel> labels;  // parallel to the detections
  std::vector<bool> detected;          // parallel to the ground truths
};

// Greedy assignment by descending confidence (ties keep input order). Each
// detection claims the unclaimed ground truth it overlaps most, IoU > cut.
// A detection overlapping only claimed ground truths is a duplicate and is
// counted neither as TP nor as FP.
inline FrameMatch MatchDetections(std::span<const ScoredBox> dets,
                                  std::span<const BoundingBox> gts,
                                  double iou_cut = 0.5) {
  FrameMatch m;
  m.labels.assign(dets.size(), DetectionLabel::kFalsePositive);
  m.detected.assign(gts.size(), false);

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });

  for (std::size_t d : order) {
    std::ptrdiff_t best = -1;
    double best_iou = iou_cut;
    bool overlaps_any = false;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = Iou(dets[d].box, gts[g]);
      if (!(iou > iou_cut)) continue;
      overlaps_any = true;
      if (!m.detected[g] && iou > best_iou) {
        best_iou = iou;
        best = static_cast<std::ptrdiff_t>(g);
      }
    }
    if (best >= 0) {
      m.detected[best] = true;
      m.labels[d] = DetectionLabel::kTruePositive;
      ++m.outcome.tp;
    } else if (overlaps_any) {
      m.labels[d] = DetectionLabel::kDuplicate;
    } else {
      ++m.outcome.fp;
    }
  }
  m.outcome.fn = static_cast<std::int64_t>(
      std::count(m.detected.begin(), m.detected.end(), false));
  m.outcome.tn = (dets.empty() && gts.empty()) ? 1 : 0;
  return m;
}

inline FrameOutcome MatchFrame(std::span<const ScoredBox> dets,
                               std::span<const BoundingBox> gts,
                               double iou_cut = 0.5) {
  return MatchDetections(dets, gts, iou_cut).outcome;
}

struct EvalTotals {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
  std::int64_t negative_frames = 0;  // frames without ground truth (N)
  std::int64_t frames = 0;
};

// Ratios are percentages except mnfp (FPs per frame), map (area in [0,1])
// and mpt_ms. A ratio with a zero denominator is left empty.
struct EvalReport {
  EvalTotals totals;
  std::optional<double> sen;
  std::optional<double> pre;
  std::optional<double> spe;
  std::optional<double> f1;
  std::optional<double> f2;
  std::optional<double> mnfp;
  std::optional<double> pdr;
  std::optional<double> map;
  std::optional<double> mpt_ms;
};

namespace internal {

inline std::optional<double> Ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return double(num) / double(den);
}

}  // namespace internal

inline EvalReport ReportFromTotals(const EvalTotals& t) {
  EvalReport r;
  r.totals = t;
  const auto sen = internal::Ratio(t.tp, t.tp + t.fn);
  const auto pre = internal::Ratio(t.tp, t.tp + t.fp);
  const auto spe = internal::Ratio(t.tn, t.negative_frames);
  if (sen) r.sen = 100.0 * *sen;
  if (pre) r.pre = 100.0 * *pre;
  if (spe) r.spe = 100.0 * *spe;
  if (sen && pre) {
    const double s = *sen;
    const double p = *pre;
    if (s + p > 0.0) r.f1 = 100.0 * 2.0 * s * p / (s + p);
    if (s + 4.0 * p > 0.0) r.f2 = 100.0 * 5.0 * s * p / (s + 4.0 * p);
  }
  if (t.frames > 0) r.mnfp = double(t.fp) / double(t.frames);
  return r;
}

inline EvalReport Aggregate(std::span<const FrameOutcome> outcomes,
                            std::int64_t negative_frames) {
  if (outcomes.empty()) throw InputError("cannot aggregate zero frames");
  EvalTotals t;
  for (const FrameOutcome& o : outcomes) {
    t.tp += o.tp;
    t.fp += o.fp;
    t.fn += o.fn;
    t.tn += o.tn;
  }
  t.negative_frames = negative_frames;
  t.frames = static_cast<std::int64_t>(outcomes.size());
  return ReportFromTotals(t);
}

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double threshold = 0.0;
};

// One point per distinct confidence, descending. Greedy matching is
// prefix-stable in confidence order, so a single full match per frame gives
// the outcome at every threshold.
inline std::vector<PrPoint> PrecisionRecallCurve(
    std::span<const std::vector<ScoredBox>> dets,
    std::span<const std::vector<BoundingBox>> gts, double iou_cut = 0.5) {
  if (dets.size() != gts.size()) {
    throw InputError("detections and ground truth cover different frame counts");
  }
  std::int64_t total_gt = 0;
  struct Scored {
    double confidence;
    DetectionLabel label;
  };
  std::vector<Scored> all;
  for (std::size_t f = 0; f < dets.size(); ++f) {
    total_gt += static_cast<std::int64_t>(gts[f].size());
    const FrameMatch m = MatchDetections(dets[f], gts[f], iou_cut);
    for (std::size_t i = 0; i < dets[f].size(); ++i) {
      all.push_back({dets[f][i].confidence, m.labels[i]});
    }
  }
  if (total_gt == 0) throw InputError("average precision needs ground truth");

  std::stable_sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
    return a.confidence > b.confidence;
  });
  std::vector<PrPoint> curve;
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].label == DetectionLabel::kTruePositive) ++tp;
    if (all[i].label == DetectionLabel::kFalsePositive) ++fp;
    const bool boundary =
        i + 1 == all.size() || all[i + 1].confidence != all[i].confidence;
    if (boundary && tp + fp > 0) {
      curve.push_back({double(tp) / double(total_gt),
                       double(tp) / double(tp + fp), all[i].confidence});
    }
  }
  return curve;
}

// All-points interpolated area under a precision/recall curve.
inline double AreaUnderCurve(std::span<const PrPoint> curve) {
  std::vector<PrPoint> pts(curve.begin(), curve.end());
  std::stable_sort(pts.begin(), pts.end(), [](const PrPoint& a, const PrPoint& b) {
    return a.recall < b.recall;
  });
  double envelope = 0.0;
  for (std::size_t i = pts.size(); i-- > 0;) {
    envelope = std::max(envelope, pts[i].precision);
    pts[i].precision = envelope;
  }
  double area = 0.0;
  double prev_recall = 0.0;
  for (const PrPoint& p : pts) {
    area += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return area;
}

inline double AveragePrecision(std::span<const std::vector<ScoredBox>> dets,
                               std::span<const std::vector<BoundingBox>> gts,
                               double iou_cut = 0.5) {
  const auto curve = PrecisionRecallCurve(dets, gts, iou_cut);
  return AreaUnderCurve(curve);
}

// Percentage of polyps detected at least once. Keys are polyp identities.
inline double PolypDetectionRate(const std::map<std::string, bool>& detected) {
  if (detected.empty()) throw InputError("no polyps to rate");
  const auto hits = std::count_if(detected.begin(), detected.end(),
                                  [](const auto& kv) { return kv.second; });
  return 100.0 * double(hits) / double(detected.size());
}

// Mean processing time per frame, in milliseconds.
inline double MeanProcessingTime(std::span<const double> durations_ms) {
  if (durations_ms.empty()) throw InputError("no timed frames");
  return std::accumulate(durations_ms.begin(), durations_ms.end(), 0.0) /
         double(durations_ms.size());
}

inline double MeanProcessingTime(double total_ms, std::int64_t frames) {
  if (frames <= 0) throw InputError("no timed frames");
  return total_ms / double(frames);
}

// Accumulates per-frame matches over one or more sequences. Polyp identity
// is (sequence, polyp_id).
class Evaluator {
 public:
  explicit Evaluator(double iou_cut = 0.5) : iou_cut_(iou_cut) {}

  FrameOutcome AddFrame(std::string_view sequence,
                        std::span<const ScoredBox> dets,
                        std::span<const GroundTruthBox> gts) {
    std::vector<BoundingBox> boxes;
    boxes.reserve(gts.size());
    for (const GroundTruthBox& g : gts) boxes.push_back(CentroidToCorners(g));

    const FrameMatch m = MatchDetections(dets, boxes, iou_cut_);
    for (std::size_t i = 0; i < gts.size(); ++i) {
      bool& flag = polyps_[std::string(sequence) + "/" + gts[i].polyp_id];
      flag = flag || m.detected[i];
    }
    outcomes_.push_back(m.outcome);
    if (gts.empty()) ++negative_frames_;
    ground_truths_ += static_cast<std::int64_t>(gts.size());
    all_dets_.emplace_back(dets.begin(), dets.end());
    all_gts_.push_back(std::move(boxes));
    return m.outcome;
  }

  void SetMeanProcessingTime(double mpt_ms) { mpt_ms_ = mpt_ms; }

  std::size_t frames() const { return outcomes_.size(); }

  EvalReport Report() const {
    EvalReport r = Aggregate(outcomes_, negative_frames_);
    if (r.totals.tp + r.totals.fn != ground_truths_) {
      throw InvariantError("TP + FN does not equal the number of polyps");
    }
    if (!polyps_.empty()) r.pdr = PolypDetectionRate(polyps_);
    if (ground_truths_ > 0) r.map = AveragePrecision(all_dets_, all_gts_, iou_cut_);
    r.mpt_ms = mpt_ms_;
    return r;
  }

 private:
  double iou_cut_;
  std::vector<FrameOutcome> outcomes_;
  std::int64_t negative_frames_ = 0;
  std::int64_t ground_truths_ = 0;
  std::map<std::string, bool> polyps_;
  std::vector<std::vector<ScoredBox>> all_dets_;
  std::vector<std::vector<BoundingBox>> all_gts_;
  std::optional<double> mpt_ms_;
};

}  // namespace framecorr

#endif  // FRAMECORR_METRICS_HPP_
