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
#ifndef FRAMECORR_GEOMETRY_HPP_
#define FRAMECORR_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "framecorr/errors.hpp"

namespace framecorr {

// Axis-aligned rectangle in pixel coordinates, origin top-left. Coordinates
// are real-valued; width is x_max - x_min with no +1 pixel convention.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double Width() const { return x_max - x_min; }
  double Height() const { return y_max - y_min; }
  double Area() const { return Width() * Height(); }

  bool IsValid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) &&
           std::isfinite(x_max) && std::isfinite(y_max) && x_min >= 0.0 &&
           y_min >= 0.0 && x_min < x_max && y_min < y_max;
  }

  // Checked construction; throws InputError on a degenerate box.
  static BoundingBox FromCorners(double x_min, double y_min, double x_max,
                                 double y_max) {
    BoundingBox box{x_min, y_min, x_max, y_max};
    if (!box.IsValid()) {
      throw InputError("invalid bounding box (" + std::to_string(x_min) +
                       ", " + std::to_string(y_min) + ", " +
                       std::to_string(x_max) + ", " + std::to_string(y_max) +
                       ")");
    }
    return box;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

enum class BoxOrigin : std::uint8_t { kDetector, kInterpolated };

struct ScoredBox {
  BoundingBox box;
  double confidence = 1.0;
  BoxOrigin origin = BoxOrigin::kDetector;

  friend bool operator==(const ScoredBox&, const ScoredBox&) = default;
};

struct FrameMeta {
  int width = 0;
  int height = 0;
  std::int64_t frame_index = 0;

  friend bool operator==(const FrameMeta&, const FrameMeta&) = default;
};

// Detector output for one frame, in detector order.
struct FrameDetections {
  FrameMeta meta;
  std::vector<ScoredBox> boxes;

  std::size_t nb() const { return boxes.size(); }
};

// Centroid-form annotation: (cx, cy) is the rectangle center.
struct GroundTruthBox {
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  double width = 0.0;
  double height = 0.0;
  std::string polyp_id;

  friend bool operator==(const GroundTruthBox&,
                         const GroundTruthBox&) = default;
};

inline double Iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw =
      std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih =
      std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.Area() + b.Area() - inter);
}

inline BoundingBox CentroidToCorners(const GroundTruthBox& g) {
  return BoundingBox{g.centroid_x - g.width / 2.0,
                     g.centroid_y - g.height / 2.0,
                     g.centroid_x + g.width / 2.0,
                     g.centroid_y + g.height / 2.0};
}

inline GroundTruthBox CornersToCentroid(const BoundingBox& box,
                                        std::string polyp_id = {}) {
  return GroundTruthBox{(box.x_min + box.x_max) / 2.0,
                        (box.y_min + box.y_max) / 2.0, box.Width(),
                        box.Height(), std::move(polyp_id)};
}

// Size-dependent overlap requirement for cross-frame matching: half the sum
// of the box's relative width and height. Not clamped; a frame-sized box
// yields 1.0 and can never be matched with a strict IoU comparison.
inline double AdaptiveIouThreshold(const BoundingBox& box,
                                   const FrameMeta& meta) {
  return 0.5 * (box.Width() / static_cast<double>(meta.width) +
                box.Height() / static_cast<double>(meta.height));
}

// Intersects the box with [0,w]x[0,h]. Empty result when nothing remains.
inline std::optional<BoundingBox> ClipToFrame(const BoundingBox& box,
                                              const FrameMeta& meta) {
  BoundingBox out{std::clamp(box.x_min, 0.0, double(meta.width)),
                  std::clamp(box.y_min, 0.0, double(meta.height)),
                  std::clamp(box.x_max, 0.0, double(meta.width)),
                  std::clamp(box.y_max, 0.0, double(meta.height))};
  if (!out.IsValid()) return std::nullopt;
  return out;
}

// Clips every box to the frame and drops the ones with nothing left.
inline FrameDetections MakeFrameDetections(const FrameMeta& meta,
                                           const std::vector<ScoredBox>& raw) {
  if (meta.width <= 0 || meta.height <= 0) {
    throw InputError("frame dimensions must be positive");
  }
  FrameDetections out{meta, {}};
  out.boxes.reserve(raw.size());
  for (const ScoredBox& sb : raw) {
    if (auto clipped = ClipToFrame(sb.box, meta)) {
      out.boxes.push_back(ScoredBox{*clipped, sb.confidence, sb.origin});
    }
  }
  return out;
}

}  // namespace framecorr

#endif  // FRAMECORR_GEOMETRY_HPP_
