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
// Line-oriented text records.
//
//   detections:    frame_index x_min y_min x_max y_max confidence [origin]
//   ground truth:  frame_index polyp_id cx cy w h
//
// Fields are whitespace separated; '#' starts a comment. origin is "det" or
// "interp" and appears in filtered output only. Numbers are written with six
// significant digits.

#ifndef FRAMECORR_RECORDS_HPP_
#define FRAMECORR_RECORDS_HPP_

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "framecorr/errors.hpp"
#include "framecorr/geometry.hpp"

namespace framecorr {
namespace records {

namespace internal {

inline std::vector<std::string_view> Fields(std::string_view line) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) {
    line = line.substr(0, hash);
  }
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

class LineError {
 public:
  LineError(std::string source, std::size_t line)
      : where_(std::move(source) + ":" + std::to_string(line) + ": ") {}
  [[noreturn]] void operator()(const std::string& msg) const {
    throw InputError(where_ + msg);
  }

 private:
  std::string where_;
};

inline double ParseReal(std::string_view s, const char* field,
                        const LineError& fail) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(std::string("bad ") + field + " '" + std::string(s) + "'");
  }
  if (!std::isfinite(v)) fail(std::string("non-finite ") + field);
  return v;
}

inline std::int64_t ParseIndex(std::string_view s, const LineError& fail) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
    fail("bad frame index '" + std::string(s) + "'");
  }
  return v;
}

template <typename T>
void Place(std::vector<std::vector<T>>& frames, std::int64_t index, T value,
           std::optional<std::int64_t> num_frames, const LineError& fail) {
  if (num_frames && index >= *num_frames) {
    fail("frame index " + std::to_string(index) + " beyond sequence length " +
         std::to_string(*num_frames));
  }
  if (std::size_t(index) >= frames.size()) frames.resize(std::size_t(index) + 1);
  frames[std::size_t(index)].push_back(std::move(value));
}

}  // namespace internal

// Per-frame boxes. With num_frames set the result has exactly that many
// entries; otherwise it ends at the highest index seen. Boxes are clipped
// to the non-negative quadrant; frame-size clipping happens at ingest.
inline std::vector<std::vector<ScoredBox>> ParseDetections(
    std::istream& in, const std::string& source,
    std::optional<std::int64_t> num_frames = std::nullopt) {
  std::vector<std::vector<ScoredBox>> frames;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    const auto f = internal::Fields(line);
    if (f.empty()) continue;
    const internal::LineError fail(source, line_no);
    if (f.size() != 6 && f.size() != 7) {
      fail("expected 6 or 7 fields, got " + std::to_string(f.size()));
    }
    const std::int64_t index = internal::ParseIndex(f[0], fail);
    const double x0 = internal::ParseReal(f[1], "x_min", fail);
    const double y0 = internal::ParseReal(f[2], "y_min", fail);
    const double x1 = internal::ParseReal(f[3], "x_max", fail);
    const double y1 = internal::ParseReal(f[4], "y_max", fail);
    const double conf = internal::ParseReal(f[5], "confidence", fail);
    if (!(x0 < x1)) fail("x_min must be less than x_max");
    if (!(y0 < y1)) fail("y_min must be less than y_max");
    if (conf < 0.0 || conf > 1.0) fail("confidence outside [0, 1]");
    BoxOrigin origin = BoxOrigin::kDetector;
    if (f.size() == 7) {
      if (f[6] == "det") {
        origin = BoxOrigin::kDetector;
      } else if (f[6] == "interp") {
        origin = BoxOrigin::kInterpolated;
      } else {
        fail("origin must be 'det' or 'interp'");
      }
    }
    const BoundingBox box{std::max(0.0, x0), std::max(0.0, y0), x1, y1};
    if (!box.IsValid()) fail("box lies entirely outside the frame");
    internal::Place(frames, index, ScoredBox{box, conf, origin}, num_frames,
                    fail);
  }
  if (num_frames) frames.resize(std::size_t(*num_frames));
  return frames;
}

inline std::vector<std::vector<GroundTruthBox>> ParseGroundTruth(
    std::istream& in, const std::string& source,
    std::optional<std::int64_t> num_frames = std::nullopt) {
  std::vector<std::vector<GroundTruthBox>> frames;
  std::set<std::pair<std::int64_t, std::string>> seen;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    const auto f = internal::Fields(line);
    if (f.empty()) continue;
    const internal::LineError fail(source, line_no);
    if (f.size() != 6) fail("expected 6 fields, got " + std::to_string(f.size()));
    const std::int64_t index = internal::ParseIndex(f[0], fail);
    GroundTruthBox g;
    g.polyp_id = std::string(f[1]);
    g.centroid_x = internal::ParseReal(f[2], "cx", fail);
    g.centroid_y = internal::ParseReal(f[3], "cy", fail);
    g.width = internal::ParseReal(f[4], "w", fail);
    g.height = internal::ParseReal(f[5], "h", fail);
    if (!(g.width > 0.0) || !(g.height > 0.0)) {
      fail("width and height must be positive");
    }
    if (!seen.emplace(index, g.polyp_id).second) {
      fail("polyp " + g.polyp_id + " appears twice in frame " +
           std::to_string(index));
    }
    internal::Place(frames, index, std::move(g), num_frames, fail);
  }
  if (num_frames) frames.resize(std::size_t(*num_frames));
  return frames;
}

inline std::string FormatReal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void WriteDetection(std::ostream& out, std::int64_t frame,
                           const ScoredBox& b, bool with_origin) {
  out << frame << ' ' << FormatReal(b.box.x_min) << ' '
      << FormatReal(b.box.y_min) << ' ' << FormatReal(b.box.x_max) << ' '
      << FormatReal(b.box.y_max) << ' ' << FormatReal(b.confidence);
  if (with_origin) {
    out << (b.origin == BoxOrigin::kInterpolated ? " interp" : " det");
  }
  out << '\n';
}

inline void WriteDetections(std::ostream& out,
                            const std::vector<std::vector<ScoredBox>>& frames,
                            bool with_origin = false) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (const ScoredBox& b : frames[i]) {
      WriteDetection(out, std::int64_t(i), b, with_origin);
    }
  }
}

inline void WriteGroundTruth(
    std::ostream& out, const std::vector<std::vector<GroundTruthBox>>& frames) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (const GroundTruthBox& g : frames[i]) {
      out << i << ' ' << g.polyp_id << ' ' << FormatReal(g.centroid_x) << ' '
          << FormatReal(g.centroid_y) << ' ' << FormatReal(g.width) << ' '
          << FormatReal(g.height) << '\n';
    }
  }
}

}  // namespace records
}  // namespace framecorr

#endif  // FRAMECORR_RECORDS_HPP_
