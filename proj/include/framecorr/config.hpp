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
// Flat "key = value" run configuration. Keys map one-to-one onto
// IscuConfig / SsimParams fields plus the I/O paths; unknown keys are
// rejected. Blank lines and '#' comments are ignored.
//
//   half_window          int     3
//   confidence_gate      real    0.3
//   fc_quorum            int     3 (half the neighbors when half_window changes)
//   fill_quorum          int     3 (max(2, half_window) when it changes)
//   fill_iou             real    0.5
//   correlation          similarity | fixed
//   similarity_threshold real    0.85
//   ssim_k1              real    0.01
//   ssim_k2              real    0.03
//   ssim_dynamic_range   real    255
//   ssim_mode            global | windowed
//   ssim_window_size     int     8
//   ssim_window_stride   int     4
//   downsample_width     int     160
//   downsample_height    int     120
//   frames, detections, groundtruth, output   paths

#ifndef FRAMECORR_CONFIG_HPP_
#define FRAMECORR_CONFIG_HPP_

#include <charconv>
#include <cmath>
#include <istream>
#include <string>
#include <string_view>

#include "framecorr/correlator.hpp"
#include "framecorr/errors.hpp"

namespace framecorr {

struct RunConfig {
  IscuConfig iscu;
  std::string frames;
  std::string detections;
  std::string groundtruth;
  std::string output;

  // Sets one key. where prefixes error messages ("file:line" or "--set").
  void Set(std::string_view key, std::string_view value,
           const std::string& where) {
    auto fail = [&](const std::string& msg) -> void {
      throw InputError(where + ": " + msg);
    };
    auto as_int = [&]() {
      int v = 0;
      const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || p != value.data() + value.size()) {
        fail("'" + std::string(key) + "' expects an integer, got '" +
             std::string(value) + "'");
      }
      return v;
    };
    auto as_real = [&]() {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || p != value.data() + value.size() || !std::isfinite(v)) {
        fail("'" + std::string(key) + "' expects a finite number, got '" +
             std::string(value) + "'");
      }
      return v;
    };
    SsimParams& ssim = iscu.ssim;
    if (key == "half_window") {
      iscu.half_window = as_int();
    } else if (key == "confidence_gate") {
      iscu.confidence_gate = as_real();
    } else if (key == "fc_quorum") {
      iscu.fc_quorum = as_int();
      fc_quorum_set_ = true;
    } else if (key == "fill_quorum") {
      iscu.fill_quorum = as_int();
      fill_quorum_set_ = true;
    } else if (key == "fill_iou") {
      iscu.fill_iou = as_real();
    } else if (key == "correlation") {
      if (value == "similarity") {
        iscu.mode = CorrelationMode::kSimilarity;
      } else if (value == "fixed") {
        iscu.mode = CorrelationMode::kFixed;
      } else {
        fail("correlation must be 'similarity' or 'fixed'");
      }
    } else if (key == "similarity_threshold") {
      ssim.similarity_threshold = as_real();
    } else if (key == "ssim_k1") {
      ssim.k1 = as_real();
    } else if (key == "ssim_k2") {
      ssim.k2 = as_real();
    } else if (key == "ssim_dynamic_range") {
      ssim.dynamic_range = as_real();
    } else if (key == "ssim_mode") {
      if (value == "global") {
        ssim.mode = SsimMode::kGlobal;
      } else if (value == "windowed") {
        ssim.mode = SsimMode::kWindowed;
      } else {
        fail("ssim_mode must be 'global' or 'windowed'");
      }
    } else if (key == "ssim_window_size") {
      ssim.window_size = as_int();
    } else if (key == "ssim_window_stride") {
      ssim.window_stride = as_int();
    } else if (key == "downsample_width") {
      ssim.downsample_width = as_int();
    } else if (key == "downsample_height") {
      ssim.downsample_height = as_int();
    } else if (key == "frames") {
      frames = value;
    } else if (key == "detections") {
      detections = value;
    } else if (key == "groundtruth") {
      groundtruth = value;
    } else if (key == "output") {
      output = value;
    } else {
      fail("unknown key '" + std::string(key) + "'");
    }
  }

  // "key=value" as given on the command line.
  void SetAssignment(std::string_view assignment, const std::string& where) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(where + ": expected key=value, got '" +
                       std::string(assignment) + "'");
    }
    Set(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)), where);
  }

  void Load(std::istream& in, const std::string& source) {
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
      std::string_view view = line;
      if (const auto hash = view.find('#'); hash != std::string_view::npos) {
        view = view.substr(0, hash);
      }
      view = Trim(view);
      if (view.empty()) continue;
      SetAssignment(view, source + ":" + std::to_string(line_no));
    }
  }

  // Quorums not given explicitly follow the window size; then validates.
  IscuConfig Resolve() const {
    IscuConfig out = iscu;
    const IscuConfig scaled = IscuConfig::ForHalfWindow(iscu.half_window);
    if (!fc_quorum_set_) out.fc_quorum = scaled.fc_quorum;
    if (!fill_quorum_set_) out.fill_quorum = scaled.fill_quorum;
    out.Validate();
    return out;
  }

  void MarkQuorumsExplicit(bool fc, bool fill) {
    fc_quorum_set_ = fc_quorum_set_ || fc;
    fill_quorum_set_ = fill_quorum_set_ || fill;
  }

 private:
  static std::string_view Trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
      s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
      s.remove_suffix(1);
    }
    return s;
  }

  bool fc_quorum_set_ = false;
  bool fill_quorum_set_ = false;
};

}  // namespace framecorr

#endif  // FRAMECORR_CONFIG_HPP_
