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
#ifndef FRAMECORR_SIMILARITY_HPP_
#define FRAMECORR_SIMILARITY_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "framecorr/errors.hpp"

namespace framecorr {

// Row-major 8-bit luma raster.
struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  GrayFrame() = default;
  GrayFrame(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), samples(std::size_t(w) * std::size_t(h), fill) {
    if (w <= 0 || h <= 0) throw InputError("frame dimensions must be positive");
  }
  GrayFrame(int w, int h, std::vector<std::uint8_t> data)
      : width(w), height(h), samples(std::move(data)) {
    if (w <= 0 || h <= 0 || samples.size() != std::size_t(w) * std::size_t(h)) {
      throw InputError("luma raster size does not match " + std::to_string(w) +
                       "x" + std::to_string(h));
    }
  }

  std::uint8_t at(int x, int y) const {
    return samples[std::size_t(y) * std::size_t(width) + std::size_t(x)];
  }
  std::uint8_t& at(int x, int y) {
    return samples[std::size_t(y) * std::size_t(width) + std::size_t(x)];
  }

  friend bool operator==(const GrayFrame&, const GrayFrame&) = default;
};

// Interleaved 8-bit RGB raster.
struct RgbFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

enum class SsimMode : std::uint8_t { kGlobal, kWindowed };

struct SsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;  // L
  SsimMode mode = SsimMode::kGlobal;
  int window_size = 8;
  int window_stride = 4;
  int downsample_width = 160;
  int downsample_height = 120;
  double similarity_threshold = 0.85;

  double b1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double b2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
  double b3() const { return b2() / 2.0; }

  void Validate() const {
    if (!(k1 > 0.0) || !(k2 > 0.0) || !(dynamic_range > 0.0)) {
      throw InputError("SSIM constants k1, k2 and L must be positive");
    }
    if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0)) {
      throw InputError("similarity threshold must lie in (0, 1]");
    }
    if (downsample_width <= 0 || downsample_height <= 0) {
      throw InputError("downsample dimensions must be positive");
    }
    if (window_size <= 0 || window_stride <= 0) {
      throw InputError("SSIM window size and stride must be positive");
    }
  }
};

// Rec.601 luma, rounded half up: (299 R + 587 G + 114 B + 500) / 1000.
inline GrayFrame ToLuma(const RgbFrame& frame) {
  if (frame.width <= 0 || frame.height <= 0 ||
      frame.rgb.size() !=
          std::size_t(frame.width) * std::size_t(frame.height) * 3) {
    throw InputError("malformed RGB raster");
  }
  GrayFrame out(frame.width, frame.height);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const std::uint32_t r = frame.rgb[3 * i];
    const std::uint32_t g = frame.rgb[3 * i + 1];
    const std::uint32_t b = frame.rgb[3 * i + 2];
    out.samples[i] =
        static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
  }
  return out;
}

namespace internal {

// Source/target overlap weights for exact area averaging along one axis.
// In units where a source pixel spans target_len and a target pixel spans
// source_len, every target pixel collects a total weight of source_len.
struct AxisTap {
  int src;
  std::uint32_t weight;
};

inline std::vector<std::vector<AxisTap>> AreaTaps(int source_len,
                                                  int target_len) {
  std::vector<std::vector<AxisTap>> taps(target_len);
  for (int t = 0; t < target_len; ++t) {
    const std::int64_t lo = std::int64_t(t) * source_len;
    const std::int64_t hi = lo + source_len;
    for (std::int64_t s = lo / target_len; s * target_len < hi; ++s) {
      const std::int64_t s_lo = s * target_len;
      const std::int64_t s_hi = s_lo + target_len;
      const std::int64_t w = std::min(hi, s_hi) - std::max(lo, s_lo);
      if (w > 0) taps[t].push_back({int(s), std::uint32_t(w)});
    }
  }
  return taps;
}

}  // namespace internal

// Box-filter resampling with exact integer weights, rounded half up.
inline GrayFrame Downsample(const GrayFrame& g, int target_w, int target_h) {
  if (target_w <= 0 || target_h <= 0) {
    throw InputError("downsample target must be positive");
  }
  if (target_w > g.width || target_h > g.height) {
    throw InputError("downsample target " + std::to_string(target_w) + "x" +
                     std::to_string(target_h) + " exceeds source " +
                     std::to_string(g.width) + "x" + std::to_string(g.height));
  }
  if (target_w == g.width && target_h == g.height) return g;

  const auto col_taps = internal::AreaTaps(g.width, target_w);
  const auto row_taps = internal::AreaTaps(g.height, target_h);

  // Horizontal pass: each entry is sum(weight * value), scale g.width.
  std::vector<std::uint32_t> horizontal(std::size_t(target_w) * g.height);
  for (int y = 0; y < g.height; ++y) {
    const std::uint8_t* row = g.samples.data() + std::size_t(y) * g.width;
    std::uint32_t* out = horizontal.data() + std::size_t(y) * target_w;
    for (int x = 0; x < target_w; ++x) {
      std::uint32_t acc = 0;
      for (const internal::AxisTap& tap : col_taps[x]) {
        acc += tap.weight * row[tap.src];
      }
      out[x] = acc;
    }
  }

  const std::uint64_t denom = std::uint64_t(g.width) * std::uint64_t(g.height);
  GrayFrame out(target_w, target_h);
  std::vector<std::uint64_t> acc(target_w);
  for (int y = 0; y < target_h; ++y) {
    std::fill(acc.begin(), acc.end(), 0);
    for (const internal::AxisTap& tap : row_taps[y]) {
      const std::uint32_t* src =
          horizontal.data() + std::size_t(tap.src) * target_w;
      for (int x = 0; x < target_w; ++x) {
        acc[x] += std::uint64_t(tap.weight) * src[x];
      }
    }
    for (int x = 0; x < target_w; ++x) {
      out.at(x, y) = static_cast<std::uint8_t>((2 * acc[x] + denom) / (2 * denom));
    }
  }
  return out;
}

// Exact first and second moments of one frame, reusable across pairs.
struct FrameMoments {
  std::uint64_t count = 0;
  std::uint64_t sum = 0;
  std::uint64_t sum_sq = 0;

  static FrameMoments Of(std::span<const std::uint8_t> samples) {
    FrameMoments m;
    m.count = samples.size();
    for (std::uint8_t v : samples) {
      m.sum += v;
      m.sum_sq += std::uint64_t(v) * v;
    }
    return m;
  }
};

namespace internal {

// l * con * s from population statistics, each factor as written.
inline double SsimFromStats(double mu_x, double mu_y, double var_x,
                            double var_y, double cov_xy,
                            const SsimParams& p) {
  const double b1 = p.b1();
  const double b2 = p.b2();
  const double b3 = p.b3();
  const double sd_x = std::sqrt(var_x);
  const double sd_y = std::sqrt(var_y);
  const double luminance =
      (2.0 * mu_x * mu_y + b1) / (mu_x * mu_x + mu_y * mu_y + b1);
  const double contrast = (2.0 * sd_x * sd_y + b2) / (var_x + var_y + b2);
  const double structure = (cov_xy + b3) / (sd_x * sd_y + b3);
  return luminance * contrast * structure;
}

// Population variance/covariance from exact integer sums.
inline double CentralMoment(std::uint64_t n, std::uint64_t sum_a,
                            std::uint64_t sum_b, std::uint64_t sum_ab) {
  // n * sum_ab - sum_a * sum_b fits in 128 bits; for frames up to 2^24
  // samples of 8-bit data it also fits in a signed 64-bit integer.
  const __int128 num = static_cast<__int128>(n) * sum_ab -
                       static_cast<__int128>(sum_a) * sum_b;
  const double nn = double(n) * double(n);
  return static_cast<double>(num) / nn;
}

inline double GlobalSsim(std::span<const std::uint8_t> x,
                         const FrameMoments& mx,
                         std::span<const std::uint8_t> y,
                         const FrameMoments& my, const SsimParams& p) {
  std::uint64_t sum_xy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum_xy += std::uint32_t(x[i]) * y[i];
  }
  const std::uint64_t n = mx.count;
  const double mu_x = double(mx.sum) / double(n);
  const double mu_y = double(my.sum) / double(n);
  return SsimFromStats(mu_x, mu_y, CentralMoment(n, mx.sum, mx.sum, mx.sum_sq),
                       CentralMoment(n, my.sum, my.sum, my.sum_sq),
                       CentralMoment(n, mx.sum, my.sum, sum_xy), p);
}

inline double WindowedSsim(const GrayFrame& x, const GrayFrame& y,
                           const SsimParams& p) {
  const int ws = p.window_size;
  if (x.width < ws || x.height < ws) {
    throw InputError("frame smaller than the SSIM window");
  }
  double total = 0.0;
  std::size_t windows = 0;
  for (int y0 = 0; y0 + ws <= x.height; y0 += p.window_stride) {
    for (int x0 = 0; x0 + ws <= x.width; x0 += p.window_stride) {
      std::uint64_t sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (int j = y0; j < y0 + ws; ++j) {
        for (int i = x0; i < x0 + ws; ++i) {
          const std::uint32_t a = x.at(i, j);
          const std::uint32_t b = y.at(i, j);
          sx += a;
          sy += b;
          sxx += a * a;
          syy += b * b;
          sxy += a * b;
        }
      }
      const std::uint64_t n = std::uint64_t(ws) * ws;
      total += SsimFromStats(double(sx) / double(n), double(sy) / double(n),
                             CentralMoment(n, sx, sx, sxx),
                             CentralMoment(n, sy, sy, syy),
                             CentralMoment(n, sx, sy, sxy), p);
      ++windows;
    }
  }
  return total / double(windows);
}

inline void CheckSameShape(const GrayFrame& x, const GrayFrame& y) {
  if (x.width != y.width || x.height != y.height) {
    throw InputError("SSIM operands differ in size: " +
                     std::to_string(x.width) + "x" + std::to_string(x.height) +
                     " vs " + std::to_string(y.width) + "x" +
                     std::to_string(y.height));
  }
}

}  // namespace internal

// Structural similarity of two equally sized frames. Global mode treats the
// whole frame as one window; windowed mode averages over a sliding grid.
inline double Ssim(const GrayFrame& x, const GrayFrame& y,
                   const SsimParams& p = {}) {
  internal::CheckSameShape(x, y);
  if (p.mode == SsimMode::kWindowed) return internal::WindowedSsim(x, y, p);
  return internal::GlobalSsim(x.samples, FrameMoments::Of(x.samples),
                              y.samples, FrameMoments::Of(y.samples), p);
}

// Indices of the neighbors whose SSIM with current is strictly above the
// threshold, in input order.
inline std::vector<std::size_t> SimilarFrames(
    const GrayFrame& current, std::span<const GrayFrame> neighbors,
    const SsimParams& p = {}) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    if (Ssim(current, neighbors[i], p) > p.similarity_threshold) {
      out.push_back(i);
    }
  }
  return out;
}

// A frame reduced to the fixed SSIM working resolution, with its moments
// cached. Frames smaller than the working size are used as-is on that axis.
struct SsimSignature {
  GrayFrame reduced;
  FrameMoments moments;

  static SsimSignature Of(const GrayFrame& frame, const SsimParams& p) {
    SsimSignature sig;
    sig.reduced = Downsample(frame, std::min(p.downsample_width, frame.width),
                             std::min(p.downsample_height, frame.height));
    sig.moments = FrameMoments::Of(sig.reduced.samples);
    return sig;
  }
};

inline double Ssim(const SsimSignature& x, const SsimSignature& y,
                   const SsimParams& p) {
  internal::CheckSameShape(x.reduced, y.reduced);
  if (p.mode == SsimMode::kWindowed) {
    return internal::WindowedSsim(x.reduced, y.reduced, p);
  }
  return internal::GlobalSsim(x.reduced.samples, x.moments, y.reduced.samples,
                              y.moments, p);
}

}  // namespace framecorr

#endif  // FRAMECORR_SIMILARITY_HPP_
