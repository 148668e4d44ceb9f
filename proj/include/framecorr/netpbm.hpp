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
// Binary PGM (P5) and PPM (P6) with maxval <= 255, and frame directories
// whose files are named by zero-padded frame index (000.pgm, 001.pgm, ...).

#ifndef FRAMECORR_NETPBM_HPP_
#define FRAMECORR_NETPBM_HPP_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "framecorr/errors.hpp"
#include "framecorr/similarity.hpp"

namespace framecorr {
namespace netpbm {

namespace internal {

inline void SkipSpaceAndComments(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

inline long ReadHeaderInt(std::istream& in, const std::string& name,
                          const char* field) {
  SkipSpaceAndComments(in);
  long v = -1;
  if (!(in >> v) || v <= 0) {
    throw InputError(name + ": bad " + field + " in netpbm header");
  }
  return v;
}

}  // namespace internal

// Reads one P5 or P6 image as luma. P6 goes through ToLuma; maxval below
// 255 is rescaled to the full 8-bit range.
inline GrayFrame Read(std::istream& in, const std::string& name) {
  char magic[2] = {0, 0};
  if (!in.read(magic, 2) || magic[0] != 'P' ||
      (magic[1] != '5' && magic[1] != '6')) {
    throw InputError(name + ": not a binary PGM (P5) or PPM (P6) file");
  }
  const bool color = magic[1] == '6';
  const long w = internal::ReadHeaderInt(in, name, "width");
  const long h = internal::ReadHeaderInt(in, name, "height");
  const long maxval = internal::ReadHeaderInt(in, name, "maxval");
  if (maxval > 255) {
    throw InputError(name + ": unsupported maxval " + std::to_string(maxval) +
                     " (only 8-bit images are supported)");
  }
  if (w > (1 << 16) || h > (1 << 16)) {
    throw InputError(name + ": image dimensions out of range");
  }
  if (!std::isspace(in.get())) {
    throw InputError(name + ": malformed netpbm header");
  }

  const std::size_t pixels = std::size_t(w) * std::size_t(h);
  std::vector<std::uint8_t> data(pixels * (color ? 3 : 1));
  if (!in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size()))) {
    throw InputError(name + ": truncated pixel data");
  }
  if (maxval != 255) {
    for (std::uint8_t& v : data) {
      if (v > maxval) throw InputError(name + ": sample exceeds maxval");
      v = static_cast<std::uint8_t>((v * 255 * 2 + maxval) / (2 * maxval));
    }
  }
  if (color) return ToLuma(RgbFrame{int(w), int(h), std::move(data)});
  return GrayFrame(int(w), int(h), std::move(data));
}

inline GrayFrame ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open");
  return Read(in, path.string());
}

inline void WritePgm(std::ostream& out, const GrayFrame& g) {
  out << "P5\n" << g.width << ' ' << g.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(g.samples.data()),
            static_cast<std::streamsize>(g.samples.size()));
}

inline void WritePpm(std::ostream& out, const RgbFrame& f) {
  out << "P6\n" << f.width << ' ' << f.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(f.rgb.data()),
            static_cast<std::streamsize>(f.rgb.size()));
}

// Frame files of a directory, ordered by index. The indices must run
// 0, 1, 2, ... without gaps.
inline std::vector<std::filesystem::path> ListFrames(
    const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw InputError(dir.string() + ": not a directory");
  }
  std::vector<std::pair<long long, fs::path>> found;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = e.path().extension().string();
    if (ext != ".pgm" && ext != ".ppm") continue;
    const std::string stem = e.path().stem().string();
    if (stem.empty() || stem.size() > 12 ||
        !std::all_of(stem.begin(), stem.end(),
                     [](unsigned char c) { return std::isdigit(c); })) {
      continue;
    }
    found.emplace_back(std::stoll(stem), e.path());
  }
  std::sort(found.begin(), found.end());
  std::vector<fs::path> out;
  for (std::size_t i = 0; i < found.size(); ++i) {
    const long long expected = static_cast<long long>(i);
    if (found[i].first != expected) {
      if (found[i].first < expected) {
        throw InputError(dir.string() + ": frame " +
                         std::to_string(found[i].first) +
                         " appears more than once");
      }
      std::string gap = std::to_string(expected);
      if (found[i].first - 1 > expected) {
        gap += "-" + std::to_string(found[i].first - 1);
      }
      throw InputError(dir.string() + ": missing frame " + gap);
    }
    out.push_back(found[i].second);
  }
  return out;
}

inline std::vector<GrayFrame> ReadFrames(const std::filesystem::path& dir) {
  std::vector<GrayFrame> frames;
  for (const auto& path : ListFrames(dir)) {
    GrayFrame f = ReadFile(path);
    if (!frames.empty() &&
        (f.width != frames[0].width || f.height != frames[0].height)) {
      throw InputError(path.string() + ": size " + std::to_string(f.width) +
                       "x" + std::to_string(f.height) +
                       " differs from earlier frames");
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace netpbm
}  // namespace framecorr

#endif  // FRAMECORR_NETPBM_HPP_
