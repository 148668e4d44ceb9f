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
#ifndef FRAMECORR_SERIALIZE_HPP_
#define FRAMECORR_SERIALIZE_HPP_

#include <cstdio>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "json.hpp"

#include "framecorr/errors.hpp"
#include "framecorr/metrics.hpp"
#include "framecorr/synth.hpp"

namespace framecorr {

namespace internal {

inline std::string Fixed2(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

inline std::string General(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

inline nlohmann::json OrNull(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace internal

// "key = value" lines. Percentages carry two decimals.
inline void WriteReportText(std::ostream& out, const EvalReport& r) {
  const EvalTotals& t = r.totals;
  out << "frames = " << t.frames << '\n'
      << "negative_frames = " << t.negative_frames << '\n'
      << "tp = " << t.tp << '\n'
      << "fp = " << t.fp << '\n'
      << "fn = " << t.fn << '\n'
      << "tn = " << t.tn << '\n'
      << "sen = " << internal::Fixed2(r.sen) << '\n'
      << "pre = " << internal::Fixed2(r.pre) << '\n'
      << "spe = " << internal::Fixed2(r.spe) << '\n'
      << "f1 = " << internal::Fixed2(r.f1) << '\n'
      << "f2 = " << internal::Fixed2(r.f2) << '\n'
      << "mnfp = " << internal::General(r.mnfp) << '\n'
      << "pdr = " << internal::Fixed2(r.pdr) << '\n'
      << "map = " << internal::General(r.map) << '\n'
      << "mpt_ms = " << internal::General(r.mpt_ms) << '\n';
}

inline nlohmann::json ReportToJson(const EvalReport& r) {
  const EvalTotals& t = r.totals;
  return nlohmann::json{
      {"frames", t.frames},          {"negative_frames", t.negative_frames},
      {"tp", t.tp},                  {"fp", t.fp},
      {"fn", t.fn},                  {"tn", t.tn},
      {"sen", internal::OrNull(r.sen)}, {"pre", internal::OrNull(r.pre)},
      {"spe", internal::OrNull(r.spe)}, {"f1", internal::OrNull(r.f1)},
      {"f2", internal::OrNull(r.f2)},   {"mnfp", internal::OrNull(r.mnfp)},
      {"pdr", internal::OrNull(r.pdr)}, {"map", internal::OrNull(r.map)},
      {"mpt_ms", internal::OrNull(r.mpt_ms)},
  };
}

// Scenario description as JSON. Every ScenarioConfig field is optional and
// defaults as in the struct; unknown keys are rejected. Tracks:
//   {"id": "p1", "start": [x_min, y_min, x_max, y_max], "vx": 1, "vy": 0,
//    "wobble_amplitude": 0, "wobble_period": 60, "first_frame": 0,
//    "last_frame": -1}
inline ScenarioConfig ScenarioFromJson(const nlohmann::json& j,
                                       const std::string& source) {
  auto fail = [&](const std::string& msg) -> void {
    throw InputError(source + ": " + msg);
  };
  if (!j.is_object()) fail("scenario must be a JSON object");
  ScenarioConfig cfg;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "frame_width") cfg.frame_width = v.get<int>();
      else if (key == "frame_height") cfg.frame_height = v.get<int>();
      else if (key == "n_frames") cfg.n_frames = v.get<int>();
      else if (key == "rng_seed") cfg.rng_seed = v.get<std::uint64_t>();
      else if (key == "transient_fp_rate") cfg.transient_fp_rate = v.get<double>();
      else if (key == "fp_lifetime") cfg.fp_lifetime = v.get<int>();
      else if (key == "fp_lifetime_max") cfg.fp_lifetime_max = v.get<int>();
      else if (key == "fp_clearance") cfg.fp_clearance = v.get<int>();
      else if (key == "fp_min_size") cfg.fp_min_size = v.get<double>();
      else if (key == "fp_max_size") cfg.fp_max_size = v.get<double>();
      else if (key == "tp_dropout_rate") cfg.tp_dropout_rate = v.get<double>();
      else if (key == "box_jitter") cfg.box_jitter = v.get<double>();
      else if (key == "scene_breaks") cfg.scene_breaks = v.get<std::set<int>>();
      else if (key == "tp_confidence_mean") cfg.tp_confidence_mean = v.get<double>();
      else if (key == "fp_confidence_mean") cfg.fp_confidence_mean = v.get<double>();
      else if (key == "confidence_jitter") cfg.confidence_jitter = v.get<double>();
      else if (key == "tracks") {
        for (const auto& tj : v) {
          TrackSpec t;
          for (const auto& [tk, tv] : tj.items()) {
            if (tk == "id") t.polyp_id = tv.get<std::string>();
            else if (tk == "start") {
              const auto c = tv.get<std::vector<double>>();
              if (c.size() != 4) fail("track start needs 4 coordinates");
              t.start = BoundingBox{c[0], c[1], c[2], c[3]};
            } else if (tk == "vx") t.vx = tv.get<double>();
            else if (tk == "vy") t.vy = tv.get<double>();
            else if (tk == "wobble_amplitude") t.wobble_amplitude = tv.get<double>();
            else if (tk == "wobble_period") t.wobble_period = tv.get<double>();
            else if (tk == "first_frame") t.first_frame = tv.get<int>();
            else if (tk == "last_frame") t.last_frame = tv.get<int>();
            else fail("unknown track key '" + tk + "'");
          }
          if (t.polyp_id.empty()) t.polyp_id = "p" + std::to_string(cfg.tracks.size() + 1);
          cfg.tracks.push_back(std::move(t));
        }
      } else {
        fail("unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(e.what());
  }
  cfg.Validate();
  return cfg;
}

inline nlohmann::json ScenarioToJson(const ScenarioConfig& cfg) {
  nlohmann::json tracks = nlohmann::json::array();
  for (const TrackSpec& t : cfg.tracks) {
    tracks.push_back({{"id", t.polyp_id},
                      {"start", {t.start.x_min, t.start.y_min, t.start.x_max, t.start.y_max}},
                      {"vx", t.vx},
                      {"vy", t.vy},
                      {"wobble_amplitude", t.wobble_amplitude},
                      {"wobble_period", t.wobble_period},
                      {"first_frame", t.first_frame},
                      {"last_frame", t.last_frame}});
  }
  return nlohmann::json{{"frame_width", cfg.frame_width},
                        {"frame_height", cfg.frame_height},
                        {"n_frames", cfg.n_frames},
                        {"rng_seed", cfg.rng_seed},
                        {"transient_fp_rate", cfg.transient_fp_rate},
                        {"fp_lifetime", cfg.fp_lifetime},
                        {"fp_lifetime_max", cfg.fp_lifetime_max},
                        {"fp_clearance", cfg.fp_clearance},
                        {"fp_min_size", cfg.fp_min_size},
                        {"fp_max_size", cfg.fp_max_size},
                        {"tp_dropout_rate", cfg.tp_dropout_rate},
                        {"box_jitter", cfg.box_jitter},
                        {"scene_breaks", cfg.scene_breaks},
                        {"tp_confidence_mean", cfg.tp_confidence_mean},
                        {"fp_confidence_mean", cfg.fp_confidence_mean},
                        {"confidence_jitter", cfg.confidence_jitter},
                        {"tracks", tracks}};
}

}  // namespace framecorr

#endif  // FRAMECORR_SERIALIZE_HPP_
