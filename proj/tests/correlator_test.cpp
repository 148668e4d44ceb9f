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
#include "framecorr/correlator.hpp"

#include <random>

#include <gtest/gtest.h>

#include "framecorr/synth.hpp"
#include "oracles/naive_correlator.hpp"

namespace framecorr {
namespace {

constexpr FrameMeta kMeta{320, 240, 10};

ScoredBox Det(double x0, double y0, double x1, double y1, double conf = 0.9) {
  return ScoredBox{{x0, y0, x1, y1}, conf, BoxOrigin::kDetector};
}

// Owns neighbor box lists so the window's spans stay valid.
struct WindowBuilder {
  std::vector<ScoredBox> center;
  std::vector<std::pair<int, double>> slots;  // offset, similarity
  std::vector<std::vector<ScoredBox>> boxes;

  void Add(int offset, double similarity, std::vector<ScoredBox> b) {
    slots.emplace_back(offset, similarity);
    boxes.push_back(std::move(b));
  }
  CorrelationWindow Build() const {
    CorrelationWindow w{kMeta, center, {}};
    for (std::size_t i = 0; i < slots.size(); ++i) {
      w.neighbors.push_back({slots[i].first, slots[i].second, boxes[i]});
    }
    return w;
  }
};

const ScoredBox kPolyp = Det(100, 100, 140, 140);
const ScoredBox kElsewhere = Det(250, 10, 290, 50);

// Six neighbors, the first hits of which contain the polyp.
WindowBuilder SixNeighbors(int hits, double similarity) {
  WindowBuilder b;
  b.center = {kPolyp};
  int placed = 0;
  for (int off : {-3, -2, -1, 1, 2, 3}) {
    b.Add(off, similarity,
          placed++ < hits ? std::vector<ScoredBox>{kPolyp}
                          : std::vector<ScoredBox>{kElsewhere});
  }
  return b;
}

TEST(EliminateNoiseTest, KeepsBoxPresentInAllSimilarFrames) {
  const IscuConfig cfg;
  EXPECT_EQ(EliminateNoise(SixNeighbors(6, 1.0).Build(), cfg),
            std::vector<ScoredBox>{kPolyp});
}

TEST(EliminateNoiseTest, RemovesBoxAbsentFromSimilarFrames) {
  const IscuConfig cfg;
  EXPECT_TRUE(EliminateNoise(SixNeighbors(0, 1.0).Build(), cfg).empty());
}

TEST(EliminateNoiseTest, StrictMajorityOfSimilarFrames) {
  const IscuConfig cfg;
  for (int hits = 0; hits <= 6; ++hits) {
    const bool kept = !EliminateNoise(SixNeighbors(hits, 0.95).Build(), cfg).empty();
    EXPECT_EQ(kept, hits >= 4) << hits;
  }
}

TEST(EliminateNoiseTest, FixedCorrelationWhenNothingIsSimilar) {
  const IscuConfig cfg;
  EXPECT_EQ(EliminateNoise(SixNeighbors(3, 0.2).Build(), cfg).size(), 1u);
  EXPECT_TRUE(EliminateNoise(SixNeighbors(2, 0.2).Build(), cfg).empty());
}

TEST(EliminateNoiseTest, SimilarityIsStrictlyAboveThreshold) {
  const IscuConfig cfg;
  // At exactly 0.85 nothing counts as similar, so FC applies: 3 of 6 keeps.
  EXPECT_EQ(EliminateNoise(SixNeighbors(3, 0.85).Build(), cfg).size(), 1u);
  // Just above, the same window needs 4 of 6.
  EXPECT_TRUE(EliminateNoise(SixNeighbors(3, 0.8500001).Build(), cfg).empty());
}

TEST(EliminateNoiseTest, OnlySimilarFramesVote) {
  const IscuConfig cfg;
  WindowBuilder b;
  b.center = {kPolyp};
  b.Add(-3, 0.1, {});
  b.Add(-2, 0.1, {});
  b.Add(-1, 0.9, {kPolyp});
  b.Add(1, 0.1, {});
  b.Add(2, 0.1, {});
  b.Add(3, 0.1, {});
  // m = 1 and the only similar frame agrees.
  EXPECT_EQ(EliminateNoise(b.Build(), cfg).size(), 1u);
  b.slots[3].second = 0.9;  // m = 2, one hit: 1 > 1 fails
  EXPECT_TRUE(EliminateNoise(b.Build(), cfg).empty());
}

TEST(EliminateNoiseTest, UsesAdaptiveThreshold) {
  const IscuConfig cfg;
  // Threshold for a 40x40 box on 320x240 is 0.5*(1/8 + 1/6) = 0.1458.
  const ScoredBox shifted = Det(128, 128, 168, 168);  // IoU 144/3056 = 0.047
  const ScoredBox near = Det(110, 110, 150, 150);     // IoU 900/2300 = 0.39
  for (const auto& [b, expect] : {std::pair{shifted, false}, {near, true}}) {
    WindowBuilder w;
    w.center = {kPolyp};
    for (int off : {-3, -2, -1, 1, 2, 3}) w.Add(off, 1.0, {b});
    EXPECT_EQ(!EliminateNoise(w.Build(), cfg).empty(), expect);
  }
}

TEST(EliminateNoiseTest, PreservesInputOrder) {
  const IscuConfig cfg;
  const ScoredBox a = Det(10, 10, 50, 50), c = Det(200, 150, 240, 190);
  WindowBuilder w;
  w.center = {a, kElsewhere, c};
  for (int off : {-3, -2, -1, 1, 2, 3}) w.Add(off, 1.0, {c, a});
  EXPECT_EQ(EliminateNoise(w.Build(), cfg), (std::vector<ScoredBox>{a, c}));
}

TEST(EliminateNoiseTest, TruncatedWindowScalesQuorum) {
  const IscuConfig cfg;
  // First frame of a sequence: three future neighbors, none similar.
  WindowBuilder w;
  w.center = {kPolyp};
  w.Add(1, 0.0, {kPolyp});
  w.Add(2, 0.0, {kPolyp});
  w.Add(3, 0.0, {});
  EXPECT_EQ(EliminateNoise(w.Build(), cfg).size(), 1u);  // 2 >= ceil(3/2)
  w.boxes[1].clear();
  EXPECT_TRUE(EliminateNoise(w.Build(), cfg).empty());
}

TEST(EliminateNoiseTest, NoNeighborsPassesThrough) {
  WindowBuilder w;
  w.center = {kPolyp, kElsewhere};
  EXPECT_EQ(EliminateNoise(w.Build(), IscuConfig{}), w.center);
}

TEST(EliminateNoiseTest, FixedModeIgnoresSimilarity) {
  IscuConfig cfg;
  cfg.mode = CorrelationMode::kFixed;
  EXPECT_EQ(EliminateNoise(SixNeighbors(3, 1.0).Build(), cfg).size(), 1u);
}

TEST(CorrectMissedTest, AddsMeanOfCluster) {
  const IscuConfig cfg;
  WindowBuilder w;
  w.Add(-3, 1.0, {});
  w.Add(-2, 1.0, {});
  w.Add(-1, 1.0, {Det(10, 10, 50, 50, 0.9)});
  w.Add(1, 1.0, {Det(12, 12, 52, 52, 0.6)});
  w.Add(2, 1.0, {Det(14, 14, 54, 54, 0.6)});
  w.Add(3, 1.0, {});
  const auto added = CorrectMissed(w.Build(), cfg);
  ASSERT_EQ(added.size(), 1u);
  EXPECT_EQ(added[0].box, (BoundingBox{12, 12, 52, 52}));
  EXPECT_DOUBLE_EQ(added[0].confidence, 0.7);
  EXPECT_EQ(added[0].origin, BoxOrigin::kInterpolated);
}

TEST(CorrectMissedTest, SmallBoxesWithLargeStepsDoNotCluster) {
  // 10x10 boxes two pixels apart overlap at IoU 0.47 and do not join.
  WindowBuilder w;
  w.Add(-1, 1.0, {Det(10, 10, 20, 20)});
  w.Add(1, 1.0, {Det(12, 12, 22, 22)});
  w.Add(2, 1.0, {Det(14, 14, 24, 24)});
  EXPECT_TRUE(CorrectMissed(w.Build(), IscuConfig{}).empty());
}

TEST(CorrectMissedTest, NothingAddedWhenCenterHasTheBox) {
  WindowBuilder w;
  w.center = {Det(11, 11, 51, 51)};
  w.Add(-1, 1.0, {Det(10, 10, 50, 50)});
  w.Add(1, 1.0, {Det(12, 12, 52, 52)});
  w.Add(2, 1.0, {Det(14, 14, 54, 54)});
  EXPECT_TRUE(CorrectMissed(w.Build(), IscuConfig{}).empty());
}

TEST(CorrectMissedTest, NeedsPastAndFuture) {
  WindowBuilder w;
  w.Add(-3, 1.0, {Det(10, 10, 50, 50)});
  w.Add(-2, 1.0, {Det(11, 11, 51, 51)});
  w.Add(-1, 1.0, {Det(12, 12, 52, 52)});
  w.Add(1, 1.0, {});
  w.Add(2, 1.0, {});
  w.Add(3, 1.0, {});
  EXPECT_TRUE(CorrectMissed(w.Build(), IscuConfig{}).empty());
}

TEST(CorrectMissedTest, NeedsQuorum) {
  WindowBuilder w;
  w.Add(-1, 1.0, {Det(10, 10, 50, 50)});
  w.Add(1, 1.0, {Det(12, 12, 52, 52)});
  EXPECT_TRUE(CorrectMissed(w.Build(), IscuConfig{}).empty());
  IscuConfig two;
  two.fill_quorum = 2;
  EXPECT_EQ(CorrectMissed(w.Build(), two).size(), 1u);
}

TEST(CorrectMissedTest, EachBoxJoinsOneCluster) {
  // Two separate tracks, both missing in the center.
  WindowBuilder w;
  const ScoredBox a = Det(10, 10, 50, 50), b = Det(200, 100, 240, 140);
  for (int off : {-2, -1, 1, 2}) w.Add(off, 1.0, {a, b});
  const auto added = CorrectMissed(w.Build(), IscuConfig{});
  ASSERT_EQ(added.size(), 2u);
  EXPECT_EQ(added[0].box, a.box);
  EXPECT_EQ(added[1].box, b.box);
}

TEST(CorrectMissedTest, HighestIouJoinsWhenFrameHasTwoCandidates) {
  WindowBuilder w;
  w.Add(-1, 1.0, {Det(10, 10, 50, 50)});
  // Both overlap the seed above 0.5; the closer one joins.
  w.Add(1, 1.0, {Det(16, 16, 56, 56), Det(11, 11, 51, 51)});
  w.Add(2, 1.0, {Det(12, 12, 52, 52)});
  const auto added = CorrectMissed(w.Build(), IscuConfig{});
  ASSERT_EQ(added.size(), 1u);
  EXPECT_EQ(added[0].box, (BoundingBox{11, 11, 51, 51}));
}

FrameDetections Frame(std::int64_t index, std::vector<ScoredBox> boxes,
                      int w = 64, int h = 48) {
  return FrameDetections{{w, h, index}, std::move(boxes)};
}

TEST(CorrelatorTest, EmitsAfterHalfWindowFrames) {
  Correlator c(IscuConfig{});
  const GrayFrame g(64, 48, std::uint8_t{90});
  std::vector<std::int64_t> emitted;
  for (int i = 0; i < 4; ++i) {
    if (auto f = c.Push(g, Frame(i, {}))) emitted.push_back(f->meta.frame_index);
  }
  EXPECT_EQ(emitted, std::vector<std::int64_t>{0});
  for (int i = 4; i < 10; ++i) {
    auto f = c.Push(g, Frame(i, {}));
    ASSERT_TRUE(f.has_value());
    EXPECT_EQ(f->meta.frame_index, i - 3);
  }
  const auto rest = c.Flush();
  ASSERT_EQ(rest.size(), 3u);
  EXPECT_EQ(rest[0].meta.frame_index, 7);
  EXPECT_EQ(rest[2].meta.frame_index, 9);
}

TEST(CorrelatorTest, SingleFramePassesThrough) {
  Correlator c(IscuConfig{});
  const ScoredBox b = Det(5, 5, 20, 20);
  EXPECT_FALSE(c.Push(GrayFrame(64, 48), Frame(0, {b})).has_value());
  const auto out = c.Flush();
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].kept, std::vector<ScoredBox>{b});
  EXPECT_TRUE(out[0].added.empty());
}

TEST(CorrelatorTest, GateIsStrict) {
  Correlator c(IscuConfig{});
  c.Push(GrayFrame(64, 48), Frame(0, {Det(5, 5, 20, 20, 0.3), Det(30, 5, 45, 20, 0.31)}));
  const auto out = c.Flush();
  ASSERT_EQ(out[0].kept.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].kept[0].confidence, 0.31);
}

TEST(CorrelatorTest, RejectsOutOfOrderFrames) {
  Correlator c(IscuConfig{});
  c.Push(GrayFrame(64, 48), Frame(5, {}));
  EXPECT_THROW(c.Push(GrayFrame(64, 48), Frame(5, {})), SequenceError);
  EXPECT_THROW(c.Push(GrayFrame(64, 48), Frame(3, {})), SequenceError);
}

TEST(CorrelatorTest, RejectsDimensionChanges) {
  Correlator c(IscuConfig{});
  c.Push(GrayFrame(64, 48), Frame(0, {}));
  EXPECT_THROW(c.Push(GrayFrame(32, 48), Frame(1, {}, 32, 48)), InputError);
  EXPECT_THROW(c.Push(GrayFrame(64, 48), Frame(1, {}, 32, 48)), InputError);
}

TEST(CorrelatorTest, RejectsInvalidConfig) {
  IscuConfig cfg;
  cfg.half_window = 1;  // fc_quorum 3 > 2 neighbors
  EXPECT_THROW(Correlator{cfg}, InputError);
  EXPECT_NO_THROW(Correlator{IscuConfig::ForHalfWindow(1)});
  cfg = IscuConfig{};
  cfg.half_window = 0;
  EXPECT_THROW(Correlator{cfg}, InputError);
  cfg = IscuConfig{};
  cfg.confidence_gate = 1.5;
  EXPECT_THROW(Correlator{cfg}, InputError);
}

TEST(ProcessSequenceTest, EmptyAndMismatched) {
  EXPECT_TRUE(ProcessSequence({}, {}, IscuConfig{}).empty());
  const std::vector<GrayFrame> frames(2, GrayFrame(8, 8));
  const std::vector<FrameDetections> dets{Frame(0, {}, 8, 8)};
  EXPECT_THROW(ProcessSequence(frames, dets, IscuConfig{}), InputError);
}

TEST(ProcessSequenceTest, StaticSceneIsAFixedPoint) {
  std::mt19937_64 rng(3);
  GrayFrame g(64, 48);
  for (auto& s : g.samples) s = static_cast<std::uint8_t>(rng() & 0xff);
  const ScoredBox b = Det(10, 10, 30, 30);
  std::vector<GrayFrame> frames(12, g);
  std::vector<FrameDetections> dets;
  for (int i = 0; i < 12; ++i) dets.push_back(Frame(i, {b}));
  const auto out = ProcessSequence(frames, dets, IscuConfig{});
  ASSERT_EQ(out.size(), 12u);
  for (const FilteredFrame& f : out) {
    EXPECT_EQ(f.kept, std::vector<ScoredBox>{b});
    EXPECT_TRUE(f.added.empty());
    EXPECT_EQ(f.removed_count, 0u);
  }
}

TEST(ProcessSequenceTest, TrackOnsetAndEndLoseOneFrameEach) {
  // A box present from frame 5 through 30 of a static scene: at its first
  // and last frame only three of six similar neighbors agree.
  const GrayFrame g(64, 48, std::uint8_t{120});
  const ScoredBox b = Det(10, 10, 30, 30);
  std::vector<GrayFrame> frames(40, g);
  std::vector<FrameDetections> dets;
  for (int i = 0; i < 40; ++i) {
    dets.push_back(Frame(i, (i >= 5 && i <= 30) ? std::vector<ScoredBox>{b}
                                                : std::vector<ScoredBox>{}));
  }
  const auto out = ProcessSequence(frames, dets, IscuConfig{});
  for (int i = 0; i < 40; ++i) {
    EXPECT_EQ(out[i].kept.size(), (i >= 6 && i <= 29) ? 1u : 0u) << i;
    EXPECT_TRUE(out[i].added.empty());
  }
}

Scenario SmallScenario(std::uint64_t seed) {
  ScenarioConfig cfg = StandardNoiseScenario(seed, 150);
  cfg.scene_breaks = {40, 41, 90};
  cfg.transient_fp_rate = 0.6;
  cfg.tp_dropout_rate = 0.15;
  return GenerateScenario(cfg);
}

TEST(ProcessSequenceTest, MatchesNaiveReference) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Scenario s = SmallScenario(seed);
    for (int hw : {1, 2, 3, 5}) {
      IscuConfig cfg = IscuConfig::ForHalfWindow(hw);
      const auto fast = ProcessSequence(s.frames, s.raw_detections, cfg);
      const auto slow = oracle::NaiveProcess(s.frames, s.raw_detections, cfg);
      ASSERT_EQ(fast, slow) << "seed " << seed << " hw " << hw;
      cfg.mode = CorrelationMode::kFixed;
      ASSERT_EQ(ProcessSequence(s.frames, s.raw_detections, cfg),
                oracle::NaiveProcess(s.frames, s.raw_detections, cfg));
    }
  }
}

TEST(ProcessSequenceTest, OutputInvariants) {
  const Scenario s = SmallScenario(9);
  const IscuConfig cfg;
  const auto out = ProcessSequence(s.frames, s.raw_detections, cfg);
  ASSERT_EQ(out.size(), s.frames.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    EXPECT_EQ(out[t].meta, s.raw_detections[t].meta);
    const auto& input = s.raw_detections[t].boxes;
    for (const ScoredBox& k : out[t].kept) {
      EXPECT_NE(std::find(input.begin(), input.end(), k), input.end());
      EXPECT_EQ(k.origin, BoxOrigin::kDetector);
    }
    for (const ScoredBox& a : out[t].added) {
      EXPECT_EQ(a.origin, BoxOrigin::kInterpolated);
      for (const ScoredBox& b : input) {
        if (b.confidence > cfg.confidence_gate) {
          EXPECT_LE(Iou(a.box, b.box), cfg.fill_iou);
        }
      }
    }
  }
  EXPECT_EQ(out, ProcessSequence(s.frames, s.raw_detections, cfg));
}

}  // namespace
}  // namespace framecorr
