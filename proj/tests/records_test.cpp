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
#include "framecorr/records.hpp"

#include <filesystem>
#include <functional>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "framecorr/config.hpp"
#include "framecorr/netpbm.hpp"
#include "framecorr/serialize.hpp"

namespace framecorr {
namespace {

namespace fs = std::filesystem;

std::string ErrorOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseDetectionsTest, SingleRecord) {
  std::istringstream in("0 10 10 20 20 0.9\n");
  const auto frames = records::ParseDetections(in, "d.txt");
  ASSERT_EQ(frames.size(), 1u);
  ASSERT_EQ(frames[0].size(), 1u);
  EXPECT_EQ(frames[0][0].box, (BoundingBox{10, 10, 20, 20}));
  EXPECT_DOUBLE_EQ(frames[0][0].confidence, 0.9);
}

TEST(ParseDetectionsTest, EmptyFileGivesEmptyFrames) {
  std::istringstream in("# nothing here\n\n");
  const auto frames = records::ParseDetections(in, "d.txt", 4);
  ASSERT_EQ(frames.size(), 4u);
  for (const auto& f : frames) EXPECT_TRUE(f.empty());
}

TEST(ParseDetectionsTest, GroupsByFrameAndReadsOrigin) {
  std::istringstream in(
      "2 1 1 5 5 0.5 interp  # trailing comment\n"
      "0 1 1 5 5 0.4\n"
      "2 -3 1 5 5 0.7 det\n");
  const auto frames = records::ParseDetections(in, "d.txt", 3);
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[0].size(), 1u);
  EXPECT_TRUE(frames[1].empty());
  ASSERT_EQ(frames[2].size(), 2u);
  EXPECT_EQ(frames[2][0].origin, BoxOrigin::kInterpolated);
  EXPECT_EQ(frames[2][1].box.x_min, 0.0);  // clipped
}

TEST(ParseDetectionsTest, ErrorsNameSourceAndLine) {
  auto parse = [](const std::string& text) {
    return ErrorOf([&] {
      std::istringstream in(text);
      records::ParseDetections(in, "d.txt", 10);
    });
  };
  EXPECT_EQ(parse("0 1 1 5 5 0.5\n3 20 10 10 20 0.5\n"),
            "d.txt:2: x_min must be less than x_max");
  EXPECT_NE(parse("0 1 1 5 0.5\n").find("d.txt:1: expected 6 or 7 fields"),
            std::string::npos);
  EXPECT_NE(parse("0 1 1 inf 5 0.5\n").find("d.txt:1: non-finite"), std::string::npos);
  EXPECT_NE(parse("0 1 1 nan 5 0.5\n").find("d.txt:1:"), std::string::npos);
  EXPECT_NE(parse("0 1 1 5 5 1.5\n").find("confidence"), std::string::npos);
  EXPECT_NE(parse("-1 1 1 5 5 0.5\n").find("frame index"), std::string::npos);
  EXPECT_NE(parse("10 1 1 5 5 0.5\n").find("beyond sequence length"), std::string::npos);
  EXPECT_NE(parse("0 1 5 5 1 0.5\n").find("y_min"), std::string::npos);
  EXPECT_NE(parse("0 1 1 5 5 0.5 maybe\n").find("origin"), std::string::npos);
  EXPECT_NE(parse("0 1 1 5x 5 0.5\n").find("bad x_max"), std::string::npos);
}

TEST(ParseGroundTruthTest, CentroidRecord) {
  std::istringstream in("5 p1 50 50 20 10\n");
  const auto frames = records::ParseGroundTruth(in, "g.txt");
  ASSERT_EQ(frames.size(), 6u);
  ASSERT_EQ(frames[5].size(), 1u);
  EXPECT_EQ(frames[5][0].polyp_id, "p1");
  EXPECT_EQ(CentroidToCorners(frames[5][0]), (BoundingBox{40, 45, 60, 55}));
}

TEST(ParseGroundTruthTest, Errors) {
  auto parse = [](const std::string& text) {
    return ErrorOf([&] {
      std::istringstream in(text);
      records::ParseGroundTruth(in, "g.txt");
    });
  };
  EXPECT_NE(parse("5 p1 50 50 20 10\n5 p1 60 60 20 10\n").find("g.txt:2:"),
            std::string::npos);
  EXPECT_EQ(parse("5 p1 50 50 0 10\n"), "g.txt:1: width and height must be positive");
  EXPECT_NE(parse("5 p1 50 50 10\n").find("g.txt:1: expected 6 fields"),
            std::string::npos);
  EXPECT_EQ(parse("5 p1 50 50 20 10\n5 p2 60 60 20 10\n"), "");
}

TEST(RecordsRoundTripTest, WriteThenParseIsIdentity) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> coord(0, 6000);
  std::vector<std::vector<ScoredBox>> dets(20);
  std::vector<std::vector<GroundTruthBox>> gts(20);
  for (std::size_t f = 0; f < dets.size(); ++f) {
    for (int i = int(rng() % 4); i > 0; --i) {
      // Quarter-pixel coordinates survive six significant digits exactly.
      const double x = coord(rng) / 4.0, y = coord(rng) / 4.0;
      dets[f].push_back({{x, y, x + 1 + coord(rng) / 4.0, y + 0.25},
                         double(rng() % 1000) / 1000.0,
                         (rng() & 1) ? BoxOrigin::kInterpolated : BoxOrigin::kDetector});
      gts[f].push_back({x, y, 2.5 + coord(rng) / 4.0, 0.5, "id" + std::to_string(i)});
    }
  }
  std::stringstream d, g;
  records::WriteDetections(d, dets, /*with_origin=*/true);
  records::WriteGroundTruth(g, gts);
  const auto d2 = records::ParseDetections(d, "d", std::int64_t(dets.size()));
  const auto g2 = records::ParseGroundTruth(g, "g", std::int64_t(gts.size()));
  EXPECT_EQ(d2, dets);
  ASSERT_EQ(g2.size(), gts.size());
  for (std::size_t f = 0; f < gts.size(); ++f) {
    ASSERT_EQ(g2[f].size(), gts[f].size());
    for (std::size_t i = 0; i < gts[f].size(); ++i) {
      EXPECT_EQ(g2[f][i].polyp_id, gts[f][i].polyp_id);
      EXPECT_EQ(CentroidToCorners(g2[f][i]), CentroidToCorners(gts[f][i]));
    }
  }
}

TEST(RecordsFormatTest, SixSignificantDigits) {
  EXPECT_EQ(records::FormatReal(12.0), "12");
  EXPECT_EQ(records::FormatReal(1234.5678), "1234.57");
  std::ostringstream out;
  records::WriteDetection(out, 3, {{1, 2, 3, 4}, 0.5, BoxOrigin::kDetector}, true);
  EXPECT_EQ(out.str(), "3 1 2 3 4 0.5 det\n");
}

class NetpbmTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("framecorr_netpbm_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  void WriteFile(const std::string& name, const std::string& bytes) {
    std::ofstream(dir_ / name, std::ios::binary) << bytes;
  }
  void WriteGray(const std::string& name, const GrayFrame& g) {
    std::ofstream out(dir_ / name, std::ios::binary);
    netpbm::WritePgm(out, g);
  }

  fs::path dir_;
};

TEST_F(NetpbmTest, ReadsFramesInIndexOrder) {
  for (int i : {2, 0, 1}) WriteGray("00" + std::to_string(i) + ".pgm", GrayFrame(4, 3, std::uint8_t(i)));
  WriteFile("notes.txt", "ignored");
  const auto frames = netpbm::ReadFrames(dir_);
  ASSERT_EQ(frames.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(frames[i].at(0, 0), i);
}

TEST_F(NetpbmTest, GapIsNamed) {
  WriteGray("000.pgm", GrayFrame(4, 3));
  WriteGray("002.pgm", GrayFrame(4, 3));
  const std::string err = ErrorOf([&] { netpbm::ReadFrames(dir_); });
  EXPECT_NE(err.find("missing frame 1"), std::string::npos) << err;
}

TEST_F(NetpbmTest, DuplicateIndexAndMixedSizes) {
  WriteGray("0.pgm", GrayFrame(4, 3));
  WriteGray("00.pgm", GrayFrame(4, 3));
  EXPECT_NE(ErrorOf([&] { netpbm::ReadFrames(dir_); }).find("more than once"),
            std::string::npos);
  fs::remove(dir_ / "00.pgm");
  WriteGray("1.pgm", GrayFrame(5, 3));
  EXPECT_NE(ErrorOf([&] { netpbm::ReadFrames(dir_); }).find("differs"), std::string::npos);
}

TEST_F(NetpbmTest, RejectsSixteenBitSamples) {
  std::istringstream in(std::string("P6\n1 1\n65535\n") + std::string(6, '\0'));
  const std::string err = ErrorOf([&] { netpbm::Read(in, "x.ppm"); });
  EXPECT_NE(err.find("unsupported maxval 65535"), std::string::npos) << err;
}

TEST_F(NetpbmTest, ColorGoesThroughLuma) {
  std::istringstream in(std::string("P6\n# comment\n2 1\n255\n") +
                        std::string("\xff\x00\x00\x00\x00\xff", 6));
  const GrayFrame g = netpbm::Read(in, "x.ppm");
  EXPECT_EQ(g.at(0, 0), 76);  // (299 * 255 + 500) / 1000
  EXPECT_EQ(g.at(1, 0), 29);  // (114 * 255 + 500) / 1000
}

TEST_F(NetpbmTest, LowMaxvalIsRescaledAndTruncationDetected) {
  std::istringstream in(std::string("P5\n3 1\n15\n") + std::string("\x00\x0f\x07", 3));
  const GrayFrame g = netpbm::Read(in, "x.pgm");
  EXPECT_EQ(g.samples, (std::vector<std::uint8_t>{0, 255, 119}));
  std::istringstream shorty(std::string("P5\n3 1\n255\n") + "ab");
  EXPECT_NE(ErrorOf([&] { netpbm::Read(shorty, "s.pgm"); }).find("truncated"),
            std::string::npos);
  std::istringstream ascii("P2\n1 1\n255\n0\n");
  EXPECT_NE(ErrorOf([&] { netpbm::Read(ascii, "a.pgm"); }).find("a.pgm"),
            std::string::npos);
}

TEST_F(NetpbmTest, RoundTrip) {
  std::mt19937 rng(1);
  GrayFrame g(7, 5);
  for (auto& s : g.samples) s = std::uint8_t(rng());
  WriteGray("000000.pgm", g);
  EXPECT_EQ(netpbm::ReadFile(dir_ / "000000.pgm").samples, g.samples);
}

TEST(RunConfigTest, DefaultsMatchOperatingPoint) {
  const IscuConfig cfg = RunConfig{}.Resolve();
  EXPECT_EQ(cfg.half_window, 3);
  EXPECT_DOUBLE_EQ(cfg.ssim.similarity_threshold, 0.85);
  EXPECT_DOUBLE_EQ(cfg.confidence_gate, 0.3);
  EXPECT_EQ(cfg.fc_quorum, 3);
  EXPECT_DOUBLE_EQ(cfg.fill_iou, 0.5);
}

TEST(RunConfigTest, LoadsFileAndRejectsUnknownKeys) {
  RunConfig rc;
  std::istringstream in(
      "# operating point\n"
      "half_window = 5\n"
      "ssim_mode=windowed  # trailing\n"
      "frames = clips/a\n");
  rc.Load(in, "run.cfg");
  const IscuConfig cfg = rc.Resolve();
  EXPECT_EQ(cfg.half_window, 5);
  EXPECT_EQ(cfg.fc_quorum, 5);  // follows the window
  EXPECT_EQ(cfg.ssim.mode, SsimMode::kWindowed);
  EXPECT_EQ(rc.frames, "clips/a");

  std::istringstream bad("half_window = 2\nhalf_windw = 3\n");
  EXPECT_EQ(ErrorOf([&] { RunConfig{}.Load(bad, "run.cfg"); }),
            "run.cfg:2: unknown key 'half_windw'");
  EXPECT_NE(ErrorOf([&] { RunConfig{}.SetAssignment("half_window=x", "--set"); })
                .find("--set: 'half_window' expects an integer"),
            std::string::npos);
  EXPECT_NE(ErrorOf([&] { RunConfig{}.SetAssignment("half_window", "--set"); })
                .find("key=value"),
            std::string::npos);
}

TEST(RunConfigTest, ExplicitQuorumWinsAndIsValidated) {
  RunConfig rc;
  rc.Set("half_window", "1", "t");
  rc.Set("fc_quorum", "3", "t");
  EXPECT_THROW(rc.Resolve(), InputError);  // 3 of 2 neighbors
  rc.Set("fc_quorum", "1", "t");
  EXPECT_EQ(rc.Resolve().fc_quorum, 1);
  EXPECT_EQ(rc.Resolve().fill_quorum, 2);
}

TEST(SerializeTest, ReportTextAndJson) {
  const std::vector<FrameOutcome> o{{167, 26, 41, 0}};
  const EvalReport r = Aggregate(o, 0);
  std::ostringstream text;
  WriteReportText(text, r);
  EXPECT_NE(text.str().find("sen = 80.29\n"), std::string::npos);
  EXPECT_NE(text.str().find("pre = 86.53\n"), std::string::npos);
  EXPECT_NE(text.str().find("spe = n/a\n"), std::string::npos);
  const nlohmann::json j = ReportToJson(r);
  EXPECT_EQ(j["tp"], 167);
  EXPECT_TRUE(j["spe"].is_null());
  EXPECT_NEAR(j["f2"].get<double>(), 81.46, 0.01);
}

TEST(SerializeTest, ScenarioJsonRoundTrip) {
  const ScenarioConfig cfg = StandardNoiseScenario(3, 200);
  const ScenarioConfig back = ScenarioFromJson(ScenarioToJson(cfg), "s.json");
  EXPECT_EQ(ScenarioToJson(back), ScenarioToJson(cfg));
  nlohmann::json j = ScenarioToJson(cfg);
  j["bogus"] = 1;
  EXPECT_NE(ErrorOf([&] { ScenarioFromJson(j, "s.json"); }).find("s.json"),
            std::string::npos);
}

}  // namespace
}  // namespace framecorr
