#include <gtest/gtest.h>

#include <functional>
#include <string>

#include "boltrot/config.hpp"

using namespace boltrot;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ConfigJson, PipelineRoundTrip) {
  PipelineConfig c;
  c.tracker.np = 4;
  c.tracker.be = 2.5;
  c.tracker.bs = 21;
  c.tracker.ni = 40;
  c.msac.seed = 12345678901234ull;
  c.redetect_fraction = 0.25;
  c.periodic_redetect_every = 15;
  c.redetect_enabled = false;
  c.corners.max_points = 33;
  const std::string text = to_json(c);
  const PipelineConfig back = parse_pipeline_config(text);
  EXPECT_EQ(to_json(back), text);
  EXPECT_EQ(back.tracker.bs, 21);
  EXPECT_EQ(back.msac.seed, 12345678901234ull);
  EXPECT_EQ(*back.redetect_fraction, 0.25);
  EXPECT_FALSE(back.redetect_enabled);
}

TEST(ConfigJson, PartialDocumentKeepsDefaults) {
  const PipelineConfig c = parse_pipeline_config(R"({"tracker": {"bs": 11}})");
  EXPECT_EQ(c.tracker.bs, 11);
  EXPECT_EQ(c.tracker.np, 3);
  EXPECT_EQ(c.redetect_min_fp, 7);
}

TEST(ConfigJson, SceneRoundTrip) {
  for (const auto& name : preset_names()) {
    const std::string text = to_json(preset_scene(name));
    EXPECT_EQ(to_json(parse_scene_config(text)), text) << name;
  }
}

TEST(ConfigJson, SceneTotalRotationShorthand) {
  const SceneConfig s = parse_scene_config(
      R"({"duration": 2, "bolts": [{"cx": 63.5, "cy": 63.5, "circumradius": 20, "total_rotation": 1.5}]})");
  EXPECT_EQ(ground_truth(s).back().theta_rad, 1.5);
}

TEST(ConfigJson, GridAndRunRoundTrip) {
  StudyGrid g;
  g.np_values = {1, 4};
  g.be_values = {2.5};
  g.scene = "scene";
  const std::string gt = to_json(g);
  EXPECT_EQ(to_json(parse_study_grid(gt)), gt);

  RunConfig r;
  r.detector = DetectorKind::Blob;
  r.blob.min_area = 50;
  r.seed = 9;
  r.history_out = "out/h.csv";
  const std::string rt = to_json(r);
  const RunConfig back = parse_run_config(rt);
  EXPECT_EQ(to_json(back), rt);
  EXPECT_EQ(back.effective_pipeline().msac.seed, 9u);
}

TEST(ConfigJson, MalformedTextReportsLine) {
  const std::string msg = error_of([] { parse_pipeline_config("{\n  \"tracker\": {\n    \"np\": ,\n  }\n}"); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ConfigJson, UnknownKeyNamesField) {
  const std::string msg = error_of([] { parse_pipeline_config(R"({"tracker": {"npp": 3}})"); });
  EXPECT_NE(msg.find("tracker.npp"), std::string::npos) << msg;
}

TEST(ConfigJson, WrongTypeNamesField) {
  const std::string msg = error_of([] { parse_pipeline_config(R"({"tracker": {"bs": "five"}})"); });
  EXPECT_NE(msg.find("tracker.bs"), std::string::npos) << msg;
  const std::string nested = error_of([] { parse_scene_config(R"({"bolts": [{"cx": true}]})"); });
  EXPECT_NE(nested.find("bolts[0].cx"), std::string::npos) << nested;
}

TEST(ConfigJson, InvalidValuesRejected) {
  EXPECT_THROW(parse_pipeline_config(R"({"tracker": {"bs": 4}})"), ConfigError);
  EXPECT_THROW(parse_study_grid(R"({"np_values": []})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"detector": "cnn"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"blob": {"min_area": 0}})"), ConfigError);
  EXPECT_THROW(parse_scene_config(R"({"width": 0})"), ConfigError);
}

TEST(ConfigJson, MissingFileIsIoError) {
  EXPECT_THROW(read_text_file("/nonexistent/boltrot.json"), IoError);
}
