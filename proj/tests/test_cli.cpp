// Copyright 2026 The Gradecraft Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gradecraft/artifact.hpp"
#include "gradecraft/cli.hpp"
#include "gradecraft/render.hpp"
#include "support.hpp"

using namespace gradecraft;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gradecraft");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fixtures() { return testing::source_dir() / "data" / "fixtures"; }

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  const Run unknown = cli({"train", "--edition", "2016", "--model", "ridge", "--out", "x",
                           "--frobnicate"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("--frobnicate") != std::string::npos);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(cli({}).code == 2);
  CHECK(cli({"launch"}).code == 2);
  CHECK(cli({"eval", "--edition", "2016"}).code == 2);  // --model missing
  CHECK(cli({"eval", "--model", "m", "--edition", "2016", "--split", "both"}).code == 2);
}

TEST_CASE("help exits with 0") {
  const Run top = cli({"--help"});
  CHECK(top.code == 0);
  for (const char* sub : {"ingest", "stats", "train", "eval", "generalize", "render", "predict",
                          "whatif", "serve"}) {
    CAPTURE(sub);
    CHECK(top.out.find(sub) != std::string::npos);
    const Run help = cli({sub, "--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("--") != std::string::npos);
  }
}

TEST_CASE("runtime errors exit with 1") {
  testing::TempDir dir("cli-err");
  const Run missing = cli({"eval", "--model", (dir.path() / "none.gcm").string(), "--edition",
                           "2017", "--data", fixtures().string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.rfind("error: ", 0) == 0);
  const Run bad_hold = cli({"train", "--edition", "2017", "--model", "ridge", "--data",
                            (dir.path() / "empty").string(), "--out",
                            (dir.path() / "m.gcm").string()});
  CHECK(bad_hold.code == 1);
  const Run bad_model = cli({"train", "--edition", "2017", "--model", "resnet", "--data",
                             fixtures().string(), "--out", (dir.path() / "m.gcm").string()});
  CHECK(bad_model.code == 1);
  CHECK(bad_model.err.find("resnet") != std::string::npos);
}

TEST_CASE("train, eval, predict and what-if on the fixtures") {
  testing::TempDir dir("cli-flow");
  const std::string data = fixtures().string();
  const std::string ridge = (dir.path() / "ridge.gcm").string();
  const std::string cnn = (dir.path() / "cnn.gcm").string();

  const Run train = cli({"train", "--edition", "2017", "--model", "ridge", "--data", data,
                         "--out", ridge, "--created", "2026-03-04T05:06:07Z"});
  REQUIRE(train.code == 0);
  const ModelArtifact artifact = load_model(ridge);
  CHECK(artifact.created == "2026-03-04T05:06:07Z");
  CHECK(artifact.model.editions == std::vector<Edition>{Edition::MB2017});
  CHECK(artifact.metrics.has_value());
  CHECK(artifact.hyperparameters["lambda"] == 1.0);

  const Run net = cli({"train", "--edition", "2017", "--model", "cnn2d", "--data", data, "--out",
                       cnn, "--seed", "7", "--epochs", "3", "--compact"});
  REQUIRE(net.code == 0);
  const auto log = lines_of(cnn + ".epochs.jsonl");
  REQUIRE(log.size() == 3);
  for (std::size_t i = 0; i < log.size(); ++i) {
    const json rec = json::parse(log[i]);
    CHECK(rec["epoch"] == i);
    CHECK(rec.contains("train_loss"));
    CHECK(rec.contains("val_mae"));
    CHECK(rec.contains("val_rmse"));
  }
  const json train_report = json::parse(net.out);
  CHECK(train_report["validation_is_test"] == true);
  CHECK(train_report["restored_best"] == true);

  const std::string report_path = (dir.path() / "eval.json").string();
  const Run eval = cli({"eval", "--model", ridge, "--edition", "2017", "--data", data, "--out",
                        report_path});
  REQUIRE(eval.code == 0);
  const json full = json::parse(eval.out);
  CHECK(json::parse(std::ifstream(report_path)) == full);
  CHECK(full["edition"] == "2017");
  const json& report = full["metrics"];
  for (const char* key : {"count", "mae", "rmse", "exact_acc", "within1_acc"}) {
    CHECK(report.contains(key));
  }
  const auto split = load_split(fixtures(), Edition::MB2017);
  CHECK(report["count"] == split.test.size());
  CHECK(report["mae"].get<double>() == evaluate(artifact.model, split.test).mae);

  const Run predict = cli({"predict", "--model", ridge, "--edition", "2017", "--holds",
                           "A5,C7,F10,K18"});
  REQUIRE(predict.code == 0);
  const json p = json::parse(predict.out);
  const Route route(Edition::MB2017, {parse_position("A5"), parse_position("C7"),
                                      parse_position("F10"), parse_position("K18")});
  CHECK(p["grade"].get<double>() == artifact.model.predict(route));
  CHECK(p["label"].is_string());

  const Run bad = cli({"predict", "--model", ridge, "--edition", "2017", "--holds", "A5,Z9"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("Z9") != std::string::npos);

  const Run wi = cli({"whatif", "--model", cnn, "--edition", "2017", "--holds", "A5,C7"});
  REQUIRE(wi.code == 0);
  CHECK(json::parse(wi.out)["deltas"].size() == static_cast<std::size_t>(kCells));
}

TEST_CASE("ingest, stats and render") {
  testing::TempDir dir("cli-data");
  const std::string data = (dir.path() / "data").string();
  const Run ingest = cli({"ingest", "--edition", "2019", "--input",
                          (fixtures() / "moonboard_2019.json").string(), "--data", data});
  REQUIRE(ingest.code == 0);
  CHECK(fs::exists(dataset_file(data, Edition::MB2019)));

  const Run stats = cli({"stats", "--edition", "2019", "--data", data});
  REQUIRE(stats.code == 0);
  const json s = json::parse(stats.out);
  const auto split = load_split(data, Edition::MB2019);
  std::size_t train = 0, test = 0;
  for (const auto& row : s["per_grade"]) {
    train += row["train"].get<std::size_t>();
    test += row["test"].get<std::size_t>();
  }
  CHECK(train == split.train.size());
  CHECK(test == split.test.size());

  // A record with an unknown position is refused.
  const fs::path broken = dir.path() / "broken.json";
  std::ofstream(broken) << R"({"edition":"2019","routes":[{"name":"x","grade":"6B+",)"
                        << R"("holds":["A5","Z9"],"ascents":10,"isBenchmark":false}]})";
  const Run refused = cli({"ingest", "--edition", "2019", "--input", broken.string(), "--data",
                           (dir.path() / "other").string()});
  CHECK(refused.code == 1);
  CHECK(refused.err.find("Z9") != std::string::npos);

  const fs::path atlas = dir.path() / "atlas";
  write_placeholder_atlas(atlas);
  const std::string png = (dir.path() / "route.png").string();
  const Run one = cli({"render", "--edition", "2019", "--holds", "A5,F10", "--atlas",
                       placeholder_manifest(atlas, Edition::MB2019).string(), "--out", png,
                       "--size", "224", "--channels", "1"});
  REQUIRE(one.code == 0);
  const Image img = read_png(png);
  CHECK(img.width == 224);
  CHECK(img.channels == 1);

  const fs::path images = dir.path() / "images";
  const Run batch = cli({"render", "--edition", "2019", "--data", data, "--atlas",
                         placeholder_manifest(atlas, Edition::MB2019).string(), "--out",
                         images.string(), "--limit", "5"});
  REQUIRE(batch.code == 0);
  CHECK(std::distance(fs::directory_iterator(images), fs::directory_iterator{}) == 5);
  CHECK(cli({"render", "--edition", "2019", "--holds", "A5", "--atlas", "x.json", "--out", png,
             "--size", "300"})
            .code == 1);
}

TEST_CASE("generalize writes a matrix") {
  testing::TempDir dir("cli-gen");
  const std::string out = (dir.path() / "matrix.json").string();
  const Run gen = cli({"generalize", "--train", "2017,2019", "--test", "2016", "--models",
                       "dnn,cnn2d,lstm,hybrid", "--data", fixtures().string(), "--compact",
                       "--epochs", "2", "--out", out});
  REQUIRE(gen.code == 0);
  const json m = json::parse(gen.out);
  CHECK(m["cells"].size() == 12);
  std::size_t held_out = 0;
  for (const auto& c : m["cells"]) {
    CHECK(c["status"] == "ok");
    if (c["test_edition"] == "2016") {
      CHECK(c["in_distribution"] == false);
      ++held_out;
    }
  }
  CHECK(held_out == 4);
  CHECK(json::parse(std::ifstream(out)) == m);

  const Run missing = cli({"generalize", "--train", "2017", "--models", "ridge", "--data",
                           (dir.path() / "nothing").string()});
  CHECK(missing.code == 1);
}
