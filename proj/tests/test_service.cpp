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
#include <httplib.h>

#include <future>

#include <json.hpp>

#include "gradecraft/error.hpp"
#include "gradecraft/service.hpp"
#include "gradecraft/whatif.hpp"
#include "support.hpp"

using namespace gradecraft;
using nlohmann::json;

namespace {

const std::vector<LabeledRoute>& training_data() {
  static const auto data = testing::planted_routes(testing::planted_model(6), 60, 150);
  return data;
}

// Registry with a linear and a convolutional model, plus copies of both.
struct Fixture {
  ModelArtifact ridge{train_model("ridge", training_data(), {}, TrainOptions{})};
  ModelArtifact cnn{[] {
    TrainOptions opts;
    opts.train.max_epochs = 2;
    opts.train.patience = 1;
    opts.architectures.push_back(nn::ArchitectureSpec::compact(nn::Architecture::CNN2D));
    return train_model("cnn2d", training_data(), training_data(), opts);
  }()};

  Service service() const {
    ModelRegistry registry;
    registry.add("ridge-2017", ridge);
    registry.add("cnn-2017", cnn);
    return Service(std::move(registry));
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

std::string route_body(const Route& r, const std::string& model, bool with_whatif = false) {
  json j;
  j["edition"] = edition_name(r.edition());
  json holds = json::array();
  for (const auto& h : r.holds()) holds.push_back(h.to_string());
  j["holds"] = holds;
  if (!model.empty()) j["model"] = model;
  if (with_whatif) j["whatif"] = true;
  return j.dump();
}

}  // namespace

TEST_CASE("static listings") {
  const Service s = fixture().service();
  const auto editions = s.editions();
  CHECK(editions.status == 200);
  CHECK(json::parse(editions.body) == json::array({"2016", "2017", "2019"}));

  const auto holds = s.holds("2016");
  CHECK(holds.status == 200);
  CHECK(json::parse(holds.body).size() == 142);
  const auto holds_2019 = static_cast<std::size_t>(hold_count(Edition::MB2019));
  CHECK(json::parse(s.holds("2019").body).size() == holds_2019);
  CHECK(s.holds("2018").status == 404);

  const json models = json::parse(s.models().body);
  REQUIRE(models.size() == 2);
  CHECK(models[0]["id"] == "cnn-2017");  // ascending ids
  CHECK(models[0]["tag"] == "cnn2d");
  CHECK(models[1]["hold_weights"] == true);
}

TEST_CASE("service predictions equal library predictions") {
  const Service s = fixture().service();
  const auto routes = testing::random_routes(15, 50, Edition::MB2017, 3, 9);
  for (const auto& [id, artifact] : {std::pair{"ridge-2017", &fixture().ridge},
                                    std::pair{"cnn-2017", &fixture().cnn}}) {
    CAPTURE(id);
    for (const Route& r : routes) {
      const auto res = s.predict(route_body(r, id));
      REQUIRE(res.status == 200);
      const json j = json::parse(res.body);
      const double grade = artifact->model.predict(r);
      CHECK(j["grade"].get<double>() == grade);
      CHECK(j["rounded"] == round_to_ordinal(grade));
      CHECK(j["label"] == grade_to_label(round_to_ordinal(grade)));
      CHECK(j["model"] == id);
    }
  }
}

TEST_CASE("what-if responses equal the library") {
  const Service s = fixture().service();
  for (const Route& r : testing::random_routes(16, 5, Edition::MB2017, 2, 6)) {
    const WhatIfResult lib = whatif(r, fixture().cnn.model);
    const json j = json::parse(s.whatif(route_body(r, "cnn-2017")).body);
    CHECK(j["base"].get<double>() == lib.base);
    REQUIRE(j["deltas"].size() == lib.deltas.size());
    for (std::size_t i = 0; i < lib.deltas.size(); ++i) {
      CHECK(j["deltas"][i]["position"] == lib.deltas[i].position.to_string());
      CHECK(j["deltas"][i]["action"] == (lib.deltas[i].removal ? "remove" : "add"));
      CHECK(j["deltas"][i]["delta"].get<double>() == lib.deltas[i].delta);
    }
    const json p = json::parse(s.predict(route_body(r, "cnn-2017", true)).body);
    CHECK(p["whatif"] == j["deltas"]);
  }
}

TEST_CASE("the documented example request succeeds") {
  const Service s = fixture().service();
  const auto res = s.predict(R"({"edition":"2016","holds":["A5","C7","F10","K18"]})");
  CHECK(res.status == 200);
  const json j = json::parse(res.body);
  CHECK(j["grade"].is_number());
  CHECK(j["label"].is_string());
  CHECK(j["model"] == "cnn-2017");  // default: first id
}

TEST_CASE("bad requests get client errors") {
  const Service s = fixture().service();
  const auto z9 = s.predict(R"({"edition":"2017","holds":["A5","Z9"]})");
  CHECK(z9.status == 400);
  CHECK(json::parse(z9.body)["token"] == "Z9");

  CHECK(s.predict("not json").status == 400);
  CHECK(s.predict(R"({"holds":["A5"]})").status == 400);
  CHECK(s.predict(R"({"edition":"2017","holds":[]})").status == 400);
  CHECK(s.predict(R"({"edition":"2018","holds":["A5"]})").status == 400);
  CHECK(s.predict(R"({"edition":"2017","holds":[5]})").status == 400);

  const auto unknown = s.predict(R"({"edition":"2017","holds":["A5"],"model":"nope"})");
  CHECK(unknown.status == 404);
  CHECK(s.whatif(R"({"edition":"2017","holds":["A5"],"model":"nope"})").status == 404);
  CHECK(Service(ModelRegistry{}).predict(R"({"edition":"2017","holds":["A5"]})").status == 404);
}

TEST_CASE("heatmaps exist only for linear models") {
  const Service s = fixture().service();
  const auto ok = s.heatmap("ridge-2017");
  REQUIRE(ok.status == 200);
  const json j = json::parse(ok.body);
  REQUIRE(j["grid"].size() == 18);
  REQUIRE(j["grid"][0].size() == 11);
  const auto& params = fixture().ridge.model.regressor()->params;
  const auto& w = std::get<classical::LinearParams>(params).weights;
  const auto f10 = parse_position("F10");
  CHECK(j["grid"][f10.row()][f10.col()].get<double>() == w[static_cast<std::size_t>(f10.index())]);
  CHECK(s.heatmap("cnn-2017").status == 409);
  CHECK(s.heatmap("missing").status == 404);
}

TEST_CASE("the registry loads a model directory") {
  testing::TempDir dir("registry");
  CHECK_THROWS_AS(ModelRegistry::load_dir(dir.path()), DatasetError);
  CHECK_THROWS_AS(ModelRegistry::load_dir(dir.path() / "absent"), DatasetError);
  save_model(fixture().ridge, dir.path() / "b.gcm");
  save_model(fixture().cnn, dir.path() / "a.gcm");
  const ModelRegistry r = ModelRegistry::load_dir(dir.path());
  REQUIRE(r.entries().size() == 2);
  CHECK(r.default_entry()->id == "a");
  CHECK(r.find("b")->model.tag() == "ridge");

  ModelRegistry dup;
  dup.add("x", fixture().ridge);
  CHECK_THROWS_AS(dup.add("x", fixture().ridge), InvalidArgument);
}

TEST_CASE("http server answers over a socket") {
  const Service s = fixture().service();
  HttpServer server(s, "127.0.0.1", 0);
  REQUIRE(server.port() > 0);
  httplib::Client client("127.0.0.1", server.port());

  const auto editions = client.Get("/api/editions");
  REQUIRE(editions);
  CHECK(editions->status == 200);
  CHECK(json::parse(editions->body) == json::array({"2016", "2017", "2019"}));

  const std::string body = R"({"edition":"2017","holds":["A5","C7","F10"],"model":"ridge-2017"})";
  const auto predicted = client.Post("/api/predict", body, "application/json");
  REQUIRE(predicted);
  CHECK(predicted->status == 200);
  CHECK(predicted->body == s.predict(body).body);

  const auto bad = client.Post("/api/predict", R"({"edition":"2017","holds":["Z9"]})",
                               "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(client.Get("/api/heatmap/cnn-2017")->status == 409);
  CHECK(client.Get("/api/holds/2016")->status == 200);

  // Concurrent identical requests see the same snapshot.
  std::vector<std::future<std::string>> replies;
  for (int i = 0; i < 8; ++i) {
    replies.push_back(std::async(std::launch::async, [&] {
      httplib::Client c("127.0.0.1", server.port());
      return c.Post("/api/whatif", body, "application/json")->body;
    }));
  }
  const std::string first = replies[0].get();
  for (std::size_t i = 1; i < replies.size(); ++i) CHECK(replies[i].get() == first);

  // A second server on the same port fails to bind.
  CHECK_THROWS_AS(HttpServer(s, "127.0.0.1", server.port()), IoError);
  server.stop();
}
