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
#include <zlib.h>

#include <fstream>

#include "gradecraft/artifact.hpp"
#include "gradecraft/error.hpp"
#include "support.hpp"

using namespace gradecraft;

namespace {

TrainOptions small_options() {
  TrainOptions opts;
  opts.seed = 13;
  opts.hyper.n_estimators = 15;
  opts.hyper.max_depth = 6;
  opts.train.max_epochs = 3;
  opts.train.patience = 1;
  opts.train.batch_size = 32;
  for (const auto a : nn::kAllArchitectures) {
    opts.architectures.push_back(nn::ArchitectureSpec::compact(a));
  }
  return opts;
}

std::vector<LabeledRoute> training_data() {
  return testing::planted_routes(testing::planted_model(5), 50, 120);
}

// Reassembles a file around an edited header with a valid checksum, using
// the documented layout: magic, u32 header length, header, u64 count,
// doubles, u32 crc32.
std::vector<std::uint8_t> with_header(const std::vector<std::uint8_t>& bytes,
                                      const std::function<void(nlohmann::json&)>& edit) {
  auto u32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
    return v;
  };
  const std::uint32_t len = u32(4);
  nlohmann::json h = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
  edit(h);
  const std::string text = h.dump();
  std::vector<std::uint8_t> out(bytes.begin(), bytes.begin() + 4);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(text.size() >> (8 * i)));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), bytes.begin() + 8 + len, bytes.end() - 4);
  const uLong crc = crc32(crc32(0L, Z_NULL, 0), out.data(), static_cast<uInt>(out.size()));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
  return out;
}

}  // namespace

TEST_CASE("every model family round trips with identical predictions") {
  const auto data = training_data();
  const auto probe = testing::random_routes(77, 100);
  for (const std::string& tag : model_tags()) {
    CAPTURE(tag);
    ModelArtifact artifact(train_model(tag, data, data, small_options()));
    artifact.created = "2026-01-02T03:04:05Z";
    artifact.hyperparameters = describe_hyperparameters(artifact.model, small_options());
    artifact.metrics = evaluate(artifact.model, data);
    const ModelArtifact back = deserialize_model(serialize_model(artifact));
    CHECK(back.model.tag() == tag);
    CHECK(back.model.editions == artifact.model.editions);
    CHECK(back.model.seed == artifact.model.seed);
    CHECK(back.created == artifact.created);
    CHECK(back.hyperparameters == artifact.hyperparameters);
    REQUIRE(back.metrics.has_value());
    CHECK(metrics_to_json(*back.metrics) == metrics_to_json(*artifact.metrics));
    CHECK(back.model.predict(probe) == artifact.model.predict(probe));
  }
}

TEST_CASE("artifacts survive the file system") {
  testing::TempDir dir("artifact");
  ModelArtifact artifact(train_model("ridge", training_data(), {}, small_options()));
  const auto path = dir.path() / "ridge.gcm";
  save_model(artifact, path);
  const auto probe = testing::random_routes(78, 100);
  CHECK(load_model(path).model.predict(probe) == artifact.model.predict(probe));
  CHECK_THROWS_AS(load_model(dir.path() / "absent.gcm"), IoError);
  CHECK_THROWS_AS(save_model(artifact, dir.path() / "no" / "dir" / "x.gcm"), IoError);
}

TEST_CASE("damaged bytes fail the checksum") {
  ModelArtifact artifact(train_model("dnn", training_data(), training_data(), small_options()));
  const auto bytes = serialize_model(artifact);
  for (const std::size_t keep :
       {std::size_t{0}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    CAPTURE(keep);
    const std::vector<std::uint8_t> cut(bytes.begin(),
                                        bytes.begin() + static_cast<std::ptrdiff_t>(keep));
    CHECK_THROWS_AS(deserialize_model(cut), ChecksumError);
  }
  auto flipped = bytes;
  flipped[bytes.size() - 20] ^= 0x10;
  CHECK_THROWS_AS(deserialize_model(flipped), ChecksumError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_model(magic), ChecksumError);
}

TEST_CASE("unknown schema versions are rejected explicitly") {
  ModelArtifact artifact(train_model("ridge", training_data(), {}, small_options()));
  const auto bytes = with_header(serialize_model(artifact),
                                 [](nlohmann::json& h) { h["schema_version"] = 999; });
  try {
    deserialize_model(bytes);
    FAIL("expected a version error");
  } catch (const UnsupportedVersionError& e) {
    CHECK(e.version() == 999);
  }
}

TEST_CASE("headers that disagree with the payload are rejected") {
  ModelArtifact artifact(train_model("ridge", training_data(), {}, small_options()));
  const auto bytes = serialize_model(artifact);
  // Sanity: an unedited rebuild parses.
  CHECK_NOTHROW(deserialize_model(with_header(bytes, [](nlohmann::json&) {})));
  const auto retagged = with_header(bytes, [](nlohmann::json& h) { h["tag"] = "dnn"; });
  CHECK_THROWS_AS(deserialize_model(retagged), DatasetError);
  const auto seedless = with_header(bytes, [](nlohmann::json& h) { h.erase("seed"); });
  CHECK_THROWS_AS(deserialize_model(seedless), DatasetError);
}

TEST_CASE("same-seed training gives byte-identical artifacts") {
  for (const std::string tag : {"cnn2d", "rbf-svr", "xgbr"}) {
    CAPTURE(tag);
    ModelArtifact a(train_model(tag, training_data(), training_data(), small_options()));
    ModelArtifact b(train_model(tag, training_data(), training_data(), small_options()));
    a.created = b.created = "2026-01-01T00:00:00Z";
    CHECK(serialize_model(a) == serialize_model(b));
  }
}

TEST_CASE("metadata leaves out the parameters") {
  ModelArtifact artifact(train_model("lstm", training_data(), training_data(), small_options()));
  artifact.created = "2026-05-06T07:08:09Z";
  const auto meta = artifact_metadata(artifact);
  CHECK(meta["tag"] == "lstm");
  CHECK(meta["created"] == "2026-05-06T07:08:09Z");
  CHECK(meta["schema_version"] == kArtifactSchemaVersion);
  CHECK_FALSE(meta.contains("structure"));
}
