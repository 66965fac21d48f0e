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

#include "gradecraft/artifact.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "gradecraft/error.hpp"

namespace gradecraft {
namespace {

using Json = nlohmann::ordered_json;
constexpr char kMagic[4] = {'G', 'C', 'M', 'A'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = crc32(crc, bytes.data() + offset, chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

Json hyper_to_json(const classical::Hyperparams& p) {
  return Json{{"lambda", p.lambda},
              {"c", p.c},
              {"epsilon", p.epsilon},
              {"gamma", p.gamma},
              {"max_depth", p.max_depth},
              {"min_leaf", p.min_leaf},
              {"n_estimators", p.n_estimators},
              {"learning_rate", p.learning_rate},
              {"boost_depth", p.boost_depth},
              {"subsample", p.subsample},
              {"subsample_limit", p.subsample_limit},
              {"max_passes", p.max_passes},
              {"svr_tolerance", p.svr_tolerance}};
}

classical::Hyperparams hyper_from_json(const Json& j) {
  classical::Hyperparams p;
  p.lambda = j.at("lambda").get<double>();
  p.c = j.at("c").get<double>();
  p.epsilon = j.at("epsilon").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.max_depth = j.at("max_depth").get<int>();
  p.min_leaf = j.at("min_leaf").get<int>();
  p.n_estimators = j.at("n_estimators").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.boost_depth = j.at("boost_depth").get<int>();
  p.subsample = j.at("subsample").get<bool>();
  p.subsample_limit = j.at("subsample_limit").get<std::size_t>();
  p.max_passes = j.at("max_passes").get<int>();
  p.svr_tolerance = j.at("svr_tolerance").get<double>();
  return p;
}

Json editions_json(const std::vector<Edition>& editions) {
  Json out = Json::array();
  for (const Edition e : editions) out.push_back(edition_name(e));
  return out;
}

std::vector<Edition> editions_from_json(const Json& j) {
  std::vector<Edition> out;
  for (const auto& e : j) out.push_back(parse_edition(e.get<std::string>()));
  return out;
}

Json tree_topology(const classical::Tree& tree, std::vector<double>& payload) {
  Json nodes = Json::array();
  for (const classical::TreeNode& n : tree.nodes) {
    nodes.push_back(Json::array({n.feature, n.left, n.right, n.samples}));
    payload.push_back(n.threshold);
    payload.push_back(n.value);
  }
  return nodes;
}

class PayloadReader {
 public:
  explicit PayloadReader(std::span<const double> values) : values_(values) {}

  double next() {
    if (pos_ >= values_.size()) throw DatasetError("model payload is shorter than its structure");
    return values_[pos_++];
  }
  void finish() const {
    if (pos_ != values_.size()) throw DatasetError("model payload is longer than its structure");
  }

 private:
  std::span<const double> values_;
  std::size_t pos_ = 0;
};

classical::Tree read_tree(const Json& nodes, PayloadReader& payload) {
  classical::Tree tree;
  const auto count = static_cast<int>(nodes.size());
  for (const auto& n : nodes) {
    classical::TreeNode node;
    node.feature = n.at(0).get<int>();
    node.left = n.at(1).get<int>();
    node.right = n.at(2).get<int>();
    node.samples = n.at(3).get<std::uint32_t>();
    node.threshold = payload.next();
    node.value = payload.next();
    if (!node.is_leaf() && (node.left <= 0 || node.left >= count || node.right <= 0 ||
                            node.right >= count || node.feature >= kCells)) {
      throw DatasetError("tree node references are out of range");
    }
    tree.nodes.push_back(node);
  }
  if (tree.nodes.empty()) throw DatasetError("tree has no nodes");
  return tree;
}

Json structure_of(const GradeModel& model, std::vector<double>& payload) {
  Json s;
  if (const nn::Network* net = model.network()) {
    const nn::ArchitectureSpec& spec = net->spec();
    s["kind"] = "network";
    s["architecture"] = nn::architecture_tag(spec.kind);
    s["dense_widths"] = spec.dense_widths;
    s["conv_channels"] = spec.conv_channels;
    s["lstm_hidden"] = spec.lstm_hidden;
    s["init_seed"] = spec.seed;
    const auto flat = net->flat_parameters();
    payload.insert(payload.end(), flat.begin(), flat.end());
    return s;
  }
  const classical::FittedRegressor& r = *model.regressor();
  s["kind"] = "regressor";
  s["family"] = classical::family_tag(r.spec.family);
  s["spec"] = hyper_to_json(r.spec.params);
  s["n_features"] = r.n_features;
  s["samples"] = r.meta.samples;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, classical::LinearParams>) {
          s["params"] = "linear";
          payload.push_back(p.bias);
          payload.insert(payload.end(), p.weights.begin(), p.weights.end());
        } else if constexpr (std::is_same_v<T, classical::KernelSvrParams>) {
          s["params"] = "kernel";
          s["support_vectors"] = p.coef.size();
          payload.push_back(p.gamma);
          payload.push_back(p.bias);
          payload.insert(payload.end(), p.coef.begin(), p.coef.end());
          const auto sv = p.support_vectors.data();
          payload.insert(payload.end(), sv.begin(), sv.end());
        } else if constexpr (std::is_same_v<T, classical::Tree>) {
          s["params"] = "tree";
          s["nodes"] = tree_topology(p, payload);
        } else {
          s["params"] = "boosted";
          payload.push_back(p.base);
          payload.push_back(p.learning_rate);
          Json trees = Json::array();
          for (const classical::Tree& t : p.trees) trees.push_back(tree_topology(t, payload));
          s["trees"] = std::move(trees);
        }
      },
      r.params);
  return s;
}

GradeModel model_from(const Json& s, const std::string& tag, std::span<const double> values) {
  PayloadReader payload(values);
  const std::string kind = s.at("kind").get<std::string>();
  if (kind == "network") {
    nn::ArchitectureSpec spec;
    spec.kind = nn::parse_architecture(s.at("architecture").get<std::string>());
    spec.dense_widths = s.at("dense_widths").get<std::vector<std::size_t>>();
    spec.conv_channels = s.at("conv_channels").get<std::vector<std::size_t>>();
    spec.lstm_hidden = s.at("lstm_hidden").get<std::size_t>();
    spec.seed = s.at("init_seed").get<std::uint64_t>();
    if (nn::architecture_tag(spec.kind) != tag) {
      throw DatasetError("artifact tag " + tag + " does not match its " +
                         nn::architecture_tag(spec.kind) + " structure");
    }
    nn::Network net = nn::Network::build(spec);
    if (values.size() != net.parameter_count()) {
      throw DatasetError("network expects " + std::to_string(net.parameter_count()) +
                         " parameters, payload has " + std::to_string(values.size()));
    }
    net.set_flat_parameters(values);
    return GradeModel(std::move(net));
  }
  if (kind != "regressor") throw DatasetError("unknown model kind '" + kind + "'");

  classical::FittedRegressor r;
  r.spec.family = classical::parse_family(s.at("family").get<std::string>());
  if (classical::family_tag(r.spec.family) != tag) {
    throw DatasetError("artifact tag " + tag + " does not match its " +
                       classical::family_tag(r.spec.family) + " structure");
  }
  r.spec.params = hyper_from_json(s.at("spec"));
  r.n_features = s.at("n_features").get<std::size_t>();
  r.meta.samples = s.at("samples").get<std::size_t>();
  const std::string params = s.at("params").get<std::string>();
  const std::map<classical::Family, std::string> expected = {
      {classical::Family::LR, "linear"},     {classical::Family::RidgeLR, "linear"},
      {classical::Family::LinearSVR, "linear"}, {classical::Family::RbfSVR, "kernel"},
      {classical::Family::DTR, "tree"},      {classical::Family::XGBR, "boosted"}};
  if (expected.at(r.spec.family) != params) {
    throw DatasetError("family " + tag + " cannot hold " + params + " parameters");
  }
  if (params == "linear") {
    classical::LinearParams p;
    p.bias = payload.next();
    for (std::size_t i = 0; i < r.n_features; ++i) p.weights.push_back(payload.next());
    r.params = std::move(p);
  } else if (params == "kernel") {
    classical::KernelSvrParams p;
    const auto m = s.at("support_vectors").get<std::size_t>();
    p.gamma = payload.next();
    p.bias = payload.next();
    for (std::size_t i = 0; i < m; ++i) p.coef.push_back(payload.next());
    p.support_vectors = Matrix(m, r.n_features);
    for (double& v : p.support_vectors.data()) v = payload.next();
    r.params = std::move(p);
  } else if (params == "tree") {
    r.params = read_tree(s.at("nodes"), payload);
  } else {
    classical::BoostedParams p;
    p.base = payload.next();
    p.learning_rate = payload.next();
    for (const auto& t : s.at("trees")) p.trees.push_back(read_tree(t, payload));
    r.params = std::move(p);
  }
  payload.finish();
  return GradeModel(std::move(r));
}

Json header_of(const ModelArtifact& artifact, std::vector<double>& payload) {
  Json h;
  h["schema_version"] = artifact.schema_version;
  h["tag"] = artifact.model.tag();
  h["editions"] = editions_json(artifact.model.editions);
  h["seed"] = artifact.model.seed;
  h["created"] = artifact.created;
  h["hyperparameters"] = artifact.hyperparameters;
  h["metrics"] = artifact.metrics ? metrics_to_json(*artifact.metrics) : Json(nullptr);
  h["structure"] = structure_of(artifact.model, payload);
  return h;
}

}  // namespace

nlohmann::ordered_json describe_hyperparameters(const GradeModel& model,
                                                const TrainOptions& options) {
  Json j = Json::object();
  if (const nn::Network* net = model.network()) {
    const nn::ArchitectureSpec& spec = net->spec();
    if (!spec.dense_widths.empty()) j["dense_widths"] = spec.dense_widths;
    if (!spec.conv_channels.empty()) j["conv_channels"] = spec.conv_channels;
    if (spec.lstm_hidden != 0) j["lstm_hidden"] = spec.lstm_hidden;
    const nn::TrainConfig& t = options.train;
    j["max_epochs"] = t.max_epochs;
    j["patience"] = t.patience;
    j["batch_size"] = t.batch_size;
    j["learning_rate"] = t.adam.learning_rate;
    j["beta1"] = t.adam.beta1;
    j["beta2"] = t.adam.beta2;
    j["epsilon"] = t.adam.epsilon;
    j["class_weights"] = t.use_class_weights;
    j["sample_weights"] = t.use_sample_weights;
    return j;
  }
  const classical::FittedRegressor& r = *model.regressor();
  const classical::Hyperparams& p = r.spec.params;
  switch (r.spec.family) {
    case classical::Family::LR:
      break;
    case classical::Family::RidgeLR:
      j["lambda"] = p.lambda;
      break;
    case classical::Family::LinearSVR:
      j["c"] = p.c;
      j["epsilon"] = p.epsilon;
      j["max_passes"] = p.max_passes;
      break;
    case classical::Family::RbfSVR:
      j["c"] = p.c;
      j["epsilon"] = p.epsilon;
      j["gamma"] = p.gamma;
      j["tolerance"] = p.svr_tolerance;
      j["subsample"] = p.subsample;
      j["subsample_limit"] = p.subsample_limit;
      break;
    case classical::Family::DTR:
      j["max_depth"] = p.max_depth;
      j["min_leaf"] = p.min_leaf;
      break;
    case classical::Family::XGBR:
      j["n_estimators"] = p.n_estimators;
      j["learning_rate"] = p.learning_rate;
      j["max_depth"] = p.boost_depth;
      break;
  }
  return j;
}

std::vector<std::uint8_t> serialize_model(const ModelArtifact& artifact) {
  std::vector<double> payload;
  const std::string header = header_of(artifact, payload).dump();
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 + header.size() + 8 + payload.size() * 8 + 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  put_u64(out, payload.size());
  for (const double v : payload) put_u64(out, std::bit_cast<std::uint64_t>(v));
  put_u32(out, crc_of(out));
  return out;
}

ModelArtifact deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 + 4 + 8 + 4) throw ChecksumError("model file is truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ChecksumError("not a model file (bad magic bytes)");
  }
  const std::size_t body = bytes.size() - 4;
  if (crc_of(bytes.first(body)) != get_u32(bytes.data() + body)) {
    throw ChecksumError("model file checksum mismatch (truncated or corrupted)");
  }
  const std::uint32_t header_len = get_u32(bytes.data() + 4);
  if (8 + std::size_t(header_len) + 8 > body) throw ChecksumError("model header is truncated");
  const std::string header_text(reinterpret_cast<const char*>(bytes.data() + 8), header_len);
  const std::size_t payload_at = 8 + header_len;
  const std::uint64_t count = get_u64(bytes.data() + payload_at);
  if (count > (body - payload_at - 8) / 8 || payload_at + 8 + count * 8 != body) {
    throw ChecksumError("model payload length does not match the file size");
  }

  Json h;
  try {
    h = Json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(std::string("model header is not valid JSON: ") + e.what());
  }
  try {
    const int version = h.at("schema_version").get<int>();
    if (version != kArtifactSchemaVersion) {
      throw UnsupportedVersionError("unsupported model schema_version " + std::to_string(version) +
                                        " (this build reads " +
                                        std::to_string(kArtifactSchemaVersion) + ")",
                                    version);
    }
    std::vector<double> payload(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      payload[i] = std::bit_cast<double>(get_u64(bytes.data() + payload_at + 8 + i * 8));
    }
    const std::string tag = h.at("tag").get<std::string>();
    ModelArtifact artifact(model_from(h.at("structure"), tag, payload));
    artifact.schema_version = version;
    artifact.model.editions = editions_from_json(h.at("editions"));
    artifact.model.seed = h.at("seed").get<std::uint64_t>();
    artifact.created = h.at("created").get<std::string>();
    artifact.hyperparameters = h.at("hyperparameters");
    if (!h.at("metrics").is_null()) artifact.metrics = metrics_from_json(h.at("metrics"));
    return artifact;
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(std::string("malformed model header: ") + e.what());
  }
}

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
  const auto bytes = serialize_model(artifact);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed to write " + path.string());
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

nlohmann::ordered_json artifact_metadata(const ModelArtifact& artifact) {
  Json j;
  j["schema_version"] = artifact.schema_version;
  j["tag"] = artifact.model.tag();
  j["editions"] = editions_json(artifact.model.editions);
  j["seed"] = artifact.model.seed;
  j["created"] = artifact.created;
  j["hyperparameters"] = artifact.hyperparameters;
  j["metrics"] = artifact.metrics ? metrics_to_json(*artifact.metrics) : Json(nullptr);
  j["hold_weights"] = artifact.model.has_hold_weights();
  return j;
}

}  // namespace gradecraft
