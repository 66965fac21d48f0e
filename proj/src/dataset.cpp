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

#include "gradecraft/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gradecraft/error.hpp"
#include "gradecraft/rng.hpp"

namespace gradecraft {
namespace {

using nlohmann::json;

std::string record_id(const std::string& source, std::size_t index, const std::string& name) {
  std::ostringstream os;
  os << source << ": route #" << index;
  if (!name.empty()) os << " ('" << name << "')";
  return os.str();
}

LabeledRoute to_labeled(const RawRouteRecord& r) {
  return LabeledRoute{Route::from_strings(r.edition, r.holds), parse_grade(r.grade_label),
                      r.ascents, r.name};
}

}  // namespace

std::vector<RawRouteRecord> parse_dataset_json(const std::string& text, Edition edition,
                                               const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DatasetError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw DatasetError(source + ": top level must be an object");
  if (!doc.contains("edition") || !doc["edition"].is_string()) {
    throw DatasetError(source + ": missing string field 'edition'");
  }
  Edition file_edition;
  try {
    file_edition = parse_edition(doc["edition"].get<std::string>());
  } catch (const ParseError& e) {
    throw DatasetError(source + ": " + e.what());
  }
  if (file_edition != edition) {
    throw DatasetError(source + ": file holds edition " + edition_name(file_edition) +
                       " but " + edition_name(edition) + " was requested");
  }
  if (!doc.contains("routes") || !doc["routes"].is_array()) {
    throw DatasetError(source + ": missing array field 'routes'");
  }

  std::vector<RawRouteRecord> out;
  out.reserve(doc["routes"].size());
  std::size_t index = 0;
  for (const json& r : doc["routes"]) {
    RawRouteRecord rec;
    rec.edition = edition;
    if (!r.is_object()) throw DatasetError(record_id(source, index, "") + ": not an object");
    if (r.contains("name") && r["name"].is_string()) rec.name = r["name"].get<std::string>();
    const std::string id = record_id(source, index, rec.name);
    auto require = [&](const char* key, json::value_t type) -> const json& {
      if (!r.contains(key)) throw DatasetError(id + ": missing field '" + key + "'");
      const json& v = r[key];
      const bool ok = type == json::value_t::number_integer
                          ? v.is_number_integer()
                          : v.type() == type;
      if (!ok) throw DatasetError(id + ": field '" + key + "' has the wrong type");
      return v;
    };
    if (!r.contains("name") || !r["name"].is_string()) {
      throw DatasetError(id + ": missing string field 'name'");
    }
    rec.grade_label = require("grade", json::value_t::string).get<std::string>();
    const json& holds = require("holds", json::value_t::array);
    const json& ascents = require("ascents", json::value_t::number_integer);
    rec.is_benchmark = require("isBenchmark", json::value_t::boolean).get<bool>();
    rec.ascents = ascents.get<std::int64_t>();
    if (rec.ascents < 0) throw DatasetError(id + ": negative ascents");
    for (const json& h : holds) {
      if (!h.is_string()) throw DatasetError(id + ": hold entries must be strings");
      rec.holds.push_back(h.get<std::string>());
    }
    if (rec.holds.empty()) throw DatasetError(id + ": route has no holds");
    for (const std::string& h : rec.holds) {
      try {
        parse_position(h);
      } catch (const ParseError& e) {
        throw DatasetError(id + ": invalid hold '" + e.token() + "': " + e.what());
      }
    }
    try {
      parse_grade(rec.grade_label);
    } catch (const ParseError& e) {
      throw DatasetError(id + ": invalid grade '" + e.token() + "'");
    }
    out.push_back(std::move(rec));
    ++index;
  }
  return out;
}

std::vector<RawRouteRecord> load_dataset(const std::filesystem::path& path, Edition edition) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset_json(buffer.str(), edition, path.string());
}

std::string dataset_to_json(Edition edition, const std::vector<RawRouteRecord>& records) {
  json routes = json::array();
  for (const RawRouteRecord& r : records) {
    routes.push_back({{"name", r.name},
                      {"grade", r.grade_label},
                      {"holds", r.holds},
                      {"ascents", r.ascents},
                      {"isBenchmark", r.is_benchmark}});
  }
  const json doc = {{"edition", edition_name(edition)}, {"routes", std::move(routes)}};
  return doc.dump(1) + "\n";
}

void save_dataset(const std::filesystem::path& path, Edition edition,
                  const std::vector<RawRouteRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset file " + path.string());
  out << dataset_to_json(edition, records);
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<RawRouteRecord> filter_min_ascents(const std::vector<RawRouteRecord>& records,
                                               std::int64_t min_ascents) {
  if (min_ascents < 0) throw InvalidArgument("min ascents must be >= 0");
  std::vector<RawRouteRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const RawRouteRecord& r) { return r.ascents >= min_ascents; });
  return out;
}

DatasetSplit split_benchmarks(const std::vector<RawRouteRecord>& records) {
  DatasetSplit split;
  if (!records.empty()) split.edition = records.front().edition;
  for (const RawRouteRecord& r : records) {
    (r.is_benchmark ? split.test : split.train).push_back(to_labeled(r));
  }
  split.no_benchmarks = split.test.empty();
  return split;
}

DatasetStats compute_stats(const DatasetSplit& split) {
  DatasetStats stats;
  stats.edition = split.edition;
  for (const LabeledRoute& r : split.train) ++stats.per_grade_counts[r.grade.ordinal()].train;
  for (const LabeledRoute& r : split.test) ++stats.per_grade_counts[r.grade.ordinal()].test;
  stats.total_routes = static_cast<std::int64_t>(split.train.size() + split.test.size());
  stats.total_benchmarks = static_cast<std::int64_t>(split.test.size());
  return stats;
}

std::vector<RawRouteRecord> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.min_holds < 1 || spec.max_holds > kCells || spec.min_holds > spec.max_holds) {
    throw InvalidArgument("holds-per-route range must lie within [1, 198]");
  }
  if (spec.noise_sd < 0.0) throw InvalidArgument("noise_sd must be >= 0");
  if (spec.benchmark_fraction < 0.0 || spec.benchmark_fraction > 1.0) {
    throw InvalidArgument("benchmark_fraction must lie in [0, 1]");
  }
  if (spec.n_routes < 0) throw InvalidArgument("n_routes must be >= 0");

  std::vector<HoldPosition> pool;
  if (spec.restrict_to_layout) {
    const auto holds = board_holds(spec.edition);
    pool.assign(holds.begin(), holds.end());
  } else {
    for (int i = 0; i < kCells; ++i) pool.push_back(HoldPosition::from_index(i));
  }
  const int max_holds = std::min<int>(spec.max_holds, static_cast<int>(pool.size()));
  if (spec.min_holds > max_holds) {
    throw InvalidArgument("holds-per-route range exceeds the board's hold count");
  }

  Rng rng(spec.seed);
  const double log_lo = std::log(5.0);
  const double log_hi = std::log(500.0);
  std::vector<RawRouteRecord> out;
  out.reserve(static_cast<std::size_t>(spec.n_routes));
  for (int i = 0; i < spec.n_routes; ++i) {
    const int k = static_cast<int>(rng.uniform_int(spec.min_holds, max_holds));
    // Partial Fisher-Yates over the pool.
    std::vector<HoldPosition> picks = pool;
    double score = spec.bias;
    RawRouteRecord rec;
    rec.edition = spec.edition;
    for (int j = 0; j < k; ++j) {
      const auto swap_with = static_cast<std::size_t>(
          rng.uniform_int(j, static_cast<std::int64_t>(picks.size()) - 1));
      std::swap(picks[static_cast<std::size_t>(j)], picks[swap_with]);
      const HoldPosition h = picks[static_cast<std::size_t>(j)];
      score += spec.planted_weights[static_cast<std::size_t>(h.index())];
      rec.holds.push_back(h.to_string());
    }
    if (spec.noise_sd > 0.0) score += spec.noise_sd * rng.normal();
    rec.grade_label = grade_to_label(round_to_ordinal(score));
    rec.ascents = static_cast<std::int64_t>(std::floor(std::exp(rng.uniform(log_lo, log_hi))));
    rec.ascents = std::clamp<std::int64_t>(rec.ascents, 5, 500);
    rec.is_benchmark = rng.uniform() < spec.benchmark_fraction;
    rec.name = "synthetic-" + edition_name(spec.edition) + "-" + std::to_string(i);
    out.push_back(std::move(rec));
  }
  return out;
}

std::filesystem::path dataset_file(const std::filesystem::path& data_dir, Edition edition) {
  return data_dir / ("moonboard_" + edition_name(edition) + ".json");
}

DatasetSplit load_split(const std::filesystem::path& data_dir, Edition edition,
                        std::int64_t min_ascents) {
  DatasetSplit split =
      split_benchmarks(filter_min_ascents(load_dataset(dataset_file(data_dir, edition), edition),
                                          min_ascents));
  split.edition = edition;
  return split;
}

std::optional<std::filesystem::path> default_data_dir() {
  const char* env = std::getenv("GRADECRAFT_DATA_DIR");
  if (env == nullptr || *env == '\0') return std::nullopt;
  return std::filesystem::path(env);
}

}  // namespace gradecraft
