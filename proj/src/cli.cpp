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

#include "gradecraft/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <optional>

#include "gradecraft/artifact.hpp"
#include "gradecraft/dataset.hpp"
#include "gradecraft/error.hpp"
#include "gradecraft/generalization.hpp"
#include "gradecraft/metrics.hpp"
#include "gradecraft/render.hpp"
#include "gradecraft/service.hpp"
#include "gradecraft/whatif.hpp"

namespace gradecraft {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Options {
  // shared
  std::string data;
  std::int64_t min_ascents = 5;
  std::vector<std::string> editions;
  std::string out;
  std::uint64_t seed = 0;
  bool parallel = false;

  // models
  std::string model;
  std::vector<std::string> models;
  std::vector<std::string> test_editions;
  std::string split = "test";
  std::string input;
  std::string created;

  // network training
  int epochs = 100;
  int patience = -1;  // -1: 20, capped below --epochs
  std::size_t batch_size = 64;
  double lr = 1e-3;
  bool class_weights = false;
  bool sample_weights = false;
  bool compact = false;
  std::string epoch_log;

  // classical
  classical::Hyperparams hyper;
  bool no_subsample = false;

  // route input
  std::vector<std::string> holds;
  bool with_whatif = false;

  // render
  std::string atlas;
  int size = 256;
  int channels = 3;
  bool any_size = false;
  std::size_t limit = 0;

  // serve
  std::string model_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
};

Exec exec_of(const Options& o) { return o.parallel ? Exec::parallel : Exec::serial; }

fs::path data_dir(const Options& o) {
  if (!o.data.empty()) return o.data;
  if (auto env = default_data_dir()) return *env;
  throw InvalidArgument("no data directory: pass --data or set GRADECRAFT_DATA_DIR");
}

Edition single_edition(const Options& o) {
  if (o.editions.size() != 1) throw InvalidArgument("exactly one --edition is required");
  return parse_edition(o.editions.front());
}

std::vector<Edition> edition_list(const std::vector<std::string>& names) {
  std::vector<Edition> out;
  for (const auto& n : names) out.push_back(parse_edition(n));
  return out;
}

void emit(const Json& j, const Options& o, std::ostream& out) {
  const std::string text = j.dump(2);
  out << text << '\n';
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw IoError("cannot write " + o.out);
    f << text << '\n';
  }
}

std::string timestamp(const Options& o) {
  if (!o.created.empty()) return o.created;
  std::time_t t;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde != nullptr && *sde != '\0') {
    t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

TrainOptions train_options(const Options& o) {
  TrainOptions t;
  t.hyper = o.hyper;
  t.hyper.subsample = !o.no_subsample;
  t.seed = o.seed;
  t.exec = exec_of(o);
  t.train.max_epochs = o.epochs;
  t.train.patience = o.patience >= 0 ? o.patience : std::clamp(o.epochs - 1, 0, 20);
  t.train.batch_size = o.batch_size;
  t.train.adam.learning_rate = o.lr;
  t.train.use_class_weights = o.class_weights;
  t.train.use_sample_weights = o.sample_weights;
  if (o.compact) {
    for (const auto a : nn::kAllArchitectures) {
      t.architectures.push_back(nn::ArchitectureSpec::compact(a));
    }
  }
  return t;
}

Route route_from(const Options& o) {
  if (o.holds.empty()) throw InvalidArgument("--holds needs at least one position");
  return Route::from_strings(single_edition(o), o.holds);
}

int cmd_ingest(const Options& o, std::ostream& out) {
  const Edition e = single_edition(o);
  const auto records = load_dataset(o.input, e);
  const fs::path dir = data_dir(o);
  fs::create_directories(dir);
  const fs::path target = dataset_file(dir, e);
  save_dataset(target, e, records);
  std::size_t benchmarks = 0;
  for (const auto& r : records) benchmarks += r.is_benchmark;
  Json j;
  j["edition"] = edition_name(e);
  j["records"] = records.size();
  j["benchmarks"] = benchmarks;
  j["written"] = target.string();
  emit(j, Options{}, out);
  return 0;
}

int cmd_stats(const Options& o, std::ostream& out) {
  const Edition e = single_edition(o);
  const DatasetStats stats = compute_stats(load_split(data_dir(o), e, o.min_ascents));
  Json j;
  j["edition"] = edition_name(e);
  j["min_ascents"] = o.min_ascents;
  j["total_routes"] = stats.total_routes;
  j["train"] = stats.total_routes - stats.total_benchmarks;
  j["benchmarks"] = stats.total_benchmarks;
  Json rows = Json::array();
  for (const auto& [grade, counts] : stats.per_grade_counts) {
    rows.push_back(Json{{"grade", grade},
                        {"label", grade_to_label(grade)},
                        {"train", counts.train},
                        {"test", counts.test}});
  }
  j["per_grade"] = std::move(rows);
  emit(j, o, out);
  return 0;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.editions.empty()) throw InvalidArgument("--edition is required");
  const fs::path dir = data_dir(o);
  std::vector<LabeledRoute> train_set;
  std::vector<LabeledRoute> validation;
  for (const Edition e : edition_list(o.editions)) {
    DatasetSplit split = load_split(dir, e, o.min_ascents);
    train_set.insert(train_set.end(), split.train.begin(), split.train.end());
    validation.insert(validation.end(), split.test.begin(), split.test.end());
  }
  TrainOptions options = train_options(o);

  std::optional<std::ofstream> log;
  const bool is_network = [&] {
    for (const auto a : nn::kAllArchitectures) {
      if (nn::architecture_tag(a) == o.model) return true;
    }
    return false;
  }();
  if (is_network) {
    if (validation.empty()) {
      throw DatasetError("networks early-stop on benchmark routes, and none were loaded");
    }
    const std::string log_path = o.epoch_log.empty() ? o.out + ".epochs.jsonl" : o.epoch_log;
    log.emplace(log_path);
    if (!*log) throw IoError("cannot write " + log_path);
    options.train.on_epoch = [&](const nn::EpochRecord& r) {
      *log << nn::epoch_record_json(r) << '\n';
      log->flush();
    };
  }

  nn::TrainReport report;
  GradeModel model = train_model(o.model, train_set, validation, options, &report);
  ModelArtifact artifact(std::move(model));
  artifact.created = timestamp(o);
  artifact.hyperparameters = describe_hyperparameters(artifact.model, options);
  if (!validation.empty()) artifact.metrics = evaluate(artifact.model, validation, options.exec);
  save_model(artifact, o.out);

  Json j;
  j["model"] = artifact.model.tag();
  j["artifact"] = o.out;
  j["train_routes"] = train_set.size();
  j["benchmark_routes"] = validation.size();
  if (is_network) {
    j["best_epoch"] = report.best_epoch;
    j["stopped_epoch"] = report.stopped_epoch;
    j["restored_best"] = report.restored_best;
    j["validation_is_test"] = true;
    err << "note: early stopping monitored the benchmark set, which is also the evaluation "
           "set; reported benchmark metrics are optimistic\n";
  }
  if (artifact.metrics) j["benchmark_metrics"] = metrics_to_json(*artifact.metrics);
  out << j.dump(2) << '\n';
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const ModelArtifact artifact = load_model(o.model);
  const Edition e = single_edition(o);
  const DatasetSplit split = load_split(data_dir(o), e, o.min_ascents);
  const auto& routes = o.split == "train" ? split.train : split.test;
  if (routes.empty()) {
    throw DatasetError("the " + o.split + " split of " + edition_name(e) + " is empty");
  }
  Json j;
  j["model"] = artifact.model.tag();
  j["artifact"] = o.model;
  j["edition"] = edition_name(e);
  j["split"] = o.split;
  j["metrics"] = metrics_to_json(evaluate(artifact.model, routes, exec_of(o)));
  emit(j, o, out);
  return 0;
}

int cmd_generalize(const Options& o, std::ostream& out, std::ostream& err) {
  const std::vector<Edition> train = edition_list(o.editions);
  GeneralizationConfig config;
  config.models = o.models;
  if (!o.test_editions.empty()) config.test_editions = edition_list(o.test_editions);
  config.options = train_options(o);
  for (const auto& tag : config.models) {
    if (!is_model_tag(tag)) throw ParseError("unknown model '" + tag + "'", tag);
  }
  const fs::path dir = data_dir(o);
  std::map<Edition, DatasetSplit> datasets;
  std::vector<Edition> needed = train;
  needed.insert(needed.end(), config.test_editions.begin(), config.test_editions.end());
  for (const Edition e : needed) {
    if (datasets.contains(e)) continue;
    try {
      datasets.emplace(e, load_split(dir, e, o.min_ascents));
    } catch (const Error& ex) {
      if (std::find(train.begin(), train.end(), e) != train.end()) throw;
      err << "warning: " << ex.what() << '\n';
    }
  }

  const GeneralizationMatrix matrix = generalization_run(train, datasets, config);
  for (const auto& w : matrix.warnings) err << "warning: " << w << '\n';
  emit(generalization_to_json(matrix), o, out);
  const bool failed = std::any_of(matrix.cells.begin(), matrix.cells.end(),
                                  [](const GeneralizationCell& c) { return !c.report; });
  return failed ? 1 : 0;
}

int cmd_render(const Options& o, std::ostream& out) {
  if (o.atlas.empty()) throw InvalidArgument("--atlas is required");
  const HoldAtlas atlas = load_atlas(o.atlas);
  RenderConfig config{o.size, o.channels, o.any_size};
  config.validate();
  if (!o.holds.empty()) {
    const Route route = route_from(o);
    export_image(render_route(route, atlas, config), o.out);
    out << o.out << '\n';
    return 0;
  }
  const Edition e = single_edition(o);
  const DatasetSplit split = load_split(data_dir(o), e, o.min_ascents);
  const auto& routes = o.split == "train" ? split.train : split.test;
  std::vector<std::pair<std::string, Image>> images;
  for (const LabeledRoute& r : routes) {
    if (o.limit != 0 && images.size() >= o.limit) break;
    images.emplace_back(r.name, render_route(r.route, atlas, config));
  }
  for (const auto& p : export_batch(images, o.out)) out << p.string() << '\n';
  return 0;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const ModelArtifact artifact = load_model(o.model);
  ModelRegistry registry;
  const std::string id = fs::path(o.model).stem().string();
  registry.add(id, artifact);
  const Service service(std::move(registry), exec_of(o));
  Json request;
  request["edition"] = edition_name(single_edition(o));
  request["holds"] = o.holds;
  request["whatif"] = o.with_whatif;
  const ApiResponse r = service.predict(request.dump());
  if (r.status != 200) throw InvalidArgument(Json::parse(r.body).value("error", r.body));
  out << Json::parse(r.body).dump(2) << '\n';
  return 0;
}

int cmd_whatif(const Options& o, std::ostream& out) {
  const ModelArtifact artifact = load_model(o.model);
  const WhatIfResult w = whatif(route_from(o), artifact.model, exec_of(o));
  Json j;
  j["model"] = artifact.model.tag();
  j["base"] = w.base;
  Json deltas = Json::array();
  for (const auto& d : w.deltas) {
    deltas.push_back(Json{{"position", d.position.to_string()},
                          {"action", d.removal ? "remove" : "add"},
                          {"delta", d.delta}});
  }
  j["deltas"] = std::move(deltas);
  emit(j, o, out);
  return 0;
}

HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int cmd_serve(const Options& o, std::ostream& out) {
  const Service service(ModelRegistry::load_dir(o.model_dir), exec_of(o));
  std::optional<fs::path> static_dir;
  if (!o.static_dir.empty()) static_dir = o.static_dir;
  HttpServer server(service, o.host, o.port, static_dir);
  out << "serving " << service.registry().entries().size() << " model(s) on http://" << o.host
      << ':' << server.port() << '\n'
      << std::flush;
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.wait();
  g_server = nullptr;
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Boulder grade prediction for 11x18 training boards"};
  app.name(args.empty() ? "gradecraft" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  auto data_opts = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "Data directory (default: $GRADECRAFT_DATA_DIR)");
    sub->add_option("--min-ascents", o.min_ascents, "Drop routes with fewer ascents")
        ->capture_default_str();
  };
  auto route_opts = [&](CLI::App* sub) {
    sub->add_option("--edition", o.editions, "Board edition: 2016, 2017 or 2019")
        ->required()
        ->expected(1);
    sub->add_option("--holds", o.holds, "Comma-separated positions such as A5,C7,K18")
        ->delimiter(',');
  };
  auto train_opts = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sub->add_option("--epochs", o.epochs, "Maximum epochs (networks)")->capture_default_str();
    sub->add_option("--patience", o.patience,
                    "Early-stopping patience (networks; default 20, capped below --epochs)");
    sub->add_option("--batch-size", o.batch_size, "Minibatch size (networks)")
        ->capture_default_str();
    sub->add_option("--lr", o.lr, "Adam learning rate (networks)")->capture_default_str();
    sub->add_flag("--class-weights", o.class_weights, "Weight loss by inverse grade frequency");
    sub->add_flag("--sample-weights", o.sample_weights, "Weight loss by log ascents");
    sub->add_flag("--compact", o.compact, "Use reduced layer widths (networks)");
    sub->add_flag("--parallel", o.parallel, "Use OpenMP kernels");
    sub->add_option("--lambda", o.hyper.lambda, "Ridge penalty")->capture_default_str();
    sub->add_option("--c", o.hyper.c, "SVR box constraint")->capture_default_str();
    sub->add_option("--epsilon", o.hyper.epsilon, "SVR tube half-width")->capture_default_str();
    sub->add_option("--gamma", o.hyper.gamma, "RBF kernel width")->capture_default_str();
    sub->add_option("--max-depth", o.hyper.max_depth, "Tree depth limit, 0 for none")
        ->capture_default_str();
    sub->add_option("--min-leaf", o.hyper.min_leaf, "Minimum samples per leaf")
        ->capture_default_str();
    sub->add_option("--n-estimators", o.hyper.n_estimators, "Boosting rounds")
        ->capture_default_str();
    sub->add_option("--boost-lr", o.hyper.learning_rate, "Boosting shrinkage")
        ->capture_default_str();
    sub->add_option("--boost-depth", o.hyper.boost_depth, "Depth of boosted trees")
        ->capture_default_str();
    sub->add_flag("--no-subsample", o.no_subsample, "Fit RBF SVR on the full training set");
    sub->add_option("--subsample-limit", o.hyper.subsample_limit, "RBF SVR subsample size")
        ->capture_default_str();
  };

  auto* ingest =
      app.add_subcommand("ingest", "Validate a dataset export and copy it into the data directory");
  ingest->add_option("--edition", o.editions, "Board edition")->required()->expected(1);
  ingest->add_option("--input", o.input, "Dataset JSON export")->required();
  ingest->add_option("--data", o.data, "Data directory (default: $GRADECRAFT_DATA_DIR)");

  auto* stats = app.add_subcommand("stats", "Per-grade route counts after filtering");
  stats->add_option("--edition", o.editions, "Board edition")->required()->expected(1);
  data_opts(stats);
  stats->add_option("--out", o.out, "Also write the report here");

  auto* train = app.add_subcommand("train", "Fit a model and save it as an artifact");
  train->add_option("--edition", o.editions, "Training edition(s), comma-separated")
      ->required()
      ->delimiter(',');
  train->add_option("--model", o.model, "Model: lr, ridge, linear-svr, rbf-svr, dtr, xgbr, dnn, "
                                        "cnn2d, lstm, hybrid")
      ->required();
  train->add_option("--out", o.out, "Artifact path")->required();
  train->add_option("--epoch-log", o.epoch_log, "Epoch log path (default: <out>.epochs.jsonl)");
  train->add_option("--created", o.created, "Timestamp stored in the artifact");
  data_opts(train);
  train_opts(train);

  auto* eval = app.add_subcommand("eval", "Score an artifact on an edition");
  eval->add_option("--model", o.model, "Artifact path")->required();
  eval->add_option("--edition", o.editions, "Board edition")->required()->expected(1);
  eval->add_option("--split", o.split, "test (benchmarks) or train")
      ->check(CLI::IsMember({"test", "train"}))
      ->capture_default_str();
  eval->add_option("--out", o.out, "Also write the report here");
  eval->add_flag("--parallel", o.parallel, "Use OpenMP kernels");
  data_opts(eval);

  auto* gen = app.add_subcommand("generalize", "Train on some editions, score on all");
  gen->add_option("--train", o.editions, "Training editions, comma-separated")
      ->required()
      ->delimiter(',');
  gen->add_option("--test", o.test_editions, "Scored editions (default: all)")->delimiter(',');
  o.models = {"dnn", "cnn2d", "lstm", "hybrid"};
  gen->add_option("--models", o.models, "Models, comma-separated")
      ->delimiter(',')
      ->capture_default_str();
  gen->add_option("--out", o.out, "Also write the report here");
  data_opts(gen);
  train_opts(gen);

  auto* render = app.add_subcommand("render", "Draw route images");
  route_opts(render);
  render->add_option("--atlas", o.atlas, "Atlas manifest")->required();
  render->add_option("--out", o.out, "PNG path, or a directory for dataset routes")->required();
  render->add_option("--size", o.size, "Square size: 224, 256 or 512")->capture_default_str();
  render->add_option("--channels", o.channels, "1, 3 or 4")->capture_default_str();
  render->add_flag("--any-size", o.any_size, "Allow any size >= 64");
  render->add_option("--split", o.split, "Dataset split to draw without --holds")
      ->check(CLI::IsMember({"test", "train"}))
      ->capture_default_str();
  render->add_option("--limit", o.limit, "Draw at most this many dataset routes");
  data_opts(render);

  auto* predict = app.add_subcommand("predict", "Grade one route");
  predict->add_option("--model", o.model, "Artifact path")->required();
  route_opts(predict);
  predict->add_flag("--whatif", o.with_whatif, "Include per-hold deltas");
  predict->add_flag("--parallel", o.parallel, "Use OpenMP kernels");

  auto* wi = app.add_subcommand("whatif", "Grade change from adding or removing each hold");
  wi->add_option("--model", o.model, "Artifact path")->required();
  route_opts(wi);
  wi->add_option("--out", o.out, "Also write the report here");
  wi->add_flag("--parallel", o.parallel, "Use OpenMP kernels");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--models", o.model_dir, "Directory of .gcm artifacts")->required();
  serve->add_option("--host", o.host, "Bind address")->capture_default_str();
  serve->add_option("--port", o.port, "Port, 0 for any free port")->capture_default_str();
  serve->add_option("--static", o.static_dir, "Directory served at /");
  serve->add_flag("--parallel", o.parallel, "Use OpenMP kernels");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(o, out);
    if (*stats) return cmd_stats(o, out);
    if (*train) return cmd_train(o, out, err);
    if (*eval) return cmd_eval(o, out);
    if (*gen) return cmd_generalize(o, out, err);
    if (*render) return cmd_render(o, out);
    if (*predict) return cmd_predict(o, out);
    if (*wi) return cmd_whatif(o, out);
    if (*serve) return cmd_serve(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace gradecraft
