// Copyright 2026 The crowdval Authors.
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

// crowdval: command-line entry point.
//
// Every command that writes files also writes run_manifest.json next to
// them. Options can come from a TOML file given with --config (one section
// per subcommand); flags on the command line win.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crowdval/adapters.hpp"
#include "crowdval/corpus.hpp"
#include "crowdval/costmodel.hpp"
#include "crowdval/dtree.hpp"
#include "crowdval/error.hpp"
#include "crowdval/evalreport.hpp"
#include "crowdval/policies.hpp"
#include "crowdval/reviewsvc.hpp"
#include "crowdval/textmetrics.hpp"
#include "crowdval/util.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace crowdval {
namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr const char* kModule = "cli";

struct Globals {
  std::uint64_t seed = 0;
  std::string profile = "default";
  fs::path out_dir = ".";
};

// Collects what a command read and wrote, then emits run_manifest.json.
class RunManifest {
 public:
  RunManifest(const CLI::App& root, std::string command, const Globals& g)
      : root_(root), command_(std::move(command)), globals_(g), started_(util::NowIso8601()) {}

  void Input(const fs::path& p) {
    if (p.empty()) return;
    inputs_[p.string()] = util::Hex64(util::Fnv1a64(util::ReadFile(p)));
  }
  void Output(const fs::path& p) { outputs_.push_back(p.filename().string()); }

  void Write(const fs::path& dir) const {
    ordered_json j;
    j["command"] = command_;
    j["tool_version"] = kToolVersion;
    j["seed"] = globals_.seed;
    j["profile"] = ProfileToString(ParseProfile(globals_.profile));
    j["config"] = root_.config_to_str(true, false);
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["started_at"] = started_;
    j["finished_at"] = util::NowIso8601();
    util::WriteFileAtomic(dir / "run_manifest.json", j.dump(2) + "\n");
  }

 private:
  const CLI::App& root_;
  std::string command_;
  Globals globals_;
  std::string started_;
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
};

fs::path PrepareOutDir(const Globals& g) {
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  if (ec) throw DataError(kModule, "cannot create " + g.out_dir.string() + ": " + ec.message());
  return g.out_dir;
}

void WriteText(const fs::path& path, const std::string& content, RunManifest& manifest) {
  util::WriteFileAtomic(path, content);
  manifest.Output(path);
}

Dataset LoadDataset(const fs::path& path, const std::string& format) {
  if (format.empty()) return LoadManifest(path, GuessManifestFormat(path));
  auto f = ParseManifestFormat(format);
  if (!f) throw UsageError(kModule, "unknown manifest format '" + format + "'");
  return LoadManifest(path, *f);
}

Dataset Attach(const Dataset& ds, const fs::path& labels, LabelKind kind, bool strict,
               RunManifest& manifest) {
  if (labels.empty()) return ds;
  manifest.Input(labels);
  AttachResult r = AttachLabels(ds, labels, kind, strict);
  if (!r.unmatched_ids.empty())
    std::cerr << "warning: " << r.unmatched_ids.size() << " label id(s) in " << labels.string()
              << " not in the dataset\n";
  return r.dataset;
}

// ---------------------------------------------------------------------------

struct IngestOpts {
  fs::path manifest;
  std::string format;
  fs::path silver, gold;
  bool strict = false;
  double split_ratio = -1;
  fs::path dev_ids, test_ids;
};

std::vector<std::string> ReadIdList(const fs::path& p) {
  std::vector<std::string> ids;
  for (auto& line : util::ReadLines(p)) {
    auto t = util::Trim(line);
    if (!t.empty() && t.front() != '#') ids.emplace_back(t);
  }
  return ids;
}

int RunIngest(const IngestOpts& o, const Globals& g, RunManifest& m) {
  m.Input(o.manifest);
  Dataset ds = LoadDataset(o.manifest, o.format);
  ds = Attach(ds, o.silver, LabelKind::kSilver, o.strict, m);
  ds = Attach(ds, o.gold, LabelKind::kGold, o.strict, m);
  const fs::path dir = PrepareOutDir(g);
  WriteText(dir / "dataset.tsv", FormatManifest(ds, ManifestFormat::kTsv), m);
  std::cout << "ingested " << ds.size() << " triplet(s), lang " << ds.lang() << "\n";

  std::optional<SplitSpec> spec;
  if (!o.dev_ids.empty() || !o.test_ids.empty()) {
    if (o.dev_ids.empty() || o.test_ids.empty())
      throw UsageError(kModule, "--dev-ids and --test-ids go together");
    m.Input(o.dev_ids);
    m.Input(o.test_ids);
    spec = ExplicitSplit{ReadIdList(o.dev_ids), ReadIdList(o.test_ids)};
  } else if (o.split_ratio >= 0) {
    spec = RatioSplit{o.split_ratio, g.seed};
  }
  if (spec) {
    auto [dev, test] = SplitDataset(ds, *spec);
    WriteText(dir / "dev.tsv", FormatManifest(dev, ManifestFormat::kTsv), m);
    WriteText(dir / "test.tsv", FormatManifest(test, ManifestFormat::kTsv), m);
    std::cout << "split: dev " << dev.size() << ", test " << test.size() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct FeaturesOpts {
  fs::path dataset;
  std::string format;
  fs::path backends;
  fs::path bundles;
  std::string features = "cer,wer,per,ter";
};

int RunFeatures(const FeaturesOpts& o, const Globals& g, RunManifest& m) {
  m.Input(o.dataset);
  Dataset ds = LoadDataset(o.dataset, o.format);
  const auto profile = ParseProfile(g.profile);
  std::vector<Feature> requested;
  for (Feature f : ParseFeatureList(o.features))
    if (f != Feature::kSilver) requested.push_back(f);

  std::vector<TranscriptBundle> bundles;
  const fs::path dir = PrepareOutDir(g);
  if (!o.bundles.empty()) {
    m.Input(o.bundles);
    bundles = LoadBundles(o.bundles, &ds);
  } else {
    if (o.backends.empty()) throw UsageError(kModule, "features needs --backends or --bundles");
    m.Input(o.backends);
    bundles = AssembleBundles(ds, LoadBackendSet(o.backends));
    SaveBundles(bundles, dir / "bundles.jsonl");
    m.Output(dir / "bundles.jsonl");
  }
  std::map<std::string, const TranscriptBundle*> by_id;
  for (const auto& b : bundles) by_id[b.id] = &b;
  FeatureTable table;
  for (const auto& t : ds.triplets()) {
    auto it = by_id.find(t.id);
    if (it == by_id.end()) throw DataError(kModule, "no transcript bundle for '" + t.id + "'");
    table[t.id] = BuildFeatures(t, *it->second, profile, requested);
  }
  SaveFeatureTable(table, profile, dir / "features.tsv");
  m.Output(dir / "features.tsv");
  std::cout << "features for " << table.size() << " triplet(s): "
            << FeatureListToString(requested) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainOpts {
  fs::path dev;
  std::string format;
  fs::path feature_table;
  fs::path gold;
  std::string features = "cer,wer,silver";
  std::string grid = "full";
  int folds = 10;
  int threads = 0;
};

std::vector<TrainingRow> TrainingRows(const Dataset& ds, const FeatureTable& table) {
  std::vector<TrainingRow> rows;
  std::vector<std::string> no_gold;
  for (const auto& t : ds.triplets()) {
    if (!t.gold) {
      no_gold.push_back(t.id);
      continue;
    }
    TrainingRow r;
    auto it = table.find(t.id);
    if (it != table.end()) r.features = it->second;
    if (t.silver) r.features.silver = t.silver;
    r.gold = *t.gold;
    rows.push_back(std::move(r));
  }
  if (!no_gold.empty())
    throw DataError(kModule, std::to_string(no_gold.size()) +
                                 " training triplet(s) lack a gold label, e.g. '" + no_gold[0] +
                                 "'");
  return rows;
}

int RunTrainTree(const TrainOpts& o, const Globals& g, RunManifest& m) {
  m.Input(o.dev);
  Dataset ds = LoadDataset(o.dev, o.format);
  ds = Attach(ds, o.gold, LabelKind::kGold, false, m);
  FeatureTable table;
  if (!o.feature_table.empty()) {
    m.Input(o.feature_table);
    table = LoadFeatureTable(o.feature_table);
  }
  const auto feature_set = ParseFeatureList(o.features);
  for (Feature f : feature_set)
    if (f != Feature::kSilver && o.feature_table.empty())
      throw UsageError(kModule, "feature '" + std::string(FeatureName(f)) +
                                    "' needs --feature-table");
  const auto rows = TrainingRows(ds, table);

  std::vector<Hyperparams> grid;
  if (o.grid == "full") grid = FullGrid();
  else if (o.grid == "default") grid = {Hyperparams{}};
  else throw UsageError(kModule, "--grid must be full or default");

  GridSearchResult res = GridSearchCv(rows, grid, feature_set, o.folds, g.seed, o.threads);
  const fs::path dir = PrepareOutDir(g);
  SaveModel(res.model, dir / "model.json");
  m.Output(dir / "model.json");
  WriteText(dir / "grid.csv", FormatGridTable(res.table), m);
  const auto& best = res.table[res.best_index];
  std::cout << "best grid point " << best.grid_index << ": depth " << best.hp.max_depth << ", "
            << SplitterName(best.hp.splitter) << ", " << CriterionName(best.hp.criterion) << ", "
            << ClassWeightName(best.hp.class_weight) << ", min_split "
            << best.hp.min_samples_split << ", min_leaf " << best.hp.min_samples_leaf
            << "; mean CV F1 " << util::FormatFixed(best.mean_f1, 4) << "\n";
  for (const auto& w : res.model.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct PolicyOpts {
  fs::path dataset;
  std::string format;
  fs::path feature_table;
  std::string policy;
  fs::path model;
  double cer_max = 0;
  double wer_max = 0;
  fs::path silver;
  std::string routing = "offline_silver";
  std::string review_url;
  fs::path resume;
};

void EnqueueRemote(const std::string& url, const Dataset& ds,
                   const std::vector<std::string>& ids) {
  ordered_json body;
  body["items"] = ordered_json::array();
  for (const auto& id : ids) {
    const Triplet* t = ds.Find(id);
    ordered_json it;
    it["sample_id"] = id;
    it["prompt"] = t->prompt;
    it["audio"] = t->recording;
    it["iteration"] = t->iteration;
    body["items"].push_back(std::move(it));
  }
  httplib::Client client(url);
  client.set_connection_timeout(10);
  auto res = client.Post("/api/queue", body.dump(), "application/json");
  if (!res) throw BackendError("reviewsvc", "cannot reach review service at " + url);
  if (res->status != 200)
    throw BackendError("reviewsvc", "review service answered " + std::to_string(res->status) +
                                        ": " + res->body);
}

int RunPolicyCmd(PolicyOpts o, const Globals& g, RunManifest& m) {
  if (!o.resume.empty()) {
    m.Input(o.resume);
    RunCheckpoint cp = LoadCheckpoint(o.resume);
    if (o.policy.empty()) o.policy = cp.policy;
    o.cer_max = cp.cer_max;
    o.wer_max = cp.wer_max;
    o.routing = "offline_silver";
    if (o.silver.empty()) throw UsageError(kModule, "--resume needs --silver with review labels");
  }
  if (o.policy.empty()) throw UsageError(kModule, "--policy is required");
  PolicyConfig cfg;
  auto kind = ParsePolicyKind(o.policy);
  if (!kind) throw UsageError(kModule, "unknown policy '" + o.policy + "'");
  cfg.kind = *kind;
  cfg.cer_max = o.cer_max;
  cfg.wer_max = o.wer_max;
  auto routing = ParseRouting(o.routing);
  if (!routing) throw UsageError(kModule, "unknown routing '" + o.routing + "'");
  cfg.routing = *routing;
  if (!o.model.empty()) {
    m.Input(o.model);
    cfg.model = std::make_shared<DecisionTreeModel>(LoadModel(o.model));
  }
  if (cfg.kind == PolicyKind::kTree && !cfg.model)
    throw UsageError(kModule, "the tree policy needs --model");

  m.Input(o.dataset);
  m.Input(o.feature_table);
  Dataset ds = LoadDataset(o.dataset, o.format);
  ds = Attach(ds, o.silver, LabelKind::kSilver, false, m);
  RunResult res = RunPolicy(ds, LoadFeatureTable(o.feature_table), cfg);

  const fs::path dir = PrepareOutDir(g);
  SaveDecisions(res.decisions, dir / "decisions.tsv");
  m.Output(dir / "decisions.tsv");
  const auto& s = res.summary;
  if (!s.pending_review.empty()) {
    RunCheckpoint cp{std::string(PolicyKindName(cfg.kind)), cfg.cer_max, cfg.wer_max,
                     s.pending_review};
    SaveCheckpoint(cp, dir / "checkpoint.json");
    m.Output(dir / "checkpoint.json");
    if (!o.review_url.empty()) EnqueueRemote(o.review_url, ds, s.pending_review);
  }
  std::cout << PolicyKindName(cfg.kind) << ": " << s.total << " sample(s), " << s.valid
            << " valid, " << s.invalid << " invalid; automated " << s.automated
            << ", human fallback " << s.human_fallback << ", pending review "
            << s.pending_review.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateOpts {
  std::vector<std::string> decisions;
  fs::path gold;
  fs::path agreement;
};

int RunEvaluate(const EvaluateOpts& o, const Globals& g, RunManifest& m) {
  m.Input(o.gold);
  const LabelMap gold = LoadLabelFile(o.gold);
  std::vector<EvalRow> rows;
  for (const auto& spec : o.decisions) {
    auto eq = spec.find('=');
    std::string name = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    fs::path path = eq == std::string::npos ? fs::path(spec) : fs::path(spec.substr(eq + 1));
    m.Input(path);
    EvalRow r = Metrics(Confusion(LoadDecisions(path), gold), name);
    for (const auto& d : r.degenerate)
      std::cerr << "warning: " << name << ": " << d << " has a zero denominator\n";
    rows.push_back(std::move(r));
  }
  const fs::path dir = PrepareOutDir(g);
  const std::string csv = FormatEvalRows(rows);
  WriteText(dir / "eval.csv", csv, m);
  std::cout << csv;
  if (!o.agreement.empty()) {
    m.Input(o.agreement);
    const LabelMap other = LoadLabelFile(o.agreement);
    std::vector<Label> a, b;
    for (const auto& [id, l] : gold) {
      auto it = other.find(id);
      if (it == other.end()) continue;
      a.push_back(l);
      b.push_back(it->second);
    }
    KappaResult k = CohenKappa(a, b);
    ordered_json j;
    j["samples"] = a.size();
    j["kappa"] = k.kappa;
    j["degenerate"] = k.degenerate;
    WriteText(dir / "kappa.json", j.dump(2) + "\n", m);
    std::cout << "kappa over " << a.size() << " shared id(s): " << util::FormatFixed(k.kappa, 4)
              << "\n";
  }
  return 0;
}

struct TradeoffOpts {
  fs::path eval;
  std::optional<double> type1_max, type2_max;
};

int RunTradeoff(const TradeoffOpts& o, const Globals& g, RunManifest& m) {
  m.Input(o.eval);
  const auto rows = ParseEvalRows(util::ReadFile(o.eval));
  std::optional<Zone> zone;
  if (o.type1_max || o.type2_max) zone = Zone{o.type1_max.value_or(1.0), o.type2_max.value_or(1.0)};
  const std::string csv = TradeoffCsv(rows, zone);
  WriteText(PrepareOutDir(g) / "tradeoff.csv", csv, m);
  std::cout << csv;
  return 0;
}

struct CostOpts {
  fs::path baseline, treatment;
};

int RunCostReport(const CostOpts& o, const Globals& g, RunManifest& m) {
  m.Input(o.baseline);
  m.Input(o.treatment);
  SavingsReport r = Savings(LoadLedger(o.baseline), LoadLedger(o.treatment));
  WriteText(PrepareOutDir(g) / "savings.json", r.ToJson(), m);
  std::cout << r.ToText();
  return 0;
}

struct QualityOpts {
  fs::path dataset;
  std::string format;
  fs::path bundles;
  fs::path decisions;
};

int RunQuality(const QualityOpts& o, const Globals& g, RunManifest& m) {
  m.Input(o.dataset);
  m.Input(o.bundles);
  Dataset ds = LoadDataset(o.dataset, o.format);
  std::vector<std::string> retained;
  if (!o.decisions.empty()) {
    m.Input(o.decisions);
    for (const auto& d : LoadDecisions(o.decisions))
      if (d.label == Label::kValid) retained.push_back(d.id);
    if (retained.empty()) throw DataError(kModule, "no valid decisions to retain");
  }
  QualityReport r = DatasetQuality(ds, LoadBundles(o.bundles, &ds), ParseProfile(g.profile), retained);
  const std::string csv = FormatQualityReport({r});
  WriteText(PrepareOutDir(g) / "quality.csv", csv, m);
  std::cout << csv;
  return 0;
}

// ---------------------------------------------------------------------------

struct ServeOpts {
  fs::path state_dir;
  std::string host = "127.0.0.1";
  std::optional<int> port;
  fs::path audio_root;
  fs::path ui_dir;
  double lease_seconds = 600;
};

ReviewServer* g_server = nullptr;

extern "C" void HandleStop(int) {
  if (g_server) g_server->Stop();
}

int RunServe(const ServeOpts& o, RunManifest& m) {
  int port = 8787;
  if (o.port) port = *o.port;
  else if (const char* env = std::getenv("CROWDVAL_PORT")) {
    auto v = util::ParseInt(env);
    if (!v || *v < 0 || *v > 65535) throw UsageError(kModule, "bad CROWDVAL_PORT");
    port = static_cast<int>(*v);
  }
  if (o.lease_seconds <= 0) throw UsageError(kModule, "--lease-seconds must be positive");

  ReviewQueue::Options qo;
  qo.state_dir = o.state_dir;
  qo.lease = std::chrono::milliseconds(static_cast<std::int64_t>(o.lease_seconds * 1000));
  if (const char* env = std::getenv("CROWDVAL_CRASH_AFTER_APPEND")) {
    auto v = util::ParseInt(env);
    if (v && *v > 0) qo.crash_after_append = static_cast<std::size_t>(*v);
  }
  ReviewQueue queue(qo);
  m.Write(o.state_dir);

  ReviewServer server(queue, ServerOptions{o.audio_root, o.ui_dir});
  const int bound = server.Bind(o.host, port);
  if (bound < 0) throw BackendError("reviewsvc", "cannot bind " + o.host + ":" + std::to_string(port));
  g_server = &server;
  std::signal(SIGINT, HandleStop);
  std::signal(SIGTERM, HandleStop);
  std::signal(SIGPIPE, SIG_IGN);
  std::cout << "listening on port " << bound << std::endl;
  server.ListenAfterBind();
  g_server = nullptr;
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"crowdval: validation of crowdsourced speech recordings"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file with option defaults (flags win)");
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--profile", g.profile, "Normalization profile, e.g. nfkc+lower+strip+collapse")
      ->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for outputs")->capture_default_str();

  IngestOpts ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Load a manifest, attach labels, optionally split");
  c_ingest->add_option("--manifest", ingest.manifest, "Manifest (TSV or JSONL)")->required();
  c_ingest->add_option("--format", ingest.format, "tsv or jsonl (default: by extension)");
  c_ingest->add_option("--silver", ingest.silver, "Silver label file");
  c_ingest->add_option("--gold", ingest.gold, "Gold label file");
  c_ingest->add_flag("--strict", ingest.strict, "Unknown label ids are errors");
  c_ingest->add_option("--split-ratio", ingest.split_ratio, "Dev fraction for a seeded split");
  c_ingest->add_option("--dev-ids", ingest.dev_ids, "Explicit dev id list");
  c_ingest->add_option("--test-ids", ingest.test_ids, "Explicit test id list");

  FeaturesOpts feats;
  auto* c_feats = app.add_subcommand("features", "Run backends and compute the feature table");
  c_feats->add_option("--dataset", feats.dataset, "Manifest")->required();
  c_feats->add_option("--format", feats.format, "tsv or jsonl");
  c_feats->add_option("--backends", feats.backends, "Backend TOML");
  c_feats->add_option("--bundles", feats.bundles, "Existing bundles.jsonl instead of backends");
  c_feats->add_option("--features", feats.features, "Features to compute")->capture_default_str();

  TrainOpts train;
  auto* c_train = app.add_subcommand("train-tree", "Grid-search a decision tree on the dev split");
  c_train->add_option("--dev", train.dev, "Dev manifest with gold labels")->required();
  c_train->add_option("--format", train.format, "tsv or jsonl");
  c_train->add_option("--feature-table", train.feature_table, "features.tsv for the dev ids");
  c_train->add_option("--gold", train.gold, "Gold label file to attach");
  c_train->add_option("--features", train.features, "Feature set")->capture_default_str();
  c_train->add_option("--grid", train.grid, "full or default")->capture_default_str();
  c_train->add_option("-k,--folds", train.folds, "CV folds")->capture_default_str();
  c_train->add_option("--threads", train.threads, "Worker threads (0: hardware)");

  PolicyOpts pol;
  auto* c_pol = app.add_subcommand("run-policy", "Apply a validation policy to a dataset");
  c_pol->add_option("--dataset", pol.dataset, "Manifest")->required();
  c_pol->add_option("--format", pol.format, "tsv or jsonl");
  c_pol->add_option("--feature-table", pol.feature_table, "features.tsv")->required();
  c_pol->add_option("--policy", pol.policy, "distance, tree or proposed");
  c_pol->add_option("--model", pol.model, "Tree model JSON");
  c_pol->add_option("--cer-max", pol.cer_max, "Distance policy CER bound")->capture_default_str();
  c_pol->add_option("--wer-max", pol.wer_max, "Distance policy WER bound")->capture_default_str();
  c_pol->add_option("--silver", pol.silver, "Silver labels for flagged samples");
  c_pol->add_option("--routing", pol.routing, "offline_silver or live_review")
      ->capture_default_str();
  c_pol->add_option("--review-url", pol.review_url, "Review service to enqueue flagged samples");
  c_pol->add_option("--resume", pol.resume, "checkpoint.json of a live_review run");

  EvaluateOpts ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score decisions against gold labels");
  c_eval->add_option("--decisions", ev.decisions, "name=decisions.tsv (repeatable)")->required();
  c_eval->add_option("--gold", ev.gold, "Gold label file")->required();
  c_eval->add_option("--agreement", ev.agreement, "Label file to compare with gold (kappa)");

  TradeoffOpts tr;
  auto* c_tr = app.add_subcommand("tradeoff", "Export type-1/type-2 points for plotting");
  c_tr->add_option("--eval", tr.eval, "eval.csv")->required();
  c_tr->add_option("--type1-max", tr.type1_max, "Zone bound on the type-1 rate");
  c_tr->add_option("--type2-max", tr.type2_max, "Zone bound on the type-2 rate");

  CostOpts cost;
  auto* c_cost = app.add_subcommand("cost-report", "Compare validation costs of two ledgers");
  c_cost->add_option("--baseline", cost.baseline, "Baseline ledger TSV")->required();
  c_cost->add_option("--treatment", cost.treatment, "Treatment ledger TSV")->required();

  QualityOpts q;
  auto* c_q = app.add_subcommand("quality", "Corpus-level WER and CER of retained samples");
  c_q->add_option("--dataset", q.dataset, "Manifest")->required();
  c_q->add_option("--format", q.format, "tsv or jsonl");
  c_q->add_option("--bundles", q.bundles, "bundles.jsonl")->required();
  c_q->add_option("--decisions", q.decisions, "Keep only samples decided valid");

  ServeOpts serve;
  auto* c_serve = app.add_subcommand("serve", "Run the human review service");
  c_serve->add_option("--state-dir", serve.state_dir, "Event log and snapshot directory")
      ->required();
  c_serve->add_option("--host", serve.host, "Bind address")->capture_default_str();
  c_serve->add_option("--port", serve.port, "Port (0: any free port; default CROWDVAL_PORT or 8787)");
  c_serve->add_option("--audio-root", serve.audio_root, "Directory holding recordings");
  c_serve->add_option("--ui-dir", serve.ui_dir, "Reviewer UI bundle served at /");
  c_serve->add_option("--lease-seconds", serve.lease_seconds, "Assignment lease")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::kUsage);
  }

  CLI::App* cmd = app.get_subcommands().front();
  RunManifest manifest(app, cmd->get_name(), g);
  ParseProfile(g.profile);  // reject a bad profile before any work
  int rc = 0;
  if (cmd == c_ingest) rc = RunIngest(ingest, g, manifest);
  else if (cmd == c_feats) rc = RunFeatures(feats, g, manifest);
  else if (cmd == c_train) rc = RunTrainTree(train, g, manifest);
  else if (cmd == c_pol) rc = RunPolicyCmd(pol, g, manifest);
  else if (cmd == c_eval) rc = RunEvaluate(ev, g, manifest);
  else if (cmd == c_tr) rc = RunTradeoff(tr, g, manifest);
  else if (cmd == c_cost) rc = RunCostReport(cost, g, manifest);
  else if (cmd == c_q) rc = RunQuality(q, g, manifest);
  else if (cmd == c_serve) return RunServe(serve, manifest);
  if (rc == 0) manifest.Write(g.out_dir);
  return rc;
}

}  // namespace
}  // namespace crowdval

int main(int argc, char** argv) {
  try {
    return crowdval::Main(argc, argv);
  } catch (const crowdval::Error& e) {
    std::cerr << "crowdval: " << e.module() << ": " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "crowdval: internal: " << e.what() << "\n";
    return static_cast<int>(crowdval::ErrorKind::kInternal);
  }
}
