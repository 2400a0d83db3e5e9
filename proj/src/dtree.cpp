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

#include "crowdval/dtree.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "crowdval/error.hpp"
#include "crowdval/util.hpp"
#include "json.hpp"

namespace crowdval {

namespace {

constexpr const char* kModule = "dtree";
constexpr double kTieEpsilon = 1e-12;

double Impurity(double w_valid, double w_invalid, Criterion c) {
  const double total = w_valid + w_invalid;
  if (total <= 0) return 0.0;
  const double p0 = w_valid / total;
  const double p1 = w_invalid / total;
  if (c == Criterion::kGini) return 1.0 - p0 * p0 - p1 * p1;
  // entropy and log_loss are the same Shannon criterion.
  double h = 0.0;
  if (p0 > 0) h -= p0 * std::log2(p0);
  if (p1 > 0) h -= p1 * std::log2(p1);
  return h;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& columns, const std::vector<Label>& gold,
              const std::vector<Feature>& feature_set, const Hyperparams& hp, std::uint64_t seed)
      : columns_(columns), gold_(gold), feature_set_(feature_set), hp_(hp), rng_(seed) {
    std::size_t n_invalid = 0;
    for (Label l : gold_) n_invalid += l == Label::kInvalid;
    const double n = static_cast<double>(gold_.size());
    weight_ = {1.0, 1.0};
    if (hp_.class_weight == ClassWeight::kBalanced) {
      const std::size_t n_valid = gold_.size() - n_invalid;
      if (n_valid) weight_[0] = n / (2.0 * static_cast<double>(n_valid));
      if (n_invalid) weight_[1] = n / (2.0 * static_cast<double>(n_invalid));
    }
  }

  std::vector<TreeNode> Build() {
    std::vector<std::size_t> all(gold_.size());
    std::iota(all.begin(), all.end(), 0);
    Grow(all, 0);
    return std::move(nodes_);
  }

 private:
  struct Candidate {
    std::size_t feature_pos = 0;
    double threshold = 0;
    double score = 0;
  };

  int Grow(const std::vector<std::size_t>& rows, int depth) {
    const int self = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::array<std::size_t, 2> counts{0, 0};
    for (auto r : rows) ++counts[static_cast<int>(gold_[r])];

    auto make_leaf = [&] {
      TreeNode& leaf = nodes_[self];
      leaf.leaf = true;
      leaf.sample_count = rows.size();
      leaf.class_counts = counts;
      const double w0 = weight_[0] * static_cast<double>(counts[0]);
      const double w1 = weight_[1] * static_cast<double>(counts[1]);
      leaf.label = w1 >= w0 ? Label::kInvalid : Label::kValid;
      return self;
    };

    const auto n = rows.size();
    if (depth >= hp_.max_depth || n < static_cast<std::size_t>(hp_.min_samples_split) ||
        counts[0] == 0 || counts[1] == 0)
      return make_leaf();

    auto best = FindSplit(rows);
    if (!best) return make_leaf();

    const Feature f = feature_set_[best->feature_pos];
    const auto& col = columns_[best->feature_pos];
    std::vector<std::size_t> left, right;
    for (auto r : rows) (col[r] <= best->threshold ? left : right).push_back(r);

    nodes_[self].leaf = false;
    nodes_[self].sample_count = n;
    nodes_[self].class_counts = counts;
    nodes_[self].feature = f;
    nodes_[self].threshold = best->threshold;
    const int l = Grow(left, depth + 1);
    const int r = Grow(right, depth + 1);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
  }

  std::optional<Candidate> FindSplit(const std::vector<std::size_t>& rows) {
    const std::size_t n = rows.size();
    const std::size_t min_leaf = static_cast<std::size_t>(std::max(hp_.min_samples_leaf, 1));
    std::optional<Candidate> best;
    std::vector<std::size_t> order(rows);
    std::vector<std::size_t> cuts;
    for (std::size_t fp = 0; fp < feature_set_.size(); ++fp) {
      const auto& col = columns_[fp];
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
      // cut p puts order[0, p) on the left.
      cuts.clear();
      for (std::size_t p = min_leaf; p + min_leaf <= n; ++p)
        if (col[order[p - 1]] < col[order[p]]) cuts.push_back(p);
      if (cuts.empty()) continue;

      double total[2] = {0, 0};
      for (auto r : order) total[static_cast<int>(gold_[r])] += weight_[static_cast<int>(gold_[r])];

      auto evaluate = [&](std::size_t p, double left0, double left1) {
        const double lo = col[order[p - 1]];
        const double hi = col[order[p]];
        double threshold = lo + (hi - lo) / 2.0;
        if (!(threshold > lo && threshold < hi)) threshold = lo;
        const double right0 = total[0] - left0;
        const double right1 = total[1] - left1;
        const double wl = left0 + left1;
        const double wr = right0 + right1;
        const double score = (wl * Impurity(left0, left1, hp_.criterion) +
                              wr * Impurity(right0, right1, hp_.criterion)) /
                             (wl + wr);
        if (!best || score < best->score - kTieEpsilon) best = Candidate{fp, threshold, score};
      };

      if (hp_.splitter == Splitter::kRandom) {
        const std::size_t p = cuts[rng_() % cuts.size()];
        double left[2] = {0, 0};
        for (std::size_t i = 0; i < p; ++i)
          left[static_cast<int>(gold_[order[i]])] += weight_[static_cast<int>(gold_[order[i]])];
        evaluate(p, left[0], left[1]);
      } else {
        double left[2] = {0, 0};
        std::size_t i = 0;
        for (std::size_t p : cuts) {
          for (; i < p; ++i)
            left[static_cast<int>(gold_[order[i]])] += weight_[static_cast<int>(gold_[order[i]])];
          evaluate(p, left[0], left[1]);
        }
      }
    }
    return best;
  }

  const std::vector<std::vector<double>>& columns_;
  const std::vector<Label>& gold_;
  const std::vector<Feature>& feature_set_;
  const Hyperparams& hp_;
  std::mt19937_64 rng_;
  std::array<double, 2> weight_{1.0, 1.0};
  std::vector<TreeNode> nodes_;
};

int DepthFrom(const std::vector<TreeNode>& nodes, int i) {
  const auto& n = nodes[static_cast<std::size_t>(i)];
  if (n.leaf) return 0;
  return 1 + std::max(DepthFrom(nodes, n.left), DepthFrom(nodes, n.right));
}

// Checks preorder layout: returns one past the last index of the subtree at i.
int CheckSubtree(const std::vector<TreeNode>& nodes, int i, int depth) {
  if (i < 0 || static_cast<std::size_t>(i) >= nodes.size())
    throw DataError(kModule, "tree node index out of range");
  if (depth > 64) throw DataError(kModule, "tree too deep");
  const auto& n = nodes[static_cast<std::size_t>(i)];
  if (n.leaf) return i + 1;
  if (n.left != i + 1) throw DataError(kModule, "nodes are not in preorder");
  const int after_left = CheckSubtree(nodes, n.left, depth + 1);
  if (n.right != after_left) throw DataError(kModule, "nodes are not in preorder");
  return CheckSubtree(nodes, n.right, depth + 1);
}

}  // namespace

std::string_view SplitterName(Splitter s) { return s == Splitter::kBest ? "best" : "random"; }

std::string_view CriterionName(Criterion c) {
  switch (c) {
    case Criterion::kGini: return "gini";
    case Criterion::kEntropy: return "entropy";
    case Criterion::kLogLoss: return "log_loss";
  }
  return "?";
}

std::string_view ClassWeightName(ClassWeight w) {
  return w == ClassWeight::kBalanced ? "balanced" : "none";
}

std::vector<Hyperparams> FullGrid() {
  std::vector<Hyperparams> grid;
  for (int depth : {1, 2, 3})
    for (Splitter s : {Splitter::kBest, Splitter::kRandom})
      for (Criterion c : {Criterion::kGini, Criterion::kEntropy, Criterion::kLogLoss})
        for (ClassWeight w : {ClassWeight::kBalanced, ClassWeight::kNone})
          for (int mss : {3, 5, 7, 9, 11, 13})
            for (int msl : {1, 3, 5, 7, 9, 11, 13}) grid.push_back({depth, s, c, w, mss, msl});
  return grid;
}

DecisionTreeModel::DecisionTreeModel(std::vector<TreeNode> nodes, std::vector<Feature> feature_set)
    : nodes_(std::move(nodes)), feature_set_(std::move(feature_set)) {
  if (nodes_.empty()) throw DataError(kModule, "tree has no nodes");
  if (CheckSubtree(nodes_, 0, 0) != static_cast<int>(nodes_.size()))
    throw DataError(kModule, "tree has unreachable nodes");
  for (const auto& n : nodes_) {
    if (n.leaf) continue;
    if (std::find(feature_set_.begin(), feature_set_.end(), n.feature) == feature_set_.end())
      throw DataError(kModule, "node tests feature '" + std::string(FeatureName(n.feature)) +
                                   "' outside the model feature set");
  }
}

int DecisionTreeModel::LeafIndex(const FeatureVector& fv) const {
  if (nodes_.empty()) throw DataError(kModule, "empty model");
  int i = 0;
  while (!nodes_[static_cast<std::size_t>(i)].leaf) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    auto v = fv.Get(n.feature);
    if (!v)
      throw DataError(kModule, "feature vector lacks '" + std::string(FeatureName(n.feature)) + "'");
    i = *v <= n.threshold ? n.left : n.right;
  }
  return i;
}

Label DecisionTreeModel::Predict(const FeatureVector& fv) const {
  return nodes_[static_cast<std::size_t>(LeafIndex(fv))].label;
}

int DecisionTreeModel::Depth() const { return nodes_.empty() ? 0 : DepthFrom(nodes_, 0); }

std::size_t DecisionTreeModel::InternalCount() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return !n.leaf; }));
}

std::size_t DecisionTreeModel::LeafCount() const { return nodes_.size() - InternalCount(); }

std::string TrainingFingerprint(std::span<const TrainingRow> rows,
                                const std::vector<Feature>& feature_set) {
  std::uint64_t h = util::Fnv1a64(FeatureListToString(feature_set));
  for (const auto& r : rows) {
    std::string line;
    for (Feature f : feature_set) {
      auto v = r.features.Get(f);
      line += v ? util::FormatDouble(*v) : "-";
      line += ',';
    }
    line += std::to_string(LabelValue(r.gold));
    line += '\n';
    h = util::Fnv1a64(line, h);
  }
  return util::Hex64(h);
}

DecisionTreeModel Fit(std::span<const TrainingRow> rows, const Hyperparams& hp,
                      const std::vector<Feature>& feature_set, std::uint64_t seed) {
  if (rows.empty()) throw DataError(kModule, "cannot fit a tree on zero rows");
  if (feature_set.empty()) throw DataError(kModule, "empty feature set");
  if (hp.max_depth < 0 || hp.min_samples_split < 2 || hp.min_samples_leaf < 1)
    throw UsageError(kModule, "invalid hyperparameters");
  std::vector<std::vector<double>> columns(feature_set.size(), std::vector<double>(rows.size()));
  std::vector<Label> gold(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    gold[i] = rows[i].gold;
    for (std::size_t f = 0; f < feature_set.size(); ++f) {
      auto v = rows[i].features.Get(feature_set[f]);
      if (!v)
        throw DataError(kModule, "training row " + std::to_string(i + 1) + " lacks feature '" +
                                     std::string(FeatureName(feature_set[f])) + "'");
      columns[f][i] = *v;
    }
  }
  TreeBuilder builder(columns, gold, feature_set, hp, seed);
  DecisionTreeModel model(builder.Build(), feature_set);
  model.hyperparams = hp;
  model.seed = seed;
  model.train_fingerprint = TrainingFingerprint(rows, feature_set);
  const auto invalid = std::count(gold.begin(), gold.end(), Label::kInvalid);
  if (invalid == 0 || invalid == static_cast<std::ptrdiff_t>(gold.size()))
    model.warnings.push_back("single-class training data; tree is one leaf");
  return model;
}

double F1Invalid(std::span<const Label> gold, std::span<const Label> predicted) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == Label::kInvalid;
    const bool p = predicted[i] == Label::kInvalid;
    tp += g && p;
    fp += !g && p;
    fn += g && !p;
  }
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

std::vector<std::vector<std::size_t>> StratifiedFolds(std::span<const Label> labels, int k,
                                                      std::uint64_t seed) {
  if (k < 2) throw UsageError(kModule, "need at least 2 folds");
  if (static_cast<std::size_t>(k) > labels.size())
    throw DataError(kModule, "more folds (" + std::to_string(k) + ") than rows (" +
                                 std::to_string(labels.size()) + ")");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  std::size_t next = 0;
  for (Label cls : {Label::kValid, Label::kInvalid}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
    for (auto i : idx) {
      folds[next].push_back(i);
      next = (next + 1) % folds.size();
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

GridSearchResult GridSearchCv(std::span<const TrainingRow> rows,
                              const std::vector<Hyperparams>& grid,
                              const std::vector<Feature>& feature_set, int k, std::uint64_t seed,
                              int threads) {
  if (grid.empty()) throw UsageError(kModule, "empty hyperparameter grid");
  std::vector<Label> labels;
  for (const auto& r : rows) labels.push_back(r.gold);
  const auto n_invalid = std::count(labels.begin(), labels.end(), Label::kInvalid);
  if (n_invalid == 0 || n_invalid == static_cast<std::ptrdiff_t>(labels.size()))
    throw DataError(kModule, "grid search needs both classes in the training rows");
  auto folds = StratifiedFolds(labels, k, seed);

  struct FoldData {
    std::vector<TrainingRow> train;
    std::vector<const TrainingRow*> held_out;
    std::vector<Label> held_gold;
    bool degenerate = false;
  };
  std::vector<FoldData> fold_data(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> in_fold(rows.size(), false);
    for (auto i : folds[f]) in_fold[i] = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (in_fold[i]) {
        fold_data[f].held_out.push_back(&rows[i]);
        fold_data[f].held_gold.push_back(rows[i].gold);
      } else {
        fold_data[f].train.push_back(rows[i]);
      }
    }
    const auto pos = std::count(fold_data[f].held_gold.begin(), fold_data[f].held_gold.end(),
                                Label::kInvalid);
    fold_data[f].degenerate =
        pos == 0 || pos == static_cast<std::ptrdiff_t>(fold_data[f].held_gold.size());
  }

  std::vector<GridRow> table(grid.size());
  auto evaluate = [&](std::size_t gi) {
    GridRow& row = table[gi];
    row.grid_index = gi;
    row.hp = grid[gi];
    std::vector<Label> pred;
    for (const auto& fd : fold_data) {
      if (fd.degenerate) {
        row.fold_f1.push_back(0.0);
        ++row.degenerate_folds;
        continue;
      }
      auto model = Fit(fd.train, grid[gi], feature_set, seed);
      pred.clear();
      for (const auto* r : fd.held_out) pred.push_back(model.Predict(r->features));
      row.fold_f1.push_back(F1Invalid(fd.held_gold, pred));
    }
    double sum = 0;
    for (double v : row.fold_f1) sum += v;
    row.mean_f1 = sum / static_cast<double>(row.fold_f1.size());
    double ss = 0;
    for (double v : row.fold_f1) ss += (v - row.mean_f1) * (v - row.mean_f1);
    row.std_f1 = std::sqrt(ss / static_cast<double>(row.fold_f1.size()));
    row.node_count = Fit(rows, grid[gi], feature_set, seed).nodes().size();
  };

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(grid.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t gi = next++; gi < grid.size(); gi = next++) {
        try {
          evaluate(gi);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (table[a].mean_f1 != table[b].mean_f1) return table[a].mean_f1 > table[b].mean_f1;
    if (table[a].node_count != table[b].node_count) return table[a].node_count < table[b].node_count;
    return a < b;
  });
  for (std::size_t r = 0; r < order.size(); ++r) table[order[r]].rank = r + 1;

  GridSearchResult result;
  result.best_index = order.front();
  result.model = Fit(rows, grid[result.best_index], feature_set, seed);
  result.model.cv_f1 = table[result.best_index].mean_f1;
  result.table = std::move(table);
  return result;
}

std::string FormatGridTable(const std::vector<GridRow>& table) {
  std::ostringstream out;
  std::size_t k = table.empty() ? 0 : table.front().fold_f1.size();
  out << "grid_index,rank,max_depth,splitter,criterion,class_weight,min_samples_split,"
         "min_samples_leaf,mean_f1,std_f1,nodes,degenerate_folds,folds";
  for (std::size_t f = 0; f < k; ++f) out << ",f1_fold" << f + 1;
  out << '\n';
  for (const auto& r : table) {
    out << r.grid_index << ',' << r.rank << ',' << r.hp.max_depth << ','
        << SplitterName(r.hp.splitter) << ',' << CriterionName(r.hp.criterion) << ','
        << ClassWeightName(r.hp.class_weight) << ',' << r.hp.min_samples_split << ','
        << r.hp.min_samples_leaf << ',' << util::FormatDouble(r.mean_f1) << ','
        << util::FormatDouble(r.std_f1) << ',' << r.node_count << ',' << r.degenerate_folds
        << ",stratified";
    for (double v : r.fold_f1) out << ',' << util::FormatDouble(v);
    out << '\n';
  }
  return out.str();
}

namespace {

template <typename E, typename NameFn>
E ParseEnum(const std::string& s, std::initializer_list<E> values, NameFn name, const char* what) {
  for (E v : values)
    if (name(v) == s) return v;
  throw DataError(kModule, std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

std::string ModelToJson(const DecisionTreeModel& model) {
  nlohmann::ordered_json j;
  j["version"] = kModelFormatVersion;
  std::vector<std::string> fs;
  for (Feature f : model.feature_set()) fs.emplace_back(FeatureName(f));
  j["feature_set"] = fs;
  const auto& hp = model.hyperparams;
  j["hyperparams"] = {{"max_depth", hp.max_depth},
                      {"splitter", SplitterName(hp.splitter)},
                      {"criterion", CriterionName(hp.criterion)},
                      {"class_weight", ClassWeightName(hp.class_weight)},
                      {"min_samples_split", hp.min_samples_split},
                      {"min_samples_leaf", hp.min_samples_leaf}};
  j["cv_f1"] = model.cv_f1 ? nlohmann::ordered_json(*model.cv_f1) : nullptr;
  j["seed"] = model.seed;
  j["train_fingerprint"] = model.train_fingerprint;
  j["warnings"] = model.warnings;
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : model.nodes()) {
    nlohmann::ordered_json node;
    if (n.leaf) {
      node["leaf"] = true;
      node["class"] = LabelValue(n.label);
    } else {
      node["leaf"] = false;
      node["feature"] = FeatureName(n.feature);
      node["threshold"] = n.threshold;
    }
    node["samples"] = n.sample_count;
    node["class_counts"] = {n.class_counts[0], n.class_counts[1]};
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  return j.dump(2) + "\n";
}

namespace {

// Rebuilds child links from preorder.
int Link(std::vector<TreeNode>& nodes, std::size_t& pos) {
  if (pos >= nodes.size()) throw DataError(kModule, "truncated node list");
  const int self = static_cast<int>(pos++);
  if (!nodes[static_cast<std::size_t>(self)].leaf) {
    const int l = Link(nodes, pos);
    const int r = Link(nodes, pos);
    nodes[static_cast<std::size_t>(self)].left = l;
    nodes[static_cast<std::size_t>(self)].right = r;
  }
  return self;
}

}  // namespace

DecisionTreeModel ModelFromJson(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(kModule, std::string("corrupt model file: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("version"))
      throw DataError(kModule, "corrupt model file: no version");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw DataError(kModule, "model format version " + std::to_string(version) +
                                   " is not supported (expected " +
                                   std::to_string(kModelFormatVersion) + ")");
    auto feature = [](const std::string& name) {
      auto f = ParseFeature(name);
      if (!f) throw DataError(kModule, "unknown feature '" + name + "' in model file");
      return *f;
    };
    std::vector<Feature> fs;
    for (const auto& name : j.at("feature_set")) fs.push_back(feature(name.get<std::string>()));

    std::vector<TreeNode> nodes;
    for (const auto& jn : j.at("nodes")) {
      TreeNode n;
      n.leaf = jn.at("leaf").get<bool>();
      if (n.leaf) {
        auto l = ParseLabel(std::to_string(jn.at("class").get<int>()));
        if (!l) throw DataError(kModule, "leaf class must be 0 or 1");
        n.label = *l;
      } else {
        n.feature = feature(jn.at("feature").get<std::string>());
        n.threshold = jn.at("threshold").get<double>();
      }
      n.sample_count = jn.value("samples", std::size_t{0});
      if (jn.contains("class_counts")) {
        auto cc = jn.at("class_counts").get<std::vector<std::size_t>>();
        if (cc.size() != 2) throw DataError(kModule, "class_counts must have two entries");
        n.class_counts = {cc[0], cc[1]};
      }
      nodes.push_back(n);
    }
    std::size_t pos = 0;
    Link(nodes, pos);
    if (pos != nodes.size()) throw DataError(kModule, "trailing nodes after the tree");

    DecisionTreeModel model(std::move(nodes), std::move(fs));
    const auto& hj = j.at("hyperparams");
    auto& hp = model.hyperparams;
    hp.max_depth = hj.at("max_depth").get<int>();
    hp.splitter = ParseEnum(hj.at("splitter").get<std::string>(),
                            {Splitter::kBest, Splitter::kRandom}, SplitterName, "splitter");
    hp.criterion = ParseEnum(hj.at("criterion").get<std::string>(),
                             {Criterion::kGini, Criterion::kEntropy, Criterion::kLogLoss},
                             CriterionName, "criterion");
    hp.class_weight = ParseEnum(hj.at("class_weight").get<std::string>(),
                                {ClassWeight::kBalanced, ClassWeight::kNone}, ClassWeightName,
                                "class_weight");
    hp.min_samples_split = hj.at("min_samples_split").get<int>();
    hp.min_samples_leaf = hj.at("min_samples_leaf").get<int>();
    if (j.contains("cv_f1") && !j["cv_f1"].is_null()) model.cv_f1 = j["cv_f1"].get<double>();
    model.seed = j.value("seed", std::uint64_t{0});
    model.train_fingerprint = j.value("train_fingerprint", "");
    if (j.contains("warnings")) model.warnings = j["warnings"].get<std::vector<std::string>>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(kModule, std::string("corrupt model file: ") + e.what());
  }
}

void SaveModel(const DecisionTreeModel& model, const std::filesystem::path& path) {
  util::WriteFileAtomic(path, ModelToJson(model));
}

DecisionTreeModel LoadModel(const std::filesystem::path& path) {
  return ModelFromJson(util::ReadFile(path));
}

}  // namespace crowdval
