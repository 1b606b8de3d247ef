// Copyright 2026 The coembed Authors.
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

// Partially labelled attributed networks: data model, text loaders,
// adjacency normalization, encoder input features, label masks, holdout
// splits and a stochastic block model generator for synthetic data.

#ifndef COEMBED_GRAPHDATA_HPP_
#define COEMBED_GRAPHDATA_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "coembed/errors.hpp"
#include "coembed/sparse.hpp"

namespace coembed {

using Rng = std::mt19937_64;

struct AttributedNetwork {
  std::size_t n_nodes = 0;
  std::size_t n_attrs = 0;
  std::size_t n_classes = 0;
  SparseMatrix adjacency;   // N x N, symmetric, zero diagonal, weighted
  SparseMatrix attributes;  // N x M, binary
  std::vector<std::optional<std::size_t>> labels;  // size N

  SparseMatrix binary_adjacency() const { return adjacency.binarized(); }

  // Throws InputError on any violated invariant.
  void validate() const {
    if (n_nodes == 0 || n_attrs == 0 || n_classes == 0) {
      throw InputError("network needs N, M, K >= 1 (got " + std::to_string(n_nodes) + ", " +
                       std::to_string(n_attrs) + ", " + std::to_string(n_classes) + ")");
    }
    if (adjacency.rows() != n_nodes || adjacency.cols() != n_nodes) {
      throw InputError("adjacency shape does not match node count");
    }
    if (attributes.rows() != n_nodes || attributes.cols() != n_attrs) {
      throw InputError("attribute matrix shape does not match N x M");
    }
    if (labels.size() != n_nodes) throw InputError("label vector length != node count");
    if (!adjacency.is_symmetric()) throw InputError("adjacency is not symmetric");
    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (adjacency.at(i, i) != 0.0) throw InputError("adjacency has a self-loop at node " + std::to_string(i));
      if (labels[i] && *labels[i] >= n_classes) {
        throw InputError("label of node " + std::to_string(i) + " outside [0, K)");
      }
    }
    for (double v : adjacency.values())
      if (!(v > 0.0) || !std::isfinite(v)) throw InputError("adjacency weights must be positive and finite");
    for (double v : attributes.values())
      if (v != 1.0) throw InputError("attribute values must be binary");
  }

  friend bool operator==(const AttributedNetwork&, const AttributedNetwork&) = default;
};

// Partition of the nodes into labelled (V^l) and unlabelled (V^u) sets.
class LabelMask {
 public:
  LabelMask() = default;
  LabelMask(std::size_t n_nodes, std::vector<std::size_t> labelled) : is_labelled_(n_nodes, false) {
    std::sort(labelled.begin(), labelled.end());
    for (std::size_t v : labelled) {
      if (v >= n_nodes) throw InputError("label mask: node id " + std::to_string(v) + " out of range");
      if (is_labelled_[v]) throw InputError("label mask: node " + std::to_string(v) + " listed twice");
      is_labelled_[v] = true;
    }
    labelled_ = std::move(labelled);
    for (std::size_t v = 0; v < n_nodes; ++v)
      if (!is_labelled_[v]) unlabelled_.push_back(v);
  }

  static LabelMask none(std::size_t n_nodes) { return LabelMask(n_nodes, {}); }

  std::size_t n_nodes() const { return is_labelled_.size(); }
  const std::vector<std::size_t>& labelled() const { return labelled_; }
  const std::vector<std::size_t>& unlabelled() const { return unlabelled_; }
  bool is_labelled(std::size_t v) const { return is_labelled_[v]; }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  std::vector<std::size_t> labelled_;
  std::vector<std::size_t> unlabelled_;
  std::vector<bool> is_labelled_;
};

enum class PairKind { kEdge, kAttribute };

// (node, node) with first < second for edges, (node, attribute) otherwise.
struct IndexPair {
  std::size_t first;
  std::size_t second;
  friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

struct HoldoutSplit {
  PairKind kind = PairKind::kEdge;
  std::vector<IndexPair> train;
  std::vector<IndexPair> val;
  std::vector<IndexPair> test;
  std::vector<IndexPair> val_negatives;
  std::vector<IndexPair> test_negatives;
};

struct SplitRatios {
  double train = 0.85;
  double val = 0.05;
  double test = 0.10;
};

struct SbmConfig {
  std::size_t n_nodes = 200;
  std::size_t n_communities = 4;
  double p_intra = 0.10;
  double p_inter = 0.01;
  std::size_t attrs_per_community = 8;
  double p_attr_on = 0.8;
  double p_attr_noise = 0.05;
  std::uint64_t seed = 0;

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string("sbm: ") + name + " must be in [0,1]");
    };
    prob(p_intra, "p_intra");
    prob(p_inter, "p_inter");
    prob(p_attr_on, "p_attr_on");
    prob(p_attr_noise, "p_attr_noise");
    if (n_communities == 0 || n_communities > n_nodes) {
      throw InputError("sbm: need 1 <= n_communities <= n_nodes");
    }
    if (attrs_per_community == 0) throw InputError("sbm: attrs_per_community must be >= 1");
  }
};

namespace detail {

struct ParsedLine {
  std::size_t line_no;
  std::vector<std::string_view> fields;
};

inline std::vector<std::string_view> split_fields(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == '\t' || s[i] == ' ' || s[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != '\t' && s[i] != ' ' && s[i] != '\r') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

[[noreturn]] inline void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
  throw InputError(source + ":" + std::to_string(line) + ": " + what);
}

inline std::size_t parse_id(std::string_view f, const std::string& source, std::size_t line) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || p != f.data() + f.size()) {
    parse_fail(source, line, "non-numeric id '" + std::string(f) + "'");
  }
  if (v < 0) parse_fail(source, line, "id out of range: " + std::string(f));
  return static_cast<std::size_t>(v);
}

inline double parse_real(std::string_view f, const std::string& source, std::size_t line) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || p != f.data() + f.size() || !std::isfinite(v)) {
    parse_fail(source, line, "non-numeric value '" + std::string(f) + "'");
  }
  return v;
}

// Reads every non-empty, non-comment record. The text is kept alive in
// `storage` because the returned fields are views into it.
inline std::vector<ParsedLine> read_records(std::istream& in, std::vector<std::string>& storage) {
  std::vector<ParsedLine> out;
  std::string line;
  std::size_t no = 0;
  std::vector<std::size_t> numbers;
  while (std::getline(in, line)) {
    ++no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    storage.push_back(line);
    numbers.push_back(no);
  }
  for (std::size_t i = 0; i < storage.size(); ++i) out.push_back({numbers[i], split_fields(storage[i])});
  return out;
}

}  // namespace detail

struct NetworkSources {
  std::istream* edges = nullptr;
  std::istream* attributes = nullptr;
  std::istream* labels = nullptr;  // optional
  std::string edges_name = "edges";
  std::string attributes_name = "attributes";
  std::string labels_name = "labels";
};

struct LoadOptions {
  std::size_t n_classes = 0;  // 0: infer as max label + 1
  std::size_t n_nodes = 0;    // 0: infer as max node id + 1
  std::size_t n_attrs = 0;    // 0: infer as max attribute id + 1
  std::ostream* warnings = &std::cerr;
};

// Parses the three record streams. Undirected edges are stored in both
// directions, duplicates summed, self-loops dropped with a warning.
inline AttributedNetwork load_network(const NetworkSources& src, const LoadOptions& opt = {}) {
  if (src.edges == nullptr || src.attributes == nullptr) {
    throw InputError("load_network: edges and attributes sources are required");
  }
  std::vector<std::string> store_e, store_a, store_l;
  const auto edge_recs = detail::read_records(*src.edges, store_e);
  const auto attr_recs = detail::read_records(*src.attributes, store_a);
  std::vector<detail::ParsedLine> label_recs;
  if (src.labels != nullptr) label_recs = detail::read_records(*src.labels, store_l);

  struct Edge { std::size_t u, v; double w; };
  std::vector<Edge> edges;
  std::size_t max_node = 0;
  bool any_node = false;
  auto see_node = [&](std::size_t v) { max_node = any_node ? std::max(max_node, v) : v; any_node = true; };
  for (const auto& r : edge_recs) {
    if (r.fields.size() < 2 || r.fields.size() > 3) {
      detail::parse_fail(src.edges_name, r.line_no, "expected 'src<TAB>dst[<TAB>weight]'");
    }
    const std::size_t u = detail::parse_id(r.fields[0], src.edges_name, r.line_no);
    const std::size_t v = detail::parse_id(r.fields[1], src.edges_name, r.line_no);
    const double w = r.fields.size() == 3 ? detail::parse_real(r.fields[2], src.edges_name, r.line_no) : 1.0;
    if (w < 0.0) detail::parse_fail(src.edges_name, r.line_no, "negative edge weight");
    see_node(u);
    see_node(v);
    if (u == v) {
      if (opt.warnings) *opt.warnings << "warning: " << src.edges_name << ":" << r.line_no << ": self-loop on node " << u << " dropped\n";
      continue;
    }
    if (w == 0.0) continue;
    edges.push_back({u, v, w});
  }
  if (edges.empty()) throw InputError("network has no edges");

  struct Entry { std::size_t node, attr; };
  std::vector<Entry> entries;
  std::size_t max_attr = 0;
  bool any_attr = false;
  for (const auto& r : attr_recs) {
    if (r.fields.size() < 2 || r.fields.size() > 3) {
      detail::parse_fail(src.attributes_name, r.line_no, "expected 'node<TAB>attr<TAB>value'");
    }
    const std::size_t n = detail::parse_id(r.fields[0], src.attributes_name, r.line_no);
    const std::size_t a = detail::parse_id(r.fields[1], src.attributes_name, r.line_no);
    const double val = r.fields.size() == 3 ? detail::parse_real(r.fields[2], src.attributes_name, r.line_no) : 1.0;
    if (val != 0.0 && val != 1.0) detail::parse_fail(src.attributes_name, r.line_no, "attribute value must be 0 or 1");
    see_node(n);
    max_attr = any_attr ? std::max(max_attr, a) : a;
    any_attr = true;
    if (val == 1.0) entries.push_back({n, a});
  }

  std::vector<std::pair<std::size_t, std::size_t>> labelled;
  std::size_t max_label = 0;
  for (const auto& r : label_recs) {
    if (r.fields.size() != 2) detail::parse_fail(src.labels_name, r.line_no, "expected 'node<TAB>class'");
    const std::size_t n = detail::parse_id(r.fields[0], src.labels_name, r.line_no);
    const std::size_t c = detail::parse_id(r.fields[1], src.labels_name, r.line_no);
    if (opt.n_classes > 0 && c >= opt.n_classes) {
      detail::parse_fail(src.labels_name, r.line_no, "label " + std::to_string(c) + " >= K=" + std::to_string(opt.n_classes));
    }
    see_node(n);
    max_label = std::max(max_label, c);
    labelled.emplace_back(n, c);
  }

  AttributedNetwork net;
  net.n_nodes = opt.n_nodes > 0 ? opt.n_nodes : max_node + 1;
  if (any_node && max_node >= net.n_nodes) {
    throw InputError("node id " + std::to_string(max_node) + " >= declared node count " + std::to_string(net.n_nodes));
  }
  if (opt.n_attrs > 0) {
    if (any_attr && max_attr >= opt.n_attrs) {
      throw InputError("attribute id " + std::to_string(max_attr) + " >= declared attribute count " + std::to_string(opt.n_attrs));
    }
    net.n_attrs = opt.n_attrs;
  } else {
    if (!any_attr) throw InputError("network has no attributes");
    net.n_attrs = max_attr + 1;
  }
  net.n_classes = opt.n_classes > 0 ? opt.n_classes : (labelled.empty() ? 1 : max_label + 1);

  std::vector<Triplet> at;
  at.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    at.push_back({e.u, e.v, e.w});
    at.push_back({e.v, e.u, e.w});
  }
  net.adjacency = SparseMatrix::from_triplets(net.n_nodes, net.n_nodes, std::move(at));

  std::vector<Triplet> xt;
  for (const auto& e : entries) xt.push_back({e.node, e.attr, 1.0});
  net.attributes = SparseMatrix::from_triplets(net.n_nodes, net.n_attrs, std::move(xt)).binarized();

  net.labels.assign(net.n_nodes, std::nullopt);
  for (const auto& [n, c] : labelled) {
    if (net.labels[n] && *net.labels[n] != c) {
      throw InputError(src.labels_name + ": conflicting labels for node " + std::to_string(n));
    }
    net.labels[n] = c;
  }
  net.validate();
  return net;
}

struct NetworkPaths {
  std::filesystem::path edges;
  std::filesystem::path attributes;
  std::filesystem::path labels;  // empty: no labels
};

inline AttributedNetwork load_network(const NetworkPaths& paths, const LoadOptions& opt = {}) {
  auto open = [](const std::filesystem::path& p) {
    std::ifstream f(p);
    if (!f) throw InputError("cannot open " + p.string());
    return f;
  };
  std::ifstream e = open(paths.edges);
  std::ifstream a = open(paths.attributes);
  std::ifstream l;
  NetworkSources src{&e, &a, nullptr, paths.edges.string(), paths.attributes.string(), paths.labels.string()};
  if (!paths.labels.empty()) {
    l = open(paths.labels);
    src.labels = &l;
  }
  return load_network(src, opt);
}

inline std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Canonical text form: each undirected edge once (src < dst) in row-major
// order, attribute entries in row-major order, labels by node id.
inline void save_network(const AttributedNetwork& net, std::ostream& edges, std::ostream& attrs,
                         std::ostream& labels) {
  edges << "# src\tdst\tweight\n";
  for (const auto& t : net.adjacency.triplets())
    if (t.row < t.col) edges << t.row << '\t' << t.col << '\t' << format_real(t.value) << '\n';
  attrs << "# node\tattr\tvalue\n";
  for (const auto& t : net.attributes.triplets()) attrs << t.row << '\t' << t.col << '\t' << format_real(t.value) << '\n';
  labels << "# node\tclass\n";
  for (std::size_t i = 0; i < net.n_nodes; ++i)
    if (net.labels[i]) labels << i << '\t' << *net.labels[i] << '\n';
}

inline void save_network(const AttributedNetwork& net, const NetworkPaths& paths) {
  std::ofstream e(paths.edges), a(paths.attributes), l(paths.labels);
  if (!e || !a || !l) throw InputError("cannot write network files next to " + paths.edges.string());
  save_network(net, e, a, l);
}

// D^{-1/2} A' D^{-1/2} with A' = A (+ I). Zero-degree rows stay zero.
inline SparseMatrix normalize_adjacency(const AttributedNetwork& net, bool add_self_loops = true) {
  auto t = net.adjacency.triplets();
  if (add_self_loops)
    for (std::size_t i = 0; i < net.n_nodes; ++i) t.push_back({i, i, 1.0});
  SparseMatrix a = SparseMatrix::from_triplets(net.n_nodes, net.n_nodes, t);
  const auto deg = a.row_sums();
  std::vector<double> inv_sqrt(deg.size(), 0.0);
  for (std::size_t i = 0; i < deg.size(); ++i) inv_sqrt[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
  auto nt = a.triplets();
  for (auto& e : nt) e.value *= inv_sqrt[e.row] * inv_sqrt[e.col];
  return SparseMatrix::from_triplets(net.n_nodes, net.n_nodes, std::move(nt));
}

// [A | X], N x (N + M).
inline SparseMatrix build_node_features(const AttributedNetwork& net) {
  return hstack(net.adjacency, net.attributes);
}

// X^T, M x N.
inline SparseMatrix build_attr_features(const AttributedNetwork& net) { return net.attributes.transposed(); }

// ceil(ratio * N) labelled nodes drawn uniformly from nodes that carry a
// label. Draws are repeated (up to 100 times) until every class present in
// the network has at least one labelled node.
inline LabelMask sample_label_mask(const AttributedNetwork& net, double ratio, std::uint64_t seed) {
  if (ratio == 0.0) return LabelMask::none(net.n_nodes);
  if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("label ratio must be in (0, 1)");
  std::vector<std::size_t> candidates;
  std::vector<bool> present(net.n_classes, false);
  for (std::size_t i = 0; i < net.n_nodes; ++i) {
    if (net.labels[i]) {
      candidates.push_back(i);
      present[*net.labels[i]] = true;
    }
  }
  const auto count = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(net.n_nodes) - 1e-9));
  if (count > candidates.size()) {
    throw InputError("label mask needs " + std::to_string(count) + " labelled nodes but only " +
                     std::to_string(candidates.size()) + " carry labels");
  }
  Rng rng(seed);
  std::size_t missing = 0;
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<std::size_t> pool = candidates;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(count);
    std::vector<bool> covered(net.n_classes, false);
    for (std::size_t v : pool) covered[*net.labels[v]] = true;
    bool ok = true;
    for (std::size_t c = 0; c < net.n_classes; ++c) {
      if (present[c] && !covered[c]) {
        ok = false;
        missing = c;
        break;
      }
    }
    if (ok) return LabelMask(net.n_nodes, std::move(pool));
  }
  throw InputError("cannot cover class " + std::to_string(missing) + " with " + std::to_string(count) +
                   " labelled nodes");
}

inline std::vector<IndexPair> positive_pairs(const AttributedNetwork& net, PairKind kind) {
  std::vector<IndexPair> out;
  const SparseMatrix& m = kind == PairKind::kEdge ? net.adjacency : net.attributes;
  for (const auto& t : m.triplets())
    if (kind == PairKind::kAttribute || t.row < t.col) out.push_back({t.row, t.col});
  return out;
}

// Shuffles the positive pairs into train/val/test and draws an equal number
// of distinct non-present pairs as val/test negatives.
inline HoldoutSplit split_pairs(const AttributedNetwork& net, PairKind kind, const SplitRatios& ratios,
                                std::uint64_t seed) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw InputError("split ratios must be non-negative and sum to 1");
  }
  HoldoutSplit split;
  split.kind = kind;
  auto pos = positive_pairs(net, kind);
  Rng rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  const auto p = static_cast<double>(pos.size());
  const auto n_val = static_cast<std::size_t>(std::llround(ratios.val * p));
  const auto n_test = static_cast<std::size_t>(std::llround(ratios.test * p));
  if (n_val + n_test > pos.size()) throw InputError("split ratios leave no room for training pairs");
  const std::size_t n_train = pos.size() - n_val - n_test;
  split.train.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(pos.begin() + static_cast<std::ptrdiff_t>(n_train),
                   pos.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(pos.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), pos.end());

  const std::size_t rows = net.n_nodes;
  const std::size_t cols = kind == PairKind::kEdge ? net.n_nodes : net.n_attrs;
  const std::size_t universe = kind == PairKind::kEdge ? rows * (rows - 1) / 2 : rows * cols;
  const std::size_t needed = n_val + n_test;
  const std::size_t available = universe - pos.size();
  if (needed > available) {
    throw InputError("not enough non-present pairs for negatives: need " + std::to_string(needed) +
                     ", have " + std::to_string(available));
  }
  const std::set<IndexPair> positives(pos.begin(), pos.end());
  std::vector<IndexPair> negs;
  if (needed * 2 <= available) {
    std::set<IndexPair> taken;
    std::uniform_int_distribution<std::size_t> pick_row(0, rows - 1), pick_col(0, cols - 1);
    while (negs.size() < needed) {
      IndexPair q{pick_row(rng), pick_col(rng)};
      if (kind == PairKind::kEdge) {
        if (q.first == q.second) continue;
        if (q.first > q.second) std::swap(q.first, q.second);
      }
      if (positives.count(q) || !taken.insert(q).second) continue;
      negs.push_back(q);
    }
  } else {
    std::vector<IndexPair> all;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = kind == PairKind::kEdge ? i + 1 : 0; j < cols; ++j)
        if (!positives.count({i, j})) all.push_back({i, j});
    std::shuffle(all.begin(), all.end(), rng);
    negs.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(needed));
  }
  split.val_negatives.assign(negs.begin(), negs.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.test_negatives.assign(negs.begin() + static_cast<std::ptrdiff_t>(n_val), negs.end());
  return split;
}

// Copy of `net` with the validation and test positives of `split` removed,
// for training a model that must not see held-out pairs.
inline AttributedNetwork remove_heldout(const AttributedNetwork& net, const HoldoutSplit& split) {
  std::set<IndexPair> drop(split.val.begin(), split.val.end());
  drop.insert(split.test.begin(), split.test.end());
  AttributedNetwork out = net;
  if (split.kind == PairKind::kEdge) {
    std::vector<Triplet> kept;
    for (const auto& t : net.adjacency.triplets()) {
      const IndexPair key{std::min(t.row, t.col), std::max(t.row, t.col)};
      if (!drop.count(key)) kept.push_back(t);
    }
    out.adjacency = SparseMatrix::from_triplets(net.n_nodes, net.n_nodes, std::move(kept));
  } else {
    std::vector<Triplet> kept;
    for (const auto& t : net.attributes.triplets())
      if (!drop.count({t.row, t.col})) kept.push_back(t);
    out.attributes = SparseMatrix::from_triplets(net.n_nodes, net.n_attrs, std::move(kept));
  }
  return out;
}

// Community of node i is floor(i * C / N) and doubles as its label.
inline std::size_t sbm_community(const SbmConfig& cfg, std::size_t node) {
  return node * cfg.n_communities / cfg.n_nodes;
}

inline AttributedNetwork generate_sbm(const SbmConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  AttributedNetwork net;
  net.n_nodes = cfg.n_nodes;
  net.n_classes = cfg.n_communities;
  net.n_attrs = cfg.n_communities * cfg.attrs_per_community;

  std::vector<Triplet> at;
  for (std::size_t i = 0; i < cfg.n_nodes; ++i) {
    for (std::size_t j = i + 1; j < cfg.n_nodes; ++j) {
      const bool same = sbm_community(cfg, i) == sbm_community(cfg, j);
      if (unif(rng) < (same ? cfg.p_intra : cfg.p_inter)) {
        at.push_back({i, j, 1.0});
        at.push_back({j, i, 1.0});
      }
    }
  }
  net.adjacency = SparseMatrix::from_triplets(net.n_nodes, net.n_nodes, std::move(at));

  std::vector<Triplet> xt;
  for (std::size_t i = 0; i < cfg.n_nodes; ++i) {
    const std::size_t ci = sbm_community(cfg, i);
    for (std::size_t a = 0; a < net.n_attrs; ++a) {
      const bool own = a / cfg.attrs_per_community == ci;
      if (unif(rng) < (own ? cfg.p_attr_on : cfg.p_attr_noise)) xt.push_back({i, a, 1.0});
    }
  }
  net.attributes = SparseMatrix::from_triplets(net.n_nodes, net.n_attrs, std::move(xt));

  net.labels.resize(net.n_nodes);
  for (std::size_t i = 0; i < net.n_nodes; ++i) net.labels[i] = sbm_community(cfg, i);
  return net;
}

}  // namespace coembed

#endif  // COEMBED_GRAPHDATA_HPP_
