#ifndef CHERRYWINE_VINE_HPP
#define CHERRYWINE_VINE_HPP

// Regular vines, the t-cherry junction tree -> truncated R-vine reduction,
// variant enumeration and vine counting.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cherrywine/error.hpp"
#include "cherrywine/junction.hpp"
#include "cherrywine/vertex_set.hpp"
#include "json.hpp"

namespace cherrywine {

// Pair copula label a,b|D with a < b.
struct VineEdge {
  Vertex a = 0;
  Vertex b = 0;
  VertexSet given;

  VineEdge() = default;
  VineEdge(Vertex x, Vertex y, VertexSet d = {}) : a(std::min(x, y)), b(std::max(x, y)), given(std::move(d)) {}

  int level() const noexcept { return static_cast<int>(given.size()) + 1; }
  VertexSet conditioned() const { return VertexSet{a, b}; }
  // {a, b} + D
  VertexSet constraint() const { return set_union(given, conditioned()); }

  // "1,3|2"; "1,2" when D is empty
  std::string str() const {
    std::string s = std::to_string(a) + "," + std::to_string(b);
    if (!given.empty()) s += "|" + given.joined();
    return s;
  }

  friend bool operator==(const VineEdge&, const VineEdge&) = default;
  friend auto operator<=>(const VineEdge& x, const VineEdge& y) {
    if (auto c = x.given.size() <=> y.given.size(); c != 0) return c;
    if (auto c = x.a <=> y.a; c != 0) return c;
    if (auto c = x.b <=> y.b; c != 0) return c;
    return x.given <=> y.given;
  }
};

// Parses "a,b|D" or "a,b".
inline VineEdge parse_vine_edge(const std::string& key) {
  const auto bar = key.find('|');
  auto numbers = [&](const std::string& s) {
    std::vector<Vertex> out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stoi(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw integrity_error("vine", "bad edge key '" + key + "'");
      }
    }
    return out;
  };
  const auto pair = numbers(key.substr(0, bar));
  if (pair.size() != 2 || pair[0] == pair[1]) throw integrity_error("vine", "bad edge key '" + key + "'");
  VertexSet given;
  if (bar != std::string::npos) given = VertexSet(numbers(key.substr(bar + 1)));
  return VineEdge(pair[0], pair[1], given);
}

// Tree T_level. Nodes of T_1 are the vertices (node i is vertex i + 1);
// nodes of T_l, l >= 2, are the edges of T_{l-1} by index.
struct VineTree {
  int level = 1;
  std::vector<std::pair<std::size_t, std::size_t>> links;
  std::vector<VineEdge> edges;
};

class VineStructure {
 public:
  VineStructure() = default;

  // Builds the trees from node links alone; labels are derived.
  static VineStructure from_links(int d, const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& levels) {
    VineStructure v;
    v.d_ = d;
    std::vector<VertexSet> unions;  // complete unions of the previous level's edges
    for (std::size_t l = 0; l < levels.size(); ++l) {
      VineTree t;
      t.level = static_cast<int>(l) + 1;
      t.links = levels[l];
      std::vector<VertexSet> next;
      for (const auto& [p, q] : t.links) {
        if (l == 0) {
          if (p >= static_cast<std::size_t>(d) || q >= static_cast<std::size_t>(d) || p == q)
            throw usage_error("vine", "first-tree link out of range");
          t.edges.emplace_back(static_cast<Vertex>(p) + 1, static_cast<Vertex>(q) + 1);
          next.push_back(VertexSet{static_cast<Vertex>(p) + 1, static_cast<Vertex>(q) + 1});
          continue;
        }
        if (p >= unions.size() || q >= unions.size() || p == q)
          throw usage_error("vine", "link at level " + std::to_string(t.level) + " out of range");
        const VertexSet s = set_intersection(unions[p], unions[q]);
        const VertexSet x = set_difference(unions[p], s);
        const VertexSet y = set_difference(unions[q], s);
        if (x.size() != 1 || y.size() != 1)
          throw usage_error("vine", "nodes " + unions[p].str() + " and " + unions[q].str() +
                                        " do not differ in exactly one vertex each");
        t.edges.emplace_back(x.front(), y.front(), s);
        next.push_back(set_union(unions[p], unions[q]));
      }
      unions = std::move(next);
      v.trees_.push_back(std::move(t));
    }
    return v;
  }

  // Builds the trees from labels alone; the node links are recovered from the
  // complete unions {a} + D and {b} + D of each label.
  static VineStructure from_edges(int d, const std::vector<std::vector<VineEdge>>& levels) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> links(levels.size());
    std::map<VertexSet, std::size_t> prev;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      std::map<VertexSet, std::size_t> here;
      for (std::size_t i = 0; i < levels[l].size(); ++i) {
        const VineEdge& e = levels[l][i];
        if (e.given.size() != l)
          throw usage_error("vine", "edge " + e.str() + " sits at the wrong level");
        if (l == 0) {
          links[0].emplace_back(static_cast<std::size_t>(e.a - 1), static_cast<std::size_t>(e.b - 1));
        } else {
          auto p = prev.find(e.given.with(e.a));
          auto q = prev.find(e.given.with(e.b));
          if (p == prev.end() || q == prev.end())
            throw usage_error("vine", "edge " + e.str() + " has no parent edges in the tree below");
          links[l].emplace_back(p->second, q->second);
        }
        here.emplace(e.constraint(), i);
      }
      prev = std::move(here);
    }
    auto v = from_links(d, links);
    for (std::size_t l = 0; l < levels.size(); ++l)
      if (v.trees_[l].edges != levels[l]) throw usage_error("vine", "edge labels are inconsistent");
    return v;
  }

  int dimension() const noexcept { return d_; }
  int truncation() const noexcept { return static_cast<int>(trees_.size()); }
  const std::vector<VineTree>& trees() const noexcept { return trees_; }
  const VineTree& tree(int level) const { return trees_.at(static_cast<std::size_t>(level - 1)); }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& t : trees_) n += t.edges.size();
    return n;
  }

  // All labels in level order.
  std::vector<VineEdge> edges() const {
    std::vector<VineEdge> out;
    for (const auto& t : trees_) out.insert(out.end(), t.edges.begin(), t.edges.end());
    return out;
  }

  // Identity used for deduplication: the sorted list of labels.
  std::vector<VineEdge> key() const {
    auto e = edges();
    std::sort(e.begin(), e.end());
    return e;
  }

  friend bool operator==(const VineStructure& x, const VineStructure& y) {
    return x.d_ == y.d_ && x.key() == y.key();
  }

  // The level-l tree's nodes regarded as clusters: vertices for l = 1, the
  // complete unions of T_{l-1}'s edges otherwise.
  std::vector<VertexSet> node_sets(int level) const {
    std::vector<VertexSet> out;
    if (level == 1) {
      for (int v = 1; v <= d_; ++v) out.push_back(VertexSet{v});
      return out;
    }
    for (const auto& e : tree(level - 1).edges) out.push_back(e.constraint());
    return out;
  }

  // T_l viewed as a junction tree whose clusters are its edges' complete
  // unions: the (l+1)-th order t-cherry junction tree of the structure.
  JunctionTree as_junction_tree(int level) const {
    const auto& t = tree(level);
    std::vector<VertexSet> clusters;
    for (const auto& e : t.edges) clusters.push_back(e.constraint());
    // T_{l+1}'s links join T_l's edges, i.e. these clusters
    std::vector<std::pair<std::size_t, std::size_t>> links;
    if (level < truncation()) links = tree(level + 1).links;
    return JunctionTree(std::move(clusters), links);
  }

 private:
  int d_ = 0;
  std::vector<VineTree> trees_;
};

namespace detail {

inline bool spanning_tree(std::size_t nodes, const std::vector<std::pair<std::size_t, std::size_t>>& links) {
  if (links.size() + 1 != nodes) return false;
  std::vector<std::size_t> parent(nodes);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto& [p, q] : links) {
    if (p >= nodes || q >= nodes) return false;
    auto a = find(p), b = find(q);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

}  // namespace detail

inline ValidityReport validate_vine(const VineStructure& v) {
  ValidityReport r;
  const auto d = static_cast<std::size_t>(v.dimension());
  const auto& trees = v.trees();
  r.add("dimension", v.dimension() >= 2);
  r.add("has_trees", !trees.empty() && v.truncation() <= v.dimension() - 1);

  std::string span_detail;
  std::size_t nodes = d;
  for (const auto& t : trees) {
    if (!detail::spanning_tree(nodes, t.links) || t.links.size() != t.edges.size())
      span_detail = "T" + std::to_string(t.level) + " is not a spanning tree on its nodes";
    if (!span_detail.empty()) break;
    nodes = t.edges.size();
  }
  r.add("spanning_trees", span_detail.empty(), span_detail);

  std::string prox;
  for (std::size_t l = 1; l < trees.size() && prox.empty() && span_detail.empty(); ++l) {
    const auto& below = trees[l - 1].links;
    for (const auto& [p, q] : trees[l].links) {
      const auto& e = below[p];
      const auto& f = below[q];
      const bool share = e.first == f.first || e.first == f.second || e.second == f.first ||
                         e.second == f.second;
      if (!share) {
        prox = "T" + std::to_string(l + 1) + " joins " + trees[l - 1].edges[p].str() + " and " +
               trees[l - 1].edges[q].str() + " which share no node";
        break;
      }
    }
  }
  r.add("proximity", prox.empty(), prox);

  bool labels = span_detail.empty() && prox.empty();
  if (labels) {
    try {
      std::vector<std::vector<std::pair<std::size_t, std::size_t>>> links;
      for (const auto& t : trees) links.push_back(t.links);
      const auto derived = VineStructure::from_links(v.dimension(), links);
      for (std::size_t l = 0; l < trees.size(); ++l)
        labels = labels && derived.trees()[l].edges == trees[l].edges;
    } catch (const Error&) {
      labels = false;
    }
  }
  r.add("edge_labels", labels);

  bool levels = true;
  bool disjoint = true;
  for (const auto& t : trees) {
    for (const auto& e : t.edges) {
      levels = levels && e.level() == t.level;
      disjoint = disjoint && e.a != e.b && !e.given.contains(e.a) && !e.given.contains(e.b) &&
                 e.constraint().size() == static_cast<std::size_t>(t.level) + 1;
    }
  }
  r.add("conditioning_size", levels);
  r.add("conditioned_disjoint", disjoint);

  std::size_t expected = 0;
  for (int l = 1; l <= v.truncation(); ++l) expected += d - static_cast<std::size_t>(l);
  r.add("edge_count", v.edge_count() == expected,
        std::to_string(v.edge_count()) + " vs " + std::to_string(expected));
  return r;
}

// ---------------------------------------------------------------------------
// Reduction of a t-cherry junction tree by one order.

// Deleted vertex for every leaf cluster of one level, leaves in cluster
// order. A single-cluster tree uses the pair {a, b} instead: its cluster C
// splits into C - a and C - b.
using LevelChoice = std::vector<Vertex>;
// One LevelChoice per reduction m = k, k-1, ..., 3.
using ChoiceVector = std::vector<LevelChoice>;

struct LevelOptions {
  bool single_cluster = false;
  std::vector<std::size_t> leaves;           // cluster indices
  std::vector<Vertex> simplicial;            // the leaf's simplicial vertex
  std::vector<std::vector<Vertex>> options;  // legal deletions per leaf
};

// Leaf clusters and their legal Step-2 deletions.
inline LevelOptions level_options(const JunctionTree& jt) {
  LevelOptions o;
  const auto& cl = jt.clusters();
  if (cl.size() == 1) {
    o.single_cluster = true;
    o.leaves = {0};
    o.options = {cl[0].items()};
    return o;
  }
  std::map<Vertex, int> membership;
  for (const auto& c : cl)
    for (Vertex v : c) ++membership[v];
  for (std::size_t i = 0; i < cl.size(); ++i) {
    std::vector<Vertex> simplicial, other;
    for (Vertex v : cl[i]) (membership[v] == 1 ? simplicial : other).push_back(v);
    if (simplicial.empty()) continue;
    if (simplicial.size() > 1)
      throw usage_error("vine", "cluster " + cl[i].str() + " has more than one simplicial vertex");
    o.leaves.push_back(i);
    o.simplicial.push_back(simplicial.front());
    o.options.push_back(std::move(other));
  }
  return o;
}

// Default Step-2 choice: delete the leaf's non-simplicial vertex that sits in
// the most clusters, larger label on ties. A single cluster drops its two
// largest vertices.
inline LevelChoice default_level_choice(const JunctionTree& jt) {
  const auto o = level_options(jt);
  if (o.single_cluster) {
    const auto& c = jt.clusters()[0];
    return {c[c.size() - 2], c[c.size() - 1]};
  }
  LevelChoice out;
  for (const auto& opts : o.options) {
    Vertex best = opts.front();
    for (Vertex v : opts)
      if (jt.membership(v) >= jt.membership(best)) best = v;
    out.push_back(best);
  }
  return out;
}

struct Reduction {
  JunctionTree lower;
  // For every cluster of the upper tree, the lower-tree edge whose endpoint
  // union equals it.
  std::vector<std::size_t> edge_of_cluster;
};

// One step of the reduction: separators become clusters (Step 1), each leaf
// cluster loses one non-simplicial vertex (Step 2).
inline Reduction reduce_tcherry(const JunctionTree& upper, int order, const LevelChoice& choice) {
  const auto& cl = upper.clusters();
  Reduction red;
  const auto o = level_options(upper);

  if (o.single_cluster) {
    const VertexSet& c = cl[0];
    if (choice.size() != 2 || choice[0] == choice[1] || !c.contains(choice[0]) || !c.contains(choice[1]))
      throw usage_error("vine", "single cluster " + c.str() + " needs two distinct vertices to delete");
    const Vertex a = std::min(choice[0], choice[1]);
    const Vertex b = std::max(choice[0], choice[1]);
    red.lower = JunctionTree({c.without(a), c.without(b)}, {{0, 1}});
    red.edge_of_cluster = {0};
    return red;
  }
  if (choice.size() != o.leaves.size())
    throw usage_error("vine", "choice lists " + std::to_string(choice.size()) + " deletions for " +
                                  std::to_string(o.leaves.size()) + " leaf clusters");

  std::vector<VertexSet> clusters;
  std::map<VertexSet, std::size_t> sep_index;
  for (const auto& e : upper.edges())
    if (sep_index.emplace(e.separator, clusters.size()).second) clusters.push_back(e.separator);

  const auto adj = upper.adjacency();
  std::vector<std::pair<std::size_t, std::size_t>> links;
  red.edge_of_cluster.assign(cl.size(), 0);
  std::vector<bool> is_leaf(cl.size(), false);
  for (auto i : o.leaves) is_leaf[i] = true;

  for (std::size_t i = 0; i < cl.size(); ++i) {
    std::set<std::size_t> seps;
    for (auto j : adj[i]) seps.insert(sep_index.at(set_intersection(cl[i], cl[j])));
    if (is_leaf[i]) {
      if (seps.size() != 1)
        throw usage_error("vine", "leaf cluster " + cl[i].str() + " carries more than one separator");
      continue;
    }
    if (seps.size() != 2)
      throw usage_error("vine", "cluster " + cl[i].str() + " carries " + std::to_string(seps.size()) +
                                    " distinct separators; the separators do not form a t-cherry"
                                    " junction tree of order " + std::to_string(order - 1));
    red.edge_of_cluster[i] = links.size();
    links.emplace_back(*seps.begin(), *seps.rbegin());
  }

  for (std::size_t l = 0; l < o.leaves.size(); ++l) {
    const auto i = o.leaves[l];
    const Vertex s = choice[l];
    if (!cl[i].contains(s))
      throw usage_error("vine", "vertex " + std::to_string(s) + " is not in leaf cluster " + cl[i].str());
    if (s == o.simplicial[l])
      throw usage_error("vine", "vertex " + std::to_string(s) + " is simplicial in " + cl[i].str());
    const VertexSet sep = cl[i].without(o.simplicial[l]);
    red.edge_of_cluster[i] = links.size();
    links.emplace_back(sep_index.at(sep), clusters.size());
    clusters.push_back(cl[i].without(s));
  }

  // a shrunk leaf equal to a separator shows up as nested clusters here
  JunctionTree lower(std::move(clusters), links);
  const auto lower_t = [&] {
    try {
      return TCherryJunctionTree::from_junction_tree(lower, order - 1);
    } catch (const Error& e) {
      throw usage_error("vine", "reduced structure is not a t-cherry junction tree of order " +
                                    std::to_string(order - 1) + ": " + e.what());
    }
  }();
  const auto report = validate_tcherry(lower_t);
  if (!report.ok())
    throw usage_error("vine", "reduced structure is not a t-cherry junction tree of order " +
                                  std::to_string(order - 1) + ":\n" + report.str());
  red.lower = std::move(lower);
  return red;
}

// ---------------------------------------------------------------------------
// Cherry-wines.

struct CherryWine {
  VineStructure vine;
  TCherryJunctionTree source;
  ChoiceVector choices;
  // levels[i] is the t-cherry junction tree of order i + 2; levels.back() is
  // the source tree.
  std::vector<JunctionTree> levels;

  int order() const noexcept { return source.order(); }
};

namespace detail {

inline CherryWine assemble_cherry_wine(const TCherryJunctionTree& t, const ChoiceVector& choices,
                                       std::vector<JunctionTree> levels,
                                       const std::vector<std::vector<std::size_t>>& edge_of_cluster) {
  // levels: order 2..k; edge_of_cluster[i] maps clusters of levels[i + 1] to
  // edges of levels[i].
  int d = static_cast<int>(t.tree().vertices().size());
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> links;
  std::vector<std::pair<std::size_t, std::size_t>> first;
  for (const auto& c : levels[0].clusters())
    first.emplace_back(static_cast<std::size_t>(c.front() - 1), static_cast<std::size_t>(c.back() - 1));
  links.push_back(std::move(first));
  for (std::size_t i = 1; i < levels.size(); ++i) {
    std::vector<std::pair<std::size_t, std::size_t>> l;
    for (auto e : edge_of_cluster[i - 1]) {
      const auto& je = levels[i - 1].edges()[e];
      l.emplace_back(je.a, je.b);
    }
    links.push_back(std::move(l));
  }
  CherryWine cw;
  cw.vine = VineStructure::from_links(d, links);
  cw.source = t;
  cw.choices = choices;
  cw.levels = std::move(levels);
  return cw;
}

inline void check_source(const TCherryJunctionTree& t) {
  if (t.order() < 2) throw usage_error("vine", "t-cherry order must be at least 2");
  const auto report = validate_tcherry(t);
  if (!report.ok()) throw usage_error("vine", "input is not a valid t-cherry junction tree:\n" + report.str());
  const auto verts = t.tree().vertices();
  if (verts != VertexSet::range(static_cast<int>(verts.size())))
    throw usage_error("vine", "t-cherry tree must cover 1..d");
}

}  // namespace detail

// Reduction with an explicit choice vector (one entry per order k..3).
inline CherryWine cherry_to_vine(const TCherryJunctionTree& t, const ChoiceVector& choices) {
  detail::check_source(t);
  const int k = t.order();
  if (choices.size() != static_cast<std::size_t>(std::max(k - 2, 0)))
    throw usage_error("vine", "choice vector needs " + std::to_string(std::max(k - 2, 0)) +
                                  " levels, got " + std::to_string(choices.size()));
  std::vector<JunctionTree> down{t.tree()};  // order k, k-1, ...
  std::vector<std::vector<std::size_t>> maps;
  for (int m = k; m >= 3; --m) {
    auto red = reduce_tcherry(down.back(), m, choices[static_cast<std::size_t>(k - m)]);
    maps.push_back(std::move(red.edge_of_cluster));
    down.push_back(std::move(red.lower));
  }
  std::reverse(down.begin(), down.end());
  std::reverse(maps.begin(), maps.end());
  return detail::assemble_cherry_wine(t, choices, std::move(down), maps);
}

// Reduction under the default deterministic policy.
inline CherryWine cherry_to_vine(const TCherryJunctionTree& t) {
  detail::check_source(t);
  ChoiceVector choices;
  JunctionTree cur = t.tree();
  for (int m = t.order(); m >= 3; --m) {
    choices.push_back(default_level_choice(cur));
    cur = reduce_tcherry(cur, m, choices.back()).lower;
  }
  return cherry_to_vine(t, choices);
}

// Calls fn(choices) for every valid choice vector, in lexicographic order.
// Branches whose reduced tree breaks the separator precondition are dropped;
// if nothing survives, the first such error is rethrown.
template <class Fn>
void for_each_choice_vector(const TCherryJunctionTree& t, Fn&& fn) {
  detail::check_source(t);
  ChoiceVector path;
  std::size_t found = 0;
  std::optional<Error> first_error;
  std::function<void(const JunctionTree&, int)> level = [&](const JunctionTree& cur, int m) {
    if (m < 3) {
      ++found;
      fn(static_cast<const ChoiceVector&>(path));
      return;
    }
    const auto o = level_options(cur);
    std::vector<LevelChoice> picks;
    if (o.single_cluster) {
      const auto& c = cur.clusters()[0];
      for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) picks.push_back({c[i], c[j]});
    } else {
      LevelChoice pick(o.options.size());
      std::function<void(std::size_t)> product = [&](std::size_t i) {
        if (i == o.options.size()) {
          picks.push_back(pick);
          return;
        }
        for (Vertex v : o.options[i]) {
          pick[i] = v;
          product(i + 1);
        }
      };
      product(0);
    }
    for (const auto& p : picks) {
      Reduction red;
      try {
        red = reduce_tcherry(cur, m, p);
      } catch (const Error& e) {
        // this branch cannot be reduced further; others may
        if (!first_error) first_error = e;
        continue;
      }
      path.push_back(p);
      level(red.lower, m - 1);
      path.pop_back();
    }
  };
  level(t.tree(), t.order());
  if (found == 0 && first_error) throw *first_error;
}

// All distinct cherry-wines reachable through Step-2 choices, ordered by the
// first choice vector producing each.
inline std::vector<CherryWine> enumerate_cherry_wines(const TCherryJunctionTree& t) {
  std::vector<CherryWine> out;
  std::set<std::vector<VineEdge>> seen;
  for_each_choice_vector(t, [&](const ChoiceVector& c) {
    auto cw = cherry_to_vine(t, c);
    if (seen.insert(cw.vine.key()).second) out.push_back(std::move(cw));
  });
  return out;
}

// Edges of T_1..T_{k-1} in level order.
inline std::vector<VineEdge> pair_copula_list(const CherryWine& cw) { return cw.vine.edges(); }

// ---------------------------------------------------------------------------
// Counting.

// Number of labelled regular vines on d nodes: (d!/2) * 2^C(d-2, 2).
inline boost::multiprecision::cpp_int count_regular_vines(int d) {
  if (d < 2) throw usage_error("vine", "vine count needs d >= 2");
  if (d > 20) throw usage_error("vine", "vine count supported for d <= 20");
  if (d == 2) return 1;
  boost::multiprecision::cpp_int n = 1;
  for (int i = 3; i <= d; ++i) n *= i;  // d!/2
  const int m = d - 2;
  n <<= m * (m - 1) / 2;
  return n;
}

inline std::string count_regular_vines_string(int d) { return count_regular_vines(d).str(); }

// ---------------------------------------------------------------------------
// Serialization.

inline nlohmann::json to_json(const VineEdge& e) {
  return {{"pair", {e.a, e.b}}, {"given", e.given.items()}};
}

inline nlohmann::json to_json(const VineStructure& v) {
  nlohmann::json j;
  j["d"] = v.dimension();
  j["truncation"] = v.truncation();
  auto trees = nlohmann::json::array();
  for (const auto& t : v.trees()) {
    auto edges = nlohmann::json::array();
    for (const auto& e : t.edges) edges.push_back(to_json(e));
    trees.push_back({{"level", t.level}, {"edges", std::move(edges)}});
  }
  j["trees"] = std::move(trees);
  return j;
}

inline VineStructure vine_from_json(const nlohmann::json& j) {
  try {
    const int d = j.at("d").get<int>();
    std::vector<std::vector<VineEdge>> levels;
    for (const auto& t : j.at("trees")) {
      if (t.at("level").get<int>() != static_cast<int>(levels.size()) + 1)
        throw integrity_error("vine", "trees must be listed by increasing level");
      std::vector<VineEdge> edges;
      for (const auto& e : t.at("edges")) {
        const auto pair = e.at("pair").get<std::vector<Vertex>>();
        if (pair.size() != 2) throw integrity_error("vine", "pair must have two vertices");
        edges.emplace_back(pair[0], pair[1], VertexSet(e.at("given").get<std::vector<Vertex>>()));
      }
      levels.push_back(std::move(edges));
    }
    if (j.contains("truncation") && j.at("truncation").get<std::size_t>() != levels.size())
      throw integrity_error("vine", "truncation does not match the number of trees");
    auto v = VineStructure::from_edges(d, levels);
    const auto report = validate_vine(v);
    if (!report.ok()) throw integrity_error("vine", "invalid vine:\n" + report.str());
    return v;
  } catch (const nlohmann::json::exception& ex) {
    throw integrity_error("vine", std::string("malformed vine: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.kind() == ErrorKind::integrity) throw;
    throw integrity_error("vine", ex.what());
  }
}

inline nlohmann::json to_json(const CherryWine& cw) {
  nlohmann::json j;
  j["choices"] = cw.choices;
  j["vine"] = to_json(cw.vine);
  return j;
}

// Rebuilds from the source tree and stored choices, then requires the stored
// vine to agree.
inline CherryWine cherry_wine_from_json(const nlohmann::json& j, const TCherryJunctionTree& source) {
  try {
    const auto choices = j.at("choices").get<ChoiceVector>();
    auto cw = cherry_to_vine(source, choices);
    if (j.contains("vine") && !(vine_from_json(j.at("vine")) == cw.vine))
      throw integrity_error("vine", "stored vine disagrees with its t-cherry tree and choices");
    return cw;
  } catch (const nlohmann::json::exception& ex) {
    throw integrity_error("vine", std::string("malformed cherry-wine: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.kind() == ErrorKind::integrity) throw;
    throw integrity_error("vine", ex.what());
  }
}

// One graph for the given level, nodes in a single rank.
inline std::string to_dot(const VineStructure& v, int level) {
  const auto& t = v.tree(level);
  const auto nodes = v.node_sets(level);
  std::ostringstream out;
  out << "graph vine_T" << level << " {\n  label=\"T" << level << "\";\n";
  out << "  subgraph level" << level << " {\n    rank=same;\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string name = level == 1 ? nodes[i].joined() : v.tree(level - 1).edges[i].str();
    out << "    n" << i << " [label=\"" << name << "\"];\n";
  }
  out << "  }\n";
  for (std::size_t e = 0; e < t.edges.size(); ++e)
    out << "  n" << t.links[e].first << " -- n" << t.links[e].second << " [label=\"" << t.edges[e].str()
        << "\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace cherrywine

#endif  // CHERRYWINE_VINE_HPP
