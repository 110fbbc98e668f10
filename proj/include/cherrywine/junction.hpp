#ifndef CHERRYWINE_JUNCTION_HPP
#define CHERRYWINE_JUNCTION_HPP

// Junction trees, k-th order t-cherry junction trees, their densities,
// weights and the closed-form KL divergence of the approximation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cherrywine/error.hpp"
#include "cherrywine/infotheory.hpp"
#include "cherrywine/vertex_set.hpp"

namespace cherrywine {

struct JunctionEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  VertexSet separator;

  friend bool operator==(const JunctionEdge&, const JunctionEdge&) = default;
};

class JunctionTree {
 public:
  JunctionTree() = default;

  // Separators are derived as the intersection of the endpoint clusters.
  JunctionTree(std::vector<VertexSet> clusters,
               const std::vector<std::pair<std::size_t, std::size_t>>& links)
      : clusters_(std::move(clusters)) {
    for (auto [a, b] : links) {
      if (a >= clusters_.size() || b >= clusters_.size())
        throw usage_error("junction", "edge endpoint out of range");
      edges_.push_back({a, b, set_intersection(clusters_[a], clusters_[b])});
    }
  }

  // Tree chosen as a maximum-weight spanning tree on intersection sizes,
  // ties broken by cluster index order.
  static JunctionTree from_clusters(std::vector<VertexSet> clusters) {
    const std::size_t n = clusters.size();
    struct Cand {
      std::size_t weight, a, b;
    };
    std::vector<Cand> cands;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        cands.push_back({set_intersection(clusters[a], clusters[b]).size(), a, b});
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& x, const Cand& y) { return x.weight > y.weight; });
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> root = [&](std::size_t x) {
      return parent[x] == x ? x : parent[x] = root(parent[x]);
    };
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (const auto& c : cands) {
      auto ra = root(c.a), rb = root(c.b);
      if (ra == rb) continue;
      parent[ra] = rb;
      links.emplace_back(c.a, c.b);
    }
    return JunctionTree(std::move(clusters), links);
  }

  const std::vector<VertexSet>& clusters() const noexcept { return clusters_; }
  const std::vector<JunctionEdge>& edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return clusters_.size(); }

  VertexSet vertices() const {
    VertexSet all;
    for (const auto& c : clusters_) all = set_union(all, c);
    return all;
  }

  // nu_S per distinct separator set: the number of edges carrying S, plus one.
  std::map<VertexSet, int> separator_multiplicities() const {
    std::map<VertexSet, int> nu;
    for (const auto& e : edges_) {
      auto [it, inserted] = nu.emplace(e.separator, 2);
      if (!inserted) ++it->second;
    }
    return nu;
  }

  std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(clusters_.size());
    for (const auto& e : edges_) {
      if (e.a < adj.size() && e.b < adj.size()) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
      }
    }
    return adj;
  }

  // Number of clusters containing v.
  int membership(Vertex v) const {
    int count = 0;
    for (const auto& c : clusters_) count += c.contains(v) ? 1 : 0;
    return count;
  }

  friend bool operator==(const JunctionTree&, const JunctionTree&) = default;

 private:
  std::vector<VertexSet> clusters_;
  std::vector<JunctionEdge> edges_;
};

// Per-invariant pass/fail record produced by the validators.
struct ValidityReport {
  struct Check {
    std::string name;
    bool passed = true;
    std::string detail;
  };
  std::vector<Check> checks;

  void add(std::string name, bool passed, std::string detail = {}) {
    checks.push_back({std::move(name), passed, std::move(detail)});
  }

  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  bool passed(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c.passed;
    return false;
  }

  std::string str() const {
    std::ostringstream out;
    for (const auto& c : checks) {
      out << (c.passed ? "ok   " : "FAIL ") << c.name;
      if (!c.detail.empty()) out << ": " << c.detail;
      out << '\n';
    }
    return out.str();
  }
};

namespace detail {

// Existence of a cluster ordering with the running intersection property.
// Exact search over orderings for up to 20 clusters; beyond that the
// spanning-tree criterion: a hypergraph is acyclic iff a maximum spanning
// tree on intersection sizes weighs sum |C| - |union C|.
inline bool has_running_intersection(const std::vector<VertexSet>& clusters) {
  const std::size_t n = clusters.size();
  if (n <= 1) return true;
  if (n <= 20) {
    std::unordered_set<std::uint32_t> dead;
    std::function<bool(std::uint32_t, const VertexSet&)> search =
        [&](std::uint32_t mask, const VertexSet& covered) -> bool {
      if (mask == (1u << n) - 1) return true;
      if (dead.count(mask)) return false;
      for (std::size_t j = 0; j < n; ++j) {
        if (mask & (1u << j)) continue;
        const VertexSet s = set_intersection(clusters[j], covered);
        bool inside = false;
        for (std::size_t i = 0; i < n && !inside; ++i)
          inside = (mask & (1u << i)) && s.is_subset_of(clusters[i]);
        if (inside && search(mask | (1u << j), set_union(covered, clusters[j]))) return true;
      }
      dead.insert(mask);
      return false;
    };
    for (std::size_t start = 0; start < n; ++start)
      if (search(1u << start, clusters[start])) return true;
    return false;
  }
  const JunctionTree mst = JunctionTree::from_clusters(clusters);
  std::size_t weight = 0, total = 0;
  for (const auto& e : mst.edges()) weight += e.separator.size();
  for (const auto& c : clusters) total += c.size();
  return weight == total - mst.vertices().size();
}

}  // namespace detail

inline ValidityReport validate_junction_tree(const JunctionTree& jt) {
  ValidityReport r;
  const auto& cl = jt.clusters();
  const std::size_t n = cl.size();

  bool nonempty = n > 0 && std::none_of(cl.begin(), cl.end(),
                                        [](const VertexSet& c) { return c.empty(); });
  r.add("clusters_nonempty", nonempty);

  // tree shape
  bool in_range = true;
  for (const auto& e : jt.edges()) in_range = in_range && e.a < n && e.b < n && e.a != e.b;
  bool is_tree = in_range && jt.edges().size() + 1 == n;
  if (is_tree) {
    std::vector<bool> seen(n, false);
    const auto adj = jt.adjacency();
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    std::size_t reached = 1;
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (auto v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          ++reached;
          q.push(v);
        }
      }
    }
    is_tree = reached == n;
  }
  r.add("tree", is_tree,
        is_tree ? "" : std::to_string(jt.edges().size()) + " edges on " + std::to_string(n) + " clusters");

  bool seps_ok = in_range;
  for (const auto& e : jt.edges())
    seps_ok = seps_ok && e.separator == set_intersection(cl[e.a], cl[e.b]);
  r.add("separators_are_intersections", seps_ok);

  std::string empty_detail;
  for (const auto& e : jt.edges()) {
    if (e.separator.empty()) {
      empty_detail = "edge " + std::to_string(e.a) + "-" + std::to_string(e.b);
      break;
    }
  }
  r.add("separators_nonempty", empty_detail.empty(), empty_detail);

  std::string nested;
  for (std::size_t a = 0; a < n && nested.empty(); ++a)
    for (std::size_t b = 0; b < n && nested.empty(); ++b)
      if (a != b && cl[a].is_subset_of(cl[b])) nested = cl[a].str() + " inside " + cl[b].str();
  r.add("no_nested_clusters", nested.empty(), nested);

  r.add("running_intersection", detail::has_running_intersection(cl));

  // The given edges themselves: clusters containing any vertex form a subtree.
  bool junction = is_tree;
  std::string jdetail;
  if (is_tree) {
    const auto adj = jt.adjacency();
    for (Vertex v : jt.vertices()) {
      std::vector<std::size_t> holders;
      for (std::size_t i = 0; i < n; ++i)
        if (cl[i].contains(v)) holders.push_back(i);
      std::vector<bool> seen(n, false);
      std::queue<std::size_t> q;
      q.push(holders.front());
      seen[holders.front()] = true;
      std::size_t reached = 1;
      while (!q.empty()) {
        auto u = q.front();
        q.pop();
        for (auto w : adj[u]) {
          if (!seen[w] && cl[w].contains(v)) {
            seen[w] = true;
            ++reached;
            q.push(w);
          }
        }
      }
      if (reached != holders.size()) {
        junction = false;
        jdetail = "clusters holding " + std::to_string(v) + " are not connected";
        break;
      }
    }
  }
  r.add("junction_property", junction, jdetail);
  return r;
}

// ---------------------------------------------------------------------------
// Explicit joint distribution over a few finite-range variables.

class DiscreteJoint {
 public:
  // probabilities in row-major order: variable 1 varies slowest.
  DiscreteJoint(std::vector<int> ranges, std::vector<double> probabilities)
      : ranges_(std::move(ranges)), p_(std::move(probabilities)) {
    std::size_t size = 1;
    for (int r : ranges_) {
      if (r < 1) throw usage_error("junction", "variable range must be positive");
      size *= static_cast<std::size_t>(r);
    }
    if (size != p_.size()) throw usage_error("junction", "probability table has wrong size");
    double total = 0.0;
    for (double p : p_) {
      if (!(p >= 0.0)) throw usage_error("junction", "negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw usage_error("junction", "probabilities do not sum to 1");
  }

  int dimension() const noexcept { return static_cast<int>(ranges_.size()); }
  const std::vector<int>& ranges() const noexcept { return ranges_; }
  std::size_t size() const noexcept { return p_.size(); }
  const std::vector<double>& probabilities() const noexcept { return p_; }

  std::vector<int> config(std::size_t index) const {
    std::vector<int> x(ranges_.size());
    for (std::size_t i = ranges_.size(); i-- > 0;) {
      x[i] = static_cast<int>(index % static_cast<std::size_t>(ranges_[i]));
      index /= static_cast<std::size_t>(ranges_[i]);
    }
    return x;
  }

  double operator()(std::span<const int> x) const {
    std::size_t index = 0;
    for (std::size_t i = 0; i < ranges_.size(); ++i)
      index = index * static_cast<std::size_t>(ranges_[i]) + static_cast<std::size_t>(x[i]);
    return p_[index];
  }

  // Marginal over k as a map from value tuple (ordered as k) to probability.
  std::map<std::vector<int>, double> marginal(const VertexSet& k) const {
    std::map<std::vector<int>, double> out;
    std::vector<int> key(k.size());
    for (std::size_t idx = 0; idx < p_.size(); ++idx) {
      const auto x = config(idx);
      for (std::size_t j = 0; j < k.size(); ++j) key[j] = x[static_cast<std::size_t>(k[j] - 1)];
      out[key] += p_[idx];
    }
    return out;
  }

  double entropy(const VertexSet& k) const {
    double h = 0.0;
    for (const auto& [key, p] : marginal(k))
      if (p > 0.0) h -= p * std::log2(p);
    return h;
  }

 private:
  std::vector<int> ranges_;
  std::vector<double> p_;
};

// Information source backed by an explicit joint.
class JointInformation {
 public:
  explicit JointInformation(const DiscreteJoint& joint) : joint_(&joint) {}

  double information(const VertexSet& k) {
    if (k.size() <= 1) return 0.0;
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    double sum = 0.0;
    for (Vertex v : k) sum += joint_->entropy(VertexSet{v});
    const double value = sum - joint_->entropy(k);
    cache_.emplace(k, value);
    return value;
  }

 private:
  const DiscreteJoint* joint_;
  std::map<VertexSet, double> cache_;
};

// ---------------------------------------------------------------------------
// Junction-tree density: prod_C P_C / prod_S P_S^(nu_S - 1).

using ProbabilityTable = std::map<std::vector<int>, double>;
using MarginalTables = std::map<VertexSet, ProbabilityTable>;

inline MarginalTables marginal_tables(const JunctionTree& jt, const DiscreteJoint& joint) {
  MarginalTables t;
  for (const auto& c : jt.clusters()) t.emplace(c, joint.marginal(c));
  for (const auto& e : jt.edges())
    if (!t.count(e.separator)) t.emplace(e.separator, joint.marginal(e.separator));
  return t;
}

// Tables keyed by 1-based bin tuples, masses count/N.
inline MarginalTables marginal_tables(const JunctionTree& jt, const DiscretizedSample& ds) {
  MarginalTables t;
  auto add = [&](const VertexSet& k) {
    if (t.count(k) || k.empty()) return;
    const auto mt = marginal_table(ds, k);
    ProbabilityTable p;
    for (const auto& [tuple, c] : mt.cells)
      p.emplace(tuple, static_cast<double>(c) / static_cast<double>(mt.total));
    t.emplace(k, std::move(p));
  };
  for (const auto& c : jt.clusters()) add(c);
  for (const auto& e : jt.edges()) add(e.separator);
  return t;
}

class JunctionDensity {
 public:
  JunctionDensity(const JunctionTree& jt, MarginalTables tables)
      : clusters_(jt.clusters()), tables_(std::move(tables)) {
    for (const auto& [s, nu] : jt.separator_multiplicities())
      if (!s.empty()) separators_.emplace_back(s, nu);
    auto check = [&](const VertexSet& k) {
      auto it = tables_.find(k);
      if (it == tables_.end()) throw usage_error("junction", "missing marginal for " + k.str());
      for (const auto& [key, p] : it->second)
        if (key.size() != k.size()) throw usage_error("junction", "marginal arity mismatch for " + k.str());
    };
    for (const auto& c : clusters_) check(c);
    for (const auto& [s, nu] : separators_) check(s);
  }

  // x holds one value per variable, x[v - 1] for vertex v.
  double operator()(std::span<const int> x) const {
    double numerator = 1.0;
    for (const auto& c : clusters_) numerator *= lookup(c, x);
    if (numerator == 0.0) return 0.0;
    double denominator = 1.0;
    for (const auto& [s, nu] : separators_) {
      const double p = lookup(s, x);
      if (p == 0.0)
        throw integrity_error("junction", "zero separator marginal " + s.str() +
                                              " under a nonzero cluster marginal");
      denominator *= std::pow(p, nu - 1);
    }
    return numerator / denominator;
  }

 private:
  double lookup(const VertexSet& k, std::span<const int> x) const {
    std::vector<int> key(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) key[j] = x[static_cast<std::size_t>(k[j] - 1)];
    const auto& table = tables_.at(k);
    auto it = table.find(key);
    return it == table.end() ? 0.0 : it->second;
  }

  std::vector<VertexSet> clusters_;
  std::vector<std::pair<VertexSet, int>> separators_;
  MarginalTables tables_;
};

// sum_C I(X_C) - sum_S (nu_S - 1) I(X_S); larger means a closer fit.
template <InformationSource Info>
double tree_weight(const JunctionTree& jt, Info& info) {
  double w = 0.0;
  for (const auto& c : jt.clusters()) w += info.information(c);
  for (const auto& [s, nu] : jt.separator_multiplicities()) {
    if (!s.empty()) w -= (nu - 1) * info.information(s);
  }
  return w;
}

// KL(P || P_J) = I(X_V) - weight.
template <InformationSource Info>
double kl_divergence(const JunctionTree& jt, Info& info, const VertexSet& all) {
  if (jt.vertices() != all)
    throw usage_error("junction", "junction tree does not cover every variable");
  return info.information(all) - tree_weight(jt, info);
}

inline double kl_formula(const JunctionTree& jt, const DiscreteJoint& joint) {
  JointInformation info(joint);
  return kl_divergence(jt, info, VertexSet::range(joint.dimension()));
}

// ---------------------------------------------------------------------------
// k-th order t-cherry junction trees.

// A hypercherry {{vertex}, separator}: `vertex` joined to every vertex of the
// (k-1)-clique `separator`.
struct Hypercherry {
  Vertex vertex = 0;
  VertexSet separator;

  VertexSet cluster() const { return separator.with(vertex); }
  std::string str() const { return std::to_string(vertex) + "|" + separator.joined(); }

  friend bool operator==(const Hypercherry&, const Hypercherry&) = default;
  friend auto operator<=>(const Hypercherry& a, const Hypercherry& b) {
    if (auto c = a.separator <=> b.separator; c != 0) return c;
    return a.vertex <=> b.vertex;
  }
};

class TCherryJunctionTree {
 public:
  TCherryJunctionTree() = default;

  // Replays a construction sequence. The first hypercherry seeds the tree
  // (its separator is the initial (k-1)-clique); every later one adds a new
  // vertex onto a (k-1)-subset of an existing cluster, linked to the first
  // such cluster.
  static TCherryJunctionTree from_construction(int order, std::vector<Hypercherry> steps) {
    if (order < 2) throw usage_error("junction", "t-cherry order must be at least 2");
    if (steps.empty()) throw usage_error("junction", "empty construction");
    std::vector<VertexSet> clusters;
    std::vector<std::pair<std::size_t, std::size_t>> links;
    VertexSet covered;
    for (const auto& s : steps) {
      if (s.separator.size() != static_cast<std::size_t>(order - 1) || s.separator.contains(s.vertex))
        throw usage_error("junction", "hypercherry " + s.str() + " does not have order " +
                                          std::to_string(order));
      if (clusters.empty()) {
        clusters.push_back(s.cluster());
        covered = s.cluster();
        continue;
      }
      if (covered.contains(s.vertex))
        throw usage_error("junction", "hypercherry " + s.str() + " reuses a covered vertex");
      std::size_t host = clusters.size();
      for (std::size_t i = 0; i < clusters.size() && host == clusters.size(); ++i)
        if (s.separator.is_subset_of(clusters[i])) host = i;
      if (host == clusters.size())
        throw usage_error("junction", "separator of " + s.str() + " is not inside any cluster");
      links.emplace_back(host, clusters.size());
      clusters.push_back(s.cluster());
      covered = covered.with(s.vertex);
    }
    TCherryJunctionTree t;
    t.order_ = order;
    t.tree_ = JunctionTree(std::move(clusters), links);
    t.construction_ = std::move(steps);
    return t;
  }

  // Wraps an existing junction tree, deriving a construction sequence by
  // breadth-first traversal from cluster 0.
  static TCherryJunctionTree from_junction_tree(JunctionTree jt, int order) {
    if (order < 2) throw usage_error("junction", "t-cherry order must be at least 2");
    const auto report = validate_junction_tree(jt);
    if (!report.ok()) throw usage_error("junction", "not a junction tree:\n" + report.str());
    const auto& cl = jt.clusters();
    for (const auto& c : cl)
      if (c.size() != static_cast<std::size_t>(order))
        throw usage_error("junction", "cluster " + c.str() + " does not have " +
                                          std::to_string(order) + " vertices");
    std::vector<Hypercherry> steps;
    steps.push_back({cl[0].back(), cl[0].without(cl[0].back())});
    const auto adj = jt.adjacency();
    std::vector<bool> seen(cl.size(), false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (auto v : adj[u]) {
        if (seen[v]) continue;
        seen[v] = true;
        const VertexSet sep = set_intersection(cl[u], cl[v]);
        const VertexSet fresh = set_difference(cl[v], sep);
        if (fresh.size() != 1 || sep.size() != static_cast<std::size_t>(order - 1))
          throw usage_error("junction", "edge " + cl[u].str() + "-" + cl[v].str() +
                                            " is not a hypercherry attachment");
        steps.push_back({fresh.front(), sep});
        q.push(v);
      }
    }
    TCherryJunctionTree t;
    t.order_ = order;
    t.tree_ = std::move(jt);
    t.construction_ = std::move(steps);
    return t;
  }

  // Stored tree plus a construction sequence that must rebuild its clusters.
  static TCherryJunctionTree from_parts(JunctionTree jt, int order,
                                        std::vector<Hypercherry> steps) {
    TCherryJunctionTree t;
    t.order_ = order;
    t.tree_ = std::move(jt);
    t.construction_ = std::move(steps);
    return t;
  }

  const JunctionTree& tree() const noexcept { return tree_; }
  int order() const noexcept { return order_; }
  const std::vector<Hypercherry>& construction() const noexcept { return construction_; }
  const std::vector<VertexSet>& clusters() const noexcept { return tree_.clusters(); }

  // Clusters as a sorted list, the identity used when comparing structures.
  std::vector<VertexSet> cluster_set() const {
    auto c = tree_.clusters();
    std::sort(c.begin(), c.end());
    return c;
  }

 private:
  JunctionTree tree_;
  int order_ = 0;
  std::vector<Hypercherry> construction_;
};

// `dimension` > 0 additionally requires the tree to cover {1..dimension}.
inline ValidityReport validate_tcherry(const TCherryJunctionTree& t, int dimension = 0) {
  ValidityReport r = validate_junction_tree(t.tree());
  const auto k = static_cast<std::size_t>(t.order());
  bool sizes = true;
  for (const auto& c : t.clusters()) sizes = sizes && c.size() == k;
  r.add("cluster_size_k", sizes);
  bool seps = true;
  for (const auto& e : t.tree().edges()) seps = seps && e.separator.size() + 1 == k;
  r.add("separator_size_k_minus_1", seps);

  bool rebuilt = false;
  try {
    const auto replay = TCherryJunctionTree::from_construction(t.order(), t.construction());
    rebuilt = replay.cluster_set() == t.cluster_set();
  } catch (const Error&) {
    rebuilt = false;
  }
  r.add("reconstructible", rebuilt);

  bool nu_ok = true;
  for (const auto& [s, nu] : t.tree().separator_multiplicities()) {
    int holders = 0;
    for (const auto& c : t.clusters()) holders += s.is_subset_of(c) ? 1 : 0;
    nu_ok = nu_ok && holders == nu;
  }
  r.add("separator_multiplicity", nu_ok);

  if (dimension > 0) r.add("covers_all_vertices", t.tree().vertices() == VertexSet::range(dimension));
  return r;
}

// ---------------------------------------------------------------------------
// Serialization.

inline nlohmann::json to_json(const JunctionTree& jt) {
  nlohmann::json j;
  auto clusters = nlohmann::json::array();
  for (const auto& c : jt.clusters()) clusters.push_back(c.items());
  auto edges = nlohmann::json::array();
  for (const auto& e : jt.edges()) edges.push_back({e.a, e.b});
  j["clusters"] = std::move(clusters);
  j["edges"] = std::move(edges);
  return j;
}

inline JunctionTree junction_tree_from_json(const nlohmann::json& j) {
  try {
    std::vector<VertexSet> clusters;
    for (const auto& c : j.at("clusters")) clusters.emplace_back(c.get<std::vector<Vertex>>());
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (const auto& e : j.at("edges")) {
      if (e.size() != 2) throw integrity_error("junction", "edge must have two endpoints");
      links.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
    return JunctionTree(std::move(clusters), links);
  } catch (const nlohmann::json::exception& ex) {
    throw integrity_error("junction", std::string("malformed junction tree: ") + ex.what());
  } catch (const Error& ex) {
    throw integrity_error("junction", ex.what());
  }
}

inline nlohmann::json to_json(const TCherryJunctionTree& t) {
  nlohmann::json j = to_json(t.tree());
  j["order"] = t.order();
  auto steps = nlohmann::json::array();
  for (const auto& s : t.construction())
    steps.push_back({{"vertex", s.vertex}, {"separator", s.separator.items()}});
  j["construction"] = std::move(steps);
  return j;
}

inline TCherryJunctionTree tcherry_from_json(const nlohmann::json& j) {
  try {
    const int order = j.at("order").get<int>();
    JunctionTree jt = junction_tree_from_json(j);
    TCherryJunctionTree t;
    if (j.contains("construction")) {
      std::vector<Hypercherry> steps;
      for (const auto& s : j.at("construction"))
        steps.push_back({s.at("vertex").get<Vertex>(), VertexSet(s.at("separator").get<std::vector<Vertex>>())});
      t = TCherryJunctionTree::from_parts(std::move(jt), order, std::move(steps));
    } else {
      t = TCherryJunctionTree::from_junction_tree(std::move(jt), order);
    }
    const auto report = validate_tcherry(t);
    if (!report.ok()) throw integrity_error("junction", "invalid t-cherry tree:\n" + report.str());
    return t;
  } catch (const nlohmann::json::exception& ex) {
    throw integrity_error("junction", std::string("malformed t-cherry tree: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.kind() == ErrorKind::integrity) throw;
    throw integrity_error("junction", ex.what());
  }
}

inline std::string to_dot(const JunctionTree& jt, const std::string& name = "junction_tree") {
  std::ostringstream out;
  out << "graph " << name << " {\n  node [shape=ellipse];\n";
  for (std::size_t i = 0; i < jt.size(); ++i)
    out << "  c" << i << " [label=\"" << jt.clusters()[i].joined() << "\"];\n";
  for (const auto& e : jt.edges())
    out << "  c" << e.a << " -- c" << e.b << " [label=\"" << e.separator.joined() << "\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace cherrywine

#endif  // CHERRYWINE_JUNCTION_HPP
