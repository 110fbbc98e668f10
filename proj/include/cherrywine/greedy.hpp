#ifndef CHERRYWINE_GREEDY_HPP
#define CHERRYWINE_GREEDY_HPP

// Greedy construction of a maximum-weight k-th order t-cherry junction tree
// from hypercherry weights, and an exhaustive search used to check it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "cherrywine/error.hpp"
#include "cherrywine/infotheory.hpp"
#include "cherrywine/junction.hpp"
#include "cherrywine/vertex_set.hpp"

namespace cherrywine {

// Binomial coefficient; exact for the sizes used here.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t out = 1;
  for (std::uint64_t i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

// Every (vertex, (k-1)-separator) pair over {1..d}, produced lazily in
// (separator, vertex) lexicographic order.
class CandidateSpace {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Hypercherry;
    using difference_type = std::ptrdiff_t;
    using pointer = const Hypercherry*;
    using reference = const Hypercherry&;

    iterator() = default;
    iterator(int d, int k) : d_(d), idx_(static_cast<std::size_t>(k - 1)) {
      for (std::size_t i = 0; i < idx_.size(); ++i) idx_[i] = static_cast<int>(i) + 1;
      vertex_ = 0;
      done_ = false;
      advance_vertex();
    }

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++() {
      advance_vertex();
      return *this;
    }
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_ && a.done_; }

   private:
    bool next_separator() {
      const int r = static_cast<int>(idx_.size());
      int i = r;
      while (i > 0 && idx_[static_cast<std::size_t>(i - 1)] == d_ - r + i) --i;
      if (i == 0) return false;
      ++idx_[static_cast<std::size_t>(i - 1)];
      for (int j = i; j < r; ++j) idx_[static_cast<std::size_t>(j)] = idx_[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }

    void advance_vertex() {
      while (true) {
        ++vertex_;
        while (vertex_ <= d_ && std::binary_search(idx_.begin(), idx_.end(), vertex_)) ++vertex_;
        if (vertex_ <= d_) {
          current_ = {vertex_, VertexSet(idx_)};
          return;
        }
        if (!next_separator()) {
          done_ = true;
          return;
        }
        vertex_ = 0;
      }
    }

    int d_ = 0;
    std::vector<int> idx_;
    int vertex_ = 0;
    bool done_ = true;
    Hypercherry current_;
  };

  CandidateSpace(int d, int k) : d_(d), k_(k) {
    if (k < 2) throw usage_error("greedy", "order must be at least 2");
    if (k > d) throw usage_error("greedy", "order exceeds dimension");
  }

  iterator begin() const { return iterator(d_, k_); }
  iterator end() const { return iterator(); }

  // d * C(d-1, k-1)
  std::uint64_t size() const {
    return static_cast<std::uint64_t>(d_) *
           binomial(static_cast<std::uint64_t>(d_ - 1), static_cast<std::uint64_t>(k_ - 1));
  }

 private:
  int d_;
  int k_;
};

inline CandidateSpace candidate_space(int d, int k) { return CandidateSpace(d, k); }

// A t-cherry junction tree under construction.
class PartialTCherry {
 public:
  explicit PartialTCherry(int order) : order_(order) {}

  void add(const Hypercherry& h) {
    steps_.push_back(h);
    clusters_.push_back(h.cluster());
    covered_ = set_union(covered_, h.cluster());
  }

  const std::vector<VertexSet>& clusters() const noexcept { return clusters_; }
  const VertexSet& covered() const noexcept { return covered_; }
  const std::vector<Hypercherry>& steps() const noexcept { return steps_; }
  int order() const noexcept { return order_; }

  TCherryJunctionTree finish() const {
    return TCherryJunctionTree::from_construction(order_, steps_);
  }

 private:
  int order_;
  std::vector<Hypercherry> steps_;
  std::vector<VertexSet> clusters_;
  VertexSet covered_;
};

// A candidate extends the partial tree iff its vertex is new and its
// separator lies inside an existing cluster.
inline bool admissible(const PartialTCherry& partial, const Hypercherry& x) {
  if (partial.covered().contains(x.vertex)) return false;
  return std::any_of(partial.clusters().begin(), partial.clusters().end(),
                     [&](const VertexSet& c) { return x.separator.is_subset_of(c); });
}

struct WeightedHypercherry {
  Hypercherry candidate;
  double weight = 0.0;  // I(separator + vertex) - I(separator)
};

struct TraceEntry {
  enum class Action { accept, reject };
  Action action;
  Hypercherry candidate;
  double weight;

  std::string str() const {
    std::ostringstream out;
    out << (action == Action::accept ? "ACCEPT " : "REJECT ") << candidate.str()
        << " w=" << std::fixed << std::setprecision(6) << weight;
    return out.str();
  }
};

struct GreedyResult {
  TCherryJunctionTree tree;
  double total_weight = 0.0;
  std::vector<TraceEntry> trace;
  std::vector<std::string> warnings;
};

struct GreedyOptions {
  // true: one pass over the sorted candidates, a rejected candidate is never
  // looked at again. false: after every acceptance the scan restarts from the
  // best remaining candidate, so the tree always grows by the heaviest
  // admissible hypercherry.
  bool single_pass = false;
};

// All candidates with their weights, sorted by decreasing weight and then by
// (separator, vertex).
template <InformationSource Info>
std::vector<WeightedHypercherry> weighted_candidates(Info& info, int d, int k) {
  std::vector<WeightedHypercherry> out;
  for (const Hypercherry& h : candidate_space(d, k)) {
    const double w = info.information(h.cluster()) - info.information(h.separator);
    out.push_back({h, w});
  }
  std::stable_sort(out.begin(), out.end(), [](const WeightedHypercherry& a, const WeightedHypercherry& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.candidate < b.candidate;
  });
  return out;
}

template <InformationSource Info>
GreedyResult build_tcherry_greedy(Info& info, int d, int k, GreedyOptions options = {}) {
  if (k < 2) throw usage_error("greedy", "order must be at least 2");
  if (k > d) throw usage_error("greedy", "order exceeds dimension");
  auto cands = weighted_candidates(info, d, k);
  const VertexSet all = VertexSet::range(d);

  GreedyResult result;
  PartialTCherry partial(k);
  const auto& seed = cands.front();
  partial.add(seed.candidate);
  result.total_weight = info.information(seed.candidate.cluster());
  result.trace.push_back({TraceEntry::Action::accept, seed.candidate, result.total_weight});

  std::vector<bool> alive(cands.size(), true);
  alive[0] = false;
  auto accept = [&](std::size_t i) {
    partial.add(cands[i].candidate);
    result.total_weight += cands[i].weight;
    result.trace.push_back({TraceEntry::Action::accept, cands[i].candidate, cands[i].weight});
    alive[i] = false;
  };

  if (options.single_pass) {
    for (std::size_t i = 1; i < cands.size() && partial.covered() != all; ++i) {
      if (admissible(partial, cands[i].candidate)) {
        accept(i);
      } else {
        result.trace.push_back({TraceEntry::Action::reject, cands[i].candidate, cands[i].weight});
      }
    }
    if (partial.covered() != all)
      throw numerical_error("greedy", "single pass ended before covering every variable");
  } else {
    while (partial.covered() != all) {
      bool grew = false;
      for (std::size_t i = 1; i < cands.size() && !grew; ++i) {
        if (!alive[i]) continue;
        if (partial.covered().contains(cands[i].candidate.vertex)) {
          // can never become admissible again
          alive[i] = false;
          result.trace.push_back({TraceEntry::Action::reject, cands[i].candidate, cands[i].weight});
        } else if (admissible(partial, cands[i].candidate)) {
          accept(i);
          grew = true;
        }
      }
      if (!grew) throw numerical_error("greedy", "no admissible candidate left");
    }
  }
  result.tree = partial.finish();
  return result;
}

inline GreedyResult build_tcherry_greedy(const DiscretizedSample& ds, int k,
                                         GreedyOptions options = {}) {
  const int d = static_cast<int>(ds.cols());
  SampleInformation info(ds);
  std::vector<std::string> warnings;
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    bool constant = true;
    for (std::size_t r = 1; r < ds.rows() && constant; ++r) constant = ds.bin(r, c) == ds.bin(0, c);
    if (constant)
      warnings.push_back("variable " + std::to_string(c + 1) +
                         " is constant after discretization; its information is 0");
  }
  auto result = build_tcherry_greedy(info, d, k, options);
  result.warnings = std::move(warnings);
  return result;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of t-cherry junction trees.

// Calls fn(tree, weight) once for every distinct cluster set of a k-th order
// t-cherry junction tree over {1..d}. Construction sequences are explored
// depth-first; partial structures are deduplicated by their sorted cluster
// lists, so every complete structure is reported exactly once.
template <InformationSource Info, class Fn>
std::size_t enumerate_tcherry_trees(Info& info, int d, int k, Fn&& fn) {
  if (k < 2) throw usage_error("greedy", "order must be at least 2");
  if (k > d) throw usage_error("greedy", "order exceeds dimension");
  const VertexSet all = VertexSet::range(d);
  std::set<std::vector<VertexSet>> visited;
  std::size_t complete = 0;

  std::vector<Hypercherry> steps;
  std::vector<VertexSet> sorted_clusters;
  std::function<void(const VertexSet&, double)> grow = [&](const VertexSet& covered, double weight) {
    if (covered == all) {
      ++complete;
      fn(TCherryJunctionTree::from_construction(k, steps), weight);
      return;
    }
    const std::vector<VertexSet> here = sorted_clusters;
    std::set<VertexSet> separators;
    for (const auto& c : here)
      for (Vertex v : c) separators.insert(c.without(v));
    for (Vertex v : all) {
      if (covered.contains(v)) continue;
      for (const auto& s : separators) {
        const VertexSet cluster = s.with(v);
        auto next = here;
        next.insert(std::upper_bound(next.begin(), next.end(), cluster), cluster);
        if (!visited.insert(next).second) continue;
        steps.push_back({v, s});
        sorted_clusters = next;
        grow(covered.with(v), weight + info.information(cluster) - info.information(s));
        steps.pop_back();
        sorted_clusters = here;
      }
    }
  };

  for_each_combination(all, static_cast<std::size_t>(k), [&](const VertexSet& seed) {
    steps = {{seed.back(), seed.without(seed.back())}};
    sorted_clusters = {seed};
    visited.insert(sorted_clusters);
    grow(seed, info.information(seed));
  });
  return complete;
}

struct ExhaustiveResult {
  TCherryJunctionTree tree;
  double weight = 0.0;
  std::size_t trees_examined = 0;
};

// Globally optimal t-cherry tree by enumeration; the first structure found
// wins ties.
template <InformationSource Info>
ExhaustiveResult exhaustive_tcherry(Info& info, int d, int k, int limit = 7) {
  if (d > limit)
    throw usage_error("greedy", "exhaustive search limited to d <= " + std::to_string(limit));
  ExhaustiveResult best;
  bool have = false;
  best.trees_examined = enumerate_tcherry_trees(info, d, k, [&](const TCherryJunctionTree& t, double w) {
    if (!have || w > best.weight) {
      best.tree = t;
      best.weight = w;
      have = true;
    }
  });
  return best;
}

inline ExhaustiveResult exhaustive_tcherry(const DiscretizedSample& ds, int k, int limit = 7) {
  SampleInformation info(ds);
  return exhaustive_tcherry(info, static_cast<int>(ds.cols()), k, limit);
}

}  // namespace cherrywine

#endif  // CHERRYWINE_GREEDY_HPP
