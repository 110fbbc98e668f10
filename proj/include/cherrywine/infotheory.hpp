#ifndef CHERRYWINE_INFOTHEORY_HPP
#define CHERRYWINE_INFOTHEORY_HPP

// Plug-in entropies and information contents of variable subsets, in bits.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cherrywine/error.hpp"
#include "cherrywine/ingest.hpp"
#include "cherrywine/vertex_set.hpp"

namespace cherrywine {

// Anything that can report I(X_K) for a vertex set K.
template <class S>
concept InformationSource = requires(S& source, const VertexSet& k) {
  { source.information(k) } -> std::convertible_to<double>;
};

// Projection of the binned sample onto the variables in `subset`.
struct MarginalTable {
  VertexSet subset;
  std::vector<std::pair<std::vector<int>, std::size_t>> cells;  // sorted by tuple
  std::size_t total = 0;

  std::size_t count(const std::vector<int>& tuple) const {
    auto it = std::lower_bound(cells.begin(), cells.end(), tuple,
                               [](const auto& cell, const auto& t) { return cell.first < t; });
    return (it != cells.end() && it->first == tuple) ? it->second : 0;
  }
};

namespace detail {

inline void check_subset(const DiscretizedSample& ds, const VertexSet& k) {
  if (k.empty()) throw usage_error("infotheory", "vertex set must be nonempty");
  if (k.front() < 1 || static_cast<std::size_t>(k.back()) > ds.cols())
    throw usage_error("infotheory", "vertex set " + k.str() + " out of range");
}

// Cell counts of the projection onto k, in increasing tuple order. Tuples are
// packed into a mixed-radix integer when the table fits in 63 bits.
inline std::vector<std::size_t> projection_counts(const DiscretizedSample& ds,
                                                  const VertexSet& k,
                                                  std::vector<std::vector<int>>* tuples) {
  const std::size_t n = ds.rows();
  std::vector<std::size_t> cols;
  for (Vertex v : k) cols.push_back(static_cast<std::size_t>(v - 1));

  bool packable = true;
  double capacity = 1.0;
  for (auto c : cols) {
    capacity *= ds.bin_counts()[c];
    if (capacity > 9.0e18) packable = false;
  }

  std::vector<std::size_t> counts;
  if (packable) {
    std::vector<std::uint64_t> keys(n);
    for (std::size_t r = 0; r < n; ++r) {
      std::uint64_t key = 0;
      for (auto c : cols) {
        key = key * static_cast<std::uint64_t>(ds.bin_counts()[c]) +
              static_cast<std::uint64_t>(ds.bin(r, c) - 1);
      }
      keys[r] = key;
    }
    std::sort(keys.begin(), keys.end());
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j < n && keys[j] == keys[i]) ++j;
      counts.push_back(j - i);
      if (tuples) {
        std::vector<int> t(cols.size());
        std::uint64_t key = keys[i];
        for (std::size_t p = cols.size(); p-- > 0;) {
          const auto m = static_cast<std::uint64_t>(ds.bin_counts()[cols[p]]);
          t[p] = static_cast<int>(key % m) + 1;
          key /= m;
        }
        tuples->push_back(std::move(t));
      }
      i = j;
    }
    return counts;
  }

  std::vector<std::vector<int>> rows(n, std::vector<int>(cols.size()));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t p = 0; p < cols.size(); ++p) rows[r][p] = ds.bin(r, cols[p]);
  }
  std::sort(rows.begin(), rows.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && rows[j] == rows[i]) ++j;
    counts.push_back(j - i);
    if (tuples) tuples->push_back(rows[i]);
    i = j;
  }
  return counts;
}

}  // namespace detail

inline MarginalTable marginal_table(const DiscretizedSample& ds, const VertexSet& k) {
  detail::check_subset(ds, k);
  std::vector<std::vector<int>> tuples;
  const auto counts = detail::projection_counts(ds, k, &tuples);
  MarginalTable t;
  t.subset = k;
  t.total = ds.rows();
  t.cells.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) t.cells.emplace_back(std::move(tuples[i]), counts[i]);
  return t;
}

// -sum (c/N) log2(c/N) over the given counts; empty cells contribute nothing.
inline double entropy_from_counts(std::span<const std::size_t> counts, std::size_t total) {
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

inline double entropy(const MarginalTable& t) {
  if (t.total == 0) throw usage_error("infotheory", "entropy of an empty table");
  std::vector<std::size_t> counts;
  counts.reserve(t.cells.size());
  for (const auto& cell : t.cells) counts.push_back(cell.second);
  return entropy_from_counts(counts, t.total);
}

inline double subset_entropy(const DiscretizedSample& ds, const VertexSet& k) {
  detail::check_subset(ds, k);
  const auto counts = detail::projection_counts(ds, k, nullptr);
  return entropy_from_counts(counts, ds.rows());
}

// Memo of information contents keyed by vertex set. Safe for concurrent
// use; a cached value is bit-identical to a fresh evaluation.
class InfoCache {
 public:
  std::optional<double> find(const VertexSet& k) const {
    std::shared_lock lock(mutex_);
    auto it = values_.find(k);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  void store(const VertexSet& k, double value) {
    std::unique_lock lock(mutex_);
    values_.emplace(k, value);
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return values_.size();
  }

  void clear() {
    std::unique_lock lock(mutex_);
    values_.clear();
  }

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<VertexSet, double, VertexSetHash> values_;
};

// I(X_K) = sum_{i in K} H(X_i) - H(X_K), computed without any cache.
inline double information_content(const DiscretizedSample& ds, const VertexSet& k) {
  detail::check_subset(ds, k);
  if (k.size() == 1) return 0.0;
  double sum = 0.0;
  for (Vertex v : k) sum += subset_entropy(ds, VertexSet{v});
  return sum - subset_entropy(ds, k);
}

inline double information_content(const DiscretizedSample& ds, const VertexSet& k,
                                  InfoCache& cache) {
  if (auto hit = cache.find(k)) return *hit;
  const double value = information_content(ds, k);
  cache.store(k, value);
  return value;
}

// Information source backed by a binned sample.
class SampleInformation {
 public:
  explicit SampleInformation(const DiscretizedSample& ds) : ds_(&ds) {}

  double information(const VertexSet& k) { return information_content(*ds_, k, cache_); }
  double entropy(const VertexSet& k) const { return subset_entropy(*ds_, k); }
  std::size_t dimension() const { return ds_->cols(); }
  const DiscretizedSample& sample() const { return *ds_; }
  InfoCache& cache() { return cache_; }

 private:
  const DiscretizedSample* ds_;
  InfoCache cache_;
};

}  // namespace cherrywine

#endif  // CHERRYWINE_INFOTHEORY_HPP
